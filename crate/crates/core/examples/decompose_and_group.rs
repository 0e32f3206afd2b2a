//! Term counts of the witness decomposition and the number of jointly
//! measurable groups, per dimension.
//!
//! Pass a number of refinement passes as the first argument to improve the
//! colouring, e.g. `cargo run --release --example decompose_and_group 2000`.

use qgem::basis::{decompose_witness, gell_mann_basis, Threshold};
use qgem::config::ExperimentConfig;
use qgem::entanglement::{witness_for, WitnessKind};
use qgem::grouping::{commutation_graph, group_terms_ldfc, GroupingOptions};

fn main() -> qgem::error::Result<()> {
    let passes = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(0);
    let options = GroupingOptions { refinement_passes: passes, ..Default::default() };
    println!("D  terms  commuting pairs  groups");
    for d in 2..=6 {
        let w = witness_for(&ExperimentConfig::parallel(d), WitnessKind::Ppt)?.expect("entangled");
        let basis = gell_mann_basis(d)?;
        let dec = decompose_witness(&w, &basis, Threshold::default())?;
        let graph = commutation_graph(&dec, &basis)?;
        let groups = group_terms_ldfc(&graph, &dec, &basis, &options)?;
        println!("{d}  {:<5}  {:<15}  {}", dec.terms.len(), graph.edge_count(), groups.len());
    }
    Ok(())
}
