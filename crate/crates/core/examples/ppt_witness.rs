//! Builds the partial-transpose witness for parallel qubits and prints it in
//! the Pauli basis together with its expectation value.

use qgem::basis::{decompose_witness, gell_mann_basis, Threshold};
use qgem::config::ExperimentConfig;
use qgem::entanglement::{witness_expectation, witness_for, WitnessKind};
use qgem::state::evolved_density;

fn main() -> qgem::error::Result<()> {
    let cfg = ExperimentConfig::parallel(2);
    let w = witness_for(&cfg, WitnessKind::Ppt)?.expect("entangled at 2.5 s");
    println!("most negative eigenvalue of rho^T2: {:.5}", w.negative_eigenvalue.unwrap_or(0.0));

    let names = ["I", "X", "Y", "Z"];
    let dec = decompose_witness(&w, &gell_mann_basis(2)?, Threshold::default())?;
    for t in &dec.terms {
        println!("  {:+.4} {}{}", t.coefficient, names[t.first], names[t.second]);
    }
    let value = witness_expectation(&w, &evolved_density(&cfg)?)?;
    println!("<W> = {value:.4}");
    Ok(())
}
