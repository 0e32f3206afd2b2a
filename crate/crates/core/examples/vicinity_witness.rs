//! Compares the vicinity witness with the partial-transpose witness across
//! dimensions.

use qgem::config::ExperimentConfig;
use qgem::entanglement::{witness_expectation, witness_for, WitnessKind};
use qgem::state::evolved_density;

fn main() -> qgem::error::Result<()> {
    println!("  D   lambda_m^2   <W_vic>      <W_ppt>");
    for d in 2..=6 {
        let cfg = ExperimentConfig::parallel(d);
        let rho = evolved_density(&cfg)?;
        let vic = witness_for(&cfg, WitnessKind::Vicinity)?.expect("always defined");
        let ppt = witness_for(&cfg, WitnessKind::Ppt)?.expect("entangled");
        println!(
            "  {d}   {:.5}      {:+.5}     {:+.5}",
            vic.schmidt_max.unwrap_or(f64::NAN).powi(2),
            witness_expectation(&vic, &rho)?,
            witness_expectation(&ppt, &rho)?,
        );
    }
    Ok(())
}
