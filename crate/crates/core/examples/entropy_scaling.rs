//! Entanglement entropy of the parallel set-up after 2.5 s, D = 2..6 and a
//! large-D proxy for the limit.
//!
//! ```text
//! cargo run --release --example entropy_scaling
//! ```

use qgem::config::ExperimentConfig;
use qgem::entanglement::pure_state_entropy;
use qgem::state::pure_state;

fn main() -> qgem::error::Result<()> {
    for d in [2, 3, 4, 5, 6, 10, 20, 40] {
        let psi = pure_state(&ExperimentConfig::parallel(d))?;
        println!("D = {d:>2}  S = {:.4} bits", pure_state_entropy(&psi));
    }
    // linear arrangement for comparison
    let psi = pure_state(&ExperimentConfig::linear(2))?;
    println!("linear D = 2  S = {:.4} bits", pure_state_entropy(&psi));
    Ok(())
}
