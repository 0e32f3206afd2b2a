//! How the largest tolerable dephasing rate depends on the hold time.

use qgem::config::ExperimentConfig;
use qgem::entanglement::WitnessKind;
use qgem::sweep::zero_crossing_gamma;

fn main() -> qgem::error::Result<()> {
    println!("tau/s   gamma*(D=2)/Hz   gamma*(D=6)/Hz");
    for tau in [1.0, 1.5, 2.0, 2.5, 3.0, 3.5, 4.0] {
        let g = |d| zero_crossing_gamma(&ExperimentConfig::parallel(d).with_hold_time(tau), WitnessKind::Ppt, 100.0);
        println!("{tau:<7} {:<16.4} {:.4}", g(2)?.unwrap_or(f64::NAN), g(6)?.unwrap_or(f64::NAN));
    }
    Ok(())
}
