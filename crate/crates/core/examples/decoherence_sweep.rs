//! Witness expectation against dephasing rate for D = 2 and D = 6, with the
//! rate at which each witness stops detecting entanglement.

use qgem::config::ExperimentConfig;
use qgem::entanglement::WitnessKind;
use qgem::sweep::{decoherence_sweep, zero_crossing_gamma, Grid, Metric, SweepSpec, Variable};

fn main() -> qgem::error::Result<()> {
    let spec = SweepSpec::new(Variable::Gamma, Grid::linear(0.0, 0.2, 9), ExperimentConfig::parallel(2), Metric::PptExpectation)
        .with_dimensions([2, 6]);
    let table = decoherence_sweep(&spec)?;
    println!("{}", table.columns.join("  "));
    for row in &table.rows {
        println!("{:<8.3} {:<2} {:+.4}", row[0].as_f64().unwrap(), row[1], row[2].as_f64().unwrap());
    }
    for d in [2, 6] {
        let g = zero_crossing_gamma(&ExperimentConfig::parallel(d), WitnessKind::Ppt, 100.0)?;
        println!("D = {d}: <W> reaches 0 at gamma = {:.4} Hz", g.unwrap_or(f64::NAN));
    }
    Ok(())
}
