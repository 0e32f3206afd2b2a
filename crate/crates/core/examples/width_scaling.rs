//! Entropy against superposition width at fixed D, then with the width tied to
//! the dimension so that neighbouring instances keep their spacing.

use qgem::config::ExperimentConfig;
use qgem::sweep::{width_sweep, Grid, Metric, SweepSpec, Variable};

fn main() -> qgem::error::Result<()> {
    let fixed = SweepSpec::new(Variable::Width, Grid::linear(50e-6, 500e-6, 4), ExperimentConfig::parallel(2), Metric::Entropy)
        .with_dimensions([2, 4, 6]);
    for row in width_sweep(&fixed, false)?.rows {
        println!("dx = {:>7.1} um  D = {}  S = {:.4}", row[0].as_f64().unwrap() * 1e6, row[1], row[2].as_f64().unwrap());
    }

    println!("scaled widths, tau = 2.5 s");
    let scaled = SweepSpec::new(Variable::Time, Grid::single(2.5), ExperimentConfig::parallel(2), Metric::Entropy)
        .with_dimensions(2..=6);
    for row in width_sweep(&scaled, true)?.rows {
        println!("D = {}  dx = {:>7.1} um  S = {:.4}", row[1], row[2].as_f64().unwrap() * 1e6, row[3].as_f64().unwrap());
    }
    Ok(())
}
