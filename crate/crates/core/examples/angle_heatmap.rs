//! Entropy over all arm angles on a coarse grid, drawn as characters.
//! `#` marks geometries where the masses come closer than allowed.

use qgem::config::ExperimentConfig;
use qgem::sweep::{angle_heatmap, Grid, Metric, SweepSpec, Variable};

fn main() -> qgem::error::Result<()> {
    let n = 24;
    let spec = SweepSpec::new(Variable::ThetaPair, Grid::angles(n), ExperimentConfig::parallel(2), Metric::Entropy);
    let table = angle_heatmap(&spec)?;
    let values = table.column("entropy_bits").expect("entropy column");
    let max = values.iter().copied().filter(|v| v.is_finite()).fold(0.0, f64::max);
    let shades = [' ', '.', ':', '-', '=', '+', '*', '%', '@'];
    println!("rows: theta1 from 0 to 2pi, columns: theta2 from 0 to 2pi (max S = {max:.3})");
    for i in 0..n {
        let line: String = (0..n)
            .map(|j| {
                let v = values[i * n + j];
                if v.is_nan() {
                    '#'
                } else {
                    shades[((v / max) * (shades.len() - 1) as f64).round() as usize]
                }
            })
            .collect();
        println!("{line}");
    }
    Ok(())
}
