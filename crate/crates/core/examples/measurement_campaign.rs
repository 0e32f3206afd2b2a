//! Simulated measurement campaigns for parallel qubits: confidence that the
//! state is entangled against the number of measurements.

use qgem::config::ExperimentConfig;
use qgem::entanglement::WitnessKind;
use qgem::shots::{budget_grid, find_crossing, Campaign, CampaignOptions, MeasurementMode};

fn main() -> qgem::error::Result<()> {
    let seed = 2024;
    for gamma in [0.0, 0.05, 0.1] {
        for mode in [MeasurementMode::PerTerm, MeasurementMode::Grouped] {
            let cfg = ExperimentConfig::parallel(2).with_decoherence_rate(gamma);
            let campaign = Campaign::from_config(&cfg, WitnessKind::Ppt, mode, &CampaignOptions::default())?;
            let (m, _) = find_crossing(&campaign, &budget_grid(10, 1_000_000, 25), 50, seed, 0.999)?;
            println!(
                "gamma = {gamma:<5} {mode:<9} <W> = {:+.4}  99.9% at M = {}",
                campaign.exact_witness_value(),
                m.map_or("never".to_string(), |m| m.to_string())
            );
        }
    }

    let campaign = Campaign::from_config(&ExperimentConfig::parallel(2), WitnessKind::Ppt, MeasurementMode::PerTerm, &CampaignOptions::default())?;
    let (record, report) = campaign.run_once(500, seed, 0)?;
    println!("one campaign of 500 shots:");
    for e in &record.entries {
        println!("  term {}  mean {:+.3}  var {:.3}  shots {}", e.term, e.mean, e.variance, e.shots);
    }
    println!(
        "  W = {:+.4}  s_W = {:.4}  t = {:.2}  confidence = {:.5}",
        report.estimate, report.standard_error, report.t_statistic, report.confidence
    );
    Ok(())
}
