//! Command-line front end.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::basis::{decompose_witness, gell_mann_basis, Threshold};
use crate::config::{ExperimentConfig, Setup};
use crate::entanglement::{witness_for, WitnessKind};
use crate::error::{QgemError, Result};
use crate::geometry::check_config_geometry;
use crate::grouping::{commutation_graph, group_terms_ldfc, GroupingOptions};
use crate::io::{self, parse_quantity, Overrides, Quantity, RunManifest, TermsExport};
use crate::shots::MeasurementMode;
use crate::sweep::{self, Grid, Metric, SweepSpec, Table, Variable};

pub const OUT_DIR_ENV: &str = "QGEM_OUT_DIR";

fn length(s: &str) -> std::result::Result<f64, String> {
    parse_quantity(s, Quantity::Length)
}
fn time(s: &str) -> std::result::Result<f64, String> {
    parse_quantity(s, Quantity::Time)
}
fn rate(s: &str) -> std::result::Result<f64, String> {
    parse_quantity(s, Quantity::Rate)
}
fn mass(s: &str) -> std::result::Result<f64, String> {
    parse_quantity(s, Quantity::Mass)
}
fn angle(s: &str) -> std::result::Result<f64, String> {
    parse_quantity(s, Quantity::Angle)
}

#[derive(Debug, Clone, Args)]
pub struct ConfigArgs {
    /// Flat JSON file of SI values; flags override it.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[arg(long, global = true)]
    pub setup: Option<Setup>,
    /// One dimension, or a comma list for sweeps.
    #[arg(long, short = 'd', value_delimiter = ',', global = true)]
    pub dimension: Vec<usize>,
    /// Hold time (accepts s, ms).
    #[arg(long, value_parser = time, global = true)]
    pub tau: Option<f64>,
    /// Dephasing rate (accepts Hz, mHz).
    #[arg(long, value_parser = rate, global = true)]
    pub gamma: Option<f64>,
    /// Superposition width (accepts m, mm, um, nm).
    #[arg(long = "delta-x", value_parser = length, global = true)]
    pub delta_x: Option<f64>,
    /// Minimum separation between the masses.
    #[arg(long, value_parser = length, global = true)]
    pub distance: Option<f64>,
    /// Mass of each particle (accepts kg, g, mg).
    #[arg(long, value_parser = mass, global = true)]
    pub mass: Option<f64>,
    /// Angle in rad; `deg` and `pi` suffixes accepted.
    #[arg(long, value_parser = angle, global = true, allow_hyphen_values = true)]
    pub theta1: Option<f64>,
    #[arg(long, value_parser = angle, global = true, allow_hyphen_values = true)]
    pub theta2: Option<f64>,
    #[arg(long, global = true, default_value = "ppt")]
    pub witness: WitnessKind,
    /// Output directory.
    #[arg(long, env = OUT_DIR_ENV, global = true, default_value = ".")]
    pub out: PathBuf,
}

impl ConfigArgs {
    fn overrides(&self) -> Overrides {
        Overrides {
            setup: self.setup,
            dimension: self.dimension.first().copied(),
            hold_time: self.tau,
            decoherence_rate: self.gamma,
            superposition_width: self.delta_x,
            min_distance: self.distance,
            mass: self.mass,
            theta_1: self.theta1,
            theta_2: self.theta2,
        }
    }

    /// Resolved configuration; custom angles must give a valid geometry.
    pub fn resolve(&self) -> Result<ExperimentConfig> {
        let cfg = io::parse_config(self.config.as_deref(), &self.overrides())?;
        if self.setup == Some(Setup::Custom) || self.theta1.is_some() || self.theta2.is_some() {
            let check = check_config_geometry(&cfg)?;
            if !check.valid {
                return Err(QgemError::Geometry(format!(
                    "angles ({}, {}) bring instances {:?} closer than the minimum distance",
                    cfg.theta_1, cfg.theta_2, check.violations
                )));
            }
        }
        Ok(cfg)
    }

    fn dimensions(&self, cfg: &ExperimentConfig, default: &[usize]) -> Vec<usize> {
        match self.dimension.len() {
            0 if self.config.is_some() => vec![cfg.dimension],
            0 => default.to_vec(),
            _ => self.dimension.clone(),
        }
    }
}

#[derive(Debug, Clone, Args)]
pub struct GridArgs {
    /// Lower end of the swept variable.
    #[arg(long)]
    pub from: Option<String>,
    /// Upper end of the swept variable.
    #[arg(long)]
    pub to: Option<String>,
    #[arg(long)]
    pub points: Option<usize>,
    #[arg(long)]
    pub log: bool,
}

impl GridArgs {
    fn grid(&self, quantity: Quantity, from: f64, to: f64, points: usize) -> Result<Grid> {
        let parse = |s: &Option<String>, key: &str, d: f64| -> Result<f64> {
            s.as_deref()
                .map_or(Ok(d), |t| parse_quantity(t, quantity).map_err(|e| QgemError::config(key, e)))
        };
        let (a, b) = (parse(&self.from, "from", from)?, parse(&self.to, "to", to)?);
        let n = self.points.unwrap_or(points);
        let g = if self.log { Grid::log(a, b, n) } else { Grid::linear(a, b, n) };
        g.validate()?;
        Ok(g)
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Entanglement entropy against hold time.
    Entropy {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Witness expectation against hold time.
    Witness {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Witness expectation against dephasing rate.
    DecoSweep {
        #[command(flatten)]
        grid: GridArgs,
    },
    /// Entropy over the (θ1, θ2) plane with a validity mask.
    Heatmap {
        /// Points per angle axis over [0, 2π).
        #[arg(long, default_value_t = 101)]
        points: usize,
    },
    /// Entropy against superposition width, or against time with scaled widths.
    WidthSweep {
        #[command(flatten)]
        grid: GridArgs,
        /// Tie the width to the dimension: Δx_D = scale·(D−1)·Δx.
        #[arg(long)]
        scaled: bool,
        #[arg(long, default_value_t = 1.0)]
        width_scale: f64,
    },
    /// Witness expectation on a (τ, γ) grid and the zero-crossing γ per τ.
    Tradeoff {
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, value_parser = rate, default_value = "0.2Hz")]
        gamma_max: f64,
        #[arg(long, default_value_t = 41)]
        gamma_points: usize,
    },
    /// Gell-Mann decomposition of the witness.
    Decompose {
        /// Relative cut on |c_ij|.
        #[arg(long, default_value_t = crate::basis::DEFAULT_RELATIVE_THRESHOLD)]
        epsilon: f64,
    },
    /// Commuting groups of the decomposed witness.
    Group {
        /// Extra iterated-greedy passes after the initial colouring.
        #[arg(long, default_value_t = 0)]
        refine: usize,
        #[arg(long, default_value_t = 0x5eed)]
        seed: u64,
    },
    /// Simulated measurement campaigns and their confidence.
    Simulate {
        /// Single total budget; without it a log grid from --from to --to is used.
        #[arg(long)]
        shots: Option<u64>,
        #[arg(long, default_value = "100")]
        from: u64,
        #[arg(long, default_value = "100000")]
        to: u64,
        /// Grid density per decade.
        #[arg(long, default_value_t = 25)]
        per_decade: usize,
        #[arg(long, default_value_t = 100)]
        reps: usize,
        #[arg(long)]
        seed: u64,
        #[arg(long)]
        grouped: bool,
    },
}

#[derive(Debug, Parser)]
#[command(name = "qgem", version, about = "Gravitationally entangled qudit simulator")]
pub struct Cli {
    #[command(flatten)]
    pub config: ConfigArgs,
    #[command(subcommand)]
    pub command: Command,
}

fn witness_metric(kind: WitnessKind) -> Metric {
    match kind {
        WitnessKind::Ppt => Metric::PptExpectation,
        WitnessKind::Vicinity => Metric::VicinityExpectation,
    }
}

fn emit(args: &ConfigArgs, name: &str, table: &Table, manifest: &mut RunManifest) -> Result<PathBuf> {
    let path = io::emit_table(&args.out, name, table, manifest)?;
    println!("wrote {} ({} rows)", path.display(), table.rows.len());
    Ok(path)
}

fn run(args: &ConfigArgs, command: &Command) -> Result<()> {
    let cfg = args.resolve()?;
    let name = match command {
        Command::Entropy { .. } => "entropy",
        Command::Witness { .. } => "witness",
        Command::DecoSweep { .. } => "deco-sweep",
        Command::Heatmap { .. } => "heatmap",
        Command::WidthSweep { .. } => "width-sweep",
        Command::Tradeoff { .. } => "tradeoff",
        Command::Decompose { .. } => "decompose",
        Command::Group { .. } => "group",
        Command::Simulate { .. } => "simulate",
    };
    let mut manifest = RunManifest::new(name, cfg.clone());
    let all = [2, 3, 4, 5, 6];
    match command {
        Command::Entropy { grid } => {
            let g = grid.grid(Quantity::Time, 0.0, 5.0, 51)?;
            let spec = SweepSpec::new(Variable::Time, g, cfg.clone(), Metric::Entropy)
                .with_dimensions(args.dimensions(&cfg, &all));
            let table = sweep::time_sweep(&spec)?;
            manifest = manifest.with_sweep(spec);
            emit(args, "entropy", &table, &mut manifest)?;
        }
        Command::Witness { grid } => {
            let g = grid.grid(Quantity::Time, cfg.hold_time, cfg.hold_time, 1)?;
            let spec = SweepSpec::new(Variable::Time, g, cfg.clone(), witness_metric(args.witness))
                .with_dimensions(args.dimensions(&cfg, &[cfg.dimension]));
            let table = sweep::time_sweep(&spec)?;
            for row in &table.rows {
                println!("tau = {} s, D = {}: <W> = {}", row[0], row[1], row[2]);
            }
            manifest = manifest.with_sweep(spec);
            emit(args, "witness", &table, &mut manifest)?;
        }
        Command::DecoSweep { grid } => {
            let g = grid.grid(Quantity::Rate, 0.0, 0.2, 41)?;
            let spec = SweepSpec::new(Variable::Gamma, g, cfg.clone(), witness_metric(args.witness))
                .with_dimensions(args.dimensions(&cfg, &all));
            let table = sweep::decoherence_sweep(&spec)?;
            for &d in &spec.dimensions {
                let mut c = cfg.clone();
                c.dimension = d;
                if let Some(g) = sweep::zero_crossing_gamma(&c, args.witness, 100.0)? {
                    println!("D = {d}: witness turns non-negative at gamma = {g:.4} Hz");
                }
            }
            manifest = manifest.with_sweep(spec);
            emit(args, "deco_sweep", &table, &mut manifest)?;
        }
        Command::Heatmap { points } => {
            let spec = SweepSpec::new(Variable::ThetaPair, Grid::angles(*points), cfg.clone(), Metric::Entropy)
                .with_dimensions(args.dimensions(&cfg, &[cfg.dimension]));
            let table = sweep::angle_heatmap(&spec)?;
            manifest = manifest.with_sweep(spec);
            emit(args, "heatmap", &table, &mut manifest)?;
        }
        Command::WidthSweep { grid, scaled, width_scale } => {
            let mut spec = if *scaled {
                let g = grid.grid(Quantity::Time, 0.0, 5.0, 51)?;
                SweepSpec::new(Variable::Time, g, cfg.clone(), Metric::Entropy)
            } else {
                let g = grid.grid(Quantity::Length, 50e-6, 500e-6, 46)?;
                SweepSpec::new(Variable::Width, g, cfg.clone(), Metric::Entropy)
            }
            .with_dimensions(args.dimensions(&cfg, &all));
            spec.width_scale = *width_scale;
            let table = sweep::width_sweep(&spec, *scaled)?;
            manifest = manifest.with_sweep(spec);
            emit(args, "width_sweep", &table, &mut manifest)?;
        }
        Command::Tradeoff { grid, gamma_max, gamma_points } => {
            let g = grid.grid(Quantity::Time, 1.5, 3.5, 5)?;
            let spec = SweepSpec::new(Variable::Time, g, cfg.clone(), witness_metric(args.witness))
                .with_dimensions(args.dimensions(&cfg, &[2, 6]))
                .with_secondary(Grid::linear(0.0, *gamma_max, *gamma_points));
            let table = sweep::runtime_tradeoff(&spec)?;
            let mut rows = Vec::new();
            for &d in &spec.dimensions {
                for tau in spec.grid.values() {
                    let mut c = cfg.clone().with_hold_time(tau);
                    c.dimension = d;
                    let g = sweep::zero_crossing_gamma(&c, args.witness, 100.0)?.unwrap_or(f64::NAN);
                    rows.push(vec![tau.into(), d.into(), g.into()]);
                }
            }
            manifest = manifest.with_sweep(spec);
            emit(args, "tradeoff", &table, &mut manifest)?;
            let crossings = Table::new(&["tau_s", "D", "gamma_zero_hz"], rows);
            emit(args, "tradeoff_crossings", &crossings, &mut manifest)?;
        }
        Command::Decompose { epsilon } => {
            let (export, _) = decompose(&cfg, args.witness, *epsilon, GroupingOptions::default())?;
            write_terms(args, "witness_terms", &export, &mut manifest)?;
        }
        Command::Group { refine, seed } => {
            let opts = GroupingOptions { refinement_passes: *refine, seed: *seed };
            let (export, graph_edges) = decompose(&cfg, args.witness, crate::basis::DEFAULT_RELATIVE_THRESHOLD, opts)?;
            println!(
                "{} measured terms, {} commuting pairs, {} groups",
                export.terms.iter().filter(|t| t.i != 0 || t.j != 0).count(),
                graph_edges,
                export.groups.len()
            );
            manifest = manifest.with_seed(*seed);
            write_terms(args, "groups", &export, &mut manifest)?;
        }
        Command::Simulate { shots, from, to, per_decade, reps, seed, grouped } => {
            let grid = match shots {
                Some(m) => Grid::single(*m as f64),
                None => Grid::log_per_decade(*from as f64, *to as f64, *per_decade),
            };
            let mut spec = SweepSpec::new(Variable::Budget, grid, cfg.clone(), Metric::Confidence)
                .with_dimensions(args.dimensions(&cfg, &[cfg.dimension]));
            spec.witness = args.witness;
            spec.mode = if *grouped { MeasurementMode::Grouped } else { MeasurementMode::PerTerm };
            spec.repetitions = *reps;
            spec.seed = *seed;
            let table = sweep::measurement_curve(&spec)?;
            if let Some(first) = table.rows.iter().find(|r| r[1].as_f64().is_some_and(|c| c >= 0.999)) {
                println!("99.9% confidence first reached at M = {}", first[0]);
            }
            manifest = manifest.with_sweep(spec).with_seed(*seed);
            emit(args, "confidence", &table, &mut manifest)?;
        }
    }
    Ok(())
}

fn decompose(
    cfg: &ExperimentConfig,
    kind: WitnessKind,
    epsilon: f64,
    grouping: GroupingOptions,
) -> Result<(TermsExport, usize)> {
    let mut zero = cfg.clone();
    zero.decoherence_rate = 0.0;
    let w = witness_for(&zero, kind)?
        .ok_or_else(|| QgemError::Unsupported("state is PPT, no witness".into()))?;
    let basis = gell_mann_basis(cfg.dimension)?;
    let dec = decompose_witness(&w, &basis, Threshold::Relative(epsilon))?;
    let graph = commutation_graph(&dec, &basis)?;
    let groups = group_terms_ldfc(&graph, &dec, &basis, &grouping)?;
    Ok((TermsExport::new(&dec, &groups), graph.edge_count()))
}

fn write_terms(args: &ConfigArgs, name: &str, export: &TermsExport, manifest: &mut RunManifest) -> Result<()> {
    let path = args.out.join(format!("{name}.json"));
    io::write_json(&path, export)?;
    manifest.outputs.push(path.clone());
    io::write_manifest(&args.out.join(format!("{name}_manifest.json")), manifest)?;
    println!("wrote {} ({} terms, {} groups)", path.display(), export.terms.len(), export.groups.len());
    Ok(())
}

/// Parses `argv`, runs the command and returns the process exit code.
pub fn main_with_args<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let root = match Cli::try_parse_from(argv) {
        Ok(r) => r,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match run(&root.config, &root.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

pub fn main() -> i32 {
    main_with_args(std::env::args_os())
}
