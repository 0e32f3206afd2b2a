//! Parameter scans producing tables.

use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::entanglement::{pure_state_entropy, witness_expectation, witness_for, WitnessKind};
use crate::error::{QgemError, Result};
use crate::geometry::check_config_geometry;
use crate::shots::{Campaign, CampaignOptions, MeasurementMode};
use crate::state::{evolved_density, pure_state};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Variable {
    Time,
    Gamma,
    ThetaPair,
    Width,
    Budget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
    /// Linear with the upper end excluded, for angles.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub min: f64,
    pub max: f64,
    pub points: usize,
    pub spacing: Spacing,
}

impl Grid {
    pub fn linear(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, spacing: Spacing::Linear }
    }

    pub fn log(min: f64, max: f64, points: usize) -> Self {
        Self { min, max, points, spacing: Spacing::Log }
    }

    /// Log grid with a fixed density per decade.
    pub fn log_per_decade(min: f64, max: f64, per_decade: usize) -> Self {
        let decades = (max / min).log10();
        Self::log(min, max, (decades * per_decade as f64).ceil() as usize + 1)
    }

    /// `[0, 2π)` in `points` steps.
    pub fn angles(points: usize) -> Self {
        Self { min: 0.0, max: 2.0 * PI, points, spacing: Spacing::Periodic }
    }

    pub fn single(value: f64) -> Self {
        Self::linear(value, value, 1)
    }

    pub fn validate(&self) -> Result<()> {
        if self.points == 0 {
            return Err(QgemError::config("points", "grid is empty"));
        }
        if !self.min.is_finite() || !self.max.is_finite() {
            return Err(QgemError::config("grid", "bounds must be finite"));
        }
        if self.points > 1 && self.max <= self.min {
            return Err(QgemError::config("grid", "max must exceed min"));
        }
        if self.spacing == Spacing::Log && self.min <= 0.0 {
            return Err(QgemError::config("grid", "log spacing needs a positive minimum"));
        }
        Ok(())
    }

    pub fn values(&self) -> Vec<f64> {
        let n = self.points;
        if n == 1 {
            return vec![self.min];
        }
        (0..n)
            .map(|k| match self.spacing {
                Spacing::Linear => self.min + (self.max - self.min) * k as f64 / (n - 1) as f64,
                Spacing::Periodic => self.min + (self.max - self.min) * k as f64 / n as f64,
                Spacing::Log => {
                    let (a, b) = (self.min.ln(), self.max.ln());
                    (a + (b - a) * k as f64 / (n - 1) as f64).exp()
                }
            })
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Metric {
    Entropy,
    PptExpectation,
    VicinityExpectation,
    Confidence,
}

impl Metric {
    pub fn column(self) -> &'static str {
        match self {
            Metric::Entropy => "entropy_bits",
            Metric::PptExpectation => "ppt_expectation",
            Metric::VicinityExpectation => "vicinity_expectation",
            Metric::Confidence => "mean_confidence",
        }
    }

    fn witness(self) -> Option<WitnessKind> {
        match self {
            Metric::PptExpectation => Some(WitnessKind::Ppt),
            Metric::VicinityExpectation => Some(WitnessKind::Vicinity),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    pub variable: Variable,
    pub grid: Grid,
    /// Second axis: θ2 for heatmaps, γ for the runtime trade-off.
    pub secondary: Option<Grid>,
    pub base: ExperimentConfig,
    pub dimensions: Vec<usize>,
    pub metric: Metric,
    pub witness: WitnessKind,
    pub mode: MeasurementMode,
    pub repetitions: usize,
    pub seed: u64,
    /// Width scaling factor `f` in `Δx_D = f·(D−1)·Δx_base`.
    pub width_scale: f64,
}

impl SweepSpec {
    pub fn new(variable: Variable, grid: Grid, base: ExperimentConfig, metric: Metric) -> Self {
        Self {
            variable,
            grid,
            secondary: None,
            dimensions: vec![base.dimension],
            base,
            metric,
            witness: WitnessKind::Ppt,
            mode: MeasurementMode::PerTerm,
            repetitions: 100,
            seed: 0,
            width_scale: 1.0,
        }
    }

    pub fn with_dimensions(mut self, dims: impl IntoIterator<Item = usize>) -> Self {
        self.dimensions = dims.into_iter().collect();
        self
    }

    pub fn with_secondary(mut self, grid: Grid) -> Self {
        self.secondary = Some(grid);
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.grid.validate()?;
        if let Some(g) = &self.secondary {
            g.validate()?;
        }
        if self.dimensions.is_empty() {
            return Err(QgemError::config("dimension", "no dimensions to sweep"));
        }
        for &d in &self.dimensions {
            let mut c = self.base.clone();
            c.dimension = d;
            c.validate()?;
        }
        let entropy = self.metric == Metric::Entropy;
        if entropy && (self.base.decoherence_rate > 0.0 || self.variable == Variable::Gamma) {
            return Err(QgemError::config(
                "decoherence_rate",
                "entropy is only meaningful for the undecohered pure state",
            ));
        }
        if (self.metric == Metric::Confidence) != (self.variable == Variable::Budget) {
            return Err(QgemError::config("metric", "confidence goes with a budget sweep and only there"));
        }
        if self.variable == Variable::ThetaPair && !entropy {
            return Err(QgemError::config("metric", "angle heatmaps show entropy"));
        }
        if !(self.width_scale > 0.0) {
            return Err(QgemError::config("width_scale", "must be positive"));
        }
        if self.metric == Metric::Confidence && self.repetitions == 0 {
            return Err(QgemError::config("reps", "must be at least 1"));
        }
        Ok(())
    }

    fn config_for(&self, dimension: usize) -> ExperimentConfig {
        let mut c = self.base.clone();
        c.dimension = dimension;
        c
    }

    fn require(&self, variable: Variable) -> Result<()> {
        if self.variable != variable {
            return Err(QgemError::config("variable", format!("expected a {variable:?} sweep")));
        }
        self.validate()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Cell {
    Int(u64),
    Float(f64),
    Text(String),
}

impl Cell {
    pub fn as_f64(&self) -> Option<f64> {
        match self {
            Cell::Int(v) => Some(*v as f64),
            Cell::Float(v) => Some(*v),
            Cell::Text(_) => None,
        }
    }
}

impl std::fmt::Display for Cell {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Cell::Int(v) => write!(f, "{v}"),
            Cell::Float(v) if v.is_nan() => f.write_str("NaN"),
            Cell::Float(v) => write!(f, "{v}"),
            Cell::Text(s) => f.write_str(s),
        }
    }
}

impl From<f64> for Cell {
    fn from(v: f64) -> Self {
        Cell::Float(v)
    }
}

impl From<usize> for Cell {
    fn from(v: usize) -> Self {
        Cell::Int(v as u64)
    }
}

impl From<u64> for Cell {
    fn from(v: u64) -> Self {
        Cell::Int(v)
    }
}

impl From<&str> for Cell {
    fn from(v: &str) -> Self {
        Cell::Text(v.to_owned())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&str], rows: Vec<Vec<Cell>>) -> Self {
        Self { columns: columns.iter().map(|c| c.to_string()).collect(), rows }
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.columns.iter().position(|c| c == name)
    }

    /// Numeric values of one column.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.column_index(name)?;
        Some(self.rows.iter().map(|r| r[k].as_f64().unwrap_or(f64::NAN)).collect())
    }

    /// Rows where `key` equals `value`.
    pub fn filter(&self, key: &str, value: f64) -> Table {
        let k = self.column_index(key).expect("known column");
        Table {
            columns: self.columns.clone(),
            rows: self.rows.iter().filter(|r| r[k].as_f64() == Some(value)).cloned().collect(),
        }
    }
}

/// Evaluates a non-statistical metric at one configuration.
///
/// Witness metrics are NaN when the undecohered state has no witness.
pub fn evaluate(config: &ExperimentConfig, metric: Metric) -> Result<f64> {
    match metric {
        Metric::Entropy => Ok(pure_state_entropy(&pure_state(config)?)),
        Metric::PptExpectation | Metric::VicinityExpectation => {
            let kind = metric.witness().expect("witness metric");
            match witness_for(config, kind)? {
                Some(w) => witness_expectation(&w, &evolved_density(config)?),
                None => Ok(f64::NAN),
            }
        }
        Metric::Confidence => Err(QgemError::config("metric", "confidence needs a budget sweep")),
    }
}

fn product<A: Copy, B: Copy>(a: &[A], b: &[B]) -> Vec<(A, B)> {
    a.iter().flat_map(|&x| b.iter().map(move |&y| (x, y))).collect()
}

/// Metric against hold time, one block of rows per dimension.
pub fn time_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.require(Variable::Time)?;
    let cells = product(&spec.dimensions, &spec.grid.values());
    let rows = cells
        .par_iter()
        .map(|&(d, tau)| {
            let v = evaluate(&spec.config_for(d).with_hold_time(tau), spec.metric)?;
            Ok(vec![tau.into(), d.into(), v.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table::new(&["tau_s", "D", spec.metric.column()], rows))
}

/// Witness expectation against the dephasing rate.
pub fn decoherence_sweep(spec: &SweepSpec) -> Result<Table> {
    spec.require(Variable::Gamma)?;
    if spec.metric.witness().is_none() {
        return Err(QgemError::config("metric", "decoherence sweeps report a witness expectation"));
    }
    let cells = product(&spec.dimensions, &spec.grid.values());
    let rows = cells
        .par_iter()
        .map(|&(d, gamma)| {
            let v = evaluate(&spec.config_for(d).with_decoherence_rate(gamma), spec.metric)?;
            Ok(vec![gamma.into(), d.into(), v.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table::new(&["gamma_hz", "D", spec.metric.column()], rows))
}

/// Entropy over the (θ1, θ2) plane. Cells whose geometry brings instances
/// closer than the minimum distance are NaN with `valid = 0`.
pub fn angle_heatmap(spec: &SweepSpec) -> Result<Table> {
    spec.require(Variable::ThetaPair)?;
    let t1 = spec.grid.values();
    let t2 = spec.secondary.unwrap_or(spec.grid).values();
    let cells: Vec<(usize, (f64, f64))> = product(&spec.dimensions, &product(&t1, &t2));
    let rows = cells
        .par_iter()
        .map(|&(d, (a, b))| {
            let cfg = spec.config_for(d).with_angles(a, b);
            let valid = check_config_geometry(&cfg).map(|g| g.valid).unwrap_or(false);
            let v = if valid { evaluate(&cfg, Metric::Entropy)? } else { f64::NAN };
            Ok(vec![a.into(), b.into(), d.into(), v.into(), Cell::Int(valid as u64)])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table::new(&["theta1_rad", "theta2_rad", "D", "entropy_bits", "valid"], rows))
}

/// Superposition width used at dimension `d` in scaled mode.
pub fn scaled_width(base_width: f64, dimension: usize, factor: f64) -> f64 {
    factor * (dimension as f64 - 1.0) * base_width
}

/// Unscaled: metric against Δx at each dimension.
/// Scaled: Δx tied to the dimension by [`scaled_width`], metric against τ.
pub fn width_sweep(spec: &SweepSpec, scaled: bool) -> Result<Table> {
    if spec.metric == Metric::Confidence {
        return Err(QgemError::config("metric", "width sweeps report entropy or a witness expectation"));
    }
    if scaled {
        spec.require(Variable::Time)?;
        let cells = product(&spec.dimensions, &spec.grid.values());
        let rows = cells
            .par_iter()
            .map(|&(d, tau)| {
                let dx = scaled_width(spec.base.superposition_width, d, spec.width_scale);
                let cfg = spec.config_for(d).with_superposition_width(dx).with_hold_time(tau);
                let v = evaluate(&cfg, spec.metric)?;
                Ok(vec![tau.into(), d.into(), dx.into(), v.into()])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Table::new(&["tau_s", "D", "delta_x_m", spec.metric.column()], rows))
    } else {
        spec.require(Variable::Width)?;
        let cells = product(&spec.dimensions, &spec.grid.values());
        let rows = cells
            .par_iter()
            .map(|&(d, dx)| {
                let v = evaluate(&spec.config_for(d).with_superposition_width(dx), spec.metric)?;
                Ok(vec![dx.into(), d.into(), v.into()])
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Table::new(&["delta_x_m", "D", spec.metric.column()], rows))
    }
}

/// Dephasing rate at which the witness expectation reaches zero, found by
/// bisection. `None` if there is no witness or it stays negative up to `limit`.
pub fn zero_crossing_gamma(config: &ExperimentConfig, kind: WitnessKind, limit: f64) -> Result<Option<f64>> {
    let Some(w) = witness_for(config, kind)? else {
        return Ok(None);
    };
    let value = |g: f64| -> Result<f64> {
        witness_expectation(&w, &evolved_density(&config.clone().with_decoherence_rate(g))?)
    };
    if value(0.0)? >= 0.0 {
        return Ok(Some(0.0));
    }
    let (mut lo, mut hi) = (0.0, limit.min(1e-3).max(f64::MIN_POSITIVE));
    while value(hi)? < 0.0 {
        if hi >= limit {
            return Ok(None);
        }
        lo = hi;
        hi = (2.0 * hi).min(limit);
    }
    while hi - lo > 1e-10 * hi.max(1e-12) {
        let mid = 0.5 * (lo + hi);
        if value(mid)? < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(0.5 * (lo + hi)))
}

/// Witness expectation on a (τ, γ) grid for each dimension.
pub fn runtime_tradeoff(spec: &SweepSpec) -> Result<Table> {
    spec.require(Variable::Time)?;
    let kind = spec
        .metric
        .witness()
        .ok_or_else(|| QgemError::config("metric", "the trade-off reports a witness expectation"))?;
    let gammas = spec
        .secondary
        .ok_or_else(|| QgemError::config("gamma", "the trade-off needs a γ grid"))?
        .values();
    let cells: Vec<(usize, (f64, f64))> = product(&spec.dimensions, &product(&spec.grid.values(), &gammas));
    let rows = cells
        .par_iter()
        .map(|&(d, (tau, gamma))| {
            let cfg = spec.config_for(d).with_hold_time(tau).with_decoherence_rate(gamma);
            let v = match witness_for(&cfg, kind)? {
                Some(w) => witness_expectation(&w, &evolved_density(&cfg)?)?,
                None => f64::NAN,
            };
            Ok(vec![tau.into(), gamma.into(), d.into(), v.into()])
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Table::new(&["tau_s", "gamma_hz", "D", spec.metric.column()], rows))
}

pub const CURVE_COLUMNS: [&str; 10] = [
    "M",
    "mean_confidence",
    "std_confidence",
    "W_mean",
    "s_W_mean",
    "mode",
    "D",
    "gamma",
    "tau",
    "seed",
];

/// Mean confidence against total shot budget.
pub fn measurement_curve(spec: &SweepSpec) -> Result<Table> {
    spec.require(Variable::Budget)?;
    let mut rows = Vec::new();
    for &d in &spec.dimensions {
        let cfg = spec.config_for(d);
        let campaign = Campaign::from_config(&cfg, spec.witness, spec.mode, &CampaignOptions::default())?;
        let mut budgets: Vec<u64> = spec.grid.values().iter().map(|m| m.round() as u64).collect();
        budgets.dedup();
        let trials = budgets
            .par_iter()
            .map(|&m| campaign.run_trial(m, spec.repetitions, spec.seed))
            .collect::<Result<Vec<_>>>()?;
        for t in trials {
            rows.push(vec![
                t.total_shots.into(),
                t.mean_confidence.into(),
                t.std_confidence.into(),
                t.mean_estimate.into(),
                t.mean_standard_error.into(),
                spec.mode.as_str().into(),
                d.into(),
                cfg.decoherence_rate.into(),
                cfg.hold_time.into(),
                spec.seed.into(),
            ]);
        }
    }
    Ok(Table::new(&CURVE_COLUMNS, rows))
}
