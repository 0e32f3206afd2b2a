//! Configuration files, unit suffixes and result files.

use std::f64::consts::PI;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};
use std::time::{SystemTime, UNIX_EPOCH};

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::basis::WitnessDecomposition;
use crate::config::{ExperimentConfig, Setup};
use crate::error::{QgemError, Result};
use crate::grouping::MeasurementGroup;
use crate::sweep::{SweepSpec, Table};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

const CONFIG_KEYS: [&str; 11] = [
    "dimension",
    "superposition_width",
    "min_distance",
    "mass_1",
    "mass_2",
    "hold_time",
    "decoherence_rate",
    "theta_1",
    "theta_2",
    "gravitational_constant",
    "reduced_planck",
];

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Length,
    Time,
    Rate,
    Mass,
    Angle,
}

impl Quantity {
    fn scale(self, unit: &str) -> Option<f64> {
        let s = match (self, unit) {
            (_, "") => 1.0,
            (Quantity::Length, "m") => 1.0,
            (Quantity::Length, "mm") => 1e-3,
            (Quantity::Length, "um" | "µm" | "μm") => 1e-6,
            (Quantity::Length, "nm") => 1e-9,
            (Quantity::Time, "s") => 1.0,
            (Quantity::Time, "ms") => 1e-3,
            (Quantity::Time, "us" | "µs" | "μs") => 1e-6,
            (Quantity::Rate, "Hz" | "hz" | "/s") => 1.0,
            (Quantity::Rate, "mHz" | "mhz") => 1e-3,
            (Quantity::Rate, "kHz" | "khz") => 1e3,
            (Quantity::Mass, "kg") => 1.0,
            (Quantity::Mass, "g") => 1e-3,
            (Quantity::Mass, "mg") => 1e-6,
            (Quantity::Mass, "ug" | "µg" | "μg") => 1e-9,
            (Quantity::Angle, "rad") => 1.0,
            (Quantity::Angle, "deg") => PI / 180.0,
            (Quantity::Angle, "pi" | "π") => PI,
            _ => return None,
        };
        Some(s)
    }
}

/// Parses a number with an optional unit suffix into SI units.
///
/// `"250um"` is `2.5e-4`, `"0.1Hz"` is `0.1`, `"1.5pi"` is `1.5π` rad.
pub fn parse_quantity(text: &str, quantity: Quantity) -> std::result::Result<f64, String> {
    let t = text.trim();
    // longest numeric prefix
    let split = (1..=t.len())
        .rev()
        .filter(|&i| t.is_char_boundary(i))
        .find(|&i| t[..i].parse::<f64>().is_ok())
        .ok_or_else(|| format!("`{text}` is not a number"))?;
    let (num, unit) = t.split_at(split);
    let value: f64 = num.parse().map_err(|_| format!("`{text}` is not a number"))?;
    let scale = quantity
        .scale(unit.trim())
        .ok_or_else(|| format!("unit `{}` does not fit a {quantity:?}", unit.trim()))?;
    Ok(value * scale)
}

/// Flag values layered over the file contents; `None` leaves a value alone.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub setup: Option<Setup>,
    pub dimension: Option<usize>,
    pub hold_time: Option<f64>,
    pub decoherence_rate: Option<f64>,
    pub superposition_width: Option<f64>,
    pub min_distance: Option<f64>,
    pub mass: Option<f64>,
    pub theta_1: Option<f64>,
    pub theta_2: Option<f64>,
}

/// Reads a flat JSON object of SI scalars. An optional `"setup"` string
/// expands to its angles before explicit angles are applied.
pub fn config_from_json(text: &str) -> Result<ExperimentConfig> {
    let value: Value = serde_json::from_str(text)?;
    let Value::Object(mut map) = value else {
        return Err(QgemError::config("config", "expected a JSON object"));
    };
    let setup = match map.remove("setup") {
        Some(Value::String(s)) => Some(s.parse::<Setup>()?),
        Some(_) => return Err(QgemError::config("setup", "expected a string")),
        None => None,
    };
    for (key, v) in &map {
        if !CONFIG_KEYS.contains(&key.as_str()) {
            return Err(QgemError::config(key, "unknown key"));
        }
        if !v.is_number() {
            return Err(QgemError::config(key, "expected a number in SI units"));
        }
    }
    let mut base = Map::new();
    if let Some((t1, t2)) = setup.and_then(Setup::angles) {
        base.insert("theta_1".into(), t1.into());
        base.insert("theta_2".into(), t2.into());
    }
    base.extend(map);
    for key in CONFIG_KEYS {
        if let Some(v) = base.get(key) {
            serde_json::from_value::<ExperimentConfig>(Value::Object(Map::from_iter([(key.to_string(), v.clone())])))
                .map_err(|e| QgemError::config(key, e.to_string()))?;
        }
    }
    Ok(serde_json::from_value(Value::Object(base))?)
}

/// File (if any) plus flag overrides, validated.
pub fn parse_config(file: Option<&Path>, overrides: &Overrides) -> Result<ExperimentConfig> {
    let mut cfg = match file {
        Some(path) => config_from_json(&fs::read_to_string(path)?)?,
        None => ExperimentConfig::default(),
    };
    let o = overrides;
    if let Some((t1, t2)) = o.setup.and_then(Setup::angles) {
        cfg.theta_1 = t1;
        cfg.theta_2 = t2;
    }
    if o.setup == Some(Setup::Custom) && (o.theta_1.is_none() || o.theta_2.is_none()) && file.is_none() {
        return Err(QgemError::config("setup", "custom set-up needs --theta1 and --theta2"));
    }
    if let Some(v) = o.dimension {
        cfg.dimension = v;
    }
    if let Some(v) = o.hold_time {
        cfg.hold_time = v;
    }
    if let Some(v) = o.decoherence_rate {
        cfg.decoherence_rate = v;
    }
    if let Some(v) = o.superposition_width {
        cfg.superposition_width = v;
    }
    if let Some(v) = o.min_distance {
        cfg.min_distance = v;
    }
    if let Some(v) = o.mass {
        cfg.mass_1 = v;
        cfg.mass_2 = v;
    }
    if let Some(v) = o.theta_1 {
        cfg.theta_1 = v.rem_euclid(2.0 * PI);
    }
    if let Some(v) = o.theta_2 {
        cfg.theta_2 = v.rem_euclid(2.0 * PI);
    }
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub subcommand: String,
    pub config: ExperimentConfig,
    pub sweep: Option<SweepSpec>,
    pub seed: Option<u64>,
    pub outputs: Vec<PathBuf>,
    pub tool_version: String,
    /// Seconds since the Unix epoch.
    pub timestamp: u64,
}

impl RunManifest {
    pub fn new(subcommand: &str, config: ExperimentConfig) -> Self {
        Self {
            subcommand: subcommand.to_string(),
            config,
            sweep: None,
            seed: None,
            outputs: Vec::new(),
            tool_version: TOOL_VERSION.to_string(),
            timestamp: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0, |d| d.as_secs()),
        }
    }

    pub fn with_sweep(mut self, sweep: SweepSpec) -> Self {
        self.sweep = Some(sweep);
        self
    }

    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = Some(seed);
        self
    }
}

/// Writes `table` as CSV under `dir`, preceded by a `# ` header block, plus a
/// JSON sidecar holding the manifest. Returns the CSV path.
///
/// The header's last line carries the timestamp; everything else is a pure
/// function of the inputs.
pub fn emit_table(dir: &Path, name: &str, table: &Table, manifest: &mut RunManifest) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let csv_path = dir.join(format!("{name}.csv"));
    let mut file = fs::File::create(&csv_path)?;
    writeln!(file, "# qgem {} {}", manifest.tool_version, manifest.subcommand)?;
    writeln!(file, "# config: {}", serde_json::to_string(&manifest.config)?)?;
    if let Some(s) = &manifest.sweep {
        writeln!(file, "# sweep: {}", serde_json::to_string(s)?)?;
    }
    match manifest.seed {
        Some(seed) => writeln!(file, "# seed: {seed}")?,
        None => writeln!(file, "# seed: none")?,
    }
    writeln!(file, "# timestamp: {}", manifest.timestamp)?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(&table.columns)?;
    for row in &table.rows {
        w.write_record(row.iter().map(|c| c.to_string()))?;
    }
    w.flush()?;
    manifest.outputs.push(csv_path.clone());
    write_manifest(&dir.join(format!("{name}.json")), manifest)?;
    Ok(csv_path)
}

pub fn write_manifest(path: &Path, manifest: &RunManifest) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(manifest)?)?;
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<RunManifest> {
    Ok(serde_json::from_str(&fs::read_to_string(path)?)?)
}

/// Recovers the configuration recorded in a CSV header block.
pub fn config_from_csv(path: &Path) -> Result<ExperimentConfig> {
    let reader = BufReader::new(fs::File::open(path)?);
    for line in reader.lines() {
        let line = line?;
        let Some(rest) = line.strip_prefix("# ") else { break };
        if let Some(json) = rest.strip_prefix("config: ") {
            return config_from_json(json);
        }
    }
    Err(QgemError::config("config", format!("{} has no config header", path.display())))
}

/// CSV body (after the header block) as a string.
pub fn csv_body(path: &Path) -> Result<String> {
    let text = fs::read_to_string(path)?;
    Ok(text.lines().filter(|l| !l.starts_with("# ")).map(|l| format!("{l}\n")).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermEntry {
    pub i: usize,
    pub j: usize,
    pub c: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroupEntry {
    /// Positions in `terms`.
    pub members: Vec<usize>,
    pub weight: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TermsExport {
    pub dimension: usize,
    pub kind: crate::entanglement::WitnessKind,
    pub threshold: f64,
    pub terms: Vec<TermEntry>,
    pub groups: Vec<GroupEntry>,
}

impl TermsExport {
    pub fn new(decomp: &WitnessDecomposition, groups: &[MeasurementGroup]) -> Self {
        Self {
            dimension: decomp.dimension,
            kind: decomp.kind,
            threshold: decomp.threshold,
            terms: decomp
                .terms
                .iter()
                .map(|t| TermEntry { i: t.first, j: t.second, c: t.coefficient })
                .collect(),
            groups: groups
                .iter()
                .map(|g| GroupEntry { members: g.members.clone(), weight: g.weight })
                .collect(),
        }
    }
}

pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir)?;
    }
    fs::write(path, serde_json::to_string_pretty(value)?)?;
    Ok(())
}
