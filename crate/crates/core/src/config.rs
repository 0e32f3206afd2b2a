//! Experiment parameters for the two-interferometer set-up.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{QgemError, Result};

/// Newton's constant, m³·kg⁻¹·s⁻².
pub const GRAVITATIONAL_CONSTANT: f64 = 6.674e-11;
/// Reduced Planck constant, J·s.
pub const REDUCED_PLANCK: f64 = 1.054_571_817e-34;

pub const DEFAULT_MASS: f64 = 1e-14;
pub const DEFAULT_MIN_DISTANCE: f64 = 200e-6;
pub const DEFAULT_SUPERPOSITION_WIDTH: f64 = 250e-6;
pub const DEFAULT_HOLD_TIME: f64 = 2.5;

/// The two named interferometer arrangements plus free angles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Setup {
    /// Arms side by side: θ1 = 3π/2, θ2 = π/2.
    Parallel,
    /// Arms collinear: θ1 = θ2 = 0.
    Linear,
    Custom,
}

impl Setup {
    /// Angles `(θ1, θ2)` of a named set-up; `None` for `Custom`.
    pub fn angles(self) -> Option<(f64, f64)> {
        match self {
            Setup::Parallel => Some((1.5 * PI, 0.5 * PI)),
            Setup::Linear => Some((0.0, 0.0)),
            Setup::Custom => None,
        }
    }
}

impl std::str::FromStr for Setup {
    type Err = QgemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "parallel" => Ok(Setup::Parallel),
            "linear" => Ok(Setup::Linear),
            "custom" => Ok(Setup::Custom),
            other => Err(QgemError::config("setup", format!("unknown set-up `{other}`"))),
        }
    }
}

/// All physical and geometric parameters of one experiment, in SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentConfig {
    /// Number of superposition instances per qudit.
    pub dimension: usize,
    /// Distance between the outermost instances of one qudit (m).
    pub superposition_width: f64,
    /// Closest allowed approach between instances of the two masses (m).
    pub min_distance: f64,
    pub mass_1: f64,
    pub mass_2: f64,
    /// Time the superposition is held (s).
    pub hold_time: f64,
    /// Dephasing rate of positional coherences (1/s).
    pub decoherence_rate: f64,
    pub theta_1: f64,
    pub theta_2: f64,
    pub gravitational_constant: f64,
    pub reduced_planck: f64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self::parallel(2)
    }
}

impl ExperimentConfig {
    pub fn with_setup(dimension: usize, setup: Setup) -> Self {
        let (theta_1, theta_2) = setup.angles().unwrap_or((1.5 * PI, 0.5 * PI));
        Self {
            dimension,
            superposition_width: DEFAULT_SUPERPOSITION_WIDTH,
            min_distance: DEFAULT_MIN_DISTANCE,
            mass_1: DEFAULT_MASS,
            mass_2: DEFAULT_MASS,
            hold_time: DEFAULT_HOLD_TIME,
            decoherence_rate: 0.0,
            theta_1,
            theta_2,
            gravitational_constant: GRAVITATIONAL_CONSTANT,
            reduced_planck: REDUCED_PLANCK,
        }
    }

    pub fn parallel(dimension: usize) -> Self {
        Self::with_setup(dimension, Setup::Parallel)
    }

    pub fn linear(dimension: usize) -> Self {
        Self::with_setup(dimension, Setup::Linear)
    }

    pub fn with_hold_time(mut self, tau: f64) -> Self {
        self.hold_time = tau;
        self
    }

    pub fn with_decoherence_rate(mut self, gamma: f64) -> Self {
        self.decoherence_rate = gamma;
        self
    }

    pub fn with_angles(mut self, theta_1: f64, theta_2: f64) -> Self {
        self.theta_1 = theta_1;
        self.theta_2 = theta_2;
        self
    }

    pub fn with_superposition_width(mut self, width: f64) -> Self {
        self.superposition_width = width;
        self
    }

    /// Spacing between neighbouring instances of one qudit.
    pub fn instance_spacing(&self) -> f64 {
        self.superposition_width / (self.dimension as f64 - 1.0)
    }

    /// Checks every field invariant, naming the first offending key.
    ///
    /// A zero superposition width is accepted: it is the degenerate limit in
    /// which all instances collapse onto the two centres.
    pub fn validate(&self) -> Result<()> {
        if self.dimension < 2 {
            return Err(QgemError::config("dimension", "must be at least 2"));
        }
        let non_negative = [
            ("superposition_width", self.superposition_width),
            ("hold_time", self.hold_time),
            ("decoherence_rate", self.decoherence_rate),
        ];
        for (key, v) in non_negative {
            if !v.is_finite() || v < 0.0 {
                return Err(QgemError::config(key, format!("must be finite and >= 0, got {v}")));
            }
        }
        let positive = [
            ("min_distance", self.min_distance),
            ("mass_1", self.mass_1),
            ("mass_2", self.mass_2),
            ("gravitational_constant", self.gravitational_constant),
            ("reduced_planck", self.reduced_planck),
        ];
        for (key, v) in positive {
            if !v.is_finite() || v <= 0.0 {
                return Err(QgemError::config(key, format!("must be finite and > 0, got {v}")));
            }
        }
        for (key, v) in [("theta_1", self.theta_1), ("theta_2", self.theta_2)] {
            if !(0.0..2.0 * PI).contains(&v) {
                return Err(QgemError::config(key, format!("must lie in [0, 2π), got {v}")));
            }
        }
        Ok(())
    }
}
