//! From geometry to quantum state: gravitational phases, the joint pure
//! state, its density matrix and the dephasing channel.
//!
//! Joint basis states `|p⟩⊗|q⟩` are indexed row-major, `p·D + q`.

use nalgebra::{DMatrix, SVD};
use num_complex::Complex64;

use crate::config::ExperimentConfig;
use crate::error::{QgemError, Result};
use crate::geometry::{distance_matrix, DistanceMatrix};
use crate::linalg::{self, CMatrix};

const NORM_TOLERANCE: f64 = 1e-9;

/// Accumulated phase per instance pair, in radians.
#[derive(Debug, Clone, PartialEq)]
pub struct PhaseMatrix {
    pub phases: DMatrix<f64>,
}

/// `φ_pq = G·m1·m2·τ / (ħ·C_pq)`.
pub fn phase_matrix(dist: &DistanceMatrix, config: &ExperimentConfig) -> PhaseMatrix {
    let scale = config.gravitational_constant * config.mass_1 * config.mass_2 * config.hold_time
        / config.reduced_planck;
    PhaseMatrix {
        phases: dist.entries.map(|c| scale / c),
    }
}

/// Amplitudes `ψ[p][q]` of `Σ ψ_pq |p⟩⊗|q⟩`.
#[derive(Debug, Clone, PartialEq)]
pub struct JointPureState {
    pub amplitudes: CMatrix,
}

impl JointPureState {
    /// Wraps an amplitude array, rejecting arrays whose norm is off by more than 1e-9.
    pub fn from_amplitudes(amplitudes: CMatrix) -> Result<Self> {
        if amplitudes.nrows() != amplitudes.ncols() {
            return Err(QgemError::Dimension {
                expected: amplitudes.nrows(),
                found: amplitudes.ncols(),
            });
        }
        let state = Self { amplitudes };
        let dev = (state.norm_squared() - 1.0).abs();
        if dev > NORM_TOLERANCE {
            return Err(QgemError::InvalidState(format!("norm deviates from 1 by {dev:e}")));
        }
        Ok(state)
    }

    /// Normalises an arbitrary non-zero amplitude array.
    pub fn normalized(amplitudes: CMatrix) -> Result<Self> {
        let n = amplitudes.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(QgemError::InvalidState("zero or non-finite amplitudes".into()));
        }
        Self::from_amplitudes(amplitudes / Complex64::new(n, 0.0))
    }

    pub fn dimension(&self) -> usize {
        self.amplitudes.nrows()
    }

    pub fn norm_squared(&self) -> f64 {
        self.amplitudes.iter().map(|z| z.norm_sqr()).sum()
    }

    /// State vector in the row-major joint basis.
    pub fn to_vector(&self) -> Vec<Complex64> {
        let d = self.dimension();
        (0..d * d).map(|k| self.amplitudes[(k / d, k % d)]).collect()
    }

    /// Schmidt coefficients (singular values of the amplitude array), descending.
    pub fn schmidt_coefficients(&self) -> Vec<f64> {
        let mut s: Vec<f64> = SVD::new(self.amplitudes.clone(), false, false)
            .singular_values
            .iter()
            .copied()
            .collect();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    }
}

/// `ψ_pq = exp(i·φ_pq) / D`.
pub fn superposed_state(phases: &PhaseMatrix) -> JointPureState {
    let d = phases.phases.nrows() as f64;
    JointPureState {
        amplitudes: phases.phases.map(|phi| Complex64::from_polar(1.0 / d, phi)),
    }
}

/// Geometry → phases → state for one configuration (decoherence ignored).
pub fn pure_state(config: &ExperimentConfig) -> Result<JointPureState> {
    let dist = distance_matrix(config)?;
    Ok(superposed_state(&phase_matrix(&dist, config)))
}

/// Density matrix of the state described by `config`, dephased with the
/// configured rate over the hold time.
pub fn evolved_density(config: &ExperimentConfig) -> Result<DensityMatrix> {
    DensityMatrix::from_pure(&pure_state(config)?)?
        .apply_decoherence(config.decoherence_rate, config.hold_time)
}

/// Two-qudit density matrix with provenance flags.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityMatrix {
    dimension: usize,
    matrix: CMatrix,
    is_pure: bool,
    /// `(γ, τ)` of every dephasing step applied so far.
    pub decoherence: Vec<(f64, f64)>,
}

impl DensityMatrix {
    /// `ρ = |ψ⟩⟨ψ|`.
    pub fn from_pure(state: &JointPureState) -> Result<Self> {
        let dev = (state.norm_squared() - 1.0).abs();
        if dev > NORM_TOLERANCE {
            return Err(QgemError::InvalidState(format!("norm deviates from 1 by {dev:e}")));
        }
        Ok(Self {
            dimension: state.dimension(),
            matrix: linalg::outer(&state.to_vector()),
            is_pure: true,
            decoherence: Vec::new(),
        })
    }

    /// Wraps a `D²×D²` matrix, checking Hermiticity and unit trace. The
    /// result is flagged mixed regardless of its actual rank.
    pub fn from_matrix(dimension: usize, matrix: CMatrix) -> Result<Self> {
        let n = dimension * dimension;
        if matrix.nrows() != n || matrix.ncols() != n {
            return Err(QgemError::Dimension {
                expected: n,
                found: matrix.nrows(),
            });
        }
        let herm = linalg::hermiticity_defect(&matrix);
        if herm > 1e-10 {
            return Err(QgemError::InvalidState(format!("not Hermitian (defect {herm:e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr - Complex64::new(1.0, 0.0)).norm() > NORM_TOLERANCE {
            return Err(QgemError::InvalidState(format!("trace is {tr}, expected 1")));
        }
        Ok(Self {
            dimension,
            matrix,
            is_pure: false,
            decoherence: Vec::new(),
        })
    }

    /// `I / D²`.
    pub fn maximally_mixed(dimension: usize) -> Self {
        let n = dimension * dimension;
        Self {
            dimension,
            matrix: CMatrix::identity(n, n) / Complex64::new(n as f64, 0.0),
            is_pure: false,
            decoherence: Vec::new(),
        }
    }

    /// Per-qudit dimension D.
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMatrix {
        self.matrix
    }

    pub fn is_pure(&self) -> bool {
        self.is_pure
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    pub fn purity(&self) -> f64 {
        linalg::trace_of_product(&self.matrix, &self.matrix).re
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::hermitian_eigenvalues(&self.matrix)
    }

    /// Multiplies element `((p,q),(p',q'))` by `x^[p≠p'] · x^[q≠q']` with
    /// `x = exp(−γτ)`. Populations are untouched.
    pub fn apply_decoherence(&self, gamma: f64, tau: f64) -> Result<Self> {
        if !(gamma >= 0.0) || !gamma.is_finite() {
            return Err(QgemError::config("decoherence_rate", format!("must be >= 0, got {gamma}")));
        }
        if !(tau >= 0.0) || !tau.is_finite() {
            return Err(QgemError::config("hold_time", format!("must be >= 0, got {tau}")));
        }
        let mut out = self.clone();
        if gamma == 0.0 || tau == 0.0 {
            return Ok(out);
        }
        let x = (-gamma * tau).exp();
        let d = self.dimension;
        let n = d * d;
        for r in 0..n {
            for c in 0..n {
                let factor = match ((r / d != c / d), (r % d != c % d)) {
                    (false, false) => continue,
                    (true, true) => x * x,
                    _ => x,
                };
                out.matrix[(r, c)] *= factor;
            }
        }
        out.is_pure = false;
        out.decoherence.push((gamma, tau));
        Ok(out)
    }
}
