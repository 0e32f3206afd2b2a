//! Entanglement measures and witnesses for two-qudit states.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::error::{QgemError, Result};
use crate::linalg::{self, CMatrix};
use crate::state::{pure_state, DensityMatrix, JointPureState};

/// Reduced-state eigenvalues below this are treated as exact zeros.
pub const ENTROPY_CUTOFF: f64 = 1e-12;
/// A partial transpose whose lowest eigenvalue is above `-NPT_TOLERANCE` is PPT.
pub const NPT_TOLERANCE: f64 = 1e-12;

/// Which qudit an operation acts on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Subsystem {
    First,
    Second,
}

fn check_square(m: &CMatrix, dim: usize) -> Result<()> {
    let n = dim * dim;
    if m.nrows() != n || m.ncols() != n {
        return Err(QgemError::Dimension {
            expected: n,
            found: m.nrows(),
        });
    }
    Ok(())
}

/// Traces out `traced` from a `D²×D²` operator, returning the `D×D` reduced operator.
pub fn partial_trace_matrix(m: &CMatrix, dim: usize, traced: Subsystem) -> Result<CMatrix> {
    check_square(m, dim)?;
    let mut out = CMatrix::zeros(dim, dim);
    for a in 0..dim {
        for b in 0..dim {
            let mut acc = linalg::ZERO;
            for k in 0..dim {
                acc += match traced {
                    Subsystem::Second => m[(a * dim + k, b * dim + k)],
                    Subsystem::First => m[(k * dim + a, k * dim + b)],
                };
            }
            out[(a, b)] = acc;
        }
    }
    Ok(out)
}

pub fn partial_trace(rho: &DensityMatrix, traced: Subsystem) -> Result<CMatrix> {
    partial_trace_matrix(rho.matrix(), rho.dimension(), traced)
}

/// Transposes the indices of one qudit: `((p,q),(p',q')) ↦ ((p,q'),(p',q))`
/// for the second, `((p',q),(p,q'))` for the first.
pub fn partial_transpose_matrix(m: &CMatrix, dim: usize, sub: Subsystem) -> Result<CMatrix> {
    check_square(m, dim)?;
    let n = dim * dim;
    Ok(CMatrix::from_fn(n, n, |r, c| {
        let (p, q, pp, qp) = (r / dim, r % dim, c / dim, c % dim);
        match sub {
            Subsystem::Second => m[(p * dim + qp, pp * dim + q)],
            Subsystem::First => m[(pp * dim + q, p * dim + qp)],
        }
    }))
}

pub fn partial_transpose(rho: &DensityMatrix, sub: Subsystem) -> Result<CMatrix> {
    partial_transpose_matrix(rho.matrix(), rho.dimension(), sub)
}

/// Shannon entropy in bits of a spectrum, with `0·log 0 = 0`.
pub fn spectrum_entropy(eigenvalues: &[f64]) -> f64 {
    eigenvalues
        .iter()
        .filter(|&&l| l > ENTROPY_CUTOFF)
        .map(|&l| -l * l.log2())
        .sum::<f64>()
        .max(0.0)
}

/// Von Neumann entropy (bits) of the reduced state of a pure two-qudit state.
///
/// Refuses mixed input: for mixed states this quantity no longer measures
/// entanglement.
pub fn entanglement_entropy(rho: &DensityMatrix) -> Result<f64> {
    if !rho.is_pure() {
        return Err(QgemError::Unsupported(
            "entanglement entropy is only defined here for pure states".into(),
        ));
    }
    let reduced = partial_trace(rho, Subsystem::Second)?;
    Ok(spectrum_entropy(&linalg::hermitian_eigenvalues(&reduced)))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum WitnessKind {
    /// Partial transpose of the projector on the most negative eigenvector of `ρ^{T_2}`.
    Ppt,
    /// `λ_m²·I − |ψ⟩⟨ψ|`, detecting states near a known pure state.
    Vicinity,
}

impl std::str::FromStr for WitnessKind {
    type Err = QgemError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "ppt" => Ok(WitnessKind::Ppt),
            "vicinity" | "vic" => Ok(WitnessKind::Vicinity),
            other => Err(QgemError::config("witness", format!("unknown witness `{other}`"))),
        }
    }
}

/// A Hermitian entanglement witness on `D ⊗ D`.
#[derive(Debug, Clone, PartialEq)]
pub struct Witness {
    pub matrix: CMatrix,
    pub kind: WitnessKind,
    /// Per-qudit dimension.
    pub dimension: usize,
    /// Configuration the generating state came from, when known.
    pub source: Option<ExperimentConfig>,
    /// Most negative eigenvalue of the generator's partial transpose (PPT only).
    pub negative_eigenvalue: Option<f64>,
    /// Largest Schmidt coefficient of the generator (vicinity only).
    pub schmidt_max: Option<f64>,
}

impl Witness {
    pub fn with_source(mut self, config: ExperimentConfig) -> Self {
        self.source = Some(config);
        self
    }
}

/// Builds `W = (|λ₋⟩⟨λ₋|)^{T_2}` from the undecohered state.
///
/// Returns `Ok(None)` when the partial transpose has no negative eigenvalue,
/// i.e. the state is PPT and this construction cannot witness it.
pub fn build_ppt_witness(state: &DensityMatrix) -> Result<Option<Witness>> {
    let dim = state.dimension();
    let pt = partial_transpose(state, Subsystem::Second)?;
    let (values, vectors) = linalg::hermitian_eigen(&pt);
    if values[0] >= -NPT_TOLERANCE {
        return Ok(None);
    }
    let v: Vec<Complex64> = vectors.column(0).iter().copied().collect();
    let matrix = partial_transpose_matrix(&linalg::outer(&v), dim, Subsystem::Second)?;
    Ok(Some(Witness {
        matrix,
        kind: WitnessKind::Ppt,
        dimension: dim,
        source: None,
        negative_eigenvalue: Some(values[0]),
        schmidt_max: None,
    }))
}

/// Builds `W = λ_m²·I − |ψ⟩⟨ψ|` with `λ_m` the largest Schmidt coefficient.
pub fn build_vicinity_witness(state: &JointPureState) -> Witness {
    let dim = state.dimension();
    let lambda = state.schmidt_coefficients()[0];
    let n = dim * dim;
    let matrix = CMatrix::identity(n, n) * Complex64::new(lambda * lambda, 0.0)
        - linalg::outer(&state.to_vector());
    Witness {
        matrix,
        kind: WitnessKind::Vicinity,
        dimension: dim,
        source: None,
        negative_eigenvalue: None,
        schmidt_max: Some(lambda),
    }
}

/// Entanglement entropy of a pure state straight from its Schmidt coefficients.
pub fn pure_state_entropy(state: &JointPureState) -> f64 {
    let probs: Vec<f64> = state.schmidt_coefficients().iter().map(|s| s * s).collect();
    spectrum_entropy(&probs)
}

/// Builds a witness of the given kind from the γ = 0 state of `config`.
pub fn witness_for(config: &ExperimentConfig, kind: WitnessKind) -> Result<Option<Witness>> {
    let psi = pure_state(config)?;
    let w = match kind {
        WitnessKind::Ppt => build_ppt_witness(&DensityMatrix::from_pure(&psi)?)?,
        WitnessKind::Vicinity => Some(build_vicinity_witness(&psi)),
    };
    let mut snapshot = config.clone();
    snapshot.decoherence_rate = 0.0;
    Ok(w.map(|w| w.with_source(snapshot)))
}

/// `Tr(W·ρ)`. An imaginary residue above 1e-8 means something upstream is not Hermitian.
pub fn witness_expectation(witness: &Witness, rho: &DensityMatrix) -> Result<f64> {
    if witness.dimension != rho.dimension() {
        return Err(QgemError::Dimension {
            expected: witness.dimension,
            found: rho.dimension(),
        });
    }
    let value = linalg::trace_of_product(&witness.matrix, rho.matrix());
    if value.im.abs() > 1e-8 {
        return Err(QgemError::Numerical(format!(
            "witness expectation has imaginary part {:e}",
            value.im
        )));
    }
    Ok(value.re)
}
