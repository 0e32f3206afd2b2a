//! Generalized Gell-Mann operator basis and witness decomposition into
//! products `λ_i ⊗ λ_j`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::entanglement::{Witness, WitnessKind};
use crate::error::{QgemError, Result};
use crate::linalg::{self, CMatrix};

/// Default relative cut: coefficients at or below `1e-8 · max|c_ij|` are dropped.
pub const DEFAULT_RELATIVE_THRESHOLD: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum BasisFamily {
    Identity,
    /// `|j⟩⟨k| + |k⟩⟨j|`, j < k.
    Symmetric { j: usize, k: usize },
    /// `−i|j⟩⟨k| + i|k⟩⟨j|`, j < k.
    Antisymmetric { j: usize, k: usize },
    /// `sqrt(2/(l(l+1))) · (Σ_{m<l} |m⟩⟨m| − l|l⟩⟨l|)`, 1 ≤ l < D.
    Diagonal { l: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct BasisElement {
    pub index: usize,
    pub matrix: CMatrix,
    pub family: BasisFamily,
    /// `Tr(λ²)`: D for the identity, 2 otherwise.
    pub hs_norm_sq: f64,
}

/// The D² generalized Gell-Mann matrices, ordered identity, symmetric
/// (lexicographic in (j,k)), antisymmetric (same order), diagonal.
pub fn gell_mann_basis(dim: usize) -> Result<Vec<BasisElement>> {
    if dim < 2 {
        return Err(QgemError::config("dimension", "must be at least 2"));
    }
    let i = Complex64::new(0.0, 1.0);
    let mut families = vec![BasisFamily::Identity];
    let pairs: Vec<(usize, usize)> = (0..dim)
        .flat_map(|j| (j + 1..dim).map(move |k| (j, k)))
        .collect();
    families.extend(pairs.iter().map(|&(j, k)| BasisFamily::Symmetric { j, k }));
    families.extend(pairs.iter().map(|&(j, k)| BasisFamily::Antisymmetric { j, k }));
    families.extend((1..dim).map(|l| BasisFamily::Diagonal { l }));

    Ok(families
        .into_iter()
        .enumerate()
        .map(|(index, family)| {
            let mut m = CMatrix::zeros(dim, dim);
            match family {
                BasisFamily::Identity => m.fill_with_identity(),
                BasisFamily::Symmetric { j, k } => {
                    m[(j, k)] = linalg::ONE;
                    m[(k, j)] = linalg::ONE;
                }
                BasisFamily::Antisymmetric { j, k } => {
                    m[(j, k)] = -i;
                    m[(k, j)] = i;
                }
                BasisFamily::Diagonal { l } => {
                    let s = (2.0 / (l * (l + 1)) as f64).sqrt();
                    for d in 0..l {
                        m[(d, d)] = Complex64::new(s, 0.0);
                    }
                    m[(l, l)] = Complex64::new(-s * l as f64, 0.0);
                }
            }
            let hs_norm_sq = if family == BasisFamily::Identity { dim as f64 } else { 2.0 };
            BasisElement {
                index,
                matrix: m,
                family,
                hs_norm_sq,
            }
        })
        .collect())
}

/// Operator `λ_first ⊗ λ_second`.
pub fn tensor_operator(basis: &[BasisElement], first: usize, second: usize) -> CMatrix {
    linalg::kron(&basis[first].matrix, &basis[second].matrix)
}

/// How small a coefficient must be to count as negligible.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", content = "value", rename_all = "lowercase")]
pub enum Threshold {
    Absolute(f64),
    /// Fraction of the largest |c_ij|.
    Relative(f64),
}

impl Default for Threshold {
    fn default() -> Self {
        Threshold::Relative(DEFAULT_RELATIVE_THRESHOLD)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Term {
    pub first: usize,
    pub second: usize,
    pub coefficient: f64,
}

impl Term {
    pub fn is_identity(&self) -> bool {
        self.first == 0 && self.second == 0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessDecomposition {
    pub dimension: usize,
    pub kind: WitnessKind,
    /// Retained terms, ordered by (first, second).
    pub terms: Vec<Term>,
    /// `Σ |c_ij|` over retained terms.
    pub total_weight: f64,
    /// Absolute cut actually applied.
    pub threshold: f64,
}

impl WitnessDecomposition {
    pub fn identity_coefficient(&self) -> f64 {
        self.terms.iter().find(|t| t.is_identity()).map_or(0.0, |t| t.coefficient)
    }

    /// Indices into `terms` of everything that must be measured (all but `I⊗I`).
    pub fn measured_terms(&self) -> Vec<usize> {
        (0..self.terms.len()).filter(|&k| !self.terms[k].is_identity()).collect()
    }

    pub fn reconstruct(&self, basis: &[BasisElement]) -> CMatrix {
        let n = self.dimension * self.dimension;
        let mut out = CMatrix::zeros(n, n);
        for t in &self.terms {
            out += tensor_operator(basis, t.first, t.second) * Complex64::new(t.coefficient, 0.0);
        }
        out
    }
}

/// Projects `witness` onto every `λ_i ⊗ λ_j` and keeps the non-negligible terms.
///
/// `c_ij = Tr(W·(λ_i⊗λ_j)) / (Tr(λ_i²)·Tr(λ_j²))`, real because both the
/// witness and the basis are Hermitian.
pub fn decompose_witness(
    witness: &Witness,
    basis: &[BasisElement],
    threshold: Threshold,
) -> Result<WitnessDecomposition> {
    let dim = witness.dimension;
    if basis.len() != dim * dim || basis[0].matrix.nrows() != dim {
        return Err(QgemError::Dimension {
            expected: dim,
            found: basis[0].matrix.nrows(),
        });
    }
    let w = &witness.matrix;
    let nonzero: Vec<Vec<(usize, usize, Complex64)>> = basis
        .iter()
        .map(|b| {
            let m = &b.matrix;
            (0..dim)
                .flat_map(|r| (0..dim).map(move |c| (r, c)))
                .filter(|&(r, c)| m[(r, c)].norm() > 0.0)
                .map(|(r, c)| (r, c, m[(r, c)]))
                .collect()
        })
        .collect();

    let mut coefficients = Vec::with_capacity(basis.len() * basis.len());
    let mut imaginary: f64 = 0.0;
    for (i, bi) in basis.iter().enumerate() {
        // Contract the first qudit: m[(q, q')] = Σ_{p,p'} W[(p,q),(p',q')] · λ_i[p', p].
        let mut reduced = CMatrix::zeros(dim, dim);
        for &(pp, p, a) in &nonzero[i] {
            for q in 0..dim {
                for qp in 0..dim {
                    reduced[(q, qp)] += w[(p * dim + q, pp * dim + qp)] * a;
                }
            }
        }
        for (j, bj) in basis.iter().enumerate() {
            let mut acc = linalg::ZERO;
            for &(qp, q, b) in &nonzero[j] {
                acc += reduced[(q, qp)] * b;
            }
            let c = acc / (bi.hs_norm_sq * bj.hs_norm_sq);
            imaginary = imaginary.max(c.im.abs());
            coefficients.push((i, j, c.re));
        }
    }
    if imaginary > 1e-8 {
        return Err(QgemError::Numerical(format!(
            "witness is not Hermitian: coefficient imaginary part {imaginary:e}"
        )));
    }

    let max = coefficients.iter().map(|c| c.2.abs()).fold(0.0, f64::max);
    let cut = match threshold {
        Threshold::Absolute(e) => e,
        Threshold::Relative(r) => r * max,
    };
    if !(cut >= 0.0) {
        return Err(QgemError::config("threshold", "must be >= 0"));
    }
    let terms: Vec<Term> = coefficients
        .into_iter()
        .filter(|c| c.2.abs() > cut || (cut == 0.0 && c.2 != 0.0))
        .map(|(first, second, coefficient)| Term {
            first,
            second,
            coefficient,
        })
        .collect();
    let total_weight = terms.iter().map(|t| t.coefficient.abs()).sum();
    Ok(WitnessDecomposition {
        dimension: dim,
        kind: witness.kind,
        terms,
        total_weight,
        threshold: cut,
    })
}
