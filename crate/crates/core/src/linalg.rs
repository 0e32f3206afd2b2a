//! Small dense complex linear-algebra helpers shared by the state, witness and
//! grouping code. Everything here works on `nalgebra::DMatrix<Complex64>`.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

pub type CMatrix = DMatrix<Complex64>;

pub const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };
pub const ONE: Complex64 = Complex64 { re: 1.0, im: 0.0 };

/// Eigendecomposition of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending (ties keep the solver order). Each
/// eigenvector is phase-fixed so that its first component with modulus above
/// `1e-10` is real and positive, which makes the output reproducible.
/// `SymmetricEigen` on a complex matrix occasionally breaks down to NaN on
/// very sparse inputs. A permutation similarity avoids the degenerate pivot.
fn robust_eigen(m: &CMatrix) -> SymmetricEigen<Complex64, nalgebra::Dyn> {
    let n = m.nrows();
    let eig = SymmetricEigen::new(m.clone());
    let finite = |e: &SymmetricEigen<Complex64, nalgebra::Dyn>| {
        e.eigenvalues.iter().all(|v| v.is_finite()) && e.eigenvectors.iter().all(|z| z.is_finite())
    };
    if finite(&eig) {
        return eig;
    }
    for shift in 1..n {
        let perm = |k: usize| (k * (2 * shift + 1) + shift) % n;
        let mut p = CMatrix::zeros(n, n);
        for k in 0..n {
            p[(perm(k), k)] = ONE;
        }
        if (0..n).map(perm).collect::<std::collections::BTreeSet<_>>().len() != n {
            continue;
        }
        let mut e = SymmetricEigen::new(p.adjoint() * m * &p);
        if finite(&e) {
            e.eigenvectors = p * e.eigenvectors;
            return e;
        }
    }
    eig
}

pub fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let eig = robust_eigen(m);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let mut vectors = CMatrix::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        let col = eig.eigenvectors.column(src);
        let pivot = col.iter().find(|z| z.norm() > 1e-10).copied().unwrap_or(ONE);
        let phase = pivot.conj() / pivot.norm();
        for r in 0..n {
            vectors[(r, dst)] = col[r] * phase;
        }
    }
    (values, vectors)
}

pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut v: Vec<f64> = robust_eigen(m).eigenvalues.iter().copied().collect();
    v.sort_by(f64::total_cmp);
    v
}

pub fn min_eigenvalue(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m)[0]
}

pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Largest entrywise deviation of `m` from its conjugate transpose.
pub fn hermiticity_defect(m: &CMatrix) -> f64 {
    let n = m.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

pub fn trace(m: &CMatrix) -> Complex64 {
    m.diagonal().iter().sum()
}

/// `Tr(a · b)` without forming the product.
pub fn trace_of_product(a: &CMatrix, b: &CMatrix) -> Complex64 {
    let n = a.nrows();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[(i, k)] * b[(k, i)];
        }
    }
    acc
}

pub fn kron(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a.kronecker(b)
}

/// Max-abs entry of `a·b − b·a`.
pub fn commutator_norm(a: &CMatrix, b: &CMatrix) -> f64 {
    max_abs(&(a * b - b * a))
}

pub fn outer(v: &[Complex64]) -> CMatrix {
    let n = v.len();
    CMatrix::from_fn(n, n, |i, j| v[i] * v[j].conj())
}

/// Largest off-diagonal modulus of `uᴴ · m · u`.
pub fn off_diagonal_residual(u: &CMatrix, m: &CMatrix) -> f64 {
    let conj = u.adjoint() * m * u;
    let n = conj.nrows();
    let mut worst: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                worst = worst.max(conj[(i, j)].norm());
            }
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_and_reconstructs() {
        let m = CMatrix::from_row_slice(
            2,
            2,
            &[ONE, Complex64::new(0.0, -1.0), Complex64::new(0.0, 1.0), -ONE],
        );
        let (vals, vecs) = hermitian_eigen(&m);
        assert!(vals[0] < vals[1]);
        assert!((vals[0] + 2f64.sqrt()).abs() < 1e-12);
        let diag = CMatrix::from_diagonal(&nalgebra::DVector::from_iterator(
            2,
            vals.iter().map(|&x| Complex64::new(x, 0.0)),
        ));
        let back = &vecs * diag * vecs.adjoint();
        assert!(max_abs(&(back - m)) < 1e-12);
        for c in 0..2 {
            let pivot = vecs.column(c).iter().find(|z| z.norm() > 1e-10).copied().unwrap();
            assert!(pivot.im.abs() < 1e-14 && pivot.re > 0.0);
        }
    }

    #[test]
    fn trace_of_product_matches_dense() {
        let a = CMatrix::from_fn(3, 3, |i, j| Complex64::new(i as f64, j as f64 - 1.0));
        let b = CMatrix::from_fn(3, 3, |i, j| Complex64::new((i * j) as f64, 0.5));
        assert!((trace_of_product(&a, &b) - trace(&(&a * &b))).norm() < 1e-12);
    }

    #[test]
    fn eigen_survives_sparse_breakdown() {
        // This product sends the plain solver to NaN.
        let basis = crate::basis::gell_mann_basis(6).unwrap();
        let op = crate::basis::tensor_operator(&basis, 5, 33);
        let (vals, vecs) = hermitian_eigen(&op);
        assert!(vals.iter().all(|v| v.is_finite()));
        assert!(off_diagonal_residual(&vecs, &op) < 1e-10);
    }
}
