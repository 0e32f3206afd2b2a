#![allow(dead_code)]

use std::f64::consts::PI;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qgem::linalg::{kron, outer, CMatrix};
use qgem::state::DensityMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

pub fn random_vector<R: Rng>(n: usize, rng: &mut R) -> Vec<Complex64> {
    let v: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    v.into_iter().map(|z| z / norm).collect()
}

/// Convex mixture of `terms` random product states.
pub fn random_separable<R: Rng>(dim: usize, terms: usize, rng: &mut R) -> DensityMatrix {
    let weights: Vec<f64> = (0..terms).map(|_| rng.random::<f64>() + 1e-3).collect();
    let total: f64 = weights.iter().sum();
    let mut m = CMatrix::zeros(dim * dim, dim * dim);
    for w in weights {
        let a = outer(&random_vector(dim, rng));
        let b = outer(&random_vector(dim, rng));
        m += kron(&a, &b) * Complex64::new(w / total, 0.0);
    }
    hermitize(&mut m);
    DensityMatrix::from_matrix(dim, m).expect("valid separable state")
}

/// Random mixed state `G G† / Tr(G G†)` with Gaussian `G`.
pub fn random_density<R: Rng>(dim: usize, rng: &mut R) -> DensityMatrix {
    let n = dim * dim;
    let g = CMatrix::from_fn(n, n, |_, _| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)));
    let mut m = &g * g.adjoint();
    let tr = m.trace();
    m /= tr;
    hermitize(&mut m);
    DensityMatrix::from_matrix(dim, m).expect("valid random state")
}

pub fn hermitize(m: &mut CMatrix) {
    let h = (m.clone() + m.adjoint()) * Complex64::new(0.5, 0.0);
    *m = h;
}

/// All instance coordinates in the plane, placed explicitly: the first mass's
/// instances along a ray from its innermost point, the second's fanning out
/// from the point at distance `d`.
pub fn planar_distances(dim: usize, dx: f64, d: f64, theta_1: f64, theta_2: f64) -> DMatrix<f64> {
    let step = dx / (dim - 1) as f64;
    let first: Vec<(f64, f64)> = (0..dim)
        .map(|p| {
            let r = (dim - 1 - p) as f64 * step;
            (-r * theta_1.cos(), -r * theta_1.sin())
        })
        .collect();
    let second: Vec<(f64, f64)> = (0..dim)
        .map(|q| {
            let r = q as f64 * step;
            (d + r * theta_2.cos(), r * theta_2.sin())
        })
        .collect();
    DMatrix::from_fn(dim, dim, |p, q| {
        let (a, b) = (first[p], second[q]);
        ((a.0 - b.0).powi(2) + (a.1 - b.1).powi(2)).sqrt()
    })
}

pub fn random_angle<R: Rng>(rng: &mut R) -> f64 {
    rng.random_range(0.0..2.0 * PI)
}
