//! Distances between every pair of superposition instances.
//!
//! Qudit 1's instances lie on an arm of length Δx rotated by θ1 about its
//! innermost instance; qudit 2's lie on an arm rotated by θ2 about its own
//! innermost instance, which sits at distance d from qudit 1's. Instance `p`
//! of qudit 1 is `A_p = (D−1−p)·Δx/(D−1)` from the pivot, instance `q` of
//! qudit 2 is `B_q` from it, and θ3 is the angle between those two rays.

use std::f64::consts::PI;

use nalgebra::DMatrix;

use crate::config::ExperimentConfig;
use crate::error::{QgemError, Result};

/// Rounding slack allowed on the arcsine argument before it is clamped.
pub const ARCSIN_SLACK: f64 = 1e-12;
/// Absolute slack (m) when comparing instance distances against `d`.
pub const GEOMETRY_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    /// `entries[(p, q)]` is the distance between instance p of qudit 1 and
    /// instance q of qudit 2, in metres.
    pub entries: DMatrix<f64>,
    /// Distance from qudit 1's innermost instance to its instance p.
    pub arm_1: Vec<f64>,
    /// Distance from qudit 1's innermost instance to qudit 2's instance q.
    pub arm_2: Vec<f64>,
    /// Opening angle between the two rays, per q.
    pub theta_3: Vec<f64>,
}

impl DistanceMatrix {
    pub fn dimension(&self) -> usize {
        self.entries.nrows()
    }

    pub fn get(&self, p: usize, q: usize) -> f64 {
        self.entries[(p, q)]
    }

    pub fn min(&self) -> f64 {
        self.entries.min()
    }
}

pub fn distance_matrix(config: &ExperimentConfig) -> Result<DistanceMatrix> {
    config.validate()?;
    let dim = config.dimension;
    let spacing = config.instance_spacing();
    let d = config.min_distance;
    let (t1, t2) = (config.theta_1, config.theta_2);

    let arm_1: Vec<f64> = (0..dim).map(|p| (dim - 1 - p) as f64 * spacing).collect();
    let mut arm_2 = Vec::with_capacity(dim);
    let mut theta_3 = Vec::with_capacity(dim);
    for q in 0..dim {
        let s = q as f64 * spacing;
        let b = (d * d + s * s - 2.0 * d * s * (PI - t2).cos()).max(0.0).sqrt();
        let arg = if b > 0.0 { s * t2.sin() / b } else { 0.0 };
        if arg.abs() > 1.0 + ARCSIN_SLACK {
            return Err(QgemError::Geometry(format!(
                "arcsine argument {arg} out of range for instance q = {q}"
            )));
        }
        arm_2.push(b);
        theta_3.push(PI - t1 + arg.clamp(-1.0, 1.0).asin());
    }
    let entries = DMatrix::from_fn(dim, dim, |p, q| {
        let (a, b) = (arm_1[p], arm_2[q]);
        (a * a + b * b - 2.0 * a * b * theta_3[q].cos()).max(0.0).sqrt()
    });
    Ok(DistanceMatrix {
        entries,
        arm_1,
        arm_2,
        theta_3,
    })
}

/// Result of checking the minimum-distance constraint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GeometryCheck {
    pub valid: bool,
    /// `(p, q)` pairs closer than `d`.
    pub violations: Vec<(usize, usize)>,
}

pub fn validate_geometry(dist: &DistanceMatrix, config: &ExperimentConfig) -> Result<GeometryCheck> {
    if dist.dimension() != config.dimension {
        return Err(QgemError::Dimension {
            expected: config.dimension,
            found: dist.dimension(),
        });
    }
    let floor = config.min_distance - GEOMETRY_TOLERANCE;
    let mut violations = Vec::new();
    for p in 0..dist.dimension() {
        for q in 0..dist.dimension() {
            if !(dist.get(p, q) >= floor) {
                violations.push((p, q));
            }
        }
    }
    Ok(GeometryCheck {
        valid: violations.is_empty(),
        violations,
    })
}

/// Convenience: compute and check in one go.
pub fn check_config_geometry(config: &ExperimentConfig) -> Result<GeometryCheck> {
    validate_geometry(&distance_matrix(config)?, config)
}

#[cfg(test)]
mod tests {
    use super::*;

    const UM: f64 = 1e-6;

    #[test]
    fn parallel_qubits() {
        let c = distance_matrix(&ExperimentConfig::parallel(2)).unwrap();
        let diag = (200.0f64.powi(2) + 250.0f64.powi(2)).sqrt() * UM;
        let want = [[diag, 200.0 * UM], [200.0 * UM, diag]];
        for p in 0..2 {
            for q in 0..2 {
                assert!((c.get(p, q) - want[p][q]).abs() < 1e-15, "{p}{q}");
            }
        }
        assert!((diag / UM - 320.156).abs() < 1e-3);
    }

    #[test]
    fn linear_qubits() {
        let c = distance_matrix(&ExperimentConfig::linear(2)).unwrap();
        let want = [[450.0, 700.0], [200.0, 450.0]];
        for p in 0..2 {
            for q in 0..2 {
                assert!((c.get(p, q) - want[p][q] * UM).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn zero_width_collapses_to_d() {
        for dim in 2..=5 {
            let cfg = ExperimentConfig::parallel(dim)
                .with_superposition_width(0.0)
                .with_angles(1.0, 4.0);
            let c = distance_matrix(&cfg).unwrap();
            assert!(c.entries.iter().all(|&x| (x - 200.0 * UM).abs() < 1e-18));
        }
    }

    #[test]
    fn named_setups_are_valid() {
        assert!(check_config_geometry(&ExperimentConfig::parallel(2)).unwrap().valid);
        assert!(check_config_geometry(&ExperimentConfig::linear(2)).unwrap().valid);
    }

    #[test]
    fn arms_diverging_at_right_angles_stay_valid() {
        // Both arms at π/2 point away from each other; the closest pair is
        // the two innermost instances at exactly d.
        let cfg = ExperimentConfig::parallel(2).with_angles(0.5 * PI, 0.5 * PI);
        let c = distance_matrix(&cfg).unwrap();
        assert!((c.min() - 200.0 * UM).abs() < 1e-15);
        assert!(validate_geometry(&c, &cfg).unwrap().valid);
    }

    #[test]
    fn arms_facing_each_other_are_forbidden() {
        let cfg = ExperimentConfig::parallel(2).with_angles(PI, PI);
        let check = check_config_geometry(&cfg).unwrap();
        assert!(!check.valid);
        assert!(check.violations.contains(&(0, 0)));
        assert!(check.violations.contains(&(1, 1)));
    }

    #[test]
    fn dimension_mismatch_rejected() {
        let c = distance_matrix(&ExperimentConfig::parallel(3)).unwrap();
        assert!(validate_geometry(&c, &ExperimentConfig::parallel(2)).is_err());
    }
}
