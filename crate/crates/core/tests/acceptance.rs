//! Acceptance gate. Runs every criterion and prints one PASS/FAIL line each.
//!
//! The process exits non-zero on a failing criterion only when
//! `QGEM_ACCEPTANCE_STRICT` is set, so that known-red criteria are reported
//! without hiding the rest of the workspace results.

mod common;

use std::time::Instant;

use nalgebra::DMatrix;
use num_complex::Complex64;
use qgem::basis::{decompose_witness, gell_mann_basis, tensor_operator, Threshold};
use qgem::config::ExperimentConfig;
use qgem::entanglement::{pure_state_entropy, witness_expectation, witness_for, WitnessKind};
use qgem::geometry::distance_matrix;
use qgem::grouping::{commutation_graph, group_terms_ldfc, GroupingOptions};
use qgem::io;
use qgem::linalg::{self, kron, CMatrix};
use qgem::shots::{budget_grid, find_crossing, sample_term, Campaign, CampaignOptions, MeasurementMode};
use qgem::state::{evolved_density, pure_state};
use qgem::sweep::{self, zero_crossing_gamma, Grid, Metric, SweepSpec, Variable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const SEED: u64 = 2024;
const REPETITIONS: usize = 50;

#[derive(Default)]
struct Checks {
    lines: Vec<(bool, String)>,
}

impl Checks {
    fn check(&mut self, ok: bool, text: String) {
        self.lines.push((ok, text));
    }

    fn within(&mut self, label: &str, value: f64, target: f64, tol: f64) {
        self.check((value - target).abs() <= tol, format!("{label} = {value:.4} (want {target} ± {tol})"));
    }

    fn passed(&self) -> bool {
        self.lines.iter().all(|(ok, _)| *ok)
    }
}

fn entropy() -> Checks {
    let mut c = Checks::default();
    for (d, want) in [(2, 0.152), (3, 0.084), (4, 0.068), (5, 0.060), (6, 0.056)] {
        let s = pure_state_entropy(&pure_state(&ExperimentConfig::parallel(d)).unwrap());
        c.within(&format!("S(D={d})"), s, want, 0.003);
    }
    let s40 = pure_state_entropy(&pure_state(&ExperimentConfig::parallel(40)).unwrap());
    c.check((0.037..=0.042).contains(&s40), format!("S(D=40) = {s40:.4} (want in [0.037, 0.042])"));
    c
}

fn pauli() -> [CMatrix; 4] {
    let z = Complex64::new(0.0, 0.0);
    let o = Complex64::new(1.0, 0.0);
    let i = Complex64::new(0.0, 1.0);
    [
        DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    ]
}

fn witness() -> Checks {
    let mut c = Checks::default();
    let cfg = ExperimentConfig::parallel(2);
    let w = witness_for(&cfg, WitnessKind::Ppt).unwrap().unwrap();
    let value = witness_expectation(&w, &evolved_density(&cfg).unwrap()).unwrap();
    c.within("qubit <W>", value, -0.148, 0.004);
    let [id, x, y, z] = pauli();
    let expected = (kron(&id, &id) - kron(&x, &x) - kron(&z, &y) - kron(&y, &z)) * Complex64::new(0.25, 0.0);
    let err = linalg::max_abs(&(&w.matrix - &expected));
    c.check(err <= 1e-9, format!("max |W − ¼[I − XX − ZY − YZ]| = {err:.1e} (want ≤ 1e-9)"));
    c
}

fn decoherence() -> Checks {
    let mut c = Checks::default();
    let ppt = |d: usize, g: f64| sweep::evaluate(&ExperimentConfig::parallel(d).with_decoherence_rate(g), Metric::PptExpectation).unwrap();
    for (g, want) in [(0.05, -0.074), (0.075, -0.043), (0.1, -0.016)] {
        c.within(&format!("qubit <W>(γ={g})"), ppt(2, g), want, 0.003);
    }
    for (g, want) in [(0.05, -0.045), (0.075, -0.032), (0.1, -0.021)] {
        c.within(&format!("D=6 <W>(γ={g})"), ppt(6, g), want, 0.004);
    }
    let star = zero_crossing_gamma(&ExperimentConfig::parallel(2), WitnessKind::Ppt, 10.0).unwrap().unwrap();
    c.check((0.110..=0.125).contains(&star), format!("qubit γ* = {star:.4} Hz (want in [0.110, 0.125])"));
    c
}

fn term_count(cfg: &ExperimentConfig, kind: WitnessKind) -> usize {
    let w = witness_for(cfg, kind).unwrap().unwrap();
    let basis = gell_mann_basis(cfg.dimension).unwrap();
    decompose_witness(&w, &basis, Threshold::default()).unwrap().terms.len()
}

fn term_counts() -> Checks {
    let mut c = Checks::default();
    let tables: [(&str, fn(usize) -> ExperimentConfig, WitnessKind, [usize; 5]); 3] = [
        ("parallel PPT", ExperimentConfig::parallel, WitnessKind::Ppt, [4, 77, 244, 613, 1272]),
        ("linear PPT", ExperimentConfig::linear, WitnessKind::Ppt, [9, 81, 256, 625, 1296]),
        ("parallel vicinity", ExperimentConfig::parallel, WitnessKind::Vicinity, [6, 60, 211, 547, 1166]),
    ];
    for (label, make, kind, want) in tables {
        let got: Vec<usize> = (2..=6).map(|d| term_count(&make(d), kind)).collect();
        c.check(got == want, format!("{label}: {got:?} (want {want:?})"));
    }
    c
}

fn grouping() -> Checks {
    let mut c = Checks::default();
    let targets = [(2, 1.0, 0.0), (3, 14.0, 0.2), (4, 28.0, 0.2), (5, 53.0, 0.2), (6, 94.0, 0.2)];
    for (d, target, rel) in targets {
        let w = witness_for(&ExperimentConfig::parallel(d), WitnessKind::Ppt).unwrap().unwrap();
        let basis = gell_mann_basis(d).unwrap();
        let dec = decompose_witness(&w, &basis, Threshold::default()).unwrap();
        let graph = commutation_graph(&dec, &basis).unwrap();
        let groups = group_terms_ldfc(&graph, &dec, &basis, &GroupingOptions::default()).unwrap();
        let n = groups.len() as f64;
        let (lo, hi) = (target * (1.0 - rel), target * (1.0 + rel));
        c.check(n >= lo && n <= hi, format!("D={d}: {n} groups (want {lo:.1}..={hi:.1})"));

        // soundness, checked on the full operators
        let ops: Vec<CMatrix> = dec.terms.iter().map(|t| tensor_operator(&basis, t.first, t.second)).collect();
        let mut worst = 0.0f64;
        let mut covered = vec![0usize; dec.terms.len()];
        for g in &groups {
            for (a, &i) in g.members.iter().enumerate() {
                covered[i] += 1;
                for &j in &g.members[a + 1..] {
                    let scale = (linalg::trace_of_product(&ops[i], &ops[i]).re * linalg::trace_of_product(&ops[j], &ops[j]).re).sqrt();
                    worst = worst.max(linalg::commutator_norm(&ops[i], &ops[j]) / scale);
                }
            }
        }
        let cover_ok = dec.measured_terms().iter().all(|&k| covered[k] == 1) && covered.iter().sum::<usize>() == dec.measured_terms().len();
        c.check(worst < 1e-10 && cover_ok, format!("D={d}: worst in-group commutator {worst:.1e}, each measured term in exactly one group: {cover_ok}"));
    }
    c
}

fn crossing(dim: usize, linear: bool, gamma: f64, mode: MeasurementMode) -> Option<u64> {
    let cfg = if linear { ExperimentConfig::linear(dim) } else { ExperimentConfig::parallel(dim) };
    let campaign = Campaign::from_config(&cfg.with_decoherence_rate(gamma), WitnessKind::Ppt, mode, &CampaignOptions::default()).unwrap();
    let (m, _) = find_crossing(&campaign, &budget_grid(10, 20_000_000, 25), REPETITIONS, SEED, 0.999).unwrap();
    m
}

fn crossings() -> Checks {
    let mut c = Checks::default();
    let per = MeasurementMode::PerTerm;
    let grp = MeasurementMode::Grouped;
    let show = |m: Option<u64>| m.map_or("none".into(), |m| m.to_string());

    let m = crossing(2, false, 0.0, per);
    c.check(m.is_some_and(|m| (250..=2000).contains(&m)), format!("qubit parallel γ=0 per-term: {} (want 250..=2000)", show(m)));
    let m = crossing(2, true, 0.0, per);
    c.check(m.is_some_and(|m| m >= 3000), format!("qubit linear γ=0 per-term: {} (want ≥ 3000)", show(m)));

    let factor2 = [
        (2, 0.05, per, 2_000.0),
        (2, 0.075, per, 6_000.0),
        (2, 0.1, per, 25_000.0),
        (2, 0.05, grp, 1_000.0),
        (2, 0.075, grp, 2_000.0),
        (2, 0.1, grp, 12_000.0),
        (6, 0.05, per, 200_000.0),
        (6, 0.075, per, 400_000.0),
        (6, 0.1, per, 600_000.0),
        (6, 0.05, grp, 25_000.0),
        (6, 0.075, grp, 40_000.0),
        (6, 0.1, grp, 80_000.0),
        (6, 0.125, per, 2_000_000.0),
        (6, 0.125, grp, 200_000.0),
    ];
    for (d, gamma, mode, target) in factor2 {
        let m = crossing(d, false, gamma, mode);
        let ok = m.is_some_and(|m| m as f64 >= target / 2.0 && m as f64 <= target * 2.0);
        c.check(ok, format!("D={d} γ={gamma} {mode}: {} (want within ×2 of {target})", show(m)));
    }
    c
}

fn properties() -> Checks {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);

    for d in 2..=6 {
        for kind in [WitnessKind::Ppt, WitnessKind::Vicinity] {
            let w = witness_for(&ExperimentConfig::parallel(d), kind).unwrap().unwrap();
            let worst = (0..1000)
                .map(|_| {
                    let terms = rng_terms(&mut rng);
                    witness_expectation(&w, &common::random_separable(d, terms, &mut rng)).unwrap()
                })
                .fold(f64::INFINITY, f64::min);
            c.check(worst >= -1e-10, format!("D={d} {kind:?}: min <W> over 1000 separable states = {worst:.3e}"));
        }
    }

    let mut worst_rec = 0.0f64;
    for d in 2..=6 {
        let basis = gell_mann_basis(d).unwrap();
        for kind in [WitnessKind::Ppt, WitnessKind::Vicinity] {
            let w = witness_for(&ExperimentConfig::parallel(d), kind).unwrap().unwrap();
            let dec = decompose_witness(&w, &basis, Threshold::Relative(0.0)).unwrap();
            worst_rec = worst_rec.max(linalg::max_abs(&(dec.reconstruct(&basis) - &w.matrix)));
        }
    }
    c.check(worst_rec < 1e-10, format!("reconstruction residual {worst_rec:.1e} (want < 1e-10)"));

    let (mut min_eig, mut tr_err, mut herm) = (f64::INFINITY, 0.0f64, 0.0f64);
    for k in 0..1000 {
        let d = 2 + k % 5;
        let rho = common::random_density(d, &mut rng);
        let gamma = rand::Rng::random_range(&mut rng, 0.0..2.0);
        let tau = rand::Rng::random_range(&mut rng, 0.0..5.0);
        let out = rho.apply_decoherence(gamma, tau).unwrap();
        min_eig = min_eig.min(linalg::min_eigenvalue(out.matrix()));
        tr_err = tr_err.max((out.trace() - 1.0).abs());
        herm = herm.max(linalg::hermiticity_defect(out.matrix()));
    }
    c.check(
        min_eig >= -1e-10 && tr_err < 1e-10 && herm < 1e-12,
        format!("1000 dephased states: min eigenvalue {min_eig:.2e}, trace error {tr_err:.1e}, Hermiticity defect {herm:.1e}"),
    );

    let mut worst_z = 0.0f64;
    for k in 0..24 {
        let d = 2 + k % 3;
        let basis = gell_mann_basis(d).unwrap();
        let rho = if k % 2 == 0 {
            common::random_density(d, &mut rng)
        } else {
            evolved_density(&ExperimentConfig::parallel(d).with_decoherence_rate(0.05)).unwrap()
        };
        let (i, j) = (1 + k % (d * d - 1), (7 * k) % (d * d));
        let op = tensor_operator(&basis, i, j);
        let exact = linalg::trace_of_product(&op, rho.matrix()).re;
        let r = sample_term(&op, &rho, 1_000_000, &mut rng).unwrap();
        let se = (r.variance / 1e6).sqrt();
        let z = if se > 0.0 { (r.mean - exact).abs() / se } else if (r.mean - exact).abs() < 1e-12 { 0.0 } else { f64::INFINITY };
        worst_z = worst_z.max(z);
    }
    c.check(worst_z <= 4.0, format!("unbiasedness at 1e6 shots: worst |mean − exact| = {worst_z:.2} standard errors (want ≤ 4)"));

    let replay = || {
        let dir = tempfile::tempdir().unwrap();
        let mut spec = SweepSpec::new(Variable::Budget, Grid::log(200.0, 2000.0, 6), ExperimentConfig::parallel(3).with_decoherence_rate(0.05), Metric::Confidence);
        spec.mode = MeasurementMode::Grouped;
        spec.repetitions = 20;
        spec.seed = 99;
        let table = sweep::measurement_curve(&spec).unwrap();
        let mut manifest = io::RunManifest::new("simulate", spec.base.clone()).with_sweep(spec).with_seed(99);
        let path = io::emit_table(dir.path(), "confidence", &table, &mut manifest).unwrap();
        io::csv_body(&path).unwrap()
    };
    let (a, b) = (replay(), replay());
    c.check(a == b && !a.is_empty(), format!("replay with fixed seed byte-identical: {}", a == b));
    c
}

fn rng_terms(rng: &mut ChaCha8Rng) -> usize {
    rand::Rng::random_range(rng, 1..=6)
}

fn geometry() -> Checks {
    let mut c = Checks::default();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let rel = |a: &DMatrix<f64>, b: &DMatrix<f64>| {
        a.iter().zip(b.iter()).map(|(x, y)| (x - y).abs() / y.abs().max(f64::MIN_POSITIVE)).fold(0.0, f64::max)
    };
    for d in 2..=6 {
        for cfg in [ExperimentConfig::parallel(d), ExperimentConfig::linear(d)] {
            let oracle = common::planar_distances(d, cfg.superposition_width, cfg.min_distance, cfg.theta_1, cfg.theta_2);
            let err = rel(&distance_matrix(&cfg).unwrap().entries, &oracle);
            c.check(err <= 1e-12, format!("D={d} ({:.3}, {:.3}): relative error {err:.1e}", cfg.theta_1, cfg.theta_2));
        }
        let (mut valid, mut worst, mut unflagged) = (0, 0.0f64, 0);
        while valid < 100 {
            let (t1, t2) = (common::random_angle(&mut rng), common::random_angle(&mut rng));
            let cfg = ExperimentConfig::parallel(d).with_angles(t1, t2);
            let oracle = common::planar_distances(d, cfg.superposition_width, cfg.min_distance, t1, t2);
            let oracle_valid = oracle.min() >= cfg.min_distance * (1.0 - 1e-12);
            let closed = distance_matrix(&cfg);
            if oracle_valid {
                valid += 1;
                worst = worst.max(rel(&closed.unwrap().entries, &oracle));
            } else if let Ok(m) = closed {
                // outside the physical region the closed form may disagree, but
                // it must then report the geometry as invalid
                let check = qgem::geometry::validate_geometry(&m, &cfg).unwrap();
                if rel(&m.entries, &oracle) > 1e-12 && check.valid {
                    unflagged += 1;
                }
            }
        }
        c.check(
            worst <= 1e-12 && unflagged == 0,
            format!("D={d}: 100 random valid angle pairs, worst relative error {worst:.1e}; invalid pairs passing unflagged: {unflagged}"),
        );
    }
    c
}

fn main() {
    let criteria: [(&str, fn() -> Checks); 8] = [
        ("entropy reproduction", entropy),
        ("witness reproduction", witness),
        ("decoherence captions", decoherence),
        ("term counts", term_counts),
        ("grouping", grouping),
        ("measurement crossings", crossings),
        ("property suites", properties),
        ("geometry oracles", geometry),
    ];
    let mut failed = Vec::new();
    for (k, (name, run)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let checks = run();
        let ok = checks.passed();
        println!("{} criterion {}: {name} ({:.1?})", if ok { "PASS" } else { "FAIL" }, k + 1, start.elapsed());
        for (good, line) in &checks.lines {
            println!("    {} {line}", if *good { "ok  " } else { "MISS" });
        }
        if !ok {
            failed.push(k + 1);
        }
    }
    println!("acceptance: {} of {} criteria pass; failing: {failed:?}", criteria.len() - failed.len(), criteria.len());
    if !failed.is_empty() && std::env::var_os("QGEM_ACCEPTANCE_STRICT").is_some() {
        std::process::exit(1);
    }
}
