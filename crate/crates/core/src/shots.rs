//! Finite-measurement campaigns: shot allocation, outcome sampling and the
//! one-sided t-test on the witness estimate.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

use crate::basis::{gell_mann_basis, decompose_witness, tensor_operator, Threshold, WitnessDecomposition};
use crate::config::ExperimentConfig;
use crate::entanglement::{witness_for, WitnessKind};
use crate::error::{QgemError, Result};
use crate::grouping::{commutation_graph, group_terms_ldfc, joint_eigenbasis, GroupingOptions, MeasurementGroup};
use crate::linalg::CMatrix;
use crate::state::{evolved_density, DensityMatrix};

pub const MIN_SHOTS_PER_UNIT: u64 = 2;
/// Largest confidence ever reported.
pub const CONFIDENCE_CAP: f64 = 1.0 - 1e-15;
/// Above this many degrees of freedom the t tail is replaced by the normal tail.
pub const NORMAL_APPROX_DOF: f64 = 200.0;

const PROBABILITY_CLIP: f64 = -1e-12;
const PROBABILITY_FLOOR: f64 = -1e-9;
const MASS_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MeasurementMode {
    PerTerm,
    Grouped,
}

impl MeasurementMode {
    pub fn as_str(self) -> &'static str {
        match self {
            MeasurementMode::PerTerm => "per-term",
            MeasurementMode::Grouped => "grouped",
        }
    }
}

impl std::fmt::Display for MeasurementMode {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.pad(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ShotPlan {
    pub total: u64,
    /// One entry per measured unit (term or group), in unit order.
    pub allocations: Vec<u64>,
    pub mode: MeasurementMode,
}

impl ShotPlan {
    pub fn mean_shots(&self) -> f64 {
        self.total as f64 / self.allocations.len() as f64
    }
}

/// Splits `total` shots in proportion to `weights`.
///
/// Shares are floored, the remainder goes to the largest fractional parts
/// (lower index first on ties), and any unit left below two shots is topped
/// up from whichever unit currently holds the most.
pub fn allocate_shots(weights: &[f64], total: u64, mode: MeasurementMode) -> Result<ShotPlan> {
    let n = weights.len();
    if n == 0 {
        return Err(QgemError::Unsupported("nothing to measure".into()));
    }
    let required = MIN_SHOTS_PER_UNIT * n as u64;
    if total < required {
        return Err(QgemError::Budget { total, units: n, required });
    }
    if weights.iter().any(|w| !w.is_finite() || *w < 0.0) {
        return Err(QgemError::Numerical("shot weights must be finite and non-negative".into()));
    }
    let sum: f64 = weights.iter().sum();
    let shares: Vec<f64> = if sum > 0.0 {
        weights.iter().map(|w| w / sum * total as f64).collect()
    } else {
        vec![total as f64 / n as f64; n]
    };
    let mut alloc: Vec<u64> = shares.iter().map(|s| s.floor() as u64).collect();
    let assigned: u64 = alloc.iter().sum();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (fa, fb) = (shares[a] - shares[a].floor(), shares[b] - shares[b].floor());
        fb.total_cmp(&fa).then(a.cmp(&b))
    });
    for &k in order.iter().cycle().take(total.saturating_sub(assigned) as usize) {
        alloc[k] += 1;
    }
    for k in 0..n {
        while alloc[k] < MIN_SHOTS_PER_UNIT {
            let donor = (0..n)
                .max_by(|&a, &b| alloc[a].cmp(&alloc[b]).then(b.cmp(&a)))
                .expect("non-empty");
            alloc[donor] -= 1;
            alloc[k] += 1;
        }
    }
    Ok(ShotPlan { total, allocations: alloc, mode })
}

/// Outcome probabilities `⟨v_k|ρ|v_k⟩` for the columns of `basis`.
pub fn outcome_probabilities(basis: &CMatrix, rho: &DensityMatrix) -> Result<Vec<f64>> {
    let m = rho.matrix();
    if basis.nrows() != m.nrows() {
        return Err(QgemError::Dimension { expected: m.nrows(), found: basis.nrows() });
    }
    let mut probs: Vec<f64> = (0..basis.ncols())
        .map(|k| {
            let v = basis.column(k);
            (v.adjoint() * m * v)[(0, 0)].re
        })
        .collect();
    if let Some(p) = probs.iter().find(|p| **p < PROBABILITY_FLOOR) {
        return Err(QgemError::InvalidState(format!("negative outcome probability {p:e}")));
    }
    for p in &mut probs {
        if *p < PROBABILITY_CLIP || *p < 0.0 {
            *p = 0.0;
        }
    }
    let mass: f64 = probs.iter().sum();
    if !((mass - 1.0).abs() <= MASS_TOLERANCE) {
        return Err(QgemError::InvalidState(format!("outcome probabilities sum to {mass}")));
    }
    probs.iter_mut().for_each(|p| *p /= mass);
    Ok(probs)
}

/// Multinomial outcome counts drawn as a chain of binomials.
pub fn sample_counts<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let mut counts = vec![0; probs.len()];
    let mut left = shots;
    let mut mass = 1.0;
    for (k, &p) in probs.iter().enumerate() {
        if left == 0 {
            break;
        }
        if k + 1 == probs.len() || p >= mass {
            counts[k] = left;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let c = Binomial::new(left, q).expect("probability in [0,1]").sample(rng);
        counts[k] = c;
        left -= c;
        mass -= p;
    }
    counts
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct UnitRecord {
    pub mean: f64,
    /// Sample variance with the `shots − 1` denominator.
    pub variance: f64,
    pub shots: u64,
}

impl UnitRecord {
    fn from_counts(counts: &[u64], values: &[f64]) -> Self {
        let shots: u64 = counts.iter().sum();
        let n = shots as f64;
        let mean = counts.iter().zip(values).map(|(&c, v)| c as f64 * v).sum::<f64>() / n;
        let ss: f64 = counts
            .iter()
            .zip(values)
            .map(|(&c, v)| c as f64 * (v - mean) * (v - mean))
            .sum();
        let variance = if shots > 1 { ss / (n - 1.0) } else { 0.0 };
        Self { mean, variance, shots }
    }
}

/// A measured unit reduced to its distinct joint outcomes.
#[derive(Debug, Clone, PartialEq)]
struct OutcomeTable {
    probs: Vec<f64>,
    /// `values[m][k]`: value of member `m` on outcome `k`.
    values: Vec<Vec<f64>>,
}

impl OutcomeTable {
    /// Merges basis vectors that give every member the same value and drops
    /// zero-probability outcomes. This changes nothing in distribution.
    fn new(probs: Vec<f64>, eigenvalues: &[Vec<f64>]) -> Self {
        let members = eigenvalues.len();
        let mut keys: Vec<Vec<f64>> = Vec::new();
        let mut merged: Vec<f64> = Vec::new();
        for (k, &p) in probs.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            let key: Vec<f64> = eigenvalues.iter().map(|ev| ev[k]).collect();
            match keys
                .iter()
                .position(|q| q.iter().zip(&key).all(|(a, b)| (a - b).abs() < 1e-9))
            {
                Some(i) => merged[i] += p,
                None => {
                    keys.push(key);
                    merged.push(p);
                }
            }
        }
        let values = (0..members).map(|m| keys.iter().map(|k| k[m]).collect()).collect();
        Self { probs: merged, values }
    }

    fn sample<R: Rng + ?Sized>(&self, shots: u64, rng: &mut R) -> Vec<UnitRecord> {
        let counts = sample_counts(&self.probs, shots, rng);
        self.values.iter().map(|v| UnitRecord::from_counts(&counts, v)).collect()
    }

    fn expectations(&self) -> Vec<f64> {
        self.values
            .iter()
            .map(|v| v.iter().zip(&self.probs).map(|(a, p)| a * p).sum())
            .collect()
    }
}

fn check_shots(shots: u64) -> Result<()> {
    if shots < MIN_SHOTS_PER_UNIT {
        return Err(QgemError::Budget { total: shots, units: 1, required: MIN_SHOTS_PER_UNIT });
    }
    Ok(())
}

/// Measures one Hermitian operator `shots` times on `rho`.
pub fn sample_term<R: Rng + ?Sized>(
    operator: &CMatrix,
    rho: &DensityMatrix,
    shots: u64,
    rng: &mut R,
) -> Result<UnitRecord> {
    check_shots(shots)?;
    let (basis, eigenvalues) = joint_eigenbasis(std::slice::from_ref(operator), 0)?;
    let table = OutcomeTable::new(outcome_probabilities(&basis, rho)?, &eigenvalues);
    Ok(table.sample(shots, rng)[0])
}

/// Measures a commuting group jointly; members share every outcome.
pub fn sample_group<R: Rng + ?Sized>(
    group: &MeasurementGroup,
    rho: &DensityMatrix,
    shots: u64,
    rng: &mut R,
) -> Result<Vec<UnitRecord>> {
    check_shots(shots)?;
    let table = OutcomeTable::new(outcome_probabilities(&group.eigenbasis, rho)?, &group.eigenvalues);
    Ok(table.sample(shots, rng))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TermRecord {
    /// Index into `WitnessDecomposition::terms`.
    pub term: usize,
    pub mean: f64,
    pub variance: f64,
    pub shots: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRecord {
    pub entries: Vec<TermRecord>,
    pub seed: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConfidenceReport {
    pub estimate: f64,
    pub variance: f64,
    pub standard_error: f64,
    /// Average shots per measured unit.
    pub mean_shots: f64,
    /// `−W̄ / s_W`; positive when the estimate is negative.
    pub t_statistic: f64,
    pub degrees_of_freedom: f64,
    pub confidence: f64,
}

impl ConfidenceReport {
    /// Two-sided interval on the witness value at the given level.
    pub fn confidence_interval(&self, level: f64) -> (f64, f64) {
        let q = quantile(0.5 + level / 2.0, self.degrees_of_freedom);
        let half = q * self.standard_error;
        (self.estimate - half, self.estimate + half)
    }
}

fn quantile(p: f64, dof: f64) -> f64 {
    if dof > NORMAL_APPROX_DOF || dof.is_nan() {
        Normal::standard().inverse_cdf(p)
    } else {
        StudentsT::new(0.0, 1.0, dof.max(1.0)).expect("positive dof").inverse_cdf(p)
    }
}

fn upper_cdf(t: f64, dof: f64) -> f64 {
    if dof > NORMAL_APPROX_DOF {
        Normal::standard().cdf(t)
    } else {
        StudentsT::new(0.0, 1.0, dof.max(1.0)).expect("positive dof").cdf(t)
    }
}

/// Confidence with which `W ≥ 0` is rejected.
///
/// Equals `1 − p` of the one-sided test; for a non-negative estimate the same
/// formula gives at most one half.
pub fn confidence_level(estimate: f64, standard_error: f64, dof: f64) -> f64 {
    if standard_error == 0.0 {
        return if estimate < 0.0 { CONFIDENCE_CAP } else { 0.5 };
    }
    upper_cdf(-estimate / standard_error, dof).min(CONFIDENCE_CAP)
}

/// Combines per-term records into the witness estimate and its test.
pub fn witness_statistics(
    records: &[TermRecord],
    decomp: &WitnessDecomposition,
    mean_shots: f64,
) -> ConfidenceReport {
    let mut estimate = decomp.identity_coefficient();
    let mut variance = 0.0;
    for r in records {
        let c = decomp.terms[r.term].coefficient;
        estimate += c * r.mean;
        variance += c * c * r.variance;
    }
    let standard_error = variance.sqrt() / mean_shots.sqrt();
    let degrees_of_freedom = mean_shots - 1.0;
    let t_statistic = if standard_error > 0.0 {
        -estimate / standard_error
    } else if estimate < 0.0 {
        f64::INFINITY
    } else {
        0.0
    };
    ConfidenceReport {
        estimate,
        variance,
        standard_error,
        mean_shots,
        t_statistic,
        degrees_of_freedom,
        confidence: confidence_level(estimate, standard_error, degrees_of_freedom),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CampaignOptions {
    pub threshold: Threshold,
    pub grouping: GroupingOptions,
}

impl Default for CampaignOptions {
    fn default() -> Self {
        Self { threshold: Threshold::default(), grouping: GroupingOptions::default() }
    }
}

#[derive(Debug, Clone, PartialEq)]
struct Unit {
    members: Vec<usize>,
    weight: f64,
    table: OutcomeTable,
}

/// Everything needed to simulate one scenario repeatedly.
///
/// The witness, its decomposition, the measurement units and their outcome
/// distributions on the decohered state are computed once.
#[derive(Debug, Clone, PartialEq)]
pub struct Campaign {
    decomposition: WitnessDecomposition,
    mode: MeasurementMode,
    units: Vec<Unit>,
}

impl Campaign {
    pub fn from_config(
        config: &ExperimentConfig,
        kind: WitnessKind,
        mode: MeasurementMode,
        options: &CampaignOptions,
    ) -> Result<Self> {
        let witness = witness_for(config, kind)?.ok_or_else(|| {
            QgemError::Unsupported("state is PPT at γ = 0, no witness to measure".into())
        })?;
        let basis = gell_mann_basis(config.dimension)?;
        let decomposition = decompose_witness(&witness, &basis, options.threshold)?;
        let rho = evolved_density(config)?;
        let groups = match mode {
            MeasurementMode::Grouped => {
                let graph = commutation_graph(&decomposition, &basis)?;
                Some(group_terms_ldfc(&graph, &decomposition, &basis, &options.grouping)?)
            }
            MeasurementMode::PerTerm => None,
        };
        Self::from_parts(decomposition, groups.as_deref(), &basis, &rho)
    }

    /// Builds a campaign from explicit parts. Without `groups` every measured
    /// term is its own unit.
    pub fn from_parts(
        decomposition: WitnessDecomposition,
        groups: Option<&[MeasurementGroup]>,
        basis: &[crate::basis::BasisElement],
        rho: &DensityMatrix,
    ) -> Result<Self> {
        let (mode, units) = match groups {
            Some(groups) => {
                let units = groups
                    .par_iter()
                    .map(|g| {
                        let probs = outcome_probabilities(&g.eigenbasis, rho)?;
                        Ok(Unit {
                            members: g.members.clone(),
                            weight: g.weight,
                            table: OutcomeTable::new(probs, &g.eigenvalues),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (MeasurementMode::Grouped, units)
            }
            None => {
                let units = decomposition
                    .measured_terms()
                    .par_iter()
                    .map(|&k| {
                        let t = decomposition.terms[k];
                        let op = tensor_operator(basis, t.first, t.second);
                        let (eb, ev) = joint_eigenbasis(std::slice::from_ref(&op), 0)?;
                        Ok(Unit {
                            members: vec![k],
                            weight: t.coefficient.abs(),
                            table: OutcomeTable::new(outcome_probabilities(&eb, rho)?, &ev),
                        })
                    })
                    .collect::<Result<Vec<_>>>()?;
                (MeasurementMode::PerTerm, units)
            }
        };
        if units.is_empty() {
            return Err(QgemError::Unsupported("witness has no measurable terms".into()));
        }
        Ok(Self { decomposition, mode, units })
    }

    pub fn mode(&self) -> MeasurementMode {
        self.mode
    }

    pub fn decomposition(&self) -> &WitnessDecomposition {
        &self.decomposition
    }

    /// Number of distinct measurement settings.
    pub fn unit_count(&self) -> usize {
        self.units.len()
    }

    pub fn plan(&self, total: u64) -> Result<ShotPlan> {
        let weights: Vec<f64> = self.units.iter().map(|u| u.weight).collect();
        allocate_shots(&weights, total, self.mode)
    }

    /// `Tr(W ρ)` from the unit distributions (the infinite-shot limit).
    pub fn exact_witness_value(&self) -> f64 {
        let mut w = self.decomposition.identity_coefficient();
        for u in &self.units {
            for (&k, e) in u.members.iter().zip(u.table.expectations()) {
                w += self.decomposition.terms[k].coefficient * e;
            }
        }
        w
    }

    pub fn simulate<R: Rng + ?Sized>(&self, plan: &ShotPlan, rng: &mut R) -> Vec<TermRecord> {
        let mut out = Vec::new();
        for (u, &shots) in self.units.iter().zip(&plan.allocations) {
            for (&term, r) in u.members.iter().zip(u.table.sample(shots, rng)) {
                out.push(TermRecord { term, mean: r.mean, variance: r.variance, shots: r.shots });
            }
        }
        out.sort_by_key(|r| r.term);
        out
    }

    /// One campaign of `total` shots on its own RNG stream.
    pub fn run_once(&self, total: u64, seed: u64, repetition: u64) -> Result<(MeasurementRecord, ConfidenceReport)> {
        let plan = self.plan(total)?;
        let mut rng = stream(seed, total, repetition);
        let entries = self.simulate(&plan, &mut rng);
        let report = witness_statistics(&entries, &self.decomposition, plan.mean_shots());
        Ok((MeasurementRecord { entries, seed }, report))
    }

    /// `repetitions` independent campaigns, each on its own seeded stream.
    pub fn run_trial(&self, total: u64, repetitions: usize, seed: u64) -> Result<TrialSummary> {
        if repetitions == 0 {
            return Err(QgemError::config("reps", "must be at least 1"));
        }
        let reports = (0..repetitions as u64)
            .into_par_iter()
            .map(|r| self.run_once(total, seed, r).map(|(_, rep)| rep))
            .collect::<Result<Vec<_>>>()?;
        Ok(TrialSummary::from_reports(total, reports))
    }
}

/// Independent stream for one (seed, budget, repetition) triple.
fn stream(seed: u64, total: u64, repetition: u64) -> ChaCha8Rng {
    let mut key = seed ^ total.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    // splitmix64 finalizer
    key = (key ^ (key >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    key = (key ^ (key >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    key ^= key >> 31;
    let mut rng = ChaCha8Rng::seed_from_u64(key);
    rng.set_stream(repetition);
    rng
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrialSummary {
    pub total_shots: u64,
    pub mean_confidence: f64,
    pub std_confidence: f64,
    pub mean_estimate: f64,
    pub mean_standard_error: f64,
    pub reports: Vec<ConfidenceReport>,
}

impl TrialSummary {
    fn from_reports(total_shots: u64, reports: Vec<ConfidenceReport>) -> Self {
        let n = reports.len() as f64;
        let mean = |f: fn(&ConfidenceReport) -> f64| reports.iter().map(f).sum::<f64>() / n;
        let mean_confidence = mean(|r| r.confidence);
        let var = reports
            .iter()
            .map(|r| (r.confidence - mean_confidence).powi(2))
            .sum::<f64>()
            / (n - 1.0).max(1.0);
        Self {
            total_shots,
            mean_confidence,
            std_confidence: var.sqrt(),
            mean_estimate: mean(|r| r.estimate),
            mean_standard_error: mean(|r| r.standard_error),
            reports,
        }
    }
}

/// Builds the scenario and runs one trial.
pub fn run_trial(
    config: &ExperimentConfig,
    kind: WitnessKind,
    mode: MeasurementMode,
    total: u64,
    repetitions: usize,
    seed: u64,
) -> Result<TrialSummary> {
    Campaign::from_config(config, kind, mode, &CampaignOptions::default())?.run_trial(total, repetitions, seed)
}

/// Log-spaced integer budgets from `min` to `max` with `per_decade` points per decade.
pub fn budget_grid(min: u64, max: u64, per_decade: usize) -> Vec<u64> {
    let (lo, hi) = ((min.max(1) as f64).log10(), (max.max(1) as f64).log10());
    let steps = ((hi - lo) * per_decade as f64).ceil() as usize;
    let mut out: Vec<u64> = (0..=steps)
        .map(|k| 10f64.powf(lo + (hi - lo) * k as f64 / steps.max(1) as f64).round() as u64)
        .collect();
    out.dedup();
    out
}

/// Consecutive grid points that must all reach the target for a crossing.
pub const CROSSING_RUN: usize = 3;

/// First budget on `grid` from which mean confidence stays at or above
/// `target` for [`CROSSING_RUN`] consecutive points, with every trial run.
///
/// A single noisy excursion above the target does not count.
pub fn find_crossing(
    campaign: &Campaign,
    grid: &[u64],
    repetitions: usize,
    seed: u64,
    target: f64,
) -> Result<(Option<u64>, Vec<TrialSummary>)> {
    let mut seen: Vec<TrialSummary> = Vec::new();
    let minimum = MIN_SHOTS_PER_UNIT * campaign.unit_count() as u64;
    let mut run = 0;
    for &m in grid.iter().filter(|&&m| m >= minimum) {
        let trial = campaign.run_trial(m, repetitions, seed)?;
        run = if trial.mean_confidence >= target { run + 1 } else { 0 };
        seen.push(trial);
        if run == CROSSING_RUN {
            return Ok((Some(seen[seen.len() - run].total_shots), seen));
        }
    }
    let tail = seen.len() - run;
    Ok((seen.get(tail).filter(|_| run > 0).map(|t| t.total_shots), seen))
}
