//! Grouping of witness terms into jointly measurable sets.
//!
//! Two product operators can be measured in one setting iff they commute.
//! Groups are found by colouring the non-commutation graph largest degree
//! first (LDFC), then shrinking the colouring with iterated-greedy passes:
//! re-running first-fit over the vertices listed class by class never uses
//! more classes than the colouring it started from.

use num_complex::Complex64;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::{tensor_operator, BasisElement, WitnessDecomposition};
use crate::error::{QgemError, Result};
use crate::linalg::{self, CMatrix};

/// Max-abs commutator entry, on HS-normalised operators, below which two terms commute.
pub const COMMUTATION_TOLERANCE: f64 = 1e-10;
/// Allowed off-diagonal residue of a group member in the shared eigenbasis.
pub const DIAGONALIZATION_TOLERANCE: f64 = 1e-8;

/// Undirected graph on the measured terms; an edge means the two operators commute.
#[derive(Debug, Clone, PartialEq)]
pub struct CommutationGraph {
    /// Vertex `v` is `decomposition.terms[vertices[v]]`.
    pub vertices: Vec<usize>,
    commutes: Vec<Vec<bool>>,
}

impl CommutationGraph {
    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn commutes(&self, a: usize, b: usize) -> bool {
        self.commutes[a][b]
    }

    /// Number of other vertices commuting with `v`.
    pub fn degree(&self, v: usize) -> usize {
        self.commutes[v].iter().filter(|&&c| c).count()
    }

    pub fn edge_count(&self) -> usize {
        (0..self.len()).map(|v| self.degree(v)).sum::<usize>() / 2
    }
}

/// Builds the commutation graph of all non-identity terms.
///
/// `[A⊗B, C⊗D] = AC⊗BD − CA⊗DB`, so only D×D products are needed.
pub fn commutation_graph(decomp: &WitnessDecomposition, basis: &[BasisElement]) -> Result<CommutationGraph> {
    let dim = decomp.dimension;
    if basis.len() != dim * dim {
        return Err(QgemError::Dimension {
            expected: dim * dim,
            found: basis.len(),
        });
    }
    let nb = basis.len();
    let products: Vec<CMatrix> = (0..nb * nb)
        .map(|k| &basis[k / nb].matrix * &basis[k % nb].matrix)
        .collect();
    let prod = |a: usize, b: usize| &products[a * nb + b];

    let vertices = decomp.measured_terms();
    let terms: Vec<(usize, usize, f64)> = vertices
        .iter()
        .map(|&k| {
            let t = decomp.terms[k];
            (t.first, t.second, basis[t.first].hs_norm_sq * basis[t.second].hs_norm_sq)
        })
        .collect();

    // Factor-level shortcut: if both factor pairs commute (or both
    // anticommute) the products commute; one of each needs a zero product.
    let relation: Vec<FactorRelation> = (0..nb * nb)
        .map(|k| FactorRelation::of(&products[k], &products[(k % nb) * nb + k / nb]))
        .collect();
    let rel = |a: usize, b: usize| relation[a * nb + b];
    // Entries of (ab, ba) over the union of their supports.
    let supports: Vec<Vec<(Complex64, Complex64)>> = (0..nb * nb)
        .map(|k| {
            let (ab, ba) = (&products[k], &products[(k % nb) * nb + k / nb]);
            ab.iter()
                .zip(ba.iter())
                .filter(|(x, y)| x.norm() > 0.0 || y.norm() > 0.0)
                .map(|(&x, &y)| (x, y))
                .collect()
        })
        .collect();

    let n = vertices.len();
    let commute_pair = |a: usize, b: usize| -> bool {
        let (i, j, na) = terms[a];
        let (k, l, nbn) = terms[b];
        match (rel(i, k), rel(j, l)) {
            (FactorRelation::Commute, FactorRelation::Commute)
            | (FactorRelation::Anticommute, FactorRelation::Anticommute) => return true,
            (FactorRelation::Commute, FactorRelation::Anticommute)
            | (FactorRelation::Anticommute, FactorRelation::Commute) => {
                return linalg::max_abs(prod(i, k)) * linalg::max_abs(prod(j, l)) < 1e-14
            }
            _ => {}
        }
        let limit = COMMUTATION_TOLERANCE * (na * nbn).sqrt();
        for &(x, y) in &supports[i * nb + k] {
            for &(u, v) in &supports[j * nb + l] {
                if (x * u - y * v).norm() >= limit {
                    return false;
                }
            }
        }
        true
    };
    let upper: Vec<Vec<bool>> = (0..n)
        .into_par_iter()
        .map(|a| (a + 1..n).map(|b| commute_pair(a, b)).collect())
        .collect();
    let mut commutes = vec![vec![false; n]; n];
    for a in 0..n {
        for (off, &c) in upper[a].iter().enumerate() {
            let b = a + 1 + off;
            commutes[a][b] = c;
            commutes[b][a] = c;
        }
    }
    Ok(CommutationGraph { vertices, commutes })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum FactorRelation {
    Commute,
    Anticommute,
    Other,
}

impl FactorRelation {
    /// Relation between `ab` and `ba`, given both products.
    fn of(ab: &CMatrix, ba: &CMatrix) -> Self {
        if linalg::max_abs(&(ab - ba)) < 1e-14 {
            FactorRelation::Commute
        } else if linalg::max_abs(&(ab + ba)) < 1e-14 {
            FactorRelation::Anticommute
        } else {
            FactorRelation::Other
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GroupingOptions {
    /// Iterated-greedy passes applied after the initial LDFC colouring. Zero
    /// keeps the plain LDFC result.
    pub refinement_passes: usize,
    /// Seed for pass ordering and for the joint-eigenbasis weights.
    pub seed: u64,
}

impl Default for GroupingOptions {
    fn default() -> Self {
        Self {
            refinement_passes: 0,
            seed: 0x5eed,
        }
    }
}

struct BitRows {
    words: usize,
    rows: Vec<u64>,
}

impl BitRows {
    fn conflicts(graph: &CommutationGraph) -> Self {
        let n = graph.len();
        let words = n.div_ceil(64).max(1);
        let mut rows = vec![0u64; n * words];
        for a in 0..n {
            for b in 0..n {
                if a != b && !graph.commutes(a, b) {
                    rows[a * words + b / 64] |= 1 << (b % 64);
                }
            }
        }
        Self { words, rows }
    }

    fn row(&self, v: usize) -> &[u64] {
        &self.rows[v * self.words..(v + 1) * self.words]
    }
}

/// First-fit colouring in the given vertex order.
fn first_fit(conflicts: &BitRows, order: &[usize]) -> Vec<Vec<usize>> {
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut masks: Vec<Vec<u64>> = Vec::new();
    for &v in order {
        let row = conflicts.row(v);
        let slot = masks
            .iter()
            .position(|m| m.iter().zip(row).all(|(a, b)| a & b == 0));
        let slot = slot.unwrap_or_else(|| {
            classes.push(Vec::new());
            masks.push(vec![0; conflicts.words]);
            classes.len() - 1
        });
        classes[slot].push(v);
        masks[slot][v / 64] |= 1 << (v % 64);
    }
    classes
}

/// Partitions graph vertices into pairwise-commuting classes.
///
/// The initial order sorts vertices by descending number of non-commuting
/// partners, ties by larger |c_ij| and then lower term index.
pub fn partition_ldfc(
    graph: &CommutationGraph,
    decomp: &WitnessDecomposition,
    options: &GroupingOptions,
) -> Vec<Vec<usize>> {
    let n = graph.len();
    if n == 0 {
        return Vec::new();
    }
    let conflicts = BitRows::conflicts(graph);
    let weight = |v: usize| decomp.terms[graph.vertices[v]].coefficient.abs();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        let (da, db) = (n - 1 - graph.degree(a), n - 1 - graph.degree(b));
        db.cmp(&da)
            .then(weight(b).total_cmp(&weight(a)))
            .then(graph.vertices[a].cmp(&graph.vertices[b]))
    });
    let mut classes = first_fit(&conflicts, &order);

    let mut rng = ChaCha8Rng::seed_from_u64(options.seed);
    for _ in 0..options.refinement_passes {
        match rng.random_range(0..10) {
            0..=4 => classes.reverse(),
            5..=7 => classes.sort_by(|a, b| b.len().cmp(&a.len())),
            _ => classes.shuffle(&mut rng),
        }
        let order: Vec<usize> = classes.iter().flatten().copied().collect();
        classes = first_fit(&conflicts, &order);
    }
    for class in &mut classes {
        class.sort_unstable();
    }
    classes.sort_by_key(|c| c[0]);
    classes
}

/// A set of pairwise-commuting terms measured in one shared basis.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementGroup {
    /// Indices into `WitnessDecomposition::terms`.
    pub members: Vec<usize>,
    /// `Σ |c_ij|` over members.
    pub weight: f64,
    /// Columns are the common eigenvectors.
    pub eigenbasis: CMatrix,
    /// `eigenvalues[m][k]`: eigenvalue of member `m` on basis vector `k`.
    pub eigenvalues: Vec<Vec<f64>>,
}

/// Groups the measured terms and attaches a shared eigenbasis to each group.
pub fn group_terms_ldfc(
    graph: &CommutationGraph,
    decomp: &WitnessDecomposition,
    basis: &[BasisElement],
    options: &GroupingOptions,
) -> Result<Vec<MeasurementGroup>> {
    let classes = partition_ldfc(graph, decomp, options);
    classes
        .par_iter()
        .enumerate()
        .map(|(g, class)| {
            let members: Vec<usize> = class.iter().map(|&v| graph.vertices[v]).collect();
            let ops: Vec<CMatrix> = members
                .iter()
                .map(|&k| tensor_operator(basis, decomp.terms[k].first, decomp.terms[k].second))
                .collect();
            let (eigenbasis, eigenvalues) = joint_eigenbasis(&ops, options.seed ^ g as u64)?;
            Ok(MeasurementGroup {
                weight: members.iter().map(|&k| decomp.terms[k].coefficient.abs()).sum(),
                members,
                eigenbasis,
                eigenvalues,
            })
        })
        .collect()
}

fn cluster(values: &[f64], scale: f64) -> Vec<std::ops::Range<usize>> {
    let tol = 1e-9 * scale.max(1.0);
    let mut out = Vec::new();
    let mut start = 0;
    for k in 1..=values.len() {
        if k == values.len() || values[k] - values[k - 1] > tol {
            out.push(start..k);
            start = k;
        }
    }
    out
}

fn split_block(block: CMatrix, members: &[CMatrix], next: usize, out: &mut Vec<CMatrix>) {
    if block.ncols() == 1 || next == members.len() {
        out.push(block);
        return;
    }
    let sub = block.adjoint() * &members[next] * &block;
    let (vals, vecs) = linalg::hermitian_eigen(&sub);
    let rotated = &block * vecs;
    let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
    for r in cluster(&vals, scale) {
        split_block(rotated.columns(r.start, r.len()).into_owned(), members, next + 1, out);
    }
}

/// Finds a unitary whose columns diagonalize every member simultaneously.
///
/// A random positive combination of the members separates most joint
/// eigenspaces at once; what stays degenerate is split member by member.
/// A single member gets its plain eigendecomposition.
pub fn joint_eigenbasis(members: &[CMatrix], seed: u64) -> Result<(CMatrix, Vec<Vec<f64>>)> {
    let first = members
        .first()
        .ok_or_else(|| QgemError::Unsupported("empty measurement group".into()))?;
    let n = first.nrows();
    let basis = if members.len() == 1 {
        linalg::hermitian_eigen(first).1
    } else {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut mix = CMatrix::zeros(n, n);
        for m in members {
            mix += m * Complex64::new(rng.random_range(0.5..1.5), 0.0);
        }
        let (vals, vecs) = linalg::hermitian_eigen(&mix);
        let scale = vals.iter().fold(0.0f64, |a, v| a.max(v.abs()));
        let mut blocks = Vec::new();
        for r in cluster(&vals, scale) {
            split_block(vecs.columns(r.start, r.len()).into_owned(), members, 0, &mut blocks);
        }
        let mut u = CMatrix::zeros(n, n);
        let mut col = 0;
        for b in blocks {
            for c in 0..b.ncols() {
                u.set_column(col, &b.column(c));
                col += 1;
            }
        }
        u
    };
    let mut eigenvalues = Vec::with_capacity(members.len());
    for (idx, m) in members.iter().enumerate() {
        let residual = linalg::off_diagonal_residual(&basis, m);
        if residual > DIAGONALIZATION_TOLERANCE {
            return Err(QgemError::Numerical(format!(
                "member {idx} not diagonalized by the shared basis (residual {residual:e})"
            )));
        }
        let d = basis.adjoint() * m * &basis;
        eigenvalues.push(d.diagonal().iter().map(|z| z.re).collect());
    }
    Ok((basis, eigenvalues))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basis::{decompose_witness, gell_mann_basis, Term, Threshold};
    use crate::config::ExperimentConfig;
    use crate::entanglement::{witness_for, WitnessKind};

    fn qubit_decomposition() -> (WitnessDecomposition, Vec<BasisElement>) {
        let w = witness_for(&ExperimentConfig::parallel(2), WitnessKind::Ppt).unwrap().unwrap();
        let basis = gell_mann_basis(2).unwrap();
        (decompose_witness(&w, &basis, Threshold::default()).unwrap(), basis)
    }

    fn handmade(dim: usize, pairs: &[(usize, usize)]) -> WitnessDecomposition {
        WitnessDecomposition {
            dimension: dim,
            kind: WitnessKind::Ppt,
            terms: pairs
                .iter()
                .map(|&(first, second)| Term {
                    first,
                    second,
                    coefficient: 0.5,
                })
                .collect(),
            total_weight: 0.5 * pairs.len() as f64,
            threshold: 0.0,
        }
    }

    #[test]
    fn qubit_terms_form_a_triangle() {
        let (dec, basis) = qubit_decomposition();
        let g = commutation_graph(&dec, &basis).unwrap();
        assert_eq!(g.len(), 3);
        assert_eq!(g.edge_count(), 3);
        for v in 0..3 {
            assert!(!g.commutes(v, v));
        }
    }

    #[test]
    fn x_and_z_on_one_qubit_do_not_commute() {
        let basis = gell_mann_basis(2).unwrap();
        let dec = handmade(2, &[(1, 0), (3, 0)]);
        let g = commutation_graph(&dec, &basis).unwrap();
        assert!(!g.commutes(0, 1));
        assert_eq!(partition_ldfc(&g, &dec, &GroupingOptions::default()).len(), 2);
    }

    #[test]
    fn qubit_witness_is_one_group_with_bell_basis() {
        let (dec, basis) = qubit_decomposition();
        let g = commutation_graph(&dec, &basis).unwrap();
        let groups = group_terms_ldfc(&g, &dec, &basis, &GroupingOptions::default()).unwrap();
        assert_eq!(groups.len(), 1);
        assert!((groups[0].weight - 0.75).abs() < 1e-9);
        for member in &groups[0].eigenvalues {
            for &e in member {
                assert!((e.abs() - 1.0).abs() < 1e-9);
            }
        }
        // Each basis vector is maximally entangled: reduced purity 1/2.
        let u = &groups[0].eigenbasis;
        for c in 0..4 {
            let v: Vec<_> = u.column(c).iter().copied().collect();
            let red = crate::entanglement::partial_trace_matrix(&linalg::outer(&v), 2, crate::entanglement::Subsystem::Second).unwrap();
            assert!((linalg::trace_of_product(&red, &red).re - 0.5).abs() < 1e-9);
        }
    }

    #[test]
    fn empty_decomposition_gives_no_groups() {
        let basis = gell_mann_basis(2).unwrap();
        let dec = handmade(2, &[(0, 0)]);
        let g = commutation_graph(&dec, &basis).unwrap();
        assert!(g.is_empty());
        assert!(group_terms_ldfc(&g, &dec, &basis, &GroupingOptions::default()).unwrap().is_empty());
    }

    #[test]
    fn singleton_is_plain_eigendecomposition() {
        let basis = gell_mann_basis(3).unwrap();
        let op = tensor_operator(&basis, 4, 7);
        let (u, ev) = joint_eigenbasis(std::slice::from_ref(&op), 1).unwrap();
        let (vals, vecs) = linalg::hermitian_eigen(&op);
        assert_eq!(u, vecs);
        for (a, b) in ev[0].iter().zip(&vals) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn commuting_diagonals_share_the_identity_basis() {
        let basis = gell_mann_basis(3).unwrap();
        let ops: Vec<CMatrix> = [(7, 0), (8, 7), (0, 8), (7, 7)]
            .iter()
            .map(|&(i, j)| tensor_operator(&basis, i, j))
            .collect();
        let (u, _) = joint_eigenbasis(&ops, 3).unwrap();
        for m in &ops {
            assert!(linalg::off_diagonal_residual(&u, m) < 1e-10);
        }
    }

    #[test]
    fn groups_are_sound_for_qutrits() {
        let w = witness_for(&ExperimentConfig::parallel(3), WitnessKind::Ppt).unwrap().unwrap();
        let basis = gell_mann_basis(3).unwrap();
        let dec = decompose_witness(&w, &basis, Threshold::default()).unwrap();
        let g = commutation_graph(&dec, &basis).unwrap();
        let groups = group_terms_ldfc(&g, &dec, &basis, &GroupingOptions::default()).unwrap();
        let mut seen = vec![0; dec.terms.len()];
        for grp in &groups {
            for (a, &x) in grp.members.iter().enumerate() {
                seen[x] += 1;
                let ox = tensor_operator(&basis, dec.terms[x].first, dec.terms[x].second);
                for &y in &grp.members[a + 1..] {
                    let oy = tensor_operator(&basis, dec.terms[y].first, dec.terms[y].second);
                    assert!(linalg::commutator_norm(&ox, &oy) < 1e-10);
                }
            }
        }
        for k in dec.measured_terms() {
            assert_eq!(seen[k], 1);
        }
        let total: f64 = groups.iter().map(|g| g.weight).sum();
        assert!((total - (dec.total_weight - dec.identity_coefficient().abs())).abs() < 1e-12);
    }
}
