//! CKR random partitions, completely padded partition trees, and Ramsey
//! subsets with their ultrametrics.

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PointSet};
use crate::rng::{derive_seed, rng_from_seed, shuffle, stream, uniform_real};
use crate::tree::{LabeledTree, TreeBuilder};

/// Scale ratio between consecutive levels of a partition tree.
pub const BASE: f64 = 8.0;

const NO_CLUSTER: u32 = u32::MAX;

/// A partition of a point set into clusters of diameter at most `delta`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    delta: f64,
    /// Cluster id per point of the ambient metric, `NO_CLUSTER` outside the
    /// partitioned set.
    cluster_of: Vec<u32>,
    clusters: Vec<PointSet>,
}

impl Partition {
    fn from_labels(delta: f64, cluster_of: Vec<u32>) -> Self {
        let count = cluster_of.iter().filter(|&&c| c != NO_CLUSTER).map(|&c| c as usize + 1).max().unwrap_or(0);
        let mut members = vec![Vec::new(); count];
        for (x, &c) in cluster_of.iter().enumerate() {
            if c != NO_CLUSTER {
                members[c as usize].push(x);
            }
        }
        let clusters = members.into_iter().map(PointSet::new).collect();
        Partition { delta, cluster_of, clusters }
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    pub fn cluster_of(&self, x: usize) -> Option<usize> {
        match self.cluster_of.get(x) {
            Some(&c) if c != NO_CLUSTER => Some(c as usize),
            _ => None,
        }
    }

    pub fn clusters(&self) -> &[PointSet] {
        &self.clusters
    }

    /// The cluster containing `x`.
    pub fn part(&self, x: usize) -> Option<&PointSet> {
        self.cluster_of(x).map(|c| &self.clusters[c])
    }

    pub fn same_cluster(&self, x: usize, y: usize) -> bool {
        let (a, b) = (self.cluster_of[x], self.cluster_of[y]);
        a != NO_CLUSTER && a == b
    }

    pub fn is_all_singletons(&self) -> bool {
        self.clusters.iter().all(|c| c.len() == 1)
    }

    /// Whether the closed ball `B(x, t)` (within the partitioned set) lies in
    /// the cluster of `x`.
    pub fn pads(&self, m: &MetricSpace, x: usize, t: f64) -> bool {
        let cx = self.cluster_of[x];
        m.row(x).iter().zip(&self.cluster_of).all(|(&d, &c)| d > t || c == NO_CLUSTER || c == cx)
    }

    /// Largest cluster diameter.
    pub fn max_cluster_diameter(&self, m: &MetricSpace) -> f64 {
        let mut worst = 0.0f64;
        for c in &self.clusters {
            for (i, &a) in c.as_slice().iter().enumerate() {
                for &b in &c.as_slice()[i + 1..] {
                    worst = worst.max(m.d(a, b));
                }
            }
        }
        worst
    }
}

/// CKR partition of `subset` with bound `delta`: `R` uniform on
/// `[delta/4, delta/2]`, centers visited in a uniformly random order, each
/// cluster the closed ball around its center minus earlier clusters.
pub fn ckr_partition(m: &MetricSpace, subset: &PointSet, delta: f64, seed: u64) -> Result<Partition> {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(Error::InvalidParameter(format!("delta must be positive and finite, got {delta}")));
    }
    if subset.is_empty() {
        return Err(Error::InvalidParameter("cannot partition an empty set".into()));
    }
    if let Some(bad) = subset.iter().find(|&p| p >= m.len()) {
        return Err(Error::UnknownPoint(bad));
    }
    let mut rng = rng_from_seed(seed);
    let r = uniform_real(&mut rng, delta / 4.0, delta / 2.0);
    let mut order = subset.as_slice().to_vec();
    shuffle(&mut rng, &mut order);
    let mut cluster_of = vec![NO_CLUSTER; m.len()];
    ckr_assign(m, subset.as_slice(), &order, r, &mut cluster_of);
    Ok(Partition::from_labels(delta, cluster_of))
}

/// Carves balls of radius `r` around `order`, in order, writing dense
/// cluster ids (empties skipped) into `cluster_of`.
fn ckr_assign(m: &MetricSpace, members: &[usize], order: &[usize], r: f64, cluster_of: &mut [u32]) {
    let mut next = 0u32;
    let mut left = members.len();
    for &c in order {
        if left == 0 {
            break;
        }
        let row = m.row(c);
        let mut used = false;
        for &y in members {
            if cluster_of[y] == NO_CLUSTER && row[y] <= r {
                cluster_of[y] = next;
                used = true;
                left -= 1;
            }
        }
        if used {
            next += 1;
        }
    }
}

/// `(|B(x, Δ/8)| / |B(x, Δ)|)^(16t/Δ)`, a lower bound on the probability
/// that a CKR partition with bound `Δ` contains `B(x, t)` in one cluster.
pub fn padding_probability_bound(m: &MetricSpace, x: usize, delta: f64, t: f64) -> Result<f64> {
    if x >= m.len() {
        return Err(Error::UnknownPoint(x));
    }
    if delta.is_nan() || delta <= 0.0 || t.is_nan() || t <= 0.0 || t > delta / 8.0 {
        return Err(Error::InvalidParameter(format!("need 0 < t <= delta/8, got t={t}, delta={delta}")));
    }
    let small = m.ball_size(x, delta / 8.0) as f64;
    let big = m.ball_size(x, delta) as f64;
    Ok((small / big).powf(16.0 * t / delta))
}

/// Nested partitions `E_0 = {X} ⊇ E_1 ⊇ ... ⊇ E_K`, where `E_k` is the
/// common refinement of `E_{k-1}` and an independent CKR partition with
/// bound `8^-k · diam`, and `E_K` is the first all-singleton level.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionTreeSample {
    alpha: f64,
    diam: f64,
    levels: Vec<Partition>,
}

impl PartitionTreeSample {
    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn diam(&self) -> f64 {
        self.diam
    }

    pub fn base(&self) -> f64 {
        BASE
    }

    pub fn levels(&self) -> &[Partition] {
        &self.levels
    }

    /// Index `K` of the last (all-singleton) level.
    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    /// `8^-k · diam`.
    pub fn scale(&self, k: usize) -> f64 {
        self.diam * BASE.powi(-(k as i32))
    }
}

pub fn sample_partition_tree(m: &MetricSpace, alpha: f64, seed: u64) -> Result<PartitionTreeSample> {
    if !(alpha > 1.0 && alpha.is_finite()) {
        return Err(Error::InvalidParameter(format!("alpha must exceed 1, got {alpha}")));
    }
    let n = m.len();
    let diam = m.diameter();
    let all: Vec<usize> = (0..n).collect();
    let mut levels = vec![Partition::from_labels(diam, vec![0; n])];
    let mut ckr = vec![NO_CLUSTER; n];
    let mut order = all.clone();
    let mut pair_id = std::collections::HashMap::new();
    let mut k = 0usize;
    while !levels[k].is_all_singletons() {
        k += 1;
        let delta = diam * BASE.powi(-(k as i32));
        let mut rng = rng_from_seed(derive_seed(seed, stream::SCALE, k as u64));
        let r = uniform_real(&mut rng, delta / 4.0, delta / 2.0);
        order.copy_from_slice(&all);
        shuffle(&mut rng, &mut order);
        ckr.fill(NO_CLUSTER);
        ckr_assign(m, &all, &order, r, &mut ckr);
        // Intersect; ids numbered by first appearance in point order.
        pair_id.clear();
        let prev = &levels[k - 1].cluster_of;
        let labels: Vec<u32> = (0..n)
            .map(|x| {
                let fresh = pair_id.len() as u32;
                *pair_id.entry((prev[x], ckr[x])).or_insert(fresh)
            })
            .collect();
        levels.push(Partition::from_labels(delta, labels));
    }
    Ok(PartitionTreeSample { alpha, diam, levels })
}

/// Points `x` with `B(x, 8^-k · diam / α) ⊆ E_k(x)` for every `k ≥ 1`.
///
/// Levels beyond `K` are all singletons with smaller radii, so a point
/// padded at level `K` (whose ball there is `{x}`) stays padded below it.
pub fn padded_points(m: &MetricSpace, sample: &PartitionTreeSample) -> PointSet {
    PointSet::new(padded_mask(m, sample).iter().enumerate().filter(|(_, &p)| p).map(|(x, _)| x).collect())
}

fn padded_mask(m: &MetricSpace, sample: &PartitionTreeSample) -> Vec<bool> {
    let n = m.len();
    (0..n)
        .map(|x| {
            let padded = (1..=sample.depth()).all(|k| sample.levels[k].pads(m, x, sample.scale(k) / sample.alpha));
            debug_assert!(
                !padded || sample.depth() == 0 || m.ball_size(x, sample.scale(sample.depth()) / sample.alpha) == 1
            );
            padded
        })
        .collect()
}

/// HST over all of `X` with `ρ(x, y) = 8^-k · diam` for the largest `k`
/// such that `E_k(x) = E_k(y)`. Internal vertices are the distinct
/// non-singleton clusters, each labelled by the deepest level it spans.
pub fn partition_tree_to_hst(sample: &PartitionTreeSample) -> LabeledTree {
    let n = sample.levels[0].cluster_of.len();
    if n == 1 {
        return LabeledTree::singleton(0);
    }
    let mut b = TreeBuilder::new();
    // Vertex owning each point's cluster at the previous level.
    let root = b.internal(None, sample.diam);
    let mut owner = vec![root; n];
    let mut finished = vec![false; n];
    for k in 1..=sample.depth() {
        let level = &sample.levels[k];
        let prev = &sample.levels[k - 1];
        let mut made = vec![usize::MAX; level.clusters.len()];
        for (c, members) in level.clusters.iter().enumerate() {
            let first = members.as_slice()[0];
            if finished[first] {
                continue;
            }
            let parent = owner[first];
            if members.len() == 1 {
                b.leaf(Some(parent), first);
                finished[first] = true;
                continue;
            }
            let same = prev.part(first).is_some_and(|p| p.len() == members.len());
            made[c] = if same { parent } else { b.internal(Some(parent), 0.0) };
        }
        for x in 0..n {
            if !finished[x] {
                let v = made[level.cluster_of[x] as usize];
                owner[x] = v;
                b.set_label(v, sample.scale(k));
            }
        }
    }
    b.finish().expect("partition hierarchy is a valid tree")
}

/// Output of [`ramsey_subset`].
#[derive(Debug, Clone, PartialEq)]
pub struct RamseySubsetResult {
    pub subset: PointSet,
    /// HST over all of `X`; dominates `d` and is within `128/ε` of `d` on
    /// pairs with one end in `subset`.
    pub tree: LabeledTree,
    pub epsilon: f64,
    pub trials_used: usize,
    /// No trial reached `|Y| >= n^(1-ε)`; the best sample was kept.
    pub target_missed: bool,
}

pub const DEFAULT_MAX_TRIALS: usize = 64;

/// Distortion guaranteed on `X × Y` by [`ramsey_subset`].
pub fn ramsey_distortion(epsilon: f64) -> f64 {
    8.0 * 16.0 / epsilon
}

/// Samples partition trees with `α = 16/ε` and keeps the one with the most
/// padded points, stopping early once `|Y| >= n^(1-ε)`.
pub fn ramsey_subset(m: &MetricSpace, epsilon: f64, seed: u64, max_trials: usize) -> Result<RamseySubsetResult> {
    if epsilon >= 1.0 {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    ramsey_search(m, epsilon, seed, max_trials).map(|(r, _)| r)
}

/// [`ramsey_subset`] plus, per point, the number of sampled trees in which
/// it was padded. Also accepts `epsilon = 1` (chains with `k = 1`).
pub(crate) fn ramsey_search(
    m: &MetricSpace,
    epsilon: f64,
    seed: u64,
    max_trials: usize,
) -> Result<(RamseySubsetResult, Vec<u32>)> {
    if !(epsilon > 0.0 && epsilon <= 1.0) {
        return Err(Error::InvalidParameter(format!("epsilon must lie in (0, 1), got {epsilon}")));
    }
    if max_trials == 0 {
        return Err(Error::InvalidParameter("max_trials must be at least 1".into()));
    }
    let n = m.len();
    let alpha = 16.0 / epsilon;
    let target = (n as f64).powf(1.0 - epsilon);
    let mut counts = vec![0u32; n];
    let mut best: Option<(usize, PartitionTreeSample)> = None;
    let mut trials = 0;
    while trials < max_trials {
        let sample = sample_partition_tree(m, alpha, derive_seed(seed, stream::TRIAL, trials as u64))?;
        trials += 1;
        let mask = padded_mask(m, &sample);
        let size = mask.iter().filter(|&&p| p).count();
        for (c, &p) in counts.iter_mut().zip(&mask) {
            *c += p as u32;
        }
        if best.as_ref().is_none_or(|(s, _)| size > *s) {
            best = Some((size, sample));
        }
        if size as f64 >= target {
            break;
        }
    }
    let (size, sample) = best.expect("at least one trial");
    let result = RamseySubsetResult {
        subset: padded_points(m, &sample),
        tree: partition_tree_to_hst(&sample),
        epsilon,
        trials_used: trials,
        target_missed: (size as f64) < target,
    };
    Ok((result, counts))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricKind;

    fn two_points() -> MetricSpace {
        MetricSpace::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap()
    }

    fn equilateral(n: usize) -> MetricSpace {
        MetricSpace::generate(MetricKind::Equilateral, n, 0).unwrap()
    }

    #[test]
    fn ckr_examples() {
        let m = two_points();
        for seed in 0..50 {
            let p = ckr_partition(&m, &PointSet::full(2), 1.0, seed).unwrap();
            assert_eq!(p.clusters().len(), 2);
        }
        let tri = equilateral(3);
        for seed in 0..50 {
            let p = ckr_partition(&tri, &PointSet::full(3), 8.0, seed).unwrap();
            assert_eq!(p.clusters(), &[PointSet::full(3)]);
        }
        assert!(ckr_partition(&m, &PointSet::full(2), 0.0, 1).is_err());
        assert!(ckr_partition(&m, &PointSet::default(), 1.0, 1).is_err());
    }

    #[test]
    fn ckr_is_bounded_partition_of_subset() {
        let m = MetricSpace::generate(MetricKind::Euclidean { dim: 2 }, 50, 3).unwrap();
        let sub = PointSet::new((0..50).step_by(3).collect());
        for seed in 0..40 {
            let delta = 0.05 + 0.02 * seed as f64;
            let p = ckr_partition(&m, &sub, delta, seed).unwrap();
            assert!(p.max_cluster_diameter(&m) <= delta);
            let mut covered: Vec<usize> = p.clusters().iter().flat_map(|c| c.iter()).collect();
            covered.sort_unstable();
            assert_eq!(covered, sub.as_slice());
            assert_eq!(p.cluster_of(1), None);
        }
    }

    #[test]
    fn padding_bound_examples() {
        let tri = equilateral(3);
        assert_eq!(padding_probability_bound(&tri, 0, 0.5, 0.5 / 8.0).unwrap(), 1.0);
        // |B(x, Δ/8)| = 1, |B(x, Δ)| = 3 at Δ = 1, t = Δ/8.
        let b = padding_probability_bound(&tri, 0, 1.0, 1.0 / 8.0).unwrap();
        assert!((b - 1.0 / 9.0).abs() < 1e-15);
        // Path 0-1-2-3-4-..., x = 0, Δ = 8: ball(1) has 2 points, ball(8) has 8.
        let rows: Vec<Vec<f64>> = (0..8).map(|i| (0..8).map(|j| (i as f64 - j as f64).abs()).collect()).collect();
        let path = MetricSpace::from_rows(rows).unwrap();
        let b = padding_probability_bound(&path, 0, 8.0, 0.5).unwrap();
        assert!((b - 0.25).abs() < 1e-15);
        assert!(padding_probability_bound(&path, 0, 8.0, 1.5).is_err());
        assert!(padding_probability_bound(&path, 0, 8.0, 0.0).is_err());
    }

    #[test]
    fn partition_tree_examples() {
        let one = MetricSpace::from_rows(vec![vec![0.0]]).unwrap();
        let s = sample_partition_tree(&one, 16.0, 0).unwrap();
        assert_eq!(s.depth(), 0);
        assert_eq!(padded_points(&one, &s), PointSet::full(1));

        let m = two_points();
        for seed in 0..20 {
            let s = sample_partition_tree(&m, 16.0, seed).unwrap();
            assert_eq!(s.depth(), 1);
            let t = partition_tree_to_hst(&s);
            assert_eq!(t.tree_distance(0, 1).unwrap(), 1.0);
            assert_eq!(t.tree_distance(1, 1).unwrap(), 0.0);
        }

        let tri = equilateral(3);
        let s = sample_partition_tree(&tri, 16.0, 5).unwrap();
        assert_eq!(padded_points(&tri, &s), PointSet::full(3));
        assert!(sample_partition_tree(&tri, 1.0, 0).is_err());
    }

    #[test]
    fn partition_tree_structure() {
        for seed in 0..10 {
            let m = MetricSpace::generate(MetricKind::Euclidean { dim: 3 }, 64, seed).unwrap();
            let s = sample_partition_tree(&m, 16.0, seed).unwrap();
            assert!(s.levels().last().unwrap().is_all_singletons());
            for k in 1..=s.depth() {
                let (fine, coarse) = (&s.levels()[k], &s.levels()[k - 1]);
                assert!(fine.max_cluster_diameter(&m) <= s.scale(k));
                for c in fine.clusters() {
                    let first = c.as_slice()[0];
                    assert!(c.iter().all(|y| coarse.same_cluster(first, y)));
                }
            }
            let t = partition_tree_to_hst(&s);
            assert!(!t.has_unary());
            for x in 0..64 {
                for y in 0..64 {
                    let rho = t.tree_distance(x, y).unwrap();
                    let shared = (0..=s.depth()).rev().find(|&k| s.levels()[k].same_cluster(x, y));
                    let expect = if x == y { 0.0 } else { s.scale(shared.unwrap()) };
                    assert_eq!(rho, expect);
                    assert!(rho >= m.d(x, y));
                }
            }
        }
    }

    #[test]
    fn ramsey_subset_guarantees() {
        let one = MetricSpace::from_rows(vec![vec![0.0]]).unwrap();
        let r = ramsey_subset(&one, 0.5, 0, 4).unwrap();
        assert_eq!(r.subset, PointSet::full(1));
        assert!(!r.target_missed);

        let tri = equilateral(3);
        let r = ramsey_subset(&tri, 0.99, 0, 8).unwrap();
        assert_eq!(r.subset, PointSet::full(3));

        for seed in 0..4 {
            let m = MetricSpace::generate(MetricKind::Graph { edge_density: 0.1 }, 48, seed).unwrap();
            let eps = 0.5;
            let r = ramsey_subset(&m, eps, seed, DEFAULT_MAX_TRIALS).unwrap();
            for x in 0..48 {
                for y in 0..48 {
                    let rho = r.tree.tree_distance(x, y).unwrap();
                    assert!(rho >= m.d(x, y));
                    if r.subset.contains(y) {
                        assert!(rho <= ramsey_distortion(eps) * m.d(x, y));
                    }
                }
            }
        }
        assert!(ramsey_subset(&tri, 1.0, 0, 8).is_err());
        assert!(ramsey_subset(&tri, 0.5, 0, 0).is_err());
    }

    #[test]
    fn deterministic() {
        let m = MetricSpace::generate(MetricKind::Euclidean { dim: 2 }, 40, 9).unwrap();
        let a = ramsey_subset(&m, 0.5, 17, 8).unwrap();
        let b = ramsey_subset(&m, 0.5, 17, 8).unwrap();
        assert_eq!(a, b);
    }
}
