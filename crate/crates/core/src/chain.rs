//! Ultrametric extension and stochastic Ramsey chains.
//!
//! A chain peels `X = X_0 ⊋ X_1 ⊋ ... ⊋ X_s = ∅` by repeatedly taking a
//! Ramsey subset `Y_j` of the survivors `X_{j-1}` with `ε = 1/k`. Level `j`
//! keeps the HST built on `X_{j-1}` (restricted mode) or its extension to
//! all of `X` (extended mode).

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::metric::{MetricSpace, PointSet};
use crate::partition::{self, DEFAULT_MAX_TRIALS};
use crate::rng::{derive_seed, stream};
use crate::textio::{self, Lines};
use crate::tree::{LabeledTree, TreeBuilder};

/// Factor lost by [`extend_ultrametric`].
pub const EXTENSION_FACTOR: f64 = 6.0;

/// Extends an ultrametric on `Y` (the points of `t`) to all of `X`.
///
/// Each `x ∉ Y`, in increasing order, hangs off its nearest `y ∈ Y` (ties to
/// the lowest index): with `d = d(x, y)` and `u` the least ancestor of `y`
/// with `Δ(u) >= d`, `x` becomes a child of `u` when `Δ(u) = d`, and
/// otherwise of a new vertex labelled `d` spliced just below `u` (above the
/// root when no such `u` exists). All labels are then tripled.
///
/// If `d <= ρ <= α·d` on `Y × Y`, the result satisfies `d <= ρ̃` on `X × X`
/// and `ρ̃ <= 6α·d` on `X × Y`, and equals `3ρ` on `Y × Y`.
pub fn extend_ultrametric(m: &MetricSpace, t: &LabeledTree, alpha: f64) -> Result<LabeledTree> {
    if alpha.is_nan() || alpha < 1.0 {
        return Err(Error::InvalidParameter(format!("alpha must be at least 1, got {alpha}")));
    }
    let ys = t.points();
    if let Some(bad) = ys.iter().find(|&p| p >= m.len()) {
        return Err(Error::UnknownPoint(bad));
    }
    let mut parent = t.parent_vec();
    let mut label = t.labels().to_vec();
    let mut leaves = t.leaf_pairs();
    for x in 0..m.len() {
        if ys.contains(x) {
            continue;
        }
        let (y, d) = m.nearest_in(x, ys).expect("trees have at least one leaf");
        let mut v = t.leaf_of(y).expect("y is a point of t");
        let mut u = parent[v];
        while let Some(a) = u {
            if label[a] >= d {
                break;
            }
            v = a;
            u = parent[a];
        }
        let attach = match u {
            Some(a) if label[a] == d => a,
            _ => {
                let w = parent.len();
                parent.push(u);
                label.push(d);
                parent[v] = Some(w);
                w
            }
        };
        leaves.push((parent.len(), x));
        parent.push(Some(attach));
        label.push(0.0);
    }
    for l in &mut label {
        *l *= 3.0;
    }
    LabeledTree::new(&parent, &label, &leaves)
}

/// Caterpillar around `center`: the other points, sorted by distance `r`
/// to `center`, join one by one at vertices labelled `2r`. Dominates `d`
/// and is exactly `2d` on pairs containing `center`.
fn caterpillar(m: &MetricSpace, center: usize) -> LabeledTree {
    let mut others: Vec<usize> = (0..m.len()).filter(|&x| x != center).collect();
    others.sort_by(|&a, &b| m.d(center, a).total_cmp(&m.d(center, b)).then(a.cmp(&b)));
    let mut b = TreeBuilder::new();
    let mut top = b.leaf(None, center);
    for x in others {
        let v = b.internal(None, 2.0 * m.d(center, x));
        b.set_parent(top, Some(v));
        b.leaf(Some(v), x);
        top = v;
    }
    b.finish().expect("caterpillar is a valid tree")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ChainMode {
    /// `tree_j` spans `X_{j-1}`.
    Restricted,
    /// `tree_j` spans `X`.
    Extended,
}

impl fmt::Display for ChainMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ChainMode::Restricted => "restricted",
            ChainMode::Extended => "extended",
        })
    }
}

impl FromStr for ChainMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "restricted" => Ok(ChainMode::Restricted),
            "extended" => Ok(ChainMode::Extended),
            _ => Err(Error::InvalidParameter(format!("unknown chain mode `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainLevel {
    /// `Y_j`.
    pub subset: PointSet,
    /// `X_{j-1}`.
    pub domain: PointSet,
    pub tree: LabeledTree,
    /// No sampled tree on `X_{j-1}` padded any point; `Y_j` is a single
    /// point and `tree` a caterpillar around it.
    pub fallback: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RamseyChain {
    k: f64,
    n: usize,
    mode: ChainMode,
    levels: Vec<ChainLevel>,
}

/// Distortion guaranteed on `X_{j-1} × Y_j` by restricted-mode trees.
pub fn restricted_distortion(k: f64) -> f64 {
    partition::ramsey_distortion(1.0 / k)
}

/// Distortion guaranteed on `X × Y_j` by extended-mode trees.
pub fn extended_distortion(k: f64) -> f64 {
    EXTENSION_FACTOR * restricted_distortion(k)
}

pub fn build_chain(m: &MetricSpace, k: f64, seed: u64, mode: ChainMode, max_trials: usize) -> Result<RamseyChain> {
    build(m, k, seed, mode, max_trials, false)
}

/// Chain that takes the single-point fallback at every level, giving
/// `s = n`. Exercises the multi-level query paths, which genuine chains
/// on small inputs rarely reach.
pub(crate) fn build_peeling_chain(m: &MetricSpace, k: f64, seed: u64, mode: ChainMode) -> Result<RamseyChain> {
    build(m, k, seed, mode, 1, true)
}

fn build(m: &MetricSpace, k: f64, seed: u64, mode: ChainMode, max_trials: usize, peel: bool) -> Result<RamseyChain> {
    if !(k >= 1.0 && k.is_finite()) {
        return Err(Error::InvalidParameter(format!("k must be at least 1, got {k}")));
    }
    let n = m.len();
    let mut levels = Vec::new();
    let mut domain = PointSet::full(n);
    while !domain.is_empty() {
        let j = levels.len() + 1;
        let sub = m.restrict(&domain)?;
        let (found, counts) =
            partition::ramsey_search(&sub, 1.0 / k, derive_seed(seed, stream::LEVEL, j as u64), max_trials)?;
        let names = domain.as_slice();
        let (local_y, local_tree, fallback) = if peel || found.subset.is_empty() {
            let best = (0..sub.len()).max_by(|&a, &b| counts[a].cmp(&counts[b]).then(b.cmp(&a))).unwrap();
            (PointSet::singleton(best), caterpillar(&sub, best), true)
        } else {
            (found.subset, found.tree, false)
        };
        let subset = PointSet::new(local_y.iter().map(|p| names[p]).collect());
        let mut tree = local_tree.rename_points(names)?;
        if mode == ChainMode::Extended {
            tree = extend_ultrametric(m, &tree, restricted_distortion(k))?;
        }
        let rest = domain.difference(&subset);
        levels.push(ChainLevel { subset, domain, tree, fallback });
        domain = rest;
    }
    Ok(RamseyChain { k, n, mode, levels })
}

pub fn build_chain_default(m: &MetricSpace, k: f64, seed: u64, mode: ChainMode) -> Result<RamseyChain> {
    build_chain(m, k, seed, mode, DEFAULT_MAX_TRIALS)
}

impl RamseyChain {
    pub fn k(&self) -> f64 {
        self.k
    }

    pub fn point_count(&self) -> usize {
        self.n
    }

    pub fn mode(&self) -> ChainMode {
        self.mode
    }

    pub fn levels(&self) -> &[ChainLevel] {
        &self.levels
    }

    /// `s`.
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    /// Replaces every tree; the caller keeps the point sets intact.
    pub(crate) fn map_trees(&mut self, mut f: impl FnMut(&LabeledTree) -> LabeledTree) {
        for l in &mut self.levels {
            l.tree = f(&l.tree);
        }
    }

    /// Distortion bound for this chain's mode.
    pub fn distortion(&self) -> f64 {
        match self.mode {
            ChainMode::Restricted => restricted_distortion(self.k),
            ChainMode::Extended => extended_distortion(self.k),
        }
    }

    /// `i_x` per point: the level `j` (1-based) with `x ∈ Y_j`.
    pub fn level_of(&self) -> Vec<usize> {
        let mut out = vec![0; self.n];
        for (j, l) in self.levels.iter().enumerate() {
            for y in l.subset.iter() {
                out[y] = j + 1;
            }
        }
        out
    }

    /// Total leaf count over all stored trees.
    pub fn storage_leaves(&self) -> usize {
        self.levels.iter().map(|l| l.tree.leaf_count()).sum()
    }

    pub fn to_text(&self) -> String {
        let mut s = format!("chain {} {} {} {}\n", self.mode, textio::fmt_f64(self.k), self.n, self.levels.len());
        for l in &self.levels {
            s.push_str(&format!("level {}\n", l.fallback as u8));
            s.push_str(&format!("subset {}\n", textio::join_usize(l.subset.as_slice())));
            s.push_str(&format!("domain {}\n", textio::join_usize(l.domain.as_slice())));
            s.push_str(&l.tree.to_text());
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let c = Self::read(&mut lines)?;
        lines.finish()?;
        Ok(c)
    }

    pub(crate) fn read(lines: &mut Lines<'_>) -> Result<Self> {
        let (no, toks) = lines.keyed("chain")?;
        textio::expect_len(&toks, 4, no, "chain header")?;
        let bad = |msg: String| Error::Parse { line: no, msg };
        let mode: ChainMode = toks[0].parse().map_err(|e: Error| bad(e.to_string()))?;
        let k: f64 = textio::parse_tok(toks[1], no)?;
        let n: usize = textio::parse_tok(toks[2], no)?;
        let s: usize = textio::parse_tok(toks[3], no)?;
        let mut levels = Vec::with_capacity(s);
        for _ in 0..s {
            let (no, toks) = lines.keyed("level")?;
            textio::expect_len(&toks, 1, no, "level header")?;
            let fallback = textio::parse_tok::<u8>(toks[0], no)? != 0;
            let mut set = |key: &str| -> Result<PointSet> {
                let (no, toks) = lines.keyed(key)?;
                PointSet::from_sorted(textio::parse_all(&toks, no)?)
                    .map_err(|e| Error::Parse { line: no, msg: e.to_string() })
            };
            let subset = set("subset")?;
            let domain = set("domain")?;
            let tree = LabeledTree::read(lines)?;
            levels.push(ChainLevel { subset, domain, tree, fallback });
        }
        let chain = RamseyChain { k, n, mode, levels };
        chain.validate().map_err(|e| bad(e.to_string()))?;
        Ok(chain)
    }

    /// Structural invariants: the `Y_j` partition `X`, `X_j = X_{j-1} \ Y_j`,
    /// and each tree spans the right point set.
    pub fn validate(&self) -> Result<()> {
        let err = |m: String| Err(Error::InvalidParameter(m));
        let mut domain = PointSet::full(self.n);
        for (j, l) in self.levels.iter().enumerate() {
            if l.domain != domain {
                return err(format!("level {}: domain is not the survivor set", j + 1));
            }
            if l.subset.is_empty() || !l.subset.is_subset(&domain) {
                return err(format!("level {}: subset is empty or outside the domain", j + 1));
            }
            let span = match self.mode {
                ChainMode::Restricted => &domain,
                ChainMode::Extended => &PointSet::full(self.n),
            };
            if l.tree.points() != span {
                return err(format!("level {}: tree spans the wrong points", j + 1));
            }
            domain = domain.difference(&l.subset);
        }
        if !domain.is_empty() {
            return err("chain does not exhaust the points".into());
        }
        Ok(())
    }
}

/// Observed `Σ_{j<s} |X_j|^p` and the bound `max(k/(1+pk), 1)·n^(p+1/k)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainMoments {
    pub p: f64,
    pub observed: f64,
    pub bound: f64,
}

pub fn moment_bound(n: usize, k: f64, p: f64) -> f64 {
    (k / (1.0 + p * k)).max(1.0) * (n as f64).powf(p + 1.0 / k)
}

pub fn chain_moment_stat(chain: &RamseyChain, p: f64) -> Result<ChainMoments> {
    if p.is_nan() || p <= -1.0 / chain.k {
        return Err(Error::InvalidParameter(format!("p must exceed -1/k, got {p}")));
    }
    let observed = chain.levels.iter().map(|l| (l.domain.len() as f64).powf(p)).sum();
    Ok(ChainMoments { p, observed, bound: moment_bound(chain.n, chain.k, p) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricKind;

    fn rows(r: Vec<Vec<f64>>) -> MetricSpace {
        MetricSpace::from_rows(r).unwrap()
    }

    #[test]
    fn extension_example() {
        // d(a,b)=2, d(a,c)=1, d(b,c)=2; tree on {a,b} with ρ(a,b)=2.
        let m = rows(vec![vec![0.0, 2.0, 1.0], vec![2.0, 0.0, 2.0], vec![1.0, 2.0, 0.0]]);
        let t = LabeledTree::build(&[None, Some(0), Some(0)], &[2.0, 0.0, 0.0], &PointSet::full(2)).unwrap();
        let e = extend_ultrametric(&m, &t, 1.0).unwrap();
        assert_eq!(e.tree_distance(0, 1).unwrap(), 6.0);
        assert_eq!(e.tree_distance(0, 2).unwrap(), 3.0);
        assert_eq!(e.tree_distance(1, 2).unwrap(), 6.0);
        assert_eq!(extend_ultrametric(&m, &t, 1.0).unwrap(), e);
        assert!(extend_ultrametric(&m, &t, 0.5).is_err());
    }

    #[test]
    fn extension_of_full_set_triples() {
        let m = MetricSpace::generate(MetricKind::Euclidean { dim: 2 }, 20, 4).unwrap();
        let t = crate::tree::mst_ultrametric(&m);
        let e = extend_ultrametric(&m, &t, 19.0).unwrap();
        assert_eq!(e, t.scaled(3.0));
    }

    #[test]
    fn extension_splices_above_root() {
        // Y = {0, 1} close together, x = 2 far away.
        let m = rows(vec![vec![0.0, 1.0, 10.0], vec![1.0, 0.0, 10.5], vec![10.0, 10.5, 0.0]]);
        let t = LabeledTree::build(&[None, Some(0), Some(0)], &[1.0, 0.0, 0.0], &PointSet::full(2)).unwrap();
        let e = extend_ultrametric(&m, &t, 1.0).unwrap();
        assert_eq!(e.tree_distance(0, 2).unwrap(), 30.0);
        assert_eq!(e.tree_distance(1, 2).unwrap(), 30.0);
        assert_eq!(e.tree_distance(0, 1).unwrap(), 3.0);
    }

    #[test]
    fn caterpillar_bounds() {
        let m = MetricSpace::generate(MetricKind::Graph { edge_density: 0.2 }, 30, 2).unwrap();
        let t = caterpillar(&m, 7);
        for x in 0..30 {
            for y in 0..30 {
                let r = t.tree_distance(x, y).unwrap();
                assert!(r >= m.d(x, y));
                if y == 7 {
                    assert_eq!(r, 2.0 * m.d(x, y));
                }
            }
        }
    }

    #[test]
    fn chain_small_cases() {
        let one = rows(vec![vec![0.0]]);
        let c = build_chain_default(&one, 2.0, 0, ChainMode::Restricted).unwrap();
        assert_eq!(c.len(), 1);
        assert_eq!(c.levels()[0].subset, PointSet::full(1));
        let mo = chain_moment_stat(&c, 0.5).unwrap();
        assert_eq!(mo.observed, 1.0);
        assert!(mo.observed <= mo.bound);
        assert!(chain_moment_stat(&c, -0.5).is_err());
        assert!(build_chain_default(&one, 0.5, 0, ChainMode::Restricted).is_err());
    }

    #[test]
    fn peeling_chain_takes_one_point_per_level() {
        let m = MetricSpace::generate(MetricKind::Graph { edge_density: 0.2 }, 20, 4).unwrap();
        for mode in [ChainMode::Restricted, ChainMode::Extended] {
            let c = build_peeling_chain(&m, 2.0, 1, mode).unwrap();
            c.validate().unwrap();
            assert_eq!(c.len(), 20);
            assert!(c.levels().iter().all(|l| l.fallback && l.subset.len() == 1));
            assert_eq!(c.storage_leaves(), if mode == ChainMode::Restricted { 210 } else { 400 });
        }
    }

    #[test]
    fn moment_bound_examples() {
        assert_eq!(moment_bound(64, 2.0, 0.0), 2.0 * 8.0);
        assert_eq!(moment_bound(64, 2.0, 1.0), 64.0 * 8.0);
    }

    #[test]
    fn chain_invariants_both_modes() {
        for seed in 0..3 {
            let m = MetricSpace::generate(MetricKind::Euclidean { dim: 2 }, 48, seed).unwrap();
            for mode in [ChainMode::Restricted, ChainMode::Extended] {
                for k in [1.0, 2.0, 3.0] {
                    let c = build_chain_default(&m, k, seed, mode).unwrap();
                    c.validate().unwrap();
                    let bound = c.distortion() * (1.0 + 1e-9);
                    for l in c.levels() {
                        for x in l.tree.points().iter() {
                            for y in l.tree.points().iter() {
                                let r = l.tree.tree_distance(x, y).unwrap();
                                assert!(r >= m.d(x, y));
                                if l.subset.contains(y) {
                                    assert!(r <= bound * m.d(x, y));
                                }
                            }
                        }
                    }
                    let back = RamseyChain::parse(&c.to_text()).unwrap();
                    assert_eq!(back, c);
                }
            }
        }
    }
}
