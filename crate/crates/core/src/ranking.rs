//! Approximate ranking: for each point `x` an implicit permutation
//! `π^(x)` of `X` that lists points in roughly non-decreasing distance from
//! `x`, with constant-work access in both directions.
//!
//! `π^(x)` comes from the binarized extended tree `T = T_{i_x}`: position 1
//! is `x`, then, walking from `x` to the root, each sibling subtree's leaves
//! follow in leaf order. Positions `ℓ(v)+1 ..= ℓ(parent(v))` hold the leaves
//! of the sibling of `v`, which is what both queries exploit.

use crate::chain::{self, ChainMode, RamseyChain};
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::oracle::{check_array, join_u32};
use crate::partition::DEFAULT_MAX_TRIALS;
use crate::textio::Lines;
use crate::tree::{SizeAncestorIndex, TreeQueryIndex};

#[derive(Debug, Clone)]
pub struct RankingIndex {
    chain: RamseyChain,
    level_of: Vec<u32>,
    /// `leafref[x * s + j]`: leaf of `x` in `T_{j+1}`.
    leafref: Vec<u32>,
    indices: Vec<TreeQueryIndex>,
    size_ancestor: Vec<SizeAncestorIndex>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RankingStats {
    pub n: usize,
    pub levels: usize,
    /// `s · n`.
    pub storage_leaves: usize,
    pub index_words: usize,
}

/// Worst `d(x, π(i)) / d(x, π(j))` over `i < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct RankingQuality {
    pub max_ratio: f64,
    pub bound: f64,
    pub violations: usize,
}

pub fn build_ranking(m: &MetricSpace, k: f64, seed: u64) -> Result<RankingIndex> {
    if k.is_nan() || k <= 1.0 {
        return Err(Error::InvalidParameter(format!("ranking needs k > 1, got {k}")));
    }
    let chain = chain::build_chain(m, k, seed, ChainMode::Extended, DEFAULT_MAX_TRIALS)?;
    RankingIndex::from_chain(chain)
}

impl RankingIndex {
    /// Binarizes every tree of an extended-mode chain and builds the tables.
    pub fn from_chain(mut chain: RamseyChain) -> Result<Self> {
        if chain.mode() != ChainMode::Extended {
            return Err(Error::InvalidParameter("ranking needs an extended-mode chain".into()));
        }
        chain.map_trees(|t| t.binarize());
        let n = chain.point_count();
        let s = chain.len();
        let level_of = chain.level_of().into_iter().map(|j| j as u32).collect();
        let mut leafref = vec![0u32; n * s];
        let mut indices = Vec::with_capacity(s);
        let mut size_ancestor = Vec::with_capacity(s);
        for (j, level) in chain.levels().iter().enumerate() {
            for x in 0..n {
                leafref[x * s + j] = level.tree.leaf_of(x).expect("extended trees span X") as u32;
            }
            let idx = TreeQueryIndex::new(&level.tree);
            size_ancestor.push(SizeAncestorIndex::build(&level.tree, &idx)?);
            indices.push(idx);
        }
        Ok(RankingIndex { chain, level_of, leafref, indices, size_ancestor })
    }

    pub fn chain(&self) -> &RamseyChain {
        &self.chain
    }

    pub fn point_count(&self) -> usize {
        self.level_of.len()
    }

    pub fn level_of(&self, x: usize) -> usize {
        self.level_of[x] as usize
    }

    fn tree_for(&self, x: usize) -> Result<(usize, usize)> {
        if x >= self.point_count() {
            return Err(Error::UnknownPoint(x));
        }
        let j = self.level_of[x] as usize - 1;
        Ok((j, self.leafref[x * self.chain.len() + j] as usize))
    }

    /// `π^(x)(i)` for `1 <= i <= n`.
    pub fn rank_access(&self, x: usize, i: usize) -> Result<usize> {
        let (j, leaf) = self.tree_for(x)?;
        let n = self.point_count();
        if i == 0 || i > n {
            return Err(Error::PositionOutOfRange { pos: i, n });
        }
        if i == 1 {
            return Ok(x);
        }
        let idx = &self.indices[j];
        let v = self.size_ancestor[j].query(idx, leaf, i)?;
        let u = idx.parent(v).expect("i <= n keeps v below the root");
        let w = idx.sorted_children(u).find(|&c| c != v).expect("binary tree");
        let pos = i - idx.leaves_below(v) + idx.left(w) - 1;
        let tree = &self.chain.levels()[j].tree;
        Ok(tree.point_of(idx.leaf_at(pos)).expect("positions index leaves"))
    }

    /// The position of `y` in `π^(x)`.
    pub fn rank_of(&self, x: usize, y: usize) -> Result<usize> {
        let (j, lx) = self.tree_for(x)?;
        if y >= self.point_count() {
            return Err(Error::UnknownPoint(y));
        }
        if x == y {
            return Ok(1);
        }
        let ly = self.leafref[y * self.chain.len() + j] as usize;
        let idx = &self.indices[j];
        let u = idx.lca(lx, ly);
        let v = idx.child_toward(u, lx);
        let w = idx.child_toward(u, ly);
        Ok(idx.leaves_below(v) + idx.position(ly) - idx.left(w) + 1)
    }

    /// `π^(x)` in full, by repeated [`rank_access`](Self::rank_access).
    pub fn permutation(&self, x: usize) -> Result<Vec<usize>> {
        (1..=self.point_count()).map(|i| self.rank_access(x, i)).collect()
    }

    pub fn stats(&self) -> RankingStats {
        RankingStats {
            n: self.point_count(),
            levels: self.chain.len(),
            storage_leaves: self.chain.storage_leaves(),
            index_words: self.indices.iter().map(TreeQueryIndex::storage_words).sum::<usize>()
                + self.leafref.len()
                + self.level_of.len(),
        }
    }

    /// Scans every `π^(x)` and compares each distance with the largest
    /// distance earlier in the permutation.
    pub fn quality(&self, m: &MetricSpace) -> Result<RankingQuality> {
        let bound = self.chain.distortion();
        let mut max_ratio = 0.0f64;
        let mut violations = 0;
        for x in 0..self.point_count() {
            let mut running = 0.0f64;
            for i in 2..=self.point_count() {
                let d = m.d(x, self.rank_access(x, i)?);
                if running > 0.0 {
                    let r = running / d;
                    max_ratio = max_ratio.max(r);
                    if r > bound * (1.0 + 1e-9) {
                        violations += 1;
                    }
                }
                running = running.max(d);
            }
        }
        Ok(RankingQuality { max_ratio, bound, violations })
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("ranking\n");
        s.push_str(&self.chain.to_text());
        s.push_str(&format!("level_of {}\n", join_u32(&self.level_of)));
        s.push_str(&format!("leafref {}\n", join_u32(&self.leafref)));
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        lines.keyed("ranking")?;
        let chain = RamseyChain::read(&mut lines)?;
        if chain.levels().iter().any(|l| l.tree.has_unary() || !l.tree.is_binary()) {
            return Err(Error::Parse { line: 1, msg: "ranking trees must be binary".into() });
        }
        let r = RankingIndex::from_chain(chain)?;
        check_array(&mut lines, "level_of", &r.level_of)?;
        check_array(&mut lines, "leafref", &r.leafref)?;
        lines.finish()?;
        Ok(r)
    }
}
