//! Approximate distance oracle over a restricted-mode Ramsey chain.
//!
//! Point `x` lies in `Y_{i_x}` and in every `X_{j-1}` with `j <= i_x`, so it
//! has a leaf in `T_1..T_{i_x}`. A query takes `j = min(i_x, i_y)` and
//! returns the label of the LCA of the two leaves in `T_j`.

use std::sync::atomic::{AtomicU32, Ordering};

use crate::chain::{self, ChainMode, RamseyChain};
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::partition::DEFAULT_MAX_TRIALS;
use crate::textio::{self, Lines};
use crate::tree::TreeQueryIndex;

/// Upper bound on table reads per query: two level lookups, two leaf
/// references, one LCA (7 cells) and one label.
pub const QUERY_ACCESS_BOUND: u32 = 12;

#[derive(Debug)]
pub struct OracleIndex {
    chain: RamseyChain,
    level_of: Vec<u32>,
    leaf_start: Vec<u32>,
    leafref: Vec<u32>,
    indices: Vec<TreeQueryIndex>,
    max_accesses: AtomicU32,
}

impl Clone for OracleIndex {
    fn clone(&self) -> Self {
        OracleIndex {
            chain: self.chain.clone(),
            level_of: self.level_of.clone(),
            leaf_start: self.leaf_start.clone(),
            leafref: self.leafref.clone(),
            indices: self.indices.clone(),
            max_accesses: AtomicU32::new(self.max_accesses.load(Ordering::Relaxed)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct OracleStats {
    pub n: usize,
    pub levels: usize,
    /// `Σ_j |X_{j-1}|`.
    pub storage_leaves: usize,
    pub index_words: usize,
    /// Largest access count seen by any counted query so far.
    pub max_accesses: u32,
    pub distortion_bound: f64,
}

pub fn build_oracle(m: &MetricSpace, k: f64, seed: u64) -> Result<OracleIndex> {
    if k.is_nan() || k <= 1.0 {
        return Err(Error::InvalidParameter(format!("oracle needs k > 1, got {k}")));
    }
    OracleIndex::from_chain(chain::build_chain(m, k, seed, ChainMode::Restricted, DEFAULT_MAX_TRIALS)?)
}

impl OracleIndex {
    pub fn from_chain(chain: RamseyChain) -> Result<Self> {
        if chain.mode() != ChainMode::Restricted {
            return Err(Error::InvalidParameter("oracle needs a restricted-mode chain".into()));
        }
        let n = chain.point_count();
        let level_of: Vec<u32> = chain.level_of().into_iter().map(|j| j as u32).collect();
        let mut leaf_start = vec![0u32; n + 1];
        for x in 0..n {
            leaf_start[x + 1] = leaf_start[x] + level_of[x];
        }
        let mut leafref = vec![0u32; leaf_start[n] as usize];
        for (j, level) in chain.levels().iter().enumerate() {
            for x in level.domain.iter() {
                let v = level.tree.leaf_of(x).expect("tree spans its domain");
                leafref[leaf_start[x] as usize + j] = v as u32;
            }
        }
        let indices = chain.levels().iter().map(|l| TreeQueryIndex::new(&l.tree)).collect();
        Ok(OracleIndex { chain, level_of, leaf_start, leafref, indices, max_accesses: AtomicU32::new(0) })
    }

    pub fn chain(&self) -> &RamseyChain {
        &self.chain
    }

    pub fn point_count(&self) -> usize {
        self.level_of.len()
    }

    /// `i_x`.
    pub fn level_of(&self, x: usize) -> usize {
        self.level_of[x] as usize
    }

    /// Leaf of `x` in `T_j`, for `1 <= j <= i_x`.
    pub fn leaf_ref(&self, x: usize, j: usize) -> Option<usize> {
        let (a, b) = (self.leaf_start[x] as usize, self.leaf_start[x + 1] as usize);
        (j >= 1 && a + j <= b).then(|| self.leafref[a + j - 1] as usize)
    }

    pub fn query(&self, x: usize, y: usize) -> Result<f64> {
        self.query_counted(x, y).map(|(d, _)| d)
    }

    /// Estimate plus the number of table reads it took.
    pub fn query_counted(&self, x: usize, y: usize) -> Result<(f64, u32)> {
        let n = self.point_count();
        for p in [x, y] {
            if p >= n {
                return Err(Error::UnknownPoint(p));
            }
        }
        if x == y {
            return Ok((0.0, 0));
        }
        let (ix, iy) = (self.level_of[x] as usize, self.level_of[y] as usize);
        let j = ix.min(iy);
        let lx = self.leafref[self.leaf_start[x] as usize + j - 1] as usize;
        let ly = self.leafref[self.leaf_start[y] as usize + j - 1] as usize;
        let (u, cost) = self.indices[j - 1].lca_with_cost(lx, ly);
        let value = self.chain.levels()[j - 1].tree.label(u);
        let accesses = 2 + 2 + cost + 1;
        self.max_accesses.fetch_max(accesses, Ordering::Relaxed);
        Ok((value, accesses))
    }

    pub fn stats(&self) -> OracleStats {
        OracleStats {
            n: self.point_count(),
            levels: self.chain.len(),
            storage_leaves: self.chain.storage_leaves(),
            index_words: self.indices.iter().map(TreeQueryIndex::storage_words).sum::<usize>()
                + self.leafref.len()
                + self.level_of.len()
                + self.leaf_start.len(),
            max_accesses: self.max_accesses.load(Ordering::Relaxed),
            distortion_bound: self.chain.distortion(),
        }
    }

    pub fn to_text(&self) -> String {
        let mut s = String::from("oracle\n");
        s.push_str(&self.chain.to_text());
        s.push_str(&format!("level_of {}\n", join_u32(&self.level_of)));
        s.push_str(&format!("leafref {}\n", join_u32(&self.leafref)));
        s
    }

    /// Parses the chain and rebuilds the tables; the stored `level_of` and
    /// `leafref` arrays must match the rebuilt ones.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        lines.keyed("oracle")?;
        let chain = RamseyChain::read(&mut lines)?;
        let o = OracleIndex::from_chain(chain)?;
        check_array(&mut lines, "level_of", &o.level_of)?;
        check_array(&mut lines, "leafref", &o.leafref)?;
        lines.finish()?;
        Ok(o)
    }
}

pub(crate) fn join_u32(xs: &[u32]) -> String {
    textio::join_usize(&xs.iter().map(|&x| x as usize).collect::<Vec<_>>())
}

pub(crate) fn check_array(lines: &mut Lines<'_>, key: &str, expect: &[u32]) -> Result<()> {
    let (no, toks) = lines.keyed(key)?;
    let got: Vec<u32> = textio::parse_all(&toks, no)?;
    if got != expect {
        return Err(Error::Parse { line: no, msg: format!("`{key}` does not match the stored chain") });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::MetricKind;

    #[test]
    fn tiny_cases() {
        let one = MetricSpace::from_rows(vec![vec![0.0]]).unwrap();
        let o = build_oracle(&one, 2.0, 0).unwrap();
        assert_eq!(o.query(0, 0).unwrap(), 0.0);
        assert_eq!(o.stats().storage_leaves, 1);
        assert_eq!(o.stats().levels, 1);

        let two = MetricSpace::from_rows(vec![vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let o = build_oracle(&two, 2.0, 3).unwrap();
        assert_eq!(o.query(0, 1).unwrap(), 1.0);
        assert_eq!(o.query(1, 0).unwrap(), 1.0);
        assert!(o.level_of(0) >= 1 && o.level_of(0) <= 2);
        assert!(o.query(0, 2).is_err());
        assert!(build_oracle(&two, 1.0, 0).is_err());
    }

    #[test]
    fn all_pairs_within_bound() {
        let m = MetricSpace::generate(MetricKind::Euclidean { dim: 2 }, 80, 5).unwrap();
        for k in [2.0, 3.0] {
            let o = build_oracle(&m, k, 11).unwrap();
            for x in 0..80 {
                assert_eq!(o.leaf_ref(x, o.level_of(x) + 1), None);
                for y in 0..80 {
                    let (e, c) = o.query_counted(x, y).unwrap();
                    assert!(e >= m.d(x, y) && e <= 128.0 * k * m.d(x, y) * (1.0 + 1e-9));
                    assert!(c <= QUERY_ACCESS_BOUND);
                    assert_eq!(e, o.query(y, x).unwrap());
                }
            }
            assert_eq!(o.stats().max_accesses, QUERY_ACCESS_BOUND);
            let back = OracleIndex::parse(&o.to_text()).unwrap();
            assert_eq!(back.to_text(), o.to_text());
        }
    }
}
