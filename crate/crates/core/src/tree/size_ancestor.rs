//! Size-Ancestor: given a leaf `x` and a threshold `l`, find the ancestor
//! `u` of `x` with `ℓ(u) < l <= ℓ(parent(u))`, where `ℓ` counts leaves and
//! `ℓ(parent(root))` is taken to be infinite.
//!
//! The coarse structure answers thresholds that are multiples of a
//! granularity `m` with two LCA queries against a precomputed family
//! `F_i(j)`: for every `i` and every window `[(j-1)im+1, jim]` of leaf
//! positions, the (at most two) lowest vertices whose interval has length
//! at least `im` and meets the window. The full structure sets
//! `m = max(1, ⌊log2(n)/4⌋)` and covers the remaining `m - 1` thresholds
//! with a per-vertex bitmask of nearby ancestor sizes, a popcount table and
//! one level-ancestor jump.
//!
//! Both structures require a tree without unary vertices.

use super::{LabeledTree, TreeQueryIndex};
use crate::error::{Error, Result};

const EMPTY: u32 = u32::MAX;

fn check_no_unary(t: &LabeledTree) -> Result<()> {
    if t.has_unary() {
        return Err(Error::InvalidTree("size-ancestor input has a vertex with one child".into()));
    }
    Ok(())
}

#[derive(Debug, Clone)]
pub struct CoarseSizeAncestor {
    m: usize,
    n: usize,
    /// `offset[i]` indexes the first window of granularity `i` (1-based `i`).
    offset: Vec<usize>,
    slots: Vec<[u32; 2]>,
}

impl CoarseSizeAncestor {
    /// SORT-CHILDREN (done by the index) followed by SUBTREE-COUNT.
    pub fn build(t: &LabeledTree, idx: &TreeQueryIndex, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidParameter("granularity m must be at least 1".into()));
        }
        check_no_unary(t)?;
        let n = idx.leaf_count();
        let imax = n / m;
        let mut offset = vec![0usize; imax + 2];
        for i in 1..=imax {
            offset[i + 1] = offset[i] + n.div_ceil(i * m);
        }
        let mut slots = vec![[EMPTY; 2]; offset[imax + 1]];
        let mut add = |i: usize, j: usize, u: usize| {
            let cell = &mut slots[offset[i] + j - 1];
            if cell[0] == EMPTY {
                cell[0] = u as u32;
            } else {
                assert!(cell[1] == EMPTY, "F_{i}({j}) would exceed two vertices");
                cell[1] = u as u32;
            }
        };
        // Each vertex's entries depend only on itself and its children.
        for u in 0..idx.vertex_count() {
            let (a_u, b_u) = idx.interval(u);
            let size = |v: usize| idx.leaves_below(v);
            let kids: Vec<usize> = idx.sorted_children(u).collect();
            let first = kids.first().map_or(0, |&v| size(v) / m);
            // Ranges where u qualifies and no child does.
            for i in (first + 1..=size(u) / m).rev() {
                for j in a_u.div_ceil(i * m)..=b_u.div_ceil(i * m) {
                    add(i, j, u);
                }
            }
            // Ranges where exactly the first h children qualify: windows of
            // I_u to the right of B_{v_h}.
            for h in 0..kids.len().saturating_sub(1) {
                let b_vh = idx.right(kids[h]);
                for i in (size(kids[h + 1]) / m + 1..=size(kids[h]) / m).rev() {
                    for j in b_vh.div_ceil(i * m) + 1..=b_u.div_ceil(i * m) {
                        add(i, j, u);
                    }
                }
            }
        }
        Ok(CoarseSizeAncestor { m, n, offset, slots })
    }

    pub fn granularity(&self) -> usize {
        self.m
    }

    pub fn family(&self, i: usize, j: usize) -> impl Iterator<Item = usize> + '_ {
        self.slots[self.offset[i] + j - 1].iter().filter(|&&v| v != EMPTY).map(|&v| v as usize)
    }

    /// Number of `(i, j)` windows and of stored vertices.
    pub fn family_stats(&self) -> (usize, usize) {
        let stored = self.slots.iter().map(|c| c.iter().filter(|&&v| v != EMPTY).count()).sum();
        (self.slots.len(), stored)
    }

    /// Lowest ancestor `w` of `leaf` with `ℓ(w) >= q·m`; `None` when no
    /// vertex is that large. Requires `q >= 1`.
    pub fn least_ancestor_reaching(&self, idx: &TreeQueryIndex, leaf: usize, q: usize) -> Option<usize> {
        debug_assert!(q >= 1);
        if q > self.n / self.m {
            return None;
        }
        let threshold = q * self.m;
        let j = idx.position(leaf).div_ceil(threshold);
        let mut best: Option<usize> = None;
        for v in self.family(q, j) {
            let c = idx.lca(leaf, v);
            if idx.leaves_below(c) >= threshold && best.is_none_or(|b| idx.depth(c) > idx.depth(b)) {
                best = Some(c);
            }
        }
        debug_assert!(best.is_some(), "claim: the answer is an lca with a family member");
        best
    }

    /// Ancestor `u` of `leaf` with `ℓ(u) < l·m <= ℓ(parent(u))`.
    pub fn query(&self, idx: &TreeQueryIndex, leaf: usize, l: usize) -> Result<usize> {
        check_leaf(idx, leaf)?;
        if l * self.m <= 1 {
            return Err(Error::NoSuchAncestor);
        }
        Ok(match self.least_ancestor_reaching(idx, leaf, l) {
            None => 0,
            Some(w) => idx.child_toward(w, leaf),
        })
    }
}

fn check_leaf(idx: &TreeQueryIndex, leaf: usize) -> Result<()> {
    if leaf >= idx.vertex_count() || idx.leaves_below(leaf) != 1 || idx.sorted_children(leaf).next().is_some() {
        return Err(Error::InvalidParameter(format!("vertex {leaf} is not a leaf")));
    }
    Ok(())
}

/// Full Size-Ancestor structure.
#[derive(Debug, Clone)]
pub struct SizeAncestorIndex {
    coarse: CoarseSizeAncestor,
    mask: Vec<u32>,
    /// `enum_table[mask * (m + 1) + i] = |A ∩ {0..i-1}|`.
    enum_table: Vec<u8>,
}

impl SizeAncestorIndex {
    pub fn build(t: &LabeledTree, idx: &TreeQueryIndex) -> Result<Self> {
        let n = idx.leaf_count();
        let m = default_granularity(n);
        Self::build_with(t, idx, m)
    }

    pub fn build_with(t: &LabeledTree, idx: &TreeQueryIndex, m: usize) -> Result<Self> {
        if m > 16 {
            return Err(Error::InvalidParameter("granularity above 16 is not supported".into()));
        }
        let coarse = CoarseSizeAncestor::build(t, idx, m)?;
        let full = (1u32 << m) - 1;
        let mut mask = vec![0u32; idx.vertex_count()];
        mask[0] = 1;
        // Preorder ids: parents are visited first.
        for u in 1..idx.vertex_count() {
            let v = idx.parent(u).unwrap();
            let (lu, lv) = (idx.leaves_below(u), idx.leaves_below(v));
            mask[u] = if lv >= lu + m { 1 } else { ((mask[v] << (lv - lu)) + 1) & full };
        }
        let mut enum_table = vec![0u8; (1usize << m) * (m + 1)];
        for a in 0..(1usize << m) {
            for i in 0..=m {
                enum_table[a * (m + 1) + i] = (a & ((1usize << i) - 1)).count_ones() as u8;
            }
        }
        Ok(SizeAncestorIndex { coarse, mask, enum_table })
    }

    pub fn granularity(&self) -> usize {
        self.coarse.m
    }

    pub fn coarse(&self) -> &CoarseSizeAncestor {
        &self.coarse
    }

    /// Bitmask `#A_u` of the sizes `ℓ(u) + k`, `k < m`, realized by
    /// ancestors of `u` (including `u`).
    pub fn mask(&self, u: usize) -> u32 {
        self.mask[u]
    }

    /// Lowest ancestor of `leaf` with at least `l` leaves, `None` if `l > n`.
    fn least_ancestor_with(&self, idx: &TreeQueryIndex, leaf: usize, l: usize) -> Option<usize> {
        let m = self.coarse.m;
        let q = l / m;
        let w0 = if q * m <= 1 { leaf } else { self.coarse.least_ancestor_reaching(idx, leaf, q)? };
        let l0 = idx.leaves_below(w0);
        if l0 >= l {
            return Some(w0);
        }
        let a = self.enum_table[self.mask[w0] as usize * (m + 1) + (l - l0)] as usize;
        let d = idx.depth(w0).checked_sub(a)?;
        idx.level_ancestor(w0, d)
    }

    /// Ancestor `u` of `leaf` with `ℓ(u) < l <= ℓ(parent(u))`; the root
    /// when `l` exceeds the leaf count.
    pub fn query(&self, idx: &TreeQueryIndex, leaf: usize, l: usize) -> Result<usize> {
        check_leaf(idx, leaf)?;
        if l <= 1 {
            return Err(Error::NoSuchAncestor);
        }
        Ok(match self.least_ancestor_with(idx, leaf, l) {
            None => 0,
            Some(w) => idx.child_toward(w, leaf),
        })
    }
}

/// `max(1, ⌊log2(n)/4⌋)`.
pub fn default_granularity(n: usize) -> usize {
    let log2 = if n <= 1 { 0 } else { (usize::BITS - 1 - n.leading_zeros()) as usize };
    (log2 / 4).max(1)
}
