//! Constant-work query tables over a [`LabeledTree`].
//!
//! * LCA: Euler tour plus a sparse table of depth minima. A query reads a
//!   fixed number of table cells; [`TreeQueryIndex::lca_with_cost`] reports
//!   exactly how many.
//! * Level ancestor: power-of-two jump tables, `O(log n)` jumps per query.
//! * Leaf order: children sorted by non-increasing leaf count (bucket sort,
//!   stable in stored order), leaves numbered `1..=L` by a DFS in that order.
//!   Every vertex then owns the interval `[A_v, B_v]` of its leaves.

use super::LabeledTree;

#[derive(Debug, Clone)]
pub struct TreeQueryIndex {
    parent: Vec<u32>,
    depth: Vec<u32>,
    leaves_below: Vec<u32>,
    sorted_start: Vec<u32>,
    sorted_children: Vec<u32>,
    // 1-based positions; slot 0 unused.
    leaf_at: Vec<u32>,
    lo: Vec<u32>,
    hi: Vec<u32>,
    first: Vec<u32>,
    sparse: Vec<Vec<u32>>,
    log2: Vec<u8>,
    jump: Vec<Vec<u32>>,
}

const NIL: u32 = u32::MAX;

impl TreeQueryIndex {
    pub fn new(t: &LabeledTree) -> Self {
        let v_count = t.vertex_count();
        assert!(v_count < NIL as usize, "tree too large for 32-bit indices");
        let mut parent = vec![NIL; v_count];
        let mut depth = vec![0u32; v_count];
        for v in 1..v_count {
            let p = t.parent[v];
            parent[v] = p as u32;
            depth[v] = depth[p] + 1;
        }
        let mut leaves_below = vec![0u32; v_count];
        for v in (0..v_count).rev() {
            if t.is_leaf(v) {
                leaves_below[v] = 1;
            }
            if v > 0 {
                leaves_below[t.parent[v]] += leaves_below[v];
            }
        }

        // SORT-CHILDREN: bucket sort all vertices by leaf count, then append
        // each vertex to its parent's list in non-increasing order.
        let max_l = leaves_below[0] as usize;
        let mut buckets: Vec<Vec<u32>> = vec![Vec::new(); max_l + 1];
        for v in 1..v_count {
            buckets[leaves_below[v] as usize].push(v as u32);
        }
        let mut count = vec![0u32; v_count + 1];
        for v in 1..v_count {
            count[t.parent[v] + 1] += 1;
        }
        for i in 0..v_count {
            count[i + 1] += count[i];
        }
        let sorted_start = count.clone();
        let mut fill = count;
        let mut sorted_children = vec![0u32; v_count.saturating_sub(1)];
        for bucket in buckets.iter().rev() {
            for &v in bucket {
                let p = parent[v as usize] as usize;
                sorted_children[fill[p] as usize] = v;
                fill[p] += 1;
            }
        }

        // DFS in sorted order: leaf positions, intervals and the Euler tour.
        let n_leaves = max_l;
        let mut leaf_at = vec![NIL; n_leaves + 1];
        let mut lo = vec![0u32; v_count];
        let mut hi = vec![0u32; v_count];
        let mut first = vec![0u32; v_count];
        let mut tour: Vec<u32> = Vec::with_capacity(2 * v_count);
        let mut next_pos = 1u32;
        // (vertex, next child slot)
        let mut stack: Vec<(u32, u32)> = vec![(0, sorted_start[0])];
        first[0] = 0;
        tour.push(0);
        while let Some(top) = stack.last_mut() {
            let v = top.0 as usize;
            if top.1 == sorted_start[v] && sorted_start[v] == sorted_start[v + 1] {
                leaf_at[next_pos as usize] = v as u32;
                lo[v] = next_pos;
                hi[v] = next_pos;
                next_pos += 1;
            }
            if top.1 < sorted_start[v + 1] {
                let c = sorted_children[top.1 as usize];
                top.1 += 1;
                if top.1 - 1 == sorted_start[v] {
                    lo[v] = next_pos;
                }
                first[c as usize] = tour.len() as u32;
                tour.push(c);
                stack.push((c, sorted_start[c as usize]));
            } else {
                if sorted_start[v] != sorted_start[v + 1] {
                    hi[v] = next_pos - 1;
                }
                stack.pop();
                if let Some(&(p, _)) = stack.last() {
                    tour.push(p);
                }
            }
        }

        let len = tour.len();
        let mut log2 = vec![0u8; len + 1];
        for i in 2..=len {
            log2[i] = log2[i / 2] + 1;
        }
        let shallower = |a: u32, b: u32| if depth[a as usize] <= depth[b as usize] { a } else { b };
        let mut sparse = vec![tour];
        let mut width = 1;
        while 2 * width <= len {
            let prev = sparse.last().unwrap();
            let row: Vec<u32> = (0..=len - 2 * width).map(|i| shallower(prev[i], prev[i + width])).collect();
            sparse.push(row);
            width *= 2;
        }

        let max_depth = depth.iter().copied().max().unwrap_or(0) as usize;
        let mut jump = vec![parent.clone()];
        let mut span = 1;
        while 2 * span <= max_depth {
            let prev = jump.last().unwrap();
            let row = (0..v_count)
                .map(|v| match prev[v] {
                    NIL => NIL,
                    a => prev[a as usize],
                })
                .collect();
            jump.push(row);
            span *= 2;
        }

        TreeQueryIndex {
            parent,
            depth,
            leaves_below,
            sorted_start,
            sorted_children,
            leaf_at,
            lo,
            hi,
            first,
            sparse,
            log2,
            jump,
        }
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn leaf_count(&self) -> usize {
        self.leaf_at.len() - 1
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NIL => None,
            p => Some(p as usize),
        }
    }

    pub fn depth(&self, v: usize) -> usize {
        self.depth[v] as usize
    }

    /// `ℓ_T(v)`: number of leaves below `v`.
    pub fn leaves_below(&self, v: usize) -> usize {
        self.leaves_below[v] as usize
    }

    /// Children in SORT-CHILDREN order.
    pub fn sorted_children(&self, v: usize) -> impl Iterator<Item = usize> + '_ {
        self.sorted_children[self.sorted_start[v] as usize..self.sorted_start[v + 1] as usize]
            .iter()
            .map(|&c| c as usize)
    }

    /// Leaf at 1-based position `pos`.
    pub fn leaf_at(&self, pos: usize) -> usize {
        self.leaf_at[pos] as usize
    }

    /// 1-based position of a leaf (`ind`).
    pub fn position(&self, leaf: usize) -> usize {
        self.lo[leaf] as usize
    }

    /// `[A_v, B_v]`, the positions of the leaves below `v`.
    pub fn interval(&self, v: usize) -> (usize, usize) {
        (self.lo[v] as usize, self.hi[v] as usize)
    }

    /// Position of the leftmost leaf below `v`.
    pub fn left(&self, v: usize) -> usize {
        self.lo[v] as usize
    }

    pub fn right(&self, v: usize) -> usize {
        self.hi[v] as usize
    }

    /// Representative leaf `x_v`: the leftmost leaf below `v`.
    pub fn rep_leaf(&self, v: usize) -> usize {
        self.leaf_at[self.lo[v] as usize] as usize
    }

    pub fn lca(&self, u: usize, v: usize) -> usize {
        self.lca_with_cost(u, v).0
    }

    /// LCA plus the number of table cells read (0 when `u == v`, else 7).
    #[inline]
    pub fn lca_with_cost(&self, u: usize, v: usize) -> (usize, u32) {
        if u == v {
            return (u, 0);
        }
        let (mut a, mut b) = (self.first[u] as usize, self.first[v] as usize);
        if a > b {
            std::mem::swap(&mut a, &mut b);
        }
        let k = self.log2[b - a + 1] as usize;
        let row = &self.sparse[k];
        let x = row[a];
        let y = row[b + 1 - (1 << k)];
        let w = if self.depth[x as usize] <= self.depth[y as usize] { x } else { y };
        (w as usize, 7)
    }

    /// Ancestor of `u` at edge-depth `d`, or `None` when `d > depth(u)`.
    pub fn level_ancestor(&self, u: usize, d: usize) -> Option<usize> {
        let du = self.depth[u] as usize;
        if d > du {
            return None;
        }
        let mut diff = du - d;
        let mut v = u as u32;
        let mut bit = 0;
        while diff > 0 {
            if diff & 1 == 1 {
                v = self.jump[bit][v as usize];
            }
            diff >>= 1;
            bit += 1;
        }
        Some(v as usize)
    }

    /// Child of `ancestor` on the path down to `descendant`.
    pub fn child_toward(&self, ancestor: usize, descendant: usize) -> usize {
        self.level_ancestor(descendant, self.depth(ancestor) + 1).expect("descendant lies strictly below ancestor")
    }

    /// Table cells held, as a storage measure.
    pub fn storage_words(&self) -> usize {
        let base = self.parent.len() * 6 + self.leaf_at.len() + self.sorted_children.len() + self.log2.len() / 4;
        base + self.sparse.iter().map(Vec::len).sum::<usize>() + self.jump.iter().map(Vec::len).sum::<usize>()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::metric::PointSet;
    use proptest::prelude::*;
    use rand::{Rng, SeedableRng};

    /// Random tree on `v` vertices: vertex i > 0 hangs under a random earlier
    /// vertex; labels decrease with depth.
    pub(crate) fn random_tree(v: usize, seed: u64) -> LabeledTree {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let mut parents = vec![None];
        for i in 1..v {
            parents.push(Some(rng.random_range(0..i)));
        }
        let mut has_child = vec![false; v];
        for p in parents.iter().flatten() {
            has_child[*p] = true;
        }
        let mut depth = vec![0usize; v];
        for i in 1..v {
            depth[i] = depth[parents[i].unwrap()] + 1;
        }
        let labels: Vec<f64> = (0..v).map(|i| if has_child[i] { 0.5f64.powi(depth[i] as i32) } else { 0.0 }).collect();
        let leaves = has_child.iter().filter(|h| !**h).count();
        LabeledTree::build(&parents, &labels, &PointSet::full(leaves)).unwrap()
    }

    fn walk_ancestor(t: &LabeledTree, u: usize, d: usize) -> Option<usize> {
        let depth = t.depths();
        if d > depth[u] {
            return None;
        }
        let mut v = u;
        while depth[v] > d {
            v = t.parent(v).unwrap();
        }
        Some(v)
    }

    #[test]
    fn lca_basics() {
        let t = LabeledTree::build(&[None, Some(0), Some(0)], &[1.0, 0.0, 0.0], &PointSet::full(2)).unwrap();
        let idx = TreeQueryIndex::new(&t);
        assert_eq!(idx.lca(1, 1), 1);
        assert_eq!(idx.lca(1, 2), 0);
        assert_eq!(idx.level_ancestor(2, 1), Some(2));
        assert_eq!(idx.level_ancestor(2, 0), Some(0));
        assert_eq!(idx.level_ancestor(2, 2), None);
        let one = TreeQueryIndex::new(&LabeledTree::singleton(0));
        assert_eq!(one.lca(0, 0), 0);
        assert_eq!(one.leaf_count(), 1);
        assert_eq!(one.interval(0), (1, 1));
    }

    #[test]
    fn lca_and_level_ancestor_match_brute_force() {
        for (seed, v) in [(1u64, 2usize), (2, 17), (3, 128), (4, 512)] {
            let t = random_tree(v, seed);
            let idx = TreeQueryIndex::new(&t);
            let depth = t.depths();
            for (a, &da) in depth.iter().enumerate() {
                for b in 0..v {
                    assert_eq!(idx.lca(a, b), t.lca_walk(a, b));
                }
                for d in 0..=da + 1 {
                    assert_eq!(idx.level_ancestor(a, d), walk_ancestor(&t, a, d));
                }
            }
        }
    }

    #[test]
    fn sorted_children_are_non_increasing() {
        let t = random_tree(300, 5);
        let idx = TreeQueryIndex::new(&t);
        for v in 0..t.vertex_count() {
            let sizes: Vec<usize> = idx.sorted_children(v).map(|c| idx.leaves_below(c)).collect();
            assert!(sizes.windows(2).all(|w| w[0] >= w[1]));
            let mut got: Vec<usize> = idx.sorted_children(v).collect();
            got.sort_unstable();
            assert_eq!(got, t.children(v));
        }
    }

    proptest! {
        #[test]
        fn intervals_are_laminar_and_sized(v in 1usize..200, seed in any::<u64>()) {
            let t = random_tree(v, seed);
            let idx = TreeQueryIndex::new(&t);
            prop_assert_eq!(idx.leaves_below(0), t.leaf_count());
            for a in 0..v {
                let (la, ha) = idx.interval(a);
                prop_assert_eq!(ha + 1 - la, idx.leaves_below(a));
                if t.is_leaf(a) {
                    prop_assert_eq!(idx.leaves_below(a), 1);
                    prop_assert_eq!(idx.leaf_at(idx.position(a)), a);
                }
                prop_assert!(idx.depth(idx.lca(a, a)) == idx.depth(a));
                for b in 0..v {
                    let (lb, hb) = idx.interval(b);
                    let disjoint = ha < lb || hb < la;
                    let nested = (la <= lb && hb <= ha) || (lb <= la && ha <= hb);
                    prop_assert!(disjoint || nested);
                    let c = idx.lca(a, b);
                    prop_assert!(idx.depth(c) <= idx.depth(a).min(idx.depth(b)));
                }
            }
        }
    }
}
