use super::{LabeledTree, TreeBuilder};
use crate::error::{Error, Result};
use crate::metric::PointSet;

impl LabeledTree {
    fn skip_unary(&self, mut v: usize) -> usize {
        while self.children(v).len() == 1 {
            v = self.children(v)[0];
        }
        v
    }

    fn emit(&self, b: &mut TreeBuilder, v: usize, parent: Option<usize>) -> usize {
        match self.point_of(v) {
            Some(p) => b.leaf(parent, p),
            None => b.internal(parent, self.label(v)),
        }
    }

    /// Removes every vertex with exactly one child. The removed vertex is
    /// never a least common ancestor of two leaves, so distances are kept.
    pub fn contract_unary(&self) -> LabeledTree {
        let mut b = TreeBuilder::new();
        let mut stack = vec![(self.skip_unary(self.root()), None)];
        while let Some((v, parent)) = stack.pop() {
            let id = self.emit(&mut b, v, parent);
            stack.extend(self.children(v).iter().rev().map(|&c| (self.skip_unary(c), Some(id))));
        }
        b.finish().expect("contraction of a valid tree is valid")
    }

    /// Equivalent tree in which every internal vertex has exactly two
    /// children. Unary vertices are contracted; a vertex with `r > 2`
    /// children becomes a left comb of `r - 1` vertices sharing its label.
    pub fn binarize(&self) -> LabeledTree {
        enum Task {
            Orig(usize, Option<usize>),
            // Fresh vertex over the first `upto` children of the given vertex.
            Comb(usize, usize, Option<usize>),
        }
        let kids = |v: usize| -> Vec<usize> { self.children(v).iter().map(|&c| self.skip_unary(c)).collect() };
        let mut b = TreeBuilder::new();
        let mut stack = vec![Task::Orig(self.skip_unary(self.root()), None)];
        while let Some(task) = stack.pop() {
            match task {
                Task::Orig(v, parent) => {
                    let id = self.emit(&mut b, v, parent);
                    let cs = kids(v);
                    if cs.len() <= 2 {
                        stack.extend(cs.iter().rev().map(|&c| Task::Orig(c, Some(id))));
                    } else {
                        let r = cs.len();
                        stack.push(Task::Orig(cs[r - 1], Some(id)));
                        stack.push(Task::Comb(v, r - 1, Some(id)));
                    }
                }
                Task::Comb(v, upto, parent) => {
                    let id = b.internal(parent, self.label(v));
                    let child = |i: usize| self.skip_unary(self.children(v)[i]);
                    if upto == 2 {
                        stack.push(Task::Orig(child(1), Some(id)));
                        stack.push(Task::Orig(child(0), Some(id)));
                    } else {
                        stack.push(Task::Orig(child(upto - 1), Some(id)));
                        stack.push(Task::Comb(v, upto - 1, Some(id)));
                    }
                }
            }
        }
        b.finish().expect("binarization of a valid tree is valid")
    }

    /// Rounds every label up to the grid `Δ(root)·k^-e`, `e >= 0`, and merges
    /// each internal child whose rounded label equals its parent's. The
    /// output is a `k`-HST with `d_t <= d_out < k·d_t`; the root label, and
    /// so every single-label tree, is unchanged. `k = 1` keeps labels and
    /// only merges equal-label edges.
    pub fn to_k_hst(&self, k: f64) -> Result<LabeledTree> {
        if !k.is_finite() || k < 1.0 {
            return Err(Error::InvalidParameter(format!("k-HST needs finite k >= 1, got {k}")));
        }
        let top = self.label(self.root());
        let rounded: Vec<f64> =
            self.labels().iter().map(|&l| if l == 0.0 || k == 1.0 { l } else { round_up_to_grid(l, top, k) }).collect();
        let mut b = TreeBuilder::new();
        let mut stack = vec![(self.root(), None)];
        while let Some((v, parent)) = stack.pop() {
            let id = match self.point_of(v) {
                Some(p) => b.leaf(parent, p),
                None => b.internal(parent, rounded[v]),
            };
            let mut merged = Vec::new();
            let mut pending: Vec<usize> = self.children(v).iter().rev().copied().collect();
            while let Some(c) = pending.pop() {
                if !self.is_leaf(c) && rounded[c] == rounded[v] {
                    pending.extend(self.children(c).iter().rev());
                } else {
                    merged.push(c);
                }
            }
            stack.extend(merged.into_iter().rev().map(|c| (c, Some(id))));
        }
        b.finish()
    }

    /// The subtree spanned by the leaves of `subset`, with unary vertices
    /// contracted. Distances between kept points are unchanged.
    pub fn restrict(&self, subset: &PointSet) -> Result<LabeledTree> {
        if subset.is_empty() {
            return Err(Error::InvalidParameter("cannot restrict a tree to the empty set".into()));
        }
        let mut kept = vec![0usize; self.vertex_count()];
        for p in subset.iter() {
            kept[self.leaf_of(p).ok_or(Error::UnknownPoint(p))?] = 1;
        }
        for v in (1..self.vertex_count()).rev() {
            kept[self.parent(v).unwrap()] += kept[v];
        }
        let live = |v: usize| -> Vec<usize> { self.children(v).iter().copied().filter(|&c| kept[c] > 0).collect() };
        let skip = |mut v: usize| -> usize {
            loop {
                let l = live(v);
                if l.len() == 1 {
                    v = l[0];
                } else {
                    return v;
                }
            }
        };
        let mut b = TreeBuilder::new();
        let mut stack = vec![(skip(self.root()), None)];
        while let Some((v, parent)) = stack.pop() {
            let id = self.emit(&mut b, v, parent);
            stack.extend(live(v).into_iter().rev().map(|c| (skip(c), Some(id))));
        }
        b.finish()
    }
}

/// Smallest `k^e >= x`.
/// Smallest `top·k^-e >= x` with `e >= 0`, for `0 < x <= top`.
fn round_up_to_grid(x: f64, top: f64, k: f64) -> f64 {
    let mut e = ((top / x).ln() / k.ln()).floor().max(0.0) as i32;
    while e > 0 && top / k.powi(e) < x {
        e -= 1;
    }
    while top / k.powi(e + 1) >= x {
        e += 1;
    }
    top / k.powi(e)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PointSet;

    fn star(n: usize, label: f64) -> LabeledTree {
        let mut parents = vec![None];
        parents.extend((0..n).map(|_| Some(0)));
        let mut labels = vec![label];
        labels.extend((0..n).map(|_| 0.0));
        LabeledTree::build(&parents, &labels, &PointSet::full(n)).unwrap()
    }

    fn all_pairs(t: &LabeledTree) -> Vec<f64> {
        let pts: Vec<usize> = t.points().iter().collect();
        let mut out = Vec::new();
        for &a in &pts {
            for &b in &pts {
                out.push(t.tree_distance(a, b).unwrap());
            }
        }
        out
    }

    #[test]
    fn binarize_star_makes_left_comb() {
        let t = star(3, 1.0).binarize();
        assert!(t.is_binary());
        assert_eq!(t.vertex_count(), 5);
        let internal: Vec<usize> = (0..5).filter(|&v| !t.is_leaf(v)).collect();
        assert_eq!(internal.len(), 2);
        assert!(internal.iter().all(|&v| t.label(v) == 1.0));
        // Left comb: the root's first child is internal, the second a leaf.
        assert!(!t.is_leaf(t.children(0)[0]));
        assert!(t.is_leaf(t.children(0)[1]));
        assert!(all_pairs(&t).iter().all(|&d| d == 0.0 || d == 1.0));
    }

    #[test]
    fn binarize_contracts_unary_chain() {
        let t = LabeledTree::build(&[None, Some(0), Some(1)], &[3.0, 2.0, 0.0], &PointSet::full(1)).unwrap();
        let b = t.binarize();
        assert_eq!(b.vertex_count(), 1);
        assert!(b.is_leaf(0));
        let t =
            LabeledTree::build(&[None, Some(0), Some(0), Some(1)], &[3.0, 2.0, 0.0, 0.0], &PointSet::full(2)).unwrap();
        let b = t.binarize();
        assert_eq!(b.vertex_count(), 3);
        assert_eq!(b.tree_distance(0, 1).unwrap(), 3.0);
    }

    #[test]
    fn binarize_keeps_binary_tree() {
        let t = super::super::tests::four_point();
        assert_eq!(t.binarize(), t);
    }

    #[test]
    fn k_hst_rounding() {
        let t = LabeledTree::build(
            &[None, Some(0), Some(0), Some(1), Some(1), Some(1)],
            &[10.0, 9.0, 0.0, 0.0, 0.0, 0.0],
            &PointSet::full(4),
        )
        .unwrap();
        let h = t.to_k_hst(4.0).unwrap();
        // 9 rounds up to the root's 10 and the two vertices merge.
        assert_eq!(h.vertex_count(), 5);
        assert!(all_pairs(&h).iter().all(|&d| d == 0.0 || d == 10.0));
        let same = star(2, 5.0).to_k_hst(3.0).unwrap();
        assert_eq!(same.tree_distance(0, 1).unwrap(), 5.0);
        let deep = LabeledTree::build(
            &[None, Some(0), Some(0), Some(1), Some(1)],
            &[10.0, 2.0, 0.0, 0.0, 0.0],
            &PointSet::full(3),
        )
        .unwrap()
        .to_k_hst(4.0)
        .unwrap();
        assert_eq!(deep.tree_distance(1, 2).unwrap(), 2.5);
        assert!(t.to_k_hst(0.5).is_err());
        let unit = t.to_k_hst(1.0).unwrap();
        assert_eq!(all_pairs(&unit), all_pairs(&t));
    }

    #[test]
    fn power_rounding_is_tight() {
        for &(x, top, k) in &[
            (1.0, 1.0, 4.0),
            (1.0, 4.0, 4.0),
            (1.000001, 4.0, 4.0),
            (0.3, 1.0, 2.0),
            (1e-9, 3.0, 8.0),
            (7.9, 8.0, 8.0),
        ] {
            let r = round_up_to_grid(x, top, k);
            assert!(r >= x && r < k * x && r <= top, "{x} {top} {k} -> {r}");
        }
    }

    #[test]
    fn restrict_drops_points() {
        let t = super::super::tests::four_point();
        let r = t.restrict(&PointSet::new(vec![0, 2, 3])).unwrap();
        assert_eq!(r.leaf_count(), 3);
        assert!(!r.has_unary());
        assert_eq!(r.tree_distance(0, 2).unwrap(), 4.0);
        assert_eq!(r.tree_distance(2, 3).unwrap(), 1.0);
        assert!(t.restrict(&PointSet::new(vec![9])).is_err());
    }
}
