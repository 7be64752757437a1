//! Slow reference computations that share no code with the indices they
//! check: every quantity is recomputed from parent pointers, labels and
//! the raw distance matrix.

use crate::metric::MetricSpace;
use crate::tree::LabeledTree;

/// Leaf counts by an explicit-stack postorder walk.
pub fn leaf_counts(t: &LabeledTree) -> Vec<usize> {
    let mut out = vec![0; t.vertex_count()];
    let mut stack = vec![(t.root(), false)];
    while let Some((v, done)) = stack.pop() {
        if t.is_leaf(v) {
            out[v] = 1;
        } else if done {
            out[v] = t.children(v).iter().map(|&c| out[c]).sum();
        } else {
            stack.push((v, true));
            stack.extend(t.children(v).iter().map(|&c| (c, false)));
        }
    }
    out
}

/// Root-to-`v` vertex path.
fn path_from_root(t: &LabeledTree, v: usize) -> Vec<usize> {
    let mut p = vec![v];
    let mut u = v;
    while let Some(q) = t.parent(u) {
        p.push(q);
        u = q;
    }
    p.reverse();
    p
}

/// All-pairs ultrametric over the points of `t`, indexed by point id
/// (`n × n`, zero outside the tree's points), via common root-path prefixes.
pub fn ultrametric_matrix(t: &LabeledTree, n: usize) -> Vec<f64> {
    let pts: Vec<usize> = t.points().iter().collect();
    let paths: Vec<Vec<usize>> = pts.iter().map(|&p| path_from_root(t, t.leaf_of(p).unwrap())).collect();
    let mut out = vec![0.0; n * n];
    for (a, pa) in paths.iter().enumerate() {
        for (b, pb) in paths.iter().enumerate().skip(a + 1) {
            let common = pa.iter().zip(pb).take_while(|(x, y)| x == y).count();
            let d = t.label(pa[common - 1]);
            out[pts[a] * n + pts[b]] = d;
            out[pts[b] * n + pts[a]] = d;
        }
    }
    out
}

/// For leaf vertex `leaf`, `answer[l]` for `l` in `2..=max_l`: the ancestor
/// `u` with `ℓ(u) < l <= ℓ(parent(u))`, by walking up the parent pointers.
pub fn walk_up_size_ancestor(t: &LabeledTree, counts: &[usize], leaf: usize, max_l: usize) -> Vec<usize> {
    let mut answer = vec![usize::MAX; max_l + 1];
    let mut v = leaf;
    let mut l = 2;
    while l <= max_l {
        let cap = t.parent(v).map_or(usize::MAX, |p| counts[p]);
        while l <= max_l && l <= cap {
            if counts[v] < l {
                answer[l] = v;
            }
            l += 1;
        }
        match t.parent(v) {
            Some(p) => v = p,
            None => break,
        }
    }
    answer
}

/// Leaves of `v` in the order that sorts children by non-increasing leaf
/// count, ties by vertex id.
fn ordered_leaves(t: &LabeledTree, counts: &[usize], v: usize, out: &mut Vec<usize>) {
    let mut stack = vec![v];
    while let Some(u) = stack.pop() {
        if t.is_leaf(u) {
            out.push(u);
            continue;
        }
        let mut kids = t.children(u).to_vec();
        kids.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        stack.extend(kids.into_iter().rev());
    }
}

/// The ranking permutation of point `x` in `t`: `x`, then for each
/// ancestor from the bottom up, the leaves of its other children in order.
pub fn scan_permutation(t: &LabeledTree, counts: &[usize], x: usize) -> Vec<usize> {
    let mut leaves = Vec::with_capacity(t.leaf_count());
    let mut below = t.leaf_of(x).unwrap();
    leaves.push(below);
    while let Some(u) = t.parent(below) {
        let mut kids = t.children(u).to_vec();
        kids.sort_by(|&a, &b| counts[b].cmp(&counts[a]).then(a.cmp(&b)));
        for c in kids {
            if c != below {
                ordered_leaves(t, counts, c, &mut leaves);
            }
        }
        below = u;
    }
    leaves.into_iter().map(|v| t.point_of(v).unwrap()).collect()
}

/// `|B(x, r)|` by a direct row scan.
pub fn ball_count(m: &MetricSpace, x: usize, r: f64) -> usize {
    (0..m.len()).filter(|&y| m.d(x, y) <= r).count()
}

/// Counts pairs of `domain` violating `d <= ρ`, or `ρ <= hi·d` when `y`
/// is in `upper_set`, with relative
/// tolerance `tol`. Returns (violations, max ρ/d over the constrained
/// pairs, min ρ/d over all distinct pairs).
pub fn distortion_scan(
    m: &MetricSpace,
    rho: &[f64],
    domain: &[usize],
    upper_set: &[usize],
    hi: f64,
    tol: f64,
) -> (usize, f64, f64) {
    let n = m.len();
    let mut in_upper = vec![false; n];
    for &y in upper_set {
        in_upper[y] = true;
    }
    let mut violations = 0;
    let mut worst_hi = 0.0f64;
    let mut worst_lo = f64::INFINITY;
    for &x in domain {
        for &y in domain {
            if x == y {
                continue;
            }
            let (r, d) = (rho[x * n + y], m.d(x, y));
            worst_lo = worst_lo.min(r / d);
            if r < d * (1.0 - tol) {
                violations += 1;
            }
            if in_upper[y] {
                worst_hi = worst_hi.max(r / d);
                if r > hi * d * (1.0 + tol) {
                    violations += 1;
                }
            }
        }
    }
    (violations, worst_hi, worst_lo)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metric::PointSet;

    #[test]
    fn walk_up_on_star() {
        let t =
            LabeledTree::build(&[None, Some(0), Some(0), Some(0)], &[1.0, 0.0, 0.0, 0.0], &PointSet::full(3)).unwrap();
        let counts = leaf_counts(&t);
        let a = walk_up_size_ancestor(&t, &counts, 1, 6);
        assert_eq!(&a[2..], &[1, 1, 0, 0, 0]);
    }

    #[test]
    fn scan_on_two_level_tree() {
        // root{ a{0,1}, 2 }: from point 2, the bigger child a comes next.
        let t = LabeledTree::build(
            &[None, Some(0), Some(1), Some(1), Some(0)],
            &[4.0, 1.0, 0.0, 0.0, 0.0],
            &PointSet::full(3),
        )
        .unwrap();
        let counts = leaf_counts(&t);
        assert_eq!(scan_permutation(&t, &counts, 2), vec![2, 0, 1]);
        assert_eq!(scan_permutation(&t, &counts, 1), vec![1, 0, 2]);
        let u = ultrametric_matrix(&t, 3);
        assert_eq!(u[1], 1.0);
        assert_eq!(u[2], 4.0);
    }
}
