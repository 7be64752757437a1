//! Minimum-spanning-tree ultrametric: a quick HST with distortion below n.

use super::{LabeledTree, TreeBuilder};
use crate::metric::MetricSpace;

/// Builds the single-linkage hierarchy of the MST and labels the vertex
/// created by merging along an edge of weight `w` with `(n - 1)·w`.
///
/// Every MST edge on the path between `x` and `y` is at most `d(x, y)`,
/// and the path has at most `n - 1` edges summing to at least `d(x, y)`, so
/// `d ≤ ρ ≤ (n - 1)·d`.
pub fn mst_ultrametric(m: &MetricSpace) -> LabeledTree {
    let n = m.len();
    if n == 1 {
        return LabeledTree::singleton(0);
    }
    // Prim on the dense matrix.
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut via = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    best[0] = 0.0;
    for _ in 0..n {
        let u = (0..n).filter(|&v| !in_tree[v]).min_by(|&a, &b| best[a].total_cmp(&best[b])).unwrap();
        in_tree[u] = true;
        if u != 0 {
            edges.push((best[u], via[u].min(u), via[u].max(u)));
        }
        for v in 0..n {
            if !in_tree[v] && m.d(u, v) < best[v] {
                best[v] = m.d(u, v);
                via[v] = u;
            }
        }
    }
    edges.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));

    let scale = (n - 1) as f64;
    let mut b = TreeBuilder::new();
    let mut top: Vec<usize> = (0..n).map(|p| b.leaf(None, p)).collect();
    let mut uf: Vec<usize> = (0..n).collect();
    fn find(uf: &mut [usize], mut x: usize) -> usize {
        while uf[x] != x {
            uf[x] = uf[uf[x]];
            x = uf[x];
        }
        x
    }
    for (w, x, y) in edges {
        let (rx, ry) = (find(&mut uf, x), find(&mut uf, y));
        let v = b.internal(None, scale * w);
        b.set_parent(top[rx], Some(v));
        b.set_parent(top[ry], Some(v));
        uf[ry] = rx;
        top[rx] = v;
    }
    b.finish().expect("single-linkage hierarchy is a valid tree")
}
