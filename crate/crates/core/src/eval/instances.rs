//! Random instances for the evaluation suites.

use rand::seq::index;
use rand::Rng;

use crate::metric::{MetricKind, MetricSpace};
use crate::rng::{derive_seed, rng_from_seed, shuffle, stream, uniform_real};
use crate::tree::{LabeledTree, TreeBuilder};

const KINDS: [MetricKind; 5] = [
    MetricKind::Euclidean { dim: 2 },
    MetricKind::Euclidean { dim: 3 },
    MetricKind::Graph { edge_density: 0.05 },
    MetricKind::UniformMatrix,
    MetricKind::Euclidean { dim: 8 },
];

/// Instance `i` of a rotating family: the five generator kinds above,
/// then a Cantor-set sample.
pub fn instance_metric(n: usize, seed: u64, i: u64) -> MetricSpace {
    let seed = derive_seed(seed, stream::INSTANCE, i);
    match KINDS.get((i % (KINDS.len() as u64 + 1)) as usize) {
        Some(&kind) => MetricSpace::generate(kind, n, seed).expect("generator parameters are valid"),
        None => cantor_metric(n, seed),
    }
}

/// `n` distinct points `Σ b_i·3^-i` on the line with random bits `b_i`: a
/// random sample of the middle-thirds Cantor set. Close pairs occur at
/// every scale, so padding is non-trivial even for small `n`.
pub fn cantor_metric(n: usize, seed: u64) -> MetricSpace {
    let mut rng = rng_from_seed(seed);
    let mut xs: Vec<f64> = Vec::with_capacity(n);
    while xs.len() < n {
        let bits: u32 = rng.random();
        let x = (0..32).rev().fold(0.0, |acc, i| (acc + ((bits >> i) & 1) as f64) / 3.0);
        if !xs.contains(&x) {
            xs.push(x);
        }
    }
    let dist = (0..n * n).map(|c| (xs[c / n] - xs[c % n]).abs()).collect();
    MetricSpace::from_matrix(n, dist).expect("points are distinct")
}

/// L1 distances on the `side × side` integer grid.
pub fn grid_target(side: usize) -> MetricSpace {
    let n = side * side;
    let dist = (0..n * n)
        .map(|c| {
            let (a, b) = (c / n, c % n);
            ((a / side).abs_diff(b / side) + (a % side).abs_diff(b % side)) as f64
        })
        .collect();
    MetricSpace::from_matrix(n, dist).expect("grid metric is valid")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TreeShape {
    /// Binary splits at uniform cut points.
    Binary,
    /// Up to eight children per vertex.
    Wide,
    /// One leaf split off at every vertex.
    Caterpillar,
    /// Random mix of the above, per vertex.
    Mixed,
}

pub const SHAPES: [TreeShape; 4] = [TreeShape::Binary, TreeShape::Wide, TreeShape::Caterpillar, TreeShape::Mixed];

/// Random tree with `leaves` leaves (points shuffled over them) and no
/// unary vertex. Child labels are the parent's times a factor uniform in
/// `[decay, 1]`; `decay = 1` gives every internal vertex label 1.
pub fn random_hst(leaves: usize, shape: TreeShape, decay: f64, seed: u64) -> LabeledTree {
    let mut rng = rng_from_seed(seed);
    let mut points: Vec<usize> = (0..leaves).collect();
    shuffle(&mut rng, &mut points);
    let mut next_point = points.into_iter();
    let mut b = TreeBuilder::new();
    let mut stack = vec![(None, leaves, 1.0f64)];
    while let Some((parent, size, label)) = stack.pop() {
        if size == 1 {
            b.leaf(parent, next_point.next().unwrap());
            continue;
        }
        let v = b.internal(parent, label);
        let shape = match shape {
            TreeShape::Mixed => SHAPES[rng.random_range(0..3)],
            s => s,
        };
        let parts: Vec<usize> = match shape {
            TreeShape::Caterpillar => vec![1, size - 1],
            TreeShape::Binary => {
                let cut = rng.random_range(1..size);
                vec![cut, size - cut]
            }
            _ => {
                let r = rng.random_range(2..=size.min(8));
                let mut cuts: Vec<usize> =
                    index::sample(&mut rng, size - 1, r - 1).into_iter().map(|c| c + 1).collect();
                cuts.sort_unstable();
                cuts.push(size);
                let mut prev = 0;
                cuts.into_iter()
                    .map(|c| {
                        let p = c - prev;
                        prev = c;
                        p
                    })
                    .collect()
            }
        };
        for p in parts.into_iter().rev() {
            let child = label * uniform_real(&mut rng, decay, 1.0);
            stack.push((Some(v), p, if child > 1e-280 { child } else { label }));
        }
    }
    b.finish().expect("generated tree is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn shapes_have_no_unary_vertices() {
        for (i, &s) in SHAPES.iter().enumerate() {
            for leaves in [1, 2, 3, 17, 200] {
                let t = random_hst(leaves, s, 0.3, i as u64);
                assert_eq!(t.leaf_count(), leaves);
                assert!(!t.has_unary());
                assert!(t.is_k_hst(1.0));
            }
        }
        assert_eq!(random_hst(50, TreeShape::Caterpillar, 0.5, 0).depths().into_iter().max(), Some(49));
    }

    #[test]
    fn grid_is_l1() {
        let g = grid_target(3);
        assert_eq!(g.d(0, 8), 4.0);
        assert_eq!(g.d(1, 3), 2.0);
    }
}
