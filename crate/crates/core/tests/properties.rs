//! Property tests for the invariants of each module, checked against the
//! reference computations in `eval::oracles`.

use proptest::prelude::*;

use ramsey_core::chain::{self, ChainMode};
use ramsey_core::eval::instances::{cantor_metric, grid_target, instance_metric, random_hst, SHAPES};
use ramsey_core::eval::oracles;
use ramsey_core::lipschitz::{self, TargetFunction};
use ramsey_core::oracle::{self, QUERY_ACCESS_BOUND};
use ramsey_core::partition;
use ramsey_core::ranking;
use ramsey_core::tree::mst_ultrametric;
use ramsey_core::{LabeledTree, MetricKind, MetricSpace, PointSet, TreeQueryIndex};

const TOL: f64 = 1e-9;

fn kind() -> impl Strategy<Value = MetricKind> {
    prop_oneof![
        (1usize..6).prop_map(|dim| MetricKind::Euclidean { dim }),
        (0.0f64..0.5).prop_map(|edge_density| MetricKind::Graph { edge_density }),
        Just(MetricKind::Equilateral),
        Just(MetricKind::UniformMatrix),
    ]
}

fn metric(max_n: usize) -> impl Strategy<Value = MetricSpace> {
    (kind(), 1..=max_n, any::<u64>()).prop_map(|(k, n, s)| MetricSpace::generate(k, n, s).unwrap())
}

fn assert_ultrametric(t: &LabeledTree, n: usize) -> Result<(), TestCaseError> {
    let rho = oracles::ultrametric_matrix(t, n);
    for x in 0..n {
        for y in 0..n {
            prop_assert_eq!(rho[x * n + y], rho[y * n + x]);
            for z in 0..n {
                prop_assert!(rho[x * n + z] <= rho[x * n + y].max(rho[y * n + z]));
            }
        }
    }
    Ok(())
}

fn tree_strategy() -> impl Strategy<Value = LabeledTree> {
    (1usize..200, 0usize..4, 0.05f64..=1.0, any::<u64>())
        .prop_map(|(n, s, decay, seed)| random_hst(n, SHAPES[s], decay, seed))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn generated_metrics_are_metrics(m in metric(60)) {
        let n = m.len();
        let slack = TOL * m.diameter();
        for x in 0..n {
            prop_assert_eq!(m.d(x, x), 0.0);
            for y in 0..n {
                prop_assert_eq!(m.d(x, y), m.d(y, x));
                prop_assert!(x == y || m.d(x, y) > 0.0);
                for z in 0..n {
                    prop_assert!(m.d(x, z) <= m.d(x, y) + m.d(y, z) + slack);
                }
            }
        }
        prop_assert!(m.aspect_ratio() >= 1.0);
    }

    #[test]
    fn ckr_partitions_are_bounded_partitions(m in metric(50), frac in 0.01f64..1.5, seed in any::<u64>()) {
        let delta = (m.diameter() * frac).max(1e-12);
        let p = partition::ckr_partition(&m, &PointSet::full(m.len()), delta, seed).unwrap();
        prop_assert!(p.max_cluster_diameter(&m) <= delta);
        let mut covered: Vec<usize> = p.clusters().iter().flat_map(|c| c.iter()).collect();
        covered.sort_unstable();
        prop_assert_eq!(covered, (0..m.len()).collect::<Vec<_>>());
    }

    #[test]
    fn partition_tree_hst_dominates(m in metric(40), alpha in 2.0f64..64.0, seed in any::<u64>()) {
        let sample = partition::sample_partition_tree(&m, alpha, seed).unwrap();
        let t = partition::partition_tree_to_hst(&sample);
        let n = m.len();
        assert_ultrametric(&t, n)?;
        let rho = oracles::ultrametric_matrix(&t, n);
        for x in 0..n {
            for y in 0..n {
                prop_assert!(rho[x * n + y] >= m.d(x, y));
            }
        }
        let padded = partition::padded_points(&m, &sample);
        for x in 0..n {
            let direct = (1..=sample.depth()).all(|k| sample.levels()[k].pads(&m, x, sample.scale(k) / alpha));
            prop_assert_eq!(direct, padded.contains(x));
        }
    }

    #[test]
    fn ramsey_subset_distortion(m in metric(48), eps in 0.1f64..0.95, seed in any::<u64>()) {
        let n = m.len();
        let r = partition::ramsey_subset(&m, eps, seed, 4).unwrap();
        let rho = oracles::ultrametric_matrix(&r.tree, n);
        let all: Vec<usize> = (0..n).collect();
        let (bad, _, _) = oracles::distortion_scan(&m, &rho, &all, r.subset.as_slice(), partition::ramsey_distortion(eps), TOL);
        prop_assert_eq!(bad, 0);
    }

    #[test]
    fn mst_ultrametric_bounds(m in metric(40)) {
        let n = m.len();
        let t = mst_ultrametric(&m);
        assert_ultrametric(&t, n)?;
        let rho = oracles::ultrametric_matrix(&t, n);
        for x in 0..n {
            for y in 0..n {
                let d = m.d(x, y);
                prop_assert!(rho[x * n + y] >= d * (1.0 - TOL));
                prop_assert!(rho[x * n + y] <= (n.max(2) - 1) as f64 * d * (1.0 + TOL));
            }
        }
    }

    #[test]
    fn extension_properties(n in 2usize..40, i in 0u64..6, seed in any::<u64>(), frac in 0.05f64..1.0) {
        let m = instance_metric(n, seed, i);
        let y_len = ((n as f64 * frac) as usize).max(1);
        let ys = PointSet::new((0..n).step_by(n / y_len).collect());
        let t = mst_ultrametric(&m.restrict(&ys).unwrap()).rename_points(ys.as_slice()).unwrap();
        let rho = oracles::ultrametric_matrix(&t, n);
        let alpha = (ys.len().max(2) - 1) as f64;
        let e = chain::extend_ultrametric(&m, &t, alpha).unwrap();
        assert_ultrametric(&e, n)?;
        let ext = oracles::ultrametric_matrix(&e, n);
        for x in 0..n {
            for y in 0..n {
                let (v, d) = (ext[x * n + y], m.d(x, y));
                prop_assert!(v >= d * (1.0 - TOL));
                if ys.contains(y) {
                    prop_assert!(v <= chain::EXTENSION_FACTOR * alpha * d * (1.0 + TOL));
                    if ys.contains(x) {
                        prop_assert_eq!(v, 3.0 * rho[x * n + y]);
                    }
                }
            }
        }
    }

    #[test]
    fn tree_transforms_keep_points(t in tree_strategy(), k in 1.5f64..6.0) {
        let n = t.leaf_count();
        let rho = oracles::ultrametric_matrix(&t, n);
        let b = t.binarize();
        prop_assert!(b.is_binary() && !b.has_unary());
        prop_assert_eq!(b.points(), t.points());
        prop_assert_eq!(oracles::ultrametric_matrix(&b, n), rho.clone());
        let h = t.to_k_hst(k).unwrap();
        prop_assert!(h.is_k_hst(k));
        prop_assert_eq!(h.points(), t.points());
        let rh = oracles::ultrametric_matrix(&h, n);
        for c in 0..n * n {
            prop_assert!(rh[c] >= rho[c] && rh[c] <= k * rho[c] * (1.0 + TOL));
        }
    }

    #[test]
    fn lca_and_level_ancestor_match_walk_up(t in tree_strategy(), picks in proptest::collection::vec((any::<usize>(), any::<usize>()), 40)) {
        let idx = TreeQueryIndex::new(&t);
        let depths = t.depths();
        let v = t.vertex_count();
        for (a, b) in picks {
            let (a, b) = (a % v, b % v);
            prop_assert_eq!(idx.lca(a, b), t.lca_walk(a, b));
            let d = b % (depths[a] + 1);
            let mut w = a;
            while depths[w] > d {
                w = t.parent(w).unwrap();
            }
            prop_assert_eq!(idx.level_ancestor(a, d), Some(w));
        }
    }

    #[test]
    fn size_ancestor_matches_walk_up(t in tree_strategy()) {
        let idx = TreeQueryIndex::new(&t);
        let sa = ramsey_core::SizeAncestorIndex::build(&t, &idx).unwrap();
        let counts = oracles::leaf_counts(&t);
        let n = t.leaf_count();
        for leaf in (0..t.vertex_count()).filter(|&v| t.is_leaf(v)) {
            let want = oracles::walk_up_size_ancestor(&t, &counts, leaf, n + 3);
            for (l, &w) in want.iter().enumerate().skip(2) {
                prop_assert_eq!(sa.query(&idx, leaf, l).unwrap(), w);
            }
        }
    }

    #[test]
    fn oracle_is_sound_and_symmetric(n in 1usize..48, i in 0u64..6, seed in any::<u64>(), k in 1.5f64..6.0) {
        let m = instance_metric(n, seed, i);
        let o = oracle::build_oracle(&m, k, seed).unwrap();
        for x in 0..n {
            for y in 0..n {
                let (e, cost) = o.query_counted(x, y).unwrap();
                prop_assert!(e >= m.d(x, y) * (1.0 - TOL));
                prop_assert!(e <= 128.0 * k * m.d(x, y) * (1.0 + TOL));
                prop_assert_eq!(e, o.query(y, x).unwrap());
                prop_assert!(cost <= QUERY_ACCESS_BOUND);
            }
        }
    }

    #[test]
    fn ranking_is_inverse_pair(n in 1usize..32, i in 0u64..6, seed in any::<u64>()) {
        let m = instance_metric(n, seed, i);
        let r = ranking::build_ranking(&m, 2.0, seed).unwrap();
        for x in 0..n {
            prop_assert_eq!(r.rank_access(x, 1).unwrap(), x);
            for p in 1..=n {
                prop_assert_eq!(r.rank_of(x, r.rank_access(x, p).unwrap()).unwrap(), p);
            }
        }
        prop_assert_eq!(r.quality(&m).unwrap().violations, 0);
    }

    #[test]
    fn lip_um_sandwich(t in tree_strategy(), seed in any::<u64>()) {
        let n = t.leaf_count();
        let target = grid_target(5);
        let image: Vec<usize> = (0..n).map(|x| (ramsey_core::rng::mix64(seed ^ x as u64) % 25) as usize).collect();
        let f = TargetFunction::new(target, image).unwrap();
        let truth = lipschitz::brute_lipschitz_tree(&t, &f).unwrap();
        let a = lipschitz::lip_um(&t, &f).unwrap().value;
        prop_assert!(a <= truth * (1.0 + 1e-12));
        prop_assert!(a >= truth / lipschitz::LIP_UM_FACTOR * (1.0 - 1e-12));
    }

    #[test]
    fn chain_lip_sandwich(n in 2usize..40, seed in any::<u64>(), k in prop_oneof![Just(2.0f64), Just(3.0)]) {
        let m = cantor_metric(n, seed);
        let target = grid_target(4);
        let image: Vec<usize> = (0..n).map(|x| (ramsey_core::rng::mix64(seed.wrapping_add(x as u64)) % 16) as usize).collect();
        let f = TargetFunction::new(target, image).unwrap();
        let truth = lipschitz::brute_lipschitz(&m, &f).unwrap();
        let c = chain::build_chain(&m, k, seed, ChainMode::Restricted, 8).unwrap();
        let a = lipschitz::lip_estimate(&c, &f).unwrap().value;
        prop_assert!(a <= truth * (1.0 + 1e-12));
        prop_assert!(a >= truth / (2048.0 * k) * (1.0 - 1e-12));
    }
}
