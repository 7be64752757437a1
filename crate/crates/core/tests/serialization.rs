//! Text formats: exact round trips and rejection of inconsistent files.

use ramsey_core::chain::{build_chain_default, ChainMode, RamseyChain};
use ramsey_core::eval::instances::{grid_target, random_hst, TreeShape};
use ramsey_core::lipschitz::TargetFunction;
use ramsey_core::oracle::{build_oracle, OracleIndex};
use ramsey_core::ranking::{build_ranking, RankingIndex};
use ramsey_core::{LabeledTree, MetricKind, MetricSpace};

fn metric() -> MetricSpace {
    MetricSpace::generate(MetricKind::Euclidean { dim: 2 }, 32, 17).unwrap()
}

/// Replaces the first occurrence of `from` on the line starting with `key`.
fn corrupt(text: &str, key: &str, from: &str, to: &str) -> String {
    let mut done = false;
    text.lines()
        .map(|l| {
            if !done && l.starts_with(key) && l.contains(from) {
                done = true;
                l.replacen(from, to, 1)
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
        + "\n"
}

#[test]
fn metric_save_load_is_exact() {
    let m = metric();
    let mut buf = Vec::new();
    m.save(&mut buf).unwrap();
    let back = MetricSpace::load(buf.as_slice()).unwrap();
    assert_eq!(back, m);
    for x in 0..32 {
        for y in 0..32 {
            assert_eq!(back.d(x, y).to_bits(), m.d(x, y).to_bits());
        }
    }
}

#[test]
fn metric_rejects_invalid_files() {
    assert!(MetricSpace::parse("").is_err());
    assert!(MetricSpace::parse("2\n0 1\n2 0\n").is_err());
    assert!(MetricSpace::parse("2\n0 1\n1 0\n1 1\n").is_err());
    assert!(MetricSpace::parse("3\n0 1 5\n1 0 1\n5 1 0\n").is_err());
    assert!(MetricSpace::parse("2\n0 0\n0 0\n").is_err());
}

#[test]
fn tree_round_trip_and_rejection() {
    let t = random_hst(50, TreeShape::Mixed, 0.3, 4);
    let text = t.to_text();
    assert_eq!(LabeledTree::parse(&text).unwrap(), t);
    assert!(LabeledTree::parse(&corrupt(&text, "parents", "-1", "0")).is_err());
    let header = format!("tree {}\n", t.vertex_count());
    let wrong = format!("tree {}\n", t.vertex_count() + 1);
    assert!(LabeledTree::parse(&text.replacen(&header, &wrong, 1)).is_err());
}

#[test]
fn chain_round_trip_both_modes() {
    let m = metric();
    for mode in [ChainMode::Restricted, ChainMode::Extended] {
        let c = build_chain_default(&m, 2.0, 3, mode).unwrap();
        let back = RamseyChain::parse(&c.to_text()).unwrap();
        assert_eq!(back, c);
        assert_eq!(back.to_text(), c.to_text());
    }
}

#[test]
fn oracle_round_trip_and_tamper_detection() {
    let m = metric();
    let o = build_oracle(&m, 2.0, 5).unwrap();
    let text = o.to_text();
    let back = OracleIndex::parse(&text).unwrap();
    assert_eq!(back.to_text(), text);
    for x in 0..32 {
        for y in 0..32 {
            assert_eq!(back.query(x, y).unwrap().to_bits(), o.query(x, y).unwrap().to_bits());
        }
    }
    assert!(OracleIndex::parse(&corrupt(&text, "level_of", "1", "2")).is_err());
    assert!(OracleIndex::parse(&text.replacen("oracle", "ranking", 1)).is_err());
    assert!(OracleIndex::parse(&format!("{text}extra\n")).is_err());
}

#[test]
fn ranking_round_trip_and_tamper_detection() {
    let m = metric();
    let r = build_ranking(&m, 2.0, 5).unwrap();
    let text = r.to_text();
    let back = RankingIndex::parse(&text).unwrap();
    assert_eq!(back.to_text(), text);
    for x in 0..32 {
        assert_eq!(back.permutation(x).unwrap(), r.permutation(x).unwrap());
    }
    assert!(RankingIndex::parse(&corrupt(&text, "leafref", " ", "  9")).is_err());
    // An oracle's chain is not extended, so it cannot back a ranking.
    let o = build_oracle(&m, 2.0, 5).unwrap().to_text();
    assert!(RankingIndex::parse(&o.replacen("oracle", "ranking", 1)).is_err());
}

#[test]
fn function_file_round_trip() {
    let target = grid_target(3);
    let f = TargetFunction::new(target.clone(), vec![0, 8, 4, 4]).unwrap();
    let back = TargetFunction::parse(&f.to_text(), target.clone()).unwrap();
    assert_eq!(back.image(), f.image());
    assert!(TargetFunction::parse("4 9\n0 8 4\n", target.clone()).is_err());
    assert!(TargetFunction::parse("4 9\n0 8 4 9\n", target.clone()).is_err());
    assert!(TargetFunction::parse("4 10\n0 8 4 4\n", target).is_err());
}
