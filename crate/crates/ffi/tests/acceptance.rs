//! Every acceptance criterion, run through the C ABI.

mod common;

use std::process::ExitCode;

use common::*;
use ramsey_core::eval::Suite;
use ramsey_core::oracle::QUERY_ACCESS_BOUND;
use ramsey_ffi::RamseyStatus;

const SEED: u64 = 20_240_601;

/// Exhaustive oracle bounds through handles; returns failure descriptions.
fn oracle_through_handles() -> Vec<String> {
    let mut fails = Vec::new();
    for k in [2.0, 3.0] {
        for n in [64, 256] {
            let m = Metric::generate("euclidean:2", n, SEED ^ n as u64);
            let o = Oracle::build(&m, k, SEED);
            for x in 0..n {
                for y in 0..n {
                    let (e, a) = o.query(x, y);
                    let d = m.d(x, y);
                    if e < d * (1.0 - 1e-9) || e > 128.0 * k * d * (1.0 + 1e-9) || a > QUERY_ACCESS_BOUND {
                        fails.push(format!("oracle k={k} n={n} ({x},{y}) e={e} d={d} accesses={a}"));
                    }
                }
            }
        }
    }
    fails
}

/// Ranking bijection, inverse pair and monotonicity through handles.
fn ranking_through_handles() -> Vec<String> {
    let mut fails = Vec::new();
    let k = 2.0;
    for n in [16, 128] {
        let m = Metric::generate("graph:0.05", n, SEED ^ n as u64);
        let r = Ranking::build(&m, k, SEED);
        for x in 0..n {
            let perm: Vec<usize> = (1..=n).map(|i| r.access(x, i)).collect();
            let mut sorted = perm.clone();
            sorted.sort_unstable();
            if sorted != (0..n).collect::<Vec<_>>() {
                fails.push(format!("ranking n={n} x={x} not a bijection"));
            }
            for (i, &y) in perm.iter().enumerate() {
                if r.rank(x, y) != i + 1 {
                    fails.push(format!("ranking n={n} x={x} rank({y}) != {}", i + 1));
                }
            }
            let mut suffix_min = f64::INFINITY;
            for &y in perm.iter().rev() {
                if m.d(x, y) > 768.0 * k * suffix_min * (1.0 + 1e-9) {
                    fails.push(format!("ranking n={n} x={x} monotonicity at {y}"));
                }
                suffix_min = suffix_min.min(m.d(x, y));
            }
        }
    }
    fails
}

/// Serialized handles and reports are byte-identical across rebuilds.
fn determinism_through_handles() -> Vec<String> {
    let mut fails = Vec::new();
    let m = Metric::generate("uniform", 48, SEED);
    let m2 = Metric::generate("uniform", 48, SEED);
    if Oracle::build(&m, 2.0, 3).text() != Oracle::build(&m2, 2.0, 3).text() {
        fails.push("oracle rebuild differs".into());
    }
    if Ranking::build(&m, 2.0, 3).text() != Ranking::build(&m2, 2.0, 3).text() {
        fails.push("ranking rebuild differs".into());
    }
    if eval("all", 5, 12, 0.0, 3) != eval("all", 5, 12, 0.0, 3) {
        fails.push("eval report differs".into());
    }
    fails
}

fn main() -> ExitCode {
    let mut all_pass = true;
    for (i, suite) in Suite::ALL.into_iter().enumerate() {
        let (status, report) = eval(suite.name(), SEED, 0, 0.0, 0);
        let mut fails: Vec<String> = report
            .lines()
            .filter(|l| l.starts_with("check=") && l.ends_with("status=fail"))
            .map(String::from)
            .collect();
        if status != RamseyStatus::Ok && fails.is_empty() {
            fails.push(format!("status {status:?}: {}", last_error()));
        }
        fails.extend(match suite {
            Suite::Oracle => oracle_through_handles(),
            Suite::Ranking => ranking_through_handles(),
            Suite::Determinism => determinism_through_handles(),
            _ => Vec::new(),
        });
        println!(
            "criterion {:>2} {:<17} {} ({} checks, {} failed)",
            i + 1,
            suite.name(),
            if fails.is_empty() { "PASS" } else { "FAIL" },
            report.lines().filter(|l| l.starts_with("check=")).count(),
            fails.len()
        );
        for f in fails.iter().take(20) {
            println!("    {f}");
        }
        all_pass &= fails.is_empty();
    }
    if all_pass {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
