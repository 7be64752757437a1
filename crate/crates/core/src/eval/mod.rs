//! Evaluation suites: statistical and exhaustive checks of every
//! guarantee the constructions make, each against an independent
//! reference computation from [`oracles`].
//!
//! Statistical checks use a one-sided 3σ slack. Every random choice is
//! derived from [`EvalConfig::seed`], so a report is a pure function of its
//! configuration.

pub mod instances;
pub mod oracles;

use std::fmt;
use std::str::FromStr;

use rand::Rng;

use crate::chain::{self, ChainMode};
use crate::error::{Error, Result};
use crate::lipschitz::{self, TargetFunction};
use crate::metric::{MetricKind, MetricSpace, PointSet};
use crate::oracle::{self, OracleIndex};
use crate::partition::{self, DEFAULT_MAX_TRIALS};
use crate::ranking::{self, RankingIndex};
use crate::rng::{derive_seed, rng_from_seed, stream};
use crate::tree::{self, CoarseSizeAncestor, LabeledTree, SizeAncestorIndex, TreeQueryIndex};

use instances::{grid_target, instance_metric, random_hst, TreeShape, SHAPES};

/// Relative tolerance for exact-inequality checks on floating distances.
pub const REL_TOL: f64 = 1e-9;

/// One line of a report.
#[derive(Debug, Clone, PartialEq)]
pub struct Check {
    pub name: String,
    pub observed: f64,
    pub bound: f64,
    pub slack: f64,
    pub pass: bool,
}

impl Check {
    /// Passes when `observed >= bound - slack`.
    pub fn at_least(name: impl Into<String>, observed: f64, bound: f64, slack: f64) -> Self {
        Check { name: name.into(), observed, bound, slack, pass: observed >= bound - slack }
    }

    /// Passes when `observed <= bound + slack`.
    pub fn at_most(name: impl Into<String>, observed: f64, bound: f64, slack: f64) -> Self {
        Check { name: name.into(), observed, bound, slack, pass: observed <= bound + slack }
    }

    /// Passes when `count` is zero.
    pub fn none(name: impl Into<String>, count: usize) -> Self {
        Check::at_most(name, count as f64, 0.0, 0.0)
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "check={} observed={} bound={} slack={} status={}",
            self.name,
            self.observed,
            self.bound,
            self.slack,
            if self.pass { "pass" } else { "fail" }
        )
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Report {
    pub checks: Vec<Check>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &Check> {
        self.checks.iter().filter(|c| !c.pass)
    }

    pub fn extend(&mut self, other: Report) {
        self.checks.extend(other.checks);
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            s.push_str(&c.to_string());
            s.push('\n');
        }
        let failed = self.failures().count();
        s.push_str(&format!(
            "summary checks={} failed={} status={}\n",
            self.checks.len(),
            failed,
            if failed == 0 { "pass" } else { "fail" }
        ));
        s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Suite {
    Padding,
    CompletePadding,
    Ramsey,
    Extension,
    Moments,
    Oracle,
    Ranking,
    SizeAncestor,
    LipUm,
    ChainLip,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 11] = [
        Suite::Padding,
        Suite::CompletePadding,
        Suite::Ramsey,
        Suite::Extension,
        Suite::Moments,
        Suite::Oracle,
        Suite::Ranking,
        Suite::SizeAncestor,
        Suite::LipUm,
        Suite::ChainLip,
        Suite::Determinism,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::Padding => "padding",
            Suite::CompletePadding => "complete-padding",
            Suite::Ramsey => "ramsey",
            Suite::Extension => "extension",
            Suite::Moments => "moments",
            Suite::Oracle => "oracle",
            Suite::Ranking => "ranking",
            Suite::SizeAncestor => "size-ancestor",
            Suite::LipUm => "lip-um",
            Suite::ChainLip => "chain-lip",
            Suite::Determinism => "determinism",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite `{s}`")))
    }
}

/// Suite parameters. Unset fields take the full acceptance values; `n`,
/// `k` and `trials` replace a suite's size list, `k` list and repetition
/// count respectively.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EvalConfig {
    pub seed: u64,
    pub n: Option<usize>,
    pub k: Option<f64>,
    pub trials: Option<usize>,
}

impl EvalConfig {
    pub fn new(seed: u64) -> Self {
        EvalConfig { seed, ..Default::default() }
    }

    fn sizes(&self, default: &[usize]) -> Vec<usize> {
        self.n.map_or_else(|| default.to_vec(), |n| vec![n])
    }

    fn ks(&self, default: &[f64]) -> Vec<f64> {
        self.k.map_or_else(|| default.to_vec(), |k| vec![k])
    }

    fn trials(&self, default: usize) -> usize {
        self.trials.unwrap_or(default)
    }

    /// Seed of the `i`-th sub-stream of `suite`.
    fn stream(&self, suite: Suite, i: u64) -> u64 {
        derive_seed(derive_seed(self.seed, stream::INSTANCE, suite as u64 + 1), stream::TRIAL, i)
    }
}

pub fn run(suite: Suite, cfg: &EvalConfig) -> Result<Report> {
    let checks = match suite {
        Suite::Padding => padding(cfg)?,
        Suite::CompletePadding => complete_padding(cfg)?,
        Suite::Ramsey => ramsey(cfg)?,
        Suite::Extension => extension(cfg)?,
        Suite::Moments => moments(cfg)?,
        Suite::Oracle => oracle(cfg)?,
        Suite::Ranking => ranking(cfg)?,
        Suite::SizeAncestor => size_ancestor(cfg)?,
        Suite::LipUm => lip_um(cfg)?,
        Suite::ChainLip => chain_lip(cfg)?,
        Suite::Determinism => determinism(cfg)?,
    };
    Ok(Report { checks })
}

pub fn run_all(cfg: &EvalConfig) -> Result<Report> {
    let mut r = Report::default();
    for s in Suite::ALL {
        r.extend(run(s, cfg)?);
    }
    Ok(r)
}

fn sigma(p: f64, trials: usize) -> f64 {
    (p * (1.0 - p) / trials as f64).sqrt()
}

/// Mean and standard error of the mean.
fn mean_and_error(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    if xs.len() < 2 {
        return (mean, 0.0);
    }
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0);
    (mean, (var / n).sqrt())
}

/// Number of same-cluster pairs farther apart than `delta`.
fn unbounded_pairs(m: &MetricSpace, cluster: impl Fn(usize) -> Option<usize>, delta: f64) -> usize {
    let n = m.len();
    let mut bad = 0;
    for x in 0..n {
        for y in x + 1..n {
            if let (Some(a), Some(b)) = (cluster(x), cluster(y)) {
                if a == b && m.d(x, y) > delta {
                    bad += 1;
                }
            }
        }
    }
    bad
}

fn ball_in_cluster(m: &MetricSpace, cluster: impl Fn(usize) -> Option<usize>, x: usize, t: f64) -> bool {
    (0..m.len()).all(|y| m.d(x, y) > t || cluster(y) == cluster(x))
}

/// CKR padding frequency for one `(x, Δ, t)` against the ball-ratio bound,
/// plus boundedness of every sampled partition.
pub fn padding_check(
    m: &MetricSpace,
    x: usize,
    delta: f64,
    t: f64,
    trials: usize,
    seed: u64,
    name: &str,
) -> Result<Vec<Check>> {
    let ratio = oracles::ball_count(m, x, delta / 8.0) as f64 / oracles::ball_count(m, x, delta) as f64;
    let bound = ratio.powf(16.0 * t / delta);
    let lib = partition::padding_probability_bound(m, x, delta, t)?;
    let all = PointSet::full(m.len());
    let mut hits = 0usize;
    let mut unbounded = 0usize;
    let mut not_partition = 0usize;
    for s in 0..trials {
        let p = partition::ckr_partition(m, &all, delta, derive_seed(seed, stream::TRIAL, s as u64))?;
        let cluster = |y: usize| p.cluster_of(y);
        unbounded += unbounded_pairs(m, cluster, delta);
        not_partition += (0..m.len()).filter(|&y| p.cluster_of(y).is_none()).count();
        hits += ball_in_cluster(m, cluster, x, t) as usize;
    }
    let freq = hits as f64 / trials as f64;
    Ok(vec![
        Check::at_least(format!("{name}.frequency"), freq, bound, 3.0 * sigma(freq, trials)),
        Check::at_most(format!("{name}.bound-formula"), (lib - bound).abs(), 0.0, 1e-15),
        Check::none(format!("{name}.delta-bounded"), unbounded),
        Check::none(format!("{name}.covers"), not_partition),
    ])
}

/// CKR padding inequality on five metrics, three
/// `(x, Δ, t)` choices each.
pub fn padding(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let trials = cfg.trials(10_000);
    let mut out = Vec::new();
    for &n in &cfg.sizes(&[64]) {
        for i in 0..5u64 {
            let m = instance_metric(n, cfg.seed, i);
            let mut rng = rng_from_seed(cfg.stream(Suite::Padding, i));
            for c in 0..3u64 {
                let x = rng.random_range(0..n);
                let mut row = m.row(x).to_vec();
                row.sort_by(f64::total_cmp);
                let (delta, t_div) = match c {
                    0 => (2.0 * row[n / 4], 8.0),
                    1 => (2.0 * row[n / 2], 16.0),
                    _ => (m.diameter(), 8.0),
                };
                let delta = if delta > 0.0 { delta } else { 1.0 };
                let name = format!("padding[n={n},metric={i},x={x},t=delta/{t_div}]");
                let seed = derive_seed(cfg.stream(Suite::Padding, 100 + i), stream::SCALE, c);
                out.extend(padding_check(&m, x, delta, delta / t_div, trials, seed, &name)?);
            }
        }
    }
    Ok(out)
}

/// Per-point all-levels padding frequency of partition trees.
pub fn complete_padding(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let trials = cfg.trials(5000);
    let mut out = Vec::new();
    for &n in &cfg.sizes(&[64]) {
        for (ai, alpha) in [16.0f64, 32.0].into_iter().enumerate() {
            let m = instance_metric(n, cfg.seed, 10 + ai as u64);
            let mut counts = vec![0usize; n];
            let mut structural = 0usize;
            let mut mismatched = 0usize;
            for s in 0..trials {
                let seed = derive_seed(cfg.stream(Suite::CompletePadding, ai as u64), stream::TRIAL, s as u64);
                let sample = partition::sample_partition_tree(&m, alpha, seed)?;
                let levels = sample.levels();
                structural += !levels.last().unwrap().is_all_singletons() as usize;
                structural += (levels[0].clusters().len() != 1) as usize;
                for k in 1..levels.len() {
                    let cluster = |y: usize| levels[k].cluster_of(y);
                    structural += unbounded_pairs(&m, cluster, sample.scale(k));
                    for x in 0..n {
                        for y in x + 1..n {
                            if levels[k].same_cluster(x, y) && !levels[k - 1].same_cluster(x, y) {
                                structural += 1;
                            }
                        }
                    }
                }
                let lib = partition::padded_points(&m, &sample);
                for (x, count) in counts.iter_mut().enumerate() {
                    let padded = (1..levels.len())
                        .all(|k| ball_in_cluster(&m, |y| levels[k].cluster_of(y), x, sample.scale(k) / alpha));
                    *count += padded as usize;
                    mismatched += (padded != lib.contains(x)) as usize;
                }
            }
            let bound = (n as f64).powf(-16.0 / alpha);
            // Report the point with the smallest margin.
            let (freq, slack) = counts
                .iter()
                .map(|&c| {
                    let p = c as f64 / trials as f64;
                    (p, 3.0 * sigma(p, trials))
                })
                .min_by(|a, b| (a.0 + a.1).total_cmp(&(b.0 + b.1)))
                .unwrap();
            let name = format!("complete-padding[n={n},alpha={alpha}]");
            out.push(Check::at_least(format!("{name}.worst-point-frequency"), freq, bound, slack));
            out.push(Check::none(format!("{name}.tree-structure"), structural));
            out.push(Check::none(format!("{name}.padded-set-agrees"), mismatched));
        }
    }
    Ok(out)
}

/// Ramsey subset size and distortion.
pub fn ramsey(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let reps = cfg.trials(20);
    let eps_list = cfg.k.map_or_else(|| vec![0.5, 1.0 / 3.0], |k| vec![1.0 / k]);
    let mut out = Vec::new();
    for &n in &cfg.sizes(&[64, 128]) {
        for (ei, &eps) in eps_list.iter().enumerate() {
            let mut sizes = Vec::with_capacity(reps);
            let mut violations = 0;
            let mut worst = 0.0f64;
            let mut missed = 0;
            for r in 0..reps {
                let m = instance_metric(n, cfg.stream(Suite::Ramsey, ei as u64), r as u64);
                let res = partition::ramsey_subset(
                    &m,
                    eps,
                    derive_seed(cfg.seed, stream::TRIAL, r as u64),
                    DEFAULT_MAX_TRIALS,
                )?;
                sizes.push(res.subset.len() as f64);
                missed += res.target_missed as usize;
                let rho = oracles::ultrametric_matrix(&res.tree, n);
                let all: Vec<usize> = (0..n).collect();
                let (v, hi, _) = oracles::distortion_scan(
                    &m,
                    &rho,
                    &all,
                    res.subset.as_slice(),
                    partition::ramsey_distortion(eps),
                    REL_TOL,
                );
                violations += v;
                worst = worst.max(hi);
            }
            let (mean, _) = mean_and_error(&sizes);
            let name = format!("ramsey[n={n},eps={eps:.4}]");
            out.push(Check::at_least(format!("{name}.mean-subset-size"), mean, (n as f64).powf(1.0 - eps), 0.0));
            out.push(Check::none(format!("{name}.distortion-violations"), violations));
            out.push(Check::at_most(format!("{name}.worst-ratio"), worst, partition::ramsey_distortion(eps), 0.0));
            out.push(Check::at_most(format!("{name}.target-missed"), missed as f64, reps as f64, 0.0));
        }
    }
    Ok(out)
}

/// Ultrametric extension.
pub fn extension(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let reps = cfg.trials(200);
    let mut rng = rng_from_seed(cfg.stream(Suite::Extension, 0));
    let (mut not_ultra, mut below_d, mut above, mut not_triple, mut span) = (0, 0, 0, 0, 0);
    let mut worst = 0.0f64;
    for r in 0..reps {
        let n = cfg.n.unwrap_or_else(|| rng.random_range(2..=64));
        let m = instance_metric(n, cfg.stream(Suite::Extension, 1), r as u64);
        let y_size = if r % 10 == 0 { n } else { rng.random_range(1..=n) };
        let ys = PointSet::new(rand::seq::index::sample(&mut rng, n, y_size).into_vec());
        let sub = m.restrict(&ys)?;
        let local = match r % 3 {
            0 => tree::mst_ultrametric(&sub),
            1 => partition::partition_tree_to_hst(&partition::sample_partition_tree(&sub, 8.0, rng.random())?),
            _ => partition::partition_tree_to_hst(&partition::sample_partition_tree(&sub, 64.0, rng.random())?),
        };
        let t = local.rename_points(ys.as_slice())?;
        let rho = oracles::ultrametric_matrix(&t, n);
        // The smallest α for which the input satisfies d <= ρ <= α·d on Y.
        let mut alpha = 1.0f64;
        for a in ys.iter() {
            for b in ys.iter() {
                if a != b {
                    alpha = alpha.max(rho[a * n + b] / m.d(a, b));
                }
            }
        }
        let e = chain::extend_ultrametric(&m, &t, alpha)?;
        span += (e.points() != &PointSet::full(n)) as usize;
        let ext = oracles::ultrametric_matrix(&e, n);
        for x in 0..n {
            for y in 0..n {
                let (v, d) = (ext[x * n + y], m.d(x, y));
                if x != y && v < d * (1.0 - REL_TOL) {
                    below_d += 1;
                }
                if x != y && ys.contains(y) {
                    worst = worst.max(v / (alpha * d));
                    if v > chain::EXTENSION_FACTOR * alpha * d * (1.0 + REL_TOL) {
                        above += 1;
                    }
                }
                if ys.contains(x) && ys.contains(y) && v != 3.0 * rho[x * n + y] {
                    not_triple += 1;
                }
                for z in 0..n {
                    if ext[x * n + z] > ext[x * n + y].max(ext[y * n + z]) {
                        not_ultra += 1;
                    }
                }
            }
        }
    }
    Ok(vec![
        Check::none("extension.ultrametric-triples", not_ultra),
        Check::none("extension.dominates-d", below_d),
        Check::none("extension.distortion-6alpha", above),
        Check::at_most("extension.worst-ratio-over-alpha", worst, chain::EXTENSION_FACTOR, 0.0),
        Check::none("extension.triples-rho-on-y", not_triple),
        Check::none("extension.spans-x", span),
    ])
}

/// Chain moments, plus the chain's structural and distortion
/// invariants on every build.
pub fn moments(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let reps = cfg.trials(200);
    let mut out = Vec::new();
    for &k in &cfg.ks(&[2.0, 3.0]) {
        for &n in &cfg.sizes(&[64, 128]) {
            let ps = [0.0, 1.0, 2.0];
            let mut obs: Vec<Vec<f64>> = vec![Vec::with_capacity(reps); ps.len()];
            let (mut structural, mut distortion, mut stat_mismatch) = (0, 0, 0);
            for r in 0..reps {
                let m = instance_metric(n, cfg.stream(Suite::Moments, k.to_bits()), r as u64);
                let c = chain::build_chain(
                    &m,
                    k,
                    derive_seed(cfg.seed, stream::TRIAL, r as u64),
                    ChainMode::Restricted,
                    DEFAULT_MAX_TRIALS,
                )?;
                structural += chain_structure_violations(&c, n);
                distortion += restricted_distortion_violations(&m, &c);
                for (pi, &p) in ps.iter().enumerate() {
                    let direct: f64 = c.levels().iter().map(|l| (l.domain.len() as f64).powf(p)).sum();
                    let lib = chain::chain_moment_stat(&c, p)?;
                    stat_mismatch += (lib.observed != direct) as usize;
                    obs[pi].push(direct);
                }
            }
            let name = format!("moments[k={k},n={n}]");
            for (pi, &p) in ps.iter().enumerate() {
                let (mean, err) = mean_and_error(&obs[pi]);
                let bound = (k / (1.0 + p * k)).max(1.0) * (n as f64).powf(p + 1.0 / k);
                out.push(Check::at_most(format!("{name}.mean-sum-size-pow[p={p}]"), mean, bound, 3.0 * err));
            }
            out.push(Check::none(format!("{name}.chain-structure"), structural));
            out.push(Check::none(format!("{name}.restricted-distortion"), distortion));
            out.push(Check::none(format!("{name}.moment-stat-agrees"), stat_mismatch));
        }
    }
    Ok(out)
}

fn chain_structure_violations(c: &chain::RamseyChain, n: usize) -> usize {
    let mut bad = 0;
    let mut owner = vec![0usize; n];
    let mut survivors: Vec<usize> = (0..n).collect();
    for (j, l) in c.levels().iter().enumerate() {
        bad += (l.domain.as_slice() != survivors.as_slice()) as usize;
        bad += l.subset.is_empty() as usize;
        for y in l.subset.iter() {
            bad += (owner[y] != 0) as usize;
            owner[y] = j + 1;
        }
        survivors.retain(|&x| !l.subset.contains(x));
    }
    bad + survivors.len() + owner.iter().filter(|&&o| o == 0).count()
}

/// Pairs `(x ∈ X_{j-1}, y ∈ Y_j)` outside `d <= ρ_j <= 128k·d`.
fn restricted_distortion_violations(m: &MetricSpace, c: &chain::RamseyChain) -> usize {
    let n = m.len();
    c.levels()
        .iter()
        .map(|l| {
            let rho = oracles::ultrametric_matrix(&l.tree, n);
            oracles::distortion_scan(m, &rho, l.domain.as_slice(), l.subset.as_slice(), c.distortion(), REL_TOL).0
        })
        .sum()
}

/// Exhaustive all-pairs checks of one oracle.
fn oracle_checks(m: &MetricSpace, o: &OracleIndex, k: f64, name: &str) -> Result<Vec<Check>> {
    let n = m.len();
    let (mut violations, mut asym, mut over) = (0, 0, 0);
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in 0..n {
            let (e, cost) = o.query_counted(x, y)?;
            let d = m.d(x, y);
            over += (cost > oracle::QUERY_ACCESS_BOUND) as usize;
            if x == y {
                violations += (e != 0.0) as usize;
                continue;
            }
            worst = worst.max(e / d);
            violations += (e < d * (1.0 - REL_TOL) || e > 128.0 * k * d * (1.0 + REL_TOL)) as usize;
            asym += (e != o.query(y, x)?) as usize;
        }
    }
    let storage = o.stats().storage_leaves;
    let direct: usize = o.chain().levels().iter().map(|l| l.domain.len()).sum();
    Ok(vec![
        Check::none(format!("{name}.distortion-violations"), violations),
        Check::at_most(format!("{name}.worst-ratio"), worst, 128.0 * k, 0.0),
        Check::none(format!("{name}.asymmetric-pairs"), asym),
        Check::none(format!("{name}.over-access-bound"), over),
        Check::none(format!("{name}.storage-is-sum-of-domains"), storage.abs_diff(direct)),
    ])
}

/// Oracle distortion on all pairs and access counts. Each
/// configuration also checks an oracle over a peeling chain (one point per
/// level), which reaches the deep-level query paths.
pub fn oracle(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let mut out = Vec::new();
    for &k in &cfg.ks(&[2.0, 3.0]) {
        for &n in &cfg.sizes(&[64, 256]) {
            for i in 0..2u64 {
                let m = instance_metric(n, cfg.stream(Suite::Oracle, k.to_bits()), n as u64 + i);
                let o = oracle::build_oracle(&m, k, derive_seed(cfg.seed, stream::TRIAL, i))?;
                out.extend(oracle_checks(&m, &o, k, &format!("oracle[k={k},n={n},instance={i}]"))?);
            }
            let m = instance_metric(n, cfg.stream(Suite::Oracle, k.to_bits()), 5);
            let o = OracleIndex::from_chain(chain::build_peeling_chain(&m, k, cfg.seed, ChainMode::Restricted)?)?;
            out.extend(oracle_checks(&m, &o, k, &format!("oracle-peeling[k={k},n={n}]"))?);
        }
    }
    // Access counts at growing n.
    let sizes = cfg.sizes(&[16, 64, 256, 1024, 4096]);
    let queries = cfg.trials(100_000);
    for &k in &cfg.ks(&[2.0, 3.0, 10.0]) {
        for &n in &sizes {
            let m = MetricSpace::generate(MetricKind::Euclidean { dim: 2 }, n, cfg.stream(Suite::Oracle, n as u64))?;
            let o = oracle::build_oracle(&m, k, cfg.seed)?;
            let mut rng = rng_from_seed(cfg.stream(Suite::Oracle, 7 + n as u64));
            let mut max_cost = 0;
            for _ in 0..queries {
                let (x, y) = (rng.random_range(0..n), rng.random_range(0..n));
                max_cost = max_cost.max(o.query_counted(x, y)?.1);
            }
            out.push(Check::at_most(
                format!("oracle-access[k={k},n={n}].max-accesses"),
                max_cost as f64,
                oracle::QUERY_ACCESS_BOUND as f64,
                0.0,
            ));
        }
    }
    Ok(out)
}

#[derive(Default)]
struct RankingTally {
    not_bijective: usize,
    not_inverse: usize,
    monotonicity: usize,
    scan: usize,
    shape: usize,
    extension: usize,
    round_trip: usize,
    worst: f64,
}

impl RankingTally {
    fn add(&mut self, m: &MetricSpace, idx: &RankingIndex) -> Result<()> {
        let n = m.len();
        let chain = idx.chain();
        let bound = chain.distortion();
        let counts: Vec<Vec<usize>> = chain.levels().iter().map(|l| oracles::leaf_counts(&l.tree)).collect();
        let all: Vec<usize> = (0..n).collect();
        for l in chain.levels() {
            self.shape += (l.tree.has_unary() || !l.tree.is_binary()) as usize;
            let rho = oracles::ultrametric_matrix(&l.tree, n);
            self.extension += oracles::distortion_scan(m, &rho, &all, l.subset.as_slice(), bound, REL_TOL).0;
        }
        for x in 0..n {
            let j = idx.level_of(x) - 1;
            let perm = idx.permutation(x)?;
            let expect = oracles::scan_permutation(&chain.levels()[j].tree, &counts[j], x);
            self.scan += (perm != expect) as usize;
            let mut seen = vec![false; n];
            for &y in &perm {
                self.not_bijective += seen[y] as usize;
                seen[y] = true;
            }
            for (i, &y) in perm.iter().enumerate() {
                self.not_inverse += (idx.rank_of(x, y)? != i + 1) as usize;
            }
            for u in 0..n {
                self.not_inverse += (idx.rank_access(x, idx.rank_of(x, u)?)? != u) as usize;
            }
            // Each d(x, π(i)) against the minimum over later positions.
            let mut suffix_min = f64::INFINITY;
            for &y in perm.iter().rev() {
                let a = m.d(x, y);
                if a > 0.0 && suffix_min.is_finite() {
                    self.worst = self.worst.max(a / suffix_min);
                }
                self.monotonicity += (a > bound * suffix_min * (1.0 + REL_TOL)) as usize;
                suffix_min = suffix_min.min(a);
            }
        }
        self.monotonicity += idx.quality(m)?.violations;
        self.round_trip += (RankingIndex::parse(&idx.to_text())?.to_text() != idx.to_text()) as usize;
        Ok(())
    }

    fn checks(&self, name: &str, k: f64) -> Vec<Check> {
        vec![
            Check::none(format!("{name}.not-bijective"), self.not_bijective),
            Check::none(format!("{name}.not-mutually-inverse"), self.not_inverse),
            Check::none(format!("{name}.monotonicity-violations"), self.monotonicity),
            Check::at_most(format!("{name}.worst-ratio"), self.worst, 768.0 * k, 0.0),
            Check::none(format!("{name}.differs-from-root-path-scan"), self.scan),
            Check::none(format!("{name}.trees-not-binary"), self.shape),
            Check::none(format!("{name}.extended-distortion-violations"), self.extension),
            Check::none(format!("{name}.round-trip"), self.round_trip),
        ]
    }
}

/// Ranking bijection, inverse pair, monotonicity and
/// agreement with the root-path scan, on genuine and peeling chains.
pub fn ranking(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let reps = cfg.trials(6);
    let mut out = Vec::new();
    for &k in &cfg.ks(&[2.0]) {
        for &n in &cfg.sizes(&[2, 16, 64, 128]) {
            let mut tally = RankingTally::default();
            let mut peeling = RankingTally::default();
            for r in 0..reps {
                let m = instance_metric(n, cfg.stream(Suite::Ranking, n as u64), r as u64);
                let seed = derive_seed(cfg.seed, stream::TRIAL, r as u64);
                tally.add(&m, &ranking::build_ranking(&m, k, seed)?)?;
                if r < 2 {
                    let c = chain::build_peeling_chain(&m, k, seed, ChainMode::Extended)?;
                    peeling.add(&m, &RankingIndex::from_chain(c)?)?;
                }
            }
            out.extend(tally.checks(&format!("ranking[k={k},n={n}]"), k));
            out.extend(peeling.checks(&format!("ranking-peeling[k={k},n={n}]"), k));
        }
    }
    Ok(out)
}

/// Size-Ancestor (full and coarse) against the walk-up oracle.
pub fn size_ancestor(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let reps = cfg.trials(100);
    let mut rng = rng_from_seed(cfg.stream(Suite::SizeAncestor, 0));
    let (mut full_bad, mut coarse_bad, mut family_bad, mut queries) = (0usize, 0usize, 0usize, 0usize);
    for r in 0..reps {
        let leaves = cfg.n.unwrap_or_else(|| if r < 4 { 4096 } else { rng.random_range(1..=1024) });
        let shape = SHAPES[r % SHAPES.len()];
        let t = random_hst(leaves, shape, 0.5, rng.random());
        let idx = TreeQueryIndex::new(&t);
        let counts = oracles::leaf_counts(&t);
        let max_l = leaves + 3;
        let full = SizeAncestorIndex::build(&t, &idx)?;
        let coarse: Vec<CoarseSizeAncestor> =
            [1, 2, 8].iter().map(|&m| CoarseSizeAncestor::build(&t, &idx, m)).collect::<Result<_>>()?;
        for c in &coarse {
            let m = c.granularity();
            for i in 1..=leaves / m {
                for j in 1..=leaves.div_ceil(i * m) {
                    family_bad += (c.family(i, j).count() > 2) as usize;
                }
            }
        }
        for leaf in (0..t.vertex_count()).filter(|&v| t.is_leaf(v)) {
            let expect = oracles::walk_up_size_ancestor(&t, &counts, leaf, max_l);
            for (l, &want) in expect.iter().enumerate().skip(2) {
                full_bad += (full.query(&idx, leaf, l)? != want) as usize;
                queries += 1;
            }
            full_bad += (full.query(&idx, leaf, 1) != Err(Error::NoSuchAncestor)) as usize;
            for c in &coarse {
                let m = c.granularity();
                for l in 1..=max_l / m {
                    if l * m < 2 {
                        coarse_bad += (c.query(&idx, leaf, l) != Err(Error::NoSuchAncestor)) as usize;
                    } else {
                        coarse_bad += (c.query(&idx, leaf, l)? != expect[l * m]) as usize;
                    }
                }
            }
        }
    }
    Ok(vec![
        Check::none("size-ancestor.full-mismatches", full_bad),
        Check::none("size-ancestor.coarse-mismatches[m=1,2,8]", coarse_bad),
        Check::none("size-ancestor.family-sets-above-two", family_bad),
        Check::at_least("size-ancestor.queries-checked", queries as f64, 0.0, 0.0),
    ])
}

fn random_function(n: usize, target: &MetricSpace, style: usize, rng: &mut impl Rng) -> Result<TargetFunction> {
    let t = target.len();
    let image = match style % 4 {
        0 => vec![rng.random_range(0..t); n],
        1 => {
            let few: Vec<usize> = (0..3).map(|_| rng.random_range(0..t)).collect();
            (0..n).map(|_| few[rng.random_range(0..3)]).collect()
        }
        _ => (0..n).map(|_| rng.random_range(0..t)).collect(),
    };
    TargetFunction::new(target.clone(), image)
}

/// Lip-UM against the brute-force constant in the tree metric.
pub fn lip_um(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let reps = cfg.trials(200);
    let mut rng = rng_from_seed(cfg.stream(Suite::LipUm, 0));
    let target = grid_target(8);
    let (mut over, mut under) = (0, 0);
    let mut worst = 1.0f64;
    for r in 0..reps {
        let n = cfg.n.unwrap_or_else(|| rng.random_range(2..=256));
        let decay = [0.1, 0.5, 0.9, 1.0][r % 4];
        let mut t = random_hst(n, SHAPES[(r / 4) % SHAPES.len()], decay, rng.random());
        if r % 5 == 0 {
            // Exact 4-HST input.
            t = t.to_k_hst(4.0)?;
        }
        let f = random_function(n, &target, r, &mut rng)?;
        let rho = oracles::ultrametric_matrix(&t, n);
        let mut truth = 0.0f64;
        for x in 0..n {
            for y in x + 1..n {
                truth = truth.max(f.image_distance(x, y) / rho[x * n + y]);
            }
        }
        let a = lipschitz::lip_um(&t, &f)?.value;
        over += (a > truth * (1.0 + 1e-12)) as usize;
        under += (a < truth / lipschitz::LIP_UM_FACTOR * (1.0 - 1e-12)) as usize;
        if truth > 0.0 {
            worst = worst.max(truth / a);
        }
    }
    Ok(vec![
        Check::none("lip-um.overestimates", over),
        Check::none("lip-um.below-one-sixteenth", under),
        Check::at_most("lip-um.worst-underestimate-factor", worst, lipschitz::LIP_UM_FACTOR, 0.0),
    ])
}

/// Chain Lipschitz estimate against brute force on `d`.
pub fn chain_lip(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let reps = cfg.trials(100);
    let target = grid_target(8);
    let mut out = Vec::new();
    for &k in &cfg.ks(&[2.0, 3.0]) {
        let mut rng = rng_from_seed(cfg.stream(Suite::ChainLip, k.to_bits()));
        let (mut over, mut under) = (0, 0);
        let mut worst = 1.0f64;
        for r in 0..reps {
            let n = cfg.n.unwrap_or_else(|| rng.random_range(2..=128));
            let m = instance_metric(n, cfg.stream(Suite::ChainLip, 1 + k.to_bits()), r as u64);
            let f = random_function(n, &target, r, &mut rng)?;
            let mut truth = 0.0f64;
            for x in 0..n {
                for y in x + 1..n {
                    truth = truth.max(f.image_distance(x, y) / m.d(x, y));
                }
            }
            let c = chain::build_chain(&m, k, rng.random(), ChainMode::Restricted, DEFAULT_MAX_TRIALS)?;
            let est = lipschitz::lip_estimate(&c, &f)?;
            over += (est.value > truth * (1.0 + 1e-12)) as usize;
            under += (est.value < truth / (2048.0 * k) * (1.0 - 1e-12)) as usize;
            if truth > 0.0 {
                worst = worst.max(truth / est.value);
            }
        }
        let name = format!("chain-lip[k={k}]");
        out.push(Check::none(format!("{name}.overestimates"), over));
        out.push(Check::none(format!("{name}.below-1/2048k"), under));
        out.push(Check::at_most(format!("{name}.worst-underestimate-factor"), worst, 2048.0 * k, 0.0));
    }
    Ok(out)
}

/// Repeated builds and evaluations are byte-identical, and
/// serialized structures survive a round trip.
pub fn determinism(cfg: &EvalConfig) -> Result<Vec<Check>> {
    let n = cfg.n.unwrap_or(64);
    let k = cfg.k.unwrap_or(2.0);
    let seed = cfg.seed;
    let mut out = Vec::new();
    let same = |name: &str, a: String, b: String| Check::none(format!("determinism.{name}"), (a != b) as usize);

    let gen = || MetricSpace::generate(MetricKind::Euclidean { dim: 2 }, n, seed).map(|m| m.to_text());
    out.push(same("gen", gen()?, gen()?));
    let m = instance_metric(n, seed, 0);

    let rs = || partition::ramsey_subset(&m, 1.0 / k.max(1.5), seed, DEFAULT_MAX_TRIALS).map(|r| r.tree.to_text());
    out.push(same("ramsey-subset", rs()?, rs()?));
    for mode in [ChainMode::Restricted, ChainMode::Extended] {
        let build = || chain::build_chain(&m, k, seed, mode, DEFAULT_MAX_TRIALS).map(|c| c.to_text());
        let a = build()?;
        out.push(same(&format!("chain-{mode}"), a.clone(), build()?));
        out.push(same(&format!("chain-{mode}-round-trip"), chain::RamseyChain::parse(&a)?.to_text(), a));
    }
    let o = || oracle::build_oracle(&m, k, seed).map(|o| o.to_text());
    let a = o()?;
    out.push(same("oracle", a.clone(), o()?));
    out.push(same("oracle-round-trip", OracleIndex::parse(&a)?.to_text(), a));
    let r = || ranking::build_ranking(&m, k, seed).map(|r| r.to_text());
    let a = r()?;
    out.push(same("ranking", a.clone(), r()?));
    out.push(same("ranking-round-trip", RankingIndex::parse(&a)?.to_text(), a));

    let small = EvalConfig { seed, n: Some(n.min(16)), k: Some(k), trials: Some(3) };
    let ev = || -> Result<String> {
        let mut rep = run(Suite::Extension, &small)?;
        rep.extend(run(Suite::Padding, &small)?);
        rep.extend(run(Suite::ChainLip, &small)?);
        Ok(rep.to_text())
    };
    out.push(same("eval-report", ev()?, ev()?));
    let t = random_hst(n, TreeShape::Mixed, 0.5, seed);
    out.push(same("tree-round-trip", LabeledTree::parse(&t.to_text())?.to_text(), t.to_text()));
    Ok(out)
}
