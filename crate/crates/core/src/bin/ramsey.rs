use std::fs;
use std::io::{self, BufRead, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use ramsey_core::chain::{self, ChainMode, RamseyChain};
use ramsey_core::eval::{self, oracles, Check, EvalConfig, Report, Suite};
use ramsey_core::lipschitz::{self, TargetFunction};
use ramsey_core::oracle::{self, OracleIndex};
use ramsey_core::partition::{self, DEFAULT_MAX_TRIALS};
use ramsey_core::ranking::{self, RankingIndex};
use ramsey_core::{Error, LabeledTree, MetricKind, MetricSpace, Result};

#[derive(Parser)]
#[command(name = "ramsey", version, about = "Ramsey partitions, distance oracles and proximity rankings")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a random metric space.
    Gen {
        /// euclidean[:dim], graph[:density], equilateral or uniform.
        #[arg(long, default_value = "euclidean:2")]
        kind: MetricKind,
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Build a structure over a metric file and report its checks.
    Build {
        #[arg(long)]
        metric: PathBuf,
        #[arg(long, value_enum)]
        mode: BuildMode,
        #[arg(long, default_value_t = 2.0)]
        k: f64,
        /// Ramsey subset parameter, in (0, 1).
        #[arg(long, default_value_t = 0.5)]
        epsilon: f64,
        /// Padding parameter of a partition tree.
        #[arg(long, default_value_t = 8.0)]
        alpha: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Maximum Ramsey subset attempts per level.
        #[arg(long, default_value_t = DEFAULT_MAX_TRIALS)]
        trials: usize,
        /// Serialized structure; discarded when absent.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Answer requests against a serialized structure.
    ///
    /// Requests are read from stdin, one per line: `dist x y` on an oracle,
    /// `access x i` or `rank x y` on a ranking. With `--function`, prints
    /// the Lipschitz estimate of the function instead, using a restricted
    /// chain or a tree as the index.
    Query {
        #[arg(long)]
        index: PathBuf,
        /// Function file: a `n n'` header then the n images.
        #[arg(long, requires = "target")]
        function: Option<PathBuf>,
        /// Metric file of the function's target space.
        #[arg(long)]
        target: Option<PathBuf>,
    },
    /// Run evaluation suites and print their report.
    Eval {
        #[arg(long, default_value = "all")]
        suite: String,
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        k: Option<f64>,
        #[arg(long)]
        trials: Option<usize>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Report file, written in addition to stdout.
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum BuildMode {
    Oracle,
    Ranking,
    ChainRestricted,
    ChainExtended,
    Ramsey,
    PartitionTree,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Error::Io(format!("{}: {e}", p.display()))),
        None => Ok(io::stdout().write_all(text.as_bytes())?),
    }
}

/// Returns whether every check passed.
fn run(cmd: Command) -> Result<bool> {
    match cmd {
        Command::Gen { kind, n, seed, out } => {
            let m = MetricSpace::generate(kind, n, seed)?;
            write_out(out.as_deref(), &m.to_text())?;
            Ok(true)
        }
        Command::Build { metric, mode, k, epsilon, alpha, seed, trials, out } => {
            let m = MetricSpace::parse(&read(&metric)?)?;
            let (text, stats, checks) = build(&m, mode, k, epsilon, alpha, seed, trials)?;
            if let Some(p) = out.as_deref() {
                write_out(Some(p), &text)?;
            }
            let report = Report { checks };
            let mut stdout = io::stdout().lock();
            for (name, value) in stats {
                writeln!(stdout, "stat={name} value={value}")?;
            }
            stdout.write_all(report.to_text().as_bytes())?;
            Ok(report.passed())
        }
        Command::Query { index, function: Some(function), target } => {
            let target = MetricSpace::parse(&read(target.as_deref().expect("clap requires target"))?)?;
            let f = TargetFunction::parse(&read(&function)?, target)?;
            let text = read(&index)?;
            let est = match first_word(&text) {
                "chain" => lipschitz::lip_estimate(&RamseyChain::parse(&text)?, &f)?,
                "tree" => lipschitz::lip_um(&LabeledTree::parse(&text)?, &f)?,
                w => {
                    return Err(Error::InvalidParameter(format!(
                        "cannot estimate Lipschitz constants with a `{w}` index"
                    )))
                }
            };
            println!("lipschitz value={} lower_factor={}", est.value, est.lower_factor);
            Ok(true)
        }
        Command::Query { index, function: None, .. } => {
            let text = read(&index)?;
            let idx = match first_word(&text) {
                "oracle" => Index::Oracle(OracleIndex::parse(&text)?),
                "ranking" => Index::Ranking(RankingIndex::parse(&text)?),
                w => return Err(Error::InvalidParameter(format!("cannot query a `{w}` file"))),
            };
            let mut stdout = io::BufWriter::new(io::stdout().lock());
            for (no, line) in io::stdin().lock().lines().enumerate() {
                let line = line?;
                if line.trim().is_empty() {
                    continue;
                }
                let answer = idx.answer(&line).map_err(|e| match e {
                    Error::InvalidParameter(msg) => Error::Parse { line: no + 1, msg },
                    e => e,
                })?;
                writeln!(stdout, "{answer}")?;
            }
            stdout.flush()?;
            Ok(true)
        }
        Command::Eval { suite, n, k, trials, seed, out } => {
            let cfg = EvalConfig { seed, n, k, trials };
            let report = if suite == "all" { eval::run_all(&cfg)? } else { eval::run(suite.parse::<Suite>()?, &cfg)? };
            let text = report.to_text();
            print!("{text}");
            if let Some(p) = out.as_deref() {
                write_out(Some(p), &text)?;
            }
            Ok(report.passed())
        }
    }
}

fn first_word(text: &str) -> &str {
    text.split_whitespace().next().unwrap_or("")
}

enum Index {
    Oracle(OracleIndex),
    Ranking(RankingIndex),
}

impl Index {
    fn answer(&self, line: &str) -> Result<String> {
        let toks: Vec<&str> = line.split_whitespace().collect();
        let args: Vec<usize> = toks[1..]
            .iter()
            .map(|t| t.parse().map_err(|_| Error::InvalidParameter(format!("bad integer `{t}`"))))
            .collect::<Result<_>>()?;
        match (self, toks[0], args.as_slice()) {
            (Index::Oracle(o), "dist", &[x, y]) => Ok(o.query(x, y)?.to_string()),
            (Index::Ranking(r), "access", &[x, i]) => Ok(r.rank_access(x, i)?.to_string()),
            (Index::Ranking(r), "rank", &[x, y]) => Ok(r.rank_of(x, y)?.to_string()),
            _ => Err(Error::InvalidParameter(format!("unsupported request `{line}`"))),
        }
    }
}

type Built = (String, Vec<(&'static str, String)>, Vec<Check>);

fn build(
    m: &MetricSpace,
    mode: BuildMode,
    k: f64,
    epsilon: f64,
    alpha: f64,
    seed: u64,
    trials: usize,
) -> Result<Built> {
    let n = m.len();
    let all: Vec<usize> = (0..n).collect();
    match mode {
        BuildMode::Oracle => {
            let o = oracle::build_oracle(m, k, seed)?;
            let s = o.stats();
            let (mut lo, mut hi, mut asym) = (f64::INFINITY, 1.0f64, 0usize);
            for x in 0..n {
                for y in x + 1..n {
                    let e = o.query(x, y)?;
                    let r = e / m.d(x, y);
                    lo = lo.min(r);
                    hi = hi.max(r);
                    asym += (o.query(y, x)? != e) as usize;
                }
            }
            let lo = if lo.is_finite() { lo } else { 1.0 };
            let stats = vec![
                ("n", n.to_string()),
                ("levels", s.levels.to_string()),
                ("storage_leaves", s.storage_leaves.to_string()),
                ("index_words", s.index_words.to_string()),
            ];
            let checks = vec![
                Check::at_least("oracle.min-ratio", lo, 1.0, eval::REL_TOL),
                Check::at_most("oracle.max-ratio", hi, s.distortion_bound, 0.0),
                Check::none("oracle.asymmetric-pairs", asym),
                Check::at_most(
                    "oracle.max-accesses",
                    o.stats().max_accesses as f64,
                    oracle::QUERY_ACCESS_BOUND as f64,
                    0.0,
                ),
            ];
            Ok((o.to_text(), stats, checks))
        }
        BuildMode::Ranking => {
            let r = ranking::build_ranking(m, k, seed)?;
            let s = r.stats();
            let q = r.quality(m)?;
            let stats = vec![
                ("n", n.to_string()),
                ("levels", s.levels.to_string()),
                ("storage_leaves", s.storage_leaves.to_string()),
                ("index_words", s.index_words.to_string()),
            ];
            let checks = vec![
                Check::none("ranking.monotonicity-violations", q.violations),
                Check::at_most("ranking.max-ratio", q.max_ratio, q.bound, 0.0),
            ];
            Ok((r.to_text(), stats, checks))
        }
        BuildMode::ChainRestricted | BuildMode::ChainExtended => {
            let mode =
                if matches!(mode, BuildMode::ChainRestricted) { ChainMode::Restricted } else { ChainMode::Extended };
            let c = chain::build_chain(m, k, seed, mode, trials)?;
            let mut violations = 0;
            for l in c.levels() {
                let rho = oracles::ultrametric_matrix(&l.tree, n);
                violations += oracles::distortion_scan(
                    m,
                    &rho,
                    l.domain.as_slice(),
                    l.subset.as_slice(),
                    c.distortion(),
                    eval::REL_TOL,
                )
                .0;
            }
            let stats = vec![
                ("n", n.to_string()),
                ("levels", c.len().to_string()),
                ("storage_leaves", c.storage_leaves().to_string()),
                ("fallback_levels", c.levels().iter().filter(|l| l.fallback).count().to_string()),
            ];
            let checks = vec![Check::none(format!("chain-{mode}.distortion-violations"), violations)];
            Ok((c.to_text(), stats, checks))
        }
        BuildMode::Ramsey => {
            let res = partition::ramsey_subset(m, epsilon, seed, trials)?;
            let rho = oracles::ultrametric_matrix(&res.tree, n);
            let bound = partition::ramsey_distortion(epsilon);
            let (violations, hi, _) =
                oracles::distortion_scan(m, &rho, &all, res.subset.as_slice(), bound, eval::REL_TOL);
            let stats = vec![
                ("n", n.to_string()),
                ("subset_size", res.subset.len().to_string()),
                ("trials_used", res.trials_used.to_string()),
                ("target_missed", res.target_missed.to_string()),
            ];
            let checks = vec![
                Check::none("ramsey.distortion-violations", violations),
                Check::at_most("ramsey.max-ratio", hi, bound, 0.0),
            ];
            Ok((res.tree.to_text(), stats, checks))
        }
        BuildMode::PartitionTree => {
            let sample = partition::sample_partition_tree(m, alpha, seed)?;
            let padded = partition::padded_points(m, &sample);
            let t = partition::partition_tree_to_hst(&sample);
            let stats = vec![
                ("n", n.to_string()),
                ("depth", sample.depth().to_string()),
                ("padded_points", padded.len().to_string()),
            ];
            Ok((t.to_text(), stats, Vec::new()))
        }
    }
}
