//! Finite metric spaces given by an explicit distance matrix.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use rand::Rng;

use crate::error::{Error, Result};
use crate::rng::{rng_from_seed, uniform_real};
use crate::textio::{self, Lines};

/// Additive triangle-inequality slack, as a multiple of the diameter.
pub const TRIANGLE_TOLERANCE: f64 = 1e-9;

/// Sorted, duplicate-free set of point indices.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct PointSet(Vec<usize>);

impl PointSet {
    /// Sorts and deduplicates.
    pub fn new(mut members: Vec<usize>) -> Self {
        members.sort_unstable();
        members.dedup();
        PointSet(members)
    }

    pub fn from_sorted(members: Vec<usize>) -> Result<Self> {
        if members.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter("point set is not strictly increasing".into()));
        }
        Ok(PointSet(members))
    }

    pub fn full(n: usize) -> Self {
        PointSet((0..n).collect())
    }

    pub fn singleton(x: usize) -> Self {
        PointSet(vec![x])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, x: usize) -> bool {
        self.0.binary_search(&x).is_ok()
    }

    /// Rank of `x` inside the set, if present.
    pub fn index_of(&self, x: usize) -> Option<usize> {
        self.0.binary_search(&x).ok()
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().copied()
    }

    pub fn difference(&self, other: &PointSet) -> PointSet {
        PointSet(self.0.iter().copied().filter(|&x| !other.contains(x)).collect())
    }

    pub fn is_subset(&self, other: &PointSet) -> bool {
        self.0.iter().all(|&x| other.contains(x))
    }

    pub fn into_vec(self) -> Vec<usize> {
        self.0
    }
}

impl FromIterator<usize> for PointSet {
    fn from_iter<I: IntoIterator<Item = usize>>(iter: I) -> Self {
        PointSet::new(iter.into_iter().collect())
    }
}

/// How much of the metric axioms to verify on construction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Validation {
    /// Symmetry, zero diagonal, positivity and the cubic triangle scan.
    Full,
    /// Everything except the triangle scan; for inputs that are metric by
    /// construction (Euclidean coordinates, shortest-path closures).
    Structural,
}

/// An `n`-point metric space. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricSpace {
    n: usize,
    dist: Vec<f64>,
    diam: f64,
    min_pos: f64,
}

impl MetricSpace {
    pub fn from_matrix(n: usize, dist: Vec<f64>) -> Result<Self> {
        Self::from_matrix_with(n, dist, Validation::Full)
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::InvalidMetric("matrix is not square".into()));
        }
        Self::from_matrix(n, rows.into_iter().flatten().collect())
    }

    pub fn from_matrix_with(n: usize, dist: Vec<f64>, validation: Validation) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidMetric("empty metric space".into()));
        }
        if dist.len() != n * n {
            return Err(Error::InvalidMetric(format!("expected {} entries, found {}", n * n, dist.len())));
        }
        let mut diam = 0.0f64;
        let mut min_pos = f64::INFINITY;
        for i in 0..n {
            if dist[i * n + i] != 0.0 {
                return Err(Error::InvalidMetric(format!("d({i},{i}) is not zero")));
            }
            for j in (i + 1)..n {
                let a = dist[i * n + j];
                if !a.is_finite() || a < 0.0 {
                    return Err(Error::InvalidMetric(format!("d({i},{j}) = {a} is not a finite nonnegative value")));
                }
                if a != dist[j * n + i] {
                    return Err(Error::InvalidMetric(format!("asymmetric entry at ({i},{j})")));
                }
                if a == 0.0 {
                    return Err(Error::InvalidMetric(format!("distinct points {i} and {j} at distance 0")));
                }
                diam = diam.max(a);
                min_pos = min_pos.min(a);
            }
        }
        if n == 1 {
            min_pos = 0.0;
        }
        let m = MetricSpace { n, dist, diam, min_pos };
        if validation == Validation::Full {
            if let Some((i, j, k)) = m.triangle_violation() {
                return Err(Error::InvalidMetric(format!(
                    "triangle inequality fails: d({i},{j}) > d({i},{k}) + d({k},{j})"
                )));
            }
        }
        Ok(m)
    }

    /// First `(i, j, k)` with `d(i,j) > d(i,k) + d(k,j) + 1e-9·diam`.
    pub fn triangle_violation(&self) -> Option<(usize, usize, usize)> {
        let n = self.n;
        let tol = TRIANGLE_TOLERANCE * self.diam;
        for i in 0..n {
            let ri = self.row(i);
            for k in 0..n {
                let dik = ri[k] + tol;
                let rk = self.row(k);
                if let Some(j) = (0..n).find(|&j| ri[j] > dik + rk[j]) {
                    return Some((i, j, k));
                }
            }
        }
        None
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    #[inline]
    pub fn d(&self, i: usize, j: usize) -> f64 {
        self.dist[i * self.n + j]
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[f64] {
        &self.dist[i * self.n..(i + 1) * self.n]
    }

    pub fn diameter(&self) -> f64 {
        self.diam
    }

    /// Smallest distance between distinct points; 0 for a one-point space.
    pub fn min_positive_distance(&self) -> f64 {
        self.min_pos
    }

    /// `diam / min_pos`, and 1 for a one-point space.
    pub fn aspect_ratio(&self) -> f64 {
        if self.n == 1 {
            1.0
        } else {
            self.diam / self.min_pos
        }
    }

    /// Closed ball `{y : d(x,y) <= r}`.
    pub fn ball(&self, x: usize, r: f64) -> PointSet {
        PointSet(self.row(x).iter().enumerate().filter(|(_, &d)| d <= r).map(|(y, _)| y).collect())
    }

    pub fn ball_size(&self, x: usize, r: f64) -> usize {
        self.row(x).iter().filter(|&&d| d <= r).count()
    }

    /// The subspace on `subset`, re-indexed `0..subset.len()` in set order.
    pub fn restrict(&self, subset: &PointSet) -> Result<MetricSpace> {
        let pts = subset.as_slice();
        if let Some(&bad) = pts.iter().find(|&&p| p >= self.n) {
            return Err(Error::UnknownPoint(bad));
        }
        let k = pts.len();
        let mut dist = Vec::with_capacity(k * k);
        for &a in pts {
            let row = self.row(a);
            dist.extend(pts.iter().map(|&b| row[b]));
        }
        MetricSpace::from_matrix_with(k, dist, Validation::Structural)
    }

    /// Nearest point of `targets` to `x`; ties go to the lowest index.
    pub fn nearest_in(&self, x: usize, targets: &PointSet) -> Option<(usize, f64)> {
        let row = self.row(x);
        let mut best: Option<(usize, f64)> = None;
        for y in targets.iter() {
            let d = row[y];
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((y, d));
            }
        }
        best
    }

    pub fn to_text(&self) -> String {
        let mut s = String::with_capacity(self.n * self.n * 24 + 16);
        s.push_str(&self.n.to_string());
        s.push('\n');
        for i in 0..self.n {
            s.push_str(&textio::join_f64(self.row(i)));
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let (no, first) = lines.next_line()?;
        let n: usize = textio::parse_tok(first, no)?;
        let mut dist = Vec::with_capacity(n * n);
        for _ in 0..n {
            let (no, line) = lines.next_line()?;
            let toks: Vec<&str> = line.split_whitespace().collect();
            textio::expect_len(&toks, n, no, "matrix row")?;
            dist.extend(textio::parse_all::<f64>(&toks, no)?);
        }
        lines.finish()?;
        MetricSpace::from_matrix(n, dist)
    }

    pub fn load<R: Read>(mut reader: R) -> Result<Self> {
        let mut s = String::new();
        reader.read_to_string(&mut s)?;
        Self::parse(&s)
    }

    pub fn save<W: Write>(&self, mut writer: W) -> Result<()> {
        writer.write_all(self.to_text().as_bytes())?;
        Ok(())
    }

    /// Deterministic instance generator.
    pub fn generate(kind: MetricKind, n: usize, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("n must be at least 1".into()));
        }
        let mut rng = rng_from_seed(seed);
        match kind {
            MetricKind::Equilateral => {
                let dist = (0..n * n).map(|i| if i / n == i % n { 0.0 } else { 1.0 }).collect();
                MetricSpace::from_matrix_with(n, dist, Validation::Structural)
            }
            MetricKind::Euclidean { dim } => {
                if dim == 0 {
                    return Err(Error::InvalidParameter("dimension must be positive".into()));
                }
                let pts: Vec<f64> = (0..n * dim).map(|_| uniform_real(&mut rng, 0.0, 1.0)).collect();
                let mut dist = vec![0.0; n * n];
                for i in 0..n {
                    for j in (i + 1)..n {
                        let d = (0..dim).map(|c| (pts[i * dim + c] - pts[j * dim + c]).powi(2)).sum::<f64>().sqrt();
                        dist[i * n + j] = d;
                        dist[j * n + i] = d;
                    }
                }
                MetricSpace::from_matrix_with(n, dist, Validation::Structural)
            }
            MetricKind::Graph { edge_density } => {
                if !(0.0..=1.0).contains(&edge_density) {
                    return Err(Error::InvalidParameter("edge density must lie in [0,1]".into()));
                }
                // Integer weights keep every path length exact, so the
                // closure satisfies the triangle inequality with no slack.
                let mut dist = vec![f64::INFINITY; n * n];
                for i in 0..n {
                    dist[i * n + i] = 0.0;
                }
                let connect = |dist: &mut Vec<f64>, a: usize, b: usize, w: f64| {
                    let cur = dist[a * n + b];
                    dist[a * n + b] = cur.min(w);
                    dist[b * n + a] = cur.min(w);
                };
                for i in 1..n {
                    let j = rng.random_range(0..i);
                    let w = rng.random_range(1..=16u32) as f64;
                    connect(&mut dist, i, j, w);
                }
                for i in 0..n {
                    for j in (i + 1)..n {
                        if uniform_real(&mut rng, 0.0, 1.0) < edge_density {
                            let w = rng.random_range(1..=16u32) as f64;
                            connect(&mut dist, i, j, w);
                        }
                    }
                }
                shortest_path_closure(n, &mut dist);
                MetricSpace::from_matrix_with(n, dist, Validation::Structural)
            }
            MetricKind::UniformMatrix => {
                let mut dist = vec![0.0; n * n];
                for i in 0..n {
                    for j in (i + 1)..n {
                        let w = 1.0 - uniform_real(&mut rng, 0.0, 1.0) * 0.999;
                        dist[i * n + j] = w;
                        dist[j * n + i] = w;
                    }
                }
                shortest_path_closure(n, &mut dist);
                MetricSpace::from_matrix_with(n, dist, Validation::Structural)
            }
        }
    }
}

/// Floyd-Warshall in place, keeping the matrix exactly symmetric.
fn shortest_path_closure(n: usize, dist: &mut [f64]) {
    for k in 0..n {
        for i in 0..n {
            let dik = dist[i * n + k];
            if !dik.is_finite() {
                continue;
            }
            for j in 0..n {
                let via = dik + dist[k * n + j];
                if via < dist[i * n + j] {
                    dist[i * n + j] = via;
                }
            }
        }
    }
    for i in 0..n {
        for j in (i + 1)..n {
            let m = dist[i * n + j].min(dist[j * n + i]);
            dist[i * n + j] = m;
            dist[j * n + i] = m;
        }
    }
}

/// Generator families for [`MetricSpace::generate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MetricKind {
    /// Uniform points in the unit cube of the given dimension.
    Euclidean {
        dim: usize,
    },
    /// Shortest-path metric of a connected random graph with integer weights.
    Graph {
        edge_density: f64,
    },
    Equilateral,
    /// Random matrix in (0, 1] repaired by shortest-path closure.
    UniformMatrix,
}

impl FromStr for MetricKind {
    type Err = Error;

    /// `euclidean[:dim]`, `graph[:density]`, `equilateral`, `uniform`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, arg) = match s.split_once(':') {
            Some((a, b)) => (a, Some(b)),
            None => (s, None),
        };
        let bad = || Error::InvalidParameter(format!("unknown metric kind `{s}`"));
        match (name, arg) {
            ("euclidean", None) => Ok(MetricKind::Euclidean { dim: 2 }),
            ("euclidean", Some(d)) => Ok(MetricKind::Euclidean { dim: d.parse().map_err(|_| bad())? }),
            ("graph", None) => Ok(MetricKind::Graph { edge_density: 0.1 }),
            ("graph", Some(p)) => Ok(MetricKind::Graph { edge_density: p.parse().map_err(|_| bad())? }),
            ("equilateral", None) => Ok(MetricKind::Equilateral),
            ("uniform", None) | ("uniform_matrix", None) => Ok(MetricKind::UniformMatrix),
            _ => Err(bad()),
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            MetricKind::Euclidean { dim } => write!(f, "euclidean:{dim}"),
            MetricKind::Graph { edge_density } => write!(f, "graph:{edge_density}"),
            MetricKind::Equilateral => write!(f, "equilateral"),
            MetricKind::UniformMatrix => write!(f, "uniform"),
        }
    }
}
