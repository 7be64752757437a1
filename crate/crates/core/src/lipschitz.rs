//! Lipschitz constants of maps from a finite metric (or ultrametric) into
//! an explicit target metric.

use crate::chain::{ChainMode, RamseyChain};
use crate::error::{Error, Result};
use crate::metric::MetricSpace;
use crate::textio::{self, Lines};
use crate::tree::LabeledTree;

/// HST ratio Lip-UM works on.
pub const HST_BASE: f64 = 4.0;
/// Lip-UM underestimates by at most this factor.
pub const LIP_UM_FACTOR: f64 = 16.0;

/// A map `f` from source points `0..n` into the points of `target`.
#[derive(Debug, Clone, PartialEq)]
pub struct TargetFunction {
    target: MetricSpace,
    image: Vec<usize>,
}

impl TargetFunction {
    pub fn new(target: MetricSpace, image: Vec<usize>) -> Result<Self> {
        if let Some(&bad) = image.iter().find(|&&y| y >= target.len()) {
            return Err(Error::InvalidParameter(format!("image point {bad} is outside the target space")));
        }
        Ok(TargetFunction { target, image })
    }

    pub fn target(&self) -> &MetricSpace {
        &self.target
    }

    pub fn image(&self) -> &[usize] {
        &self.image
    }

    pub fn source_len(&self) -> usize {
        self.image.len()
    }

    /// `d_Y(f(x), f(y))`.
    pub fn image_distance(&self, x: usize, y: usize) -> f64 {
        self.target.d(self.image[x], self.image[y])
    }

    /// Line 1: source and target sizes; line 2: the images.
    pub fn to_text(&self) -> String {
        format!("{} {}\n{}\n", self.image.len(), self.target.len(), textio::join_usize(&self.image))
    }

    pub fn parse(text: &str, target: MetricSpace) -> Result<Self> {
        let mut lines = Lines::new(text);
        let (no, head) = lines.next_line()?;
        let sizes: Vec<usize> = textio::parse_all(&head.split_whitespace().collect::<Vec<_>>(), no)?;
        textio::expect_len(&sizes, 2, no, "function header")?;
        if sizes[1] != target.len() {
            return Err(Error::Parse {
                line: no,
                msg: format!("header names {} target points but the target metric has {}", sizes[1], target.len()),
            });
        }
        let image: Vec<usize> = if sizes[0] == 0 {
            Vec::new()
        } else {
            let (no, body) = lines.next_line()?;
            let image = textio::parse_all(&body.split_whitespace().collect::<Vec<_>>(), no)?;
            textio::expect_len(&image, sizes[0], no, "images")?;
            image
        };
        lines.finish()?;
        TargetFunction::new(target, image).map_err(|e| Error::Parse { line: 2, msg: e.to_string() })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LipEstimate {
    /// The estimate `A`, never above the true constant.
    pub value: f64,
    /// `A >= ‖f‖ / lower_factor` is guaranteed.
    pub lower_factor: f64,
}

fn check_domain(n: usize, f: &TargetFunction) -> Result<()> {
    if f.source_len() != n {
        return Err(Error::InvalidParameter(format!(
            "function is defined on {} points, the source has {n}",
            f.source_len()
        )));
    }
    Ok(())
}

/// `max_{x≠y} d_Y(f(x), f(y)) / d(x, y)`; 0 when there is no pair.
pub fn brute_lipschitz(m: &MetricSpace, f: &TargetFunction) -> Result<f64> {
    check_domain(m.len(), f)?;
    let mut best = 0.0f64;
    for x in 0..m.len() {
        for y in x + 1..m.len() {
            best = best.max(f.image_distance(x, y) / m.d(x, y));
        }
    }
    Ok(best)
}

/// The same maximum with distances taken in the ultrametric of `t`.
pub fn brute_lipschitz_tree(t: &LabeledTree, f: &TargetFunction) -> Result<f64> {
    let pts = t.points().as_slice();
    check_points(t, f)?;
    let mut best = 0.0f64;
    for (i, &x) in pts.iter().enumerate() {
        for &y in &pts[i + 1..] {
            best = best.max(f.image_distance(x, y) / t.tree_distance(x, y)?);
        }
    }
    Ok(best)
}

fn check_points(t: &LabeledTree, f: &TargetFunction) -> Result<()> {
    match t.points().as_slice().last() {
        Some(&p) if p >= f.source_len() => Err(Error::UnknownPoint(p)),
        _ => Ok(()),
    }
}

/// Lip-UM: on the 4-HST version of `t`, compare the representative
/// (leftmost leaf) of every non-first child of each vertex `u` with that of
/// the first child, scaled by `Δ(u)`. One pass over the vertices.
///
/// Rounding labels up onto a ratio-4 grid costs at most a factor 4 and the pass
/// itself at most 8/3, so `‖f‖_ρ / 16 <= A <= ‖f‖_ρ`.
pub fn lip_um(t: &LabeledTree, f: &TargetFunction) -> Result<LipEstimate> {
    check_points(t, f)?;
    let h = t.to_k_hst(HST_BASE)?;
    let v_count = h.vertex_count();
    let mut rep = vec![0usize; v_count];
    // Children have larger ids than their parents.
    for v in (0..v_count).rev() {
        rep[v] = match h.point_of(v) {
            Some(p) => p,
            None => rep[h.children(v)[0]],
        };
    }
    let mut value = 0.0f64;
    for u in 0..v_count {
        let kids = h.children(u);
        if let Some((&first, rest)) = kids.split_first() {
            let a = f.image[rep[first]];
            for &c in rest {
                value = value.max(f.target.d(a, f.image[rep[c]]) / h.label(u));
            }
        }
    }
    Ok(LipEstimate { value, lower_factor: LIP_UM_FACTOR })
}

/// Maximum of [`lip_um`] over the trees of a restricted chain, each on
/// `X_{j-1}` with `f` restricted there. `‖f‖ / (16·128k) <= A <= ‖f‖`.
pub fn lip_estimate(chain: &RamseyChain, f: &TargetFunction) -> Result<LipEstimate> {
    if chain.mode() != ChainMode::Restricted {
        return Err(Error::InvalidParameter("Lipschitz estimation needs a restricted-mode chain".into()));
    }
    check_domain(chain.point_count(), f)?;
    let mut value = 0.0f64;
    for l in chain.levels() {
        value = value.max(lip_um(&l.tree, f)?.value);
    }
    Ok(LipEstimate { value, lower_factor: LIP_UM_FACTOR * chain.distortion() })
}

/// Work done by [`lip_estimate`]: `Σ_j |X_{j-1}|`.
pub fn lip_estimate_work(chain: &RamseyChain) -> usize {
    chain.levels().iter().map(|l| l.domain.len()).sum()
}
