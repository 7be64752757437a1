//! Vertex-labeled rooted trees representing ultrametrics (HSTs), and the
//! query indices built over them.
//!
//! A [`LabeledTree`] is stored in canonical form: vertices are numbered in
//! preorder (root = 0, every parent id smaller than its children's ids) and
//! each child list is increasing. Every constructor renumbers into this form,
//! so a tree rebuilt from its own parent array is identical to the original.

mod mst;
mod query;
mod size_ancestor;
mod transform;

pub use mst::mst_ultrametric;
pub use query::TreeQueryIndex;
pub use size_ancestor::{CoarseSizeAncestor, SizeAncestorIndex};

use crate::error::{Error, Result};
use crate::metric::PointSet;
use crate::textio::{self, Lines};

pub(crate) const NONE: usize = usize::MAX;

#[derive(Debug, Clone, PartialEq)]
pub struct LabeledTree {
    parent: Vec<usize>,
    child_start: Vec<usize>,
    child_list: Vec<usize>,
    label: Vec<f64>,
    point_of: Vec<usize>,
    points: PointSet,
    leaf_of: Vec<usize>,
}

impl LabeledTree {
    /// Validates and canonicalizes. `parents[v]` is `None` exactly for the
    /// root; `labels[v]` must be positive for internal vertices and 0 for
    /// leaves; `leaf_points` pairs every leaf vertex with a distinct point.
    pub fn new(parents: &[Option<usize>], labels: &[f64], leaf_points: &[(usize, usize)]) -> Result<Self> {
        let v_count = parents.len();
        if v_count == 0 {
            return Err(Error::InvalidTree("tree has no vertices".into()));
        }
        if labels.len() != v_count {
            return Err(Error::InvalidTree("label count differs from vertex count".into()));
        }
        let mut root = None;
        let mut kids: Vec<Vec<usize>> = vec![Vec::new(); v_count];
        for (v, p) in parents.iter().enumerate() {
            match *p {
                None if root.is_some() => return Err(Error::InvalidTree("more than one root".into())),
                None => root = Some(v),
                Some(p) if p >= v_count => {
                    return Err(Error::InvalidTree(format!("parent {p} of vertex {v} out of range")))
                }
                Some(p) => kids[p].push(v),
            }
        }
        let root = root.ok_or_else(|| Error::InvalidTree("no root".into()))?;

        // Preorder renumbering; detects cycles as unreachable vertices.
        let mut order = Vec::with_capacity(v_count);
        let mut stack = vec![root];
        while let Some(v) = stack.pop() {
            order.push(v);
            stack.extend(kids[v].iter().rev());
        }
        if order.len() != v_count {
            return Err(Error::InvalidTree("cycle detected or vertices unreachable from the root".into()));
        }
        let mut new_id = vec![NONE; v_count];
        for (i, &v) in order.iter().enumerate() {
            new_id[v] = i;
        }

        let mut point_at_old = vec![NONE; v_count];
        for &(v, p) in leaf_points {
            if v >= v_count {
                return Err(Error::InvalidTree(format!("leaf vertex {v} out of range")));
            }
            if !kids[v].is_empty() {
                return Err(Error::InvalidTree(format!("vertex {v} mapped to a point but has children")));
            }
            if point_at_old[v] != NONE {
                return Err(Error::InvalidTree(format!("leaf {v} mapped twice")));
            }
            point_at_old[v] = p;
        }

        let mut parent = vec![NONE; v_count];
        let mut label = vec![0.0; v_count];
        let mut point_of = vec![NONE; v_count];
        let mut child_start = Vec::with_capacity(v_count + 1);
        let mut child_list = Vec::with_capacity(v_count.saturating_sub(1));
        for (i, &v) in order.iter().enumerate() {
            if let Some(p) = parents[v] {
                parent[i] = new_id[p];
            }
            label[i] = labels[v];
            point_of[i] = point_at_old[v];
            child_start.push(child_list.len());
            child_list.extend(kids[v].iter().map(|&c| new_id[c]));
        }
        child_start.push(child_list.len());

        let mut pairs = Vec::new();
        for i in 0..v_count {
            let is_leaf = child_start[i] == child_start[i + 1];
            let l = label[i];
            if is_leaf {
                if point_of[i] == NONE {
                    return Err(Error::InvalidTree(format!("leaf {} has no point", order[i])));
                }
                if l != 0.0 {
                    return Err(Error::InvalidTree(format!("leaf {} has nonzero label", order[i])));
                }
                pairs.push((point_of[i], i));
            } else if !(l.is_finite() && l > 0.0) {
                return Err(Error::InvalidTree(format!("internal vertex {} needs a positive label", order[i])));
            }
            if parent[i] != NONE && l > label[parent[i]] {
                return Err(Error::InvalidTree(format!("label inversion: vertex {} exceeds its parent", order[i])));
            }
        }
        pairs.sort_unstable();
        if pairs.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(Error::InvalidTree("a point is mapped to two leaves".into()));
        }
        let points = PointSet::from_sorted(pairs.iter().map(|p| p.0).collect())?;
        let leaf_of = pairs.iter().map(|p| p.1).collect();
        Ok(LabeledTree { parent, child_start, child_list, label, point_of, points, leaf_of })
    }

    /// Leaves, taken in increasing vertex order, receive the members of
    /// `points` in increasing order.
    pub fn build(parents: &[Option<usize>], labels: &[f64], points: &PointSet) -> Result<Self> {
        let mut has_child = vec![false; parents.len()];
        for p in parents.iter().flatten() {
            if *p < parents.len() {
                has_child[*p] = true;
            }
        }
        let leaves: Vec<usize> = (0..parents.len()).filter(|&v| !has_child[v]).collect();
        if leaves.len() != points.len() {
            return Err(Error::InvalidTree(format!("{} leaves but {} points", leaves.len(), points.len())));
        }
        let map: Vec<(usize, usize)> = leaves.into_iter().zip(points.iter()).collect();
        Self::new(parents, labels, &map)
    }

    /// One leaf, no internal vertices.
    pub fn singleton(point: usize) -> Self {
        Self::new(&[None], &[0.0], &[(0, point)]).expect("singleton tree is valid")
    }

    pub fn vertex_count(&self) -> usize {
        self.parent.len()
    }

    pub fn root(&self) -> usize {
        0
    }

    pub fn parent(&self, v: usize) -> Option<usize> {
        match self.parent[v] {
            NONE => None,
            p => Some(p),
        }
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.child_list[self.child_start[v]..self.child_start[v + 1]]
    }

    pub fn is_leaf(&self, v: usize) -> bool {
        self.child_start[v] == self.child_start[v + 1]
    }

    pub fn label(&self, v: usize) -> f64 {
        self.label[v]
    }

    pub fn labels(&self) -> &[f64] {
        &self.label
    }

    pub fn point_of(&self, v: usize) -> Option<usize> {
        match self.point_of[v] {
            NONE => None,
            p => Some(p),
        }
    }

    pub fn leaf_of(&self, point: usize) -> Option<usize> {
        self.points.index_of(point).map(|i| self.leaf_of[i])
    }

    pub fn points(&self) -> &PointSet {
        &self.points
    }

    pub fn leaf_count(&self) -> usize {
        self.points.len()
    }

    pub fn depths(&self) -> Vec<usize> {
        let mut depth = vec![0; self.vertex_count()];
        for v in 1..self.vertex_count() {
            depth[v] = depth[self.parent[v]] + 1;
        }
        depth
    }

    /// Lowest common ancestor by walking parent pointers.
    pub fn lca_walk(&self, mut u: usize, mut v: usize) -> usize {
        // Preorder ids: an ancestor always has the smaller id.
        while u != v {
            if u > v {
                u = self.parent[u];
            } else {
                v = self.parent[v];
            }
        }
        u
    }

    /// `Δ(lca(x, y))`, or 0 when `x == y`.
    pub fn tree_distance(&self, x: usize, y: usize) -> Result<f64> {
        let a = self.leaf_of(x).ok_or(Error::UnknownPoint(x))?;
        let b = self.leaf_of(y).ok_or(Error::UnknownPoint(y))?;
        Ok(if a == b { 0.0 } else { self.label[self.lca_walk(a, b)] })
    }

    pub fn has_unary(&self) -> bool {
        (0..self.vertex_count()).any(|v| self.children(v).len() == 1)
    }

    pub fn is_binary(&self) -> bool {
        (0..self.vertex_count()).all(|v| matches!(self.children(v).len(), 0 | 2))
    }

    /// Every child's label is at most its parent's divided by `k`, up to a
    /// relative `1e-12` for labels computed as powers of `k`.
    pub fn is_k_hst(&self, k: f64) -> bool {
        (1..self.vertex_count())
            .filter(|&v| !self.is_leaf(v))
            .all(|v| self.label[v] * k <= self.label[self.parent[v]] * (1.0 + 1e-12))
    }

    /// Same shape, every label multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> LabeledTree {
        let mut t = self.clone();
        for l in &mut t.label {
            *l *= factor;
        }
        t
    }

    /// Same shape with point `p` renamed to `names[p]`.
    pub fn rename_points(&self, names: &[usize]) -> Result<LabeledTree> {
        let mut pairs = self.leaf_pairs();
        for (_, p) in &mut pairs {
            *p = *names.get(*p).ok_or(Error::UnknownPoint(*p))?;
        }
        LabeledTree::new(&self.parent_vec(), &self.label, &pairs)
    }

    pub(crate) fn parent_vec(&self) -> Vec<Option<usize>> {
        (0..self.vertex_count()).map(|v| self.parent(v)).collect()
    }

    pub(crate) fn leaf_pairs(&self) -> Vec<(usize, usize)> {
        self.points.iter().zip(self.leaf_of.iter()).map(|(p, &v)| (v, p)).collect()
    }

    pub fn to_text(&self) -> String {
        let parents: Vec<String> =
            self.parent.iter().map(|&p| if p == NONE { "-1".to_string() } else { p.to_string() }).collect();
        let mut leaves: Vec<(usize, usize)> = self.leaf_pairs();
        leaves.sort_unstable();
        let leaves: Vec<String> = leaves.iter().map(|(v, p)| format!("{v}:{p}")).collect();
        format!(
            "tree {}\nparents {}\nlabels {}\nleaves {}\n",
            self.vertex_count(),
            parents.join(" "),
            textio::join_f64(&self.label),
            leaves.join(" ")
        )
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = Lines::new(text);
        let t = Self::read(&mut lines)?;
        lines.finish()?;
        Ok(t)
    }

    pub(crate) fn read(lines: &mut Lines<'_>) -> Result<Self> {
        let (no, toks) = lines.keyed("tree")?;
        textio::expect_len(&toks, 1, no, "tree header")?;
        let v: usize = textio::parse_tok(toks[0], no)?;
        let (no, toks) = lines.keyed("parents")?;
        textio::expect_len(&toks, v, no, "parents")?;
        let raw: Vec<i64> = textio::parse_all(&toks, no)?;
        let parents: Vec<Option<usize>> = raw.iter().map(|&p| usize::try_from(p).ok()).collect();
        let (no, toks) = lines.keyed("labels")?;
        textio::expect_len(&toks, v, no, "labels")?;
        let labels: Vec<f64> = textio::parse_all(&toks, no)?;
        let (no, toks) = lines.keyed("leaves")?;
        let leaves = toks
            .iter()
            .map(|t| {
                let (a, b) =
                    t.split_once(':').ok_or_else(|| Error::Parse { line: no, msg: format!("bad leaf entry `{t}`") })?;
                Ok((textio::parse_tok(a, no)?, textio::parse_tok(b, no)?))
            })
            .collect::<Result<Vec<(usize, usize)>>>()?;
        LabeledTree::new(&parents, &labels, &leaves).map_err(|e| Error::Parse { line: no, msg: e.to_string() })
    }
}

/// Incremental construction; [`TreeBuilder::finish`] canonicalizes.
#[derive(Debug, Default, Clone)]
pub(crate) struct TreeBuilder {
    parent: Vec<Option<usize>>,
    label: Vec<f64>,
    leaves: Vec<(usize, usize)>,
}

impl TreeBuilder {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn internal(&mut self, parent: Option<usize>, label: f64) -> usize {
        self.parent.push(parent);
        self.label.push(label);
        self.parent.len() - 1
    }

    pub fn leaf(&mut self, parent: Option<usize>, point: usize) -> usize {
        let v = self.internal(parent, 0.0);
        self.leaves.push((v, point));
        v
    }

    pub fn set_parent(&mut self, v: usize, parent: Option<usize>) {
        self.parent[v] = parent;
    }

    pub fn set_label(&mut self, v: usize, label: f64) {
        self.label[v] = label;
    }

    pub fn finish(self) -> Result<LabeledTree> {
        LabeledTree::new(&self.parent, &self.label, &self.leaves)
    }
}
