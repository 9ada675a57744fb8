//! Attention artifacts derived from an optimized encoding tree: per-level
//! boolean masks, the adjacency mask, head assignments, and the hierarchical
//! correlation score matrix.
//!
//! A tree of height `h` yields `h − 1` community masks (one per internal
//! level, coarse to fine) plus one adjacency mask, `L = h` masks in total.
//! The first `L` attention heads each get one mask; the remaining heads run
//! unmasked, which is why configurations must satisfy `heads > L`.
//!
//! The score matrix walks, for every ordered leaf pair `(i, j)`, the tree
//! path `leaf(i) → lowest common ancestor → leaf(j)` and sums relative
//! entropies: each upward edge contributes `H(parent)/H(child)`, each
//! downward edge `H(child)/H(parent)`, where `H` is the node's structural-
//! entropy contribution — the root standing in with the tree's total
//! entropy — and both sides of every ratio are floored at [`SCORE_EPS`].

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::tree::{node_entropy, structural_entropy, EncodingTree, NodeId};

/// Floor applied to node entropies before forming ratios, so zero-cut
/// communities yield finite scores.
pub const SCORE_EPS: f64 = 1e-12;

/// Where a mask came from.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum MaskSource {
    /// Communities at this tree depth (1 = children of the root).
    TreeLevel(usize),
    /// Direct graph neighbourhood (plus self).
    Adjacency,
}

impl std::fmt::Display for MaskSource {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            MaskSource::TreeLevel(l) => write!(f, "tree-level-{l}"),
            MaskSource::Adjacency => write!(f, "adjacency"),
        }
    }
}

/// A boolean N×N attention mask: `allow[i, j]` says head logits for the
/// pair may survive. Always symmetric with a true diagonal.
#[derive(Debug, Clone)]
pub struct LevelMask {
    pub source: MaskSource,
    pub allow: Array2<bool>,
}

/// The ordered mask list (coarse → fine → adjacency) and the per-head
/// assignment: head `i` uses `masks[head_assignment[i]]`, or no mask at all
/// for `None`.
#[derive(Debug, Clone)]
pub struct MaskSet {
    pub masks: Vec<LevelMask>,
    pub head_assignment: Vec<Option<usize>>,
}

impl MaskSet {
    /// Number of masks, `L`.
    pub fn len(&self) -> usize {
        self.masks.len()
    }

    pub fn is_empty(&self) -> bool {
        self.masks.is_empty()
    }
}

/// Hierarchical correlation scores: an additive attention bias per ordered
/// vertex pair. Generally asymmetric; exactly zero on the diagonal.
#[derive(Debug, Clone)]
pub struct HierScore {
    pub s: Array2<f64>,
}

/// Direction of one step along a tree path.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepDirection {
    /// Child toward parent: contributes `H(parent)/H(child)`.
    Up,
    /// Parent toward child: contributes `H(child)/H(parent)`.
    Down,
}

/// The mask at tree level `l`: vertices are allowed to attend iff they share
/// a community at that depth (with shallow leaves completing the partition
/// as singletons). Valid strictly between the root and the leaves:
/// `0 < l < height`.
pub fn level_mask(t: &EncodingTree, l: usize, n: usize) -> Result<LevelMask> {
    if n != t.n() {
        return Err(Error::DimMismatch {
            stage: "level_mask".into(),
            msg: format!("mask size {n} does not match the tree's {} vertices", t.n()),
        });
    }
    let height = t.height();
    if l == 0 || l >= height {
        return Err(Error::Precondition(format!(
            "mask level {l} out of range: tree of height {height} has community levels 1..{height} \
             (the leaf level is excluded)"
        )));
    }
    let mut allow = Array2::from_elem((n, n), false);
    for block in t.level_partition(l)? {
        for &i in &block {
            for &j in &block {
                allow[[i as usize, j as usize]] = true;
            }
        }
    }
    Ok(LevelMask {
        source: MaskSource::TreeLevel(l),
        allow,
    })
}

/// The edge-level mask: self-pairs plus any pair connected in either
/// direction of the original (possibly directed) adjacency.
pub fn adjacency_mask(g: &Graph) -> LevelMask {
    let n = g.n();
    let adj = g.adjacency();
    let mut allow = Array2::from_elem((n, n), false);
    for i in 0..n {
        allow[[i, i]] = true;
        for j in 0..n {
            if adj[[i, j]] > 0.0 || adj[[j, i]] > 0.0 {
                allow[[i, j]] = true;
            }
        }
    }
    LevelMask {
        source: MaskSource::Adjacency,
        allow,
    }
}

/// Assemble the full mask set for `heads` attention heads: tree levels
/// coarse→fine, then the adjacency mask; heads beyond the mask count run
/// unmasked. Fails (as a constraint violation, so callers can report `L`)
/// unless `heads > L`.
pub fn build_mask_set(t: &EncodingTree, g: &Graph, heads: usize) -> Result<MaskSet> {
    if t.n() != g.n() {
        return Err(Error::DimMismatch {
            stage: "build_mask_set".into(),
            msg: format!("tree over {} vertices, graph has {}", t.n(), g.n()),
        });
    }
    let height = t.height();
    let mut masks = Vec::with_capacity(height);
    for l in 1..height {
        masks.push(level_mask(t, l, t.n())?);
    }
    masks.push(adjacency_mask(g));
    let l_count = masks.len();
    if heads <= l_count {
        return Err(Error::Constraint(format!(
            "{heads} attention heads cannot host {l_count} masks: heads must exceed L = {l_count} \
             (cap the tree height or raise the head count)"
        )));
    }
    let head_assignment = (0..heads)
        .map(|h| if h < l_count { Some(h) } else { None })
        .collect();
    Ok(MaskSet {
        masks,
        head_assignment,
    })
}

/// Structural-entropy contribution of each live node, with the root standing
/// in with the total: index by node id.
fn node_entropies(g: &Graph, t: &EncodingTree) -> Result<Vec<f64>> {
    let mut h = vec![0.0; t.arena_len()];
    for id in t.node_ids() {
        h[id] = if id == t.root() {
            structural_entropy(g, t)?
        } else {
            node_entropy(g, t, id)?
        };
    }
    Ok(h)
}

#[inline]
fn floored_ratio(num: f64, den: f64) -> f64 {
    num.max(SCORE_EPS) / den.max(SCORE_EPS)
}

/// One relative-entropy step across the edge between `child` and its parent.
pub fn relative_entropy_step(
    g: &Graph,
    t: &EncodingTree,
    child: NodeId,
    direction: StepDirection,
) -> Result<f64> {
    let parent = t
        .node(child)?
        .parent()
        .ok_or_else(|| Error::Precondition("relative entropy steps start below the root".into()))?;
    let h_child = node_entropy(g, t, child)?;
    let h_parent = if parent == t.root() {
        structural_entropy(g, t)?
    } else {
        node_entropy(g, t, parent)?
    };
    Ok(match direction {
        StepDirection::Up => floored_ratio(h_parent, h_child),
        StepDirection::Down => floored_ratio(h_child, h_parent),
    })
}

/// The full correlation matrix: path sums of relative-entropy steps through
/// the lowest common ancestor, zero on the diagonal. The tree must validate
/// against the graph.
pub fn hier_score(g: &Graph, t: &EncodingTree) -> Result<HierScore> {
    let report = t.validate(g);
    if !report.ok() {
        return Err(Error::InvalidTree(format!(
            "tree fails validation: {}",
            report
                .violations
                .iter()
                .map(|v| v.detail.as_str())
                .collect::<Vec<_>>()
                .join("; ")
        )));
    }
    let n = t.n();
    let h = node_entropies(g, t)?;

    // Leaf-to-root paths, leaf first.
    let mut paths: Vec<Vec<NodeId>> = Vec::with_capacity(n);
    for v in 0..n {
        let mut path = Vec::new();
        let mut cur = t
            .leaf(v as u32)
            .ok_or_else(|| Error::InvalidTree(format!("vertex {v} has no leaf")))?;
        path.push(cur);
        while let Some(p) = t.node(cur)?.parent() {
            path.push(p);
            cur = p;
        }
        paths.push(path);
    }

    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let (pi, pj) = (&paths[i], &paths[j]);
            // LCA: deepest node common to both root-ward paths. Compare from
            // the root ends, which are aligned.
            let mut ai = pi.len();
            let mut aj = pj.len();
            while ai > 0 && aj > 0 && pi[ai - 1] == pj[aj - 1] {
                ai -= 1;
                aj -= 1;
            }
            // pi[ai] == pj[aj] is the LCA.
            let mut total = 0.0;
            for step in 0..ai {
                total += floored_ratio(h[pi[step + 1]], h[pi[step]]);
            }
            for step in (0..aj).rev() {
                total += floored_ratio(h[pj[step]], h[pj[step + 1]]);
            }
            s[[i, j]] = total;
        }
    }
    Ok(HierScore { s })
}
