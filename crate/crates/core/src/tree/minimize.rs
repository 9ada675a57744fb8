//! Greedy structural-entropy minimization.
//!
//! Starting from the flat tree, every unordered sibling pair under every
//! internal node is priced for both operators; the single application with
//! the most negative entropy change is applied; repeat until no application
//! improves by more than the tolerance. Ties break deterministically on
//! (entropy change, operator, smallest leaf vertices), so results are
//! reproducible — including under the parallel candidate scan, which reduces
//! with the same total order.

use ndarray::Array2;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

use super::{delta_with_adj, structural_entropy, EncodingTree, NodeId, Operator};

/// Improvements smaller than this are treated as noise and do not justify
/// another greedy step.
pub const DEFAULT_TOL: f64 = 1e-12;

/// Knobs for [`minimize`].
#[derive(Debug, Clone)]
pub struct MinimizeConfig {
    /// Minimum entropy improvement worth taking (compared as `delta < -tol`).
    pub tol: f64,
    /// Cap on tree height (leaf depth in edges); `None` leaves it unbounded.
    /// Combines that would push any leaf past the cap are never proposed.
    pub max_height: Option<usize>,
}

impl Default for MinimizeConfig {
    fn default() -> Self {
        MinimizeConfig {
            tol: DEFAULT_TOL,
            max_height: None,
        }
    }
}

/// One applicable operator instance.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Candidate {
    pub operator: Operator,
    pub a: NodeId,
    pub b: NodeId,
}

/// A candidate priced by the entropy change it would cause, plus the leaf
/// keys used to break exact ties.
#[derive(Debug, Clone, Copy)]
pub struct ScoredCandidate {
    pub operator: Operator,
    pub a: NodeId,
    pub b: NodeId,
    pub delta: f64,
    key_min: u32,
    key_max: u32,
}

impl ScoredCandidate {
    fn rank(&self) -> u8 {
        match self.operator {
            Operator::Combine => 0,
            Operator::Merge => 1,
        }
    }

    fn cmp_key(&self, other: &ScoredCandidate) -> std::cmp::Ordering {
        self.delta
            .total_cmp(&other.delta)
            .then_with(|| self.rank().cmp(&other.rank()))
            .then_with(|| self.key_min.cmp(&other.key_min))
            .then_with(|| self.key_max.cmp(&other.key_max))
    }
}

/// One applied greedy step. `entropy` is the full structural entropy of the
/// tree *after* the step, recomputed from scratch.
#[derive(Debug, Clone)]
pub struct TraceStep {
    pub iteration: usize,
    pub operator: Operator,
    pub a: NodeId,
    pub b: NodeId,
    pub entropy: f64,
}

/// Enumerate every applicable operator instance: for each internal node, all
/// unordered pairs of its children, as combines (where the height cap
/// permits) and as merges (where both operands are internal). Order is
/// deterministic: parents ascending by id, pairs in child-list order,
/// combine before merge.
pub fn candidates(t: &EncodingTree, max_height: Option<usize>) -> Vec<Candidate> {
    let mut depth = vec![usize::MAX; t.arena_len()];
    let mut sub_height = vec![0usize; t.arena_len()];
    // Preorder for depths, then a reverse sweep of the postorder for heights.
    let order = t.postorder().expect("live tree traversal");
    for &id in order.iter().rev() {
        let node = t.node(id).unwrap();
        depth[id] = match node.parent() {
            Some(p) => depth[p] + 1,
            None => 0,
        };
    }
    for &id in &order {
        let node = t.node(id).unwrap();
        sub_height[id] = node
            .children()
            .iter()
            .map(|&c| sub_height[c] + 1)
            .max()
            .unwrap_or(0);
    }

    let mut out = Vec::new();
    for p in t.node_ids() {
        let node = t.node(p).unwrap();
        let kids = node.children();
        if kids.len() < 2 {
            continue;
        }
        for i in 0..kids.len() {
            for j in (i + 1)..kids.len() {
                let (a, b) = (kids[i], kids[j]);
                let combine_ok = match max_height {
                    None => true,
                    Some(cap) => depth[p] + 2 + sub_height[a].max(sub_height[b]) <= cap,
                };
                if combine_ok {
                    out.push(Candidate {
                        operator: Operator::Combine,
                        a,
                        b,
                    });
                }
                if !t.node(a).unwrap().is_leaf() && !t.node(b).unwrap().is_leaf() {
                    out.push(Candidate {
                        operator: Operator::Merge,
                        a,
                        b,
                    });
                }
            }
        }
    }
    out
}

fn score(
    adj: &Array2<f64>,
    vol: f64,
    t: &EncodingTree,
    c: Candidate,
) -> Result<ScoredCandidate> {
    let delta = delta_with_adj(adj, vol, t, c.operator, c.a, c.b)?;
    let la = t.node(c.a)?.vertex_set()[0];
    let lb = t.node(c.b)?.vertex_set()[0];
    Ok(ScoredCandidate {
        operator: c.operator,
        a: c.a,
        b: c.b,
        delta,
        key_min: la.min(lb),
        key_max: la.max(lb),
    })
}

/// Sequentially score `cands` and return the best under the deterministic
/// total order (most negative delta first).
pub fn best_candidate_seq(
    adj: &Array2<f64>,
    vol: f64,
    t: &EncodingTree,
    cands: &[Candidate],
) -> Result<Option<ScoredCandidate>> {
    let mut best: Option<ScoredCandidate> = None;
    for &c in cands {
        let s = score(adj, vol, t, c)?;
        best = Some(match best {
            Some(b) if b.cmp_key(&s).is_le() => b,
            _ => s,
        });
    }
    Ok(best)
}

/// [`best_candidate_seq`] with the scoring fanned out over rayon. The reduce
/// uses the same total order, so the winner is bit-identical to the
/// sequential scan.
#[cfg(feature = "parallel")]
pub fn best_candidate_par(
    adj: &Array2<f64>,
    vol: f64,
    t: &EncodingTree,
    cands: &[Candidate],
) -> Result<Option<ScoredCandidate>> {
    let scored: Result<Vec<ScoredCandidate>> = cands
        .par_iter()
        .map(|&c| score(adj, vol, t, c))
        .collect();
    Ok(scored?.into_iter().min_by(|x, y| x.cmp_key(y)))
}

fn best_candidate(
    adj: &Array2<f64>,
    vol: f64,
    t: &EncodingTree,
    cands: &[Candidate],
) -> Result<Option<ScoredCandidate>> {
    #[cfg(feature = "parallel")]
    {
        best_candidate_par(adj, vol, t, cands)
    }
    #[cfg(not(feature = "parallel"))]
    {
        best_candidate_seq(adj, vol, t, cands)
    }
}

/// Greedily minimize structural entropy from the flat tree; returns the
/// final tree and the applied steps in order.
pub fn minimize_traced(g: &Graph, cfg: &MinimizeConfig) -> Result<(EncodingTree, Vec<TraceStep>)> {
    if cfg.tol.is_nan() || cfg.tol < 0.0 {
        return Err(Error::Precondition(format!(
            "tolerance must be non-negative and finite (got {})",
            cfg.tol
        )));
    }
    if cfg.max_height == Some(0) {
        return Err(Error::Precondition(
            "height cap must be at least 1 (the flat tree already has height 1)".into(),
        ));
    }
    let sym = g.symmetrized();
    let adj = sym.adjacency().clone();
    let vol = sym.volume();
    let mut tree = EncodingTree::flat(g);
    let mut trace = Vec::new();
    let mut iteration = 0usize;
    loop {
        let cands = candidates(&tree, cfg.max_height);
        let best = best_candidate(&adj, vol, &tree, &cands)?;
        let best = match best {
            Some(b) if b.delta < -cfg.tol => b,
            _ => break,
        };
        match best.operator {
            Operator::Combine => tree.apply_combine(&adj, best.a, best.b)?,
            Operator::Merge => tree.apply_merge(&adj, best.a, best.b)?,
        };
        iteration += 1;
        trace.push(TraceStep {
            iteration,
            operator: best.operator,
            a: best.a,
            b: best.b,
            entropy: structural_entropy(g, &tree)?,
        });
    }
    Ok((tree, trace))
}

/// [`minimize_traced`] without the trace.
pub fn minimize(g: &Graph, cfg: &MinimizeConfig) -> Result<EncodingTree> {
    minimize_traced(g, cfg).map(|(t, _)| t)
}
