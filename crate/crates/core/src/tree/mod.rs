//! Encoding trees: rooted hierarchies over a graph's vertex set, scored by
//! structural entropy.
//!
//! An encoding tree partitions the vertices recursively: the root owns every
//! vertex, each internal node owns the disjoint union of its children, and
//! every leaf owns exactly one vertex. Each node caches two quantities
//! derived from the *symmetrized* graph:
//!
//! * `g` — the total weight of edges crossing into the node's vertex set;
//! * `v` — the node's volume (sum of weighted degrees inside the set).
//!
//! The structural entropy of a tree is
//!
//! ```text
//! H(T) = Σ over non-root nodes α of  −(g_α / vol) · log2(V_α / V_parent(α))
//! ```
//!
//! in bits. A node contributes zero when its cut is zero or its volume equals
//! its parent's. Lower entropy means the hierarchy explains more of the
//! graph's connectivity structure.
//!
//! Two local edits rewrite a tree without touching the rest of it:
//!
//! * [`combine`] inserts a new parent over two siblings;
//! * [`merge`] fuses two non-leaf siblings into one node that adopts both
//!   child lists.
//!
//! [`entropy_delta`] prices either edit in O(affected nodes), and the greedy
//! minimizer in [`minimize`](crate::tree::minimize) applies the cheapest one
//! repeatedly. Exhaustive oracles for small graphs live in
//! [`oracle`](crate::tree::oracle).

mod minimize;
mod oracle;

pub use minimize::{
    best_candidate_seq, candidates, minimize, minimize_traced, Candidate, MinimizeConfig,
    ScoredCandidate, TraceStep, DEFAULT_TOL,
};
#[cfg(feature = "parallel")]
pub use minimize::best_candidate_par;
pub use oracle::{exhaustive_min_2level, set_partitions, two_level_tree, ORACLE_MAX_N};

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Identifier of a node inside a tree's arena. Ids are stable across edits;
/// nodes removed by [`merge`] leave gaps that serialization skips.
pub type NodeId = usize;

/// Tolerance for cache-consistency checks in [`EncodingTree::validate`].
pub const CACHE_TOL: f64 = 1e-9;

/// The two local tree edits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Operator {
    /// Insert a new parent node over two siblings.
    Combine,
    /// Fuse two non-leaf siblings, adopting their children in order.
    Merge,
}

impl std::fmt::Display for Operator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Operator::Combine => write!(f, "combine"),
            Operator::Merge => write!(f, "merge"),
        }
    }
}

/// One node of an encoding tree.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeNode {
    parent: Option<NodeId>,
    children: Vec<NodeId>,
    vertex: Option<u32>,
    g: f64,
    v: f64,
    /// Sorted vertex ids of the subtree (cached; rebuilt on deserialize).
    vertices: Vec<u32>,
}

impl TreeNode {
    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }
    pub fn children(&self) -> &[NodeId] {
        &self.children
    }
    /// The single vertex owned by a leaf; `None` for internal nodes.
    pub fn vertex(&self) -> Option<u32> {
        self.vertex
    }
    pub fn is_leaf(&self) -> bool {
        self.children.is_empty()
    }
    /// Cached cut weight into this node's vertex set.
    pub fn g(&self) -> f64 {
        self.g
    }
    /// Cached volume of this node's vertex set.
    pub fn v(&self) -> f64 {
        self.v
    }
    /// Sorted vertex ids owned by the subtree.
    pub fn vertex_set(&self) -> &[u32] {
        &self.vertices
    }
}

/// Rooted hierarchy over a graph's vertices with per-node cut/volume caches.
#[derive(Debug, Clone, PartialEq)]
pub struct EncodingTree {
    nodes: Vec<Option<TreeNode>>,
    root: NodeId,
    leaf_of: Vec<Option<NodeId>>,
    n: usize,
}

/// Validation verdicts, named by the invariant they break.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ViolationKind {
    /// Broken parent/child links or unreachable nodes.
    Structure,
    /// A leaf without exactly one vertex, or an internal node with none.
    LeafShape,
    /// A graph vertex missing from every leaf, or vertex counts disagreeing.
    Coverage,
    /// A vertex owned by more than one leaf.
    Disjointness,
    /// A cached `g` or `v` that disagrees with recomputation from the graph.
    Cache,
}

impl std::fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            ViolationKind::Structure => "structure",
            ViolationKind::LeafShape => "leaf-shape",
            ViolationKind::Coverage => "coverage",
            ViolationKind::Disjointness => "disjointness",
            ViolationKind::Cache => "cache",
        };
        write!(f, "{s}")
    }
}

/// One violated invariant.
#[derive(Debug, Clone)]
pub struct Violation {
    pub kind: ViolationKind,
    pub node: Option<NodeId>,
    pub detail: String,
}

/// Everything [`EncodingTree::validate`] found. Empty means the tree is a
/// valid encoding tree for the graph.
#[derive(Debug, Clone, Default)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl std::fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        if self.ok() {
            return write!(f, "ok");
        }
        for v in &self.violations {
            writeln!(f, "{}: {}", v.kind, v.detail)?;
        }
        Ok(())
    }
}

#[derive(Serialize, Deserialize)]
struct TreeDoc {
    n: usize,
    root: usize,
    nodes: Vec<NodeDoc>,
}

#[derive(Serialize, Deserialize)]
struct NodeDoc {
    id: usize,
    parent: Option<usize>,
    children: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertex: Option<u32>,
    g: f64,
    v: f64,
}

impl EncodingTree {
    /// The flat (one-level) tree: a root with one singleton leaf per vertex.
    /// Leaf caches are the vertex degrees of the symmetrized graph.
    pub fn flat(g: &Graph) -> EncodingTree {
        let sym = g.symmetrized();
        let n = sym.n();
        let degrees = sym.degrees();
        let mut nodes: Vec<Option<TreeNode>> = Vec::with_capacity(n + 1);
        nodes.push(Some(TreeNode {
            parent: None,
            children: (1..=n).collect(),
            vertex: None,
            g: 0.0,
            v: sym.volume(),
            vertices: (0..n as u32).collect(),
        }));
        let mut leaf_of = Vec::with_capacity(n);
        for v in 0..n {
            nodes.push(Some(TreeNode {
                parent: Some(0),
                children: Vec::new(),
                vertex: Some(v as u32),
                g: degrees[v],
                v: degrees[v],
                vertices: vec![v as u32],
            }));
            leaf_of.push(Some(v + 1));
        }
        EncodingTree {
            nodes,
            root: 0,
            leaf_of,
            n,
        }
    }

    /// Number of graph vertices the tree is built over.
    pub fn n(&self) -> usize {
        self.n
    }

    /// The root's id.
    pub fn root(&self) -> NodeId {
        self.root
    }

    /// Borrow a node, failing for tombstoned or out-of-range ids.
    pub fn node(&self, id: NodeId) -> Result<&TreeNode> {
        self.nodes
            .get(id)
            .and_then(|slot| slot.as_ref())
            .ok_or(Error::NodeNotFound { node: id })
    }

    /// Arena capacity: one past the largest id ever allocated (tombstones
    /// included), for id-indexed scratch tables.
    pub(crate) fn arena_len(&self) -> usize {
        self.nodes.len()
    }

    /// Ids of all live nodes, ascending.
    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.nodes
            .iter()
            .enumerate()
            .filter_map(|(i, slot)| slot.as_ref().map(|_| i))
    }

    /// The leaf owning vertex `v`, if any.
    pub fn leaf(&self, v: u32) -> Option<NodeId> {
        self.leaf_of.get(v as usize).copied().flatten()
    }

    /// Edges from the root to `id`.
    pub fn depth(&self, id: NodeId) -> Result<usize> {
        let mut cur = self.node(id)?;
        let mut d = 0;
        while let Some(p) = cur.parent {
            cur = self.node(p)?;
            d += 1;
        }
        Ok(d)
    }

    /// Edges from `id` down to its deepest descendant leaf.
    pub fn subtree_height(&self, id: NodeId) -> Result<usize> {
        let node = self.node(id)?;
        let mut best = 0;
        for &c in &node.children {
            best = best.max(1 + self.subtree_height(c)?);
        }
        Ok(best)
    }

    /// Tree height: the depth of the deepest leaf. The flat tree has height 1.
    pub fn height(&self) -> usize {
        self.subtree_height(self.root).unwrap_or(0)
    }

    /// The vertex partition at depth `l`, completing ragged trees downward:
    /// a leaf shallower than `l` becomes its own singleton block. Valid for
    /// `1 <= l <= height()`; the leaf level yields all singletons. Blocks are
    /// sorted by their smallest vertex, vertices ascending within a block.
    pub fn level_partition(&self, l: usize) -> Result<Vec<Vec<u32>>> {
        let height = self.height();
        if l == 0 || l > height {
            return Err(Error::Precondition(format!(
                "level {l} out of range (tree height {height}; valid levels are 1..={height})"
            )));
        }
        let mut blocks: Vec<Vec<u32>> = Vec::new();
        let mut stack: Vec<(NodeId, usize)> = vec![(self.root, 0)];
        while let Some((id, depth)) = stack.pop() {
            let node = self.node(id)?;
            if depth == l || (node.is_leaf() && depth < l) {
                blocks.push(node.vertices.clone());
                continue;
            }
            for &c in &node.children {
                stack.push((c, depth + 1));
            }
        }
        blocks.sort_by_key(|b| b.first().copied());
        Ok(blocks)
    }

    /// Serialize to the interchange JSON: live nodes ascending by id, parent
    /// links, ordered children, the vertex at each leaf, and the cached
    /// `g`/`v`. Floats round-trip exactly.
    pub fn to_json_string(&self) -> String {
        let doc = TreeDoc {
            n: self.n,
            root: self.root,
            nodes: self
                .node_ids()
                .map(|id| {
                    let node = self.nodes[id].as_ref().unwrap();
                    NodeDoc {
                        id,
                        parent: node.parent,
                        children: node.children.clone(),
                        vertex: node.vertex,
                        g: node.g,
                        v: node.v,
                    }
                })
                .collect(),
        };
        serde_json::to_string_pretty(&doc).expect("tree serialization cannot fail")
    }

    /// Rebuild a tree from interchange JSON.
    ///
    /// Structural soundness (resolvable, mutually consistent parent/child
    /// links; a single root; every node reachable; leaves carrying exactly
    /// one in-range vertex) is enforced here because the arena cannot even be
    /// built without it. Semantic properties — vertex coverage/disjointness
    /// and cache agreement with a concrete graph — are left to
    /// [`EncodingTree::validate`] so damaged trees can be loaded and reported.
    pub fn from_json_str(s: &str) -> Result<EncodingTree> {
        let doc: TreeDoc =
            serde_json::from_str(s).map_err(|e| Error::parse("<tree json>", e.line(), e.to_string()))?;
        if doc.n == 0 {
            return Err(Error::InvalidTree("vertex count n must be positive".into()));
        }
        let max_id = doc
            .nodes
            .iter()
            .map(|nd| nd.id)
            .max()
            .ok_or_else(|| Error::InvalidTree("tree has no nodes".into()))?;
        let mut nodes: Vec<Option<TreeNode>> = vec![None; max_id + 1];
        for nd in &doc.nodes {
            if nodes[nd.id].is_some() {
                return Err(Error::InvalidTree(format!("duplicate node id {}", nd.id)));
            }
            if nd.children.is_empty() {
                match nd.vertex {
                    None => {
                        return Err(Error::InvalidTree(format!(
                            "leaf node {} carries no vertex",
                            nd.id
                        )))
                    }
                    Some(v) if (v as usize) >= doc.n => {
                        return Err(Error::InvalidTree(format!(
                            "leaf node {} owns out-of-range vertex {v} (n = {})",
                            nd.id, doc.n
                        )))
                    }
                    _ => {}
                }
            } else if nd.vertex.is_some() {
                return Err(Error::InvalidTree(format!(
                    "internal node {} must not carry a vertex",
                    nd.id
                )));
            }
            nodes[nd.id] = Some(TreeNode {
                parent: nd.parent,
                children: nd.children.clone(),
                vertex: nd.vertex,
                g: nd.g,
                v: nd.v,
                vertices: Vec::new(),
            });
        }

        let get = |id: usize| -> Result<&TreeNode> {
            nodes
                .get(id)
                .and_then(|s| s.as_ref())
                .ok_or(Error::NodeNotFound { node: id })
        };
        let root = doc.root;
        if get(root)?.parent.is_some() {
            return Err(Error::InvalidTree(format!(
                "root node {root} has a parent link"
            )));
        }
        for nd in &doc.nodes {
            if nd.id != root && nd.parent.is_none() {
                return Err(Error::InvalidTree(format!(
                    "non-root node {} has no parent",
                    nd.id
                )));
            }
            if let Some(p) = nd.parent {
                let parent = get(p)?;
                if !parent.children.contains(&nd.id) {
                    return Err(Error::InvalidTree(format!(
                        "node {} names parent {p}, which does not list it as a child",
                        nd.id
                    )));
                }
            }
            for &c in &nd.children {
                let child = get(c)?;
                if child.parent != Some(nd.id) {
                    return Err(Error::InvalidTree(format!(
                        "node {} lists child {c}, whose parent link disagrees",
                        nd.id
                    )));
                }
            }
        }
        // Reachability doubles as the acyclicity check.
        let mut seen = vec![false; nodes.len()];
        let mut stack = vec![root];
        let mut reached = 0usize;
        while let Some(id) = stack.pop() {
            if seen[id] {
                return Err(Error::InvalidTree(format!(
                    "node {id} reachable twice (cycle or duplicated child link)"
                )));
            }
            seen[id] = true;
            reached += 1;
            if let Some(node) = nodes[id].as_ref() {
                stack.extend(node.children.iter().copied());
            }
        }
        if reached != doc.nodes.len() {
            return Err(Error::InvalidTree(
                "tree contains nodes unreachable from the root".into(),
            ));
        }

        let mut tree = EncodingTree {
            nodes,
            root,
            leaf_of: vec![None; doc.n],
            n: doc.n,
        };
        tree.rebuild_vertex_caches()?;
        Ok(tree)
    }

    /// Check the tree against `graph`, reporting every violated invariant
    /// rather than stopping at the first.
    pub fn validate(&self, graph: &Graph) -> ValidationReport {
        let mut report = ValidationReport::default();
        let mut push = |kind, node, detail: String| {
            report.violations.push(Violation { kind, node, detail });
        };

        if self.n != graph.n() {
            push(
                ViolationKind::Coverage,
                None,
                format!(
                    "tree is over {} vertices but the graph has {}",
                    self.n,
                    graph.n()
                ),
            );
        }

        // Structure + leaf shape.
        for id in self.node_ids() {
            let node = self.nodes[id].as_ref().unwrap();
            match node.parent {
                None if id != self.root => push(
                    ViolationKind::Structure,
                    Some(id),
                    format!("non-root node {id} has no parent"),
                ),
                Some(p) => match self.node(p) {
                    Ok(parent) if parent.children.contains(&id) => {}
                    Ok(_) => push(
                        ViolationKind::Structure,
                        Some(id),
                        format!("parent {p} does not list node {id} as a child"),
                    ),
                    Err(_) => push(
                        ViolationKind::Structure,
                        Some(id),
                        format!("node {id} names missing parent {p}"),
                    ),
                },
                None => {}
            }
            if node.is_leaf() && node.vertex.is_none() {
                push(
                    ViolationKind::LeafShape,
                    Some(id),
                    format!("leaf node {id} owns no vertex"),
                );
            }
            if !node.is_leaf() && node.vertex.is_some() {
                push(
                    ViolationKind::LeafShape,
                    Some(id),
                    format!("internal node {id} carries a vertex"),
                );
            }
        }

        // Coverage and disjointness over the declared vertex range.
        let mut owners: Vec<Vec<NodeId>> = vec![Vec::new(); self.n];
        for id in self.node_ids() {
            let node = self.nodes[id].as_ref().unwrap();
            if let Some(v) = node.vertex {
                if (v as usize) < self.n {
                    owners[v as usize].push(id);
                }
            }
        }
        for (v, who) in owners.iter().enumerate() {
            match who.len() {
                0 => push(
                    ViolationKind::Coverage,
                    None,
                    format!("vertex {v} is not owned by any leaf"),
                ),
                1 => {}
                _ => push(
                    ViolationKind::Disjointness,
                    None,
                    format!("vertex {v} is owned by {} leaves ({who:?})", who.len()),
                ),
            }
        }

        // Cache agreement with the symmetrized graph.
        if self.n == graph.n() {
            let sym = graph.symmetrized();
            let adj = sym.adjacency();
            let degrees = sym.degrees();
            for id in self.node_ids() {
                let node = self.nodes[id].as_ref().unwrap();
                let set = &node.vertices;
                let vol: f64 = set.iter().map(|&v| degrees[v as usize]).sum();
                let cut = cut_weight(adj, set);
                if (node.v - vol).abs() > CACHE_TOL {
                    push(
                        ViolationKind::Cache,
                        Some(id),
                        format!("node {id} caches V = {} but recomputation gives {vol}", node.v),
                    );
                }
                if (node.g - cut).abs() > CACHE_TOL {
                    push(
                        ViolationKind::Cache,
                        Some(id),
                        format!("node {id} caches g = {} but recomputation gives {cut}", node.g),
                    );
                }
            }
        }

        report
    }

    /// Rebuild every node's sorted vertex set (and the vertex→leaf index)
    /// bottom-up from the leaves.
    fn rebuild_vertex_caches(&mut self) -> Result<()> {
        let order = self.postorder()?;
        for id in order {
            let node = self.nodes[id].as_ref().unwrap();
            let verts = if node.is_leaf() {
                node.vertex.map(|v| vec![v]).unwrap_or_default()
            } else {
                let mut acc: Vec<u32> = Vec::new();
                for &c in node.children.clone().iter() {
                    acc = merge_sorted(&acc, &self.nodes[c].as_ref().unwrap().vertices);
                }
                acc
            };
            if let Some(v) = node.vertex {
                let slot = &mut self.leaf_of[v as usize];
                if slot.is_none() {
                    *slot = Some(id);
                }
            }
            self.nodes[id].as_mut().unwrap().vertices = verts;
        }
        Ok(())
    }

    /// Children-before-parents ordering of all live nodes.
    fn postorder(&self) -> Result<Vec<NodeId>> {
        let mut out = Vec::new();
        let mut stack = vec![(self.root, false)];
        while let Some((id, expanded)) = stack.pop() {
            if expanded {
                out.push(id);
                continue;
            }
            stack.push((id, true));
            for &c in &self.node(id)?.children {
                stack.push((c, false));
            }
        }
        Ok(out)
    }

    fn require_siblings(&self, a: NodeId, b: NodeId) -> Result<NodeId> {
        if a == b {
            return Err(Error::Precondition(format!(
                "operands must be distinct (both are node {a})"
            )));
        }
        let pa = self
            .node(a)?
            .parent
            .ok_or_else(|| Error::Precondition(format!("node {a} is the root")))?;
        let pb = self
            .node(b)?
            .parent
            .ok_or_else(|| Error::Precondition(format!("node {b} is the root")))?;
        if pa != pb {
            return Err(Error::Precondition(format!(
                "nodes {a} and {b} are not siblings (parents {pa} and {pb})"
            )));
        }
        Ok(pa)
    }

    /// In-place combine; returns the id of the inserted parent. The new node
    /// takes the first operand's position in the sibling order.
    pub(crate) fn apply_combine(
        &mut self,
        sym_adj: &Array2<f64>,
        a: NodeId,
        b: NodeId,
    ) -> Result<NodeId> {
        let parent = self.require_siblings(a, b)?;
        let (g_new, v_new, verts) = self.union_caches(sym_adj, a, b);
        let gamma = self.nodes.len();
        self.nodes.push(Some(TreeNode {
            parent: Some(parent),
            children: vec![a, b],
            vertex: None,
            g: g_new,
            v: v_new,
            vertices: verts,
        }));
        let siblings = &mut self.nodes[parent].as_mut().unwrap().children;
        let pos = siblings.iter().position(|&c| c == a).unwrap();
        siblings[pos] = gamma;
        siblings.retain(|&c| c != b);
        self.nodes[a].as_mut().unwrap().parent = Some(gamma);
        self.nodes[b].as_mut().unwrap().parent = Some(gamma);
        Ok(gamma)
    }

    /// In-place merge of two non-leaf siblings; returns the fused node's id.
    /// The fused node adopts `a`'s children followed by `b`'s and takes `a`'s
    /// position in the sibling order.
    pub(crate) fn apply_merge(
        &mut self,
        sym_adj: &Array2<f64>,
        a: NodeId,
        b: NodeId,
    ) -> Result<NodeId> {
        let parent = self.require_siblings(a, b)?;
        if self.node(a)?.is_leaf() || self.node(b)?.is_leaf() {
            return Err(Error::Precondition(format!(
                "merge requires non-leaf siblings (nodes {a}, {b})"
            )));
        }
        let (g_new, v_new, verts) = self.union_caches(sym_adj, a, b);
        let mut adopted = self.nodes[a].as_ref().unwrap().children.clone();
        adopted.extend_from_slice(&self.nodes[b].as_ref().unwrap().children);
        let gamma = self.nodes.len();
        self.nodes.push(Some(TreeNode {
            parent: Some(parent),
            children: adopted.clone(),
            vertex: None,
            g: g_new,
            v: v_new,
            vertices: verts,
        }));
        let siblings = &mut self.nodes[parent].as_mut().unwrap().children;
        let pos = siblings.iter().position(|&c| c == a).unwrap();
        siblings[pos] = gamma;
        siblings.retain(|&c| c != b);
        for c in adopted {
            self.nodes[c].as_mut().unwrap().parent = Some(gamma);
        }
        self.nodes[a] = None;
        self.nodes[b] = None;
        Ok(gamma)
    }

    fn union_caches(&self, sym_adj: &Array2<f64>, a: NodeId, b: NodeId) -> (f64, f64, Vec<u32>) {
        let na = self.nodes[a].as_ref().unwrap();
        let nb = self.nodes[b].as_ref().unwrap();
        let w = weight_between(sym_adj, &na.vertices, &nb.vertices);
        // True cuts are non-negative; clamp away accumulation dust so exact
        // zero-cut unions stay exactly zero.
        let g_new = (na.g + nb.g - 2.0 * w).max(0.0);
        let v_new = na.v + nb.v;
        let verts = merge_sorted(&na.vertices, &nb.vertices);
        (g_new, v_new, verts)
    }
}

/// Total symmetrized weight between two disjoint vertex sets.
pub(crate) fn weight_between(sym_adj: &Array2<f64>, a: &[u32], b: &[u32]) -> f64 {
    let mut sum = 0.0;
    for &i in a {
        for &j in b {
            sum += sym_adj[[i as usize, j as usize]];
        }
    }
    sum
}

/// Cut weight of a vertex set: total weight of edges leaving it.
pub(crate) fn cut_weight(sym_adj: &Array2<f64>, set: &[u32]) -> f64 {
    let n = sym_adj.nrows();
    let mut inside = vec![false; n];
    for &v in set {
        inside[v as usize] = true;
    }
    let mut sum = 0.0;
    for &i in set {
        for j in 0..n {
            if !inside[j] {
                sum += sym_adj[[i as usize, j]];
            }
        }
    }
    sum
}

fn merge_sorted(a: &[u32], b: &[u32]) -> Vec<u32> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() && j < b.len() {
        if a[i] <= b[j] {
            out.push(a[i]);
            i += 1;
        } else {
            out.push(b[j]);
            j += 1;
        }
    }
    out.extend_from_slice(&a[i..]);
    out.extend_from_slice(&b[j..]);
    out
}

/// Entropy contribution of non-root node `a`:
/// `−(g_a / vol) · log2(V_a / V_parent)`, zero when the cut or the volume
/// ratio vanishes. Requires positive graph volume.
pub fn node_entropy(g: &Graph, t: &EncodingTree, a: NodeId) -> Result<f64> {
    let node = t.node(a)?;
    let parent = node
        .parent
        .ok_or_else(|| Error::Precondition("node_entropy is undefined for the root".into()))?;
    let vol = g.volume();
    if vol <= 0.0 {
        return Err(Error::Precondition(
            "node_entropy requires a graph with positive volume".into(),
        ));
    }
    Ok(node_term(node.g, node.v, t.node(parent)?.v, vol))
}

/// The shared entropy kernel. Zero cut or zero volume contributes nothing;
/// equal volumes give `log2(1) = 0` naturally.
#[inline]
fn node_term(g: f64, v: f64, v_parent: f64, vol: f64) -> f64 {
    if g <= 0.0 || v <= 0.0 {
        return 0.0;
    }
    -(g / vol) * (v / v_parent).log2()
}

/// Structural entropy of the whole tree, in bits. Zero-volume graphs score
/// zero by convention.
pub fn structural_entropy(g: &Graph, t: &EncodingTree) -> Result<f64> {
    let vol = g.volume();
    if vol <= 0.0 {
        return Ok(0.0);
    }
    let mut total = 0.0;
    for id in t.node_ids() {
        let node = t.node(id)?;
        if let Some(p) = node.parent {
            total += node_term(node.g, node.v, t.node(p)?.v, vol);
        }
    }
    Ok(total)
}

/// Price an operator application without copying the tree: the exact change
/// in structural entropy it would cause. Only the affected terms are
/// recomputed, so this is O(|children| + |set a|·|set b|).
pub fn entropy_delta(
    g: &Graph,
    t: &EncodingTree,
    op: Operator,
    a: NodeId,
    b: NodeId,
) -> Result<f64> {
    let sym = g.symmetrized();
    delta_with_adj(sym.adjacency(), g.volume(), t, op, a, b)
}

/// [`entropy_delta`] against a pre-symmetrized adjacency, so callers scoring
/// many candidates symmetrize once.
pub(crate) fn delta_with_adj(
    adj: &Array2<f64>,
    vol: f64,
    t: &EncodingTree,
    op: Operator,
    a: NodeId,
    b: NodeId,
) -> Result<f64> {
    let parent = t.require_siblings(a, b)?;
    if vol <= 0.0 {
        return Ok(0.0);
    }
    let na = t.node(a)?;
    let nb = t.node(b)?;
    let vp = t.node(parent)?.v;
    let w = weight_between(adj, &na.vertices, &nb.vertices);
    let g_union = (na.g + nb.g - 2.0 * w).max(0.0);
    let v_union = na.v + nb.v;

    match op {
        Operator::Combine => {
            let before = node_term(na.g, na.v, vp, vol) + node_term(nb.g, nb.v, vp, vol);
            let after = node_term(g_union, v_union, vp, vol)
                + node_term(na.g, na.v, v_union, vol)
                + node_term(nb.g, nb.v, v_union, vol);
            Ok(after - before)
        }
        Operator::Merge => {
            if na.is_leaf() || nb.is_leaf() {
                return Err(Error::Precondition(format!(
                    "merge requires non-leaf siblings (nodes {a}, {b})"
                )));
            }
            let mut before = node_term(na.g, na.v, vp, vol) + node_term(nb.g, nb.v, vp, vol);
            let mut after = node_term(g_union, v_union, vp, vol);
            for &c in na.children.iter().chain(nb.children.iter()) {
                let nc = t.node(c)?;
                let parent_v = if na.children.contains(&c) { na.v } else { nb.v };
                before += node_term(nc.g, nc.v, parent_v, vol);
                after += node_term(nc.g, nc.v, v_union, vol);
            }
            Ok(after - before)
        }
    }
}

/// Insert a new parent `γ` over siblings `a` and `b`. `γ` caches the cut and
/// volume of the union vertex set; the result is a new tree.
pub fn combine(g: &Graph, t: &EncodingTree, a: NodeId, b: NodeId) -> Result<EncodingTree> {
    let sym = g.symmetrized();
    let mut out = t.clone();
    out.apply_combine(sym.adjacency(), a, b)?;
    Ok(out)
}

/// Fuse non-leaf siblings `a` and `b` into one node adopting both child
/// lists (`a`'s children first); the result is a new tree.
pub fn merge(g: &Graph, t: &EncodingTree, a: NodeId, b: NodeId) -> Result<EncodingTree> {
    let sym = g.symmetrized();
    let mut out = t.clone();
    out.apply_merge(sym.adjacency(), a, b)?;
    Ok(out)
}
