//! Hierarchy-artifact integration suite: frozen correlation scores for the
//! barbell fixture, an independent path-walk oracle that recomputes every
//! score from the serialized tree and raw adjacency, and the mask laws.
//!
//! The oracle below shares no code with the library: it parses the
//! interchange JSON with `serde_json` directly, recomputes cut weights and
//! volumes from the adjacency matrix, and walks leaf → ancestor → leaf
//! explicitly.

use std::collections::HashMap;

use approx::assert_abs_diff_eq;
use ndarray::Array2;

use hierflow::graph::Graph;
use hierflow::hier::{adjacency_mask, build_mask_set, hier_score, level_mask, MaskSource};
use hierflow::synth::{barbell_triangles, cycle, random_community};
use hierflow::tree::{minimize, structural_entropy, two_level_tree, EncodingTree, MinimizeConfig};

// ---------------------------------------------------------------------------
// Independent reference: tree parsing and score computation from scratch.
// ---------------------------------------------------------------------------

struct RefTree {
    root: usize,
    parent: HashMap<usize, usize>,
    children: HashMap<usize, Vec<usize>>,
    leaf_vertex: HashMap<usize, u32>,
}

fn parse_ref_tree(json: &str) -> RefTree {
    let doc: serde_json::Value = serde_json::from_str(json).unwrap();
    let root = doc["root"].as_u64().unwrap() as usize;
    let mut parent = HashMap::new();
    let mut children = HashMap::new();
    let mut leaf_vertex = HashMap::new();
    for node in doc["nodes"].as_array().unwrap() {
        let id = node["id"].as_u64().unwrap() as usize;
        if let Some(p) = node["parent"].as_u64() {
            parent.insert(id, p as usize);
        }
        let kids: Vec<usize> = node["children"]
            .as_array()
            .unwrap()
            .iter()
            .map(|c| c.as_u64().unwrap() as usize)
            .collect();
        if kids.is_empty() {
            leaf_vertex.insert(id, node["vertex"].as_u64().unwrap() as u32);
        }
        children.insert(id, kids);
    }
    RefTree {
        root,
        parent,
        children,
        leaf_vertex,
    }
}

fn ref_vertex_set(rt: &RefTree, id: usize) -> Vec<u32> {
    match rt.leaf_vertex.get(&id) {
        Some(&v) => vec![v],
        None => {
            let mut out = Vec::new();
            for &c in &rt.children[&id] {
                out.extend(ref_vertex_set(rt, c));
            }
            out
        }
    }
}

/// Entropy term of one non-root node, recomputed from the raw adjacency.
fn ref_node_term(sym: &Array2<f64>, vol: f64, rt: &RefTree, id: usize) -> f64 {
    let verts = ref_vertex_set(rt, id);
    let pverts = ref_vertex_set(rt, rt.parent[&id]);
    let inside: Vec<bool> = {
        let mut m = vec![false; sym.nrows()];
        for &v in &verts {
            m[v as usize] = true;
        }
        m
    };
    let mut cut = 0.0;
    for &v in &verts {
        for j in 0..sym.ncols() {
            if !inside[j] {
                cut += sym[[v as usize, j]];
            }
        }
    }
    let v_own: f64 = verts.iter().map(|&v| sym.row(v as usize).sum()).sum();
    let v_parent: f64 = pverts.iter().map(|&v| sym.row(v as usize).sum()).sum();
    if cut <= 0.0 || v_own <= 0.0 || v_parent <= 0.0 {
        return 0.0;
    }
    -(cut / vol) * (v_own / v_parent).log2()
}

/// Per-node entropies with the root carrying the total, plus the leaf map.
fn ref_entropies(g: &Graph, rt: &RefTree) -> HashMap<usize, f64> {
    let sym_graph = g.symmetrized().into_owned();
    let sym = sym_graph.adjacency().clone();
    let vol: f64 = sym.sum();
    let mut h = HashMap::new();
    let mut total = 0.0;
    for &id in rt.children.keys() {
        if id == rt.root {
            continue;
        }
        let term = if vol > 0.0 {
            ref_node_term(&sym, vol, rt, id)
        } else {
            0.0
        };
        h.insert(id, term);
        total += term;
    }
    h.insert(rt.root, total);
    h
}

fn ref_score(g: &Graph, rt: &RefTree, n: usize) -> Array2<f64> {
    const EPS: f64 = 1e-12;
    let h = ref_entropies(g, rt);
    let leaf_of: HashMap<u32, usize> = rt.leaf_vertex.iter().map(|(&id, &v)| (v, id)).collect();
    let chain = |v: u32| -> Vec<usize> {
        let mut path = vec![leaf_of[&v]];
        while let Some(&p) = rt.parent.get(path.last().unwrap()) {
            path.push(p);
        }
        path
    };
    let ratio = |num: f64, den: f64| num.max(EPS) / den.max(EPS);
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                continue;
            }
            let pi = chain(i as u32);
            let pj = chain(j as u32);
            let mut ai = pi.len();
            let mut aj = pj.len();
            while ai > 0 && aj > 0 && pi[ai - 1] == pj[aj - 1] {
                ai -= 1;
                aj -= 1;
            }
            let mut total = 0.0;
            for step in 0..ai {
                total += ratio(h[&pi[step + 1]], h[&pi[step]]);
            }
            for step in (0..aj).rev() {
                total += ratio(h[&pj[step]], h[&pj[step + 1]]);
            }
            s[[i, j]] = total;
        }
    }
    s
}

fn assert_scores_match(g: &Graph, t: &EncodingTree, label: &str) {
    let s = hier_score(g, t).unwrap().s;
    let reference = ref_score(g, &parse_ref_tree(&t.to_json_string()), g.n());
    for i in 0..g.n() {
        assert_eq!(s[[i, i]], 0.0, "{label}: diagonal at {i}");
        for j in 0..g.n() {
            assert!(
                (s[[i, j]] - reference[[i, j]]).abs() <= 1e-10,
                "{label}: score ({i}, {j}) = {} but the reference gives {}",
                s[[i, j]],
                reference[[i, j]]
            );
        }
    }
}

// ---------------------------------------------------------------------------
// Frozen values.
// ---------------------------------------------------------------------------

#[test]
fn barbell_two_level_scores_match_frozen_matrix() {
    let g = barbell_triangles();
    let t = two_level_tree(&g, &[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
    let s = hier_score(&g, &t).unwrap().s;

    // Short names for the six distinct magnitudes (corner/bridge vertices
    // behave differently; cross-triangle paths pass through the root).
    let a = 3.891357221947764; // corner → corner, same triangle
    let b = 3.9438246418419003; // corner → bridge, same triangle
    let c = 27.77904737204421; // corner → far bridge
    let d = 27.726579952150075; // corner → far corner
    let e = 3.887399143815625; // bridge → corner, same triangle
    let f = 27.77508929391207; // bridge → far bridge
    let g_ = 27.722621874017936; // bridge → far corner
    let expected = [
        [0.0, a, b, c, d, d],
        [a, 0.0, b, c, d, d],
        [e, e, 0.0, f, g_, g_],
        [g_, g_, f, 0.0, e, e],
        [d, d, c, b, 0.0, a],
        [d, d, c, b, a, 0.0],
    ];
    for i in 0..6 {
        for j in 0..6 {
            assert_abs_diff_eq!(s[[i, j]], expected[i][j], epsilon = 1e-12);
        }
    }
}

#[test]
fn scores_match_the_independent_path_walk() {
    let g = barbell_triangles();
    let two_level = two_level_tree(&g, &[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
    assert_scores_match(&g, &two_level, "barbell two-level");

    let greedy = minimize(&g, &MinimizeConfig::default()).unwrap();
    assert_scores_match(&g, &greedy, "barbell greedy");

    let c4 = cycle(4).unwrap();
    let t4 = minimize(&c4, &MinimizeConfig::default()).unwrap();
    assert_scores_match(&c4, &t4, "square cycle");

    for seed in [3u64, 11, 27] {
        let (rg, _) = random_community(10, 2, 0.85, 0.15, seed).unwrap();
        let t = minimize(&rg, &MinimizeConfig::default()).unwrap();
        assert_scores_match(&rg, &t, &format!("community seed {seed}"));
    }
}

#[test]
fn disconnected_blocks_keep_scores_finite_through_the_floor() {
    // Two triangles with no bridge: the block cut weights are zero, so block
    // entropies collapse to zero and only the epsilon floor keeps the
    // cross-block ratios defined.
    let mut adj = Array2::zeros((6, 6));
    for &(x, y) in &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5)] {
        adj[[x, y]] = 1.0;
        adj[[y, x]] = 1.0;
    }
    let g = Graph::from_adjacency(adj, false).unwrap();
    let t = two_level_tree(&g, &[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
    let s = hier_score(&g, &t).unwrap().s;
    for i in 0..6 {
        assert_eq!(s[[i, i]], 0.0);
        for j in 0..6 {
            assert!(s[[i, j]].is_finite(), "({i}, {j}) = {}", s[[i, j]]);
            if i != j {
                assert!(s[[i, j]] > 0.0);
            }
        }
    }
    assert_scores_match(&g, &t, "disconnected blocks");
}

// ---------------------------------------------------------------------------
// Mask laws.
// ---------------------------------------------------------------------------

#[test]
fn mask_set_is_symmetric_nested_and_true_diagonal() {
    for seed in 0..12u64 {
        let n = 8 + (seed as usize % 5) * 2;
        let (g, _) = random_community(n, 2 + seed as usize % 2, 0.85, 0.1, seed).unwrap();
        let t = minimize(&g, &MinimizeConfig::default()).unwrap();
        let height = t.height();
        let levels = if height >= 2 { height - 1 } else { 0 };
        let total = levels + 1; // tree levels + adjacency
        let set = build_mask_set(&t, &g, total + 1).unwrap();
        assert_eq!(set.len(), total, "seed {seed}");

        // Sources: coarse→fine tree levels, then adjacency.
        for (idx, mask) in set.masks.iter().enumerate() {
            let expect = if idx < levels {
                MaskSource::TreeLevel(idx + 1)
            } else {
                MaskSource::Adjacency
            };
            assert_eq!(mask.source, expect, "seed {seed} mask {idx}");

            // Symmetry + true diagonal, every mask.
            for i in 0..n {
                assert!(mask.allow[[i, i]], "seed {seed} mask {idx} diag {i}");
                for j in 0..n {
                    assert_eq!(
                        mask.allow[[i, j]],
                        mask.allow[[j, i]],
                        "seed {seed} mask {idx} symmetry ({i}, {j})"
                    );
                }
            }
        }

        // Nesting: a finer level only ever relates pairs the coarser level
        // already relates.
        for w in set.masks.windows(2) {
            let (coarse, fine) = (&w[0], &w[1]);
            if !matches!(fine.source, MaskSource::TreeLevel(_)) {
                continue; // the adjacency mask is not part of the chain
            }
            for i in 0..n {
                for j in 0..n {
                    if fine.allow[[i, j]] {
                        assert!(
                            coarse.allow[[i, j]],
                            "seed {seed}: level pair ({i}, {j}) not nested"
                        );
                    }
                }
            }
        }

        // Head assignment: masks map onto the leading heads, the rest roam.
        for (head, slot) in set.head_assignment.iter().enumerate() {
            if head < total {
                assert_eq!(*slot, Some(head));
            } else {
                assert_eq!(*slot, None);
            }
        }
    }
}

#[test]
fn head_budget_shortfall_is_a_constraint_failure() {
    let g = barbell_triangles();
    let t = minimize(&g, &MinimizeConfig::default()).unwrap();
    let total = (t.height() - 1) + 1;
    for heads in 1..=total {
        let err = build_mask_set(&t, &g, heads).unwrap_err();
        assert!(err.is_constraint(), "heads = {heads} gave {err}");
    }
    assert!(build_mask_set(&t, &g, total + 1).is_ok());
}

#[test]
fn level_mask_bounds_follow_the_tree_height() {
    let g = barbell_triangles();
    let t = minimize(&g, &MinimizeConfig::default()).unwrap();
    assert_eq!(t.height(), 3);
    assert!(level_mask(&t, 1, 6).is_ok());
    assert!(level_mask(&t, 2, 6).is_ok());
    assert!(level_mask(&t, 3, 6).is_err()); // the leaf level is no community
    assert!(level_mask(&t, 0, 6).is_err());
    assert!(level_mask(&t, 1, 5).is_err()); // wrong vertex count
}

#[test]
fn adjacency_mask_covers_either_direction_of_directed_edges() {
    let mut adj = Array2::zeros((3, 3));
    adj[[0, 1]] = 2.0; // one-way edge
    let g = Graph::from_adjacency(adj, true).unwrap();
    let mask = adjacency_mask(&g);
    assert_eq!(mask.source, MaskSource::Adjacency);
    for i in 0..3 {
        assert!(mask.allow[[i, i]]);
    }
    assert!(mask.allow[[0, 1]]);
    assert!(mask.allow[[1, 0]]);
    assert!(!mask.allow[[0, 2]]);
    assert!(!mask.allow[[2, 1]]);
}

#[test]
fn structural_entropy_total_feeds_the_root_ratio() {
    // The root "entropy" used in score ratios is the total: check that the
    // first up-step from a depth-1 child against the frozen total.
    let g = barbell_triangles();
    let t = two_level_tree(&g, &[vec![0, 1, 2], vec![3, 4, 5]]).unwrap();
    let total = structural_entropy(&g, &t).unwrap();
    assert_abs_diff_eq!(total, 1.6995138503199656, epsilon = 1e-12);
}
