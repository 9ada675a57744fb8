//! Encoding-tree integration suite: frozen end-to-end values for the fixed
//! fixtures, randomized delta/trace consistency, serialization laws, and
//! validation of deliberately damaged documents.
//!
//! The decimal constants were produced by an independent reimplementation
//! of the entropy algebra (exhaustive where feasible) and are asserted to
//! 1e-12 — far below any legitimate implementation difference, far above
//! accumulated rounding.

use approx::assert_abs_diff_eq;
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use hierflow::graph::Graph;
use hierflow::synth::{barbell_triangles, cycle, path, random_community};
use hierflow::tree::{
    combine, entropy_delta, exhaustive_min_2level, merge, minimize, minimize_traced,
    set_partitions, structural_entropy, two_level_tree, EncodingTree, MinimizeConfig, Operator,
    ViolationKind,
};

const BELL: [usize; 6] = [1, 2, 5, 15, 52, 203];

fn default_cfg() -> MinimizeConfig {
    MinimizeConfig::default()
}

#[test]
fn partition_enumeration_counts_match_bell_numbers() {
    for (n, &expected) in BELL.iter().enumerate() {
        let count = set_partitions(n + 1).count();
        assert_eq!(count, expected, "partition count for n = {}", n + 1);
    }
}

#[test]
fn barbell_flat_entropy_matches_frozen_value() {
    let g = barbell_triangles();
    let flat = EncodingTree::flat(&g);
    let h = structural_entropy(&g, &flat).unwrap();
    assert_abs_diff_eq!(h, 2.556656707462823, epsilon = 1e-12);
}

#[test]
fn barbell_exhaustive_oracle_finds_the_two_triangles() {
    let g = barbell_triangles();
    let best = exhaustive_min_2level(&g).unwrap();
    let h = structural_entropy(&g, &best).unwrap();
    assert_abs_diff_eq!(h, 1.6995138503199656, epsilon = 1e-12);
    assert_eq!(
        best.level_partition(1).unwrap(),
        vec![vec![0, 1, 2], vec![3, 4, 5]]
    );
}

#[test]
fn barbell_greedy_trace_matches_frozen_steps() {
    let g = barbell_triangles();
    let (tree, trace) = minimize_traced(&g, &default_cfg()).unwrap();
    let expected: [(usize, Operator, usize, usize, f64); 4] = [
        (1, Operator::Combine, 1, 2, 2.2984631471688797),
        (2, Operator::Combine, 7, 3, 2.0127488614545936),
        (3, Operator::Combine, 5, 6, 1.75455530116065),
        (4, Operator::Combine, 4, 9, 1.4688410154463645),
    ];
    assert_eq!(trace.len(), expected.len());
    for (step, (it, op, a, b, h)) in trace.iter().zip(expected) {
        assert_eq!(step.iteration, it);
        assert_eq!(step.operator, op);
        assert_eq!((step.a, step.b), (a, b));
        assert_abs_diff_eq!(step.entropy, h, epsilon = 1e-12);
    }
    let h_final = structural_entropy(&g, &tree).unwrap();
    assert_abs_diff_eq!(h_final, 1.4688410154463645, epsilon = 1e-12);
    assert_eq!(tree.height(), 3);
    // The coarsest community level is the two triangles even though the
    // greedy run settles below the best two-level value.
    assert_eq!(
        tree.level_partition(1).unwrap(),
        vec![vec![0, 1, 2], vec![3, 4, 5]]
    );
    assert_eq!(
        tree.level_partition(2).unwrap(),
        vec![vec![0, 1], vec![2], vec![3], vec![4, 5]]
    );
    assert_eq!(
        tree.level_partition(3).unwrap(),
        vec![vec![0], vec![1], vec![2], vec![3], vec![4], vec![5]]
    );
}

#[test]
fn square_cycle_greedy_and_oracle_agree_at_one_and_a_half_bits() {
    let g = cycle(4).unwrap();
    let flat = structural_entropy(&g, &EncodingTree::flat(&g)).unwrap();
    assert_abs_diff_eq!(flat, 2.0, epsilon = 1e-12);

    let (tree, trace) = minimize_traced(&g, &default_cfg()).unwrap();
    let entropies: Vec<f64> = trace.iter().map(|s| s.entropy).collect();
    assert_eq!(trace.len(), 2);
    assert_abs_diff_eq!(entropies[0], 1.75, epsilon = 1e-12);
    assert_abs_diff_eq!(entropies[1], 1.5, epsilon = 1e-12);
    // Ties on the first step (all four ring edges improve equally) resolve
    // toward the lexicographically smallest leaf pair: vertices {0, 1}.
    assert_eq!((trace[0].a, trace[0].b), (1, 2));
    assert_eq!(
        tree.level_partition(1).unwrap(),
        vec![vec![0, 1], vec![2, 3]]
    );

    let oracle = exhaustive_min_2level(&g).unwrap();
    let h_oracle = structural_entropy(&g, &oracle).unwrap();
    assert_abs_diff_eq!(h_oracle, 1.5, epsilon = 1e-12);
    assert_eq!(
        oracle.level_partition(1).unwrap(),
        vec![vec![0, 1], vec![2, 3]]
    );
}

#[test]
fn two_vertex_path_is_already_optimal() {
    let g = path(2).unwrap();
    let flat = structural_entropy(&g, &EncodingTree::flat(&g)).unwrap();
    assert_abs_diff_eq!(flat, 1.0, epsilon = 1e-15);
    let (tree, trace) = minimize_traced(&g, &default_cfg()).unwrap();
    assert!(trace.is_empty());
    assert_eq!(tree.height(), 1);
    let oracle = exhaustive_min_2level(&g).unwrap();
    assert_abs_diff_eq!(
        structural_entropy(&g, &oracle).unwrap(),
        1.0,
        epsilon = 1e-15
    );
}

#[test]
fn capped_greedy_stays_between_oracle_and_flat() {
    let g = barbell_triangles();
    let flat = structural_entropy(&g, &EncodingTree::flat(&g)).unwrap();

    // Height cap 1 leaves no legal operation at all.
    let cfg1 = MinimizeConfig {
        max_height: Some(1),
        ..default_cfg()
    };
    let (t1, trace1) = minimize_traced(&g, &cfg1).unwrap();
    assert!(trace1.is_empty());
    assert_eq!(t1.height(), 1);

    // Height cap 2 explores exactly the two-level family, whose optimum the
    // exhaustive oracle knows.
    let cfg2 = MinimizeConfig {
        max_height: Some(2),
        ..default_cfg()
    };
    let (t2, trace2) = minimize_traced(&g, &cfg2).unwrap();
    assert!(t2.height() <= 2);
    assert!(!trace2.is_empty());
    let h2 = structural_entropy(&g, &t2).unwrap();
    assert!(h2 <= flat + 1e-12);
    assert!(
        h2 >= 1.6995138503199656 - 1e-12,
        "capped greedy beat the exhaustive two-level optimum: {h2}"
    );

    // Intermediate heights never exceed the cap along the way either.
    let mut t = EncodingTree::flat(&g);
    for step in &trace2 {
        t = match step.operator {
            Operator::Combine => combine(&g, &t, step.a, step.b).unwrap(),
            Operator::Merge => merge(&g, &t, step.a, step.b).unwrap(),
        };
        assert!(t.height() <= 2);
    }
}

#[test]
fn greedy_trace_is_strictly_decreasing_on_community_graphs() {
    for seed in 0..8u64 {
        let n = 8 + (seed as usize % 3) * 4;
        let (g, _) = random_community(n, 2 + seed as usize % 2, 0.85, 0.1, seed).unwrap();
        let flat = structural_entropy(&g, &EncodingTree::flat(&g)).unwrap();
        let (tree, trace) = minimize_traced(&g, &default_cfg()).unwrap();
        let mut prev = flat;
        for step in &trace {
            assert!(
                step.entropy < prev,
                "seed {seed}: trace not strictly decreasing ({} → {})",
                prev,
                step.entropy
            );
            prev = step.entropy;
        }
        let h_final = structural_entropy(&g, &tree).unwrap();
        assert!(h_final <= flat + 1e-12);
        if let Some(last) = trace.last() {
            assert_abs_diff_eq!(last.entropy, h_final, epsilon = 1e-12);
        }
    }
}

#[test]
fn predicted_deltas_match_full_recomputation() {
    let mut rng = ChaCha8Rng::seed_from_u64(20_240_817);
    let mut applications = 0usize;
    'outer: for seed in 0..40u64 {
        let n = 5 + (seed as usize) % 8;
        let (g, _) = random_community(n, 1 + seed as usize % 3, 0.8, 0.25, seed ^ 0x5a5a).unwrap();
        let mut tree = EncodingTree::flat(&g);
        loop {
            let cands = hierflow::tree::candidates(&tree, None);
            if cands.is_empty() {
                continue 'outer;
            }
            let pick = &cands[(rng.next_u64() % cands.len() as u64) as usize];
            let before = structural_entropy(&g, &tree).unwrap();
            let delta = entropy_delta(&g, &tree, pick.operator, pick.a, pick.b).unwrap();
            let next = match pick.operator {
                Operator::Combine => combine(&g, &tree, pick.a, pick.b).unwrap(),
                Operator::Merge => merge(&g, &tree, pick.a, pick.b).unwrap(),
            };
            let after = structural_entropy(&g, &next).unwrap();
            assert!(
                ((after - before) - delta).abs() <= 1e-10,
                "seed {seed}: predicted Δ {delta} but full recomputation moved {}",
                after - before
            );
            tree = next;
            applications += 1;
            if applications.is_multiple_of(7) {
                continue 'outer; // restart on a fresh graph now and then
            }
        }
    }
    assert!(applications >= 200, "only {applications} applications exercised");
}

#[test]
fn json_round_trip_preserves_everything() {
    let g = barbell_triangles();
    let (tree, _) = minimize_traced(&g, &default_cfg()).unwrap();
    let json = tree.to_json_string();
    let back = EncodingTree::from_json_str(&json).unwrap();
    assert_eq!(back.to_json_string(), json);
    assert_abs_diff_eq!(
        structural_entropy(&g, &back).unwrap(),
        structural_entropy(&g, &tree).unwrap(),
        epsilon = 0.0
    );
    assert!(back.validate(&g).ok());
}

#[test]
fn structural_damage_is_rejected_at_parse_time() {
    let g = cycle(4).unwrap();
    let json = minimize(&g, &default_cfg()).unwrap().to_json_string();

    // A child link to a node that does not exist.
    let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    doc["nodes"][0]["children"] = serde_json::json!([5, 99]);
    assert!(EncodingTree::from_json_str(&doc.to_string()).is_err());

    // Root must not name a parent.
    let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    doc["nodes"][0]["parent"] = serde_json::json!(1);
    assert!(EncodingTree::from_json_str(&doc.to_string()).is_err());

    // A node unreachable from the root.
    let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    let orphan = serde_json::json!({
        "id": 64, "parent": 0, "children": [], "vertex": 3, "g": 0.0, "v": 0.0
    });
    doc["nodes"].as_array_mut().unwrap().push(orphan);
    assert!(EncodingTree::from_json_str(&doc.to_string()).is_err());
}

#[test]
fn semantic_damage_is_reported_by_validate() {
    let g = cycle(4).unwrap();
    let tree = minimize(&g, &default_cfg()).unwrap();
    let json = tree.to_json_string();

    // Corrupt one cached volume: loads fine, validate names the cache.
    let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    doc["nodes"][1]["v"] = serde_json::json!(123.0);
    let damaged = EncodingTree::from_json_str(&doc.to_string()).unwrap();
    let report = damaged.validate(&g);
    assert!(!report.ok());
    assert!(report
        .violations
        .iter()
        .any(|v| v.kind == ViolationKind::Cache));

    // Two leaves owning the same vertex: coverage + disjointness.
    let mut doc: serde_json::Value = serde_json::from_str(&json).unwrap();
    for node in doc["nodes"].as_array_mut().unwrap() {
        if node["vertex"] == serde_json::json!(1) {
            node["vertex"] = serde_json::json!(0);
        }
    }
    let damaged = EncodingTree::from_json_str(&doc.to_string()).unwrap();
    let report = damaged.validate(&g);
    let kinds: Vec<ViolationKind> = report.violations.iter().map(|v| v.kind).collect();
    assert!(kinds.contains(&ViolationKind::Coverage), "{kinds:?}");
    assert!(kinds.contains(&ViolationKind::Disjointness), "{kinds:?}");

    // A tree over the wrong vertex count.
    let other = Graph::from_adjacency(ndarray::array![[0.0, 1.0], [1.0, 0.0]], false).unwrap();
    assert!(!tree.validate(&other).ok());
}

#[test]
fn oracle_tree_construction_validates_against_its_graph() {
    let g = barbell_triangles();
    for partition in [
        vec![vec![0u32, 1, 2], vec![3, 4, 5]],
        vec![vec![0u32], vec![1], vec![2], vec![3], vec![4], vec![5]],
        vec![vec![0u32, 3], vec![1, 4], vec![2, 5]],
    ] {
        let t = two_level_tree(&g, &partition).unwrap();
        assert!(t.validate(&g).ok());
    }
    // Oversized enumeration is refused, not attempted.
    let (big, _) = random_community(11, 2, 0.9, 0.1, 1).unwrap();
    assert!(exhaustive_min_2level(&big).is_err());
}

#[test]
fn oracle_never_loses_to_greedy_on_small_graphs() {
    // The exhaustive two-level optimum is a lower bound for any two-level
    // tree the greedy run could produce when capped at height 2.
    for seed in 0..6u64 {
        let n = 5 + seed as usize % 4;
        let (g, _) = random_community(n, 2, 0.9, 0.15, seed).unwrap();
        let oracle = exhaustive_min_2level(&g).unwrap();
        let h_oracle = structural_entropy(&g, &oracle).unwrap();
        let cfg = MinimizeConfig {
            max_height: Some(2),
            ..default_cfg()
        };
        let greedy = minimize(&g, &cfg).unwrap();
        let h_greedy = structural_entropy(&g, &greedy).unwrap();
        assert!(
            h_oracle <= h_greedy + 1e-12,
            "seed {seed}: oracle {h_oracle} worse than capped greedy {h_greedy}"
        );
    }
}
