//! Deterministic generators for graphs and traffic-like series, used by the
//! CLI `synth` subcommand, the benches, and the test suite.
//!
//! Everything here is seeded and reproducible: the same arguments always
//! produce bit-identical output. Random draws come from a single ChaCha8
//! stream through the same top-53-bit mapping the weight initializer uses.

use ndarray::{Array2, Array3};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::kernels::{unit_f64, SeriesWindow};

/// Ring of `n ≥ 3` unit-weight edges.
pub fn cycle(n: usize) -> Result<Graph> {
    if n < 3 {
        return Err(Error::Precondition(format!(
            "a cycle needs at least 3 vertices, got {n}"
        )));
    }
    let mut adj = Array2::zeros((n, n));
    for i in 0..n {
        let j = (i + 1) % n;
        adj[[i, j]] = 1.0;
        adj[[j, i]] = 1.0;
    }
    Graph::from_adjacency(adj, false)
}

/// Chain of `n ≥ 2` vertices with unit-weight edges.
pub fn path(n: usize) -> Result<Graph> {
    if n < 2 {
        return Err(Error::Precondition(format!(
            "a path needs at least 2 vertices, got {n}"
        )));
    }
    let mut adj = Array2::zeros((n, n));
    for i in 0..n - 1 {
        adj[[i, i + 1]] = 1.0;
        adj[[i + 1, i]] = 1.0;
    }
    Graph::from_adjacency(adj, false)
}

/// `rows × cols` lattice with 4-neighborhood unit-weight edges; vertex
/// `(r, c)` has index `r·cols + c`.
pub fn grid(rows: usize, cols: usize) -> Result<Graph> {
    if rows == 0 || cols == 0 || rows * cols < 2 {
        return Err(Error::Precondition(format!(
            "a grid needs at least 2 vertices, got {rows}×{cols}"
        )));
    }
    let n = rows * cols;
    let mut adj = Array2::zeros((n, n));
    for r in 0..rows {
        for c in 0..cols {
            let v = r * cols + c;
            if c + 1 < cols {
                adj[[v, v + 1]] = 1.0;
                adj[[v + 1, v]] = 1.0;
            }
            if r + 1 < rows {
                adj[[v, v + cols]] = 1.0;
                adj[[v + cols, v]] = 1.0;
            }
        }
    }
    Graph::from_adjacency(adj, false)
}

/// Two unit-weight triangles `{0,1,2}` and `{3,4,5}` joined by the bridge
/// `2–3`: the smallest graph whose optimal two-level grouping is
/// unambiguous.
pub fn barbell_triangles() -> Graph {
    let mut adj = Array2::zeros((6, 6));
    for &(a, b) in &[(0, 1), (0, 2), (1, 2), (3, 4), (3, 5), (4, 5), (2, 3)] {
        adj[[a, b]] = 1.0;
        adj[[b, a]] = 1.0;
    }
    Graph::from_adjacency(adj, false).expect("fixed adjacency is valid")
}

/// Planted-community graph: `n` vertices in `communities` contiguous,
/// near-equal blocks; each unordered pair gets an edge with probability
/// `p_in` (same block) or `p_out` (different blocks), with weight uniform in
/// `[0.5, 1.5)`. Returns the graph and the block assignment per vertex.
///
/// Draw order: pairs `(i, j)` with `i < j`, `i` ascending then `j`; one
/// presence draw per pair, one weight draw only when the edge exists.
pub fn random_community(
    n: usize,
    communities: usize,
    p_in: f64,
    p_out: f64,
    seed: u64,
) -> Result<(Graph, Vec<usize>)> {
    if communities == 0 || n < communities {
        return Err(Error::Precondition(format!(
            "need 1 ≤ communities ≤ vertices, got {communities} communities on {n} vertices"
        )));
    }
    if !(0.0..=1.0).contains(&p_in) || !(0.0..=1.0).contains(&p_out) || p_out >= p_in {
        return Err(Error::Precondition(format!(
            "edge probabilities must satisfy 0 ≤ p_out < p_in ≤ 1, got p_in {p_in}, p_out {p_out}"
        )));
    }
    let base = n / communities;
    let extra = n % communities;
    let mut assignment = Vec::with_capacity(n);
    for block in 0..communities {
        let size = base + usize::from(block < extra);
        assignment.extend(std::iter::repeat_n(block, size));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut adj = Array2::zeros((n, n));
    for i in 0..n {
        for j in i + 1..n {
            let p = if assignment[i] == assignment[j] {
                p_in
            } else {
                p_out
            };
            let present = unit_f64(&mut rng) < p;
            if present {
                let w = 0.5 + unit_f64(&mut rng);
                adj[[i, j]] = w;
                adj[[j, i]] = w;
            }
        }
    }
    let g = Graph::from_adjacency(adj, false)?;
    Ok((g, assignment))
}

/// Smooth daily-cycle series over the given community assignment:
/// `x[t, v, c] = 1 + sin(2π·t·interval/1440 + 2π·community(v)/(B+1) + π·c/(2C)) + σ·ξ`
/// with `ξ` standard normal (Box–Muller over two uniform draws, entries in
/// `t`-major, vertex, channel order) and `B` the largest community index.
pub fn synth_series(
    assignment: &[usize],
    t_len: usize,
    channels: usize,
    interval_minutes: u32,
    start_timestamp: i64,
    seed: u64,
    noise_sigma: f64,
) -> Result<SeriesWindow> {
    if assignment.is_empty() || t_len == 0 || channels == 0 {
        return Err(Error::Precondition(
            "series generation needs vertices, steps, and channels".into(),
        ));
    }
    if !noise_sigma.is_finite() || noise_sigma < 0.0 {
        return Err(Error::Precondition(format!(
            "noise level must be finite and non-negative, got {noise_sigma}"
        )));
    }
    let n = assignment.len();
    let blocks = assignment.iter().copied().max().unwrap_or(0) + 1;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let gauss = |rng: &mut ChaCha8Rng| -> f64 {
        let u1 = unit_f64(rng).max(f64::MIN_POSITIVE);
        let u2 = unit_f64(rng);
        (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
    };
    let mut data = Array3::zeros((t_len, n, channels));
    let tau = 2.0 * std::f64::consts::PI;
    for t in 0..t_len {
        let day_phase = tau * (t as f64) * f64::from(interval_minutes) / 1440.0;
        for (v, &block) in assignment.iter().enumerate() {
            let block_phase = tau * block as f64 / blocks as f64;
            for c in 0..channels {
                let channel_phase =
                    std::f64::consts::PI * c as f64 / (2.0 * channels as f64);
                let clean = 1.0 + (day_phase + block_phase + channel_phase).sin();
                data[[t, v, c]] = clean + noise_sigma * gauss(&mut rng);
            }
        }
    }
    SeriesWindow::new(data, interval_minutes, start_timestamp)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixed_shapes_have_expected_volumes() {
        assert_eq!(cycle(4).unwrap().volume(), 8.0);
        assert_eq!(path(3).unwrap().volume(), 4.0);
        assert_eq!(grid(2, 3).unwrap().volume(), 14.0); // 7 edges
        assert_eq!(barbell_triangles().volume(), 14.0);
        assert!(cycle(2).is_err());
        assert!(grid(0, 5).is_err());
    }

    #[test]
    fn planted_communities_are_deterministic_and_block_structured() {
        let (g1, a1) = random_community(9, 3, 1.0, 0.0, 5).unwrap();
        let (g2, a2) = random_community(9, 3, 1.0, 0.0, 5).unwrap();
        assert_eq!(g1.adjacency(), g2.adjacency());
        assert_eq!(a1, a2);
        assert_eq!(a1, vec![0, 0, 0, 1, 1, 1, 2, 2, 2]);
        // p_in = 1, p_out = 0: cliques inside blocks, nothing across.
        for i in 0..9 {
            for j in 0..9 {
                let inside = a1[i] == a1[j] && i != j;
                assert_eq!(g1.adjacency()[[i, j]] > 0.0, inside, "pair ({i}, {j})");
                if inside {
                    let w = g1.adjacency()[[i, j]];
                    assert!((0.5..1.5).contains(&w));
                }
            }
        }
        let (g3, _) = random_community(9, 3, 1.0, 0.0, 6).unwrap();
        assert_ne!(g1.adjacency(), g3.adjacency());
    }

    #[test]
    fn uneven_split_puts_extras_in_leading_blocks() {
        let (_, a) = random_community(7, 3, 0.9, 0.1, 1).unwrap();
        assert_eq!(a, vec![0, 0, 0, 1, 1, 2, 2]);
    }

    #[test]
    fn noise_free_series_stays_in_band() {
        let (_, a) = random_community(6, 2, 1.0, 0.0, 3).unwrap();
        let w = synth_series(&a, 48, 2, 5, 345_600, 11, 0.0).unwrap();
        assert_eq!(w.data.dim(), (48, 6, 2));
        for &x in &w.data {
            assert!((0.0..=2.0).contains(&x));
        }
        let w2 = synth_series(&a, 48, 2, 5, 345_600, 11, 0.0).unwrap();
        assert_eq!(w.data, w2.data);
    }

    #[test]
    fn noisy_series_is_seed_deterministic() {
        let a = vec![0, 0, 1, 1];
        let w1 = synth_series(&a, 12, 1, 5, 345_600, 7, 0.1).unwrap();
        let w2 = synth_series(&a, 12, 1, 5, 345_600, 7, 0.1).unwrap();
        let w3 = synth_series(&a, 12, 1, 5, 345_600, 8, 0.1).unwrap();
        assert_eq!(w1.data, w2.data);
        assert_ne!(w1.data, w3.data);
    }
}
