//! Spectral machinery: normalized Laplacian, a deterministic symmetric
//! eigensolver, and Laplacian positional encodings.
//!
//! The eigensolver is a cyclic Jacobi iteration. It is not the fastest
//! option, but it is dependency-free, bitwise deterministic for a given
//! input, and plenty for desk-scale matrices (hundreds to a couple thousand
//! rows). Determinism matters more than speed here: positional encodings are
//! part of reproducible pipeline outputs.
//!
//! Conventions:
//!
//! * eigenvalues ascend; ties keep the pre-sort (rotation) order;
//! * each eigenvector is sign-fixed so that its first component with
//!   magnitude above 1e-12 is positive;
//! * zero-degree vertices get an all-zero Laplacian row and column
//!   (including the diagonal), which adds one trivial zero eigenvalue per
//!   isolated vertex — consistent with "one zero eigenvalue per connected
//!   component".

use ndarray::{Array1, Array2, ArrayView2};

use crate::error::{Error, Result};
use crate::graph::Graph;

/// Absolute symmetry tolerance enforced on eigensolver inputs.
pub const SYMMETRY_TOL: f64 = 1e-12;

/// Default Jacobi convergence tolerance (scaled by the Frobenius norm).
pub const DEFAULT_EIG_TOL: f64 = 1e-12;

/// Default Jacobi sweep budget.
pub const DEFAULT_MAX_SWEEPS: usize = 128;

/// Eigenvalues below this magnitude count as trivial (component indicators)
/// when selecting positional-encoding columns.
pub const TRIVIAL_EIGENVALUE_TOL: f64 = 1e-9;

/// Eigendecomposition of a symmetric matrix: `values[i]` pairs with the
/// column `vectors[:, i]`.
#[derive(Debug, Clone)]
pub struct EigenBasis {
    pub values: Array1<f64>,
    pub vectors: Array2<f64>,
}

/// Symmetric normalized Laplacian `I − D^{−1/2} A D^{−1/2}`.
///
/// The graph must be undirected (symmetrize directed input first). Vertices
/// with zero degree get `D^{−1/2} = 0` and a fully zero row/column, diagonal
/// included.
pub fn normalized_laplacian(g: &Graph) -> Result<Array2<f64>> {
    if g.directed() {
        return Err(Error::Precondition(
            "normalized_laplacian requires an undirected graph; symmetrize first".into(),
        ));
    }
    let n = g.n();
    let degrees = g.degrees();
    let inv_sqrt: Vec<f64> = degrees
        .iter()
        .map(|&d| if d > 0.0 { 1.0 / d.sqrt() } else { 0.0 })
        .collect();
    let a = g.adjacency();
    let mut l = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            if i == j {
                l[[i, j]] = if degrees[i] > 0.0 { 1.0 } else { 0.0 };
            }
            l[[i, j]] -= inv_sqrt[i] * a[[i, j]] * inv_sqrt[j];
        }
    }
    Ok(l)
}

/// Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// `tol` scales the convergence threshold on the off-diagonal Frobenius norm;
/// `max_sweeps` bounds the iteration count (an error is returned when the
/// budget is exhausted). Input must be symmetric within [`SYMMETRY_TOL`].
pub fn eigh(m: &ArrayView2<f64>, tol: f64, max_sweeps: usize) -> Result<EigenBasis> {
    let (r, c) = m.dim();
    if r != c {
        return Err(Error::DimMismatch {
            stage: "eigh".into(),
            msg: format!("matrix is not square: {r} x {c}"),
        });
    }
    for i in 0..r {
        for j in (i + 1)..r {
            let diff = (m[[i, j]] - m[[j, i]]).abs();
            if diff > SYMMETRY_TOL {
                return Err(Error::NotSymmetric { i, j, diff });
            }
        }
    }

    let n = r;
    let mut a = m.to_owned();
    let mut v = Array2::eye(n);
    if n == 1 {
        return Ok(EigenBasis {
            values: Array1::from(vec![a[[0, 0]]]),
            vectors: v,
        });
    }

    let scale = a.iter().map(|x| x * x).sum::<f64>().sqrt().max(1.0);
    let threshold = tol * scale;

    let mut converged = false;
    for _ in 0..max_sweeps {
        let off = off_diagonal_norm(&a);
        if off <= threshold {
            converged = true;
            break;
        }
        for p in 0..n - 1 {
            for q in p + 1..n {
                let apq = a[[p, q]];
                if apq.abs() <= threshold / (n as f64) {
                    continue;
                }
                // Standard two-sided Jacobi rotation zeroing a[p,q].
                let theta = (a[[q, q]] - a[[p, p]]) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let cos = 1.0 / (t * t + 1.0).sqrt();
                let sin = t * cos;
                for k in 0..n {
                    let akp = a[[k, p]];
                    let akq = a[[k, q]];
                    a[[k, p]] = cos * akp - sin * akq;
                    a[[k, q]] = sin * akp + cos * akq;
                }
                for k in 0..n {
                    let apk = a[[p, k]];
                    let aqk = a[[q, k]];
                    a[[p, k]] = cos * apk - sin * aqk;
                    a[[q, k]] = sin * apk + cos * aqk;
                }
                for k in 0..n {
                    let vkp = v[[k, p]];
                    let vkq = v[[k, q]];
                    v[[k, p]] = cos * vkp - sin * vkq;
                    v[[k, q]] = sin * vkp + cos * vkq;
                }
            }
        }
    }
    if !converged && off_diagonal_norm(&a) > threshold {
        return Err(Error::NoConvergence {
            sweeps: max_sweeps,
            off: off_diagonal_norm(&a),
        });
    }

    // Sort ascending by eigenvalue; the stable sort keeps rotation order on
    // exact ties, so degenerate eigenspaces come out in a fixed basis.
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[[i, i]].total_cmp(&a[[j, j]]));

    let mut values = Array1::zeros(n);
    let mut vectors = Array2::zeros((n, n));
    for (dst, &src) in order.iter().enumerate() {
        values[dst] = a[[src, src]];
        let mut col: Vec<f64> = (0..n).map(|k| v[[k, src]]).collect();
        // Deterministic sign: first component with magnitude > 1e-12 positive.
        if let Some(first) = col.iter().find(|x| x.abs() > 1e-12) {
            if *first < 0.0 {
                for x in col.iter_mut() {
                    *x = -*x;
                }
            }
        }
        for k in 0..n {
            vectors[[k, dst]] = col[k];
        }
    }
    Ok(EigenBasis { values, vectors })
}

fn off_diagonal_norm(a: &Array2<f64>) -> f64 {
    let n = a.nrows();
    let mut sum = 0.0;
    for i in 0..n {
        for j in 0..n {
            if i != j {
                sum += a[[i, j]] * a[[i, j]];
            }
        }
    }
    sum.sqrt()
}

/// Laplacian positional encoding: the `k` eigenvectors of the normalized
/// Laplacian with the smallest non-trivial eigenvalues, as an N×k matrix.
///
/// Eigenvalues with magnitude below [`TRIVIAL_EIGENVALUE_TOL`] are component
/// indicators and are skipped. Requires `1 <= k <= n − 1` and enough
/// non-trivial eigenpairs (a disconnected graph donates one trivial pair per
/// component, shrinking the budget).
pub fn laplacian_pe(g: &Graph, k: usize) -> Result<Array2<f64>> {
    if g.directed() {
        return Err(Error::Precondition(
            "laplacian_pe requires an undirected graph; symmetrize first".into(),
        ));
    }
    let n = g.n();
    if k == 0 || k > n.saturating_sub(1) {
        return Err(Error::Precondition(format!(
            "positional-encoding width k={k} out of range (need 1 <= k <= {})",
            n.saturating_sub(1)
        )));
    }
    let l = normalized_laplacian(g)?;
    let eig = eigh(&l.view(), DEFAULT_EIG_TOL, DEFAULT_MAX_SWEEPS)?;
    let nontrivial: Vec<usize> = (0..n)
        .filter(|&i| eig.values[i].abs() >= TRIVIAL_EIGENVALUE_TOL)
        .collect();
    if nontrivial.len() < k {
        return Err(Error::Precondition(format!(
            "graph has only {} non-trivial eigenpairs, need {k} \
             (each connected component contributes one trivial pair)",
            nontrivial.len()
        )));
    }
    let mut pe = Array2::zeros((n, k));
    for (col, &src) in nontrivial.iter().take(k).enumerate() {
        for row in 0..n {
            pe[[row, col]] = eig.vectors[[row, src]];
        }
    }
    Ok(pe)
}
