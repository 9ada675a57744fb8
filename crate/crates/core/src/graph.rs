//! Weighted road-network graphs.
//!
//! A [`Graph`] is a dense, non-negative adjacency matrix with a zero
//! diagonal. Undirected graphs keep the matrix exactly symmetric; directed
//! graphs may be asymmetric and are symmetrized as `(A + Aᵀ)/2` on demand
//! (entropy and Laplacian computations work on the symmetrized view, while
//! hop matrices keep the original orientation).
//!
//! Two interchange formats are supported:
//!
//! * **edge-list CSV** — header `src,dst,weight`, 0-based vertex ids,
//!   duplicate rows accumulate, undirected input mirrors each edge;
//! * **adjacency CSV** — an N×N matrix of reals, no header.

use std::borrow::Cow;
use std::path::Path;

use ndarray::{Array1, Array2};

use crate::error::{Error, Result};

/// Interchange format for [`Graph::load`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GraphFormat {
    /// `src,dst,weight` rows with a header line.
    EdgeList,
    /// Dense N×N matrix, one row per line, no header.
    AdjacencyMatrix,
}

/// Dense weighted graph over vertices `0..n`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    adjacency: Array2<f64>,
    directed: bool,
}

impl Graph {
    /// Build a graph from an adjacency matrix, validating every invariant:
    /// square shape, finite non-negative weights, zero diagonal, and exact
    /// symmetry for undirected graphs.
    pub fn from_adjacency(adjacency: Array2<f64>, directed: bool) -> Result<Self> {
        let (r, c) = adjacency.dim();
        if r != c {
            return Err(Error::InvalidGraph(format!(
                "adjacency matrix is not square: {r} x {c}"
            )));
        }
        if r == 0 {
            return Err(Error::InvalidGraph("graph has no vertices".into()));
        }
        for ((i, j), &w) in adjacency.indexed_iter() {
            if !w.is_finite() {
                return Err(Error::InvalidGraph(format!(
                    "non-finite weight at ({i},{j})"
                )));
            }
            if w < 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "negative weight {w} at ({i},{j})"
                )));
            }
            if i == j && w != 0.0 {
                return Err(Error::InvalidGraph(format!(
                    "nonzero diagonal entry {w} at vertex {i} (self-loops are not allowed)"
                )));
            }
        }
        if !directed {
            for i in 0..r {
                for j in (i + 1)..r {
                    if adjacency[[i, j]] != adjacency[[j, i]] {
                        return Err(Error::InvalidGraph(format!(
                            "undirected graph has asymmetric weights at ({i},{j}): \
                             {} vs {}",
                            adjacency[[i, j]],
                            adjacency[[j, i]]
                        )));
                    }
                }
            }
        }
        Ok(Graph {
            adjacency,
            directed,
        })
    }

    /// Number of vertices.
    pub fn n(&self) -> usize {
        self.adjacency.nrows()
    }

    /// The adjacency matrix.
    pub fn adjacency(&self) -> &Array2<f64> {
        &self.adjacency
    }

    /// Whether the graph was declared directed.
    pub fn directed(&self) -> bool {
        self.directed
    }

    /// Weighted degree of `v`: the row sum of the adjacency matrix.
    pub fn degree(&self, v: usize) -> f64 {
        self.adjacency.row(v).sum()
    }

    /// All weighted degrees.
    pub fn degrees(&self) -> Array1<f64> {
        self.adjacency.sum_axis(ndarray::Axis(1))
    }

    /// Graph volume: the sum of all weighted degrees.
    pub fn volume(&self) -> f64 {
        self.adjacency.sum()
    }

    /// Symmetrized view `(A + Aᵀ)/2`. Borrowed (free) for undirected graphs.
    /// The volume is preserved by this transform.
    pub fn symmetrized(&self) -> Cow<'_, Graph> {
        if !self.directed {
            return Cow::Borrowed(self);
        }
        let sym = (&self.adjacency + &self.adjacency.t()) * 0.5;
        Cow::Owned(Graph {
            adjacency: sym,
            directed: false,
        })
    }

    /// Load a graph from `path`.
    ///
    /// `declared_n` fixes the vertex count up front; ids at or beyond it are
    /// rejected. Without it the count is inferred as `max id + 1` (edge list)
    /// or the matrix size (adjacency).
    pub fn load(
        path: impl AsRef<Path>,
        format: GraphFormat,
        directed: bool,
        declared_n: Option<usize>,
    ) -> Result<Self> {
        match format {
            GraphFormat::EdgeList => Self::from_edge_list_csv(path, directed, declared_n),
            GraphFormat::AdjacencyMatrix => Self::from_adjacency_csv(path, directed, declared_n),
        }
    }

    /// Parse an edge-list CSV (`src,dst,weight` header, 0-based ids).
    /// Duplicate edges accumulate; undirected input mirrors every edge.
    pub fn from_edge_list_csv(
        path: impl AsRef<Path>,
        directed: bool,
        declared_n: Option<usize>,
    ) -> Result<Self> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(&shown, e))?;

        {
            let headers = reader.headers().map_err(|e| csv_error(&shown, e))?;
            let expected = ["src", "dst", "weight"];
            let got: Vec<&str> = headers.iter().collect();
            if got != expected {
                return Err(Error::parse(
                    &shown,
                    1,
                    format!("expected header 'src,dst,weight', found '{}'", got.join(",")),
                ));
            }
        }

        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut max_id = 0usize;
        for (idx, record) in reader.records().enumerate() {
            let line = idx + 2; // 1-based, after the header
            let record = record.map_err(|e| csv_error(&shown, e))?;
            if record.len() != 3 {
                return Err(Error::parse(
                    &shown,
                    line,
                    format!("expected 3 fields, found {}", record.len()),
                ));
            }
            let src: usize = record[0]
                .parse()
                .map_err(|_| Error::parse(&shown, line, format!("bad src id '{}'", &record[0])))?;
            let dst: usize = record[1]
                .parse()
                .map_err(|_| Error::parse(&shown, line, format!("bad dst id '{}'", &record[1])))?;
            let weight: f64 = record[2].parse().map_err(|_| {
                Error::parse(&shown, line, format!("bad weight '{}'", &record[2]))
            })?;
            if !weight.is_finite() {
                return Err(Error::parse(&shown, line, "non-finite weight"));
            }
            if weight < 0.0 {
                return Err(Error::parse(
                    &shown,
                    line,
                    format!("negative weight {weight}"),
                ));
            }
            if src == dst {
                return Err(Error::parse(
                    &shown,
                    line,
                    format!("self-loop on vertex {src} (diagonal must stay zero)"),
                ));
            }
            if let Some(n) = declared_n {
                if src >= n || dst >= n {
                    return Err(Error::parse(
                        &shown,
                        line,
                        format!("vertex id {} >= declared vertex count {n}", src.max(dst)),
                    ));
                }
            }
            max_id = max_id.max(src).max(dst);
            edges.push((src, dst, weight));
        }

        if edges.is_empty() {
            return Err(Error::InvalidGraph(format!("{shown}: no edges")));
        }
        let n = declared_n.unwrap_or(max_id + 1);
        let mut adjacency = Array2::zeros((n, n));
        for (src, dst, weight) in edges {
            adjacency[[src, dst]] += weight;
            if !directed {
                adjacency[[dst, src]] += weight;
            }
        }
        Graph::from_adjacency(adjacency, directed)
    }

    /// Parse a dense adjacency CSV (no header). Undirected input must already
    /// be symmetric.
    pub fn from_adjacency_csv(
        path: impl AsRef<Path>,
        directed: bool,
        declared_n: Option<usize>,
    ) -> Result<Self> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| csv_error(&shown, e))?;

        let mut rows: Vec<Vec<f64>> = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let line = idx + 1;
            let record = record.map_err(|e| csv_error(&shown, e))?;
            let mut row = Vec::with_capacity(record.len());
            for field in record.iter() {
                let w: f64 = field
                    .parse()
                    .map_err(|_| Error::parse(&shown, line, format!("bad weight '{field}'")))?;
                row.push(w);
            }
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::InvalidGraph(format!("{shown}: empty matrix")));
        }
        let n = rows.len();
        if let Some(declared) = declared_n {
            if declared != n {
                return Err(Error::InvalidGraph(format!(
                    "{shown}: declared vertex count {declared} but matrix has {n} rows"
                )));
            }
        }
        let mut adjacency = Array2::zeros((n, n));
        for (i, row) in rows.iter().enumerate() {
            if row.len() != n {
                return Err(Error::parse(
                    &shown,
                    i + 1,
                    format!("expected {n} columns, found {}", row.len()),
                ));
            }
            for (j, &w) in row.iter().enumerate() {
                adjacency[[i, j]] = w;
            }
        }
        Graph::from_adjacency(adjacency, directed)
    }

    /// Write the graph as an edge-list CSV. Undirected graphs emit each edge
    /// once (upper triangle); directed graphs emit every nonzero entry.
    pub fn write_edge_list_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        let shown = path.display().to_string();
        let mut out = String::from("src,dst,weight\n");
        let n = self.n();
        for i in 0..n {
            let start = if self.directed { 0 } else { i + 1 };
            for j in start..n {
                if i == j {
                    continue;
                }
                let w = self.adjacency[[i, j]];
                if w > 0.0 {
                    out.push_str(&format!("{i},{j},{w:.9}\n"));
                }
            }
        }
        std::fs::write(path, out).map_err(|e| Error::io(shown, e))
    }
}

fn csv_error(path: &str, e: csv::Error) -> Error {
    let line = match e.position() {
        Some(pos) => pos.line() as usize,
        None => 0,
    };
    Error::parse(path, line, e.to_string())
}
