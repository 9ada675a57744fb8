//! Token lifting: multi-filter temporal convolutions and multi-hop graph
//! aggregation.
//!
//! A raw series window (T×N×C) becomes model tokens in two linear stages:
//!
//! 1. [`temporal_multifilter`] — every filter in a [`TemporalKernelBank`]
//!    slides over the replicate-padded time axis of each node independently
//!    and contributes an equal share of the `c_t` output channels; a stride
//!    `s` compresses T to `⌈T/s⌉`.
//! 2. [`graph_multihop`] — per time step, the node features are mixed by the
//!    powers `Â⁰ … Â^h` of the row-stochastic walk matrix `Â = D⁻¹(A+I)` and
//!    the results are concatenated along channels, giving `d = (h+1)·c_t`.
//!
//! [`mfcl`] composes the two. Both stages are embarrassingly parallel (over
//! nodes, respectively time steps); the `*_par` variants fan out with rayon
//! and produce bit-identical results to their `*_seq` twins because each
//! output block is computed independently and assembled in index order.

use ndarray::{s, Array2, Array3, ArrayView2};
use rand::RngCore;
#[cfg(feature = "parallel")]
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::graph::Graph;

/// A window of multivariate node series: `data[t, n, c]` plus the wall-clock
/// anchoring needed for timestamp features.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesWindow {
    pub data: Array3<f64>,
    /// Minutes between consecutive steps.
    pub interval_minutes: u32,
    /// Unix timestamp (seconds) of step 0.
    pub start_timestamp: i64,
}

impl SeriesWindow {
    pub fn new(data: Array3<f64>, interval_minutes: u32, start_timestamp: i64) -> Result<Self> {
        let (t, n, c) = data.dim();
        if t == 0 || n == 0 || c == 0 {
            return Err(Error::DimMismatch {
                stage: "series window".into(),
                msg: format!("all dimensions must be positive (got {t}×{n}×{c})"),
            });
        }
        if interval_minutes == 0 {
            return Err(Error::Precondition(
                "series interval must be positive".into(),
            ));
        }
        if data.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite {
                stage: "series window".into(),
            });
        }
        Ok(SeriesWindow {
            data,
            interval_minutes,
            start_timestamp,
        })
    }

    pub fn len(&self) -> usize {
        self.data.dim().0
    }

    pub fn is_empty(&self) -> bool {
        false // construction requires T ≥ 1
    }

    pub fn nodes(&self) -> usize {
        self.data.dim().1
    }

    pub fn channels(&self) -> usize {
        self.data.dim().2
    }
}

/// One temporal filter: `weights[l, i, o]` maps input channel `i` at window
/// offset `l` to output channel `o`.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalFilter {
    pub size: usize,
    pub weights: Array3<f64>,
}

/// A bank of temporal filters sharing input channels and splitting the
/// output channels equally, applied with a common stride.
#[derive(Debug, Clone, PartialEq)]
pub struct TemporalKernelBank {
    filters: Vec<TemporalFilter>,
    stride: usize,
}

impl TemporalKernelBank {
    pub fn new(filters: Vec<TemporalFilter>, stride: usize) -> Result<Self> {
        if filters.is_empty() {
            return Err(Error::Precondition("kernel bank needs at least one filter".into()));
        }
        if stride == 0 {
            return Err(Error::Precondition("stride must be at least 1".into()));
        }
        let c_in = filters[0].weights.dim().1;
        let c_share = filters[0].weights.dim().2;
        for (j, f) in filters.iter().enumerate() {
            let (k, ci, co) = f.weights.dim();
            if k != f.size || f.size == 0 {
                return Err(Error::DimMismatch {
                    stage: "kernel bank".into(),
                    msg: format!("filter {j} declares size {} but carries {k} taps", f.size),
                });
            }
            if ci != c_in || co != c_share {
                return Err(Error::DimMismatch {
                    stage: "kernel bank".into(),
                    msg: format!(
                        "filter {j} shape {k}×{ci}×{co} disagrees with filter 0's {}×{c_in}×{c_share}",
                        filters[0].size
                    ),
                });
            }
            if f.weights.iter().any(|x| !x.is_finite()) {
                return Err(Error::NonFinite {
                    stage: format!("kernel bank filter {j}"),
                });
            }
        }
        Ok(TemporalKernelBank { filters, stride })
    }

    /// A single size-1 identity filter: output equals input (for `stride`
    /// 1), the neutral bank used in pass-through tests.
    pub fn identity(channels: usize) -> Self {
        let mut w = Array3::zeros((1, channels, channels));
        for c in 0..channels {
            w[[0, c, c]] = 1.0;
        }
        TemporalKernelBank {
            filters: vec![TemporalFilter { size: 1, weights: w }],
            stride: 1,
        }
    }

    /// A seeded bank: for each requested size, taps uniform in
    /// `±1/√(size·c_in)`, drawn row-major from `rng` in filter order. The
    /// total output channel count `c_t` must split evenly across filters.
    pub fn seeded<R: RngCore>(
        sizes: &[usize],
        c_in: usize,
        c_t: usize,
        stride: usize,
        rng: &mut R,
    ) -> Result<Self> {
        if sizes.is_empty() {
            return Err(Error::Precondition("kernel bank needs at least one filter".into()));
        }
        if !c_t.is_multiple_of(sizes.len()) {
            return Err(Error::Precondition(format!(
                "output channels c_t = {c_t} must be divisible by the filter count {}",
                sizes.len()
            )));
        }
        let c_share = c_t / sizes.len();
        let filters = sizes
            .iter()
            .map(|&k| {
                let scale = 1.0 / ((k * c_in) as f64).sqrt();
                let mut w = Array3::zeros((k, c_in, c_share));
                for x in w.iter_mut() {
                    *x = (2.0 * unit_f64(rng) - 1.0) * scale;
                }
                TemporalFilter { size: k, weights: w }
            })
            .collect();
        TemporalKernelBank::new(filters, stride)
    }

    pub fn filters(&self) -> &[TemporalFilter] {
        &self.filters
    }

    pub fn stride(&self) -> usize {
        self.stride
    }

    pub fn c_in(&self) -> usize {
        self.filters[0].weights.dim().1
    }

    /// Total output channels across all filters.
    pub fn c_out(&self) -> usize {
        self.filters[0].weights.dim().2 * self.filters.len()
    }
}

/// Map a raw 64-bit draw to a double in `[0, 1)` using the top 53 bits —
/// stable across RNG-crate versions because only `next_u64` is consumed.
pub(crate) fn unit_f64<R: RngCore>(rng: &mut R) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64
}

/// Replicate-pad a T×C series for a size-`k` valid convolution: `⌈(k−1)/2⌉`
/// copies of the first row in front, `⌊(k−1)/2⌋` copies of the last row
/// behind, so output length T is preserved at stride 1.
pub fn pad_replicate(x: ArrayView2<'_, f64>, k: usize) -> Array2<f64> {
    let (t, c) = x.dim();
    let front = k.saturating_sub(1).div_ceil(2);
    let back = k.saturating_sub(1) / 2;
    let mut out = Array2::zeros((t + front + back, c));
    for p in 0..front {
        out.slice_mut(s![p, ..]).assign(&x.row(0));
    }
    out.slice_mut(s![front..front + t, ..]).assign(&x);
    for p in 0..back {
        out.slice_mut(s![front + t + p, ..]).assign(&x.row(t - 1));
    }
    out
}

/// Output length of the strided filters: `⌈T/s⌉`.
pub fn strided_len(t: usize, stride: usize) -> usize {
    t.div_ceil(stride)
}

fn filter_one_node(
    series: ArrayView2<'_, f64>, // T×C_in
    bank: &TemporalKernelBank,
    t_out: usize,
) -> Array2<f64> {
    let c_share = bank.filters[0].weights.dim().2;
    let mut out = Array2::zeros((t_out, bank.c_out()));
    for (j, f) in bank.filters.iter().enumerate() {
        let padded = pad_replicate(series, f.size);
        let base = j * c_share;
        for p in 0..t_out {
            let start = p * bank.stride;
            for o in 0..c_share {
                let mut acc = 0.0;
                for l in 0..f.size {
                    for i in 0..bank.c_in() {
                        acc += f.weights[[l, i, o]] * padded[[start + l, i]];
                    }
                }
                out[[p, base + o]] = acc;
            }
        }
    }
    out
}

fn check_multifilter_dims(w: &SeriesWindow, bank: &TemporalKernelBank) -> Result<()> {
    if bank.c_in() != w.channels() {
        return Err(Error::DimMismatch {
            stage: "temporal filtering".into(),
            msg: format!(
                "bank expects {} input channels, series has {}",
                bank.c_in(),
                w.channels()
            ),
        });
    }
    Ok(())
}

fn assemble_nodes(blocks: Vec<Array2<f64>>, t_out: usize, c_out: usize) -> Array3<f64> {
    let n = blocks.len();
    let mut out = Array3::zeros((t_out, n, c_out));
    for (node, block) in blocks.into_iter().enumerate() {
        out.slice_mut(s![.., node, ..]).assign(&block);
    }
    out
}

/// Strided multi-filter temporal convolution, node by node, sequentially.
pub fn temporal_multifilter_seq(
    w: &SeriesWindow,
    bank: &TemporalKernelBank,
) -> Result<Array3<f64>> {
    check_multifilter_dims(w, bank)?;
    let t_out = strided_len(w.len(), bank.stride());
    let blocks: Vec<Array2<f64>> = (0..w.nodes())
        .map(|n| filter_one_node(w.data.slice(s![.., n, ..]), bank, t_out))
        .collect();
    Ok(assemble_nodes(blocks, t_out, bank.c_out()))
}

/// [`temporal_multifilter_seq`] fanned out over nodes with rayon;
/// bit-identical output.
#[cfg(feature = "parallel")]
pub fn temporal_multifilter_par(
    w: &SeriesWindow,
    bank: &TemporalKernelBank,
) -> Result<Array3<f64>> {
    check_multifilter_dims(w, bank)?;
    let t_out = strided_len(w.len(), bank.stride());
    let blocks: Vec<Array2<f64>> = (0..w.nodes())
        .into_par_iter()
        .map(|n| filter_one_node(w.data.slice(s![.., n, ..]), bank, t_out))
        .collect();
    Ok(assemble_nodes(blocks, t_out, bank.c_out()))
}

/// Dispatches to the parallel implementation when the `parallel` feature is
/// on, the sequential one otherwise.
pub fn temporal_multifilter(w: &SeriesWindow, bank: &TemporalKernelBank) -> Result<Array3<f64>> {
    #[cfg(feature = "parallel")]
    {
        temporal_multifilter_par(w, bank)
    }
    #[cfg(not(feature = "parallel"))]
    {
        temporal_multifilter_seq(w, bank)
    }
}

/// The powers `Â⁰ … Â^h` of the self-loop random-walk matrix
/// `Â = D⁻¹(A+I)`, built on the original (possibly directed) adjacency with
/// `D` the row sums of `A+I`. Every power is exactly row-stochastic.
#[derive(Debug, Clone, PartialEq)]
pub struct HopStack {
    matrices: Vec<Array2<f64>>,
}

impl HopStack {
    pub fn new(g: &Graph, hops: usize) -> HopStack {
        let n = g.n();
        let adj = g.adjacency();
        let mut a_hat = Array2::zeros((n, n));
        for i in 0..n {
            let mut row_sum = 1.0; // the self loop
            for j in 0..n {
                row_sum += adj[[i, j]];
            }
            for j in 0..n {
                let w = adj[[i, j]] + if i == j { 1.0 } else { 0.0 };
                a_hat[[i, j]] = w / row_sum;
            }
        }
        let mut matrices = Vec::with_capacity(hops + 1);
        matrices.push(Array2::eye(n));
        for j in 1..=hops {
            let prev = &matrices[j - 1];
            matrices.push(prev.dot(&a_hat));
        }
        HopStack { matrices }
    }

    /// Highest power, `h`.
    pub fn hops(&self) -> usize {
        self.matrices.len() - 1
    }

    pub fn n(&self) -> usize {
        self.matrices[0].nrows()
    }

    /// `Â⁰ … Â^h`, ascending.
    pub fn matrices(&self) -> &[Array2<f64>] {
        &self.matrices
    }
}

fn check_multihop_dims(x: &Array3<f64>, stack: &HopStack) -> Result<()> {
    if x.dim().1 != stack.n() {
        return Err(Error::DimMismatch {
            stage: "graph aggregation".into(),
            msg: format!(
                "tokens cover {} nodes, hop matrices are {}×{}",
                x.dim().1,
                stack.n(),
                stack.n()
            ),
        });
    }
    Ok(())
}

fn hop_one_step(x_t: ArrayView2<'_, f64>, stack: &HopStack) -> Array2<f64> {
    let (n, c) = x_t.dim();
    let hops = stack.hops();
    let mut out = Array2::zeros((n, (hops + 1) * c));
    for (j, m) in stack.matrices().iter().enumerate() {
        let mixed = m.dot(&x_t);
        out.slice_mut(s![.., j * c..(j + 1) * c]).assign(&mixed);
    }
    out
}

fn assemble_steps(blocks: Vec<Array2<f64>>, n: usize, c_out: usize) -> Array3<f64> {
    let t = blocks.len();
    let mut out = Array3::zeros((t, n, c_out));
    for (step, block) in blocks.into_iter().enumerate() {
        out.slice_mut(s![step, .., ..]).assign(&block);
    }
    out
}

/// Per time step, concatenate `Â^j · X_t` for `j = 0..=h` along channels,
/// sequentially over steps.
pub fn graph_multihop_seq(x: &Array3<f64>, stack: &HopStack) -> Result<Array3<f64>> {
    check_multihop_dims(x, stack)?;
    let (t, n, c) = x.dim();
    let blocks: Vec<Array2<f64>> = (0..t)
        .map(|step| hop_one_step(x.slice(s![step, .., ..]), stack))
        .collect();
    Ok(assemble_steps(blocks, n, (stack.hops() + 1) * c))
}

/// [`graph_multihop_seq`] fanned out over time steps with rayon;
/// bit-identical output.
#[cfg(feature = "parallel")]
pub fn graph_multihop_par(x: &Array3<f64>, stack: &HopStack) -> Result<Array3<f64>> {
    check_multihop_dims(x, stack)?;
    let (t, n, c) = x.dim();
    let blocks: Vec<Array2<f64>> = (0..t)
        .into_par_iter()
        .map(|step| hop_one_step(x.slice(s![step, .., ..]), stack))
        .collect();
    Ok(assemble_steps(blocks, n, (stack.hops() + 1) * c))
}

/// Dispatches to the parallel implementation when the `parallel` feature is
/// on, the sequential one otherwise.
pub fn graph_multihop(x: &Array3<f64>, stack: &HopStack) -> Result<Array3<f64>> {
    #[cfg(feature = "parallel")]
    {
        graph_multihop_par(x, stack)
    }
    #[cfg(not(feature = "parallel"))]
    {
        graph_multihop_seq(x, stack)
    }
}

/// The full token-lifting module: temporal filtering, then multi-hop graph
/// aggregation. Output is `⌈T/s⌉ × N × (h+1)·c_t`.
pub fn mfcl(
    w: &SeriesWindow,
    bank: &TemporalKernelBank,
    stack: &HopStack,
) -> Result<Array3<f64>> {
    if stack.n() != w.nodes() {
        return Err(Error::DimMismatch {
            stage: "token lifting".into(),
            msg: format!(
                "series covers {} nodes, hop matrices are {}×{}",
                w.nodes(),
                stack.n(),
                stack.n()
            ),
        });
    }
    let filtered = temporal_multifilter(w, bank)?;
    graph_multihop(&filtered, stack)
}
