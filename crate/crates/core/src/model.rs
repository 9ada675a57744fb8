//! Forward-only spatiotemporal transformer.
//!
//! The encoder stack consumes lifted tokens (`⌈T/s⌉ × N × d` from the kernel
//! module), applies `k` layers of temporal-then-spatial masked multi-head
//! attention with residual connections, sums the token input with every
//! layer output (dense skip aggregation), and maps the result to a
//! `horizon × N × C_o` prediction.
//!
//! Conventions, fixed across the crate:
//!
//! * attention logits are `(Q·Kᵀ + S) / √d_h`, where the hierarchical score
//!   matrix `S` (spatial sublayers only) is added to **every** head before
//!   scaling;
//! * positions a head's mask disallows are set to `−∞` before the softmax,
//!   so their weights are exactly `0.0` and each row renormalizes over the
//!   allowed set;
//! * positional information enters through the **query** input only:
//!   `Q = (H + D + D_b)·W_Qᵀ`, while keys and values see the raw tokens;
//! * all projections are bias-free; the sole biased maps are in the output
//!   perceptron;
//! * the public single sublayers are residual-free, while [`st_encoder`]
//!   adds the residual around each of its two sublayers before
//!   normalization.

use ndarray::{s, Array2, Array3};

use crate::error::{Error, Result};
use crate::graph::Graph;
use crate::hier::{build_mask_set, hier_score, MaskSet};
use crate::kernels::{mfcl, HopStack, SeriesWindow};
use crate::spectral::laplacian_pe;
use crate::tree::EncodingTree;
use crate::weights::{AttentionParams, EncoderParams, ModelWeights, OutputParams};

#[cfg(feature = "parallel")]
use rayon::prelude::*;

/// Positional encodings used by the encoder stack: graph positions `d_s`
/// (`N × d`), sequence positions `d_t` (`T_h × d`), and timestamp
/// embeddings `d_b` (`T_h × d`).
#[derive(Debug, Clone, PartialEq)]
pub struct PEBundle {
    pub d_s: Array2<f64>,
    pub d_t: Array2<f64>,
    pub d_b: Array2<f64>,
}

/// The result of one attention sublayer.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionOutput {
    /// Post-normalization sublayer output, `M × d`.
    pub output: Array2<f64>,
    /// Concatenated head outputs before the feed-forward map, `M × d`.
    pub pre_ffn: Array2<f64>,
    /// Per-head attention weight matrices, each `M × M`.
    pub weights: Vec<Array2<f64>>,
}

/// Forward-pass switches.
#[derive(Debug, Clone, Copy, Default)]
pub struct ForwardOptions {
    /// Collect time-averaged spatial attention maps per layer and head.
    pub dump_attention: bool,
    /// Verify numeric invariants at every sublayer (softmax row sums,
    /// exact zeros at masked positions, finiteness). Forces the sequential
    /// path so failures reproduce deterministically.
    pub assert_invariants: bool,
}

/// One dumped attention map: spatial weights averaged over time steps.
#[derive(Debug, Clone, PartialEq)]
pub struct AttentionDump {
    pub layer: usize,
    pub head: usize,
    pub mean_weights: Array2<f64>,
}

/// Everything the forward pass produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ForwardOutput {
    /// `horizon × N × C_o`.
    pub prediction: Array3<f64>,
    /// Compressed sequence length the encoder ran at.
    pub hidden_len: usize,
    /// Present when [`ForwardOptions::dump_attention`] was set.
    pub attention: Vec<AttentionDump>,
}

/// Classic sinusoidal position table, `t_len × d`; even columns are sines,
/// odd columns cosines, so position 0 reads `(0, 1, 0, 1, …)`.
pub fn sinusoidal_pe(t_len: usize, d: usize) -> Result<Array2<f64>> {
    if d == 0 || !d.is_multiple_of(2) {
        return Err(Error::Precondition(format!(
            "sinusoidal encoding needs a positive even width, got {d}"
        )));
    }
    let mut pe = Array2::zeros((t_len, d));
    for pos in 0..t_len {
        for i in 0..d / 2 {
            let angle = pos as f64 / 10000f64.powf(2.0 * i as f64 / d as f64);
            pe[[pos, 2 * i]] = angle.sin();
            pe[[pos, 2 * i + 1]] = angle.cos();
        }
    }
    Ok(pe)
}

/// Timestamp embeddings for `t_len` steps spaced `interval_minutes` apart
/// starting at the Unix timestamp `start`: each row is the sum of the
/// day-of-week row (0..7, Monday first) and the hour-of-day row (7..31) of
/// `w_b`.
pub fn timestamp_embedding(
    start: i64,
    t_len: usize,
    interval_minutes: i64,
    w_b: &Array2<f64>,
) -> Result<Array2<f64>> {
    use chrono::{Datelike, TimeZone, Timelike, Utc};
    if w_b.nrows() != crate::weights::TIMESTAMP_ONEHOT {
        return Err(Error::DimMismatch {
            stage: "timestamp embedding".into(),
            msg: format!(
                "projection has {} rows, expected {}",
                w_b.nrows(),
                crate::weights::TIMESTAMP_ONEHOT
            ),
        });
    }
    if interval_minutes <= 0 {
        return Err(Error::Precondition(
            "timestamp embedding needs a positive step interval".into(),
        ));
    }
    let d = w_b.ncols();
    let mut out = Array2::zeros((t_len, d));
    for step in 0..t_len {
        let ts = start + step as i64 * interval_minutes * 60;
        let dt = Utc.timestamp_opt(ts, 0).single().ok_or_else(|| {
            Error::Precondition(format!("timestamp {ts} is outside the representable range"))
        })?;
        let dow = dt.weekday().num_days_from_monday() as usize;
        let hour = dt.hour() as usize;
        let row = &w_b.row(dow) + &w_b.row(7 + hour);
        out.row_mut(step).assign(&row);
    }
    Ok(out)
}

/// Build the three positional tables for a forward pass: Laplacian graph
/// positions projected to width `d`, sinusoidal step positions, and
/// timestamp embeddings at the compressed step spacing.
pub fn position_encodings(
    weights: &ModelWeights,
    g: &Graph,
    start_timestamp: i64,
    interval_minutes: u32,
) -> Result<PEBundle> {
    let cfg = &weights.config;
    let t_h = cfg.hidden_len();
    let raw = laplacian_pe(g, cfg.pe_dim)?;
    let d_s = raw.dot(&weights.w_pe);
    let d_t = sinusoidal_pe(t_h, cfg.hidden)?;
    let d_b = timestamp_embedding(
        start_timestamp,
        t_h,
        i64::from(interval_minutes) * cfg.stride as i64,
        &weights.w_b,
    )?;
    Ok(PEBundle { d_s, d_t, d_b })
}

fn softmax_rows(logits: &mut Array2<f64>) -> Result<()> {
    for mut row in logits.rows_mut() {
        let max = row.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
        if !max.is_finite() {
            return Err(Error::Invariant {
                stage: "attention".into(),
                msg: "a softmax row has no allowed position".into(),
            });
        }
        let mut sum = 0.0;
        for x in row.iter_mut() {
            *x = (*x - max).exp();
            sum += *x;
        }
        for x in row.iter_mut() {
            *x /= sum;
        }
    }
    Ok(())
}

fn check_attention_matrix(attn: &Array2<f64>, mask: Option<&Array2<bool>>) -> Result<()> {
    for (r, row) in attn.rows().into_iter().enumerate() {
        let sum: f64 = row.sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(Error::Invariant {
                stage: "attention".into(),
                msg: format!("softmax row {r} sums to {sum:.12}, expected 1"),
            });
        }
        for (c, &w) in row.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::NonFinite {
                    stage: format!("attention weight ({r}, {c})"),
                });
            }
            if let Some(m) = mask {
                if !m[(r, c)] && w != 0.0 {
                    return Err(Error::Invariant {
                        stage: "attention".into(),
                        msg: format!("disallowed position ({r}, {c}) carries weight {w}"),
                    });
                }
            }
        }
    }
    Ok(())
}

/// Shared sublayer body. `q_add` is added to the tokens on the query path
/// only; `scores` (when present) shifts every head's logits; `head_masks`
/// supplies one optional allow-matrix per head.
fn attention_core(
    h_seq: &Array2<f64>,
    q_add: &Array2<f64>,
    scores: Option<&Array2<f64>>,
    head_masks: &[Option<&Array2<bool>>],
    params: &AttentionParams,
    residual: bool,
    checks: bool,
) -> Result<AttentionOutput> {
    let (m, d) = h_seq.dim();
    let mismatch = |msg: String| Error::DimMismatch {
        stage: "attention".into(),
        msg,
    };
    if d != params.dim() {
        return Err(mismatch(format!(
            "tokens are {m}×{d}, parameters expect width {}",
            params.dim()
        )));
    }
    if q_add.dim() != (m, d) {
        return Err(mismatch(format!(
            "query addend is {:?}, expected ({m}, {d})",
            q_add.dim()
        )));
    }
    if head_masks.len() != params.heads() {
        return Err(mismatch(format!(
            "{} masks supplied for {} heads",
            head_masks.len(),
            params.heads()
        )));
    }
    if let Some(s) = scores {
        if s.dim() != (m, m) {
            return Err(mismatch(format!(
                "score matrix is {:?}, expected ({m}, {m})",
                s.dim()
            )));
        }
    }
    for mask in head_masks.iter().flatten() {
        if mask.dim() != (m, m) {
            return Err(mismatch(format!(
                "mask is {:?}, expected ({m}, {m})",
                mask.dim()
            )));
        }
    }

    let dh = params.head_dim();
    let inv_scale = 1.0 / (dh as f64).sqrt();
    let q_in = h_seq + q_add;
    let mut pre_ffn = Array2::zeros((m, d));
    let mut head_weights = Vec::with_capacity(params.heads());
    for (i, head_mask) in head_masks.iter().enumerate() {
        let q = q_in.dot(&params.w_q[i].t());
        let k = h_seq.dot(&params.w_k[i].t());
        let v = h_seq.dot(&params.w_v[i].t());
        let mut logits = q.dot(&k.t());
        if let Some(s) = scores {
            logits += s;
        }
        logits.mapv_inplace(|x| x * inv_scale);
        if let Some(mask) = *head_mask {
            for ((r, c), l) in logits.indexed_iter_mut() {
                if !mask[(r, c)] {
                    *l = f64::NEG_INFINITY;
                }
            }
        }
        softmax_rows(&mut logits)?;
        let attn = logits;
        if checks {
            check_attention_matrix(&attn, head_masks[i])?;
        }
        let head_out = attn.dot(&v);
        pre_ffn.slice_mut(s![.., i * dh..(i + 1) * dh]).assign(&head_out);
        head_weights.push(attn);
    }

    let mut ffn = pre_ffn.dot(&params.w_ffn.t());
    ffn.mapv_inplace(|x| x.max(0.0));
    let mut output = if residual { ffn + h_seq } else { ffn };
    params.norm.apply(&mut output);
    if checks && !output.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite {
            stage: "attention output".into(),
        });
    }
    Ok(AttentionOutput {
        output,
        pre_ffn,
        weights: head_weights,
    })
}

fn head_mask_refs(masks: Option<&MaskSet>, heads: usize) -> Result<Vec<Option<&Array2<bool>>>> {
    match masks {
        None => Ok(vec![None; heads]),
        Some(set) => {
            if set.head_assignment.len() != heads {
                return Err(Error::DimMismatch {
                    stage: "attention".into(),
                    msg: format!(
                        "mask set assigns {} heads, sublayer has {heads}",
                        set.head_assignment.len()
                    ),
                });
            }
            Ok(set
                .head_assignment
                .iter()
                .map(|a| a.map(|idx| &set.masks[idx].allow))
                .collect())
        }
    }
}

/// One attention sublayer over a single sequence, with per-head masks drawn
/// from `masks` and an optional logit-shift matrix. Residual-free.
pub fn masked_multihead_attention(
    h: &Array2<f64>,
    d_pos: &Array2<f64>,
    d_b: &Array2<f64>,
    scores: Option<&Array2<f64>>,
    masks: Option<&MaskSet>,
    params: &AttentionParams,
) -> Result<AttentionOutput> {
    let (m, d) = h.dim();
    if d_pos.dim() != (m, d) || d_b.dim() != (m, d) {
        return Err(Error::DimMismatch {
            stage: "attention".into(),
            msg: format!(
                "positional tables {:?} / {:?} do not match tokens ({m}, {d})",
                d_pos.dim(),
                d_b.dim()
            ),
        });
    }
    let q_add = d_pos + d_b;
    let head_masks = head_mask_refs(masks, params.heads())?;
    attention_core(h, &q_add, scores, &head_masks, params, false, false)
}

fn try_map_ordered<T, F>(count: usize, use_par: bool, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    #[cfg(feature = "parallel")]
    {
        if use_par {
            return (0..count).into_par_iter().map(f).collect();
        }
    }
    #[cfg(not(feature = "parallel"))]
    let _ = use_par;
    (0..count).map(f).collect()
}

fn check_tokens(h: &Array3<f64>, pe: &PEBundle, d: usize) -> Result<()> {
    let (t_h, n, width) = h.dim();
    if width != d {
        return Err(Error::DimMismatch {
            stage: "encoder".into(),
            msg: format!("tokens have width {width}, parameters expect {d}"),
        });
    }
    if pe.d_s.dim() != (n, d) {
        return Err(Error::DimMismatch {
            stage: "encoder".into(),
            msg: format!("graph positions are {:?}, expected ({n}, {d})", pe.d_s.dim()),
        });
    }
    if pe.d_t.dim() != (t_h, d) || pe.d_b.dim() != (t_h, d) {
        return Err(Error::DimMismatch {
            stage: "encoder".into(),
            msg: format!(
                "step positions {:?} / timestamps {:?} do not cover {t_h} steps at width {d}",
                pe.d_t.dim(),
                pe.d_b.dim()
            ),
        });
    }
    Ok(())
}

fn temporal_pass(
    h: &Array3<f64>,
    pe: &PEBundle,
    params: &AttentionParams,
    residual: bool,
    checks: bool,
    use_par: bool,
) -> Result<Array3<f64>> {
    check_tokens(h, pe, params.dim())?;
    let (t_h, n, d) = h.dim();
    let q_add = &pe.d_t + &pe.d_b;
    let no_masks = vec![None; params.heads()];
    let outputs = try_map_ordered(n, use_par, |node| {
        let seq = h.slice(s![.., node, ..]).to_owned();
        Ok(attention_core(&seq, &q_add, None, &no_masks, params, residual, checks)?.output)
    })?;
    let mut out = Array3::zeros((t_h, n, d));
    for (node, block) in outputs.into_iter().enumerate() {
        out.slice_mut(s![.., node, ..]).assign(&block);
    }
    Ok(out)
}

#[allow(clippy::too_many_arguments)]
fn spatial_pass(
    h: &Array3<f64>,
    pe: &PEBundle,
    masks: &MaskSet,
    scores: &Array2<f64>,
    params: &AttentionParams,
    residual: bool,
    checks: bool,
    use_par: bool,
    collect_attention: bool,
) -> Result<(Array3<f64>, Vec<Array2<f64>>)> {
    check_tokens(h, pe, params.dim())?;
    let (t_h, n, d) = h.dim();
    if scores.dim() != (n, n) {
        return Err(Error::DimMismatch {
            stage: "encoder".into(),
            msg: format!("score matrix is {:?}, expected ({n}, {n})", scores.dim()),
        });
    }
    let head_masks = head_mask_refs(Some(masks), params.heads())?;
    let results = try_map_ordered(t_h, use_par, |t| {
        let seq = h.slice(s![t, .., ..]).to_owned();
        let q_add = &pe.d_s + &pe.d_b.row(t);
        let r = attention_core(&seq, &q_add, Some(scores), &head_masks, params, residual, checks)?;
        Ok((r.output, r.weights))
    })?;
    let mut out = Array3::zeros((t_h, n, d));
    let mut mean_weights: Vec<Array2<f64>> = if collect_attention {
        vec![Array2::zeros((n, n)); params.heads()]
    } else {
        Vec::new()
    };
    for (t, (block, weights)) in results.into_iter().enumerate() {
        out.slice_mut(s![t, .., ..]).assign(&block);
        if collect_attention {
            for (acc, w) in mean_weights.iter_mut().zip(&weights) {
                *acc += w;
            }
        }
    }
    if collect_attention {
        for acc in &mut mean_weights {
            acc.mapv_inplace(|x| x / t_h as f64);
        }
    }
    Ok((out, mean_weights))
}

/// Temporal attention applied independently to every node's step sequence.
/// Unmasked, unshifted, residual-free.
pub fn temporal_transformer(
    h: &Array3<f64>,
    pe: &PEBundle,
    params: &AttentionParams,
) -> Result<Array3<f64>> {
    temporal_pass(h, pe, params, false, false, true)
}

/// Spatial attention applied independently at every time step, with per-head
/// masks and the hierarchical score shift on every head. Residual-free.
pub fn spatial_transformer(
    h: &Array3<f64>,
    pe: &PEBundle,
    masks: &MaskSet,
    scores: &Array2<f64>,
    params: &AttentionParams,
) -> Result<Array3<f64>> {
    Ok(spatial_pass(h, pe, masks, scores, params, false, false, true, false)?.0)
}

#[allow(clippy::too_many_arguments)]
fn st_encoder_full(
    h: &Array3<f64>,
    pe: &PEBundle,
    masks: &MaskSet,
    scores: &Array2<f64>,
    enc: &EncoderParams,
    checks: bool,
    use_par: bool,
    collect_attention: bool,
) -> Result<(Array3<f64>, Vec<Array2<f64>>)> {
    let after_t = temporal_pass(h, pe, &enc.temporal, true, checks, use_par)?;
    spatial_pass(
        &after_t,
        pe,
        masks,
        scores,
        &enc.spatial,
        true,
        checks,
        use_par,
        collect_attention,
    )
}

/// One full encoder layer: temporal sublayer with residual, then spatial
/// sublayer with residual.
pub fn st_encoder(
    h: &Array3<f64>,
    pe: &PEBundle,
    masks: &MaskSet,
    scores: &Array2<f64>,
    enc: &EncoderParams,
) -> Result<Array3<f64>> {
    Ok(st_encoder_full(h, pe, masks, scores, enc, false, true, false)?.0)
}

/// Map encoder output (`T_h × N × d`) to the prediction
/// (`horizon × N × C_o`): when the lengths differ, a transposed convolution
/// stretches time by `⌈horizon/T_h⌉` and the result is cropped; the
/// two-layer perceptron (the only biased maps in the model) then mixes
/// channels per step and node.
pub fn output_layer(h: &Array3<f64>, horizon: usize, out: &OutputParams) -> Result<Array3<f64>> {
    let (t_h, n, d) = h.dim();
    if out.w1.dim() != (d, d) || out.b1.len() != d {
        return Err(Error::DimMismatch {
            stage: "output".into(),
            msg: "first perceptron stage disagrees with the token width".into(),
        });
    }
    let c_o = out.w2.nrows();
    if out.w2.ncols() != d || out.b2.len() != c_o {
        return Err(Error::DimMismatch {
            stage: "output".into(),
            msg: "second perceptron stage disagrees with the token width".into(),
        });
    }
    let expanded = if t_h == horizon {
        h.to_owned()
    } else {
        let stride = crate::weights::deconv_stride(t_h, horizon);
        let w = out.deconv.as_ref().ok_or_else(|| Error::DimMismatch {
            stage: "output".into(),
            msg: format!("horizon {horizon} differs from hidden length {t_h} but no deconvolution kernel is present"),
        })?;
        if w.dim() != (stride, d, d) {
            return Err(Error::DimMismatch {
                stage: "output".into(),
                msg: format!(
                    "deconvolution kernel is {:?}, expected ({stride}, {d}, {d})",
                    w.dim()
                ),
            });
        }
        let mut raw = Array3::zeros((t_h * stride, n, d));
        for t in 0..t_h {
            let x_t = h.slice(s![t, .., ..]);
            for l in 0..stride {
                let tap = w.slice(s![l, .., ..]);
                let mixed = x_t.dot(&tap.t());
                raw.slice_mut(s![t * stride + l, .., ..]).assign(&mixed);
            }
        }
        raw.slice(s![0..horizon, .., ..]).to_owned()
    };
    let flat = expanded
        .into_shape_with_order((horizon * n, d))
        .expect("reshape with equal element count");
    let mut z = flat.dot(&out.w1.t()) + &out.b1;
    z.mapv_inplace(|x| x.max(0.0));
    let y = z.dot(&out.w2.t()) + &out.b2;
    Ok(y
        .into_shape_with_order((horizon, n, c_o))
        .expect("reshape with equal element count"))
}

/// Run the complete forward pass: token lifting, positional encodings,
/// `k` encoder layers with dense skip aggregation, output mapping.
pub fn forward(
    weights: &ModelWeights,
    series: &SeriesWindow,
    g: &Graph,
    tree: &EncodingTree,
    opts: &ForwardOptions,
) -> Result<ForwardOutput> {
    weights.check()?;
    let cfg = &weights.config;
    if series.nodes() != cfg.nodes || g.n() != cfg.nodes || tree.n() != cfg.nodes {
        return Err(Error::DimMismatch {
            stage: "forward".into(),
            msg: format!(
                "node counts disagree: series {}, graph {}, tree {}, config {}",
                series.nodes(),
                g.n(),
                tree.n(),
                cfg.nodes
            ),
        });
    }
    if series.channels() != cfg.in_channels || series.len() != cfg.input_len {
        return Err(Error::DimMismatch {
            stage: "forward".into(),
            msg: format!(
                "series is {} steps × {} channels, config wants {} × {}",
                series.len(),
                series.channels(),
                cfg.input_len,
                cfg.in_channels
            ),
        });
    }

    let masks = build_mask_set(tree, g, cfg.heads)?;
    let scores = hier_score(g, tree)?.s;
    let stack = HopStack::new(g, cfg.hops);
    let tokens = mfcl(series, &weights.bank, &stack)?;
    let pe = position_encodings(weights, g, series.start_timestamp, series.interval_minutes)?;

    let use_par = !opts.assert_invariants;
    let checks = opts.assert_invariants;
    let mut aggregate = tokens.clone();
    let mut h = tokens;
    let mut dumps = Vec::new();
    for (layer, enc) in weights.encoders.iter().enumerate() {
        let (next, mean_weights) = st_encoder_full(
            &h,
            &pe,
            &masks,
            &scores,
            enc,
            checks,
            use_par,
            opts.dump_attention,
        )?;
        aggregate += &next;
        h = next;
        for (head, mean_weights) in mean_weights.into_iter().enumerate() {
            dumps.push(AttentionDump {
                layer,
                head,
                mean_weights,
            });
        }
    }

    let prediction = output_layer(&aggregate, cfg.horizon, &weights.output)?;
    if opts.assert_invariants && !prediction.iter().all(|x| x.is_finite()) {
        return Err(Error::NonFinite {
            stage: "prediction".into(),
        });
    }
    Ok(ForwardOutput {
        prediction,
        hidden_len: cfg.hidden_len(),
        attention: dumps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hier::{LevelMask, MaskSource};
    use crate::weights::NORM_EPS;
    use approx::assert_abs_diff_eq;
    use ndarray::{array, Array1};

    fn neutral_params(d: usize, heads: usize) -> AttentionParams {
        AttentionParams::zeroed(d, heads).unwrap()
    }

    #[test]
    fn sinusoidal_position_zero_alternates_zero_one() {
        let pe = sinusoidal_pe(3, 4).unwrap();
        assert_eq!(pe.row(0).to_vec(), vec![0.0, 1.0, 0.0, 1.0]);
        assert_abs_diff_eq!(pe[[1, 0]], 1f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(pe[[1, 1]], 1f64.cos(), epsilon = 1e-15);
        assert_abs_diff_eq!(pe[[1, 2]], 0.01f64.sin(), epsilon = 1e-15);
        assert_abs_diff_eq!(pe[[1, 3]], 0.01f64.cos(), epsilon = 1e-15);
        assert!(sinusoidal_pe(3, 5).is_err());
    }

    #[test]
    fn monday_midnight_sums_first_day_and_hour_rows() {
        let mut w_b = Array2::zeros((31, 2));
        w_b[[0, 0]] = 1.0; // Monday
        w_b[[7, 1]] = 10.0; // hour 0
        w_b[[8, 1]] = 100.0; // hour 1
        // 345600 = Monday 1970-01-05 00:00 UTC.
        let e = timestamp_embedding(345_600, 2, 60, &w_b).unwrap();
        assert_eq!(e.row(0).to_vec(), vec![1.0, 10.0]);
        assert_eq!(e.row(1).to_vec(), vec![1.0, 100.0]);
    }

    #[test]
    fn zero_query_key_gives_uniform_attention_over_values() {
        let d = 4;
        let mut params = neutral_params(d, 2);
        params.w_v = vec![
            array![[1.0, 0.0, 0.0, 0.0], [0.0, 1.0, 0.0, 0.0]],
            array![[0.0, 0.0, 1.0, 0.0], [0.0, 0.0, 0.0, 1.0]],
        ];
        let h = array![
            [1.0, 2.0, 3.0, 4.0],
            [5.0, 6.0, 7.0, 8.0],
            [9.0, 10.0, 11.0, 12.0]
        ];
        let zeros = Array2::zeros((3, d));
        let out = masked_multihead_attention(&h, &zeros, &zeros, None, None, &params).unwrap();
        // Uniform attention averages V's rows; V here reproduces H itself.
        let mean = [5.0, 6.0, 7.0, 8.0];
        for r in 0..3 {
            for (c, &m) in mean.iter().enumerate() {
                assert_abs_diff_eq!(out.pre_ffn[[r, c]], m, epsilon = 1e-12);
            }
        }
        for w in &out.weights {
            for &x in w {
                assert_abs_diff_eq!(x, 1.0 / 3.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn diagonal_mask_pins_attention_to_self() {
        let d = 2;
        let mut params = neutral_params(d, 1);
        params.w_v = vec![Array2::eye(2)];
        let h = array![[1.0, -1.0], [2.0, 0.5], [3.0, 0.25]];
        let diag = Array2::from_shape_fn((3, 3), |(r, c)| r == c);
        let set = MaskSet {
            masks: vec![LevelMask {
                source: MaskSource::Adjacency,
                allow: diag,
            }],
            head_assignment: vec![Some(0)],
        };
        let zeros = Array2::zeros((3, d));
        let out =
            masked_multihead_attention(&h, &zeros, &zeros, None, Some(&set), &params).unwrap();
        for r in 0..3 {
            for c in 0..3 {
                let expect = if r == c { 1.0 } else { 0.0 };
                assert_eq!(out.weights[0][[r, c]], expect);
            }
            for c in 0..d {
                assert_abs_diff_eq!(out.pre_ffn[[r, c]], h[[r, c]], epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn residual_with_zero_weights_is_identity_under_neutral_norm() {
        let d = 2;
        let params = neutral_params(d, 1);
        let h = array![[0.5, -0.25], [1.5, 2.0]];
        let zeros = Array2::zeros((2, d));
        let out = attention_core(
            &h,
            &zeros,
            None,
            &[None],
            &params,
            true,
            true,
        )
        .unwrap();
        // Zero V ⇒ zero FFN input ⇒ residual passes H through; the neutral
        // normalization only rescales by 1/√(1+ε).
        let damp = 1.0 / (1.0 + NORM_EPS).sqrt();
        for r in 0..2 {
            for c in 0..d {
                assert_abs_diff_eq!(out.output[[r, c]], h[[r, c]] * damp, epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn output_layer_identity_when_lengths_match() {
        let d = 2;
        let out = OutputParams {
            deconv: None,
            w1: Array2::eye(d),
            b1: Array1::zeros(d),
            w2: Array2::eye(d),
            b2: Array1::zeros(d),
        };
        let h = Array3::from_shape_fn((3, 2, d), |(t, n, c)| (t + n + c) as f64 + 0.5);
        let y = output_layer(&h, 3, &out).unwrap();
        assert_eq!(y, h); // all entries positive, so ReLU is inert
    }
}
