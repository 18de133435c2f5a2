use serde::{Deserialize, Serialize};

use super::{TrainConfig, TrainableParams};
use crate::dataio::VideoRecord;
use crate::decomp::{lagged, Branch};
use crate::error::{Error, Result};
use crate::model::lstm::BiTrace;
use crate::model::{resolve_segments, trace_forward, Lane, LaneTrace, LateFusionSpace, ScorerTrace, StreamParams, Strategy};
use crate::tensor::{sigmoid, Tensors};

/// `total = reconstruction + lambda_sparsity · sparsity`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Objective {
    pub total: f64,
    pub reconstruction: f64,
    pub sparsity: f64,
    pub lambda_sparsity: f64,
    pub sigma_target: f64,
}

struct LossTrace {
    scorer: ScorerTrace,
    primary: Lane,
    /// `p_t · x_t`, one row per step.
    weighted: Vec<Vec<f64>>,
    decoder: BiTrace,
    recon: Vec<Vec<f64>>,
    objective: Objective,
}

fn loss_forward(record: &VideoRecord, params: &TrainableParams, cfg: &TrainConfig) -> Result<LossTrace> {
    let m = resolve_segments(record.n_steps(), cfg.segments)?;
    let scorer = trace_forward(record, &params.scorer, m)?;
    let primary = params.scorer.strategy().primary_lane();
    let lane = &scorer.lanes[&primary];
    let dim = lane.dim;
    if params.decoder.dim() != dim || params.decoder.rnn.input_dim() != dim {
        return Err(Error::Shape(format!(
            "decoder reconstructs dim {} but the primary sequence has dim {dim}",
            params.decoder.dim()
        )));
    }
    let n = lane.n_steps;

    let weighted: Vec<Vec<f64>> = (0..n)
        .map(|t| lane.row(t).iter().map(|x| scorer.p[t] * x).collect())
        .collect();
    let refs: Vec<&[f64]> = weighted.iter().map(Vec::as_slice).collect();
    let decoder = params.decoder.rnn.forward(&refs);
    let recon: Vec<Vec<f64>> = decoder
        .hidden
        .iter()
        .map(|h| {
            let mut y = vec![0.0; dim];
            params.decoder.head.apply_acc(h, &mut y);
            y
        })
        .collect();

    let mut sq = 0.0;
    for (t, y) in recon.iter().enumerate() {
        for (a, b) in y.iter().zip(lane.row(t)) {
            sq += (a - b) * (a - b);
        }
    }
    let reconstruction = sq / (n * dim) as f64;
    let mean_p = scorer.p.iter().sum::<f64>() / n as f64;
    let sparsity = (mean_p - cfg.sigma_target).powi(2);
    let objective = Objective {
        total: reconstruction + cfg.lambda_sparsity * sparsity,
        reconstruction,
        sparsity,
        lambda_sparsity: cfg.lambda_sparsity,
        sigma_target: cfg.sigma_target,
    };
    Ok(LossTrace {
        scorer,
        primary,
        weighted,
        decoder,
        recon,
        objective,
    })
}

/// Evaluates the surrogate objective for one video.
pub fn surrogate_loss(record: &VideoRecord, params: &TrainableParams, cfg: &TrainConfig) -> Result<Objective> {
    Ok(loss_forward(record, params, cfg)?.objective)
}

/// Objective and exact gradients of `total` for every parameter tensor.
pub fn backward(record: &VideoRecord, params: &TrainableParams, cfg: &TrainConfig) -> Result<(Objective, TrainableParams)> {
    let tr = loss_forward(record, params, cfg)?;
    let mut grad = params.zeros_like();
    let lane = &tr.scorer.lanes[&tr.primary];
    let (n, dim) = (lane.n_steps, lane.dim);
    let p = &tr.scorer.p;

    // Reconstruction term.
    let scale = 2.0 / (n * dim) as f64;
    let d_recon: Vec<Vec<f64>> = tr
        .recon
        .iter()
        .enumerate()
        .map(|(t, y)| y.iter().zip(lane.row(t)).map(|(a, b)| scale * (a - b)).collect())
        .collect();
    // The target itself is learned under early fusion.
    let mut d_primary = vec![0.0; n * dim];
    let mut d_hidden = Vec::with_capacity(n);
    let dec = &params.decoder;
    for (t, dy) in d_recon.iter().enumerate() {
        grad.decoder.head.w.outer_acc(dy, &tr.decoder.hidden[t]);
        grad.decoder.head.b.iter_mut().zip(dy).for_each(|(g, d)| *g += d);
        let mut dh = vec![0.0; dec.head.d_in()];
        dec.head.w.t_matvec_acc(dy, &mut dh);
        d_hidden.push(dh);
        d_primary[t * dim..(t + 1) * dim]
            .iter_mut()
            .zip(dy)
            .for_each(|(g, d)| *g -= d);
    }
    let refs: Vec<&[f64]> = tr.weighted.iter().map(Vec::as_slice).collect();
    let d_weighted = dec.rnn.backward(&refs, &tr.decoder, &d_hidden, &mut grad.decoder.rnn);

    let mean_p = p.iter().sum::<f64>() / n as f64;
    let d_sparse = cfg.lambda_sparsity * 2.0 * (mean_p - cfg.sigma_target) / n as f64;
    let mut d_logit = vec![0.0; n];
    for t in 0..n {
        let x = lane.row(t);
        let dp = crate::tensor::dot(&d_weighted[t], x) + d_sparse;
        for (g, dw) in d_primary[t * dim..(t + 1) * dim].iter_mut().zip(&d_weighted[t]) {
            *g += p[t] * dw;
        }
        d_logit[t] = dp * p[t] * (1.0 - p[t]);
    }

    // Fusion.
    let scorer = &params.scorer;
    let late_prob = scorer.strategy() == Strategy::Late
        && scorer.config.late_fusion_space == LateFusionSpace::Probability;
    for (&lane_key, lt) in &tr.scorer.lanes {
        let d_raw: Vec<f64> = if late_prob {
            (0..n)
                .map(|t| {
                    let s = sigmoid(lt.branch[t] + lt.attention[t]);
                    d_logit[t] * s * (1.0 - s)
                })
                .collect()
        } else {
            d_logit.clone()
        };
        let want_input = lane_key == Lane::Fused;
        let lane_grad = grad.scorer.lanes.get_mut(&lane_key).expect("gradient mirrors params");
        let d_input = lane_backward(scorer.lane(lane_key), lt, &d_raw, lane_grad, want_input);

        if let Some(mut d_fused) = d_input {
            if tr.primary == Lane::Fused {
                d_fused.iter_mut().zip(&d_primary).for_each(|(a, b)| *a += b);
            }
            for (tag, proj_grad) in grad.scorer.projections.iter_mut() {
                let stream = record.stream(*tag).expect("checked by forward");
                for t in 0..n {
                    let dy = &d_fused[t * lt.dim..(t + 1) * lt.dim];
                    proj_grad.w.outer_acc(dy, stream.step(t));
                    proj_grad.b.iter_mut().zip(dy).for_each(|(g, d)| *g += d);
                }
            }
        }
    }

    Ok((tr.objective, grad))
}

/// Backpropagates `∂L/∂r_t` through one lane. Returns `∂L/∂input` when asked.
fn lane_backward(
    params: &StreamParams,
    tr: &LaneTrace,
    d_raw: &[f64],
    grad: &mut StreamParams,
    want_input: bool,
) -> Option<Vec<f64>> {
    let StreamParams {
        chunk_rnn: g_chunk_rnn,
        stride_rnn: g_stride_rnn,
        chunk_head: g_chunk_head,
        stride_head: g_stride_head,
        attention: g_att,
    } = grad;
    let dim = tr.dim;
    let mut d_input = vec![0.0; tr.n_steps * dim];

    // Difference attention.
    let att = &params.attention;
    for (t, &g) in d_raw.iter().enumerate() {
        for (k, &delta) in att.distances.iter().enumerate() {
            let lag = lagged(t, delta);
            g_att.biases[k] += g;
            if lag == t {
                continue;
            }
            let (xt, xl) = (tr.row(t), tr.row(lag));
            for j in 0..dim {
                let diff = xt[j] - xl[j];
                g_att.weights[k][j] += g * diff.abs();
                if want_input {
                    let s = g * att.weights[k][j] * sign(diff);
                    d_input[t * dim + j] += s;
                    d_input[lag * dim + j] -= s;
                }
            }
        }
    }

    for branch in [Branch::Chunk, Branch::Stride] {
        let (rnn, head, rnn_grad, head_grad) = match branch {
            Branch::Chunk => (&params.chunk_rnn, &params.chunk_head, &mut *g_chunk_rnn, &mut *g_chunk_head),
            Branch::Stride => (
                params.stride_rnn(),
                &params.stride_head,
                match g_stride_rnn.as_mut() {
                    Some(g) => g,
                    None => &mut *g_chunk_rnn,
                },
                &mut *g_stride_head,
            ),
        };
        for (idx, bt) in tr.decomposition.segments(branch).iter().zip(tr.traces(branch)) {
            let d_hidden: Vec<Vec<f64>> = idx
                .iter()
                .zip(&bt.hidden)
                .map(|(&t, h)| {
                    let g = d_raw[t];
                    head_grad.b += g;
                    head_grad.w.iter_mut().zip(h).for_each(|(w, hv)| *w += g * hv);
                    head.w.iter().map(|w| g * w).collect()
                })
                .collect();
            let xs: Vec<&[f64]> = idx.iter().map(|&t| tr.row(t)).collect();
            let dx = rnn.backward(&xs, bt, &d_hidden, rnn_grad);
            if want_input {
                for (&t, d) in idx.iter().zip(dx) {
                    d_input[t * dim..(t + 1) * dim]
                        .iter_mut()
                        .zip(d)
                        .for_each(|(a, b)| *a += b);
                }
            }
        }
    }

    want_input.then_some(d_input)
}

#[inline]
fn sign(x: f64) -> f64 {
    if x > 0.0 {
        1.0
    } else if x < 0.0 {
        -1.0
    } else {
        0.0
    }
}
