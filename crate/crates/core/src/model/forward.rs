use std::collections::BTreeMap;

use super::lstm::BiTrace;
use super::params::{Lane, LateFusionSpace, ScorerParams, StreamParams, Strategy};
use crate::dataio::{SourceStream, VideoRecord};
use crate::decomp::{attention_rows, decompose, default_segment_count, Branch, Decomposition};
use crate::error::{Error, Result};
use crate::tensor::sigmoid;

/// Pre-sigmoid per-step score of one lane.
#[derive(Clone, Debug, PartialEq)]
pub struct RawScores {
    pub r: Vec<f64>,
}

/// Per-step selection probabilities.
#[derive(Clone, Debug, PartialEq)]
pub struct ImportanceScores {
    pub p: Vec<f64>,
}

/// Segment count for a video: the fixed value if given, else `⌈√n_steps⌉`.
pub fn resolve_segments(n_steps: usize, fixed: Option<usize>) -> Result<usize> {
    match fixed {
        None => Ok(default_segment_count(n_steps)),
        Some(m) if m >= 1 && m <= n_steps => Ok(m),
        Some(m) => Err(Error::range(
            "segment count",
            format!("m = {m} must lie in 1..={n_steps}"),
        )),
    }
}

/// Activations of one lane kept for the backward pass.
#[derive(Clone, Debug)]
pub(crate) struct LaneTrace {
    /// Row-major `n_steps × dim` input the lane saw.
    pub input: Vec<f64>,
    pub dim: usize,
    pub n_steps: usize,
    pub decomposition: Decomposition,
    pub chunk: Vec<BiTrace>,
    pub stride: Vec<BiTrace>,
    /// `c'_t + s'_t`
    pub branch: Vec<f64>,
    /// `d_t`
    pub attention: Vec<f64>,
}

impl LaneTrace {
    pub fn row(&self, t: usize) -> &[f64] {
        &self.input[t * self.dim..(t + 1) * self.dim]
    }

    pub fn raw(&self) -> Vec<f64> {
        self.branch
            .iter()
            .zip(&self.attention)
            .map(|(b, d)| b + d)
            .collect()
    }

    pub fn traces(&self, branch: Branch) -> &[BiTrace] {
        match branch {
            Branch::Chunk => &self.chunk,
            Branch::Stride => &self.stride,
        }
    }
}

#[derive(Clone, Debug)]
pub(crate) struct ScorerTrace {
    pub lanes: BTreeMap<Lane, LaneTrace>,
    pub p: Vec<f64>,
}

pub(crate) fn lane_forward(
    params: &StreamParams,
    input: Vec<f64>,
    n_steps: usize,
    dim: usize,
    m: usize,
    order: Option<&[usize]>,
) -> Result<LaneTrace> {
    if params.dim() != dim || input.len() != n_steps * dim {
        return Err(Error::Shape(format!(
            "lane built for dim {} given {n_steps} steps of dim {dim} ({} values)",
            params.dim(),
            input.len()
        )));
    }
    let decomposition = decompose(n_steps, m)?;
    let default_order: Vec<usize> = (0..m).collect();
    let order = order.unwrap_or(&default_order);
    let row = |t: usize| &input[t * dim..(t + 1) * dim];

    let run_branch = |branch: Branch| -> Result<(Vec<BiTrace>, Vec<f64>)> {
        let (rnn, head) = match branch {
            Branch::Chunk => (&params.chunk_rnn, &params.chunk_head),
            Branch::Stride => (params.stride_rnn(), &params.stride_head),
        };
        let segments = decomposition.segments(branch);
        let mut traces: Vec<Option<BiTrace>> = vec![None; m];
        let mut values: Vec<Vec<f64>> = vec![Vec::new(); m];
        for &k in order {
            let xs: Vec<&[f64]> = segments[k].iter().map(|&t| row(t)).collect();
            let tr = rnn.forward(&xs);
            values[k] = tr.hidden.iter().map(|h| head.apply(h)).collect();
            traces[k] = Some(tr);
        }
        let per_step = decomposition.reassemble(&values, branch)?;
        let traces = traces
            .into_iter()
            .map(|t| t.ok_or_else(|| Error::Shape("segment order skips a segment".into())))
            .collect::<Result<_>>()?;
        Ok((traces, per_step))
    };
    let (chunk, c_prime) = run_branch(Branch::Chunk)?;
    let (stride, s_prime) = run_branch(Branch::Stride)?;
    let attention = attention_rows(&input, n_steps, dim, &params.attention)?;
    let branch = c_prime.iter().zip(&s_prime).map(|(c, s)| c + s).collect();

    Ok(LaneTrace {
        input,
        dim,
        n_steps,
        decomposition,
        chunk,
        stride,
        branch,
        attention,
    })
}

/// `r_t = c'_t + s'_t + d_t` for one stream.
pub fn stream_raw_scores(stream: &SourceStream, params: &StreamParams, m: usize) -> Result<RawScores> {
    let tr = lane_forward(params, stream.values.clone(), stream.n_steps, stream.dim, m, None)?;
    Ok(RawScores { r: tr.raw() })
}

/// Same as [`stream_raw_scores`] with segments processed in `order`.
#[doc(hidden)]
pub fn stream_raw_scores_in_order(
    stream: &SourceStream,
    params: &StreamParams,
    m: usize,
    order: &[usize],
) -> Result<RawScores> {
    let tr = lane_forward(params, stream.values.clone(), stream.n_steps, stream.dim, m, Some(order))?;
    Ok(RawScores { r: tr.raw() })
}

fn source_stream<'a>(record: &'a VideoRecord, params: &ScorerParams, tag: crate::dataio::SourceTag) -> Result<&'a SourceStream> {
    let stream = record.stream(tag).ok_or_else(|| {
        Error::Shape(format!(
            "{}: strategy {} needs `{tag}` features",
            record.video_id,
            params.strategy()
        ))
    })?;
    let expected = params.dims[&tag];
    if stream.dim != expected {
        return Err(Error::Shape(format!(
            "{}: `{tag}` features have dim {}, parameters expect {expected}",
            record.video_id, stream.dim
        )));
    }
    Ok(stream)
}

/// Early fusion input: `Σ_s (W_s x^s_t + b_s)`.
pub(crate) fn fuse_inputs(record: &VideoRecord, params: &ScorerParams) -> Result<(Vec<f64>, usize)> {
    let n_steps = record.n_steps();
    let d_c = params.lane(Lane::Fused).dim();
    let mut fused = vec![0.0; n_steps * d_c];
    for (&tag, proj) in &params.projections {
        let stream = source_stream(record, params, tag)?;
        if stream.n_steps != n_steps {
            return Err(Error::Shape(format!("{}: `{tag}` has {} steps, picks {n_steps}", record.video_id, stream.n_steps)));
        }
        for t in 0..n_steps {
            proj.apply_acc(stream.step(t), &mut fused[t * d_c..(t + 1) * d_c]);
        }
    }
    Ok((fused, d_c))
}

pub(crate) fn trace_forward(record: &VideoRecord, params: &ScorerParams, m: usize) -> Result<ScorerTrace> {
    let n_steps = record.n_steps();
    let mut lanes = BTreeMap::new();
    for (&lane, lp) in &params.lanes {
        let (input, dim) = match lane {
            Lane::Source(tag) => {
                let s = source_stream(record, params, tag)?;
                if s.n_steps != n_steps {
                    return Err(Error::Shape(format!("{}: `{tag}` has {} steps, picks {n_steps}", record.video_id, s.n_steps)));
                }
                (s.values.clone(), s.dim)
            }
            Lane::Fused => fuse_inputs(record, params)?,
        };
        lanes.insert(lane, lane_forward(lp, input, n_steps, dim, m, None)?);
    }

    let mut logits = vec![0.0; n_steps];
    let late_prob = params.strategy() == Strategy::Late
        && params.config.late_fusion_space == LateFusionSpace::Probability;
    for tr in lanes.values() {
        for (t, z) in logits.iter_mut().enumerate() {
            let r = tr.branch[t] + tr.attention[t];
            *z += if late_prob { sigmoid(r) } else { r };
        }
    }
    let p = logits.iter().map(|&z| sigmoid(z)).collect();
    Ok(ScorerTrace { lanes, p })
}

/// Frame-selection probabilities for every step of `record`.
pub fn forward(record: &VideoRecord, params: &ScorerParams, segments: Option<usize>) -> Result<ImportanceScores> {
    let m = resolve_segments(record.n_steps(), segments)?;
    Ok(ImportanceScores {
        p: trace_forward(record, params, m)?.p,
    })
}
