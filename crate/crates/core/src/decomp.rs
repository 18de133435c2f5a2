//! Chunk and stride views of a step sequence, their inverse, and the
//! per-source difference attention.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::dataio::{SourceStream, SourceTag};
use crate::error::{Error, Result};
use crate::tensor::{dot, push_vec, push_vec_mut, TensorMut, TensorRef, Tensors};

/// Which of the two temporal views a segment belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Branch {
    /// Runs of consecutive steps (local view).
    Chunk,
    /// Steps `k, k+m, k+2m, …` (global view).
    Stride,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Coord {
    pub segment: usize,
    pub offset: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Decomposition {
    n_steps: usize,
    chunks: Vec<Vec<usize>>,
    strides: Vec<Vec<usize>>,
    chunk_coords: Vec<Coord>,
    stride_coords: Vec<Coord>,
}

/// Splits `0..n_steps` into `m` chunks and `m` strides.
///
/// The first `n_steps % m` chunks carry one extra step.
pub fn decompose(n_steps: usize, m: usize) -> Result<Decomposition> {
    if m == 0 || m > n_steps {
        return Err(Error::range(
            "segment count",
            format!("m = {m} must lie in 1..={n_steps}"),
        ));
    }
    let base = n_steps / m;
    let extra = n_steps % m;

    let mut chunks = Vec::with_capacity(m);
    let mut start = 0;
    for k in 0..m {
        let len = base + usize::from(k < extra);
        chunks.push((start..start + len).collect::<Vec<_>>());
        start += len;
    }
    let strides: Vec<Vec<usize>> = (0..m).map(|k| (k..n_steps).step_by(m).collect()).collect();

    Ok(Decomposition {
        n_steps,
        chunk_coords: coords(n_steps, &chunks),
        stride_coords: coords(n_steps, &strides),
        chunks,
        strides,
    })
}

fn coords(n_steps: usize, segments: &[Vec<usize>]) -> Vec<Coord> {
    let mut out = vec![
        Coord {
            segment: 0,
            offset: 0
        };
        n_steps
    ];
    for (segment, idx) in segments.iter().enumerate() {
        for (offset, &t) in idx.iter().enumerate() {
            out[t] = Coord { segment, offset };
        }
    }
    out
}

impl Decomposition {
    pub fn n_steps(&self) -> usize {
        self.n_steps
    }

    pub fn segment_count(&self) -> usize {
        self.chunks.len()
    }

    pub fn chunks(&self) -> &[Vec<usize>] {
        &self.chunks
    }

    pub fn strides(&self) -> &[Vec<usize>] {
        &self.strides
    }

    pub fn segments(&self, branch: Branch) -> &[Vec<usize>] {
        match branch {
            Branch::Chunk => &self.chunks,
            Branch::Stride => &self.strides,
        }
    }

    /// `(segment, offset)` of step `t` within `branch`.
    pub fn coord(&self, branch: Branch, t: usize) -> Coord {
        match branch {
            Branch::Chunk => self.chunk_coords[t],
            Branch::Stride => self.stride_coords[t],
        }
    }

    /// Gathers a per-step sequence into per-segment sequences.
    pub fn scatter<T: Clone>(&self, values: &[T], branch: Branch) -> Result<Vec<Vec<T>>> {
        if values.len() != self.n_steps {
            return Err(Error::Shape(format!(
                "scatter: {} values for {} steps",
                values.len(),
                self.n_steps
            )));
        }
        Ok(self
            .segments(branch)
            .iter()
            .map(|idx| idx.iter().map(|&t| values[t].clone()).collect())
            .collect())
    }

    /// Restores temporal order: step `t` receives the value at its
    /// `(segment, offset)` coordinate.
    pub fn reassemble<T: Clone>(&self, segment_values: &[Vec<T>], branch: Branch) -> Result<Vec<T>> {
        let segments = self.segments(branch);
        if segment_values.len() != segments.len()
            || segment_values
                .iter()
                .zip(segments)
                .any(|(v, idx)| v.len() != idx.len())
        {
            return Err(Error::Shape(format!(
                "reassemble: segment lengths {:?} do not match {:?}",
                segment_values.iter().map(Vec::len).collect::<Vec<_>>(),
                segments.iter().map(Vec::len).collect::<Vec<_>>()
            )));
        }
        Ok((0..self.n_steps)
            .map(|t| {
                let c = self.coord(branch, t);
                segment_values[c.segment][c.offset].clone()
            })
            .collect())
    }
}

/// Default segment count, `⌈√n_steps⌉`.
pub fn default_segment_count(n_steps: usize) -> usize {
    let mut m = (n_steps as f64).sqrt().ceil() as usize;
    while m > 1 && (m - 1) * (m - 1) >= n_steps {
        m -= 1;
    }
    while m * m < n_steps {
        m += 1;
    }
    m.clamp(1, n_steps.max(1))
}

/// Difference distances used when none are configured.
pub const DEFAULT_DISTANCES: [usize; 3] = [1, 2, 4];

/// Linear maps from `|x_t − x_{t−δ}|` to a scalar, one per distance δ.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AttentionParams {
    pub distances: Vec<usize>,
    /// One weight vector of length `dim` per distance.
    pub weights: Vec<Vec<f64>>,
    pub biases: Vec<f64>,
}

impl AttentionParams {
    pub fn zeros(dim: usize, distances: &[usize]) -> Self {
        AttentionParams {
            distances: distances.to_vec(),
            weights: vec![vec![0.0; dim]; distances.len()],
            biases: vec![0.0; distances.len()],
        }
    }

    pub fn uniform<R: Rng>(dim: usize, distances: &[usize], rng: &mut R) -> Self {
        let bound = 1.0 / (dim as f64).sqrt();
        AttentionParams {
            distances: distances.to_vec(),
            weights: distances
                .iter()
                .map(|_| (0..dim).map(|_| rng.gen_range(-bound..=bound)).collect())
                .collect(),
            biases: vec![0.0; distances.len()],
        }
    }

    pub fn dim(&self) -> usize {
        self.weights.first().map_or(0, Vec::len)
    }
}

impl Tensors for AttentionParams {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        for (w, delta) in self.weights.iter().zip(&self.distances) {
            push_vec(out, prefix, &format!("w_d{delta}"), w);
        }
        push_vec(out, prefix, "b", &self.biases);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        for (w, delta) in self.weights.iter_mut().zip(&self.distances) {
            push_vec_mut(out, prefix, &format!("w_d{delta}"), w);
        }
        push_vec_mut(out, prefix, "b", &mut self.biases);
    }
}

/// Per-step scalar attention of one source.
#[derive(Clone, Debug, PartialEq)]
pub struct AttentionScores {
    pub d: Vec<f64>,
}

#[inline]
pub(crate) fn lagged(t: usize, delta: usize) -> usize {
    t.saturating_sub(delta)
}

/// `d_t = Σ_δ (w_δ · |x_t − x_{max(t−δ,0)}| + b_δ)`.
pub fn difference_attention(stream: &SourceStream, params: &AttentionParams) -> Result<AttentionScores> {
    Ok(AttentionScores {
        d: attention_rows(&stream.values, stream.n_steps, stream.dim, params)?,
    })
}

/// Same as [`difference_attention`] over a bare row-major matrix.
pub(crate) fn attention_rows(
    values: &[f64],
    n_steps: usize,
    dim: usize,
    params: &AttentionParams,
) -> Result<Vec<f64>> {
    if params.weights.iter().any(|w| w.len() != dim)
        || params.biases.len() != params.distances.len()
        || params.weights.len() != params.distances.len()
    {
        return Err(Error::Shape(format!(
            "attention parameters for dim {} applied to features of dim {dim}",
            params.dim()
        )));
    }
    let row = |t: usize| &values[t * dim..(t + 1) * dim];
    let mut diff = vec![0.0; dim];
    let d = (0..n_steps)
        .map(|t| {
            let mut acc = 0.0;
            for ((w, &b), &delta) in params.weights.iter().zip(&params.biases).zip(&params.distances) {
                for ((o, &a), &c) in diff.iter_mut().zip(row(t)).zip(row(lagged(t, delta))) {
                    *o = (a - c).abs();
                }
                acc += dot(w, &diff) + b;
            }
            acc
        })
        .collect();
    Ok(d)
}

/// Elementwise sum of per-source attention.
pub fn multi_source_attention(
    streams: &BTreeMap<SourceTag, SourceStream>,
    params: &BTreeMap<SourceTag, AttentionParams>,
) -> Result<AttentionScores> {
    if !streams.keys().eq(params.keys()) {
        return Err(Error::Shape(format!(
            "attention sources {:?} do not match stream sources {:?}",
            params.keys().collect::<Vec<_>>(),
            streams.keys().collect::<Vec<_>>()
        )));
    }
    let mut total: Option<Vec<f64>> = None;
    for (tag, stream) in streams {
        let d = difference_attention(stream, &params[tag])?.d;
        match total.as_mut() {
            None => total = Some(d),
            Some(acc) => {
                if acc.len() != d.len() {
                    return Err(Error::Shape("sources differ in n_steps".into()));
                }
                acc.iter_mut().zip(&d).for_each(|(a, b)| *a += b);
            }
        }
    }
    Ok(AttentionScores {
        d: total.unwrap_or_default(),
    })
}
