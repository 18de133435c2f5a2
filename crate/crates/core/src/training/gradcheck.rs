//! Central-difference gradient oracle.

use serde::Serialize;

use super::{surrogate_loss, TrainConfig, TrainableParams};
use crate::dataio::VideoRecord;
use crate::error::Result;
use crate::tensor::Tensors;

pub const DEFAULT_EPSILON: f64 = 1e-5;

/// `(L(θ+ε) − L(θ−ε)) / 2ε` for every scalar parameter, in visit order.
pub fn finite_difference_gradient(
    record: &VideoRecord,
    params: &TrainableParams,
    cfg: &TrainConfig,
    epsilon: f64,
) -> Result<TrainableParams> {
    assert!(epsilon > 0.0, "epsilon must be positive");
    let mut probe = params.clone();
    let mut grad = params.zeros_like();
    let sizes: Vec<usize> = params.tensors().iter().map(|t| t.data.len()).collect();

    let set = |probe: &mut TrainableParams, ti: usize, j: usize, v: f64| {
        probe.tensors_mut()[ti].data[j] = v;
    };
    let mut out = Vec::with_capacity(sizes.iter().sum());
    for (ti, &len) in sizes.iter().enumerate() {
        for j in 0..len {
            let orig = probe.tensors()[ti].data[j];
            set(&mut probe, ti, j, orig + epsilon);
            let up = surrogate_loss(record, &probe, cfg)?.total;
            set(&mut probe, ti, j, orig - epsilon);
            let down = surrogate_loss(record, &probe, cfg)?.total;
            set(&mut probe, ti, j, orig);
            out.push((up - down) / (2.0 * epsilon));
        }
    }
    let mut it = out.into_iter();
    for t in grad.tensors_mut() {
        for v in t.data.iter_mut() {
            *v = it.next().expect("one value per parameter");
        }
    }
    Ok(grad)
}

#[derive(Clone, Debug, Serialize)]
pub struct TensorCheck {
    pub name: String,
    pub max_rel_error: f64,
    /// Flat index inside the tensor where the maximum occurred.
    pub argmax: usize,
    pub analytic: f64,
    pub numeric: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct GradCheckReport {
    pub epsilon: f64,
    pub tensors: Vec<TensorCheck>,
}

impl GradCheckReport {
    pub fn max_rel_error(&self) -> f64 {
        self.tensors.iter().map(|t| t.max_rel_error).fold(0.0, f64::max)
    }

    pub fn worst(&self) -> Option<&TensorCheck> {
        self.tensors
            .iter()
            .max_by(|a, b| a.max_rel_error.total_cmp(&b.max_rel_error))
    }
}

/// `|a − n| / max(|a|, |n|, 1e−8)`
pub fn relative_error(analytic: f64, numeric: f64) -> f64 {
    (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8)
}

pub fn compare_gradients<T: Tensors>(analytic: &T, numeric: &T, epsilon: f64) -> GradCheckReport {
    let tensors = analytic
        .tensors()
        .iter()
        .zip(numeric.tensors())
        .map(|(a, n)| {
            let mut best = TensorCheck {
                name: a.name.clone(),
                max_rel_error: 0.0,
                argmax: 0,
                analytic: a.data.first().copied().unwrap_or(0.0),
                numeric: n.data.first().copied().unwrap_or(0.0),
            };
            for (j, (&av, &nv)) in a.data.iter().zip(n.data).enumerate() {
                let e = relative_error(av, nv);
                if e > best.max_rel_error {
                    best = TensorCheck {
                        name: a.name.clone(),
                        max_rel_error: e,
                        argmax: j,
                        analytic: av,
                        numeric: nv,
                    };
                }
            }
            best
        })
        .collect();
    GradCheckReport { epsilon, tensors }
}
