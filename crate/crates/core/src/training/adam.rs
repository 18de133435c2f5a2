use super::TrainConfig;
use crate::tensor::Tensors;

/// Euclidean norm over every entry of `grad`.
pub fn global_norm<T: Tensors>(grad: &T) -> f64 {
    grad.tensors()
        .iter()
        .flat_map(|t| t.data.iter())
        .map(|g| g * g)
        .sum::<f64>()
        .sqrt()
}

/// Rescales `grad` so its global norm is at most `max_norm`. Returns the
/// norm before clipping.
pub fn clip_global_norm<T: Tensors>(grad: &mut T, max_norm: f64) -> f64 {
    let norm = global_norm(grad);
    if norm > max_norm {
        let scale = max_norm / norm;
        for t in grad.tensors_mut() {
            t.data.iter_mut().for_each(|g| *g *= scale);
        }
    }
    norm
}

/// Adam with bias correction over a flattened parameter vector.
#[derive(Clone, Debug)]
pub struct Adam {
    lr: f64,
    beta1: f64,
    beta2: f64,
    eps: f64,
    step: i32,
    m: Vec<f64>,
    v: Vec<f64>,
}

impl Adam {
    pub fn new(n_params: usize, cfg: &TrainConfig) -> Self {
        Adam {
            lr: cfg.learning_rate,
            beta1: cfg.beta1,
            beta2: cfg.beta2,
            eps: cfg.adam_epsilon,
            step: 0,
            m: vec![0.0; n_params],
            v: vec![0.0; n_params],
        }
    }

    pub fn step<T: Tensors>(&mut self, params: &mut T, grad: &T) {
        self.step += 1;
        let bc1 = 1.0 - self.beta1.powi(self.step);
        let bc2 = 1.0 - self.beta2.powi(self.step);
        let mut i = 0;
        for (p, g) in params.tensors_mut().into_iter().zip(grad.tensors()) {
            for (w, &gv) in p.data.iter_mut().zip(g.data) {
                self.m[i] = self.beta1 * self.m[i] + (1.0 - self.beta1) * gv;
                self.v[i] = self.beta2 * self.v[i] + (1.0 - self.beta2) * gv * gv;
                let m_hat = self.m[i] / bc1;
                let v_hat = self.v[i] / bc2;
                *w -= self.lr * m_hat / (v_hat.sqrt() + self.eps);
                i += 1;
            }
        }
        debug_assert_eq!(i, self.m.len());
    }
}
