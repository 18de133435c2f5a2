//! Desk-scale unsupervised training of the scorer.
//!
//! The objective asks a bidirectional decoder to rebuild the primary feature
//! sequence from score-weighted features (`p_t · x_t`) while a sparsity term
//! pulls the mean score toward a summary-length target.

mod adam;
mod gradcheck;
mod objective;
mod train;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use adam::{clip_global_norm, global_norm, Adam};
pub use gradcheck::{compare_gradients, relative_error, DEFAULT_EPSILON, finite_difference_gradient, GradCheckReport, TensorCheck};
pub use objective::{backward, surrogate_loss, Objective};
pub use train::{train, EpochRecord, TrainOutcome};

use crate::model::{BiLstm, ModelConfig, Projection, ScorerParams};
use crate::tensor::{join, TensorMut, TensorRef, Tensors};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub model: ModelConfig,
    /// Fixed segment count, or `None` for `⌈√n_steps⌉` per video.
    pub segments: Option<usize>,
    pub epochs: usize,
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub adam_epsilon: f64,
    pub clip_norm: f64,
    pub lambda_sparsity: f64,
    pub sigma_target: f64,
    pub seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            model: ModelConfig::default(),
            segments: None,
            epochs: 50,
            learning_rate: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            adam_epsilon: 1e-8,
            clip_norm: 5.0,
            lambda_sparsity: 1.0,
            sigma_target: 0.15,
            seed: 7,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> crate::Result<()> {
        use crate::Error;
        let positive = [
            ("beta1", self.beta1 > 0.0 && self.beta1 < 1.0),
            ("beta2", self.beta2 > 0.0 && self.beta2 < 1.0),
            ("adam_epsilon", self.adam_epsilon > 0.0),
            ("clip_norm", self.clip_norm > 0.0),
            ("learning_rate", self.learning_rate >= 0.0 && self.learning_rate.is_finite()),
            ("lambda_sparsity", self.lambda_sparsity >= 0.0 && self.lambda_sparsity.is_finite()),
            ("sigma_target", self.sigma_target > 0.0 && self.sigma_target < 1.0),
            ("hidden", self.model.hidden > 0),
        ];
        for (name, ok) in positive {
            if !ok {
                return Err(Error::range(name, "value out of range"));
            }
        }
        if self.segments == Some(0) {
            return Err(Error::range("segments", "must be at least 1"));
        }
        Ok(())
    }
}

/// Bidirectional decoder reconstructing `x_t` from `p_t · x_t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecoderParams {
    pub rnn: BiLstm,
    /// `2h → dim`
    pub head: Projection,
}

impl DecoderParams {
    pub fn new(dim: usize, hidden: usize, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let rnn = BiLstm::uniform(dim, hidden, &mut rng);
        let head = Projection::uniform(2 * hidden, dim, &mut rng);
        DecoderParams { rnn, head }
    }

    pub fn zeros(dim: usize, hidden: usize) -> Self {
        DecoderParams {
            rnn: BiLstm::zeros(dim, hidden),
            head: Projection::zeros(2 * hidden, dim),
        }
    }

    pub fn dim(&self) -> usize {
        self.head.d_out()
    }
}

impl Tensors for DecoderParams {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        self.rnn.visit(&join(prefix, "rnn"), out);
        self.head.visit(&join(prefix, "head"), out);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        self.rnn.visit_mut(&join(prefix, "rnn"), out);
        self.head.visit_mut(&join(prefix, "head"), out);
    }
}

/// Scorer and decoder optimized together; also the shape of their gradients.
#[derive(Clone, Debug, PartialEq)]
pub struct TrainableParams {
    pub scorer: ScorerParams,
    pub decoder: DecoderParams,
}

impl TrainableParams {
    /// Seeded scorer plus a decoder sized for its primary sequence.
    pub fn init(
        config: &ModelConfig,
        dims: &std::collections::BTreeMap<crate::SourceTag, usize>,
        seed: u64,
    ) -> crate::Result<Self> {
        let scorer = crate::model::init_params(config, dims, seed)?;
        let decoder = DecoderParams::new(scorer.primary_dim(), config.hidden, seed.wrapping_add(1));
        Ok(TrainableParams { scorer, decoder })
    }
}

impl Tensors for TrainableParams {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        self.scorer.visit(&join(prefix, "scorer"), out);
        self.decoder.visit(&join(prefix, "decoder"), out);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        self.scorer.visit_mut(&join(prefix, "scorer"), out);
        self.decoder.visit_mut(&join(prefix, "decoder"), out);
    }
}
