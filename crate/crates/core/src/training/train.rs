use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::{backward, clip_global_norm, surrogate_loss, Adam, TrainConfig, TrainableParams};
use crate::dataio::VideoRecord;
use crate::error::{Error, Result};
use crate::tensor::Tensors;

/// Dataset-mean objective after `epoch` epochs (epoch 0 is the initial state).
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub total: f64,
    pub reconstruction: f64,
    pub sparsity: f64,
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub params: TrainableParams,
    pub history: Vec<EpochRecord>,
}

impl TrainOutcome {
    /// `epoch,total,reconstruction,sparsity` with a header row.
    pub fn history_csv(&self) -> String {
        let mut s = String::from("epoch,total,reconstruction,sparsity\n");
        for h in &self.history {
            s.push_str(&format!("{},{},{},{}\n", h.epoch, h.total, h.reconstruction, h.sparsity));
        }
        s
    }
}

fn evaluate(videos: &[&VideoRecord], params: &TrainableParams, cfg: &TrainConfig, epoch: usize) -> Result<EpochRecord> {
    let mut acc = EpochRecord {
        epoch,
        total: 0.0,
        reconstruction: 0.0,
        sparsity: 0.0,
    };
    for v in videos {
        let o = surrogate_loss(v, params, cfg)?;
        if !o.total.is_finite() {
            return Err(Error::NonFinite(format!("loss at epoch {epoch}, video {}", v.video_id)));
        }
        acc.total += o.total;
        acc.reconstruction += o.reconstruction;
        acc.sparsity += o.sparsity;
    }
    let n = videos.len() as f64;
    acc.total /= n;
    acc.reconstruction /= n;
    acc.sparsity /= n;
    Ok(acc)
}

/// Per-video Adam updates with global-norm clipping, visiting videos in a
/// seeded shuffled order each epoch.
pub fn train(videos: &[&VideoRecord], cfg: &TrainConfig) -> Result<TrainOutcome> {
    cfg.validate()?;
    let first = videos
        .first()
        .ok_or_else(|| Error::range("dataset", "no training videos"))?;
    let dims: BTreeMap<_, _> = first.streams.iter().map(|(&t, s)| (t, s.dim)).collect();
    let mut params = TrainableParams::init(&cfg.model, &dims, cfg.seed)?;
    let mut opt = Adam::new(params.num_params(), cfg);
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(2));

    let mut history = vec![evaluate(videos, &params, cfg, 0)?];
    let mut order: Vec<usize> = (0..videos.len()).collect();
    for epoch in 1..=cfg.epochs {
        order.shuffle(&mut rng);
        for &i in &order {
            let (obj, mut grad) = backward(videos[i], &params, cfg)?;
            if !obj.total.is_finite() {
                return Err(Error::NonFinite(format!(
                    "loss at epoch {epoch}, video {}",
                    videos[i].video_id
                )));
            }
            clip_global_norm(&mut grad, cfg.clip_norm);
            opt.step(&mut params, &grad);
        }
        history.push(evaluate(videos, &params, cfg, epoch)?);
    }
    Ok(TrainOutcome { params, history })
}
