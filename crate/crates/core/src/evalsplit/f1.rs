use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::dataio::ReferenceSummaries;
use crate::error::{Error, Result};

/// Harmonic mean of overlap precision and recall between two binary masks.
/// Each ratio is 0 when its denominator is 0, and F1 is 0 when both are.
pub fn f1_single(machine: &[u8], user: &[u8]) -> Result<f64> {
    if machine.len() != user.len() {
        return Err(Error::Shape(format!(
            "machine mask has {} frames, user mask {}",
            machine.len(),
            user.len()
        )));
    }
    let (mut overlap, mut m_sum, mut u_sum) = (0usize, 0usize, 0usize);
    for (&m, &u) in machine.iter().zip(user) {
        let (m, u) = (m != 0, u != 0);
        overlap += usize::from(m && u);
        m_sum += usize::from(m);
        u_sum += usize::from(u);
    }
    let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
    let precision = ratio(overlap, m_sum);
    let recall = ratio(overlap, u_sum);
    if precision + recall == 0.0 {
        Ok(0.0)
    } else {
        Ok(2.0 * precision * recall / (precision + recall))
    }
}

/// How per-user F1 scores are reduced to one number per video.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EvalMode {
    Avg,
    Max,
}

impl EvalMode {
    pub fn as_str(self) -> &'static str {
        match self {
            EvalMode::Avg => "avg",
            EvalMode::Max => "max",
        }
    }

    pub fn aggregate(self, scores: &[f64]) -> f64 {
        match self {
            EvalMode::Avg if scores.is_empty() => 0.0,
            EvalMode::Avg => scores.iter().sum::<f64>() / scores.len() as f64,
            EvalMode::Max => scores.iter().copied().fold(0.0, f64::max),
        }
    }
}

impl fmt::Display for EvalMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EvalMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "avg" => Ok(EvalMode::Avg),
            "max" => Ok(EvalMode::Max),
            other => Err(format!("unknown mode `{other}` (expected avg|max)")),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VideoEval {
    pub video_id: String,
    pub fold: usize,
    pub per_user_f1: Vec<f64>,
    pub aggregated: f64,
    pub mode: EvalMode,
}

impl VideoEval {
    pub fn mean_user_f1(&self) -> f64 {
        EvalMode::Avg.aggregate(&self.per_user_f1)
    }
}

/// Scores `machine` against every user summary and aggregates per `mode`.
pub fn evaluate_video(
    video_id: &str,
    fold: usize,
    machine: &[u8],
    refs: &ReferenceSummaries,
    mode: EvalMode,
) -> Result<VideoEval> {
    let per_user_f1 = refs
        .iter()
        .map(|user| f1_single(machine, user))
        .collect::<Result<Vec<_>>>()?;
    Ok(VideoEval {
        video_id: video_id.to_string(),
        fold,
        aggregated: mode.aggregate(&per_user_f1),
        per_user_f1,
        mode,
    })
}
