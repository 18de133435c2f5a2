//! From per-step scores to a keyshot summary: upsample to frames, cut the
//! video into shots, score shots and pick them under a length budget.

mod knapsack;
mod kts;

use serde::{Deserialize, Serialize};

pub use knapsack::{knapsack_select, KnapsackResult};
pub use kts::{default_shot_count, kts_segment, steps_to_frames, StepSegmentation};

use crate::dataio::{Segment, SourceTag, VideoRecord};
use crate::error::{Error, Result};
use crate::model::ImportanceScores;

pub const DEFAULT_BUDGET_FRACTION: f64 = 0.15;

/// Expands per-step scores to per-frame scores.
///
/// Frame `f` takes the score of the last step whose pick is `≤ f`; frames
/// before the first pick take the first score.
pub fn upsample_scores(p: &[f64], picks: &[usize], n_frames: usize) -> Result<Vec<f64>> {
    if p.len() != picks.len() || p.is_empty() {
        return Err(Error::Shape(format!(
            "{} scores for {} picks",
            p.len(),
            picks.len()
        )));
    }
    if picks.windows(2).any(|w| w[1] <= w[0]) || picks[picks.len() - 1] >= n_frames {
        return Err(Error::Shape(format!(
            "picks must be strictly increasing and below n_frames {n_frames}"
        )));
    }
    let mut out = Vec::with_capacity(n_frames);
    let mut step = 0;
    for f in 0..n_frames {
        while step + 1 < picks.len() && picks[step + 1] <= f {
            step += 1;
        }
        out.push(p[step]);
    }
    Ok(out)
}

/// Mean frame score and frame count of every shot.
pub fn shot_values(frame_scores: &[f64], shots: &[Segment]) -> (Vec<f64>, Vec<usize>) {
    shots
        .iter()
        .map(|&(a, b)| {
            let sum: f64 = frame_scores[a..b].iter().sum();
            (sum / (b - a) as f64, b - a)
        })
        .unzip()
}

/// Where shot boundaries came from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundarySource {
    ChangePoints,
    Kts,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SummaryConfig {
    pub budget_fraction: f64,
    /// Shot count for segmentation when a video ships no change points.
    pub kts_segments: Option<usize>,
}

impl Default for SummaryConfig {
    fn default() -> Self {
        SummaryConfig {
            budget_fraction: DEFAULT_BUDGET_FRACTION,
            kts_segments: None,
        }
    }
}

/// Binary per-frame keyshot selection.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MachineSummary {
    pub mask: Vec<u8>,
    pub selected_shots: Vec<usize>,
    pub budget_frames: usize,
    pub shots: Vec<Segment>,
    pub boundary_source: BoundarySource,
}

impl MachineSummary {
    pub fn selected_frames(&self) -> usize {
        self.mask.iter().map(|&v| v as usize).sum()
    }
}

/// Shot boundaries for `record`: its change points when present, otherwise
/// KTS over the objects stream (or the only stream).
pub fn shot_boundaries(record: &VideoRecord, kts_segments: Option<usize>) -> Result<(Vec<Segment>, BoundarySource)> {
    if let Some(cps) = &record.change_points {
        return Ok((cps.clone(), BoundarySource::ChangePoints));
    }
    let stream = record
        .stream(SourceTag::Objects)
        .or_else(|| record.streams.values().next())
        .ok_or_else(|| Error::Shape(format!("{}: no features to segment", record.video_id)))?;
    let seg = kts_segment(stream, kts_segments)?;
    Ok((
        steps_to_frames(&seg.segments, &record.picks, record.n_frames),
        BoundarySource::Kts,
    ))
}

/// upsample → shots → shot values → knapsack under `⌊budget·n_frames⌋`.
pub fn summarize(record: &VideoRecord, scores: &ImportanceScores, cfg: &SummaryConfig) -> Result<MachineSummary> {
    if !(cfg.budget_fraction >= 0.0 && cfg.budget_fraction <= 1.0) {
        return Err(Error::range(
            "budget_fraction",
            format!("{} must lie in [0, 1]", cfg.budget_fraction),
        ));
    }
    let frame_scores = upsample_scores(&scores.p, &record.picks, record.n_frames)?;
    let (shots, boundary_source) = shot_boundaries(record, cfg.kts_segments)?;
    let (values, weights) = shot_values(&frame_scores, &shots);
    let budget_frames = (cfg.budget_fraction * record.n_frames as f64).floor() as usize;
    let pick = knapsack_select(&values, &weights, budget_frames);

    let mut mask = vec![0u8; record.n_frames];
    for &s in &pick.chosen {
        let (a, b) = shots[s];
        mask[a..b].fill(1);
    }
    Ok(MachineSummary {
        mask,
        selected_shots: pick.chosen,
        budget_frames,
        shots,
        boundary_source,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upsample_step_function() {
        let f = upsample_scores(&[0.2, 0.9, 0.1], &[0, 15, 30], 45).unwrap();
        assert!(f[..15].iter().all(|&v| v == 0.2));
        assert!(f[15..30].iter().all(|&v| v == 0.9));
        assert!(f[30..].iter().all(|&v| v == 0.1));
    }

    #[test]
    fn upsample_single_step_is_constant() {
        assert_eq!(upsample_scores(&[0.4], &[0], 7).unwrap(), vec![0.4; 7]);
    }

    #[test]
    fn upsample_frames_before_first_pick_take_first_score() {
        let f = upsample_scores(&[1.0, 2.0], &[5, 10], 12).unwrap();
        assert_eq!(f, [vec![1.0; 10], vec![2.0; 2]].concat());
    }

    #[test]
    fn upsample_rejects_inconsistent_picks() {
        assert!(upsample_scores(&[1.0, 2.0], &[0, 12], 12).is_err());
        assert!(upsample_scores(&[1.0], &[0, 3], 12).is_err());
    }

    #[test]
    fn shot_values_are_means_with_frame_weights() {
        let scores: Vec<f64> = (0..6).map(f64::from).collect();
        let (v, w) = shot_values(&scores, &[(0, 2), (2, 6)]);
        assert_eq!(v, vec![0.5, 3.5]);
        assert_eq!(w, vec![2, 4]);
        let (u, _) = shot_values(&[0.3; 6], &[(0, 1), (1, 6)]);
        assert_eq!(u, vec![0.3, 0.3]);
    }
}
