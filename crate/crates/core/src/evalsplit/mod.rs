//! F1 evaluation against multi-user references, k-fold aggregation and
//! split auditing/generation.

mod f1;
mod splits;

use serde::{Deserialize, Serialize};

pub use f1::{evaluate_video, f1_single, EvalMode, VideoEval};
pub use splits::{audit_splits, generate_splits, natural_cmp, AuditReport, Fold, KeyCount, SplitSet};

use crate::dataio::{Dataset, VideoRecord};
use crate::error::{Error, Result};
use crate::shotselect::MachineSummary;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub mode: EvalMode,
    /// One entry per test occurrence, in fold then split-file order.
    pub per_video: Vec<VideoEval>,
    pub fold_means: Vec<f64>,
    pub overall: f64,
}

/// Fold score = mean over the fold's test entries; overall = mean over folds.
///
/// A key listed in several folds is scored once in each of them.
pub fn aggregate_folds(per_fold: Vec<Vec<VideoEval>>, mode: EvalMode) -> Result<EvalResult> {
    if per_fold.is_empty() {
        return Err(Error::range("folds", "no folds to aggregate"));
    }
    let mut fold_means = Vec::with_capacity(per_fold.len());
    for (i, fold) in per_fold.iter().enumerate() {
        if fold.is_empty() {
            return Err(Error::range("folds", format!("fold {i} has no test videos")));
        }
        fold_means.push(fold.iter().map(|v| v.aggregated).sum::<f64>() / fold.len() as f64);
    }
    let overall = fold_means.iter().sum::<f64>() / fold_means.len() as f64;
    Ok(EvalResult {
        mode,
        per_video: per_fold.into_iter().flatten().collect(),
        fold_means,
        overall,
    })
}

/// Evaluates every test video of every fold with the summary produced by
/// `summarize(fold, video)`.
pub fn cross_validate<F>(dataset: &Dataset, splits: &SplitSet, mode: EvalMode, mut summarize: F) -> Result<EvalResult>
where
    F: FnMut(usize, &VideoRecord) -> Result<MachineSummary>,
{
    let overlapping = splits.overlapping_folds();
    if !overlapping.is_empty() {
        return Err(Error::Invalid(vec![format!(
            "folds {overlapping:?} share keys between train and test"
        )]));
    }
    let mut per_fold = Vec::with_capacity(splits.k());
    for (i, fold) in splits.folds.iter().enumerate() {
        let mut evals = Vec::with_capacity(fold.test_keys.len());
        for key in &fold.test_keys {
            let video = dataset
                .get(key)
                .ok_or_else(|| Error::Invalid(vec![format!("fold {i}: test video `{key}` not in dataset")]))?;
            let summary = summarize(i, video)?;
            evals.push(evaluate_video(key, i, &summary.mask, &video.references, mode)?);
        }
        per_fold.push(evals);
    }
    aggregate_folds(per_fold, mode)
}
