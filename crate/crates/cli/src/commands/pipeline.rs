//! train → score → summarize → evaluate over the folds of a split file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::Args;
use mcsf_core::checkpoint;
use mcsf_core::dataio::{load_dataset, Dataset};
use mcsf_core::evalsplit::{audit_splits, cross_validate, EvalResult};
use mcsf_core::model::{forward, ImportanceScores, Strategy};
use mcsf_core::shotselect::{summarize, BoundarySource, MachineSummary};
use mcsf_core::{EvalMode, SplitSet, VideoRecord};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{RunConfig, SummaryFlags, TrainFlags, RUN_CONFIG_FILE};
use crate::fail::Usage;
use crate::output::{pretty, read_json, Staged};

pub const SCORES_FILE: &str = "scores.json";
pub const SUMMARIES_FILE: &str = "summaries.json";
pub const EVALUATION_JSON: &str = "evaluation.json";
pub const EVALUATION_CSV: &str = "evaluation.csv";

pub fn checkpoint_name(fold: usize) -> String {
    format!("fold_{fold}.ckpt")
}

#[derive(Args, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub splits: PathBuf,
    /// Run directory for checkpoints and histories
    #[arg(long)]
    pub out: PathBuf,
    /// JSON file with run configuration fields
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Folds trained concurrently
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
    #[command(flatten)]
    pub flags: TrainFlags,
}

#[derive(Args, Debug)]
pub struct ScoreArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub splits: PathBuf,
    /// Run directory written by `train`
    #[arg(long)]
    pub run: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 1)]
    pub jobs: usize,
}

#[derive(Args, Debug)]
pub struct SummarizeArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    /// Directory written by `score`
    #[arg(long)]
    pub scores: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub flags: SummaryFlags,
}

#[derive(Args, Debug)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub dataset: PathBuf,
    #[arg(long)]
    pub splits: PathBuf,
    /// Directory written by `summarize`
    #[arg(long)]
    pub summaries: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// avg | max
    #[arg(long)]
    pub mode: Option<EvalMode>,
    /// Column label for the report; defaults to F1* for clean splits, F1' otherwise
    #[arg(long)]
    pub split_label: Option<String>,
}

fn thread_pool(jobs: usize) -> Result<rayon::ThreadPool> {
    if jobs == 0 {
        bail!(Usage("--jobs must be at least 1".into()));
    }
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .context("building worker pool")
}

/// Every fold key present in the dataset and no fold sharing keys.
fn check_splits(ds: &Dataset, splits: &SplitSet, path: &Path) -> Result<()> {
    let mut problems = Vec::new();
    for (i, fold) in splits.folds.iter().enumerate() {
        for key in fold.train_keys.iter().chain(&fold.test_keys) {
            if ds.get(key).is_none() {
                problems.push(format!("fold {i}: `{key}` is not in the dataset"));
            }
        }
        if fold.test_keys.is_empty() {
            problems.push(format!("fold {i}: no test videos"));
        }
    }
    let overlapping = splits.overlapping_folds();
    if !overlapping.is_empty() {
        problems.push(format!("folds {overlapping:?} share keys between train and test"));
    }
    if splits.folds.is_empty() {
        problems.push("no folds".into());
    }
    if problems.is_empty() {
        Ok(())
    } else {
        bail!(Usage(format!("{}: {}", path.display(), problems.join("; "))))
    }
}

fn videos<'a>(ds: &'a Dataset, keys: &[String]) -> Vec<&'a VideoRecord> {
    keys.iter().map(|k| ds.get(k).expect("keys checked")).collect()
}

pub fn train(args: TrainArgs) -> Result<()> {
    let cfg = RunConfig::default()
        .with_file(args.config.as_deref())?
        .with_train_flags(&args.flags);
    cfg.validate()?;
    let pool = thread_pool(args.jobs)?;
    let ds = load_dataset(&args.dataset)?;
    let splits = SplitSet::load(&args.splits)?;
    check_splits(&ds, &splits, &args.splits)?;
    let tcfg = cfg.train_config();
    for (i, fold) in splits.folds.iter().enumerate() {
        if fold.train_keys.is_empty() {
            bail!(Usage(format!("fold {i}: no training videos")));
        }
        // Surface shape and segment problems before any fold trains.
        let probe = mcsf_core::training::TrainConfig { epochs: 0, ..tcfg.clone() };
        mcsf_core::training::train(&videos(&ds, &fold.train_keys), &probe)
            .map_err(|e| anyhow!(Usage(format!("fold {i}: {e}"))))?;
    }

    let outcomes = pool.install(|| {
        splits
            .folds
            .par_iter()
            .map(|fold| mcsf_core::training::train(&videos(&ds, &fold.train_keys), &tcfg))
            .collect::<mcsf_core::Result<Vec<_>>>()
    })?;

    let mut staged = Staged::new();
    for (i, out) in outcomes.iter().enumerate() {
        staged.add(
            args.out.join(checkpoint_name(i)),
            checkpoint::encode(&out.params.scorer, tcfg.segments),
        );
        staged.add(args.out.join(format!("fold_{i}_history.csv")), out.history_csv());
        let (first, last) = (out.history[0].total, out.history[out.history.len() - 1].total);
        eprintln!("fold {i}: total loss {first:.5} -> {last:.5} over {} epochs", tcfg.epochs);
    }
    staged.add(args.out.join(RUN_CONFIG_FILE), cfg.to_json());
    staged.commit()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoreEntry {
    pub fold: usize,
    pub video_id: String,
    pub p: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScoresFile {
    pub strategy: Strategy,
    pub segments: Option<usize>,
    pub entries: Vec<ScoreEntry>,
}

pub fn score(args: ScoreArgs) -> Result<()> {
    let pool = thread_pool(args.jobs)?;
    let cfg = RunConfig::from_dir_or_default(&args.run)?;
    let ds = load_dataset(&args.dataset)?;
    let splits = SplitSet::load(&args.splits)?;
    check_splits(&ds, &splits, &args.splits)?;
    let mut models = Vec::with_capacity(splits.k());
    for i in 0..splits.k() {
        let path = args.run.join(checkpoint_name(i));
        let bytes = std::fs::read(&path).with_context(|| format!("reading checkpoint {}", path.display()))?;
        let (params, header) = checkpoint::decode(&bytes).with_context(|| path.display().to_string())?;
        models.push((params, header.segments));
    }
    let strategy = models[0].0.strategy();

    let per_fold = pool.install(|| {
        splits
            .folds
            .par_iter()
            .zip(&models)
            .enumerate()
            .map(|(i, (fold, (params, segments)))| {
                fold.test_keys
                    .iter()
                    .map(|key| {
                        let p = forward(ds.get(key).expect("keys checked"), params, *segments)?.p;
                        Ok(ScoreEntry { fold: i, video_id: key.clone(), p })
                    })
                    .collect::<mcsf_core::Result<Vec<_>>>()
            })
            .collect::<mcsf_core::Result<Vec<_>>>()
    })?;
    let file = ScoresFile {
        strategy,
        segments: models[0].1,
        entries: per_fold.into_iter().flatten().collect(),
    };
    let mut staged = Staged::new();
    staged.add(args.out.join(SCORES_FILE), pretty(&file));
    staged.add(args.out.join(RUN_CONFIG_FILE), cfg.to_json());
    staged.commit()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummaryEntry {
    pub fold: usize,
    pub video_id: String,
    /// Raw 0/1 bytes, one per original frame, relative to the output directory.
    pub mask: String,
    pub n_frames: usize,
    pub budget_frames: usize,
    pub selected_frames: usize,
    pub selected_shots: Vec<usize>,
    pub shots: Vec<(usize, usize)>,
    pub boundary_source: BoundarySource,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SummariesFile {
    pub strategy: Strategy,
    pub budget_fraction: f64,
    pub entries: Vec<SummaryEntry>,
}

pub fn summarize_cmd(args: SummarizeArgs) -> Result<()> {
    let cfg = RunConfig::from_dir_or_default(&args.scores)?
        .with_file(args.config.as_deref())?
        .with_summary_flags(&args.flags);
    cfg.validate()?;
    let ds = load_dataset(&args.dataset)?;
    let scores: ScoresFile = read_json(&args.scores.join(SCORES_FILE))?;
    let scfg = cfg.summary_config();

    let mut staged = Staged::new();
    let mut entries = Vec::with_capacity(scores.entries.len());
    for e in &scores.entries {
        let video = ds
            .get(&e.video_id)
            .ok_or_else(|| Usage(format!("scored video `{}` is not in the dataset", e.video_id)))?;
        let s: MachineSummary = summarize(video, &ImportanceScores { p: e.p.clone() }, &scfg)
            .with_context(|| format!("fold {}, video {}", e.fold, e.video_id))?;
        let rel = format!("masks/fold_{}/{}.u8", e.fold, e.video_id);
        entries.push(SummaryEntry {
            fold: e.fold,
            video_id: e.video_id.clone(),
            mask: rel.clone(),
            n_frames: video.n_frames,
            budget_frames: s.budget_frames,
            selected_frames: s.selected_frames(),
            selected_shots: s.selected_shots.clone(),
            shots: s.shots.clone(),
            boundary_source: s.boundary_source,
        });
        staged.add(args.out.join(rel), s.mask);
    }
    let file = SummariesFile {
        strategy: scores.strategy,
        budget_fraction: cfg.budget_fraction,
        entries,
    };
    staged.add(args.out.join(SUMMARIES_FILE), pretty(&file));
    staged.add(args.out.join(RUN_CONFIG_FILE), cfg.to_json());
    staged.commit()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EvaluationFile {
    pub dataset: String,
    pub strategy: Strategy,
    pub split_label: String,
    pub mode: EvalMode,
    pub fold_means: Vec<f64>,
    pub overall: f64,
    pub per_video: Vec<mcsf_core::evalsplit::VideoEval>,
}

fn evaluation_csv(result: &EvalResult) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["video_id", "fold", "per_user_f1_mean", "aggregated", "mode"])?;
    for v in &result.per_video {
        w.write_record([
            v.video_id.clone(),
            v.fold.to_string(),
            v.mean_user_f1().to_string(),
            v.aggregated.to_string(),
            v.mode.to_string(),
        ])?;
    }
    Ok(w.into_inner()?)
}

pub fn evaluate(args: EvaluateArgs) -> Result<()> {
    let mut cfg = RunConfig::from_dir_or_default(&args.summaries)?.with_file(args.config.as_deref())?;
    if let Some(m) = args.mode {
        cfg.mode = m;
    }
    cfg.validate()?;
    let ds = load_dataset(&args.dataset)?;
    let splits = SplitSet::load(&args.splits)?;
    check_splits(&ds, &splits, &args.splits)?;
    let summaries: SummariesFile = read_json(&args.summaries.join(SUMMARIES_FILE))?;
    let index: BTreeMap<(usize, &str), &SummaryEntry> = summaries
        .entries
        .iter()
        .map(|e| ((e.fold, e.video_id.as_str()), e))
        .collect();

    let result = cross_validate(&ds, &splits, cfg.mode, |fold, video| {
        let entry = index.get(&(fold, video.video_id.as_str())).ok_or_else(|| {
            mcsf_core::Error::Invalid(vec![format!("no summary for fold {fold}, video {}", video.video_id)])
        })?;
        let path = args.summaries.join(&entry.mask);
        let mask = std::fs::read(&path).map_err(|source| mcsf_core::Error::Io { path, source })?;
        Ok(MachineSummary {
            mask,
            selected_shots: entry.selected_shots.clone(),
            budget_frames: entry.budget_frames,
            shots: entry.shots.clone(),
            boundary_source: entry.boundary_source,
        })
    })?;

    let split_label = args.split_label.unwrap_or_else(|| {
        if audit_splits(&splits, &ds.keys()).is_clean() { "F1*" } else { "F1'" }.to_string()
    });
    let csv = evaluation_csv(&result)?;
    let file = EvaluationFile {
        dataset: ds.name().to_string(),
        strategy: summaries.strategy,
        split_label,
        mode: result.mode,
        fold_means: result.fold_means,
        overall: result.overall,
        per_video: result.per_video,
    };
    eprintln!("{} {} {}: overall F1 {:.4}", file.dataset, file.strategy, file.mode, file.overall);
    let mut staged = Staged::new();
    staged.add(args.out.join(EVALUATION_CSV), csv);
    staged.add(args.out.join(EVALUATION_JSON), pretty(&file));
    staged.add(args.out.join(RUN_CONFIG_FILE), cfg.to_json());
    staged.commit()
}
