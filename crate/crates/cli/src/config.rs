//! Effective run configuration: defaults ← upstream echo ← `--config` file ← flags.

use std::path::Path;

use anyhow::{bail, Context, Result};
use clap::Args;
use mcsf_core::model::{LateFusionSpace, ModelConfig, Strategy};
use mcsf_core::shotselect::SummaryConfig;
use mcsf_core::training::TrainConfig;
use mcsf_core::EvalMode;
use serde::{Deserialize, Serialize};

use crate::fail::Usage;

pub const RUN_CONFIG_FILE: &str = "run_config.json";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub strategy: Strategy,
    /// Fixed segment count `m`; `null` for `⌈√n_steps⌉` per video.
    pub segments: Option<usize>,
    pub distances: Vec<usize>,
    pub hidden: usize,
    /// Early fusion common dim; `null` for the smaller source dim.
    pub fused_dim: Option<usize>,
    pub late_fusion_space: LateFusionSpace,
    pub shared_branches: bool,
    pub budget_fraction: f64,
    /// Segmentation shot count for videos without change points; `null` for one per 20 steps.
    pub kts_segments: Option<usize>,
    pub sigma_target: f64,
    pub lambda_sparsity: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub clip_norm: f64,
    pub seed: u64,
    pub mode: EvalMode,
}

impl Default for RunConfig {
    fn default() -> Self {
        let t = TrainConfig::default();
        let s = SummaryConfig::default();
        RunConfig {
            strategy: t.model.strategy,
            segments: t.segments,
            distances: t.model.distances,
            hidden: t.model.hidden,
            fused_dim: t.model.fused_dim,
            late_fusion_space: t.model.late_fusion_space,
            shared_branches: t.model.shared_branches,
            budget_fraction: s.budget_fraction,
            kts_segments: s.kts_segments,
            sigma_target: t.sigma_target,
            lambda_sparsity: t.lambda_sparsity,
            learning_rate: t.learning_rate,
            epochs: t.epochs,
            clip_norm: t.clip_norm,
            seed: t.seed,
            mode: EvalMode::Avg,
        }
    }
}

/// A count flag: `N`, or `auto` for the data-dependent default.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Count(pub Option<usize>);

fn parse_count(s: &str) -> std::result::Result<Count, String> {
    if s == "auto" {
        return Ok(Count(None));
    }
    s.parse::<usize>()
        .map(|n| Count(Some(n)))
        .map_err(|_| format!("expected a positive integer or `auto`, got `{s}`"))
}

fn parse_distances(s: &str) -> std::result::Result<Vec<usize>, String> {
    s.split(',')
        .map(|d| d.trim().parse::<usize>().map_err(|_| format!("bad distance `{d}`")))
        .collect()
}

/// Model and training flags.
#[derive(Args, Debug, Default, Clone)]
pub struct TrainFlags {
    /// objects | places | early | intermediate | late
    #[arg(long)]
    pub strategy: Option<Strategy>,
    /// Segment count m, or `auto`
    #[arg(long, value_parser = parse_count)]
    pub segments: Option<Count>,
    /// Comma-separated attention distances
    #[arg(long, value_parser = parse_distances)]
    pub distances: Option<Vec<usize>>,
    #[arg(long)]
    pub hidden: Option<usize>,
    /// Early fusion common dim, or `auto`
    #[arg(long, value_parser = parse_count)]
    pub fused_dim: Option<Count>,
    /// logit | probability
    #[arg(long)]
    pub late_fusion_space: Option<LateFusionSpace>,
    #[arg(long)]
    pub shared_branches: Option<bool>,
    #[arg(long)]
    pub sigma_target: Option<f64>,
    #[arg(long)]
    pub lambda_sparsity: Option<f64>,
    #[arg(long = "lr")]
    pub learning_rate: Option<f64>,
    #[arg(long)]
    pub epochs: Option<usize>,
    #[arg(long)]
    pub clip_norm: Option<f64>,
    #[arg(long)]
    pub seed: Option<u64>,
}

/// Keyshot selection flags.
#[derive(Args, Debug, Default, Clone)]
pub struct SummaryFlags {
    #[arg(long)]
    pub budget_fraction: Option<f64>,
    /// Shot count for segmentation, or `auto`
    #[arg(long, value_parser = parse_count)]
    pub kts_segments: Option<Count>,
}

impl RunConfig {
    /// Overlays the fields present in `json` onto `self`.
    pub fn overlay_json(&self, json: &str, origin: &Path) -> Result<RunConfig> {
        let mut base = serde_json::to_value(self).expect("config serializes");
        let top: serde_json::Value =
            serde_json::from_str(json).with_context(|| format!("{}: not valid JSON", origin.display()))?;
        let serde_json::Value::Object(fields) = top else {
            bail!(Usage(format!("{}: config must be a JSON object", origin.display())));
        };
        let obj = base.as_object_mut().expect("config is an object");
        for (k, v) in fields {
            obj.insert(k, v);
        }
        serde_json::from_value(base).with_context(|| format!("{}: invalid config", origin.display()))
    }

    /// Reads an upstream `run_config.json` if `dir` has one.
    pub fn from_dir_or_default(dir: &Path) -> Result<RunConfig> {
        let path = dir.join(RUN_CONFIG_FILE);
        match std::fs::read_to_string(&path) {
            Ok(text) => RunConfig::default().overlay_json(&text, &path),
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Ok(RunConfig::default()),
            Err(e) => Err(e).with_context(|| format!("reading {}", path.display())),
        }
    }

    /// Applies an optional `--config` file.
    pub fn with_file(self, file: Option<&Path>) -> Result<RunConfig> {
        match file {
            None => Ok(self),
            Some(path) => {
                let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
                self.overlay_json(&text, path)
            }
        }
    }

    pub fn with_train_flags(mut self, f: &TrainFlags) -> RunConfig {
        macro_rules! set {
            ($($field:ident),*) => { $( if let Some(v) = f.$field.clone() { self.$field = v; } )* };
        }
        set!(
            strategy,
            distances,
            hidden,
            late_fusion_space,
            shared_branches,
            sigma_target,
            lambda_sparsity,
            learning_rate,
            epochs,
            clip_norm,
            seed
        );
        if let Some(Count(v)) = f.segments {
            self.segments = v;
        }
        if let Some(Count(v)) = f.fused_dim {
            self.fused_dim = v;
        }
        self
    }

    pub fn with_summary_flags(mut self, f: &SummaryFlags) -> RunConfig {
        if let Some(v) = f.budget_fraction {
            self.budget_fraction = v;
        }
        if let Some(Count(v)) = f.kts_segments {
            self.kts_segments = v;
        }
        self
    }

    pub fn train_config(&self) -> TrainConfig {
        TrainConfig {
            model: ModelConfig {
                strategy: self.strategy,
                hidden: self.hidden,
                fused_dim: self.fused_dim,
                distances: self.distances.clone(),
                late_fusion_space: self.late_fusion_space,
                shared_branches: self.shared_branches,
            },
            segments: self.segments,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            clip_norm: self.clip_norm,
            lambda_sparsity: self.lambda_sparsity,
            sigma_target: self.sigma_target,
            seed: self.seed,
            ..TrainConfig::default()
        }
    }

    pub fn summary_config(&self) -> SummaryConfig {
        SummaryConfig {
            budget_fraction: self.budget_fraction,
            kts_segments: self.kts_segments,
        }
    }

    /// Checks every field before any work starts.
    pub fn validate(&self) -> Result<()> {
        let mut problems = Vec::new();
        if let Err(e) = self.train_config().validate() {
            problems.push(e.to_string());
        }
        if self.distances.is_empty() || self.distances.contains(&0) {
            problems.push(format!("distances {:?} must be non-empty and positive", self.distances));
        }
        if self.fused_dim == Some(0) {
            problems.push("fused_dim must be positive".into());
        }
        if !(0.0..=1.0).contains(&self.budget_fraction) {
            problems.push(format!("budget_fraction {} must lie in [0, 1]", self.budget_fraction));
        }
        if self.kts_segments == Some(0) {
            problems.push("kts_segments must be positive".into());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            bail!(Usage(format!("invalid configuration: {}", problems.join("; "))))
        }
    }

    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("config serializes");
        s.push('\n');
        s
    }
}
