//! Command-line front end for the multi-source chunk-and-stride summarizer.

pub mod commands;
pub mod config;
pub mod fail;
pub mod output;
pub mod report;

use std::path::PathBuf;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mcsf_core::EvalMode;

use commands::dataset::DatasetCmd;
use commands::pipeline::{self, EvaluateArgs, EvaluationFile, ScoreArgs, SummarizeArgs, TrainArgs};
use commands::splits::SplitsCmd;
pub use fail::exit_code;

#[derive(Parser, Debug)]
#[command(name = "mcsf", version, about = "Multi-source chunk-and-stride video summarization")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Create or check feature datasets
    #[command(subcommand)]
    Dataset(DatasetCmd),
    /// Generate or audit k-fold split files
    #[command(subcommand)]
    Splits(SplitsCmd),
    /// Train one scorer per fold on its train keys
    Train(TrainArgs),
    /// Score each fold's test videos with that fold's checkpoint
    Score(ScoreArgs),
    /// Turn scores into keyshot masks
    Summarize(SummarizeArgs),
    /// F1 of the masks against the user summaries, per fold and overall
    Evaluate(EvaluateArgs),
    /// Render ablation and cross-validation tables
    Report {
        /// evaluation.json files or directories containing one
        #[arg(required = true)]
        evaluations: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
        /// Restrict the ablation table to one aggregation mode
        #[arg(long)]
        ablation_mode: Option<EvalMode>,
    },
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Dataset(cmd) => commands::dataset::run(cmd),
        Command::Splits(cmd) => commands::splits::run(cmd),
        Command::Train(args) => pipeline::train(args),
        Command::Score(args) => pipeline::score(args),
        Command::Summarize(args) => pipeline::summarize_cmd(args),
        Command::Evaluate(args) => pipeline::evaluate(args),
        Command::Report {
            evaluations,
            out,
            ablation_mode,
        } => {
            let mut evals = Vec::with_capacity(evaluations.len());
            for path in &evaluations {
                let file = if path.is_dir() { path.join(pipeline::EVALUATION_JSON) } else { path.clone() };
                evals.push(output::read_json::<EvaluationFile>(&file).context("loading evaluation")?);
            }
            let tables = report::render(&evals, ablation_mode)?;
            print!("{}", tables.markdown);
            let inputs: Vec<_> = evals
                .iter()
                .map(|e| {
                    serde_json::json!({
                        "dataset": e.dataset,
                        "strategy": e.strategy,
                        "split_label": e.split_label,
                        "mode": e.mode,
                    })
                })
                .collect();
            let echo = serde_json::json!({ "command": "report", "ablation_mode": ablation_mode, "inputs": inputs });
            let mut staged = output::Staged::new();
            staged.add(out.join("report.md"), tables.markdown);
            staged.add(out.join("ablation.csv"), tables.ablation_csv);
            staged.add(out.join("cross_validation.csv"), tables.cross_validation_csv);
            staged.add(out.join(config::RUN_CONFIG_FILE), output::pretty(&echo));
            staged.commit()
        }
    }
}
