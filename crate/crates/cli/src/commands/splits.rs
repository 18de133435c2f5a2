use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use clap::Subcommand;
use mcsf_core::dataio::load_dataset;
use mcsf_core::evalsplit::{audit_splits, generate_splits};
use mcsf_core::SplitSet;

use crate::fail::Usage;
use crate::output::Staged;

#[derive(Subcommand, Debug)]
pub enum SplitsCmd {
    /// Seeded non-overlapping k-fold splits over a dataset's videos
    Generate {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 1)]
        seed: u64,
        #[arg(long)]
        out: PathBuf,
    },
    /// Report never-tested and repeatedly-tested keys of a split file
    Audit {
        splits: PathBuf,
        /// Take the key universe from this dataset
        #[arg(long, conflicts_with = "keys", required_unless_present = "keys")]
        dataset: Option<PathBuf>,
        /// Take the key universe from a file: a JSON list or one key per line
        #[arg(long)]
        keys: Option<PathBuf>,
        /// Also write the report as JSON
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn read_keys(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    if text.trim_start().starts_with('[') {
        return serde_json::from_str(&text).with_context(|| format!("{}: malformed key list", path.display()));
    }
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

pub fn run(cmd: SplitsCmd) -> Result<()> {
    match cmd {
        SplitsCmd::Generate { dataset, k, seed, out } => {
            let ds = load_dataset(&dataset)?;
            let splits = generate_splits(&ds.keys(), k, seed).map_err(|e| Usage(e.to_string()))?;
            let mut staged = Staged::new();
            staged.add(&out, splits.to_json());
            staged.commit()?;
            eprintln!("wrote {k} folds over {} videos to {}", ds.videos.len(), out.display());
            Ok(())
        }
        SplitsCmd::Audit {
            splits,
            dataset,
            keys,
            out,
        } => {
            let set = SplitSet::load(&splits)?;
            let universe = match (dataset, keys) {
                (Some(d), _) => load_dataset(&d)?.keys(),
                (None, Some(k)) => read_keys(&k)?,
                (None, None) => unreachable!("clap requires one universe source"),
            };
            let report = audit_splits(&set, &universe);
            print!("{}", report.to_table());
            if let Some(out) = out {
                let mut staged = Staged::new();
                staged.add(out, report.to_json());
                staged.commit()?;
            }
            Ok(())
        }
    }
}
