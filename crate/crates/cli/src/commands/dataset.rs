use std::collections::BTreeMap;
use std::path::PathBuf;

use anyhow::{bail, Result};
use clap::Subcommand;
use mcsf_core::dataio::{load_dataset, save_dataset, synthesize, SynthConfig};
use mcsf_core::{Error, SourceTag};
use serde_json::json;

use crate::config::RUN_CONFIG_FILE;
use crate::fail::Usage;
use crate::output::{pretty, Staged};

#[derive(Subcommand, Debug)]
pub enum DatasetCmd {
    /// Write a deterministic synthetic dataset
    Synth {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 4)]
        videos: usize,
        #[arg(long, default_value_t = 300)]
        frames: usize,
        #[arg(long, default_value_t = 3)]
        users: usize,
        #[arg(long, default_value_t = 7)]
        seed: u64,
        #[arg(long, default_value_t = 8)]
        objects_dim: usize,
        #[arg(long, default_value_t = 12)]
        places_dim: usize,
        #[arg(long, default_value = "synthetic")]
        name: String,
    },
    /// Check a dataset directory against every record invariant
    Validate { dir: PathBuf },
}

pub fn run(cmd: DatasetCmd) -> Result<()> {
    match cmd {
        DatasetCmd::Synth {
            out,
            videos,
            frames,
            users,
            seed,
            objects_dim,
            places_dim,
            name,
        } => {
            let cfg = SynthConfig {
                dataset_name: name,
                n_videos: videos,
                n_frames: frames,
                dims: BTreeMap::from([(SourceTag::Objects, objects_dim), (SourceTag::Places, places_dim)]),
                n_users: users,
                seed,
            };
            let records = synthesize(&cfg).map_err(|e| Usage(e.to_string()))?;
            save_dataset(&out, &cfg.dataset_name, &records)?;
            let echo = json!({
                "command": "dataset synth",
                "name": cfg.dataset_name,
                "videos": videos,
                "frames": frames,
                "users": users,
                "seed": seed,
                "objects_dim": objects_dim,
                "places_dim": places_dim,
            });
            let mut staged = Staged::new();
            staged.add(out.join(RUN_CONFIG_FILE), pretty(&echo));
            staged.commit()?;
            eprintln!("wrote {} videos to {}", records.len(), out.display());
            Ok(())
        }
        DatasetCmd::Validate { dir } => match load_dataset(&dir) {
            Ok(ds) => {
                println!("{}: {} videos, all invariants hold", ds.name(), ds.videos.len());
                Ok(())
            }
            Err(Error::Invalid(violations)) => {
                for v in &violations {
                    println!("{v}");
                }
                bail!(Usage(format!("{} violation(s) in {}", violations.len(), dir.display())))
            }
            Err(e) => Err(e.into()),
        },
    }
}
