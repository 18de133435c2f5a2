//! Dataset container: in-memory records, the on-disk manifest layout,
//! validation and deterministic synthetic generation.

mod manifest;
mod synth;
mod validate;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

pub use manifest::{
    load_dataset, save_dataset, Dataset, DatasetManifest, StreamEntry, UsersEntry, VideoEntry,
    MANIFEST_FILE,
};
pub use synth::{generate_synthetic_dataset, synthesize, SynthConfig, FRAME_STEP};
pub use validate::validate_record;

/// Feature source of a stream.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SourceTag {
    /// Object-centric features (ImageNet-style CNN).
    Objects,
    /// Scene and place features (Places-style CNN).
    Places,
}

impl SourceTag {
    pub const ALL: [SourceTag; 2] = [SourceTag::Objects, SourceTag::Places];

    pub fn as_str(self) -> &'static str {
        match self {
            SourceTag::Objects => "objects",
            SourceTag::Places => "places",
        }
    }
}

impl fmt::Display for SourceTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for SourceTag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "objects" => Ok(SourceTag::Objects),
            "places" => Ok(SourceTag::Places),
            other => Err(format!("unknown source `{other}` (expected objects|places)")),
        }
    }
}

/// One feature matrix (steps × dim) for one video from one source.
#[derive(Clone, Debug, PartialEq)]
pub struct SourceStream {
    pub source: SourceTag,
    pub dim: usize,
    pub n_steps: usize,
    /// Row-major, `n_steps × dim`.
    pub values: Vec<f64>,
}

impl SourceStream {
    pub fn new(source: SourceTag, n_steps: usize, dim: usize, values: Vec<f64>) -> Self {
        SourceStream {
            source,
            dim,
            n_steps,
            values,
        }
    }

    #[inline]
    pub fn step(&self, t: usize) -> &[f64] {
        &self.values[t * self.dim..(t + 1) * self.dim]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.values.chunks_exact(self.dim.max(1))
    }
}

/// Per-user binary keyshot annotations at original-frame resolution.
#[derive(Clone, Debug, PartialEq)]
pub struct ReferenceSummaries {
    pub n_users: usize,
    pub n_frames: usize,
    /// Row-major `n_users × n_frames`; entries are expected to be 0 or 1.
    pub masks: Vec<u8>,
}

impl ReferenceSummaries {
    pub fn mask(&self, user: usize) -> &[u8] {
        &self.masks[user * self.n_frames..(user + 1) * self.n_frames]
    }

    pub fn iter(&self) -> impl Iterator<Item = &[u8]> {
        (0..self.n_users).map(move |u| self.mask(u))
    }
}

/// A `[start, end)` range over original frames.
pub type Segment = (usize, usize);

#[derive(Clone, Debug, PartialEq)]
pub struct VideoRecord {
    pub video_id: String,
    pub n_frames: usize,
    /// Original-frame index represented by each step.
    pub picks: Vec<usize>,
    pub streams: BTreeMap<SourceTag, SourceStream>,
    pub references: ReferenceSummaries,
    pub change_points: Option<Vec<Segment>>,
}

impl VideoRecord {
    pub fn n_steps(&self) -> usize {
        self.picks.len()
    }

    pub fn stream(&self, source: SourceTag) -> Option<&SourceStream> {
        self.streams.get(&source)
    }
}
