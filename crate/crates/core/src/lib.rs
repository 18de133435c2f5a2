//! Unsupervised video summarization over precomputed multi-source feature
//! streams.
//!
//! The pipeline is: [`dataio`] loads per-video object and place features,
//! [`model`] scores every subsampled step, [`shotselect`] turns scores into a
//! keyshot summary under a length budget and [`evalsplit`] measures it
//! against user summaries across cross-validation folds. [`training`] fits
//! the scorer with a reconstruction surrogate and exact gradients.

pub mod checkpoint;
pub mod dataio;
pub mod decomp;
mod error;
pub mod evalsplit;
pub mod model;
pub mod shotselect;
pub mod tensor;
pub mod training;

pub use dataio::{Dataset, ReferenceSummaries, SourceStream, SourceTag, VideoRecord};
pub use decomp::{AttentionParams, Decomposition};
pub use error::{Error, Result};
pub use evalsplit::{AuditReport, EvalMode, SplitSet};
pub use model::{ImportanceScores, LateFusionSpace, ModelConfig, ScorerParams, Strategy};
pub use shotselect::MachineSummary;
pub use training::TrainConfig;
