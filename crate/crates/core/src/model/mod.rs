//! The multi-source chunk-and-stride scorer.
//!
//! Each lane encodes chunk and stride views of its input with bidirectional
//! LSTMs, maps every step to a scalar, restores temporal order and adds the
//! lane's difference attention. Lanes are combined according to
//! [`Strategy`]:
//!
//! | strategy       | `p_t`                                          |
//! |----------------|------------------------------------------------|
//! | single source  | `σ(r_t)`                                       |
//! | early          | `σ(r_t)` of one lane over `Σ_s W_s x^s_t + b_s` |
//! | intermediate   | `σ(Σ_s (c'^s_t + s'^s_t) + Σ_s d^s_t)`          |
//! | late (logit)   | `σ(r¹_t + r²_t)`                                |
//! | late (prob.)   | `σ(σ(r¹_t) + σ(r²_t))`                          |

mod forward;
pub mod lstm;
mod params;

pub use forward::{
    forward, resolve_segments, stream_raw_scores, stream_raw_scores_in_order, ImportanceScores, RawScores,
};
pub(crate) use forward::{trace_forward, LaneTrace, ScorerTrace};
pub use lstm::{BiLstm, LstmDir};
pub use params::{
    init_params, zero_params, Head, Lane, LateFusionSpace, ModelConfig, Projection, ScorerParams, StreamParams,
    Strategy,
};
