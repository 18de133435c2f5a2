use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lstm::BiLstm;
use crate::dataio::SourceTag;
use crate::decomp::{AttentionParams, DEFAULT_DISTANCES};
use crate::error::{Error, Result};
use crate::tensor::{join, push_mat, push_mat_mut, push_vec, push_vec_mut, Mat, TensorMut, TensorRef, Tensors};

/// How the two feature sources are combined.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    Single(SourceTag),
    Early,
    Intermediate,
    Late,
}

impl Strategy {
    /// Ablation order: O, P, O+P early, O+P intermediate, O+P late.
    pub const ALL: [Strategy; 5] = [
        Strategy::Single(SourceTag::Objects),
        Strategy::Single(SourceTag::Places),
        Strategy::Early,
        Strategy::Intermediate,
        Strategy::Late,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Strategy::Single(SourceTag::Objects) => "objects",
            Strategy::Single(SourceTag::Places) => "places",
            Strategy::Early => "early",
            Strategy::Intermediate => "intermediate",
            Strategy::Late => "late",
        }
    }

    pub fn sources(self) -> Vec<SourceTag> {
        match self {
            Strategy::Single(s) => vec![s],
            _ => SourceTag::ALL.to_vec(),
        }
    }

    /// Stream whose features the surrogate decoder reconstructs.
    pub fn primary_lane(self) -> Lane {
        match self {
            Strategy::Single(s) => Lane::Source(s),
            Strategy::Early => Lane::Fused,
            Strategy::Intermediate | Strategy::Late => Lane::Source(SourceTag::Objects),
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Strategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "objects" | "o" => Ok(Strategy::Single(SourceTag::Objects)),
            "places" | "p" => Ok(Strategy::Single(SourceTag::Places)),
            "early" => Ok(Strategy::Early),
            "intermediate" => Ok(Strategy::Intermediate),
            "late" => Ok(Strategy::Late),
            other => Err(format!(
                "unknown strategy `{other}` (expected objects|places|early|intermediate|late)"
            )),
        }
    }
}

impl Serialize for Strategy {
    fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for Strategy {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Space in which late fusion adds the per-stream scores.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LateFusionSpace {
    /// `σ(r¹ + r²)`
    #[default]
    Logit,
    /// `σ(σ(r¹) + σ(r²))`
    Probability,
}

impl FromStr for LateFusionSpace {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "logit" => Ok(LateFusionSpace::Logit),
            "probability" => Ok(LateFusionSpace::Probability),
            other => Err(format!("unknown late fusion space `{other}` (expected logit|probability)")),
        }
    }
}

/// Identifies one scoring lane.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Lane {
    Source(SourceTag),
    /// The projected-and-summed sequence under early fusion.
    Fused,
}

impl Lane {
    pub fn as_str(self) -> &'static str {
        match self {
            Lane::Source(s) => s.as_str(),
            Lane::Fused => "fused",
        }
    }
}

/// Architecture knobs shared by initialization and checkpoints.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub strategy: Strategy,
    pub hidden: usize,
    /// Early fusion common dim; `None` means the smaller source dim.
    pub fused_dim: Option<usize>,
    pub distances: Vec<usize>,
    pub late_fusion_space: LateFusionSpace,
    /// Use one recurrence for both the chunk and the stride branch.
    pub shared_branches: bool,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig {
            strategy: Strategy::Intermediate,
            hidden: 32,
            fused_dim: None,
            distances: DEFAULT_DISTANCES.to_vec(),
            late_fusion_space: LateFusionSpace::Logit,
            shared_branches: false,
        }
    }
}

/// Scalar linear head `2h → 1`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Head {
    pub w: Vec<f64>,
    pub b: f64,
}

impl Head {
    pub fn zeros(d_in: usize) -> Self {
        Head { w: vec![0.0; d_in], b: 0.0 }
    }

    fn uniform<R: Rng>(d_in: usize, rng: &mut R) -> Self {
        let bound = 1.0 / (d_in as f64).sqrt();
        Head {
            w: (0..d_in).map(|_| rng.gen_range(-bound..=bound)).collect(),
            b: 0.0,
        }
    }

    #[inline]
    pub fn apply(&self, x: &[f64]) -> f64 {
        crate::tensor::dot(&self.w, x) + self.b
    }
}

impl Tensors for Head {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        push_vec(out, prefix, "w", &self.w);
        push_vec(out, prefix, "b", std::slice::from_ref(&self.b));
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        push_vec_mut(out, prefix, "w", &mut self.w);
        push_vec_mut(out, prefix, "b", std::slice::from_mut(&mut self.b));
    }
}

/// Affine map `y = W x + b` with `W: out × in`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Projection {
    pub w: Mat,
    pub b: Vec<f64>,
}

impl Projection {
    pub fn zeros(d_in: usize, d_out: usize) -> Self {
        Projection {
            w: Mat::zeros(d_out, d_in),
            b: vec![0.0; d_out],
        }
    }

    pub fn identity(n: usize) -> Self {
        Projection {
            w: Mat::identity(n),
            b: vec![0.0; n],
        }
    }

    pub fn uniform<R: Rng>(d_in: usize, d_out: usize, rng: &mut R) -> Self {
        Projection {
            w: Mat::uniform(d_out, d_in, 1.0 / (d_in as f64).sqrt(), rng),
            b: vec![0.0; d_out],
        }
    }

    pub fn apply_acc(&self, x: &[f64], out: &mut [f64]) {
        out.iter_mut().zip(&self.b).for_each(|(o, b)| *o += b);
        self.w.matvec_acc(x, out);
    }

    pub fn d_in(&self) -> usize {
        self.w.cols
    }

    pub fn d_out(&self) -> usize {
        self.w.rows
    }
}

impl Tensors for Projection {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        push_mat(out, prefix, "w", &self.w);
        push_vec(out, prefix, "b", &self.b);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        push_mat_mut(out, prefix, "w", &mut self.w);
        push_vec_mut(out, prefix, "b", &mut self.b);
    }
}

/// Parameters of one lane: chunk and stride recurrences, their heads and
/// the lane's difference attention.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StreamParams {
    pub chunk_rnn: BiLstm,
    /// `None` when the stride branch reuses `chunk_rnn`.
    pub stride_rnn: Option<BiLstm>,
    pub chunk_head: Head,
    pub stride_head: Head,
    pub attention: AttentionParams,
}

impl StreamParams {
    pub fn zeros(dim: usize, hidden: usize, distances: &[usize], shared: bool) -> Self {
        StreamParams {
            chunk_rnn: BiLstm::zeros(dim, hidden),
            stride_rnn: (!shared).then(|| BiLstm::zeros(dim, hidden)),
            chunk_head: Head::zeros(2 * hidden),
            stride_head: Head::zeros(2 * hidden),
            attention: AttentionParams::zeros(dim, distances),
        }
    }

    pub fn uniform<R: Rng>(dim: usize, hidden: usize, distances: &[usize], shared: bool, rng: &mut R) -> Self {
        let chunk_rnn = BiLstm::uniform(dim, hidden, rng);
        let stride_rnn = (!shared).then(|| BiLstm::uniform(dim, hidden, rng));
        let chunk_head = Head::uniform(2 * hidden, rng);
        let stride_head = Head::uniform(2 * hidden, rng);
        let attention = AttentionParams::uniform(dim, distances, rng);
        StreamParams {
            chunk_rnn,
            stride_rnn,
            chunk_head,
            stride_head,
            attention,
        }
    }

    pub fn dim(&self) -> usize {
        self.chunk_rnn.input_dim()
    }

    pub fn hidden(&self) -> usize {
        self.chunk_rnn.hidden()
    }

    pub fn stride_rnn(&self) -> &BiLstm {
        self.stride_rnn.as_ref().unwrap_or(&self.chunk_rnn)
    }
}

impl Tensors for StreamParams {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        self.chunk_rnn.visit(&join(prefix, "chunk_rnn"), out);
        if let Some(s) = &self.stride_rnn {
            s.visit(&join(prefix, "stride_rnn"), out);
        }
        self.chunk_head.visit(&join(prefix, "chunk_head"), out);
        self.stride_head.visit(&join(prefix, "stride_head"), out);
        self.attention.visit(&join(prefix, "attention"), out);
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        self.chunk_rnn.visit_mut(&join(prefix, "chunk_rnn"), out);
        if let Some(s) = &mut self.stride_rnn {
            s.visit_mut(&join(prefix, "stride_rnn"), out);
        }
        self.chunk_head.visit_mut(&join(prefix, "chunk_head"), out);
        self.stride_head.visit_mut(&join(prefix, "stride_head"), out);
        self.attention.visit_mut(&join(prefix, "attention"), out);
    }
}

/// All learnable parameters of the scorer for one fusion strategy.
#[derive(Clone, Debug, PartialEq)]
pub struct ScorerParams {
    pub config: ModelConfig,
    /// Input dims per source the parameters were built for.
    pub dims: BTreeMap<SourceTag, usize>,
    pub seed: u64,
    /// Early fusion only: per-source projection into the common dim.
    pub projections: BTreeMap<SourceTag, Projection>,
    pub lanes: BTreeMap<Lane, StreamParams>,
}

impl ScorerParams {
    pub fn strategy(&self) -> Strategy {
        self.config.strategy
    }

    pub fn fused_dim(&self) -> Option<usize> {
        match self.config.strategy {
            Strategy::Early => self.lanes.get(&Lane::Fused).map(StreamParams::dim),
            _ => None,
        }
    }

    pub fn lane(&self, lane: Lane) -> &StreamParams {
        &self.lanes[&lane]
    }

    /// Dim of the sequence the surrogate decoder reconstructs.
    pub fn primary_dim(&self) -> usize {
        self.lane(self.config.strategy.primary_lane()).dim()
    }
}

impl Tensors for ScorerParams {
    fn visit<'a>(&'a self, prefix: &str, out: &mut Vec<TensorRef<'a>>) {
        for (tag, p) in &self.projections {
            p.visit(&join(prefix, &format!("projection.{tag}")), out);
        }
        for (lane, p) in &self.lanes {
            p.visit(&join(prefix, &format!("lane.{}", lane.as_str())), out);
        }
    }

    fn visit_mut<'a>(&'a mut self, prefix: &str, out: &mut Vec<TensorMut<'a>>) {
        for (tag, p) in &mut self.projections {
            p.visit_mut(&join(prefix, &format!("projection.{tag}")), out);
        }
        for (lane, p) in &mut self.lanes {
            p.visit_mut(&join(prefix, &format!("lane.{}", lane.as_str())), out);
        }
    }
}

fn check_config(config: &ModelConfig, dims: &BTreeMap<SourceTag, usize>) -> Result<()> {
    if config.hidden == 0 {
        return Err(Error::range("hidden", "hidden size must be at least 1"));
    }
    if config.distances.is_empty() || config.distances.contains(&0) {
        return Err(Error::range(
            "distances",
            format!("{:?} must be non-empty positive distances", config.distances),
        ));
    }
    if let Some((tag, _)) = dims.iter().find(|(_, &d)| d == 0) {
        return Err(Error::range("dims", format!("{tag} dim must be positive")));
    }
    match config.strategy {
        Strategy::Single(s) if !dims.contains_key(&s) => Err(Error::Shape(format!(
            "strategy {} needs `{s}` features but only {:?} were supplied",
            config.strategy,
            dims.keys().collect::<Vec<_>>()
        ))),
        Strategy::Early | Strategy::Intermediate | Strategy::Late if dims.len() != 2 => {
            Err(Error::Shape(format!(
                "strategy {} fuses two sources but {} were supplied",
                config.strategy,
                dims.len()
            )))
        }
        Strategy::Early if config.fused_dim == Some(0) => {
            Err(Error::range("fused_dim", "must be positive"))
        }
        _ => Ok(()),
    }
}

/// Builds parameters with the given value filler.
fn build(
    config: &ModelConfig,
    dims: &BTreeMap<SourceTag, usize>,
    seed: u64,
    mut lane: impl FnMut(usize) -> StreamParams,
    mut projection: impl FnMut(usize, usize) -> Projection,
) -> Result<ScorerParams> {
    check_config(config, dims)?;
    let mut projections = BTreeMap::new();
    let mut lanes = BTreeMap::new();
    let mut used_dims = BTreeMap::new();
    match config.strategy {
        Strategy::Single(s) => {
            used_dims.insert(s, dims[&s]);
            lanes.insert(Lane::Source(s), lane(dims[&s]));
        }
        Strategy::Early => {
            let d_c = config
                .fused_dim
                .unwrap_or_else(|| *dims.values().min().expect("two sources"));
            for (&tag, &d) in dims {
                projections.insert(tag, projection(d, d_c));
            }
            used_dims = dims.clone();
            lanes.insert(Lane::Fused, lane(d_c));
        }
        Strategy::Intermediate | Strategy::Late => {
            for (&tag, &d) in dims {
                lanes.insert(Lane::Source(tag), lane(d));
            }
            used_dims = dims.clone();
        }
    }
    Ok(ScorerParams {
        config: config.clone(),
        dims: used_dims,
        seed,
        projections,
        lanes,
    })
}

/// Seeded initialization: weights uniform in `±1/√fan_in`, LSTM forget-gate
/// biases 1, every other bias 0.
pub fn init_params(config: &ModelConfig, dims: &BTreeMap<SourceTag, usize>, seed: u64) -> Result<ScorerParams> {
    let rng = std::cell::RefCell::new(ChaCha8Rng::seed_from_u64(seed));
    build(
        config,
        dims,
        seed,
        |d| StreamParams::uniform(d, config.hidden, &config.distances, config.shared_branches, &mut *rng.borrow_mut()),
        |d_in, d_out| Projection::uniform(d_in, d_out, &mut *rng.borrow_mut()),
    )
}

/// Same shapes as [`init_params`], every value zero.
pub fn zero_params(config: &ModelConfig, dims: &BTreeMap<SourceTag, usize>) -> Result<ScorerParams> {
    build(
        config,
        dims,
        0,
        |d| StreamParams::zeros(d, config.hidden, &config.distances, config.shared_branches),
        Projection::zeros,
    )
}
