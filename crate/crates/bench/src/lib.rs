//! Seeded inputs shared by the benchmarks in `benches/`.

use mcsf_core::dataio::{synthesize, SynthConfig};
use mcsf_core::{SourceStream, SourceTag, VideoRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random knapsack instance: `(values, weights, capacity)` with capacity at
/// 15% of the total weight.
pub fn knapsack_instance(n_items: usize, seed: u64) -> (Vec<f64>, Vec<usize>, usize) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n_items).map(|_| rng.gen_range(0.0..1.0)).collect();
    let weights: Vec<usize> = (0..n_items).map(|_| rng.gen_range(10..=120)).collect();
    let capacity = weights.iter().sum::<usize>() * 15 / 100;
    (values, weights, capacity)
}

pub fn feature_stream(n_steps: usize, dim: usize, seed: u64) -> SourceStream {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let values = (0..n_steps * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
    SourceStream::new(SourceTag::Objects, n_steps, dim, values)
}

/// One synthetic video with the given number of frames.
pub fn video(n_frames: usize) -> VideoRecord {
    let cfg = SynthConfig {
        n_videos: 1,
        n_frames,
        ..SynthConfig::default()
    };
    synthesize(&cfg).expect("valid synth config").remove(0)
}
