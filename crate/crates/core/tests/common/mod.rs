#![allow(dead_code)]

use std::collections::BTreeMap;

use mcsf_core::{ReferenceSummaries, SourceStream, SourceTag, VideoRecord};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Random record with `n_steps` steps, uniform features in [-1, 1] and
/// every-15th-frame picks.
pub fn random_record(n_steps: usize, dims: &[(SourceTag, usize)], seed: u64) -> VideoRecord {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let streams = dims
        .iter()
        .map(|&(tag, dim)| {
            let values = (0..n_steps * dim).map(|_| rng.gen_range(-1.0..1.0)).collect();
            (tag, SourceStream::new(tag, n_steps, dim, values))
        })
        .collect::<BTreeMap<_, _>>();
    let n_frames = n_steps * 15;
    let masks = (0..2 * n_frames).map(|_| u8::from(rng.gen_bool(0.2))).collect();
    VideoRecord {
        video_id: format!("rand_{seed}"),
        n_frames,
        picks: (0..n_steps).map(|i| i * 15).collect(),
        streams,
        references: ReferenceSummaries {
            n_users: 2,
            n_frames,
            masks,
        },
        change_points: None,
    }
}

pub fn two_source_dims(o: usize, p: usize) -> Vec<(SourceTag, usize)> {
    vec![(SourceTag::Objects, o), (SourceTag::Places, p)]
}
