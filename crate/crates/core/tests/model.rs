mod common;

use std::collections::BTreeMap;

use common::{random_record, two_source_dims};
use mcsf_core::decomp::{decompose, difference_attention, AttentionParams, Branch};
use mcsf_core::model::{
    forward, init_params, stream_raw_scores, stream_raw_scores_in_order, zero_params, Lane, LateFusionSpace,
    ModelConfig, Projection, ScorerParams, Strategy,
};
use mcsf_core::tensor::Tensors;
use mcsf_core::{Error, SourceStream, SourceTag};
use proptest::prelude::*;

const O: SourceTag = SourceTag::Objects;
const P: SourceTag = SourceTag::Places;

fn cfg(strategy: Strategy, hidden: usize) -> ModelConfig {
    ModelConfig {
        strategy,
        hidden,
        ..ModelConfig::default()
    }
}

fn dims(o: usize, p: usize) -> BTreeMap<SourceTag, usize> {
    [(O, o), (P, p)].into_iter().collect()
}

fn single_from_lane(fused: &ScorerParams, lane: Lane, dim: usize) -> ScorerParams {
    let config = ModelConfig {
        strategy: Strategy::Single(O),
        ..fused.config.clone()
    };
    let mut single = zero_params(&config, &[(O, dim)].into_iter().collect()).unwrap();
    single.lanes.insert(Lane::Source(O), fused.lane(lane).clone());
    single
}

fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

#[test]
fn all_zero_parameters_give_one_half_everywhere() {
    let rec = random_record(13, &two_source_dims(5, 7), 3);
    for strategy in Strategy::ALL {
        for space in [LateFusionSpace::Logit, LateFusionSpace::Probability] {
            let config = ModelConfig {
                late_fusion_space: space,
                ..cfg(strategy, 4)
            };
            let params = zero_params(&config, &dims(5, 7)).unwrap();
            let p = forward(&rec, &params, None).unwrap().p;
            if strategy == Strategy::Late && space == LateFusionSpace::Probability {
                // σ(σ(0) + σ(0)) = σ(1)
                let expected = 1.0 / (1.0 + (-1.0f64).exp());
                assert!(p.iter().all(|&v| v == expected), "{strategy}: {p:?}");
            } else {
                assert!(p.iter().all(|&v| v == 0.5), "{strategy} {space:?}: {p:?}");
            }
        }
    }
}

#[test]
fn scores_are_probabilities_with_one_entry_per_step() {
    for (n, seed) in [(1, 1), (2, 2), (7, 3), (16, 4), (30, 5)] {
        let rec = random_record(n, &two_source_dims(3, 6), seed);
        for strategy in Strategy::ALL {
            let params = init_params(&cfg(strategy, 3), &dims(3, 6), seed).unwrap();
            let p = forward(&rec, &params, None).unwrap().p;
            assert_eq!(p.len(), n);
            assert!(p.iter().all(|&v| v > 0.0 && v < 1.0), "{strategy}: {p:?}");
        }
    }
}

#[test]
fn late_fusion_with_a_silenced_stream_equals_single_source() {
    for seed in 0..5 {
        let rec = random_record(11 + seed as usize, &two_source_dims(4, 6), seed);
        let mut late = init_params(&cfg(Strategy::Late, 3), &dims(4, 6), seed).unwrap();
        late.lanes.get_mut(&Lane::Source(P)).unwrap().fill(0.0);
        let single = single_from_lane(&late, Lane::Source(O), 4);
        let single_rec = {
            let mut r = rec.clone();
            r.streams.remove(&P);
            r
        };
        for m in [Some(1), Some(3), None] {
            let a = forward(&rec, &late, m).unwrap().p;
            let b = forward(&single_rec, &single, m).unwrap().p;
            assert!(max_abs_diff(&a, &b) <= 1e-12);
        }
    }
}

#[test]
fn early_fusion_with_identity_projection_equals_single_source() {
    let rec = random_record(14, &two_source_dims(5, 8), 8);
    let mut early = init_params(&cfg(Strategy::Early, 4), &dims(5, 8), 8).unwrap();
    assert_eq!(early.fused_dim(), Some(5));
    early.projections.insert(O, Projection::identity(5));
    early.projections.get_mut(&P).unwrap().fill(0.0);
    let single = single_from_lane(&early, Lane::Fused, 5);
    let a = forward(&rec, &early, Some(3)).unwrap().p;
    let b = forward(&rec, &single, Some(3)).unwrap().p;
    assert!(max_abs_diff(&a, &b) <= 1e-12);
}

#[test]
fn intermediate_and_late_logit_agree() {
    let rec = random_record(15, &two_source_dims(4, 5), 2);
    let inter = init_params(&cfg(Strategy::Intermediate, 3), &dims(4, 5), 2).unwrap();
    let mut late = inter.clone();
    late.config.strategy = Strategy::Late;
    let a = forward(&rec, &inter, None).unwrap().p;
    let b = forward(&rec, &late, None).unwrap().p;
    assert!(max_abs_diff(&a, &b) <= 1e-12);
}

#[test]
fn swapping_sources_leaves_symmetric_fusions_unchanged() {
    let rec = random_record(12, &two_source_dims(4, 4), 6);
    let mut swapped_rec = rec.clone();
    let o = swapped_rec.streams.remove(&O).unwrap();
    let p = swapped_rec.streams.remove(&P).unwrap();
    swapped_rec.streams.insert(O, SourceStream::new(O, p.n_steps, p.dim, p.values));
    swapped_rec.streams.insert(P, SourceStream::new(P, o.n_steps, o.dim, o.values));

    for strategy in [Strategy::Intermediate, Strategy::Late] {
        for space in [LateFusionSpace::Logit, LateFusionSpace::Probability] {
            let config = ModelConfig {
                late_fusion_space: space,
                ..cfg(strategy, 3)
            };
            let params = init_params(&config, &dims(4, 4), 6).unwrap();
            let mut swapped = params.clone();
            let lo = swapped.lanes.remove(&Lane::Source(O)).unwrap();
            let lp = swapped.lanes.remove(&Lane::Source(P)).unwrap();
            swapped.lanes.insert(Lane::Source(O), lp);
            swapped.lanes.insert(Lane::Source(P), lo);
            let a = forward(&rec, &params, Some(3)).unwrap().p;
            let b = forward(&swapped_rec, &swapped, Some(3)).unwrap().p;
            assert!(max_abs_diff(&a, &b) <= 1e-12, "{strategy} {space:?}");
        }
    }
}

#[test]
fn initialization_is_seeded() {
    for strategy in Strategy::ALL {
        let a = init_params(&cfg(strategy, 5), &dims(6, 9), 11).unwrap();
        let b = init_params(&cfg(strategy, 5), &dims(6, 9), 11).unwrap();
        let c = init_params(&cfg(strategy, 5), &dims(6, 9), 12).unwrap();
        assert_eq!(a.flatten(), b.flatten());
        assert_ne!(a.flatten(), c.flatten());
    }
}

#[test]
fn fusing_strategies_reject_a_single_stream() {
    let one: BTreeMap<_, _> = [(O, 4)].into_iter().collect();
    for strategy in [Strategy::Early, Strategy::Intermediate, Strategy::Late] {
        assert!(matches!(init_params(&cfg(strategy, 2), &one, 0), Err(Error::Shape(_))));
    }
    assert!(matches!(
        init_params(&cfg(Strategy::Single(P), 2), &one, 0),
        Err(Error::Shape(_))
    ));

    let params = init_params(&cfg(Strategy::Late, 2), &dims(3, 3), 0).unwrap();
    let mut rec = random_record(8, &two_source_dims(3, 3), 0);
    rec.streams.remove(&P);
    assert!(matches!(forward(&rec, &params, None), Err(Error::Shape(_))));
}

#[test]
fn out_of_range_segment_count_is_rejected() {
    let rec = random_record(6, &two_source_dims(3, 3), 0);
    let params = init_params(&cfg(Strategy::Late, 2), &dims(3, 3), 0).unwrap();
    assert!(forward(&rec, &params, Some(0)).is_err());
    assert!(forward(&rec, &params, Some(7)).is_err());
    assert!(forward(&rec, &params, Some(6)).is_ok());
}

#[test]
fn constant_features_give_constant_attention() {
    let stream = SourceStream::new(O, 9, 3, [0.3, -2.0, 1.5].repeat(9));
    let mut params = AttentionParams::zeros(3, &[1, 2, 4]);
    params.biases = vec![0.25, -0.5, 1.0];
    params.weights = vec![vec![1.0, -2.0, 0.5], vec![3.0, 0.0, -1.0], vec![-0.7, 0.2, 4.0]];
    let d = difference_attention(&stream, &params).unwrap().d;
    assert!(d.iter().all(|&v| v == 0.75), "{d:?}");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn segment_processing_order_does_not_matter(n in 1usize..24, m_frac in 0.0f64..1.0, seed in 0u64..1000) {
        let m = 1 + ((n - 1) as f64 * m_frac) as usize;
        let rec = random_record(n, &[(O, 3)], seed);
        let params = init_params(&cfg(Strategy::Single(O), 3), &[(O, 3)].into_iter().collect(), seed).unwrap();
        let lane = params.lane(Lane::Source(O));
        let stream = rec.stream(O).unwrap();
        let base = stream_raw_scores(stream, lane, m).unwrap().r;
        let mut order: Vec<usize> = (0..m).rev().collect();
        order.rotate_left((seed as usize) % m);
        let permuted = stream_raw_scores_in_order(stream, lane, m, &order).unwrap().r;
        prop_assert!(max_abs_diff(&base, &permuted) <= 1e-12);
    }

    #[test]
    fn every_step_is_scored_by_exactly_one_chunk_and_one_stride(n in 1usize..64, m_frac in 0.0f64..1.0) {
        let m = 1 + ((n - 1) as f64 * m_frac) as usize;
        let d = decompose(n, m).unwrap();
        for branch in [Branch::Chunk, Branch::Stride] {
            let mut seen = vec![0; n];
            d.segments(branch).iter().flatten().for_each(|&t| seen[t] += 1);
            prop_assert!(seen.iter().all(|&c| c == 1));
        }
    }
}
