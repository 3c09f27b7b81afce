use std::sync::Arc;

use lanecross_core::env::{Action, EnvConfig, HighwayEnv, ObsMode, Outcome, SpawnConfig};
use lanecross_core::intention::{Degraded, GroundTruth, IntentionProvider, NoiseConfig};
use lanecross_core::traffic::{generate_synthetic, LaneChangeDirection, ScriptedLaneChange, SynthConfig, TrackSet};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn busy_track(seed: u64) -> Arc<TrackSet> {
    let events = (0..4)
        .map(|k| ScriptedLaneChange {
            vehicle: k,
            start: 1.0 + 2.0 * k as f64,
            direction: if k % 2 == 0 { LaneChangeDirection::Left } else { LaneChangeDirection::Right },
            duration: 3.0,
            from_lane: Some(1),
        })
        .collect();
    let cfg = SynthConfig { vehicle_count: 12, lane_change_events: events, ..SynthConfig::default() };
    Arc::new(generate_synthetic(&cfg, seed).unwrap())
}

fn spawn() -> SpawnConfig {
    SpawnConfig { x_max: 80.0, min_clearance: 5.0, ..SpawnConfig::default() }
}

fn env(mode: ObsMode, degraded: bool) -> HighwayEnv {
    let provider: Box<dyn IntentionProvider> = if degraded {
        Box::new(Degraded::new(5.0, NoiseConfig { class_flip_rate: 0.3, ttlc_sigma: 1.0, seed: 9 }))
    } else {
        Box::new(GroundTruth { horizon: 5.0 })
    };
    HighwayEnv::new(EnvConfig { obs_mode: mode, ..EnvConfig::default() }, provider).unwrap()
}

fn check_ranges(features: &[f64], mode: ObsMode) {
    assert_eq!(features.len(), mode.len());
    for (i, &f) in features.iter().enumerate() {
        assert!(f.is_finite(), "feature {i} = {f}");
        assert!((-1.0..=1.0).contains(&f), "feature {i} = {f}");
    }
    for i in (0..3).chain((0..6).map(|k| 4 + 3 * k)) {
        assert!(features[i] == 0.0 || features[i] == 1.0);
    }
    if mode == ObsMode::Ttlc {
        for k in 0..6 {
            let q = &features[22 + 4 * k..26 + 4 * k];
            assert!((q[0] + q[1] + q[2] - 1.0).abs() < 1e-9);
            assert!(q.iter().all(|v| (0.0..=1.0).contains(v)));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    /// Random policies on busy traffic: features stay finite and in range,
    /// and the penalty count equals the number of initiated lane changes.
    #[test]
    fn random_rollouts_respect_invariants(track_seed in 0u64..1000, seed in any::<u64>(), ttlc in any::<bool>(), degraded in any::<bool>()) {
        let mode = if ttlc { ObsMode::Ttlc } else { ObsMode::Base };
        let mut e = env(mode, degraded);
        let obs = e.reset(busy_track(track_seed), &spawn(), seed).unwrap();
        check_ranges(&obs.features, mode);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (mut initiated, mut total) = (0usize, 0.0);
        let terminal;
        loop {
            let a = Action::from_index(rng.random_range(0..3)).unwrap();
            let r = e.step(a).unwrap();
            check_ranges(&r.observation.features, mode);
            let ego = e.ego().unwrap();
            prop_assert!(ego.v >= 0.0);
            if ego.lane_change.is_none() {
                prop_assert_eq!(ego.y, 1.75 + 3.5 * ego.lane_id as f64);
            }
            initiated += usize::from(r.events.initiated_lane_change);
            total += r.reward;
            prop_assert_eq!(r.done, r.outcome != Outcome::Running);
            if r.done {
                terminal = r.outcome;
                break;
            }
        }
        let expected_terminal = match terminal {
            Outcome::EndOfTrack => 10.0,
            Outcome::Collision => -10.0,
            _ => 0.0,
        };
        prop_assert!((total - (expected_terminal - 0.1 * initiated as f64)).abs() < 1e-9);
    }

    #[test]
    fn reset_is_deterministic(track_seed in 0u64..1000, seed in any::<u64>()) {
        let ts = busy_track(track_seed);
        let mut a = env(ObsMode::Ttlc, true);
        let mut b = env(ObsMode::Ttlc, true);
        let oa = a.reset(ts.clone(), &spawn(), seed).unwrap();
        let ob = b.reset(ts, &spawn(), seed).unwrap();
        prop_assert_eq!(oa, ob);
        for _ in 0..5 {
            let (ra, rb) = (a.step(Action::Lk).unwrap(), b.step(Action::Lk).unwrap());
            prop_assert_eq!(&ra, &rb);
            if ra.done { break; }
        }
    }
}

#[test]
fn lane_keeping_full_traversal_scores_exactly_the_goal() {
    let ts = Arc::new(TrackSet::empty("e", Default::default(), 0.1));
    let mut e = env(ObsMode::Ttlc, false);
    e.reset(ts, &SpawnConfig::default(), 3).unwrap();
    let mut total = 0.0;
    loop {
        let r = e.step(Action::Lk).unwrap();
        total += r.reward;
        if r.done {
            assert_eq!(r.outcome, Outcome::EndOfTrack);
            break;
        }
    }
    assert_eq!(total, 10.0);
}
