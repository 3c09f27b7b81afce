use std::sync::Arc;

use lanecross_core::env::{EnvConfig, HighwayEnv, ObsMode, SpawnConfig, TrackRotation};
use lanecross_core::intention::{GroundTruth, NoIntention};
use lanecross_core::traffic::{generate_synthetic, LaneGeometry, SynthConfig, TrackSet};
use lanecross_dqn::{run_training, Agent, AgentConfig, CsvMetrics, DqnError, EpisodeMetrics, TrainOptions, Variant};
use lanecross_nn::{DenseLayer, Head, Layer, Network};
use ndarray::{Array1, Array2};

fn empty_road() -> TrackRotation {
    let env = HighwayEnv::new(EnvConfig::default(), Box::new(GroundTruth { horizon: 5.0 })).unwrap();
    let ts = Arc::new(TrackSet::empty("empty", LaneGeometry::default(), 0.1));
    TrackRotation::new(env, vec![ts], SpawnConfig::default(), 1)
}

fn traffic(seed: u64) -> TrackRotation {
    let env = HighwayEnv::new(EnvConfig { obs_mode: ObsMode::Base, ..EnvConfig::default() }, Box::new(NoIntention { horizon: 5.0 })).unwrap();
    let tracks = (0..2)
        .map(|k| Arc::new(generate_synthetic(&SynthConfig { vehicle_count: 6, ..SynthConfig::default() }, 100 + k).unwrap()))
        .collect();
    TrackRotation::new(env, tracks, SpawnConfig { x_max: 80.0, min_clearance: 5.0, ..SpawnConfig::default() }, seed)
}

#[test]
fn lane_keeping_network_scores_the_goal_reward() {
    let head = Layer::Dense(DenseLayer { weights: Array2::zeros((3, 22)), bias: Array1::from(vec![0.0, 1.0, 0.0]) });
    let net = Network::from_parts(vec![], Head::Plain(head), Default::default()).unwrap();
    let cfg = AgentConfig { eps_start: 0.0, eps_min: 0.0, alpha: 1e-12, ..AgentConfig::default() };
    let mut agent = Agent::with_network(cfg, net, 0).unwrap();
    let mut metrics: Vec<EpisodeMetrics> = Vec::new();
    run_training(&mut empty_road(), &mut agent, &TrainOptions { episodes: 1, ..Default::default() }, &mut metrics).unwrap();
    assert_eq!(metrics.len(), 1);
    assert_eq!(metrics[0].score, 10.0);
    assert!(!metrics[0].collision);
    assert_eq!(metrics[0].lane_changes, 0);
}

fn metrics_csv(variant: Variant, seed: u64) -> String {
    let cfg = AgentConfig { variant, hidden: vec![16, 16], batch_size: 8, target_sync_interval: 20, ..AgentConfig::default() };
    let mut agent = Agent::new(cfg.clone(), 22, seed).unwrap();
    let mut sink = CsvMetrics::new(Vec::new(), &cfg.describe()).unwrap();
    run_training(&mut traffic(seed), &mut agent, &TrainOptions { episodes: 6, ..Default::default() }, &mut sink).unwrap();
    String::from_utf8(sink.into_inner()).unwrap()
}

#[test]
fn same_seed_gives_identical_metrics() {
    for v in Variant::ALL {
        let a = metrics_csv(v, 5);
        assert_eq!(a, metrics_csv(v, 5), "{v}");
        assert_eq!(a.lines().filter(|l| !l.starts_with('#')).count(), 7);
    }
    assert_ne!(metrics_csv(Variant::Dqn, 5), metrics_csv(Variant::Dqn, 6));
}

#[test]
fn injected_nan_is_reported_as_divergence() {
    let cfg = AgentConfig { hidden: vec![8], batch_size: 2, ..AgentConfig::default() };
    let mut agent = Agent::new(cfg, 22, 1).unwrap();
    let mut metrics: Vec<EpisodeMetrics> = Vec::new();
    let opts = TrainOptions { episodes: 5, inject_nan_at_episode: Some(2) };
    let err = run_training(&mut traffic(1), &mut agent, &opts, &mut metrics).unwrap_err();
    assert!(matches!(err, DqnError::Divergence { episode: 2 }));
    assert_eq!(metrics.len(), 2);
}

#[test]
fn layout_mismatch_surfaces_as_an_error() {
    let mut agent = Agent::new(AgentConfig { hidden: vec![8], ..AgentConfig::default() }, 46, 1).unwrap();
    let mut metrics: Vec<EpisodeMetrics> = Vec::new();
    assert!(run_training(&mut traffic(1), &mut agent, &TrainOptions { episodes: 1, ..Default::default() }, &mut metrics).is_err());
}
