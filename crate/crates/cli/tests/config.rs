use std::path::Path;

use lanecross_cli::config::{Arm, CorpusKind};
use lanecross_cli::ExperimentConfig;

fn repo_config(name: &str) -> ExperimentConfig {
    ExperimentConfig::load(&Path::new(env!("CARGO_MANIFEST_DIR")).join("../../config").join(name)).unwrap()
}

#[test]
fn schema_file_matches_defaults() {
    assert_eq!(repo_config("schema.toml"), ExperimentConfig::default());
}

#[test]
fn shipped_configs_parse() {
    let c = repo_config("cutin.toml");
    assert_eq!(c.corpus.kind, CorpusKind::Cutin);
    assert_eq!(c.corpus.tracks, 30);
    let (train, test) = c.split();
    assert_eq!(train, (0..15).collect::<Vec<_>>());
    assert_eq!(test, (15..30).collect::<Vec<_>>());
    assert_eq!(c.experiment.seeds.len(), 5);
    let e = repo_config("empty_road.toml");
    assert_eq!(e.corpus.kind, CorpusKind::Empty);
}

#[test]
fn dotted_keys_equal_tables() {
    let dotted = ExperimentConfig::from_toml("idm.s0 = 4.0\nidm.v_desired_kmh = 108.0\nreward.lane_change = 0.2\n").unwrap();
    let tables = ExperimentConfig::from_toml("[idm]\ns0 = 4.0\nv_desired_kmh = 108.0\n[reward]\nlane_change = 0.2\n").unwrap();
    assert_eq!(dotted, tables);
    let p = dotted.idm.params();
    assert_eq!(p.s0, 4.0);
    assert!((p.v_desired - 30.0).abs() < 1e-12);
    assert_eq!(dotted.reward.config().lane_change, 0.2);
}

#[test]
fn defaults_match_idm_parameters() {
    let p = ExperimentConfig::default().idm.params();
    assert_eq!((p.s0, p.a_max, p.b_max, p.b_safe, p.rho), (5.0, 3.0, 5.0, 4.0, 0.25));
    assert!((p.v_desired - 130.0 / 3.6).abs() < 1e-12);
}

#[test]
fn arms_map_to_layouts() {
    assert_eq!(Arm::Base.obs_mode().len(), 22);
    assert_eq!(Arm::GroundTruth.obs_mode().len(), 46);
    assert_eq!(Arm::Predicted.obs_mode().len(), 46);
    assert_eq!("predicted".parse::<Arm>().unwrap(), Arm::Predicted);
    assert!("ttlc".parse::<Arm>().is_err());
}

#[test]
fn split_must_be_disjoint_and_in_range() {
    assert!(ExperimentConfig::from_toml("corpus.tracks = 3\ncorpus.train_ids = [0]\ncorpus.test_ids = [0]\n").is_err());
    assert!(ExperimentConfig::from_toml("corpus.tracks = 3\ncorpus.train_ids = [0]\ncorpus.test_ids = [3]\n").is_err());
    assert!(ExperimentConfig::from_toml("corpus.tracks = 1\n").is_err());
    let ok = ExperimentConfig::from_toml("corpus.tracks = 3\ncorpus.train_ids = [2]\n").unwrap();
    assert_eq!(ok.split(), (vec![2], vec![0, 1]));
}
