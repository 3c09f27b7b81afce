//! Training and greedy evaluation of single runs.
//!
//! A run is one `(variant, arm, seed)` triple. All arms of a seed see the
//! same tracks in the same order with the same spawn seeds, and the same
//! agent seed, so they differ only in what the observation contains.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use lanecross_core::env::{Action, HighwayEnv, Outcome, TrackRotation};
use lanecross_core::seeding::{derive_seed, stream};
use lanecross_core::traffic::TrackSet;
use lanecross_dqn::agent::{argmax, Agent};
use lanecross_dqn::train::{run_training, CsvMetrics, EpisodeMetrics, MetricsSink, TrainOptions, TrainingSummary};
use lanecross_dqn::{AgentConfig, DqnError, Variant};
use lanecross_nn::Network;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Arm, ExperimentConfig};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunSpec {
    pub variant: Variant,
    pub arm: Arm,
    pub seed: u64,
}

impl RunSpec {
    pub fn name(&self) -> String {
        format!("{}-{}-s{}", self.variant, self.arm, self.seed)
    }
}

/// Every configured run, ordered by variant, seed, then arm.
pub fn runs(cfg: &ExperimentConfig) -> Vec<RunSpec> {
    let x = &cfg.experiment;
    let mut out = Vec::new();
    for &variant in &x.variants {
        for &seed in &x.seeds {
            for &arm in &x.arms {
                out.push(RunSpec { variant, arm, seed });
            }
        }
    }
    out
}

pub fn train_dir(out: &Path, run: &RunSpec) -> PathBuf {
    out.join("train").join(run.name())
}

pub fn checkpoint_path(out: &Path, run: &RunSpec) -> PathBuf {
    train_dir(out, run).join("checkpoint.lcqn")
}

pub fn agent_config(cfg: &ExperimentConfig, variant: Variant) -> AgentConfig {
    AgentConfig { variant, ..cfg.agent.clone() }
}

/// Seed of the environment stream shared by all arms of `seed`.
pub fn env_seed(seed: u64) -> u64 {
    derive_seed(seed, &[stream::SPAWN])
}

pub fn agent_seed(seed: u64) -> u64 {
    derive_seed(seed, &[stream::AGENT])
}

pub fn eval_seed(seed: u64, run: usize) -> u64 {
    derive_seed(seed, &[stream::EVAL, run as u64])
}

fn pick(tracks: &[Arc<TrackSet>], ids: &[usize]) -> Vec<Arc<TrackSet>> {
    ids.iter().map(|&i| tracks[i].clone()).collect()
}

struct Tee<'a, W: std::io::Write> {
    rows: Vec<EpisodeMetrics>,
    csv: &'a mut CsvMetrics<W>,
}

impl<W: std::io::Write> MetricsSink for Tee<'_, W> {
    fn record(&mut self, m: &EpisodeMetrics) -> std::io::Result<()> {
        self.rows.push(m.clone());
        self.csv.record(m)
    }
}

pub struct TrainOutput {
    pub policy: Network,
    pub metrics: Vec<EpisodeMetrics>,
    /// Metrics CSV text, comment header included.
    pub csv: String,
    pub summary: TrainingSummary,
}

pub fn train_run(cfg: &ExperimentConfig, tracks: &[Arc<TrackSet>], run: &RunSpec) -> Result<TrainOutput, CliError> {
    let (train_ids, _) = cfg.split();
    let obs_mode = run.arm.obs_mode();
    let env = HighwayEnv::new(cfg.env_config(obs_mode)?, cfg.provider(run.arm, run.seed))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let mut rotation = TrackRotation::new(env, pick(tracks, &train_ids), cfg.spawn(), env_seed(run.seed));
    let agent_cfg = agent_config(cfg, run.variant);
    let mut agent = Agent::new(agent_cfg.clone(), obs_mode.len(), agent_seed(run.seed))
        .map_err(|e| CliError::Config(e.to_string()))?;

    let mut comments = vec![
        ("run".to_string(), run.name()),
        ("arm".into(), run.arm.to_string()),
        ("seed".into(), run.seed.to_string()),
        ("obs_len".into(), obs_mode.len().to_string()),
        ("episodes".into(), cfg.experiment.episodes.to_string()),
    ];
    comments.extend(agent_cfg.describe());
    let mut csv = CsvMetrics::new(Vec::new(), &comments).expect("writing to memory");
    let mut tee = Tee { rows: Vec::new(), csv: &mut csv };
    let opts = TrainOptions {
        episodes: cfg.experiment.episodes,
        inject_nan_at_episode: cfg.train.inject_nan_at_episode,
    };
    let summary = match run_training(&mut rotation, &mut agent, &opts, &mut tee) {
        Ok(s) => s,
        Err(DqnError::Divergence { episode }) => return Err(CliError::Divergence { run: run.name(), episode }),
        Err(e) => return Err(CliError::Run(format!("{}: {e}", run.name()))),
    };
    let metrics = tee.rows;
    Ok(TrainOutput {
        policy: agent.policy(),
        metrics,
        csv: String::from_utf8(csv.into_inner()).expect("ascii metrics"),
        summary,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRow {
    pub run: usize,
    pub track_id: String,
    pub spawn_seed: u64,
    pub score: f64,
    pub collision: bool,
    pub outcome: String,
    pub steps: usize,
    pub lane_changes: usize,
}

/// Greedy rollout of `net` on one track.
pub fn rollout(env: &mut HighwayEnv, net: &Network, ts: Arc<TrackSet>, cfg: &ExperimentConfig, seed: u64) -> Result<(f64, Outcome, usize, usize), CliError> {
    let env_err = |e: lanecross_core::env::EnvError| CliError::Run(e.to_string());
    let mut obs = env.reset(ts, &cfg.spawn(), seed).map_err(env_err)?;
    let (mut score, mut steps, mut lane_changes) = (0.0, 0, 0);
    loop {
        let q = net.forward(&obs.features).map_err(|e| CliError::Run(e.to_string()))?;
        let action = Action::from_index(argmax(&q)).expect("three outputs");
        let r = env.step(action).map_err(env_err)?;
        score += r.reward;
        steps += 1;
        lane_changes += usize::from(r.events.initiated_lane_change);
        if r.done {
            return Ok((score, r.outcome, steps, lane_changes));
        }
        obs = r.observation;
    }
}

/// `eval_runs` greedy episodes over the test split, round-robin over its
/// tracks. Runs execute in parallel; rows come back in run order.
pub fn evaluate_policy(cfg: &ExperimentConfig, tracks: &[Arc<TrackSet>], net: &Network, arm: Arm, seed: u64) -> Result<Vec<RunRow>, CliError> {
    let obs_len = arm.obs_mode().len();
    if net.input_dim() != obs_len {
        return Err(CliError::LayoutMismatch { arm: arm.to_string(), expected: net.input_dim(), got: obs_len });
    }
    let mut net = net.clone();
    net.set_noise_enabled(false);
    let (_, test_ids) = cfg.split();
    let test = pick(tracks, &test_ids);
    let env_cfg = cfg.env_config(arm.obs_mode())?;
    (0..cfg.experiment.eval_runs)
        .into_par_iter()
        .map(|run| {
            let ts = test[run % test.len()].clone();
            let spawn_seed = eval_seed(seed, run);
            let mut env = HighwayEnv::new(env_cfg, cfg.provider(arm, seed)).map_err(|e| CliError::Config(e.to_string()))?;
            let track_id = ts.track_id.clone();
            let (score, outcome, steps, lane_changes) = rollout(&mut env, &net, ts, cfg, spawn_seed)?;
            Ok(RunRow {
                run,
                track_id,
                spawn_seed,
                score,
                collision: outcome == Outcome::Collision,
                outcome: outcome.as_str().into(),
                steps,
                lane_changes,
            })
        })
        .collect()
}
