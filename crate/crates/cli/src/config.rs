//! Experiment configuration.
//!
//! A TOML file whose keys are dotted section names (`idm.s0 = 5.0`, or the
//! equivalent `[idm]` table). Every key is optional; unknown keys are
//! rejected. `config/schema.toml` documents all of them with defaults.

use std::path::{Path, PathBuf};

use lanecross_core::env::{EnvConfig, ObsMode, RewardConfig, SpawnConfig};
use lanecross_core::idm::IdmParams;
use lanecross_core::intention::{
    Degraded, GroundTruth, IntentionProvider, NoIntention, NoiseConfig, DEFAULT_HORIZON,
};
use lanecross_core::seeding::{derive_seed, stream};
use lanecross_core::traffic::ScriptedLaneChange;
use lanecross_core::traffic::LaneGeometry;
use lanecross_dqn::{AgentConfig, Variant};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// Observation/intention pairing of one experimental arm.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Arm {
    /// Base layout, no intention features.
    Base,
    /// TTLC layout fed by the ground-truth oracle.
    GroundTruth,
    /// TTLC layout fed by a degraded oracle (class flips, TTLC noise).
    Predicted,
}

impl Arm {
    pub const ALL: [Arm; 3] = [Arm::Base, Arm::GroundTruth, Arm::Predicted];

    pub fn name(self) -> &'static str {
        match self {
            Arm::Base => "base",
            Arm::GroundTruth => "ground_truth",
            Arm::Predicted => "predicted",
        }
    }

    pub fn obs_mode(self) -> ObsMode {
        match self {
            Arm::Base => ObsMode::Base,
            Arm::GroundTruth | Arm::Predicted => ObsMode::Ttlc,
        }
    }
}

impl std::fmt::Display for Arm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Arm {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Arm::ALL
            .into_iter()
            .find(|a| a.name() == s)
            .ok_or_else(|| format!("unknown arm {s:?} (expected base, ground_truth or predicted)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentSection {
    pub name: String,
    pub seeds: Vec<u64>,
    pub episodes: usize,
    pub eval_runs: usize,
    pub variants: Vec<Variant>,
    pub arms: Vec<Arm>,
    /// Output directory, relative to the working directory.
    pub out: PathBuf,
}

impl Default for ExperimentSection {
    fn default() -> Self {
        Self {
            name: "experiment".into(),
            seeds: vec![0],
            episodes: 500,
            eval_runs: 45,
            variants: vec![Variant::Dqn],
            arms: Arm::ALL.to_vec(),
            out: PathBuf::from("runs"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorpusKind {
    /// Tracks without background traffic.
    Empty,
    /// Random traffic from the `synth` section.
    Synthetic,
    /// Scripted cut-ins around the ego's nominal path (`cutin` section).
    Cutin,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CorpusSection {
    pub kind: CorpusKind,
    pub tracks: usize,
    pub seed: u64,
    /// Defaults to the first half of the track indices.
    pub train_ids: Option<Vec<usize>>,
    /// Defaults to the indices not used for training.
    pub test_ids: Option<Vec<usize>>,
}

impl Default for CorpusSection {
    fn default() -> Self {
        Self { kind: CorpusKind::Empty, tracks: 2, seed: 0, train_ids: None, test_ids: None }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometrySection {
    pub lane_width: f64,
    pub track_length: f64,
    pub dt: f64,
}

impl Default for GeometrySection {
    fn default() -> Self {
        Self { lane_width: 3.5, track_length: 420.0, dt: 0.1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthSection {
    pub duration: f64,
    pub vehicle_count: usize,
    pub spawn_rate: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub min_spawn_gap: f64,
    pub lane_change_events: Vec<ScriptedLaneChange>,
    pub max_attempts: usize,
}

impl Default for SynthSection {
    fn default() -> Self {
        Self {
            duration: 30.0,
            vehicle_count: 10,
            spawn_rate: 0.0,
            speed_min: 20.0,
            speed_max: 30.0,
            min_spawn_gap: 10.0,
            lane_change_events: Vec::new(),
            max_attempts: 50,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CutinSection {
    pub duration: f64,
    /// Vehicles that cut into an adjacent lane next to the ego's path.
    pub hazards: usize,
    /// Look-alike vehicles that keep their lane.
    pub distractors: usize,
    /// Nominal ego start used for timing (m, m/s).
    pub ego_x: f64,
    pub ego_v: f64,
    /// Window for the start of the first and last cut-in (s).
    pub first_cut: f64,
    pub last_cut: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    /// Range of the cutter's lead over the nominal ego when its lateral move
    /// starts (centre to centre, m).
    pub lead_min: f64,
    pub lead_max: f64,
    pub change_duration: f64,
    pub max_attempts: usize,
}

impl Default for CutinSection {
    fn default() -> Self {
        Self {
            duration: 30.0,
            hazards: 3,
            distractors: 3,
            ego_x: 10.0,
            ego_v: 28.5,
            first_cut: 2.5,
            last_cut: 9.0,
            speed_min: 22.0,
            speed_max: 30.0,
            lead_min: 2.0,
            lead_max: 10.0,
            change_duration: 2.0,
            max_attempts: 200,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnvSection {
    pub decision_interval: f64,
    pub lane_change_duration: f64,
    pub radar_range: f64,
    pub max_steps: usize,
    pub ego_length: f64,
    pub ego_width: f64,
}

impl Default for EnvSection {
    fn default() -> Self {
        let e = EnvConfig::default();
        Self {
            decision_interval: e.decision_interval,
            lane_change_duration: e.lane_change_duration,
            radar_range: e.radar_range,
            max_steps: e.max_steps,
            ego_length: e.ego_length,
            ego_width: e.ego_width,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardSection {
    pub end_of_track: f64,
    pub lane_change: f64,
    pub collision: f64,
    pub penalize_masked_actions: bool,
}

impl Default for RewardSection {
    fn default() -> Self {
        let r = RewardConfig::default();
        Self {
            end_of_track: r.end_of_track,
            lane_change: r.lane_change,
            collision: r.collision,
            penalize_masked_actions: r.penalize_masked_actions,
        }
    }
}

impl RewardSection {
    pub fn config(&self) -> RewardConfig {
        RewardConfig {
            end_of_track: self.end_of_track,
            lane_change: self.lane_change,
            collision: self.collision,
            penalize_masked_actions: self.penalize_masked_actions,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IdmSection {
    pub s0: f64,
    pub v_desired_kmh: f64,
    pub a_max: f64,
    pub b_max: f64,
    pub b_safe: f64,
    pub rho: f64,
}

impl Default for IdmSection {
    fn default() -> Self {
        let p = IdmParams::default();
        Self { s0: p.s0, v_desired_kmh: 130.0, a_max: p.a_max, b_max: p.b_max, b_safe: p.b_safe, rho: p.rho }
    }
}

impl IdmSection {
    pub fn params(&self) -> IdmParams {
        IdmParams {
            s0: self.s0,
            v_desired: self.v_desired_kmh / 3.6,
            a_max: self.a_max,
            b_max: self.b_max,
            b_safe: self.b_safe,
            rho: self.rho,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SpawnSection {
    pub lane: Option<usize>,
    pub x_min: f64,
    pub x_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    pub min_clearance: f64,
    pub max_retries: usize,
}

impl Default for SpawnSection {
    fn default() -> Self {
        let s = SpawnConfig::default();
        Self {
            lane: s.lane,
            x_min: s.x_min,
            x_max: s.x_max,
            v_min: s.v_min,
            v_max: s.v_max,
            min_clearance: s.min_clearance,
            max_retries: s.max_retries,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntentionSection {
    pub horizon: f64,
    pub class_flip_rate: f64,
    pub ttlc_sigma: f64,
}

impl Default for IntentionSection {
    fn default() -> Self {
        let n = NoiseConfig::default();
        Self { horizon: DEFAULT_HORIZON, class_flip_rate: n.class_flip_rate, ttlc_sigma: n.ttlc_sigma }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    /// Test hook: report a NaN loss in this episode.
    pub inject_nan_at_episode: Option<usize>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub experiment: ExperimentSection,
    pub corpus: CorpusSection,
    pub geometry: GeometrySection,
    pub synth: SynthSection,
    pub cutin: CutinSection,
    pub env: EnvSection,
    pub reward: RewardSection,
    pub idm: IdmSection,
    pub spawn: SpawnSection,
    pub intention: IntentionSection,
    pub agent: AgentConfig,
    pub train: TrainSection,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        let cfg: Self = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let bad = |m: String| Err(CliError::Config(m));
        let x = &self.experiment;
        if x.seeds.is_empty() {
            return bad("experiment.seeds must not be empty".into());
        }
        if x.eval_runs == 0 {
            return bad("experiment.eval_runs must be at least 1".into());
        }
        if x.variants.is_empty() || x.arms.is_empty() {
            return bad("experiment.variants and experiment.arms must not be empty".into());
        }
        if self.corpus.tracks == 0 {
            return bad("corpus.tracks must be at least 1".into());
        }
        let (train, test) = self.split();
        if train.is_empty() || test.is_empty() {
            return bad("train and test splits must both be non-empty".into());
        }
        if let Some(&i) = train.iter().chain(&test).find(|&&i| i >= self.corpus.tracks) {
            return bad(format!("track id {i} out of range (corpus.tracks = {})", self.corpus.tracks));
        }
        if let Some(i) = train.iter().find(|i| test.contains(i)) {
            return bad(format!("track {i} is in both the train and the test split"));
        }
        self.geometry()?;
        self.env_config(ObsMode::Base)?;
        self.agent.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let i = &self.intention;
        if !(i.horizon > 0.0 && (0.0..=1.0).contains(&i.class_flip_rate) && i.ttlc_sigma >= 0.0) {
            return bad("intention.horizon must be positive, class_flip_rate in [0, 1], ttlc_sigma >= 0".into());
        }
        let c = &self.cutin;
        if !(c.first_cut <= c.last_cut && c.speed_min <= c.speed_max && c.lead_min <= c.lead_max && c.change_duration > 0.0)
        {
            return bad("cutin ranges must be ordered and change_duration positive".into());
        }
        Ok(())
    }

    /// Train and test track indices.
    pub fn split(&self) -> (Vec<usize>, Vec<usize>) {
        let n = self.corpus.tracks;
        let train = self.corpus.train_ids.clone().unwrap_or_else(|| (0..n / 2).collect());
        let test = self
            .corpus
            .test_ids
            .clone()
            .unwrap_or_else(|| (0..n).filter(|i| !train.contains(i)).collect());
        (train, test)
    }

    pub fn geometry(&self) -> Result<LaneGeometry, CliError> {
        LaneGeometry::new(self.geometry.lane_width, self.geometry.track_length).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn env_config(&self, obs_mode: ObsMode) -> Result<EnvConfig, CliError> {
        let e = &self.env;
        let cfg = EnvConfig {
            decision_interval: e.decision_interval,
            physics_dt: self.geometry.dt,
            lane_change_duration: e.lane_change_duration,
            radar_range: e.radar_range,
            obs_mode,
            ego_length: e.ego_length,
            ego_width: e.ego_width,
            max_steps: e.max_steps,
            idm: self.idm.params(),
            reward: self.reward.config(),
        };
        cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(cfg)
    }

    pub fn spawn(&self) -> SpawnConfig {
        let s = &self.spawn;
        SpawnConfig {
            lane: s.lane,
            x_min: s.x_min,
            x_max: s.x_max,
            v_min: s.v_min,
            v_max: s.v_max,
            min_clearance: s.min_clearance,
            max_retries: s.max_retries,
        }
    }

    /// Intention source for `arm`; the degraded oracle's noise stream is
    /// keyed by the run seed.
    pub fn provider(&self, arm: Arm, seed: u64) -> Box<dyn IntentionProvider> {
        let horizon = self.intention.horizon;
        match arm {
            Arm::Base => Box::new(NoIntention { horizon }),
            Arm::GroundTruth => Box::new(GroundTruth { horizon }),
            Arm::Predicted => Box::new(Degraded::new(
                horizon,
                NoiseConfig {
                    class_flip_rate: self.intention.class_flip_rate,
                    ttlc_sigma: self.intention.ttlc_sigma,
                    seed: derive_seed(seed, &[stream::INTENTION]),
                },
            )),
        }
    }

    pub fn out_dir(&self) -> &Path {
        &self.experiment.out
    }
}
