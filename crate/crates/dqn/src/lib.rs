//! Deep Q-learning agents over the highway environment.

pub mod agent;
pub mod replay;
pub mod toy;
pub mod train;

use lanecross_nn::{Activation, NnError};
use serde::{Deserialize, Serialize};

pub use agent::{argmax, compute_targets, select_action, Agent, TargetBank};
pub use replay::{ReplayBuffer, Transition};
pub use train::{epsilon_schedule, run_training, CsvMetrics, EpisodeMetrics, MetricsSink, TrainOptions, TrainingSummary};

#[derive(Debug, thiserror::Error)]
pub enum DqnError {
    #[error("replay buffer holds {have} transitions, batch needs {need}")]
    BufferTooSmall { have: usize, need: usize },
    #[error("target bank is empty")]
    EmptyBank,
    #[error("observation layout {got} does not match {expected}")]
    LayoutMismatch { expected: u32, got: u32 },
    #[error("invalid agent config: {0}")]
    InvalidConfig(String),
    #[error("training diverged: non-finite loss in episode {episode}")]
    Divergence { episode: usize },
    #[error(transparent)]
    Network(#[from] NnError),
    #[error("environment: {0}")]
    Env(Box<dyn std::error::Error + Send + Sync>),
    #[error("metrics sink: {0}")]
    Sink(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    #[default]
    Dqn,
    Double,
    Averaged,
    Duelling,
    Noisy,
}

impl Variant {
    pub const ALL: [Variant; 5] = [Variant::Dqn, Variant::Double, Variant::Averaged, Variant::Duelling, Variant::Noisy];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Dqn => "dqn",
            Variant::Double => "double",
            Variant::Averaged => "averaged",
            Variant::Duelling => "duelling",
            Variant::Noisy => "noisy",
        }
    }
}

impl std::fmt::Display for Variant {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

impl std::str::FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| format!("unknown variant `{s}` (expected dqn, double, averaged, duelling or noisy)"))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AgentConfig {
    pub variant: Variant,
    pub gamma: f64,
    pub alpha: f64,
    pub eps_start: f64,
    pub eps_min: f64,
    /// Per-episode multiplicative factor.
    pub eps_decay: f64,
    pub batch_size: usize,
    /// Environment steps between target syncs.
    pub target_sync_interval: u64,
    pub averaged_k: usize,
    pub replay_capacity: usize,
    pub hidden: Vec<usize>,
    pub activation: Activation,
    /// Make every layer noisy instead of the final two.
    pub noisy_all_layers: bool,
}

impl Default for AgentConfig {
    fn default() -> Self {
        Self {
            variant: Variant::Dqn,
            gamma: 0.95,
            alpha: 1e-5,
            eps_start: 1.0,
            eps_min: 0.01,
            eps_decay: 0.9995,
            batch_size: 32,
            target_sync_interval: 1000,
            averaged_k: 5,
            replay_capacity: 10_000,
            hidden: vec![128, 128],
            activation: Activation::Relu,
            noisy_all_layers: false,
        }
    }
}

impl AgentConfig {
    pub fn validate(&self) -> Result<(), DqnError> {
        let bad = |m: &str| Err(DqnError::InvalidConfig(m.into()));
        if !(0.0..=1.0).contains(&self.gamma) {
            return bad("gamma must lie in [0, 1]");
        }
        if !(self.alpha > 0.0 && self.alpha.is_finite()) {
            return bad("alpha must be positive");
        }
        if !(0.0..=1.0).contains(&self.eps_start) || !(0.0..=1.0).contains(&self.eps_min) {
            return bad("epsilon bounds must lie in [0, 1]");
        }
        if self.eps_min > self.eps_start {
            return bad("eps_min must not exceed eps_start");
        }
        if !(self.eps_decay > 0.0 && self.eps_decay <= 1.0) {
            return bad("eps_decay must lie in (0, 1]");
        }
        if self.batch_size == 0 || self.replay_capacity < self.batch_size {
            return bad("batch_size must be positive and fit in the replay buffer");
        }
        if self.target_sync_interval == 0 {
            return bad("target_sync_interval must be positive");
        }
        if self.averaged_k == 0 {
            return bad("averaged_k must be at least 1");
        }
        if self.hidden.is_empty() || self.hidden.contains(&0) {
            return bad("hidden layer widths must be positive");
        }
        Ok(())
    }

    /// `key = value` pairs for metrics headers.
    pub fn describe(&self) -> Vec<(String, String)> {
        let hidden: Vec<String> = self.hidden.iter().map(usize::to_string).collect();
        vec![
            ("variant".into(), self.variant.to_string()),
            ("gamma".into(), self.gamma.to_string()),
            ("alpha".into(), self.alpha.to_string()),
            ("eps_start".into(), self.eps_start.to_string()),
            ("eps_min".into(), self.eps_min.to_string()),
            ("eps_decay".into(), self.eps_decay.to_string()),
            ("batch_size".into(), self.batch_size.to_string()),
            ("target_sync_interval".into(), self.target_sync_interval.to_string()),
            ("averaged_k".into(), self.averaged_k.to_string()),
            ("replay_capacity".into(), self.replay_capacity.to_string()),
            ("hidden".into(), hidden.join("-")),
            ("activation".into(), self.activation.name().into()),
            ("noisy_all_layers".into(), self.noisy_all_layers.to_string()),
        ]
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_follow_the_model_hyperparameters() {
        let c = AgentConfig::default();
        assert_eq!((c.gamma, c.alpha, c.batch_size, c.replay_capacity), (0.95, 1e-5, 32, 10_000));
        assert_eq!((c.eps_start, c.eps_min), (1.0, 0.01));
        assert_eq!(c.hidden, vec![128, 128]);
        c.validate().unwrap();
    }

    #[test]
    fn variant_names_round_trip() {
        for v in Variant::ALL {
            assert_eq!(v.name().parse::<Variant>().unwrap(), v);
        }
        assert!("rainbow".parse::<Variant>().is_err());
    }

    #[test]
    fn invalid_configs() {
        for c in [
            AgentConfig { gamma: 1.5, ..Default::default() },
            AgentConfig { eps_min: 0.5, eps_start: 0.1, ..Default::default() },
            AgentConfig { averaged_k: 0, ..Default::default() },
            AgentConfig { batch_size: 0, ..Default::default() },
        ] {
            assert!(c.validate().is_err());
        }
    }
}
