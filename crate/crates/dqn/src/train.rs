use std::io::Write;

use lanecross_core::env::{Action, EpisodicEnv, Outcome};

use crate::agent::Agent;
use crate::replay::Transition;
use crate::{AgentConfig, DqnError, Variant};

/// `max(eps_min, eps_start · eps_decay^episode)`
pub fn epsilon_schedule(episode: usize, cfg: &AgentConfig) -> f64 {
    let e = cfg.eps_start * cfg.eps_decay.powf(episode as f64);
    e.max(cfg.eps_min)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: usize,
    pub score: f64,
    /// `None` until the first update.
    pub mean_loss: Option<f64>,
    pub epsilon: f64,
    pub collision: bool,
    pub steps: usize,
    pub lane_changes: usize,
    pub outcome: Outcome,
}

pub trait MetricsSink {
    fn record(&mut self, m: &EpisodeMetrics) -> std::io::Result<()>;
}

impl MetricsSink for Vec<EpisodeMetrics> {
    fn record(&mut self, m: &EpisodeMetrics) -> std::io::Result<()> {
        self.push(m.clone());
        Ok(())
    }
}

pub const METRICS_HEADER: &str = "episode,score,mean_loss,epsilon,collision,steps";

/// Metrics CSV: `# key = value` comment lines, the header, then one row per
/// episode. An empty `mean_loss` cell means no update happened.
pub struct CsvMetrics<W: Write> {
    out: W,
}

impl<W: Write> CsvMetrics<W> {
    pub fn new(mut out: W, comments: &[(String, String)]) -> std::io::Result<Self> {
        for (k, v) in comments {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(out, "{METRICS_HEADER}")?;
        Ok(Self { out })
    }

    pub fn into_inner(self) -> W {
        self.out
    }
}

impl<W: Write> MetricsSink for CsvMetrics<W> {
    fn record(&mut self, m: &EpisodeMetrics) -> std::io::Result<()> {
        let loss = m.mean_loss.map(|l| l.to_string()).unwrap_or_default();
        writeln!(
            self.out,
            "{},{},{},{},{},{}",
            m.episode,
            m.score,
            loss,
            m.epsilon,
            u8::from(m.collision),
            m.steps
        )
    }
}

#[derive(Debug, Clone, Default)]
pub struct TrainOptions {
    pub episodes: usize,
    /// Test hook: report a NaN loss in this episode.
    pub inject_nan_at_episode: Option<usize>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSummary {
    pub episodes: usize,
    pub env_steps: u64,
    pub updates: u64,
    pub collisions: usize,
}

/// Experience-replay Q-learning over `opts.episodes` episodes of `env`.
pub fn run_training<E: EpisodicEnv>(
    env: &mut E,
    agent: &mut Agent,
    opts: &TrainOptions,
    sink: &mut dyn MetricsSink,
) -> Result<TrainingSummary, DqnError> {
    let env_err = |e: E::Error| DqnError::Env(Box::new(e));
    let mut collisions = 0;
    for episode in 0..opts.episodes {
        let eps = if agent.cfg.variant == Variant::Noisy { 0.0 } else { epsilon_schedule(episode, &agent.cfg) };
        let mut obs = env.begin_episode(episode).map_err(env_err)?;
        let (mut score, mut steps, mut lane_changes) = (0.0, 0, 0);
        let (mut loss_sum, mut losses) = (0.0, 0usize);
        let outcome = loop {
            let a = agent.act(&obs, eps)?;
            let r = env.step(Action::from_index(a).expect("three actions")).map_err(env_err)?;
            score += r.reward;
            steps += 1;
            lane_changes += usize::from(r.events.initiated_lane_change);
            let terminal = matches!(r.outcome, Outcome::Collision | Outcome::EndOfTrack);
            let t = Transition { s: obs, a, r: r.reward, s_next: r.observation.clone(), terminal };
            if let Some(mut l) = agent.observe(t)? {
                if opts.inject_nan_at_episode == Some(episode) {
                    l = f64::NAN;
                }
                if !l.is_finite() {
                    return Err(DqnError::Divergence { episode });
                }
                loss_sum += l;
                losses += 1;
            }
            obs = r.observation;
            if r.done {
                break r.outcome;
            }
        };
        let collision = outcome == Outcome::Collision;
        collisions += usize::from(collision);
        sink.record(&EpisodeMetrics {
            episode,
            score,
            mean_loss: (losses > 0).then(|| loss_sum / losses as f64),
            epsilon: eps,
            collision,
            steps,
            lane_changes,
            outcome,
        })?;
    }
    Ok(TrainingSummary { episodes: opts.episodes, env_steps: agent.env_steps, updates: agent.updates, collisions })
}
