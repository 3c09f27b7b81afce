//! Evaluation reports (JSON and CSV).

use std::collections::BTreeMap;

use lanecross_dqn::Variant;
use serde::{Deserialize, Serialize};

use crate::config::Arm;
use crate::experiment::RunRow;

pub const RUNS_HEADER: &str = "run,track_id,spawn_seed,score,collision,outcome,steps,lane_changes";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    pub variant: Variant,
    pub arm: Arm,
    pub seed: u64,
    pub checkpoint: String,
    pub obs_len: usize,
    pub eval_runs: usize,
    /// Collisions over the evaluation runs.
    pub collisions: usize,
    pub collision_rate: f64,
    pub mean_score: f64,
    pub score_std: f64,
    pub mean_lane_changes: f64,
    pub outcomes: BTreeMap<String, usize>,
    pub runs: Vec<RunRow>,
}

impl EvalReport {
    pub fn new(variant: Variant, arm: Arm, seed: u64, checkpoint: String, obs_len: usize, runs: Vec<RunRow>) -> Self {
        let n = runs.len().max(1) as f64;
        let collisions = runs.iter().filter(|r| r.collision).count();
        let mean_score = runs.iter().map(|r| r.score).sum::<f64>() / n;
        let var = runs.iter().map(|r| (r.score - mean_score).powi(2)).sum::<f64>() / n;
        let mut outcomes = BTreeMap::new();
        for r in &runs {
            *outcomes.entry(r.outcome.clone()).or_insert(0) += 1;
        }
        Self {
            variant,
            arm,
            seed,
            checkpoint,
            obs_len,
            eval_runs: runs.len(),
            collisions,
            collision_rate: collisions as f64 / n,
            mean_score,
            score_std: var.sqrt(),
            mean_lane_changes: runs.iter().map(|r| r.lane_changes as f64).sum::<f64>() / n,
            outcomes,
            runs,
        }
    }

    pub fn file_stem(&self) -> String {
        format!("{}-{}-s{}", self.variant, self.arm, self.seed)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Summary comment lines, then one row per run.
    pub fn to_csv(&self) -> String {
        let mut s = format!(
            "# variant = {}\n# arm = {}\n# seed = {}\n# collisions = {}\n# mean_score = {}\n{RUNS_HEADER}\n",
            self.variant, self.arm, self.seed, self.collisions, self.mean_score
        );
        for r in &self.runs {
            s += &format!(
                "{},{},{},{},{},{},{},{}\n",
                r.run,
                r.track_id,
                r.spawn_seed,
                r.score,
                u8::from(r.collision),
                r.outcome,
                r.steps,
                r.lane_changes
            );
        }
        s
    }
}
