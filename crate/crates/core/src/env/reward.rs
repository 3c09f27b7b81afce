use serde::{Deserialize, Serialize};

/// Terminal reward, lane-change penalty and collision penalty magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardConfig {
    pub end_of_track: f64,
    pub lane_change: f64,
    pub collision: f64,
    /// Also charge the lane-change penalty for commands that were masked to
    /// lane keeping (road edge or manoeuvre in progress).
    pub penalize_masked_actions: bool,
}

impl Default for RewardConfig {
    fn default() -> Self {
        Self {
            end_of_track: 10.0,
            lane_change: 0.1,
            collision: 10.0,
            penalize_masked_actions: false,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<(), String> {
        let all = [self.end_of_track, self.lane_change, self.collision];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err("reward magnitudes must be finite and non-negative".into());
        }
        if self.lane_change >= self.end_of_track.min(self.collision) {
            return Err(format!(
                "lane-change penalty {} must be below both terminal magnitudes",
                self.lane_change
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepEvents {
    pub reached_end: bool,
    pub initiated_lane_change: bool,
    /// A lane-change command that was treated as lane keeping.
    pub masked_lane_change: bool,
    pub collided: bool,
}

pub fn compute_reward(events: &StepEvents, cfg: &RewardConfig) -> f64 {
    let indicator = |b: bool| if b { 1.0 } else { 0.0 };
    let penalized = events.initiated_lane_change
        || (cfg.penalize_masked_actions && events.masked_lane_change);
    cfg.end_of_track * indicator(events.reached_end)
        - cfg.lane_change * indicator(penalized)
        - cfg.collision * indicator(events.collided)
}
