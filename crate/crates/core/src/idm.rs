//! Longitudinal car following with the Intelligent Driver Model.
//!
//! The desired-gap term includes the response-time travel, the distance
//! covered while still accelerating during the response time, and the
//! difference between a safe stop of the follower and a hard stop of the
//! leader:
//!
//! ```text
//! s*(v, v_lead) = max(s0, v·ρ + ½·a_max·ρ² + (v + ρ·a_max)²/(2·b_safe) − v_lead²/(2·b_max))
//! a = a_max · (1 − (v/v_desired)⁴ − (s*/s)²)
//! ```

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Gap used when there is no leader.
pub const FREE_ROAD_GAP: f64 = 1e9;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IdmError {
    #[error("gap must be positive, got {0}")]
    DegenerateGap(f64),
    #[error("invalid IDM parameters: {0}")]
    InvalidParams(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IdmParams {
    /// Minimum bumper-to-bumper distance (m).
    pub s0: f64,
    /// Desired speed (m/s).
    pub v_desired: f64,
    /// Maximum acceleration (m/s²).
    pub a_max: f64,
    /// Maximum deceleration (m/s²).
    pub b_max: f64,
    /// Comfortable deceleration (m/s²).
    pub b_safe: f64,
    /// Response time (s).
    pub rho: f64,
}

impl Default for IdmParams {
    fn default() -> Self {
        Self {
            s0: 5.0,
            v_desired: 130.0 / 3.6,
            a_max: 3.0,
            b_max: 5.0,
            b_safe: 4.0,
            rho: 0.25,
        }
    }
}

impl IdmParams {
    pub fn validate(&self) -> Result<(), IdmError> {
        let fields = [
            ("s0", self.s0),
            ("v_desired", self.v_desired),
            ("a_max", self.a_max),
            ("b_max", self.b_max),
            ("b_safe", self.b_safe),
            ("rho", self.rho),
        ];
        for (name, value) in fields {
            if !(value.is_finite() && value > 0.0) {
                return Err(IdmError::InvalidParams(format!("{name} must be positive, got {value}")));
            }
        }
        if self.b_safe > self.b_max {
            return Err(IdmError::InvalidParams(format!(
                "b_safe ({}) exceeds b_max ({})",
                self.b_safe, self.b_max
            )));
        }
        Ok(())
    }

    pub fn with_desired_speed(self, v_desired: f64) -> Self {
        Self { v_desired, ..self }
    }
}

pub fn desired_gap(v: f64, v_lead: f64, p: &IdmParams) -> f64 {
    let dynamic = v * p.rho
        + 0.5 * p.a_max * p.rho * p.rho
        + (v + p.rho * p.a_max).powi(2) / (2.0 * p.b_safe)
        - v_lead * v_lead / (2.0 * p.b_max);
    p.s0.max(dynamic)
}

/// IDM acceleration clamped to `[-b_max, a_max]`.
///
/// `gap` is the bumper-to-bumper distance to the leader; pass
/// [`FREE_ROAD_GAP`] when there is none.
pub fn acceleration(v: f64, gap: f64, v_lead: f64, p: &IdmParams) -> Result<f64, IdmError> {
    if !(gap > 0.0) {
        return Err(IdmError::DegenerateGap(gap));
    }
    let interaction = desired_gap(v, v_lead, p) / gap;
    let raw = p.a_max * (1.0 - (v / p.v_desired).powi(4) - interaction * interaction);
    Ok(raw.clamp(-p.b_max, p.a_max))
}

pub fn free_road_acceleration(v: f64, p: &IdmParams) -> f64 {
    acceleration(v, FREE_ROAD_GAP, 0.0, p).expect("sentinel gap is positive")
}

/// Advances speed and position by one step: speed is integrated first and
/// floored at zero, position uses the mean of old and new speed.
pub fn integrate(x: f64, v: f64, a: f64, dt: f64) -> (f64, f64) {
    let v_next = (v + a * dt).max(0.0);
    (x + 0.5 * (v + v_next) * dt, v_next)
}
