//! Manoeuvre intention of surrounding vehicles.
//!
//! An [`Intention`] holds class probabilities for lane keeping, a change to
//! the left and a change to the right, plus the time until the change (TTLC).
//! The ground-truth oracle reads it off the replayed trajectory: the onset is
//! the first frame whose lane id differs from the lane id at query time. A
//! degradation model perturbs oracle output to emulate an imperfect
//! predictor.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::traffic::{TrackSet, VehicleTrack};

pub const DEFAULT_HORIZON: f64 = 5.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum IntentionError {
    #[error("unknown vehicle {0}")]
    UnknownVehicle(i64),
    #[error("vehicle {vehicle_id} has no data at t = {t} s")]
    TimeOutOfRange { vehicle_id: i64, t: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Manoeuvre {
    LaneKeep,
    LeftChange,
    RightChange,
}

impl Manoeuvre {
    pub const ALL: [Manoeuvre; 3] = [Self::LaneKeep, Self::LeftChange, Self::RightChange];
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Intention {
    pub p_lk: f64,
    pub p_llc: f64,
    pub p_rlc: f64,
    /// Seconds until the predicted change, `horizon` when none is foreseen.
    pub ttlc: f64,
    pub horizon: f64,
}

impl Intention {
    pub fn lane_keep(horizon: f64) -> Self {
        Self { p_lk: 1.0, p_llc: 0.0, p_rlc: 0.0, ttlc: horizon, horizon }
    }

    pub fn certain(class: Manoeuvre, ttlc: f64, horizon: f64) -> Self {
        match class {
            Manoeuvre::LaneKeep => Self::lane_keep(horizon),
            Manoeuvre::LeftChange => Self { p_lk: 0.0, p_llc: 1.0, p_rlc: 0.0, ttlc: ttlc.clamp(0.0, horizon), horizon },
            Manoeuvre::RightChange => Self { p_lk: 0.0, p_llc: 0.0, p_rlc: 1.0, ttlc: ttlc.clamp(0.0, horizon), horizon },
        }
    }

    pub fn probability(&self, class: Manoeuvre) -> f64 {
        match class {
            Manoeuvre::LaneKeep => self.p_lk,
            Manoeuvre::LeftChange => self.p_llc,
            Manoeuvre::RightChange => self.p_rlc,
        }
    }

    /// Most likely class; ties resolve in the order lane keep, left, right.
    pub fn class(&self) -> Manoeuvre {
        let mut best = Manoeuvre::LaneKeep;
        for c in Manoeuvre::ALL {
            if self.probability(c) > self.probability(best) {
                best = c;
            }
        }
        best
    }

    pub fn is_valid(&self) -> bool {
        let ps = [self.p_lk, self.p_llc, self.p_rlc];
        ps.iter().all(|p| (0.0..=1.0).contains(p))
            && (ps.iter().sum::<f64>() - 1.0).abs() <= 1e-9
            && (0.0..=self.horizon).contains(&self.ttlc)
            && (self.class() != Manoeuvre::LaneKeep || self.ttlc == self.horizon)
    }
}

/// Oracle on a vehicle's own track, at a frame it is present in.
pub fn ground_truth_at_frame(track: &VehicleTrack, frame: i64, dt: f64, horizon: f64) -> Option<Intention> {
    let now = track.at(frame)?;
    let max_ahead = (horizon / dt + 1e-9).floor() as i64;
    let last = track.last_frame().min(frame + max_ahead);
    for f in frame + 1..=last {
        let p = track.at(f)?;
        if p.lane_id != now.lane_id {
            let class = if p.lane_id > now.lane_id {
                Manoeuvre::LeftChange
            } else {
                Manoeuvre::RightChange
            };
            return Some(Intention::certain(class, (f - frame) as f64 * dt, horizon));
        }
    }
    Some(Intention::lane_keep(horizon))
}

/// Ground-truth intention of `vehicle_id` at time `t` (seconds on the
/// corpus clock, rounded to the nearest frame).
pub fn ground_truth_ttlc(ts: &TrackSet, vehicle_id: i64, t: f64, horizon: f64) -> Result<Intention, IntentionError> {
    let track = ts.vehicle(vehicle_id).ok_or(IntentionError::UnknownVehicle(vehicle_id))?;
    let frame = (t / ts.dt).round() as i64;
    ground_truth_at_frame(track, frame, ts.dt, horizon)
        .ok_or(IntentionError::TimeOutOfRange { vehicle_id, t })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseConfig {
    pub class_flip_rate: f64,
    pub ttlc_sigma: f64,
    pub seed: u64,
}

impl Default for NoiseConfig {
    fn default() -> Self {
        Self { class_flip_rate: 0.1, ttlc_sigma: 0.5, seed: 0 }
    }
}

/// Emulates prediction error: flips the argmax class with probability
/// `class_flip_rate` (soft label 0.8 on the new class, 0.1 on the others)
/// and adds Gaussian noise to the TTLC.
pub fn degrade<R: Rng + ?Sized>(intent: &Intention, cfg: &NoiseConfig, rng: &mut R) -> Intention {
    let flip = rng.random::<f64>() < cfg.class_flip_rate;
    let pick_second = rng.random::<bool>();
    let noise = if cfg.ttlc_sigma > 0.0 {
        Normal::new(0.0, cfg.ttlc_sigma).expect("sigma is finite").sample(rng)
    } else {
        0.0
    };

    let mut out = *intent;
    if flip {
        let current = intent.class();
        let others: Vec<Manoeuvre> = Manoeuvre::ALL.into_iter().filter(|&c| c != current).collect();
        let target = others[usize::from(pick_second)];
        let p = |c: Manoeuvre| if c == target { 0.8 } else { 0.1 };
        out.p_lk = p(Manoeuvre::LaneKeep);
        out.p_llc = p(Manoeuvre::LeftChange);
        out.p_rlc = p(Manoeuvre::RightChange);
    }
    out.ttlc = if out.class() == Manoeuvre::LaneKeep {
        out.horizon
    } else {
        (intent.ttlc + noise).clamp(0.0, out.horizon)
    };
    out
}

/// Source of per-neighbour intentions for the environment.
pub trait IntentionProvider: Send {
    fn intention(&mut self, ts: &TrackSet, track: &VehicleTrack, frame: i64) -> Intention;

    /// Called on every episode reset with the episode seed.
    fn reset(&mut self, _seed: u64) {}

    fn horizon(&self) -> f64;
}

/// Always reports lane keeping.
#[derive(Debug, Clone)]
pub struct NoIntention {
    pub horizon: f64,
}

impl IntentionProvider for NoIntention {
    fn intention(&mut self, _ts: &TrackSet, _track: &VehicleTrack, _frame: i64) -> Intention {
        Intention::lane_keep(self.horizon)
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }
}

#[derive(Debug, Clone)]
pub struct GroundTruth {
    pub horizon: f64,
}

impl IntentionProvider for GroundTruth {
    fn intention(&mut self, ts: &TrackSet, track: &VehicleTrack, frame: i64) -> Intention {
        ground_truth_at_frame(track, frame, ts.dt, self.horizon).unwrap_or(Intention::lane_keep(self.horizon))
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }
}

/// Oracle output passed through [`degrade`]; the noise stream is reseeded
/// from `noise.seed` and the episode seed on every reset.
#[derive(Debug, Clone)]
pub struct Degraded {
    pub horizon: f64,
    pub noise: NoiseConfig,
    rng: rand_chacha::ChaCha8Rng,
}

impl Degraded {
    pub fn new(horizon: f64, noise: NoiseConfig) -> Self {
        let rng = crate::seeding::rng_for(noise.seed, &[crate::seeding::stream::INTENTION]);
        Self { horizon, noise, rng }
    }
}

impl IntentionProvider for Degraded {
    fn intention(&mut self, ts: &TrackSet, track: &VehicleTrack, frame: i64) -> Intention {
        let truth = ground_truth_at_frame(track, frame, ts.dt, self.horizon).unwrap_or(Intention::lane_keep(self.horizon));
        degrade(&truth, &self.noise, &mut self.rng)
    }

    fn reset(&mut self, seed: u64) {
        self.rng = crate::seeding::rng_for(self.noise.seed, &[crate::seeding::stream::INTENTION, seed]);
    }

    fn horizon(&self) -> f64 {
        self.horizon
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::traffic::{LaneGeometry, TrackPoint};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn track_with_lanes(lanes: &[usize]) -> TrackSet {
        let g = LaneGeometry::default();
        let points = lanes
            .iter()
            .enumerate()
            .map(|(f, &l)| TrackPoint {
                frame: f as i64,
                x: f as f64,
                y: g.lane_center(l),
                vx: 10.0,
                vy: 0.0,
                lane_id: l,
            })
            .collect();
        TrackSet {
            track_id: "t".into(),
            geometry: g,
            dt: 0.1,
            vehicles: vec![VehicleTrack { vehicle_id: 1, length: 5.0, width: 2.0, points }],
        }
    }

    #[test]
    fn lane_keeper_has_full_horizon() {
        let ts = track_with_lanes(&[1; 80]);
        let i = ground_truth_ttlc(&ts, 1, 0.0, 5.0).unwrap();
        assert_eq!(i, Intention::lane_keep(5.0));
        // Data ending inside the horizon without a change is also lane keeping.
        let i = ground_truth_ttlc(&ts, 1, 7.0, 5.0).unwrap();
        assert_eq!(i.class(), Manoeuvre::LaneKeep);
    }

    #[test]
    fn first_change_wins() {
        let mut lanes = vec![1; 10];
        lanes.extend([0; 20]);
        lanes.extend([1; 30]);
        let ts = track_with_lanes(&lanes);
        let i = ground_truth_ttlc(&ts, 1, 0.0, 5.0).unwrap();
        assert_eq!(i.class(), Manoeuvre::RightChange);
        assert!((i.ttlc - 1.0).abs() < 1e-12);
        let later = ground_truth_ttlc(&ts, 1, 1.5, 5.0).unwrap();
        assert_eq!(later.class(), Manoeuvre::LeftChange);
        assert!((later.ttlc - 1.5).abs() < 1e-9);
    }

    #[test]
    fn change_beyond_horizon_is_not_seen() {
        let mut lanes = vec![0; 60];
        lanes.extend([1; 10]);
        let ts = track_with_lanes(&lanes);
        assert_eq!(ground_truth_ttlc(&ts, 1, 0.0, 5.0).unwrap().class(), Manoeuvre::LaneKeep);
        let i = ground_truth_ttlc(&ts, 1, 1.0, 5.0).unwrap();
        assert_eq!(i.class(), Manoeuvre::LeftChange);
        assert!((i.ttlc - 5.0).abs() < 1e-9);
    }

    #[test]
    fn unknown_vehicle_and_time_are_errors() {
        let ts = track_with_lanes(&[1; 10]);
        assert_eq!(ground_truth_ttlc(&ts, 2, 0.0, 5.0), Err(IntentionError::UnknownVehicle(2)));
        assert!(matches!(ground_truth_ttlc(&ts, 1, 3.0, 5.0), Err(IntentionError::TimeOutOfRange { .. })));
    }

    #[test]
    fn zero_noise_is_identity() {
        let cfg = NoiseConfig { class_flip_rate: 0.0, ttlc_sigma: 0.0, seed: 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for intent in [Intention::lane_keep(5.0), Intention::certain(Manoeuvre::LeftChange, 2.3, 5.0)] {
            assert_eq!(degrade(&intent, &cfg, &mut rng), intent);
        }
    }

    #[test]
    fn forced_flip_never_keeps_lane_keep() {
        let cfg = NoiseConfig { class_flip_rate: 1.0, ttlc_sigma: 0.3, seed: 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..1000 {
            let out = degrade(&Intention::lane_keep(5.0), &cfg, &mut rng);
            assert_ne!(out.class(), Manoeuvre::LaneKeep);
            assert!(out.is_valid(), "{out:?}");
        }
    }

    #[test]
    fn flip_frequency_matches_rate() {
        // Binomial oracle: n = 1e4, p = 0.2, 3 sigma = 0.012.
        let cfg = NoiseConfig { class_flip_rate: 0.2, ttlc_sigma: 0.5, seed: 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let base = Intention::certain(Manoeuvre::RightChange, 1.2, 5.0);
        let n = 10_000;
        let flips = (0..n)
            .filter(|_| degrade(&base, &cfg, &mut rng).class() != Manoeuvre::RightChange)
            .count();
        let freq = flips as f64 / n as f64;
        assert!((freq - 0.2).abs() <= 0.012, "{freq}");
    }

    #[test]
    fn degraded_outputs_stay_on_the_simplex() {
        let cfg = NoiseConfig { class_flip_rate: 0.5, ttlc_sigma: 2.0, seed: 0 };
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for k in 0..2000 {
            let class = Manoeuvre::ALL[k % 3];
            let out = degrade(&Intention::certain(class, (k % 50) as f64 * 0.1, 5.0), &cfg, &mut rng);
            assert!(out.is_valid(), "{out:?}");
        }
    }
}
