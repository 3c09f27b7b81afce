//! Synthetic corpus generation.
//!
//! Vehicles drive with IDM against the nearest leader that shares one of
//! their occupied lanes (both lanes while a lane change is in progress).
//! Scripted lane changes move a vehicle laterally at constant speed from its
//! lane centre to the adjacent one. A generated corpus that fails
//! [`validate`] is thrown away and redrawn from the same random stream.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{validate, LaneGeometry, TrackPoint, TrackSet, TrafficError, VehicleTrack, LANE_COUNT};
use crate::idm::{self, IdmParams, FREE_ROAD_GAP};
use crate::seeding;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LaneChangeDirection {
    /// Towards the higher lane index.
    Left,
    Right,
}

impl LaneChangeDirection {
    pub fn target(self, lane: usize) -> Option<usize> {
        match self {
            Self::Left if lane + 1 < LANE_COUNT => Some(lane + 1),
            Self::Right if lane > 0 => Some(lane - 1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScriptedLaneChange {
    /// Index of the vehicle in generation order (vehicle id minus one).
    pub vehicle: usize,
    /// Time the lateral ramp starts (s).
    pub start: f64,
    pub direction: LaneChangeDirection,
    /// Ramp duration (s).
    pub duration: f64,
    /// Lane the vehicle drives in before the change; chosen at random when
    /// absent.
    #[serde(default)]
    pub from_lane: Option<usize>,
}

/// Explicit initial placement at time zero.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VehicleSpawn {
    pub lane: usize,
    pub x: f64,
    /// Initial and desired speed (m/s).
    pub speed: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthConfig {
    pub geometry: LaneGeometry,
    pub dt: f64,
    /// Recorded time span (s).
    pub duration: f64,
    pub vehicle_count: usize,
    /// Vehicles per second entering at `x = 0`. Zero places every vehicle on
    /// the road at time zero.
    pub spawn_rate: f64,
    pub speed_min: f64,
    pub speed_max: f64,
    pub vehicle_length: f64,
    pub vehicle_width: f64,
    /// Bumper-to-bumper clearance required when a vehicle appears.
    pub min_spawn_gap: f64,
    pub lane_change_events: Vec<ScriptedLaneChange>,
    /// Placements for the first `spawns.len()` vehicles.
    pub spawns: Vec<VehicleSpawn>,
    pub idm: IdmParams,
    pub max_attempts: usize,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            geometry: LaneGeometry::default(),
            dt: 0.1,
            duration: 30.0,
            vehicle_count: 10,
            spawn_rate: 0.0,
            speed_min: 20.0,
            speed_max: 30.0,
            vehicle_length: 5.0,
            vehicle_width: 2.0,
            min_spawn_gap: 10.0,
            lane_change_events: Vec::new(),
            spawns: Vec::new(),
            idm: IdmParams::default(),
            max_attempts: 50,
        }
    }
}

impl SynthConfig {
    fn check(&self) -> Result<(), TrafficError> {
        let bad = |m: String| Err(TrafficError::InvalidConfig(m));
        if !(self.dt > 0.0 && self.duration > 0.0) {
            return bad("dt and duration must be positive".into());
        }
        if !(self.speed_min > 0.0 && self.speed_min <= self.speed_max && self.speed_max <= 60.0) {
            return bad(format!("speed range [{}, {}] invalid", self.speed_min, self.speed_max));
        }
        if !(self.vehicle_length > 0.0 && self.vehicle_width > 0.0) {
            return bad("vehicle dimensions must be positive".into());
        }
        if self.spawn_rate < 0.0 || self.min_spawn_gap < 0.0 {
            return bad("spawn_rate and min_spawn_gap must be non-negative".into());
        }
        if self.spawns.len() > self.vehicle_count {
            return bad("more explicit spawns than vehicles".into());
        }
        for s in &self.spawns {
            if s.lane >= LANE_COUNT || !(0.0..=self.geometry.track_length).contains(&s.x) || s.speed <= 0.0 {
                return bad(format!("invalid spawn {s:?}"));
            }
        }
        self.idm.validate().map_err(|e| TrafficError::InvalidConfig(e.to_string()))?;
        for e in &self.lane_change_events {
            if e.vehicle >= self.vehicle_count {
                return bad(format!("lane change for unknown vehicle index {}", e.vehicle));
            }
            if !(e.start >= 0.0 && e.duration > 0.0) {
                return bad("lane change start must be >= 0 and duration > 0".into());
            }
            if let Some(l) = e.from_lane {
                if e.direction.target(l).is_none() {
                    return bad(format!("cannot change {:?} from lane {l}", e.direction));
                }
            }
        }
        for (i, a) in self.lane_change_events.iter().enumerate() {
            for b in &self.lane_change_events[i + 1..] {
                if a.vehicle == b.vehicle
                    && a.start < b.start + b.duration
                    && b.start < a.start + a.duration
                {
                    return bad(format!("overlapping lane changes for vehicle index {}", a.vehicle));
                }
            }
        }
        Ok(())
    }

    fn frame_of(&self, t: f64) -> i64 {
        (t / self.dt + 1e-9).floor() as i64
    }

    fn events_for(&self, vehicle: usize) -> Vec<&ScriptedLaneChange> {
        let mut v: Vec<_> = self.lane_change_events.iter().filter(|e| e.vehicle == vehicle).collect();
        v.sort_by(|a, b| a.start.total_cmp(&b.start));
        v
    }
}

/// Generates a collision-free corpus; identical `(cfg, seed)` give identical
/// output.
pub fn generate_synthetic(cfg: &SynthConfig, seed: u64) -> Result<TrackSet, TrafficError> {
    cfg.check()?;
    let track_id = format!("synthetic-{seed}");
    if cfg.vehicle_count == 0 {
        return Ok(TrackSet::empty(track_id, cfg.geometry.clone(), cfg.dt));
    }
    let mut rng = seeding::rng_for(seed, &[seeding::stream::TRACK]);
    for _ in 0..cfg.max_attempts.max(1) {
        if let Some(vehicles) = attempt(cfg, &mut rng) {
            let ts = TrackSet {
                track_id: track_id.clone(),
                geometry: cfg.geometry.clone(),
                dt: cfg.dt,
                vehicles,
            };
            if validate(&ts).is_empty() {
                return Ok(ts);
            }
        }
    }
    Err(TrafficError::InfeasibleConfig { attempts: cfg.max_attempts.max(1) })
}

struct Sim {
    spawn_frame: i64,
    lane: usize,
    x: f64,
    y: f64,
    v: f64,
    idm: IdmParams,
    active: bool,
    exited: bool,
    points: Vec<TrackPoint>,
    /// (start frame, end frame, source lane, target lane)
    changes: Vec<(i64, i64, usize, usize)>,
}

impl Sim {
    fn occupied(&self, frame: i64) -> (usize, usize) {
        for &(s, e, from, to) in &self.changes {
            if frame >= s && frame < e {
                return (from.min(to), from.max(to));
            }
        }
        (self.lane, self.lane)
    }
}

fn initial_lane(cfg: &SynthConfig, index: usize, rng: &mut ChaCha8Rng) -> usize {
    if let Some(first) = cfg.events_for(index).first() {
        if let Some(l) = first.from_lane {
            return l;
        }
        return match first.direction {
            LaneChangeDirection::Left => rng.random_range(0..LANE_COUNT - 1),
            LaneChangeDirection::Right => rng.random_range(1..LANE_COUNT),
        };
    }
    rng.random_range(0..LANE_COUNT)
}

fn gap_ok(sims: &[Sim], lane: usize, x: f64, len: f64, min_gap: f64) -> bool {
    sims.iter()
        .filter(|s| s.active && s.lane == lane)
        .all(|s| (s.x - x).abs() - len >= min_gap)
}

fn attempt(cfg: &SynthConfig, rng: &mut ChaCha8Rng) -> Option<Vec<VehicleTrack>> {
    let g = &cfg.geometry;
    let len = cfg.vehicle_length;
    let n_frames = (cfg.duration / cfg.dt).round() as i64;

    let mut sims: Vec<Sim> = Vec::with_capacity(cfg.vehicle_count);
    for i in 0..cfg.vehicle_count {
        let events = cfg.events_for(i);
        let (lane, x, speed, spawn_frame) = if let Some(s) = cfg.spawns.get(i) {
            (s.lane, s.x, s.speed, 0)
        } else {
            let lane = initial_lane(cfg, i, rng);
            let speed = rng.random_range(cfg.speed_min..=cfg.speed_max);
            if cfg.spawn_rate > 0.0 {
                let t = (i - cfg.spawns.len()) as f64 / cfg.spawn_rate;
                (lane, 0.0, speed, cfg.frame_of(t))
            } else {
                // Scripted vehicles must stay on the road until their last change ends.
                let busy_until = events.last().map_or(0.0, |e| e.start + e.duration);
                let x_max = (g.track_length - speed * busy_until - len).max(0.0);
                let mut placed = None;
                for _ in 0..100 {
                    let x = rng.random_range(0.0..=x_max);
                    if gap_ok(&sims, lane, x, len, cfg.min_spawn_gap) {
                        placed = Some(x);
                        break;
                    }
                }
                (lane, placed?, speed, 0)
            }
        };
        let mut changes = Vec::new();
        let mut cur = lane;
        for e in &events {
            if let Some(from) = e.from_lane {
                if from != cur {
                    return None;
                }
            }
            let to = e.direction.target(cur)?;
            let start = cfg.frame_of(e.start);
            let end = start + (e.duration / cfg.dt).round().max(1.0) as i64;
            changes.push((start, end, cur, to));
            cur = to;
        }
        let active = spawn_frame == 0;
        if active && !gap_ok(&sims, lane, x, len, 0.0) {
            return None;
        }
        sims.push(Sim {
            spawn_frame,
            lane,
            x,
            y: g.lane_center(lane),
            v: speed,
            idm: cfg.idm.with_desired_speed(speed),
            active,
            exited: false,
            points: Vec::new(),
            changes,
        });
    }

    for frame in 0..=n_frames {
        // Entries at x = 0 wait until the lane is clear.
        for i in 0..sims.len() {
            let s = &sims[i];
            if !s.active && !s.exited && frame >= s.spawn_frame {
                if gap_ok(&sims, s.lane, 0.0, len, cfg.min_spawn_gap) {
                    sims[i].active = true;
                    sims[i].spawn_frame = frame;
                }
            }
        }

        // Lateral state at this frame.
        for s in sims.iter_mut().filter(|s| s.active) {
            let mut vy = 0.0;
            let mut lane = s.lane;
            let mut y = g.lane_center(s.lane);
            for &(start, end, from, to) in &s.changes {
                if frame >= end {
                    lane = to;
                    y = g.lane_center(to);
                } else if frame >= start {
                    let progress = (frame - start) as f64 / (end - start) as f64;
                    y = g.lane_center(from) + (g.lane_center(to) - g.lane_center(from)) * progress;
                    vy = (g.lane_center(to) - g.lane_center(from)) / ((end - start) as f64 * cfg.dt);
                    lane = from;
                    break;
                } else {
                    break;
                }
            }
            s.lane = lane;
            s.y = y;
            if s.x > g.track_length {
                s.active = false;
                s.exited = true;
                continue;
            }
            s.points.push(TrackPoint {
                frame,
                x: s.x,
                y,
                vx: s.v,
                vy,
                lane_id: g.lane_of(y),
            });
        }

        // Longitudinal update.
        let accels: Vec<f64> = (0..sims.len())
            .map(|i| {
                let me = &sims[i];
                if !me.active {
                    return 0.0;
                }
                let (lo, hi) = me.occupied(frame);
                let leader = sims
                    .iter()
                    .enumerate()
                    .filter(|&(j, o)| {
                        j != i && o.active && o.x > me.x && {
                            let (olo, ohi) = o.occupied(frame);
                            olo <= hi && lo <= ohi
                        }
                    })
                    .min_by(|a, b| a.1.x.total_cmp(&b.1.x));
                let (gap, v_lead) = match leader {
                    Some((_, o)) => (o.x - me.x - len, o.v),
                    None => (FREE_ROAD_GAP, 0.0),
                };
                idm::acceleration(me.v, gap, v_lead, &me.idm).unwrap_or(-me.idm.b_max)
            })
            .collect();
        for (s, a) in sims.iter_mut().zip(accels) {
            if s.active {
                (s.x, s.v) = idm::integrate(s.x, s.v, a, cfg.dt);
            }
        }
    }

    // Every scripted change must be fully recorded.
    for s in sims.iter().filter(|s| !s.changes.is_empty()) {
        let (Some(first), Some(last)) = (s.points.first(), s.points.last()) else {
            return None;
        };
        for &(start, end, _, _) in &s.changes {
            if start < first.frame || end > last.frame {
                return None;
            }
        }
    }

    Some(
        sims.into_iter()
            .enumerate()
            .filter(|(_, s)| !s.points.is_empty())
            .map(|(i, s)| VehicleTrack {
                vehicle_id: i as i64 + 1,
                length: cfg.vehicle_length,
                width: cfg.vehicle_width,
                points: s.points,
            })
            .collect(),
    )
}
