//! Episodic lane-change environment.
//!
//! Background vehicles are replayed from a [`TrackSet`] and never react to
//! the ego vehicle. The ego follows IDM longitudinally; the agent only picks
//! lateral manoeuvres, one decision every `decision_interval` seconds, with
//! physics and collision checks at every corpus frame in between.

mod observation;
mod reward;

pub use observation::{
    encode_observation, observation_layout, EncodingScales, NeighborSlot, ObsMode, Observation, SlotKind,
};
pub use reward::{compute_reward, RewardConfig, StepEvents};

use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::idm::{self, IdmParams, FREE_ROAD_GAP};
use crate::intention::IntentionProvider;
use crate::seeding;
use crate::traffic::{BoundingBox, TrackSet, LANE_COUNT};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum EnvError {
    #[error("no collision-free spawn found after {attempts} attempts")]
    NoFreeSpawn { attempts: usize },
    #[error("episode is over; call reset")]
    EpisodeDone,
    #[error("environment has not been reset")]
    NotStarted,
    #[error("physics step {physics_dt} s does not match corpus frame time {track_dt} s")]
    ClockMismatch { physics_dt: f64, track_dt: f64 },
    #[error("invalid environment config: {0}")]
    InvalidConfig(String),
    #[error("no tracks to drive on")]
    NoTracks,
}

/// Agent action. Indices are fixed: LLC = 0, LK = 1, RLC = 2.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    Llc = 0,
    Lk = 1,
    Rlc = 2,
}

impl Action {
    pub const COUNT: usize = 3;
    pub const ALL: [Action; 3] = [Action::Llc, Action::Lk, Action::Rlc];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    fn target_lane(self, lane: usize) -> Option<usize> {
        match self {
            Action::Llc if lane + 1 < LANE_COUNT => Some(lane + 1),
            Action::Rlc if lane > 0 => Some(lane - 1),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LaneChange {
    pub from: usize,
    pub to: usize,
    /// Fraction of the manoeuvre completed, in `[0, 1]`.
    pub progress: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EgoState {
    pub x: f64,
    pub y: f64,
    pub v: f64,
    /// Source lane until the manoeuvre passes half way, target lane after.
    pub lane_id: usize,
    pub lane_change: Option<LaneChange>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Running,
    Collision,
    EndOfTrack,
    Truncated,
}

impl Outcome {
    /// Terminal in the MDP sense: no bootstrapping past this step.
    pub fn is_terminal(self) -> bool {
        matches!(self, Outcome::Collision | Outcome::EndOfTrack)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Outcome::Running => "running",
            Outcome::Collision => "collision",
            Outcome::EndOfTrack => "end_of_track",
            Outcome::Truncated => "truncated",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Observation,
    pub reward: f64,
    pub done: bool,
    pub outcome: Outcome,
    pub events: StepEvents,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub decision_interval: f64,
    pub physics_dt: f64,
    pub lane_change_duration: f64,
    pub radar_range: f64,
    pub obs_mode: ObsMode,
    pub ego_length: f64,
    pub ego_width: f64,
    /// Decisions after which an unfinished episode is truncated.
    pub max_steps: usize,
    pub idm: IdmParams,
    pub reward: RewardConfig,
}

impl Default for EnvConfig {
    fn default() -> Self {
        Self {
            decision_interval: 1.0,
            physics_dt: 0.1,
            lane_change_duration: 1.0,
            radar_range: 250.0,
            obs_mode: ObsMode::Base,
            ego_length: 5.0,
            ego_width: 2.0,
            max_steps: 200,
            idm: IdmParams::default(),
            reward: RewardConfig::default(),
        }
    }
}

impl EnvConfig {
    pub fn validate(&self) -> Result<(), EnvError> {
        let bad = |m: String| Err(EnvError::InvalidConfig(m));
        let positive = [
            ("decision_interval", self.decision_interval),
            ("physics_dt", self.physics_dt),
            ("lane_change_duration", self.lane_change_duration),
            ("radar_range", self.radar_range),
            ("ego_length", self.ego_length),
            ("ego_width", self.ego_width),
        ];
        for (name, v) in positive {
            if !(v.is_finite() && v > 0.0) {
                return bad(format!("{name} must be positive"));
            }
        }
        let ratio = self.decision_interval / self.physics_dt;
        if (ratio - ratio.round()).abs() > 1e-9 || ratio.round() < 1.0 {
            return bad("decision_interval must be a whole multiple of physics_dt".into());
        }
        if self.max_steps == 0 {
            return bad("max_steps must be at least 1".into());
        }
        self.idm.validate().map_err(|e| EnvError::InvalidConfig(e.to_string()))?;
        self.reward.validate().map_err(EnvError::InvalidConfig)
    }

    fn substeps(&self) -> usize {
        (self.decision_interval / self.physics_dt).round() as usize
    }

    fn scales(&self) -> EncodingScales {
        EncodingScales { radar_range: self.radar_range, v_desired: self.idm.v_desired }
    }
}

/// Ego placement. Ranges are sampled uniformly; equal bounds fix a value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpawnConfig {
    /// Fixed start lane, or uniform over all lanes when `None`.
    pub lane: Option<usize>,
    pub x_min: f64,
    pub x_max: f64,
    pub v_min: f64,
    pub v_max: f64,
    /// Bumper gap required to any vehicle sharing the ego's lateral extent.
    pub min_clearance: f64,
    /// Redraws after the first placement attempt.
    pub max_retries: usize,
}

impl Default for SpawnConfig {
    fn default() -> Self {
        Self {
            lane: None,
            x_min: 0.0,
            x_max: 20.0,
            v_min: 25.0,
            v_max: 32.0,
            min_clearance: 10.0,
            max_retries: 100,
        }
    }
}

impl SpawnConfig {
    pub fn fixed(lane: usize, x: f64, v: f64) -> Self {
        Self { lane: Some(lane), x_min: x, x_max: x, v_min: v, v_max: v, min_clearance: 0.0, max_retries: 0 }
    }

    fn draw<R: Rng>(&self, rng: &mut R) -> (usize, f64, f64) {
        let lane = self.lane.unwrap_or_else(|| rng.random_range(0..LANE_COUNT));
        let x = if self.x_max > self.x_min { rng.random_range(self.x_min..self.x_max) } else { self.x_min };
        let v = if self.v_max > self.v_min { rng.random_range(self.v_min..self.v_max) } else { self.v_min };
        (lane, x, v)
    }
}

struct Episode {
    ts: Arc<TrackSet>,
    ego: EgoState,
    frame: i64,
    steps: usize,
    done: bool,
}

pub struct HighwayEnv {
    cfg: EnvConfig,
    provider: Box<dyn IntentionProvider>,
    episode: Option<Episode>,
}

impl HighwayEnv {
    pub fn new(cfg: EnvConfig, provider: Box<dyn IntentionProvider>) -> Result<Self, EnvError> {
        cfg.validate()?;
        Ok(Self { cfg, provider, episode: None })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.cfg
    }

    pub fn ego(&self) -> Option<&EgoState> {
        self.episode.as_ref().map(|e| &e.ego)
    }

    pub fn frame(&self) -> Option<i64> {
        self.episode.as_ref().map(|e| e.frame)
    }

    fn ego_box(&self, ego: &EgoState) -> BoundingBox {
        BoundingBox { x: ego.x, y: ego.y, length: self.cfg.ego_length, width: self.cfg.ego_width }
    }

    /// Starts an episode on `ts`. The same `(ts, spawn, seed)` always yields
    /// the same initial state.
    pub fn reset(&mut self, ts: Arc<TrackSet>, spawn: &SpawnConfig, seed: u64) -> Result<Observation, EnvError> {
        if (ts.dt - self.cfg.physics_dt).abs() > 1e-9 {
            return Err(EnvError::ClockMismatch { physics_dt: self.cfg.physics_dt, track_dt: ts.dt });
        }
        let mut rng = seeding::rng_for(seed, &[seeding::stream::SPAWN]);
        let attempts = spawn.max_retries + 1;
        let mut placed = None;
        for _ in 0..attempts {
            let (lane, x, v) = spawn.draw(&mut rng);
            let ego = EgoState { x, y: ts.geometry.lane_center(lane), v, lane_id: lane, lane_change: None };
            if self.spawn_is_clear(&ts, &ego, spawn.min_clearance) {
                placed = Some(ego);
                break;
            }
        }
        let ego = placed.ok_or(EnvError::NoFreeSpawn { attempts })?;
        self.provider.reset(seed);
        self.episode = Some(Episode { ts, ego, frame: 0, steps: 0, done: false });
        Ok(self.observe())
    }

    fn spawn_is_clear(&self, ts: &TrackSet, ego: &EgoState, clearance: f64) -> bool {
        let b = self.ego_box(ego);
        ts.present_at(0).all(|(v, p)| {
            let lateral = (p.y - ego.y).abs() < 0.5 * (v.width + self.cfg.ego_width);
            let gap = (p.x - ego.x).abs() - 0.5 * (v.length + self.cfg.ego_length);
            let other = BoundingBox { x: p.x, y: p.y, length: v.length, width: v.width };
            !b.overlaps(&other) && !(lateral && gap < clearance)
        })
    }

    /// Six neighbour slots around the ego at the current frame.
    pub fn neighbors(&mut self) -> Result<[NeighborSlot; 6], EnvError> {
        let ep = self.episode.as_ref().ok_or(EnvError::NotStarted)?;
        let (ts, ego, frame) = (ep.ts.clone(), ep.ego, ep.frame);
        let r = self.cfg.radar_range;
        let horizon = self.provider.horizon();
        let mut best: [Option<(f64, i64, usize)>; 6] = [None; 6];
        for (idx, v) in ts.vehicles.iter().enumerate() {
            let Some(p) = v.at(frame) else { continue };
            let dx = p.x - ego.x;
            if dx.abs() > r {
                continue;
            }
            let offset = p.lane_id as i64 - ego.lane_id as i64;
            let lead = dx >= 0.0;
            let Some(slot) = SlotKind::ALL.iter().position(|s| s.lane_offset() == offset && s.is_lead() == lead)
            else {
                continue;
            };
            let key = (dx.abs(), v.vehicle_id, idx);
            let better = match best[slot] {
                None => true,
                Some((d, id, _)) => key.0 < d || (key.0 == d && key.1 < id),
            };
            if better {
                best[slot] = Some(key);
            }
        }
        let mut out = SlotKind::ALL.map(|s| NeighborSlot::absent(s, r, horizon));
        for (slot, found) in out.iter_mut().zip(best) {
            if let Some((_, id, idx)) = found {
                let v = &ts.vehicles[idx];
                let p = v.at(frame).expect("present");
                slot.present = true;
                slot.dx = p.x - ego.x;
                slot.dv = p.vx - ego.v;
                slot.vehicle_id = Some(id);
                if self.cfg.obs_mode == ObsMode::Ttlc {
                    slot.intention = self.provider.intention(&ts, v, frame);
                }
            }
        }
        Ok(out)
    }

    fn observe(&mut self) -> Observation {
        let slots = self.neighbors().expect("episode started");
        let ego = self.episode.as_ref().expect("episode started").ego;
        encode_observation(&slots, &ego, self.cfg.obs_mode, self.cfg.scales())
    }

    /// Same-lane leader: `(bumper gap, leader speed)`.
    fn leader(&self, ts: &TrackSet, ego: &EgoState, frame: i64) -> Option<(f64, f64)> {
        ts.present_at(frame)
            .filter(|(_, p)| p.lane_id == ego.lane_id && p.x > ego.x)
            .min_by(|a, b| a.1.x.total_cmp(&b.1.x))
            .map(|(v, p)| (p.x - ego.x - 0.5 * (v.length + self.cfg.ego_length), p.vx))
    }

    fn collides(&self, ts: &TrackSet, ego: &EgoState, frame: i64) -> bool {
        let b = self.ego_box(ego);
        ts.present_at(frame).any(|(v, p)| {
            b.overlaps(&BoundingBox { x: p.x, y: p.y, length: v.length, width: v.width })
        })
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        let ep = self.episode.as_ref().ok_or(EnvError::NotStarted)?;
        if ep.done {
            return Err(EnvError::EpisodeDone);
        }
        let ts = ep.ts.clone();
        let mut ego = ep.ego;
        let mut frame = ep.frame;
        let g = &ts.geometry;
        let cfg = self.cfg;

        let mut events = StepEvents::default();
        if action != Action::Lk {
            match action.target_lane(ego.lane_id) {
                Some(to) if ego.lane_change.is_none() => {
                    ego.lane_change = Some(LaneChange { from: ego.lane_id, to, progress: 0.0 });
                    events.initiated_lane_change = true;
                }
                _ => events.masked_lane_change = true,
            }
        }

        let data_end = ts.last_frame();
        let mut outcome = Outcome::Running;
        for _ in 0..cfg.substeps() {
            let a = match self.leader(&ts, &ego, frame) {
                Some((gap, v_lead)) if gap > 0.0 => idm::acceleration(ego.v, gap, v_lead, &cfg.idm)
                    .expect("positive gap"),
                Some(_) => -cfg.idm.b_max,
                None => idm::acceleration(ego.v, FREE_ROAD_GAP, 0.0, &cfg.idm).expect("positive gap"),
            };
            (ego.x, ego.v) = idm::integrate(ego.x, ego.v, a, cfg.physics_dt);

            if let Some(mut lc) = ego.lane_change {
                lc.progress = (lc.progress + cfg.physics_dt / cfg.lane_change_duration).min(1.0);
                // Snap values within rounding of completion.
                if lc.progress > 1.0 - 1e-9 {
                    lc.progress = 1.0;
                }
                let (y0, y1) = (g.lane_center(lc.from), g.lane_center(lc.to));
                ego.y = y0 + (y1 - y0) * lc.progress;
                ego.lane_id = if lc.progress > 0.5 { lc.to } else { lc.from };
                ego.lane_change = if lc.progress >= 1.0 { None } else { Some(lc) };
                if ego.lane_change.is_none() {
                    ego.y = y1;
                }
            }

            frame += 1;
            if self.collides(&ts, &ego, frame) {
                outcome = Outcome::Collision;
                break;
            }
            if ego.x >= g.track_length {
                outcome = Outcome::EndOfTrack;
                break;
            }
            if data_end.is_some_and(|last| frame > last) {
                outcome = Outcome::Truncated;
                break;
            }
        }

        let ep = self.episode.as_mut().expect("checked above");
        ep.steps += 1;
        if outcome == Outcome::Running && ep.steps >= cfg.max_steps {
            outcome = Outcome::Truncated;
        }
        events.collided = outcome == Outcome::Collision;
        events.reached_end = outcome == Outcome::EndOfTrack;
        ep.ego = ego;
        ep.frame = frame;
        ep.done = outcome != Outcome::Running;
        let done = ep.done;

        let reward = compute_reward(&events, &cfg.reward);
        let observation = self.observe();
        Ok(StepResult { observation, reward, done, outcome, events })
    }
}

/// An environment that can be driven episode by episode.
pub trait EpisodicEnv {
    type Error: std::error::Error + Send + Sync + 'static;

    /// Starts episode number `episode` and returns its first observation.
    fn begin_episode(&mut self, episode: usize) -> Result<Observation, Self::Error>;

    fn step(&mut self, action: Action) -> Result<StepResult, Self::Error>;
}

/// Cycles through a list of corpora, one per episode, with a spawn seed
/// derived from a base seed and the episode number.
pub struct TrackRotation {
    pub env: HighwayEnv,
    pub tracks: Vec<Arc<TrackSet>>,
    pub spawn: SpawnConfig,
    pub seed: u64,
    /// Added to the episode number before picking a track.
    pub offset: usize,
}

impl TrackRotation {
    pub fn new(env: HighwayEnv, tracks: Vec<Arc<TrackSet>>, spawn: SpawnConfig, seed: u64) -> Self {
        Self { env, tracks, spawn, seed, offset: 0 }
    }

    pub fn track_for(&self, episode: usize) -> Option<&Arc<TrackSet>> {
        (!self.tracks.is_empty()).then(|| &self.tracks[(episode + self.offset) % self.tracks.len()])
    }

    pub fn episode_seed(&self, episode: usize) -> u64 {
        seeding::derive_seed(self.seed, &[seeding::stream::SPAWN, episode as u64])
    }
}

impl EpisodicEnv for TrackRotation {
    type Error = EnvError;

    fn begin_episode(&mut self, episode: usize) -> Result<Observation, EnvError> {
        let ts = self.track_for(episode).ok_or(EnvError::NoTracks)?.clone();
        let seed = self.episode_seed(episode);
        self.env.reset(ts, &self.spawn, seed)
    }

    fn step(&mut self, action: Action) -> Result<StepResult, EnvError> {
        self.env.step(action)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::intention::{GroundTruth, NoIntention};
    use crate::traffic::{LaneGeometry, TrackPoint, VehicleTrack};

    fn env(mode: ObsMode) -> HighwayEnv {
        let cfg = EnvConfig { obs_mode: mode, ..EnvConfig::default() };
        let provider: Box<dyn IntentionProvider> = match mode {
            ObsMode::Base => Box::new(NoIntention { horizon: 5.0 }),
            ObsMode::Ttlc => Box::new(GroundTruth { horizon: 5.0 }),
        };
        HighwayEnv::new(cfg, provider).unwrap()
    }

    fn empty() -> Arc<TrackSet> {
        Arc::new(TrackSet::empty("empty", LaneGeometry::default(), 0.1))
    }

    fn stationary(id: i64, lane: usize, x: f64, frames: i64) -> VehicleTrack {
        let g = LaneGeometry::default();
        VehicleTrack {
            vehicle_id: id,
            length: 5.0,
            width: 2.0,
            points: (0..frames)
                .map(|f| TrackPoint { frame: f, x, y: g.lane_center(lane), vx: 0.0, vy: 0.0, lane_id: lane })
                .collect(),
        }
    }

    fn with(vehicles: Vec<VehicleTrack>) -> Arc<TrackSet> {
        Arc::new(TrackSet { track_id: "t".into(), geometry: LaneGeometry::default(), dt: 0.1, vehicles })
    }

    #[test]
    fn action_indices_are_fixed() {
        assert_eq!(Action::Llc.index(), 0);
        assert_eq!(Action::Lk.index(), 1);
        assert_eq!(Action::Rlc.index(), 2);
        assert_eq!(Action::from_index(3), None);
    }

    #[test]
    fn empty_road_observation_is_all_sentinels() {
        let mut e = env(ObsMode::Base);
        let obs = e.reset(empty(), &SpawnConfig::fixed(1, 0.0, 25.0), 1).unwrap();
        assert_eq!(obs.len(), 22);
        assert_eq!(&obs.features[..3], &[0.0, 1.0, 0.0]);
        let slots = e.neighbors().unwrap();
        assert!(slots.iter().all(|s| !s.present));
    }

    #[test]
    fn empty_road_lane_keeping_reaches_the_end() {
        let mut e = env(ObsMode::Base);
        let v = IdmParams::default().v_desired;
        e.reset(empty(), &SpawnConfig::fixed(1, 0.0, v), 1).unwrap();
        let mut total = 0.0;
        loop {
            let r = e.step(Action::Lk).unwrap();
            total += r.reward;
            if r.done {
                assert_eq!(r.outcome, Outcome::EndOfTrack);
                assert_eq!(r.reward, 10.0);
                break;
            }
            assert_eq!(r.reward, 0.0);
        }
        assert_eq!(total, 10.0);
        assert_eq!(e.step(Action::Lk), Err(EnvError::EpisodeDone));
    }

    #[test]
    fn lane_change_costs_a_small_penalty_and_moves_one_lane() {
        let mut e = env(ObsMode::Base);
        e.reset(empty(), &SpawnConfig::fixed(1, 0.0, 25.0), 1).unwrap();
        let r = e.step(Action::Llc).unwrap();
        assert_eq!(r.reward, -0.1);
        assert!(r.events.initiated_lane_change);
        let ego = e.ego().unwrap();
        assert_eq!(ego.lane_id, 2);
        assert!(ego.lane_change.is_none());
        assert!((ego.y - 8.75).abs() < 1e-12);
    }

    #[test]
    fn left_change_at_the_left_edge_is_a_free_no_op() {
        let mut e = env(ObsMode::Base);
        e.reset(empty(), &SpawnConfig::fixed(2, 0.0, 25.0), 1).unwrap();
        let r = e.step(Action::Llc).unwrap();
        assert_eq!(r.reward, 0.0);
        assert!(r.events.masked_lane_change && !r.events.initiated_lane_change);
        let ego = e.ego().unwrap();
        assert_eq!((ego.lane_id, ego.y), (2, 8.75));
    }

    #[test]
    fn command_during_a_manoeuvre_is_ignored() {
        let cfg = EnvConfig { lane_change_duration: 2.0, ..EnvConfig::default() };
        let mut e = HighwayEnv::new(cfg, Box::new(NoIntention { horizon: 5.0 })).unwrap();
        e.reset(empty(), &SpawnConfig::fixed(0, 0.0, 25.0), 1).unwrap();
        assert_eq!(e.step(Action::Llc).unwrap().reward, -0.1);
        let mid = *e.ego().unwrap();
        assert!((mid.lane_change.unwrap().progress - 0.5).abs() < 1e-9);
        assert_eq!(mid.lane_id, 0);
        let r = e.step(Action::Llc).unwrap();
        assert_eq!(r.reward, 0.0);
        assert!(r.events.masked_lane_change);
        assert_eq!(e.ego().unwrap().lane_id, 1);
    }

    #[test]
    fn stopped_vehicle_ahead_causes_collision() {
        // 6 m bumper gap at 30 m/s; braking at 5 m/s² needs 90 m.
        let ts = with(vec![stationary(1, 1, 11.0, 400)]);
        let mut e = env(ObsMode::Base);
        e.reset(ts, &SpawnConfig::fixed(1, 0.0, 30.0), 1).unwrap();
        let r = e.step(Action::Lk).unwrap();
        assert_eq!(r.outcome, Outcome::Collision);
        assert_eq!(r.reward, -10.0);
        assert!(r.done);
    }

    #[test]
    fn occupied_spawn_without_retries_fails() {
        let ts = with(vec![stationary(1, 1, 0.0, 10)]);
        let mut e = env(ObsMode::Base);
        assert_eq!(
            e.reset(ts, &SpawnConfig::fixed(1, 0.0, 20.0), 1),
            Err(EnvError::NoFreeSpawn { attempts: 1 })
        );
    }

    #[test]
    fn nearest_vehicle_fills_each_slot() {
        let ts = with(vec![
            stationary(1, 1, 90.0, 10),
            stationary(2, 1, 50.0, 10),
            stationary(3, 2, 30.0, 10),
            stationary(4, 0, 300.0, 10),
        ]);
        let mut e = env(ObsMode::Base);
        e.reset(ts, &SpawnConfig::fixed(1, 10.0, 20.0), 1).unwrap();
        let slots = e.neighbors().unwrap();
        assert_eq!(slots[0].vehicle_id, Some(2));
        assert_eq!(slots[0].dx, 40.0);
        assert_eq!(slots[0].dv, -20.0);
        assert!(!slots[1].present);
        assert_eq!(slots[2].vehicle_id, Some(3));
        // Vehicle 4 is beyond radar range.
        assert!(!slots[4].present && !slots[5].present);
    }

    #[test]
    fn equidistant_neighbours_prefer_lower_id() {
        let ts = with(vec![stationary(8, 0, 60.0, 10), stationary(5, 0, 60.0, 10)]);
        let mut e = env(ObsMode::Base);
        e.reset(ts, &SpawnConfig::fixed(0, 10.0, 20.0), 1).unwrap();
        assert_eq!(e.neighbors().unwrap()[0].vehicle_id, Some(5));
    }

    #[test]
    fn data_exhaustion_truncates() {
        let ts = with(vec![stationary(1, 0, 300.0, 15)]);
        let mut e = env(ObsMode::Base);
        e.reset(ts, &SpawnConfig::fixed(2, 0.0, 20.0), 1).unwrap();
        assert_eq!(e.step(Action::Lk).unwrap().outcome, Outcome::Running);
        let r = e.step(Action::Lk).unwrap();
        assert_eq!(r.outcome, Outcome::Truncated);
        assert_eq!(r.reward, 0.0);
    }

    #[test]
    fn clock_mismatch_is_rejected() {
        let ts = Arc::new(TrackSet::empty("e", LaneGeometry::default(), 0.04));
        let mut e = env(ObsMode::Base);
        assert!(matches!(
            e.reset(ts, &SpawnConfig::fixed(1, 0.0, 20.0), 1),
            Err(EnvError::ClockMismatch { .. })
        ));
    }
}
