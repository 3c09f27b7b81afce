//! Track corpora on disk: generation, the cut-in builder, manifest and
//! loading.

use std::path::{Path, PathBuf};
use std::sync::Arc;

use lanecross_core::idm;
use lanecross_core::seeding::{derive_seed, stream};
use lanecross_core::traffic::{
    generate_synthetic, parse_tracks, serialize_tracks, LaneChangeDirection, ScriptedLaneChange, SynthConfig,
    TrackSet, VehicleSpawn, LANE_COUNT,
};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::config::{CorpusKind, ExperimentConfig};
use crate::{read_file, write_file, CliError};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackEntry {
    pub index: usize,
    pub track_id: String,
    pub file: String,
    pub seed: u64,
    pub vehicles: usize,
    pub split: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusManifest {
    pub kind: CorpusKind,
    pub corpus_seed: u64,
    /// How per-track seeds are derived from the corpus seed.
    pub seed_scheme: String,
    pub dt: f64,
    pub lane_width: f64,
    pub track_length: f64,
    pub tracks: Vec<TrackEntry>,
}

pub fn tracks_dir(out: &Path) -> PathBuf {
    out.join("tracks")
}

pub fn track_seed(corpus_seed: u64, index: usize) -> u64 {
    derive_seed(corpus_seed, &[stream::TRACK, index as u64])
}

fn synth_base(cfg: &ExperimentConfig) -> Result<SynthConfig, CliError> {
    let s = &cfg.synth;
    Ok(SynthConfig {
        geometry: cfg.geometry()?,
        dt: cfg.geometry.dt,
        duration: s.duration,
        vehicle_count: s.vehicle_count,
        spawn_rate: s.spawn_rate,
        speed_min: s.speed_min,
        speed_max: s.speed_max,
        min_spawn_gap: s.min_spawn_gap,
        lane_change_events: s.lane_change_events.clone(),
        idm: cfg.idm.params(),
        max_attempts: s.max_attempts,
        ..SynthConfig::default()
    })
}

/// Ego position after `t` seconds of free-road IDM driving.
fn nominal_ego_x(cfg: &ExperimentConfig, t: f64) -> f64 {
    let p = cfg.idm.params();
    let dt = cfg.geometry.dt;
    let (mut x, mut v) = (cfg.cutin.ego_x, cfg.cutin.ego_v);
    for _ in 0..(t / dt).round() as usize {
        (x, v) = idm::integrate(x, v, idm::free_road_acceleration(v, &p), dt);
    }
    x
}

/// One candidate cut-in layout. Hazards change lanes when the nominal ego
/// is `lead` metres behind them; distractors are placed the same way but
/// never move laterally.
fn cutin_candidate<R: Rng>(cfg: &ExperimentConfig, rng: &mut R) -> SynthConfig {
    let c = &cfg.cutin;
    let n = c.hazards + c.distractors;
    let mut spawns = Vec::with_capacity(n);
    let mut events = Vec::new();
    let hazards = rand::seq::index::sample(rng, n, c.hazards.min(n)).into_vec();
    for i in 0..n {
        let t = if n > 1 {
            c.first_cut + (c.last_cut - c.first_cut) * i as f64 / (n - 1) as f64
        } else {
            c.first_cut
        };
        let t = t + rng.random_range(-0.5..=0.5);
        let speed = rng.random_range(c.speed_min..=c.speed_max);
        let lead = rng.random_range(c.lead_min..=c.lead_max);
        let x = (nominal_ego_x(cfg, t) + lead - speed * t).max(0.0);
        let lane = rng.random_range(0..LANE_COUNT);
        spawns.push(VehicleSpawn { lane, x, speed });
        if hazards.contains(&i) {
            let direction = match lane {
                0 => LaneChangeDirection::Left,
                l if l + 1 == LANE_COUNT => LaneChangeDirection::Right,
                _ if rng.random::<bool>() => LaneChangeDirection::Left,
                _ => LaneChangeDirection::Right,
            };
            events.push(ScriptedLaneChange {
                vehicle: i,
                start: t.max(0.0),
                direction,
                duration: c.change_duration,
                from_lane: Some(lane),
            });
        }
    }
    // A slow vehicle starting behind the ego keeps the recording alive until
    // `duration` so episodes end at the track end rather than at the data end.
    let lane = rng.random_range(0..LANE_COUNT);
    spawns.push(VehicleSpawn { lane, x: 0.0, speed: 0.9 * cfg.geometry.track_length / c.duration });
    SynthConfig {
        duration: c.duration,
        vehicle_count: n + 1,
        spawns,
        lane_change_events: events,
        max_attempts: 1,
        speed_min: c.speed_min,
        speed_max: c.speed_max,
        ..synth_base(cfg).expect("geometry validated with the config")
    }
}

/// Cut-in track `seed`: candidates are drawn until one passes validation.
pub fn cutin_track(cfg: &ExperimentConfig, seed: u64) -> Result<TrackSet, CliError> {
    let mut rng = lanecross_core::seeding::rng_for(seed, &[stream::TRACK]);
    for attempt in 0..cfg.cutin.max_attempts.max(1) {
        let synth = cutin_candidate(cfg, &mut rng);
        if let Ok(ts) = generate_synthetic(&synth, derive_seed(seed, &[attempt as u64])) {
            return Ok(ts);
        }
    }
    Err(CliError::Config(format!("no collision-free cut-in layout within {} attempts", cfg.cutin.max_attempts)))
}

pub fn build_track(cfg: &ExperimentConfig, index: usize) -> Result<TrackSet, CliError> {
    let seed = track_seed(cfg.corpus.seed, index);
    let ts = match cfg.corpus.kind {
        CorpusKind::Empty => TrackSet::empty("", cfg.geometry()?, cfg.geometry.dt),
        CorpusKind::Synthetic => {
            generate_synthetic(&synth_base(cfg)?, seed).map_err(|e| CliError::Config(e.to_string()))?
        }
        CorpusKind::Cutin => cutin_track(cfg, seed)?,
    };
    Ok(ts.with_id(format!("track_{index:03}")))
}

pub fn build_corpus(cfg: &ExperimentConfig) -> Result<Vec<TrackSet>, CliError> {
    (0..cfg.corpus.tracks).map(|i| build_track(cfg, i)).collect()
}

/// Writes one CSV per track and the manifest under `<out>/tracks`.
pub fn write_corpus(cfg: &ExperimentConfig, out: &Path) -> Result<CorpusManifest, CliError> {
    let dir = tracks_dir(out);
    let (train, _) = cfg.split();
    let mut entries = Vec::new();
    for (index, ts) in build_corpus(cfg)?.iter().enumerate() {
        let file = format!("{}.csv", ts.track_id);
        write_file(&dir.join(&file), serialize_tracks(ts))?;
        entries.push(TrackEntry {
            index,
            track_id: ts.track_id.clone(),
            file,
            seed: track_seed(cfg.corpus.seed, index),
            vehicles: ts.vehicles.len(),
            split: if train.contains(&index) { "train" } else { "test" }.into(),
        });
    }
    let manifest = CorpusManifest {
        kind: cfg.corpus.kind,
        corpus_seed: cfg.corpus.seed,
        seed_scheme: "splitmix64(corpus_seed, [TRACK, index])".into(),
        dt: cfg.geometry.dt,
        lane_width: cfg.geometry.lane_width,
        track_length: cfg.geometry.track_length,
        tracks: entries,
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_file(&dir.join(MANIFEST), json + "\n")?;
    Ok(manifest)
}

/// Loads the corpus written by [`write_corpus`], indexed by track index.
pub fn load_corpus(cfg: &ExperimentConfig, out: &Path) -> Result<Vec<Arc<TrackSet>>, CliError> {
    let dir = tracks_dir(out);
    let manifest: CorpusManifest = serde_json::from_str(&read_file(&dir.join(MANIFEST))?)
        .map_err(|e| CliError::io(&dir.join(MANIFEST), e))?;
    if manifest.tracks.len() != cfg.corpus.tracks {
        return Err(CliError::Config(format!(
            "corpus on disk has {} tracks, config expects {}",
            manifest.tracks.len(),
            cfg.corpus.tracks
        )));
    }
    let geometry = cfg.geometry()?;
    manifest
        .tracks
        .iter()
        .map(|t| {
            let path = dir.join(&t.file);
            let ts = parse_tracks(&read_file(&path)?, geometry.clone(), cfg.geometry.dt)
                .map_err(|e| CliError::io(&path, e))?;
            Ok(Arc::new(ts.with_id(t.track_id.clone())))
        })
        .collect()
}
