//! Trajectory corpora replayed as background traffic.
//!
//! A [`TrackSet`] is one recorded (or synthesized) stretch of straight
//! three-lane highway: lane geometry, a frame clock, and the per-frame
//! positions of every vehicle. Positions refer to the centre of the vehicle's
//! bounding box; `x` runs along the road and `y` across it.

mod csv;
mod synth;
mod validate;

pub use self::csv::{parse_tracks, serialize_tracks, CSV_HEADER};
pub use self::synth::{
    generate_synthetic, LaneChangeDirection, ScriptedLaneChange, SynthConfig, VehicleSpawn,
};
pub use self::validate::{validate, Violation, MAX_ABS_VX};

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub const LANE_COUNT: usize = 3;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum TrafficError {
    #[error("line {line}: malformed row: {reason}")]
    MalformedRow { line: usize, reason: String },
    #[error("vehicle {vehicle_id}: frame gap before frame {frame}")]
    FrameGap { vehicle_id: i64, frame: i64 },
    #[error("vehicle {vehicle_id}: x out of bounds at frame {frame}")]
    OutOfBounds { vehicle_id: i64, frame: i64 },
    #[error("invalid geometry: {0}")]
    InvalidGeometry(String),
    #[error("invalid synthesis config: {0}")]
    InvalidConfig(String),
    #[error("could not generate a collision-free corpus after {attempts} attempts")]
    InfeasibleConfig { attempts: usize },
}

/// Straight three-lane road. Lane 0 is the rightmost lane; lane indices grow
/// to the left.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LaneGeometry {
    pub lane_width: f64,
    pub track_length: f64,
    lane_centers: [f64; LANE_COUNT],
}

impl LaneGeometry {
    pub fn new(lane_width: f64, track_length: f64) -> Result<Self, TrafficError> {
        if !(lane_width.is_finite() && lane_width > 0.0) {
            return Err(TrafficError::InvalidGeometry(format!(
                "lane_width must be positive, got {lane_width}"
            )));
        }
        if !(track_length.is_finite() && track_length > 0.0) {
            return Err(TrafficError::InvalidGeometry(format!(
                "track_length must be positive, got {track_length}"
            )));
        }
        let lane_centers = std::array::from_fn(|i| lane_width * (i as f64 + 0.5));
        Ok(Self {
            lane_width,
            track_length,
            lane_centers,
        })
    }

    pub fn lane_count(&self) -> usize {
        LANE_COUNT
    }

    pub fn lane_centers(&self) -> &[f64; LANE_COUNT] {
        &self.lane_centers
    }

    pub fn lane_center(&self, lane: usize) -> f64 {
        self.lane_centers[lane]
    }

    /// Nearest lane centre to `y`; ties go to the lower index.
    pub fn lane_of(&self, y: f64) -> usize {
        let mut best = 0;
        for (i, c) in self.lane_centers.iter().enumerate().skip(1) {
            if (y - c).abs() < (y - self.lane_centers[best]).abs() {
                best = i;
            }
        }
        best
    }
}

impl Default for LaneGeometry {
    fn default() -> Self {
        Self::new(3.5, 420.0).expect("default geometry is valid")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrackPoint {
    pub frame: i64,
    pub x: f64,
    pub y: f64,
    pub vx: f64,
    pub vy: f64,
    pub lane_id: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleTrack {
    pub vehicle_id: i64,
    pub length: f64,
    pub width: f64,
    pub points: Vec<TrackPoint>,
}

impl VehicleTrack {
    pub fn first_frame(&self) -> i64 {
        self.points.first().map_or(0, |p| p.frame)
    }

    pub fn last_frame(&self) -> i64 {
        self.points.last().map_or(-1, |p| p.frame)
    }

    /// Point at `frame`, assuming contiguous frames.
    pub fn at(&self, frame: i64) -> Option<&TrackPoint> {
        let offset = frame - self.first_frame();
        if offset < 0 {
            return None;
        }
        self.points.get(offset as usize).filter(|p| p.frame == frame)
    }
}

/// Axis-aligned box around a vehicle centre.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundingBox {
    pub x: f64,
    pub y: f64,
    pub length: f64,
    pub width: f64,
}

impl BoundingBox {
    /// Strict overlap: boxes that only touch do not overlap.
    pub fn overlaps(&self, other: &BoundingBox) -> bool {
        (self.x - other.x).abs() < 0.5 * (self.length + other.length)
            && (self.y - other.y).abs() < 0.5 * (self.width + other.width)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrackSet {
    pub track_id: String,
    pub geometry: LaneGeometry,
    /// Seconds per frame.
    pub dt: f64,
    /// Sorted by `vehicle_id`.
    pub vehicles: Vec<VehicleTrack>,
}

impl TrackSet {
    pub fn empty(track_id: impl Into<String>, geometry: LaneGeometry, dt: f64) -> Self {
        Self {
            track_id: track_id.into(),
            geometry,
            dt,
            vehicles: Vec::new(),
        }
    }

    pub fn with_id(mut self, track_id: impl Into<String>) -> Self {
        self.track_id = track_id.into();
        self
    }

    /// Last frame with any recorded vehicle, `None` for an empty corpus.
    pub fn last_frame(&self) -> Option<i64> {
        self.vehicles.iter().map(VehicleTrack::last_frame).max()
    }

    pub fn vehicle(&self, vehicle_id: i64) -> Option<&VehicleTrack> {
        self.vehicles
            .binary_search_by_key(&vehicle_id, |v| v.vehicle_id)
            .ok()
            .map(|i| &self.vehicles[i])
    }

    /// Vehicles present at `frame`, with their point.
    pub fn present_at(&self, frame: i64) -> impl Iterator<Item = (&VehicleTrack, &TrackPoint)> {
        self.vehicles
            .iter()
            .filter_map(move |v| v.at(frame).map(|p| (v, p)))
    }

    pub fn to_csv(&self) -> String {
        serialize_tracks(self)
    }
}
