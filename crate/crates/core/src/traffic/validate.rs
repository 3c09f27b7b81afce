use serde::Serialize;

use super::{BoundingBox, TrackSet};

/// Sanity bound on longitudinal speed.
pub const MAX_ABS_VX: f64 = 60.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub enum Violation {
    NonPositiveDt,
    DuplicateVehicle { vehicle_id: i64 },
    EmptyTrajectory { vehicle_id: i64 },
    BadDimensions { vehicle_id: i64 },
    FrameGap { vehicle_id: i64, frame: i64 },
    OutOfBounds { vehicle_id: i64, frame: i64 },
    SpeedBound { vehicle_id: i64, frame: i64 },
    LaneMismatch { vehicle_id: i64, frame: i64 },
    LaneSkip { vehicle_id: i64, frame: i64 },
    /// Bounding boxes of `a` and `b` (`a < b`) overlap at `frame`.
    Overlap { frame: i64, a: i64, b: i64 },
}

/// Lists every invariant violation of `ts`; empty iff the corpus is valid.
pub fn validate(ts: &TrackSet) -> Vec<Violation> {
    let mut out = Vec::new();
    if !(ts.dt.is_finite() && ts.dt > 0.0) {
        out.push(Violation::NonPositiveDt);
    }
    let g = &ts.geometry;

    for (i, v) in ts.vehicles.iter().enumerate() {
        let id = v.vehicle_id;
        if ts.vehicles[..i].iter().any(|o| o.vehicle_id == id) {
            out.push(Violation::DuplicateVehicle { vehicle_id: id });
        }
        if v.points.is_empty() {
            out.push(Violation::EmptyTrajectory { vehicle_id: id });
        }
        if !(v.length > 0.0 && v.width > 0.0) {
            out.push(Violation::BadDimensions { vehicle_id: id });
        }
        for (k, p) in v.points.iter().enumerate() {
            if k > 0 {
                let prev = &v.points[k - 1];
                if p.frame != prev.frame + 1 {
                    out.push(Violation::FrameGap { vehicle_id: id, frame: p.frame });
                }
                if p.lane_id.abs_diff(prev.lane_id) > 1 {
                    out.push(Violation::LaneSkip { vehicle_id: id, frame: p.frame });
                }
            }
            if !(0.0..=g.track_length).contains(&p.x) {
                out.push(Violation::OutOfBounds { vehicle_id: id, frame: p.frame });
            }
            if !(p.vx.abs() <= MAX_ABS_VX) {
                out.push(Violation::SpeedBound { vehicle_id: id, frame: p.frame });
            }
            if p.lane_id != g.lane_of(p.y) {
                out.push(Violation::LaneMismatch { vehicle_id: id, frame: p.frame });
            }
        }
    }

    out.extend(overlaps(ts));
    out
}

fn overlaps(ts: &TrackSet) -> Vec<Violation> {
    let (Some(first), Some(last)) = (
        ts.vehicles.iter().filter(|v| !v.points.is_empty()).map(|v| v.first_frame()).min(),
        ts.last_frame(),
    ) else {
        return Vec::new();
    };
    let span = (last - first + 1) as usize;
    let mut per_frame: Vec<Vec<(i64, BoundingBox)>> = vec![Vec::new(); span];
    for v in &ts.vehicles {
        for p in &v.points {
            if let Some(slot) = per_frame.get_mut((p.frame - first) as usize) {
                slot.push((
                    v.vehicle_id,
                    BoundingBox { x: p.x, y: p.y, length: v.length, width: v.width },
                ));
            }
        }
    }

    let mut out = Vec::new();
    for (offset, boxes) in per_frame.iter_mut().enumerate() {
        boxes.sort_by(|a, b| a.1.x.total_cmp(&b.1.x).then(a.0.cmp(&b.0)));
        let max_len = boxes.iter().map(|b| b.1.length).fold(0.0, f64::max);
        let mut frame_hits = Vec::new();
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                if boxes[j].1.x - boxes[i].1.x >= max_len {
                    break;
                }
                if boxes[i].1.overlaps(&boxes[j].1) {
                    let (a, b) = (boxes[i].0.min(boxes[j].0), boxes[i].0.max(boxes[j].0));
                    frame_hits.push((a, b));
                }
            }
        }
        frame_hits.sort_unstable();
        out.extend(frame_hits.into_iter().map(|(a, b)| Violation::Overlap {
            frame: first + offset as i64,
            a,
            b,
        }));
    }
    out
}
