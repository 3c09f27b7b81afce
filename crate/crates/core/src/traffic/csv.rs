use std::collections::BTreeMap;
use std::fmt::Write as _;

use super::{LaneGeometry, TrackPoint, TrackSet, TrafficError, VehicleTrack};

pub const CSV_HEADER: &str = "vehicle_id,frame,x,y,vx,vy,length,width";

struct Row {
    line: usize,
    frame: i64,
    x: f64,
    y: f64,
    vx: f64,
    vy: f64,
    length: f64,
    width: f64,
}

fn malformed(line: usize, reason: impl Into<String>) -> TrafficError {
    TrafficError::MalformedRow {
        line,
        reason: reason.into(),
    }
}

fn parse_float(field: &str, name: &str, line: usize) -> Result<f64, TrafficError> {
    let v: f64 = field
        .trim()
        .parse()
        .map_err(|_| malformed(line, format!("{name}: not a number: {field:?}")))?;
    if !v.is_finite() {
        return Err(malformed(line, format!("{name}: not finite")));
    }
    Ok(v)
}

fn parse_int(field: &str, name: &str, line: usize) -> Result<i64, TrafficError> {
    field
        .trim()
        .parse()
        .map_err(|_| malformed(line, format!("{name}: not an integer: {field:?}")))
}

/// Parses a corpus in the `vehicle_id,frame,x,y,vx,vy,length,width` schema.
///
/// Rows may arrive in any order; they are grouped by vehicle and sorted by
/// frame. Lane ids are derived from `y`. The returned set is named
/// `"unnamed"`; use [`TrackSet::with_id`] to label it.
pub fn parse_tracks(
    csv_text: &str,
    geometry: LaneGeometry,
    dt: f64,
) -> Result<TrackSet, TrafficError> {
    if !(dt.is_finite() && dt > 0.0) {
        return Err(TrafficError::InvalidGeometry(format!(
            "dt must be positive, got {dt}"
        )));
    }
    let mut lines = csv_text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h.trim_end_matches('\r') == CSV_HEADER => {}
        Some((_, h)) => return Err(malformed(1, format!("unexpected header {h:?}"))),
        None => return Err(malformed(1, "missing header")),
    }

    let mut grouped: BTreeMap<i64, Vec<Row>> = BTreeMap::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let text = raw.trim_end_matches('\r');
        if text.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = text.split(',').collect();
        if fields.len() != 8 {
            return Err(malformed(
                line,
                format!("expected 8 fields, found {}", fields.len()),
            ));
        }
        let vehicle_id = parse_int(fields[0], "vehicle_id", line)?;
        let row = Row {
            line,
            frame: parse_int(fields[1], "frame", line)?,
            x: parse_float(fields[2], "x", line)?,
            y: parse_float(fields[3], "y", line)?,
            vx: parse_float(fields[4], "vx", line)?,
            vy: parse_float(fields[5], "vy", line)?,
            length: parse_float(fields[6], "length", line)?,
            width: parse_float(fields[7], "width", line)?,
        };
        grouped.entry(vehicle_id).or_default().push(row);
    }

    let mut vehicles = Vec::with_capacity(grouped.len());
    for (vehicle_id, mut rows) in grouped {
        rows.sort_by_key(|r| r.frame);
        let (length, width) = (rows[0].length, rows[0].width);
        if length <= 0.0 || width <= 0.0 {
            return Err(malformed(rows[0].line, "vehicle dimensions must be positive"));
        }
        let mut points = Vec::with_capacity(rows.len());
        for (i, r) in rows.iter().enumerate() {
            if i > 0 && r.frame != rows[i - 1].frame + 1 {
                return Err(TrafficError::FrameGap {
                    vehicle_id,
                    frame: r.frame,
                });
            }
            if r.length != length || r.width != width {
                return Err(malformed(r.line, "vehicle dimensions change between rows"));
            }
            if r.x < 0.0 || r.x > geometry.track_length {
                return Err(TrafficError::OutOfBounds {
                    vehicle_id,
                    frame: r.frame,
                });
            }
            points.push(TrackPoint {
                frame: r.frame,
                x: r.x,
                y: r.y,
                vx: r.vx,
                vy: r.vy,
                lane_id: geometry.lane_of(r.y),
            });
        }
        vehicles.push(VehicleTrack {
            vehicle_id,
            length,
            width,
            points,
        });
    }

    Ok(TrackSet {
        track_id: "unnamed".to_string(),
        geometry,
        dt,
        vehicles,
    })
}

/// Canonical text form: header, rows ordered by vehicle then frame, floats
/// with six decimals, LF line endings.
pub fn serialize_tracks(ts: &TrackSet) -> String {
    let rows: usize = ts.vehicles.iter().map(|v| v.points.len()).sum();
    let mut out = String::with_capacity(64 * (rows + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    let mut vehicles: Vec<&VehicleTrack> = ts.vehicles.iter().collect();
    vehicles.sort_by_key(|v| v.vehicle_id);
    for v in vehicles {
        for p in &v.points {
            let _ = writeln!(
                out,
                "{},{},{:.6},{:.6},{:.6},{:.6},{:.6},{:.6}",
                v.vehicle_id, p.frame, p.x, p.y, p.vx, p.vy, v.length, v.width
            );
        }
    }
    out
}
