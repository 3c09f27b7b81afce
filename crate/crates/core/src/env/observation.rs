use serde::{Deserialize, Serialize};

use super::EgoState;
use crate::intention::Intention;
use crate::traffic::LANE_COUNT;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ObsMode {
    Base,
    Ttlc,
}

impl ObsMode {
    pub const BASE_LEN: usize = LANE_COUNT + 1 + 6 * 3;
    pub const TTLC_LEN: usize = Self::BASE_LEN + 6 * 4;

    pub fn len(self) -> usize {
        match self {
            Self::Base => Self::BASE_LEN,
            Self::Ttlc => Self::TTLC_LEN,
        }
    }

    pub fn layout_version(self) -> u32 {
        match self {
            Self::Base => 1,
            Self::Ttlc => 2,
        }
    }
}

impl std::str::FromStr for ObsMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(Self::Base),
            "ttlc" => Ok(Self::Ttlc),
            other => Err(format!("unknown observation mode {other:?} (expected base or ttlc)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SlotKind {
    SameLead,
    SameRear,
    LeftLead,
    LeftRear,
    RightLead,
    RightRear,
}

impl SlotKind {
    pub const ALL: [SlotKind; 6] = [
        Self::SameLead,
        Self::SameRear,
        Self::LeftLead,
        Self::LeftRear,
        Self::RightLead,
        Self::RightRear,
    ];

    pub fn is_lead(self) -> bool {
        matches!(self, Self::SameLead | Self::LeftLead | Self::RightLead)
    }

    /// Lane offset relative to the ego lane (left is `+1`).
    pub fn lane_offset(self) -> i64 {
        match self {
            Self::SameLead | Self::SameRear => 0,
            Self::LeftLead | Self::LeftRear => 1,
            Self::RightLead | Self::RightRear => -1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Self::SameLead => "same_lead",
            Self::SameRear => "same_rear",
            Self::LeftLead => "left_lead",
            Self::LeftRear => "left_rear",
            Self::RightLead => "right_lead",
            Self::RightRear => "right_rear",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NeighborSlot {
    pub slot: SlotKind,
    pub present: bool,
    /// Neighbour minus ego, longitudinal (m).
    pub dx: f64,
    /// Neighbour minus ego speed (m/s).
    pub dv: f64,
    pub intention: Intention,
    pub vehicle_id: Option<i64>,
}

impl NeighborSlot {
    pub fn absent(slot: SlotKind, radar_range: f64, horizon: f64) -> Self {
        Self {
            slot,
            present: false,
            dx: if slot.is_lead() { radar_range } else { -radar_range },
            dv: 0.0,
            intention: Intention::lane_keep(horizon),
            vehicle_id: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Observation {
    pub features: Vec<f64>,
    pub layout_version: u32,
}

impl Observation {
    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }
}

/// Scales used by [`encode_observation`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EncodingScales {
    pub radar_range: f64,
    pub v_desired: f64,
}

/// Builds the feature vector.
///
/// Base layout: ego lane one-hot, ego speed over desired speed, then per
/// slot `[present, dx/R, dv/v_desired]`. The TTLC layout appends per slot
/// `[P_LK, P_LLC, P_RLC, ttlc/horizon]`. Scaled entries are clamped to
/// `[-1, 1]`.
pub fn encode_observation(
    slots: &[NeighborSlot; 6],
    ego: &EgoState,
    mode: ObsMode,
    scales: EncodingScales,
) -> Observation {
    let mut f = Vec::with_capacity(mode.len());
    f.extend((0..LANE_COUNT).map(|l| if l == ego.lane_id { 1.0 } else { 0.0 }));
    f.push((ego.v / scales.v_desired).clamp(-1.0, 1.0));
    for s in slots {
        f.push(if s.present { 1.0 } else { 0.0 });
        f.push((s.dx / scales.radar_range).clamp(-1.0, 1.0));
        f.push((s.dv / scales.v_desired).clamp(-1.0, 1.0));
    }
    if mode == ObsMode::Ttlc {
        for s in slots {
            let i = &s.intention;
            f.extend([i.p_lk, i.p_llc, i.p_rlc, (i.ttlc / i.horizon).clamp(0.0, 1.0)]);
        }
    }
    debug_assert_eq!(f.len(), mode.len());
    Observation {
        features: f,
        layout_version: mode.layout_version(),
    }
}

/// Index-to-feature table for `mode`.
pub fn observation_layout(mode: ObsMode) -> Vec<String> {
    let mut names: Vec<String> = (0..LANE_COUNT).map(|l| format!("ego_lane_{l}")).collect();
    names.push("ego_speed".into());
    for s in SlotKind::ALL {
        for field in ["present", "dx", "dv"] {
            names.push(format!("{}_{field}", s.name()));
        }
    }
    if mode == ObsMode::Ttlc {
        for s in SlotKind::ALL {
            for field in ["p_lk", "p_llc", "p_rlc", "ttlc"] {
                names.push(format!("{}_{field}", s.name()));
            }
        }
    }
    names
}
