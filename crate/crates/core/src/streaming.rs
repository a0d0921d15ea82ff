//! Adaptive-video data model: quality ladder, per-user segment schedules,
//! quality plans, and cumulative demand curves.

use crate::scenario::Scenario;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum StreamingError {
    #[error("quality ladder must be non-empty with strictly increasing positive bitrates")]
    BadLadder,
    #[error("quality level {0} outside ladder range 1..={1}")]
    LevelOutOfRange(u32, u32),
    #[error("segment duration must be a positive multiple of the slot duration")]
    BadSegmentDuration,
    #[error("user {0} streams no segments")]
    NoSegments(usize),
    #[error("plan covers {got} segments for user {user}, schedule expects {want}")]
    PlanMismatch { user: usize, got: usize, want: usize },
}

/// Discrete bitrate ladder; level `l` (1-based) maps to `bitrates_bps[l-1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityLadder {
    bitrates_bps: Vec<f64>,
}

impl QualityLadder {
    pub fn new(bitrates_bps: Vec<f64>) -> Result<Self, StreamingError> {
        if bitrates_bps.is_empty()
            || bitrates_bps[0] <= 0.0
            || bitrates_bps.windows(2).any(|w| w[0] >= w[1])
        {
            return Err(StreamingError::BadLadder);
        }
        Ok(Self { bitrates_bps })
    }

    /// The {0.25, 0.5, 0.75, 1} Mbit/s ladder.
    pub fn default_four_level() -> Self {
        Self::new(vec![0.25e6, 0.5e6, 0.75e6, 1.0e6]).expect("valid ladder")
    }

    pub fn q_max(&self) -> u32 {
        self.bitrates_bps.len() as u32
    }

    /// Bitrate of a 1-based level.
    pub fn bitrate_bps(&self, level: u32) -> Result<f64, StreamingError> {
        self.bitrates_bps
            .get(level.checked_sub(1).ok_or(StreamingError::LevelOutOfRange(0, self.q_max()))? as usize)
            .copied()
            .ok_or(StreamingError::LevelOutOfRange(level, self.q_max()))
    }

    pub fn bitrates_bps(&self) -> &[f64] {
        &self.bitrates_bps
    }
}

/// Per-user segmentation of the window.
///
/// Deadlines are absolute 1-based slots. A user entering at slot `e` with
/// per-segment duration `g` slots has segment `s` due at the end of slot
/// `e - 1 + s*g`: the first `s*g` slots of its presence carry the download.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentSchedule {
    /// Segment duration in seconds.
    pub seg_s: f64,
    /// Slot duration in seconds.
    pub slot_s: f64,
    users: Vec<UserSchedule>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserSchedule {
    pub entry_slot: usize,
    pub deadline_slots: Vec<usize>,
}

impl UserSchedule {
    pub fn n_segments(&self) -> usize {
        self.deadline_slots.len()
    }
}

impl SegmentSchedule {
    /// Derive the schedule from vehicle presence: `S_i = floor(presence / seg_s)`.
    pub fn from_scenario(scenario: &Scenario, seg_s: f64) -> Result<Self, StreamingError> {
        let slots_per_seg = slots_per_segment(seg_s, scenario.slot_s)?;
        let users = scenario
            .traces
            .iter()
            .map(|trace| {
                let n_seg = trace.presence_slots() / slots_per_seg;
                UserSchedule {
                    entry_slot: trace.entry_slot,
                    deadline_slots: (1..=n_seg)
                        .map(|s| trace.entry_slot - 1 + s * slots_per_seg)
                        .collect(),
                }
            })
            .collect();
        Ok(Self { seg_s, slot_s: scenario.slot_s, users })
    }

    /// Build from explicit per-user entries and segment counts using the
    /// standard deadline rule.
    pub fn from_entries(
        entries: &[(usize, usize)],
        seg_s: f64,
        slot_s: f64,
    ) -> Result<Self, StreamingError> {
        let slots_per_seg = slots_per_segment(seg_s, slot_s)?;
        let users = entries
            .iter()
            .map(|&(entry_slot, n_seg)| UserSchedule {
                entry_slot,
                deadline_slots: (1..=n_seg)
                    .map(|s| entry_slot - 1 + s * slots_per_seg)
                    .collect(),
            })
            .collect();
        Ok(Self { seg_s, slot_s, users })
    }

    pub fn n_users(&self) -> usize {
        self.users.len()
    }

    pub fn user(&self, i: usize) -> &UserSchedule {
        &self.users[i]
    }

    pub fn n_segments(&self, i: usize) -> usize {
        self.users[i].n_segments()
    }

    pub fn total_segments(&self) -> usize {
        self.users.iter().map(UserSchedule::n_segments).sum()
    }
}

fn slots_per_segment(seg_s: f64, slot_s: f64) -> Result<usize, StreamingError> {
    if !(seg_s > 0.0) || !(slot_s > 0.0) {
        return Err(StreamingError::BadSegmentDuration);
    }
    let ratio = seg_s / slot_s;
    let n = ratio.round() as usize;
    if n == 0 || (ratio - n as f64).abs() > 1e-9 {
        return Err(StreamingError::BadSegmentDuration);
    }
    Ok(n)
}

/// Dense quality selection: one 1-based level per (user, segment).
///
/// Storing the level index directly guarantees exactly one level per
/// segment, which is what the binary selection constraint requires.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QualityPlan {
    pub levels: Vec<Vec<u32>>,
}

impl QualityPlan {
    pub fn uniform(schedule: &SegmentSchedule, level: u32) -> Self {
        Self {
            levels: (0..schedule.n_users())
                .map(|i| vec![level; schedule.n_segments(i)])
                .collect(),
        }
    }

    pub fn level(&self, user: usize, segment: usize) -> u32 {
        self.levels[user][segment]
    }
}

/// Bits in one segment of the given level: `seg_s * bitrate(level)`.
pub fn segment_bits(
    ladder: &QualityLadder,
    seg_s: f64,
    level: u32,
) -> Result<f64, StreamingError> {
    Ok(seg_s * ladder.bitrate_bps(level)?)
}

/// Cumulative bits a user must have received by each segment deadline.
pub fn demand_curve(
    plan: &QualityPlan,
    user: usize,
    ladder: &QualityLadder,
    schedule: &SegmentSchedule,
) -> Result<Vec<(usize, f64)>, StreamingError> {
    let sched = schedule.user(user);
    let levels = &plan.levels[user];
    if levels.len() != sched.n_segments() {
        return Err(StreamingError::PlanMismatch {
            user,
            got: levels.len(),
            want: sched.n_segments(),
        });
    }
    let mut cum = 0.0;
    let mut curve = Vec::with_capacity(levels.len());
    for (s, &level) in levels.iter().enumerate() {
        cum += segment_bits(ladder, schedule.seg_s, level)?;
        curve.push((sched.deadline_slots[s], cum));
    }
    Ok(curve)
}

/// Mean selected level over a user's segments.
pub fn average_level(plan: &QualityPlan, user: usize) -> Result<f64, StreamingError> {
    let levels = &plan.levels[user];
    if levels.is_empty() {
        return Err(StreamingError::NoSegments(user));
    }
    Ok(levels.iter().map(|&l| l as f64).sum::<f64>() / levels.len() as f64)
}
