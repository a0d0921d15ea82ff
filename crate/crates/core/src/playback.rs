//! Deterministic playback verification: delivery times, stalls, startup
//! delay, and prebuffer depth for a given allocation and quality plan.
//!
//! Timing model, on each user's local clock (zero at the start of its entry
//! slot): segment `s` must be fully downloaded by `s * seg_s`, at which
//! point it starts playing; playback of the first segment therefore begins
//! one segment duration after entry. A late segment pauses playback and
//! shifts every later deadline by the pause. Lateness of segment 1 extends
//! the startup delay instead of counting as a stall.

use crate::radio::RateMatrix;
use crate::streaming::{demand_curve, QualityLadder, QualityPlan, SegmentSchedule, StreamingError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Delivered-vs-demand slack: one bit absolute or 1e-9 relative, whichever
/// is larger. Absorbs LP solver residue without masking real shortfalls.
fn demand_met(delivered: f64, demand: f64) -> bool {
    delivered >= demand - 1.0_f64.max(1e-9 * demand)
}

#[derive(Debug, Error)]
pub enum PlaybackError {
    #[error("allocation is {got_users}x{got_slots}, rate matrix is {want_users}x{want_slots}")]
    DimensionMismatch {
        got_users: usize,
        got_slots: usize,
        want_users: usize,
        want_slots: usize,
    },
    #[error(transparent)]
    Streaming(#[from] StreamingError),
}

/// Airtime fractions `x[i][t] in [0,1]`, dense over the full window.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub x: Vec<Vec<f64>>,
}

impl AllocationPlan {
    pub fn zeros(n_users: usize, n_slots: usize) -> Self {
        Self { x: vec![vec![0.0; n_slots]; n_users] }
    }

    pub fn n_users(&self) -> usize {
        self.x.len()
    }

    pub fn n_slots(&self) -> usize {
        self.x.first().map_or(0, Vec::len)
    }

    /// Share at a 1-based slot.
    pub fn share(&self, user: usize, slot: usize) -> f64 {
        self.x[user][slot - 1]
    }

    pub fn set_share(&mut self, user: usize, slot: usize, value: f64) {
        self.x[user][slot - 1] = value;
    }

    /// Total airtime in slot-fractions (the optimizer's objective).
    pub fn total_airtime(&self) -> f64 {
        self.x.iter().map(|row| row.iter().sum::<f64>()).sum()
    }
}

/// Per-user playback outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UserPlayback {
    pub total_stall_s: f64,
    pub startup_delay_s: f64,
    /// Mean level over segments that completed inside the window.
    pub achieved_avg_level: f64,
    pub max_prebuffer_bits: f64,
    /// Completion slot per segment; `None` if never delivered in-window.
    pub completion_slots: Vec<Option<usize>>,
    pub unfinished_segments: usize,
    /// Buffered bits and the playing segment at each present slot boundary.
    pub buffer: Vec<BufferSample>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BufferSample {
    pub slot: usize,
    pub buffered_bits: f64,
    /// 1-based segment being played at the slot boundary, if any.
    pub playing_segment: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlaybackReport {
    pub users: Vec<UserPlayback>,
    pub mean_stall_s: f64,
    pub mean_startup_s: f64,
    /// Mean achieved level over users with at least one completed segment.
    pub mean_level: f64,
    pub max_prebuffer_bits: f64,
}

impl PlaybackReport {
    pub fn total_stall_s(&self) -> f64 {
        self.users.iter().map(|u| u.total_stall_s).sum()
    }
}

/// Cumulative bits allocated to a user through a 1-based slot (inclusive).
pub fn delivered_bits(x: &AllocationPlan, rates: &RateMatrix, user: usize, through_slot: usize) -> f64 {
    (1..=through_slot)
        .map(|t| x.share(user, t) * rates.rate_bps(user, t) * rates.slot_s)
        .sum()
}

/// Simulate playback of `plan` under allocation `x` and report stalls,
/// startup, prebuffer depth, and buffer trajectories.
pub fn verify_plan(
    x: &AllocationPlan,
    rates: &RateMatrix,
    plan: &QualityPlan,
    ladder: &QualityLadder,
    schedule: &SegmentSchedule,
) -> Result<PlaybackReport, PlaybackError> {
    if x.n_users() != rates.n_users() || x.n_slots() != rates.n_slots() {
        return Err(PlaybackError::DimensionMismatch {
            got_users: x.n_users(),
            got_slots: x.n_slots(),
            want_users: rates.n_users(),
            want_slots: rates.n_slots(),
        });
    }

    let tau = rates.slot_s;
    let seg_s = schedule.seg_s;
    let mut users = Vec::with_capacity(schedule.n_users());

    for i in 0..schedule.n_users() {
        let sched = schedule.user(i);
        let entry = sched.entry_slot;
        let curve = demand_curve(plan, i, ladder, schedule)?;
        let n_seg = curve.len();
        let seg_bits: Vec<f64> = {
            let mut prev = 0.0;
            curve
                .iter()
                .map(|&(_, cum)| {
                    let b = cum - prev;
                    prev = cum;
                    b
                })
                .collect()
        };

        // completion slot per segment: first slot where cumulative delivery
        // covers the cumulative demand
        let mut completion = vec![None; n_seg];
        {
            let mut delivered = 0.0;
            let mut s = 0;
            for t in entry..=rates.n_slots() {
                delivered += x.share(i, t) * rates.rate_bps(i, t) * tau;
                while s < n_seg && demand_met(delivered, curve[s].1) {
                    completion[s] = Some(t);
                    s += 1;
                }
            }
        }

        let presence_end_local =
            (1 + rates.present_slots(i).last().unwrap_or(entry) - entry) as f64 * tau;
        let local = |slot: usize| (slot + 1 - entry) as f64 * tau;

        // shifted playback starts; segment-1 lateness extends startup only
        let mut shift = 0.0;
        let mut total_stall = 0.0;
        let mut startup = 0.0;
        let mut unfinished = 0;
        let mut starts = vec![f64::INFINITY; n_seg];
        for s in 0..n_seg {
            let scheduled = (s + 1) as f64 * seg_s + shift;
            let done_at = match completion[s] {
                Some(t) => local(t),
                None => {
                    unfinished += 1;
                    // user leaves with the segment undelivered; any pause
                    // runs until the end of its presence
                    if s > 0 && scheduled < presence_end_local {
                        total_stall += presence_end_local - scheduled;
                    }
                    continue;
                }
            };
            if s == 0 {
                startup = done_at;
                shift += (done_at - scheduled).max(0.0);
                starts[s] = scheduled.max(done_at);
            } else if done_at > scheduled {
                total_stall += done_at - scheduled;
                shift += done_at - scheduled;
                starts[s] = done_at;
            } else {
                starts[s] = scheduled;
            }
        }

        // buffer trajectory at slot boundaries: delivered minus played,
        // with linear consumption inside the playing segment
        let mut buffer = Vec::new();
        let mut max_prebuffer: f64 = 0.0;
        let mut delivered = 0.0;
        for t in entry..=rates.n_slots() {
            if !rates.is_present(i, t) {
                break;
            }
            delivered += x.share(i, t) * rates.rate_bps(i, t) * tau;
            let u = local(t);
            let mut played = 0.0;
            let mut playing = None;
            for s in 0..n_seg {
                if starts[s].is_infinite() || u <= starts[s] {
                    break;
                }
                let frac = ((u - starts[s]) / seg_s).min(1.0);
                played += seg_bits[s] * frac;
                if frac < 1.0 {
                    playing = Some(s + 1);
                }
            }
            let buffered = (delivered - played).max(0.0);
            max_prebuffer = max_prebuffer.max(buffered);
            buffer.push(BufferSample { slot: t, buffered_bits: buffered, playing_segment: playing });
        }

        let completed_levels: Vec<u32> = (0..n_seg)
            .filter(|&s| completion[s].is_some())
            .map(|s| plan.level(i, s))
            .collect();
        let achieved = if completed_levels.is_empty() {
            0.0
        } else {
            completed_levels.iter().map(|&l| l as f64).sum::<f64>() / completed_levels.len() as f64
        };

        users.push(UserPlayback {
            total_stall_s: total_stall,
            startup_delay_s: startup,
            achieved_avg_level: achieved,
            max_prebuffer_bits: max_prebuffer,
            completion_slots: completion,
            unfinished_segments: unfinished,
            buffer,
        });
    }

    let n = users.len().max(1) as f64;
    let streaming: Vec<&UserPlayback> =
        users.iter().filter(|u| !u.completion_slots.is_empty()).collect();
    let mean_level = if streaming.is_empty() {
        0.0
    } else {
        streaming.iter().map(|u| u.achieved_avg_level).sum::<f64>() / streaming.len() as f64
    };
    let report = PlaybackReport {
        mean_stall_s: users.iter().map(|u| u.total_stall_s).sum::<f64>() / n,
        mean_startup_s: users.iter().map(|u| u.startup_delay_s).sum::<f64>() / n,
        mean_level,
        max_prebuffer_bits: users.iter().map(|u| u.max_prebuffer_bits).fold(0.0, f64::max),
        users,
    };
    Ok(report)
}

/// True when every user's prebuffer stays at or below the cap.
pub fn prebuffer_ok(report: &PlaybackReport, cap_bits: Option<f64>) -> bool {
    match cap_bits {
        None => true,
        Some(cap) => report.users.iter().all(|u| u.max_prebuffer_bits <= cap),
    }
}

/// Dump buffer trajectories as `user_id,slot,buffered_bits,playing_segment`.
pub fn write_buffer_csv<W: std::io::Write>(
    out: W,
    report: &PlaybackReport,
    user_ids: &[u64],
) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_id", "slot", "buffered_bits", "playing_segment"])?;
    for (i, user) in report.users.iter().enumerate() {
        for sample in &user.buffer {
            w.write_record(&[
                user_ids[i].to_string(),
                sample.slot.to_string(),
                crate::fmt_sig9(sample.buffered_bits),
                sample.playing_segment.map_or(String::new(), |s| s.to_string()),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn constant_rates(n_users: usize, n_slots: usize, bps: f64) -> RateMatrix {
        RateMatrix::from_rates(vec![vec![bps; n_slots]; n_users], 1.0)
    }

    fn ladder() -> QualityLadder {
        QualityLadder::default_four_level()
    }

    #[test]
    fn delivered_bits_examples() {
        let rates = constant_rates(1, 20, 1e6);
        let mut x = AllocationPlan::zeros(1, 20);
        for t in 1..=20 {
            x.set_share(0, t, 1.0);
        }
        assert_relative_eq!(delivered_bits(&x, &rates, 0, 10), 1e7);

        let zero = AllocationPlan::zeros(1, 20);
        assert_eq!(delivered_bits(&zero, &rates, 0, 20), 0.0);

        let rates2 = constant_rates(1, 20, 2e6);
        let mut half = AllocationPlan::zeros(1, 20);
        for t in 1..=4 {
            half.set_share(0, t, 0.5);
        }
        assert_relative_eq!(delivered_bits(&half, &rates2, 0, 20), 4e6);
    }

    #[test]
    fn on_time_delivery_has_zero_stall() {
        // two level-2 segments (5 Mbit each) at 1 Mbit/s, deadlines 10 and 20
        let rates = constant_rates(1, 20, 1e6);
        let sched = SegmentSchedule::from_entries(&[(1, 2)], 10.0, 1.0).unwrap();
        let plan = QualityPlan { levels: vec![vec![2, 2]] };
        let mut x = AllocationPlan::zeros(1, 20);
        for t in 1..=20 {
            x.set_share(0, t, 0.5);
        }
        let report = verify_plan(&x, &rates, &plan, &ladder(), &sched).unwrap();
        assert_eq!(report.users[0].total_stall_s, 0.0);
        assert_eq!(report.users[0].completion_slots, vec![Some(10), Some(20)]);
        assert_eq!(report.users[0].startup_delay_s, 10.0);
        assert_eq!(report.users[0].unfinished_segments, 0);
    }

    #[test]
    fn late_segment_stalls_and_shifts_later_deadlines() {
        // segment 2 (5 Mbit, deadline 20) completes at slot 22: stall 2 s,
        // and segment 3's deadline shifts from 30 to 32
        let rates = constant_rates(1, 40, 1e6);
        let sched = SegmentSchedule::from_entries(&[(1, 3)], 10.0, 1.0).unwrap();
        let plan = QualityPlan { levels: vec![vec![2, 2, 2]] };
        let mut x = AllocationPlan::zeros(1, 40);
        // segment 1 on time, segment 2 two slots late, segment 3 at slot 32
        for t in 1..=10 {
            x.set_share(0, t, 0.5);
        }
        for t in 13..=22 {
            x.set_share(0, t, 0.5);
        }
        for t in 23..=32 {
            x.set_share(0, t, 0.5);
        }
        let report = verify_plan(&x, &rates, &plan, &ladder(), &sched).unwrap();
        let u = &report.users[0];
        assert_eq!(u.completion_slots, vec![Some(10), Some(22), Some(32)]);
        // segment 3 lands exactly on its shifted deadline; only segment 2 stalls
        assert_relative_eq!(u.total_stall_s, 2.0);
        assert_eq!(u.startup_delay_s, 10.0);
    }

    #[test]
    fn late_first_segment_is_startup_not_stall() {
        let rates = constant_rates(1, 30, 1e6);
        let sched = SegmentSchedule::from_entries(&[(1, 2)], 10.0, 1.0).unwrap();
        let plan = QualityPlan { levels: vec![vec![2, 2]] };
        let mut x = AllocationPlan::zeros(1, 30);
        // nothing until slot 11; then full rate
        for t in 11..=30 {
            x.set_share(0, t, 1.0);
        }
        let report = verify_plan(&x, &rates, &plan, &ladder(), &sched).unwrap();
        let u = &report.users[0];
        // 5 Mbit at 1 Mbit/s starting slot 11 -> completes slot 15
        assert_eq!(u.completion_slots[0], Some(15));
        assert_eq!(u.startup_delay_s, 15.0);
        // segment 2 deadline shifted to 25; completes at 20 -> no stall
        assert_eq!(u.total_stall_s, 0.0);
    }

    #[test]
    fn everything_in_slot_one_maximizes_prebuffer() {
        let rates = constant_rates(1, 20, 10e6);
        let sched = SegmentSchedule::from_entries(&[(1, 2)], 10.0, 1.0).unwrap();
        let plan = QualityPlan { levels: vec![vec![2, 2]] };
        let mut x = AllocationPlan::zeros(1, 20);
        x.set_share(0, 1, 1.0);
        let report = verify_plan(&x, &rates, &plan, &ladder(), &sched).unwrap();
        let u = &report.users[0];
        assert_eq!(u.total_stall_s, 0.0);
        // nothing has played by the end of slot 1
        assert_relative_eq!(u.max_prebuffer_bits, 1e7);
        assert_eq!(u.buffer[0].playing_segment, None);
    }

    #[test]
    fn prebuffer_cap_check() {
        let rates = constant_rates(1, 20, 10e6);
        let sched = SegmentSchedule::from_entries(&[(1, 2)], 10.0, 1.0).unwrap();
        let plan = QualityPlan { levels: vec![vec![2, 2]] };
        let mut x = AllocationPlan::zeros(1, 20);
        x.set_share(0, 1, 1.0);
        let report = verify_plan(&x, &rates, &plan, &ladder(), &sched).unwrap();
        assert!(prebuffer_ok(&report, None));
        assert!(prebuffer_ok(&report, Some(12e6)));
        assert!(!prebuffer_ok(&report, Some(8e6)));
    }

    #[test]
    fn undelivered_tail_counts_unfinished() {
        let rates = constant_rates(1, 20, 1e6);
        let sched = SegmentSchedule::from_entries(&[(1, 2)], 10.0, 1.0).unwrap();
        let plan = QualityPlan { levels: vec![vec![2, 4]] };
        let mut x = AllocationPlan::zeros(1, 20);
        for t in 1..=10 {
            x.set_share(0, t, 0.5);
        }
        // segment 2 (10 Mbit) never delivered
        let report = verify_plan(&x, &rates, &plan, &ladder(), &sched).unwrap();
        let u = &report.users[0];
        assert_eq!(u.completion_slots[1], None);
        assert_eq!(u.unfinished_segments, 1);
        assert_eq!(u.achieved_avg_level, 2.0);
    }

    #[test]
    fn dimension_mismatch_is_reported() {
        let rates = constant_rates(2, 20, 1e6);
        let sched = SegmentSchedule::from_entries(&[(1, 1)], 10.0, 1.0).unwrap();
        let plan = QualityPlan { levels: vec![vec![1]] };
        let x = AllocationPlan::zeros(1, 20);
        assert!(matches!(
            verify_plan(&x, &rates, &plan, &ladder(), &sched),
            Err(PlaybackError::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn more_airtime_never_increases_stall() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(9);
        for _ in 0..50 {
            let n_slots = 30;
            let rates = RateMatrix::from_rates(
                vec![(0..n_slots).map(|_| rng.gen_range(0.2e6..3e6)).collect()],
                1.0,
            );
            let sched = SegmentSchedule::from_entries(&[(1, 3)], 10.0, 1.0).unwrap();
            let plan = QualityPlan {
                levels: vec![(0..3).map(|_| rng.gen_range(1..=4)).collect()],
            };
            let mut x = AllocationPlan::zeros(1, n_slots);
            for t in 1..=n_slots {
                x.set_share(0, t, rng.gen_range(0.0..1.0));
            }
            let mut more = x.clone();
            for t in 1..=n_slots {
                let v = (more.share(0, t) + rng.gen_range(0.0..0.3)).min(1.0);
                more.set_share(0, t, v);
            }
            let base = verify_plan(&x, &rates, &plan, &ladder(), &sched).unwrap();
            let better = verify_plan(&more, &rates, &plan, &ladder(), &sched).unwrap();
            assert!(
                better.users[0].total_stall_s <= base.users[0].total_stall_s + 1e-9,
                "stall increased with more airtime"
            );
        }
    }
}
