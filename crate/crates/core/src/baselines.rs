//! Prediction-free reference allocators: Equal Share and Rate-Proportional
//! airtime with greedy per-segment quality adaptation.
//!
//! Clients fetch segments back to back until all are stored; there is no
//! download pacing, so BS airtime is fully used while any associated user
//! still has outstanding demand. A segment's quality is fixed from the
//! user's share at the slot where its download starts.

use crate::playback::{verify_plan, AllocationPlan, PlaybackError, PlaybackReport};
use crate::radio::RateMatrix;
use crate::scenario::{associate, Scenario};
use crate::streaming::{QualityLadder, QualityPlan, SegmentSchedule};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BaselineKind {
    EqualShare,
    RateProportional,
}

#[derive(Debug, Clone)]
pub struct BaselineConfig {
    pub kind: BaselineKind,
    pub ladder: QualityLadder,
}

/// Highest ladder level whose bitrate the current throughput supports;
/// level 1 when even the lowest does not (a client must request something).
pub fn adapt_quality(share: f64, rate_bps: f64, ladder: &QualityLadder) -> u32 {
    let throughput = share * rate_bps;
    let mut level = 1;
    for (idx, &bitrate) in ladder.bitrates_bps().iter().enumerate() {
        if bitrate <= throughput {
            level = (idx + 1) as u32;
        } else {
            break;
        }
    }
    level
}

/// Equal Share: airtime splits equally among associated users that still
/// have outstanding demand.
pub fn allocate_es(
    scenario: &Scenario,
    rates: &RateMatrix,
    config: &BaselineConfig,
    schedule: &SegmentSchedule,
) -> Result<(AllocationPlan, QualityPlan, PlaybackReport), PlaybackError> {
    run_baseline(scenario, rates, &config.ladder, schedule, BaselineKind::EqualShare)
}

/// Rate-Proportional: airtime proportional to the user's instantaneous rate
/// among active downloaders.
pub fn allocate_rp(
    scenario: &Scenario,
    rates: &RateMatrix,
    config: &BaselineConfig,
    schedule: &SegmentSchedule,
) -> Result<(AllocationPlan, QualityPlan, PlaybackReport), PlaybackError> {
    run_baseline(scenario, rates, &config.ladder, schedule, BaselineKind::RateProportional)
}

pub fn run_baseline(
    scenario: &Scenario,
    rates: &RateMatrix,
    ladder: &QualityLadder,
    schedule: &SegmentSchedule,
    kind: BaselineKind,
) -> Result<(AllocationPlan, QualityPlan, PlaybackReport), PlaybackError> {
    let n_users = scenario.n_users();
    let n_slots = scenario.n_slots;
    let assoc = associate(scenario);

    let mut x = AllocationPlan::zeros(n_users, n_slots);
    // segments never requested stay at the floor level
    let mut levels: Vec<Vec<u32>> =
        (0..n_users).map(|i| vec![1; schedule.n_segments(i)]).collect();
    let mut next_seg = vec![0usize; n_users];
    let mut rem_bits = vec![0.0f64; n_users];

    for slot in 1..=n_slots {
        for bs in 0..assoc.n_bs() {
            let active: Vec<usize> = assoc
                .users_of(bs, slot)
                .iter()
                .copied()
                .filter(|&i| has_outstanding(i, &next_seg, &rem_bits, schedule))
                .collect();
            if active.is_empty() {
                continue;
            }
            let rate_sum: f64 = active.iter().map(|&i| rates.rate_bps(i, slot)).sum();
            for &i in &active {
                let rate = rates.rate_bps(i, slot);
                let share = match kind {
                    BaselineKind::EqualShare => 1.0 / active.len() as f64,
                    BaselineKind::RateProportional => rate / rate_sum,
                };
                x.set_share(i, slot, share);
                // the slot's budget spills across segment boundaries; each
                // new segment's level is fixed from the share at this slot
                let mut budget = share * rate * rates.slot_s;
                while budget > 1e-9 {
                    if rem_bits[i] <= 1e-9 {
                        if next_seg[i] >= schedule.n_segments(i) {
                            break; // video complete; rest of the slot is spent
                        }
                        let level = adapt_quality(share, rate, ladder);
                        levels[i][next_seg[i]] = level;
                        rem_bits[i] = schedule.seg_s
                            * ladder.bitrate_bps(level).expect("level within ladder");
                    }
                    let take = budget.min(rem_bits[i]);
                    rem_bits[i] -= take;
                    budget -= take;
                    if rem_bits[i] <= 1e-9 {
                        rem_bits[i] = 0.0;
                        next_seg[i] += 1;
                    }
                }
            }
        }
    }

    let plan = QualityPlan { levels };
    let report = verify_plan(&x, rates, &plan, ladder, schedule)?;
    Ok((x, plan, report))
}

fn has_outstanding(
    user: usize,
    next_seg: &[usize],
    rem_bits: &[f64],
    schedule: &SegmentSchedule,
) -> bool {
    rem_bits[user] > 1e-9 || next_seg[user] < schedule.n_segments(user)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{generate_highway_scenario, HighwayParams};
    use approx::assert_relative_eq;

    fn ladder() -> QualityLadder {
        QualityLadder::default_four_level()
    }

    #[test]
    fn adapt_quality_picks_highest_supportable() {
        assert_eq!(adapt_quality(1.0, 1.1e6, &ladder()), 4);
        assert_eq!(adapt_quality(0.5, 1.2e6, &ladder()), 2);
        assert_eq!(adapt_quality(1.0, 0.1e6, &ladder()), 1);
        assert_eq!(adapt_quality(1.0, 0.25e6, &ladder()), 1);
        assert_eq!(adapt_quality(0.0, 5e6, &ladder()), 1);
    }

    fn small_scenario(n_vehicles: usize) -> Scenario {
        generate_highway_scenario(&HighwayParams {
            n_bs: 1,
            n_vehicles,
            window_s: 60.0,
            ..HighwayParams::default()
        })
        .unwrap()
    }

    #[test]
    fn es_splits_equally_while_both_active() {
        let scenario = small_scenario(2);
        let rates = crate::radio::build_rate_matrix(&scenario, &Default::default());
        let schedule = SegmentSchedule::from_scenario(&scenario, 10.0).unwrap();
        let config = BaselineConfig { kind: BaselineKind::EqualShare, ladder: ladder() };
        let (x, _, _) = allocate_es(&scenario, &rates, &config, &schedule).unwrap();
        // both users downloading at slot 2
        assert_relative_eq!(x.share(0, 2), 0.5);
        assert_relative_eq!(x.share(1, 2), 0.5);
    }

    #[test]
    fn single_remaining_user_gets_full_airtime() {
        let scenario = small_scenario(2);
        let rates = crate::radio::build_rate_matrix(&scenario, &Default::default());
        let schedule = SegmentSchedule::from_scenario(&scenario, 10.0).unwrap();
        let config = BaselineConfig { kind: BaselineKind::EqualShare, ladder: ladder() };
        let (x, _, _) = allocate_es(&scenario, &rates, &config, &schedule).unwrap();
        // slot 1: only user 1 has entered
        assert_relative_eq!(x.share(0, 1), 1.0);
        assert_eq!(x.share(1, 1), 0.0);
    }

    #[test]
    fn rp_shares_proportional_to_rate() {
        let scenario = small_scenario(2);
        let mut rates = vec![vec![0.0; scenario.n_slots]; 2];
        for t in 1..=scenario.n_slots {
            if scenario.traces[0].is_present(t) {
                rates[0][t - 1] = 3e6;
            }
            if scenario.traces[1].is_present(t) {
                rates[1][t - 1] = 1e6;
            }
        }
        let rates = RateMatrix::from_rates(rates, scenario.slot_s);
        let schedule = SegmentSchedule::from_scenario(&scenario, 10.0).unwrap();
        let config = BaselineConfig { kind: BaselineKind::RateProportional, ladder: ladder() };
        let (x, _, _) = allocate_rp(&scenario, &rates, &config, &schedule).unwrap();
        assert_relative_eq!(x.share(0, 2), 0.75);
        assert_relative_eq!(x.share(1, 2), 0.25);
    }

    #[test]
    fn es_equals_rp_under_equal_rates() {
        let scenario = small_scenario(3);
        let mut rates = vec![vec![0.0; scenario.n_slots]; 3];
        for (i, trace) in scenario.traces.iter().enumerate() {
            for t in trace.entry_slot..=trace.exit_slot() {
                rates[i][t - 1] = 2e6;
            }
        }
        let rates = RateMatrix::from_rates(rates, scenario.slot_s);
        let schedule = SegmentSchedule::from_scenario(&scenario, 10.0).unwrap();
        let (xe, qe, _) =
            run_baseline(&scenario, &rates, &ladder(), &schedule, BaselineKind::EqualShare)
                .unwrap();
        let (xr, qr, _) =
            run_baseline(&scenario, &rates, &ladder(), &schedule, BaselineKind::RateProportional)
                .unwrap();
        assert_eq!(xe, xr);
        assert_eq!(qe, qr);
    }

    #[test]
    fn airtime_feasible_and_work_conserving() {
        let scenario = generate_highway_scenario(&HighwayParams {
            n_vehicles: 6,
            ..HighwayParams::default()
        })
        .unwrap();
        let rates = crate::radio::build_rate_matrix(&scenario, &Default::default());
        let schedule = SegmentSchedule::from_scenario(&scenario, 10.0).unwrap();
        let assoc = associate(&scenario);
        for kind in [BaselineKind::EqualShare, BaselineKind::RateProportional] {
            let (x, _, _) =
                run_baseline(&scenario, &rates, &ladder(), &schedule, kind).unwrap();
            for slot in 1..=scenario.n_slots {
                for bs in 0..assoc.n_bs() {
                    let load: f64 =
                        assoc.users_of(bs, slot).iter().map(|&i| x.share(i, slot)).sum();
                    assert!(load <= 1.0 + 1e-9, "overloaded BS {bs} at slot {slot}");
                    // fully utilized or fully idle: shares always sum to one
                    // while someone on this BS is still downloading
                    assert!(
                        load < 1e-12 || (load - 1.0).abs() < 1e-9,
                        "partial load {load} at BS {bs} slot {slot}"
                    );
                }
            }
        }
    }

    #[test]
    fn baseline_completes_all_segments_on_default_scenario() {
        let scenario = generate_highway_scenario(&HighwayParams {
            n_vehicles: 10,
            ..HighwayParams::default()
        })
        .unwrap();
        let rates = crate::radio::build_rate_matrix(&scenario, &Default::default());
        let schedule = SegmentSchedule::from_scenario(&scenario, 10.0).unwrap();
        for kind in [BaselineKind::EqualShare, BaselineKind::RateProportional] {
            let (_, _, report) =
                run_baseline(&scenario, &rates, &ladder(), &schedule, kind).unwrap();
            for user in &report.users {
                assert_eq!(user.unfinished_segments, 0);
            }
            assert!(report.mean_level > 3.0, "mean level {}", report.mean_level);
        }
    }
}
