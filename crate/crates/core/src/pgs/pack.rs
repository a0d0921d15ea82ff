//! Burst packing: a deterministic post-pass that consolidates airtime.
//!
//! An optimal share allocation is rarely unique: wherever a user's rate is
//! flat (the SNR clip creates wide plateaus around each BS), airtime can
//! move between slots without changing the objective. This pass drains
//! lightly loaded BS-slots into already-busy equal-rate slots, respecting
//! per-deadline delivery and per-slot capacity, so transmissions group into
//! full-power bursts and more BS-slots become fully idle.

use super::model::MilpModel;
use crate::playback::AllocationPlan;
use crate::streaming::QualityPlan;

const EPS: f64 = 1e-12;
/// Relative rate difference treated as "equal rate".
const RATE_TOL: f64 = 1e-9;
const MAX_PASSES: usize = 4;

pub fn pack_bursts(model: &MilpModel, x: &mut AllocationPlan, plan: &QualityPlan) {
    let instance = &model.instance;
    // moving delivery earlier can grow the prebuffer; do not reshuffle when
    // the instance caps it
    if instance.prebuffer_cap_bits.is_some() {
        return;
    }
    let rates = &instance.rates;
    let assoc = &instance.assoc;
    let tau = rates.slot_s;
    let n_slots = rates.n_slots();
    let n_bs = assoc.n_bs();

    let airtime_before = x.total_airtime();

    let mut load = vec![vec![0.0f64; n_slots]; n_bs];
    for t in 1..=n_slots {
        for j in 0..n_bs {
            load[j][t - 1] = assoc.users_of(j, t).iter().map(|&i| x.share(i, t)).sum();
        }
    }

    // per-user slack above demand at each deadline
    let mut deadlines: Vec<&[usize]> = Vec::with_capacity(model.n_users);
    let mut slack: Vec<Vec<f64>> = Vec::with_capacity(model.n_users);
    for i in 0..model.n_users {
        let sched = instance.schedule.user(i);
        deadlines.push(&sched.deadline_slots);
        let curve = crate::streaming::demand_curve(plan, i, &instance.ladder, &instance.schedule)
            .expect("plan matches schedule");
        let mut delivered = 0.0;
        let mut t = sched.entry_slot;
        let mut user_slack = Vec::with_capacity(curve.len());
        for &(deadline, demand) in &curve {
            while t <= deadline {
                delivered += x.share(i, t) * rates.rate_bps(i, t) * tau;
                t += 1;
            }
            user_slack.push(delivered - demand);
        }
        slack.push(user_slack);
    }

    for _ in 0..MAX_PASSES {
        let mut donors: Vec<(usize, usize)> = (0..n_bs)
            .flat_map(|j| (1..=n_slots).map(move |t| (j, t)))
            .filter(|&(j, t)| load[j][t - 1] > EPS)
            .collect();
        donors.sort_by(|&(ja, ta), &(jb, tb)| {
            load[ja][ta - 1]
                .partial_cmp(&load[jb][tb - 1])
                .expect("loads are finite")
                .then(ta.cmp(&tb))
                .then(ja.cmp(&jb))
        });

        let mut moved_any = false;
        for (j, t) in donors {
            if load[j][t - 1] <= EPS {
                continue;
            }
            let users: Vec<usize> = assoc.users_of(j, t).to_vec();
            for i in users {
                if x.share(i, t) <= EPS {
                    continue;
                }
                moved_any |= drain_user_slot(
                    x, &mut load, &mut slack, &deadlines, model, i, t,
                );
            }
        }
        if !moved_any {
            break;
        }
    }

    // clean numerical dust so idle slots count as idle
    for i in 0..model.n_users {
        for t in 1..=n_slots {
            if x.share(i, t) < EPS {
                x.set_share(i, t, 0.0);
            }
        }
    }

    debug_assert!(
        (x.total_airtime() - airtime_before).abs() <= 1e-6 * airtime_before.max(1.0),
        "packing changed total airtime"
    );
}

/// Move as much of `x[i][t]` as possible into busy equal-rate slots.
fn drain_user_slot(
    x: &mut AllocationPlan,
    load: &mut [Vec<f64>],
    slack: &mut [Vec<f64>],
    deadlines: &[&[usize]],
    model: &MilpModel,
    user: usize,
    from: usize,
) -> bool {
    let instance = &model.instance;
    let rates = &instance.rates;
    let assoc = &instance.assoc;
    let tau = rates.slot_s;
    let rate = rates.rate_bps(user, from);
    let from_bs = assoc.serving_bs(user, from).expect("allocated slot is present");

    // receivers: equal-rate slots of this user, busiest first
    let mut receivers: Vec<usize> = rates
        .present_slots(user)
        .filter(|&t| t != from)
        .filter(|&t| ((rates.rate_bps(user, t) - rate) / rate).abs() <= RATE_TOL)
        .collect();
    receivers.sort_by(|&a, &b| {
        let la = load[assoc.serving_bs(user, a).expect("present")][a - 1];
        let lb = load[assoc.serving_bs(user, b).expect("present")][b - 1];
        lb.partial_cmp(&la).expect("loads are finite").then(a.cmp(&b))
    });

    let mut moved_any = false;
    for to in receivers {
        let avail = x.share(user, from);
        if avail <= EPS {
            break;
        }
        let to_bs = assoc.serving_bs(user, to).expect("present");
        if load[to_bs][to - 1] <= EPS {
            continue; // only consolidate into slots that already transmit
        }
        let mut amount = avail
            .min(1.0 - load[to_bs][to - 1])
            .min(1.0 - x.share(user, to));
        if to > from {
            // delivery moves later: bounded by the slack at every deadline
            // in between
            let min_slack = deadlines[user]
                .iter()
                .enumerate()
                .filter(|&(_, &d)| from <= d && d < to)
                .map(|(s, _)| slack[user][s])
                .fold(f64::INFINITY, f64::min);
            if min_slack.is_finite() {
                amount = amount.min((min_slack / (rate * tau)).max(0.0));
            }
        }
        if amount <= EPS {
            continue;
        }

        x.set_share(user, from, x.share(user, from) - amount);
        x.set_share(user, to, x.share(user, to) + amount);
        load[from_bs][from - 1] -= amount;
        load[to_bs][to - 1] += amount;
        let bits = amount * rate * tau;
        let (lo, hi) = (from.min(to), from.max(to));
        let sign = if to > from { -1.0 } else { 1.0 };
        for (s, &d) in deadlines[user].iter().enumerate() {
            if lo <= d && d < hi {
                slack[user][s] += sign * bits;
            }
        }
        moved_any = true;
    }
    moved_any
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgs::test_support::single_bs_instance;
    use crate::pgs::{build_model, check_solution};
    use crate::streaming::QualityLadder;

    #[test]
    fn packing_preserves_objective_and_feasibility() {
        // flat-rate tail lets delivery consolidate into few slots
        let mut rates = vec![0.5e6; 5];
        rates.extend(vec![2e6; 15]);
        let ladder = QualityLadder::new(vec![0.25e6, 0.5e6]).unwrap();
        let instance = single_bs_instance(vec![rates], ladder, 10.0, 2.0, None);
        let model = build_model(&instance).unwrap();

        // a deliberately smeared feasible allocation
        let mut x = AllocationPlan::zeros(1, 20);
        for t in 1..=20 {
            x.set_share(0, t, 0.4);
        }
        let plan = QualityPlan { levels: vec![vec![2, 2]] };
        let before = x.total_airtime();
        let busy_before = (1..=20).filter(|&t| x.share(0, t) > 0.0).count();

        pack_bursts(&model, &mut x, &plan);

        assert!((x.total_airtime() - before).abs() < 1e-9);
        let busy_after = (1..=20).filter(|&t| x.share(0, t) > 0.0).count();
        assert!(busy_after < busy_before, "{busy_after} vs {busy_before}");
        for check in check_solution(&instance, &x, &plan, 1e-6).unwrap() {
            assert!(check.ok, "{}: {} ({})", check.family, check.worst, check.detail);
        }
    }

    #[test]
    fn packing_skips_capped_instances() {
        let instance = single_bs_instance(
            vec![vec![1e6; 20]],
            QualityLadder::new(vec![0.25e6, 0.5e6]).unwrap(),
            10.0,
            2.0,
            Some(6e6),
        );
        let model = build_model(&instance).unwrap();
        let mut x = AllocationPlan::zeros(1, 20);
        for t in 1..=20 {
            x.set_share(0, t, 0.5);
        }
        let copy = x.clone();
        pack_bursts(&model, &mut x, &QualityPlan { levels: vec![vec![2, 2]] });
        assert_eq!(x, copy);
    }
}
