//! Exact solver: branch-and-bound over the level selectors with LP
//! relaxation bounds.
//!
//! Node selection is best-bound with ties broken by creation index;
//! branching picks the most fractional selector, ties resolved by column
//! order (user, segment, level). The rounding repair seeds the incumbent at
//! the root, which closes many instances without branching. All choices
//! are deterministic.

use super::heuristic::heuristic_round;
use super::model::{MilpModel, RowKind};
use super::pack::pack_bursts;
use super::simplex::{LpError, LpSolution};
use super::{PgsSolution, SolveStats, SolveStatus, SOLVE_TOL};
use std::collections::BinaryHeap;
use std::time::Instant;

#[derive(Debug, Clone, Copy)]
pub struct SolveLimits {
    pub time_limit_s: f64,
    pub node_limit: usize,
}

impl Default for SolveLimits {
    fn default() -> Self {
        Self { time_limit_s: 120.0, node_limit: 200_000 }
    }
}

struct Node {
    id: usize,
    bound: f64,
    fixings: Vec<(usize, f64)>,
    /// Most fractional selector of this node's relaxation.
    branch_col: usize,
}

struct QueueEntry(Node);

impl PartialEq for QueueEntry {
    fn eq(&self, other: &Self) -> bool {
        self.0.bound == other.0.bound && self.0.id == other.0.id
    }
}
impl Eq for QueueEntry {}
impl PartialOrd for QueueEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for QueueEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // max-heap: "greater" means smaller bound, then smaller id
        other
            .0
            .bound
            .partial_cmp(&self.0.bound)
            .expect("bounds are finite")
            .then(other.0.id.cmp(&self.0.id))
    }
}

/// Solve the model to proven optimality within `tol`, or return the best
/// incumbent on hitting a limit.
pub fn solve_exact(model: &MilpModel, limits: &SolveLimits, tol: f64) -> PgsSolution {
    let start = Instant::now();
    let mut stats = SolveStats::default();

    let root = match solve_node(model, &[], &mut stats) {
        Ok(sol) => sol,
        Err(LpError::Infeasible { row }) => {
            stats.wall_s = start.elapsed().as_secs_f64();
            return PgsSolution::infeasible(infeasibility_note(model, row), stats);
        }
        Err(e) => {
            stats.wall_s = start.elapsed().as_secs_f64();
            return PgsSolution::infeasible(format!("root relaxation failed: {e}"), stats);
        }
    };
    let root_bound = root.objective;

    // incumbent via rounding repair; often already optimal
    let mut incumbent: Option<(f64, Vec<f64>, Option<super::PgsSolution>)> = None;
    let fractional = model.fractional_levels(&root.x, SOLVE_TOL);
    if fractional.is_empty() {
        return finish(model, root_bound, root.x, SolveStatus::Optimal, stats, start);
    }
    let repaired = heuristic_round(model, &root.x);
    stats.lp_pivots += repaired.stats.lp_pivots;
    let mut inc_obj = f64::INFINITY;
    if repaired.status == SolveStatus::Heuristic {
        inc_obj = repaired.objective.expect("heuristic solutions carry objectives");
        incumbent = Some((inc_obj, Vec::new(), Some(repaired)));
        if inc_obj - root_bound <= tol {
            let sol = incumbent.unwrap().2.unwrap();
            stats.wall_s = start.elapsed().as_secs_f64();
            return PgsSolution {
                status: SolveStatus::Optimal,
                lp_bound: Some(root_bound),
                stats,
                ..sol
            };
        }
    }

    let mut queue = BinaryHeap::new();
    let mut next_id = 1usize;
    queue.push(QueueEntry(Node {
        id: 0,
        bound: root_bound,
        fixings: Vec::new(),
        branch_col: pick_branch_col(model, &root.x, &fractional),
    }));

    while let Some(QueueEntry(node)) = queue.pop() {
        if node.bound >= inc_obj - tol {
            // best-bound order: nothing left can improve the incumbent
            break;
        }
        for branch_value in [0.0, 1.0] {
            if stats.nodes >= limits.node_limit
                || start.elapsed().as_secs_f64() > limits.time_limit_s
            {
                let open = queue
                    .iter()
                    .map(|e| e.0.bound)
                    .fold(node.bound, f64::min);
                return finish_limit(model, incumbent, open, stats, start);
            }
            let mut fixings = node.fixings.clone();
            fixings.push((node.branch_col, branch_value));
            let child = match solve_node(model, &fixings, &mut stats) {
                Ok(sol) => sol,
                Err(LpError::Infeasible { .. }) => continue,
                Err(_) => continue,
            };
            if child.objective >= inc_obj - tol {
                continue;
            }
            let frac = model.fractional_levels(&child.x, SOLVE_TOL);
            if frac.is_empty() {
                if child.objective < inc_obj - 1e-12 {
                    inc_obj = child.objective;
                    incumbent = Some((inc_obj, child.x, None));
                }
            } else {
                queue.push(QueueEntry(Node {
                    id: next_id,
                    bound: child.objective,
                    fixings,
                    branch_col: pick_branch_col(model, &child.x, &frac),
                }));
                next_id += 1;
            }
        }
        if let Some(top) = queue.peek() {
            if incumbent.is_some() && top.0.bound >= inc_obj - tol {
                break;
            }
        }
    }

    match incumbent {
        Some((obj, raw, Some(ready))) => {
            let _ = obj;
            stats.wall_s = start.elapsed().as_secs_f64();
            debug_assert!(raw.is_empty());
            PgsSolution {
                status: SolveStatus::Optimal,
                lp_bound: Some(root_bound),
                stats,
                ..ready
            }
        }
        Some((obj, raw, None)) => {
            let _ = obj;
            finish(model, root_bound, raw, SolveStatus::Optimal, stats, start)
        }
        None => {
            stats.wall_s = start.elapsed().as_secs_f64();
            PgsSolution::infeasible(
                "no level assignment satisfies delivery and quality jointly".into(),
                stats,
            )
        }
    }
}

fn solve_node(
    model: &MilpModel,
    fixings: &[(usize, f64)],
    stats: &mut SolveStats,
) -> Result<LpSolution, LpError> {
    let overrides: Vec<(usize, f64, f64)> =
        fixings.iter().map(|&(col, v)| (col, v, v)).collect();
    let sol = model.to_lp(&overrides).solve()?;
    stats.nodes += 1;
    stats.lp_pivots += sol.pivots;
    Ok(sol)
}

/// Most fractional selector; column order breaks ties.
fn pick_branch_col(model: &MilpModel, solution: &[f64], fractional: &[usize]) -> usize {
    let _ = model;
    *fractional
        .iter()
        .min_by(|&&a, &&b| {
            let da = (solution[a] - 0.5).abs();
            let db = (solution[b] - 0.5).abs();
            da.partial_cmp(&db).expect("selector weights are finite").then(a.cmp(&b))
        })
        .expect("caller checked fractional set is non-empty")
}

fn finish(
    model: &MilpModel,
    root_bound: f64,
    solution: Vec<f64>,
    status: SolveStatus,
    mut stats: SolveStats,
    start: Instant,
) -> PgsSolution {
    let objective: f64 = solution
        .iter()
        .zip(&model.objective)
        .map(|(&v, &c)| v * c)
        .sum();
    let (mut x, plan) = model.decode(&solution);
    pack_bursts(model, &mut x, &plan);
    stats.wall_s = start.elapsed().as_secs_f64();
    PgsSolution {
        status,
        allocation: Some(x),
        quality: Some(plan),
        objective: Some(objective),
        lp_bound: Some(root_bound),
        stats,
        infeasibility_note: None,
    }
}

fn finish_limit(
    model: &MilpModel,
    incumbent: Option<(f64, Vec<f64>, Option<PgsSolution>)>,
    open_bound: f64,
    mut stats: SolveStats,
    start: Instant,
) -> PgsSolution {
    match incumbent {
        Some((_, _, Some(ready))) => {
            stats.wall_s = start.elapsed().as_secs_f64();
            PgsSolution {
                status: SolveStatus::TimeLimit,
                lp_bound: Some(open_bound),
                stats,
                ..ready
            }
        }
        Some((obj, raw, None)) => {
            let mut sol = finish(model, open_bound, raw, SolveStatus::TimeLimit, stats, start);
            sol.objective = Some(obj);
            sol
        }
        None => {
            stats.wall_s = start.elapsed().as_secs_f64();
            PgsSolution {
                status: SolveStatus::TimeLimit,
                allocation: None,
                quality: None,
                objective: None,
                lp_bound: Some(open_bound),
                stats,
                infeasibility_note: None,
            }
        }
    }
}

/// Human-readable reason for an infeasible instance: an aggregate
/// capacity argument when one exists, otherwise the failing row family.
fn infeasibility_note(model: &MilpModel, row: Option<usize>) -> String {
    if let Some(note) = aggregate_note(model) {
        return note;
    }
    match row.and_then(|r| model.rows.get(r)).map(|r| &r.kind) {
        Some(RowKind::CumulativeDelivery { user, segment }) => format!(
            "cumulative delivery for user {} cannot cover demand through segment {}",
            model.user_ids[*user],
            segment + 1
        ),
        Some(RowKind::AverageQuality { user }) => format!(
            "average-quality target unreachable for user {}",
            model.user_ids[*user]
        ),
        Some(RowKind::Capacity { bs, slot }) => {
            format!("airtime capacity exceeded at BS {} slot {}", bs + 1, slot)
        }
        Some(RowKind::PrebufferCap { user, segment }) => format!(
            "prebuffer cap binds user {} at segment {}",
            model.user_ids[*user],
            segment + 1
        ),
        _ => "relaxation infeasible".into(),
    }
}

/// Per-user check ignoring contention: even with the whole BS, the
/// cheapest plan meeting the quality target may not fit by some deadline.
fn aggregate_note(model: &MilpModel) -> Option<String> {
    let instance = &model.instance;
    let bitrates = instance.ladder.bitrates_bps();
    let q_max = bitrates.len();
    let tau = instance.rates.slot_s;
    for i in 0..model.n_users {
        let sched = instance.schedule.user(i);
        let n_seg = sched.n_segments();
        if n_seg == 0 {
            continue;
        }
        // cheapest level multiset meeting the level-weighted target, laid
        // out cheapest-late (raises applied from the last segment back)
        let target = (instance.l_req * n_seg as f64 - 1e-9).ceil() as u32;
        let mut levels = vec![1u32; n_seg];
        let mut total = n_seg as u32;
        let mut s = n_seg;
        while total < target {
            s = if s == 0 { n_seg - 1 } else { s - 1 };
            let room = (q_max as u32 - levels[s]).min(target - total);
            levels[s] += room;
            total += room;
        }
        let mut cum_demand = 0.0;
        let mut capacity = 0.0;
        let mut t = sched.entry_slot;
        for (s, &deadline) in sched.deadline_slots.iter().enumerate() {
            cum_demand += instance.schedule.seg_s * bitrates[levels[s] as usize - 1];
            while t <= deadline {
                capacity += instance.rates.rate_bps(i, t) * tau;
                t += 1;
            }
            if cum_demand > capacity * (1.0 + 1e-9) {
                return Some(format!(
                    "user {} needs at least {:.0} bits by slot {} but at most {:.0} are deliverable even alone",
                    model.user_ids[i], cum_demand, deadline, capacity
                ));
            }
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pgs::test_support::single_bs_instance;
    use crate::pgs::{build_model, check_solution, solve_lp_relaxation};
    use crate::streaming::QualityLadder;
    use approx::assert_relative_eq;

    fn ladder2() -> QualityLadder {
        QualityLadder::new(vec![0.25e6, 0.5e6]).unwrap()
    }

    fn solve(instance: &crate::pgs::PgsInstance) -> PgsSolution {
        let model = build_model(instance).unwrap();
        solve_exact(&model, &SolveLimits::default(), SOLVE_TOL)
    }

    #[test]
    fn constant_rate_instance() {
        let instance = single_bs_instance(vec![vec![1e6; 20]], ladder2(), 10.0, 2.0, None);
        let sol = solve(&instance);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.objective.unwrap(), 10.0, epsilon = 1e-6);
        let checks =
            check_solution(&instance, sol.allocation.as_ref().unwrap(), sol.quality.as_ref().unwrap(), 1e-6)
                .unwrap();
        assert!(checks.iter().all(|c| c.ok));
    }

    #[test]
    fn front_loads_at_peak_rate() {
        let mut rates = vec![2e6; 10];
        rates.extend(vec![1e6; 10]);
        let instance = single_bs_instance(vec![rates], ladder2(), 10.0, 2.0, None);
        let sol = solve(&instance);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.objective.unwrap(), 5.0, epsilon = 1e-6);
        assert_relative_eq!(sol.lp_bound.unwrap(), 5.0, epsilon = 1e-6);
        // everything is delivered in the fast half
        let x = sol.allocation.unwrap();
        let late: f64 = (11..=20).map(|t| x.share(0, t)).sum();
        assert!(late < 1e-6, "late airtime {late}");
    }

    #[test]
    fn mixed_levels_hit_fractional_target() {
        let instance = single_bs_instance(vec![vec![1e6; 20]], ladder2(), 10.0, 1.5, None);
        let sol = solve(&instance);
        assert_eq!(sol.status, SolveStatus::Optimal);
        assert_relative_eq!(sol.objective.unwrap(), 7.5, epsilon = 1e-6);
    }

    #[test]
    fn reports_infeasible_with_note() {
        let instance = single_bs_instance(vec![vec![0.4e6; 20]], ladder2(), 10.0, 2.0, None);
        let sol = solve(&instance);
        assert_eq!(sol.status, SolveStatus::Infeasible);
        let note = sol.infeasibility_note.unwrap();
        assert!(note.contains("user 1"), "{note}");
    }

    #[test]
    fn two_user_contention() {
        // both users share one BS; capacity forces serialization
        let instance = single_bs_instance(
            vec![vec![1e6; 20], vec![1e6; 20]],
            ladder2(),
            10.0,
            1.0,
            None,
        );
        let sol = solve(&instance);
        assert_eq!(sol.status, SolveStatus::Optimal);
        // each user needs 5 Mbit at 1 Mbit/s
        assert_relative_eq!(sol.objective.unwrap(), 10.0, epsilon = 1e-6);
        let checks =
            check_solution(&instance, sol.allocation.as_ref().unwrap(), sol.quality.as_ref().unwrap(), 1e-6)
                .unwrap();
        assert!(checks.iter().all(|c| c.ok), "{checks:?}");
    }

    #[test]
    fn exact_matches_relaxation_when_tight() {
        let instance = single_bs_instance(vec![vec![1e6; 20]], ladder2(), 10.0, 2.0, None);
        let model = build_model(&instance).unwrap();
        let (bound, _) = solve_lp_relaxation(&model).unwrap();
        let sol = solve_exact(&model, &SolveLimits::default(), SOLVE_TOL);
        assert_relative_eq!(bound, sol.objective.unwrap(), epsilon = 1e-6);
    }
}
