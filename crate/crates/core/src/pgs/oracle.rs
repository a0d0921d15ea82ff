//! Brute-force reference: enumerate every level assignment meeting the
//! quality target, solve the share-only LP for each, and keep the global
//! minimum. Only viable on tiny instances; used to cross-check the
//! branch-and-bound solver.

use super::model::build_model;
use super::simplex::LpError;
use super::{PgsError, PgsInstance, PgsSolution, SolveStats, SolveStatus};
use crate::streaming::QualityPlan;

/// Enumeration ceiling on `q_max ^ total_segments`.
const MAX_ASSIGNMENTS: f64 = 1e5;

pub fn enumerate_oracle(instance: &PgsInstance) -> Result<PgsSolution, PgsError> {
    let start = std::time::Instant::now();
    let model = build_model(instance)?;
    let q_max = instance.ladder.q_max();
    let total_segments = instance.schedule.total_segments();
    let assignments = (q_max as f64).powi(total_segments as i32);
    if assignments > MAX_ASSIGNMENTS {
        return Err(PgsError::OracleTooLarge(assignments, MAX_ASSIGNMENTS));
    }

    let seg_counts: Vec<usize> =
        (0..instance.schedule.n_users()).map(|i| instance.schedule.n_segments(i)).collect();
    let mut stats = SolveStats::default();
    let mut best: Option<(f64, Vec<f64>, QualityPlan)> = None;

    let mut odometer = vec![1u32; total_segments];
    loop {
        let plan = split_plan(&odometer, &seg_counts);
        if meets_quality_target(&plan, instance.l_req) {
            match model.to_lp_with_levels(&plan).solve() {
                Ok(sol) => {
                    stats.lp_pivots += sol.pivots;
                    stats.nodes += 1;
                    if best.as_ref().map_or(true, |(obj, _, _)| sol.objective < obj - 1e-12) {
                        best = Some((sol.objective, sol.x, plan));
                    }
                }
                Err(LpError::Infeasible { .. }) => {
                    stats.nodes += 1;
                }
                Err(e) => return Err(e.into()),
            }
        }
        if !advance(&mut odometer, q_max) {
            break;
        }
    }

    stats.wall_s = start.elapsed().as_secs_f64();
    Ok(match best {
        Some((objective, solution, plan)) => {
            let (x, _) = model.decode(&solution);
            PgsSolution {
                status: SolveStatus::Optimal,
                allocation: Some(x),
                quality: Some(plan),
                objective: Some(objective),
                lp_bound: Some(objective),
                stats,
                infeasibility_note: None,
            }
        }
        None => PgsSolution::infeasible(
            "every level assignment meeting the quality target exceeds capacity".into(),
            stats,
        ),
    })
}

fn split_plan(flat: &[u32], seg_counts: &[usize]) -> QualityPlan {
    let mut levels = Vec::with_capacity(seg_counts.len());
    let mut k = 0;
    for &n in seg_counts {
        levels.push(flat[k..k + n].to_vec());
        k += n;
    }
    QualityPlan { levels }
}

fn meets_quality_target(plan: &QualityPlan, l_req: f64) -> bool {
    plan.levels.iter().all(|levels| {
        levels.is_empty()
            || levels.iter().map(|&l| l as f64).sum::<f64>() >= l_req * levels.len() as f64 - 1e-9
    })
}

fn advance(odometer: &mut [u32], q_max: u32) -> bool {
    for digit in odometer.iter_mut().rev() {
        if *digit < q_max {
            *digit += 1;
            return true;
        }
        *digit = 1;
    }
    false
}
