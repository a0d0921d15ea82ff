//! LP relaxation and the rounding repair used at scale: round each
//! segment's fractional level expectation down, raise segments by cheapest
//! added bits until the quality target holds, then re-solve the share-only
//! LP for the fixed levels.

use super::model::MilpModel;
use super::pack::pack_bursts;
use super::simplex::LpError;
use super::{PgsError, PgsSolution, SolveStats, SolveStatus};
use crate::streaming::QualityPlan;

/// Optimal value and solution of the model with binaries relaxed to [0, 1].
pub fn solve_lp_relaxation(model: &MilpModel) -> Result<(f64, Vec<f64>), PgsError> {
    let sol = model.to_lp(&[]).solve()?;
    Ok((sol.objective, sol.x))
}

/// Round a fractional relaxation into a feasible plan.
///
/// Returns a `Heuristic` solution whose share allocation is LP-exact for
/// the rounded levels, or `Infeasible` when the repair cannot reach the
/// quality target within capacity.
pub fn heuristic_round(model: &MilpModel, fractional: &[f64]) -> PgsSolution {
    let lp_bound: f64 = fractional
        .iter()
        .zip(&model.objective)
        .map(|(&v, &c)| v * c)
        .sum();
    let mut stats = SolveStats::default();
    let start = std::time::Instant::now();

    let plan = round_levels(model, fractional);
    let outcome = model.to_lp_with_levels(&plan).solve();
    stats.wall_s = start.elapsed().as_secs_f64();
    match outcome {
        Ok(sol) => {
            stats.lp_pivots = sol.pivots;
            let (mut x, _) = model.decode(&sol.x);
            pack_bursts(model, &mut x, &plan);
            PgsSolution {
                status: SolveStatus::Heuristic,
                allocation: Some(x),
                quality: Some(plan),
                objective: Some(sol.objective),
                lp_bound: Some(lp_bound),
                stats,
                infeasibility_note: None,
            }
        }
        Err(LpError::Infeasible { .. }) => PgsSolution {
            lp_bound: Some(lp_bound),
            ..PgsSolution::infeasible(
                "rounded quality plan cannot be delivered within capacity".into(),
                stats,
            )
        },
        Err(e) => PgsSolution::infeasible(format!("share LP failed: {e}"), stats),
    }
}

/// Floor of each segment's expected level, then cheapest-bits raises (ties
/// to the latest segment) until the level-weighted target holds per user.
fn round_levels(model: &MilpModel, fractional: &[f64]) -> QualityPlan {
    let instance = &model.instance;
    let q_max = model.q_max;
    let bitrates = instance.ladder.bitrates_bps();
    let mut levels = Vec::with_capacity(model.n_users);
    for i in 0..model.n_users {
        let n_seg = instance.schedule.n_segments(i);
        let mut user: Vec<u32> = (0..n_seg)
            .map(|s| {
                let expect: f64 = (1..=q_max)
                    .map(|l| l as f64 * fractional[model.q_col(i, s, l)])
                    .sum();
                ((expect + 1e-9).floor() as u32).clamp(1, q_max)
            })
            .collect();
        let target = instance.l_req * n_seg as f64;
        let mut total: u32 = user.iter().sum();
        while (total as f64) < target - 1e-9 {
            let cheapest = (0..n_seg)
                .filter(|&s| user[s] < q_max)
                .min_by(|&a, &b| {
                    let da = bitrates[user[a] as usize] - bitrates[user[a] as usize - 1];
                    let db = bitrates[user[b] as usize] - bitrates[user[b] as usize - 1];
                    // cheaper added bits first; on ties prefer the segment
                    // with the later deadline
                    da.partial_cmp(&db)
                        .expect("ladder bitrates are finite")
                        .then(b.cmp(&a))
                })
                .expect("quality target within ladder range leaves room to raise");
            user[cheapest] += 1;
            total += 1;
        }
        levels.push(user);
    }
    QualityPlan { levels }
}
