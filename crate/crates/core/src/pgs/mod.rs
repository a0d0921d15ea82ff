//! Joint planning of airtime shares and per-segment quality over the
//! lookahead window: model construction, exact branch-and-bound, an LP
//! relaxation with rounding repair for large instances, a brute-force
//! enumeration oracle, and MPS export.

pub mod branch_bound;
pub mod heuristic;
pub mod model;
pub mod mps;
pub mod oracle;
pub mod pack;
pub mod simplex;
#[doc(hidden)]
pub mod test_support;

use crate::playback::{verify_plan, AllocationPlan, PlaybackReport};
use crate::radio::RateMatrix;
use crate::scenario::AssociationMap;
use crate::streaming::{QualityLadder, QualityPlan, SegmentSchedule};
use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use branch_bound::{solve_exact, SolveLimits};
pub use heuristic::{heuristic_round, solve_lp_relaxation};
pub use model::{build_model, MilpModel, RowKind};
pub use oracle::enumerate_oracle;

/// Feasibility and optimality tolerance used across the solver stack.
pub const SOLVE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum PgsError {
    #[error("target level {0} outside ladder range [1, {1}]")]
    BadTargetLevel(f64, u32),
    #[error("schedule has {got} users, rate matrix has {want}")]
    UserMismatch { got: usize, want: usize },
    #[error("deadline slot {deadline} of user {user} exceeds the {n_slots}-slot window")]
    DeadlineBeyondWindow { user: usize, deadline: usize, n_slots: usize },
    #[error("user {user} segment {segment}: deadline outside presence")]
    DeadlineOutsidePresence { user: usize, segment: usize },
    #[error("instance too large to enumerate: {0} assignments exceed {1}")]
    OracleTooLarge(f64, f64),
    #[error("lp: {0}")]
    Lp(#[from] simplex::LpError),
    #[error("playback: {0}")]
    Playback(#[from] crate::playback::PlaybackError),
    #[error("streaming: {0}")]
    Streaming(#[from] crate::streaming::StreamingError),
}

/// One optimization instance: predicted rates, association, video workload,
/// and the target average quality.
#[derive(Debug, Clone)]
pub struct PgsInstance {
    pub rates: RateMatrix,
    pub assoc: AssociationMap,
    pub ladder: QualityLadder,
    pub schedule: SegmentSchedule,
    /// Target average quality level per user, in `[1, q_max]`.
    pub l_req: f64,
    /// Optional cap on delivered-but-not-yet-playable bits.
    pub prebuffer_cap_bits: Option<f64>,
    /// User ids for naming in exports, aligned with rate-matrix rows.
    pub user_ids: Vec<u64>,
}

impl PgsInstance {
    pub fn new(
        rates: RateMatrix,
        assoc: AssociationMap,
        ladder: QualityLadder,
        schedule: SegmentSchedule,
        l_req: f64,
    ) -> Result<Self, PgsError> {
        let user_ids = (1..=rates.n_users() as u64).collect();
        Self::with_ids(rates, assoc, ladder, schedule, l_req, None, user_ids)
    }

    pub fn with_ids(
        rates: RateMatrix,
        assoc: AssociationMap,
        ladder: QualityLadder,
        schedule: SegmentSchedule,
        l_req: f64,
        prebuffer_cap_bits: Option<f64>,
        user_ids: Vec<u64>,
    ) -> Result<Self, PgsError> {
        if !(1.0..=ladder.q_max() as f64).contains(&l_req) {
            return Err(PgsError::BadTargetLevel(l_req, ladder.q_max()));
        }
        if schedule.n_users() != rates.n_users() {
            return Err(PgsError::UserMismatch {
                got: schedule.n_users(),
                want: rates.n_users(),
            });
        }
        for i in 0..schedule.n_users() {
            for (&d, s) in schedule.user(i).deadline_slots.iter().zip(1..) {
                if d > rates.n_slots() {
                    return Err(PgsError::DeadlineBeyondWindow {
                        user: i,
                        deadline: d,
                        n_slots: rates.n_slots(),
                    });
                }
                if !rates.is_present(i, d) {
                    return Err(PgsError::DeadlineOutsidePresence { user: i, segment: s });
                }
            }
        }
        Ok(Self { rates, assoc, ladder, schedule, l_req, prebuffer_cap_bits, user_ids })
    }

    /// Full pipeline constructor: associate, derive rates and schedule.
    pub fn from_scenario(
        scenario: &crate::scenario::Scenario,
        radio: &crate::radio::RadioParams,
        ladder: QualityLadder,
        seg_s: f64,
        l_req: f64,
        prebuffer_cap_bits: Option<f64>,
    ) -> Result<Self, PgsError> {
        let rates = crate::radio::build_rate_matrix(scenario, radio);
        let assoc = crate::scenario::associate(scenario);
        let schedule = SegmentSchedule::from_scenario(scenario, seg_s)
            .map_err(|_| PgsError::BadTargetLevel(l_req, ladder.q_max()))?;
        let user_ids = scenario.traces.iter().map(|t| t.user_id).collect();
        Self::with_ids(rates, assoc, ladder, schedule, l_req, prebuffer_cap_bits, user_ids)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveStatus {
    Optimal,
    Heuristic,
    Infeasible,
    TimeLimit,
}

impl std::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            SolveStatus::Optimal => "optimal",
            SolveStatus::Heuristic => "heuristic",
            SolveStatus::Infeasible => "infeasible",
            SolveStatus::TimeLimit => "time_limit",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Clone, Default)]
pub struct SolveStats {
    pub nodes: usize,
    pub lp_pivots: usize,
    pub wall_s: f64,
}

/// Solver output: plans, objective (total airtime in slot-fractions), the
/// root LP bound, and run statistics.
#[derive(Debug, Clone)]
pub struct PgsSolution {
    pub status: SolveStatus,
    pub allocation: Option<AllocationPlan>,
    pub quality: Option<QualityPlan>,
    pub objective: Option<f64>,
    pub lp_bound: Option<f64>,
    pub stats: SolveStats,
    /// Human-readable note for infeasible instances.
    pub infeasibility_note: Option<String>,
}

impl PgsSolution {
    pub fn infeasible(note: String, stats: SolveStats) -> Self {
        Self {
            status: SolveStatus::Infeasible,
            allocation: None,
            quality: None,
            objective: None,
            lp_bound: None,
            stats,
            infeasibility_note: Some(note),
        }
    }

    /// Playback report for the solution's plans.
    pub fn verify(&self, instance: &PgsInstance) -> Result<Option<PlaybackReport>, PgsError> {
        match (&self.allocation, &self.quality) {
            (Some(x), Some(q)) => Ok(Some(verify_plan(
                x,
                &instance.rates,
                q,
                &instance.ladder,
                &instance.schedule,
            )?)),
            _ => Ok(None),
        }
    }
}

/// Result of one constraint-family check.
#[derive(Debug, Clone)]
pub struct ConstraintCheck {
    pub family: &'static str,
    pub ok: bool,
    /// Worst violation observed (0 when satisfied everywhere).
    pub worst: f64,
    pub detail: String,
}

/// Re-check a solution against the instance independently of the solver:
/// per-deadline cumulative delivery, average quality, per-BS capacity,
/// variable bounds, and stall-freedom via the playback simulator.
pub fn check_solution(
    instance: &PgsInstance,
    x: &AllocationPlan,
    plan: &QualityPlan,
    tol: f64,
) -> Result<Vec<ConstraintCheck>, PgsError> {
    let mut checks = Vec::new();
    let rates = &instance.rates;
    let tau = rates.slot_s;

    // bounds and absence
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for i in 0..x.n_users() {
        for t in 1..=x.n_slots() {
            let v = x.share(i, t);
            let over = (v - 1.0).max(-v).max(0.0);
            let absent = if rates.is_present(i, t) { 0.0 } else { v.abs() };
            if over.max(absent) > worst {
                worst = over.max(absent);
                detail = format!("user {i} slot {t}");
            }
        }
    }
    checks.push(ConstraintCheck { family: "bounds", ok: worst <= tol, worst, detail });

    // cumulative delivery vs cumulative demand at every deadline
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for i in 0..instance.schedule.n_users() {
        let curve = crate::streaming::demand_curve(plan, i, &instance.ladder, &instance.schedule)?;
        let mut delivered = 0.0;
        let mut t = instance.schedule.user(i).entry_slot;
        for (s, &(deadline, demand)) in curve.iter().enumerate() {
            while t <= deadline {
                delivered += x.share(i, t) * rates.rate_bps(i, t) * tau;
                t += 1;
            }
            let shortfall = (demand - delivered) / demand.max(1.0);
            if shortfall > worst {
                worst = shortfall;
                detail = format!("user {i} segment {}", s + 1);
            }
        }
    }
    checks.push(ConstraintCheck { family: "delivery (C1)", ok: worst <= tol, worst, detail });

    // level-weighted average quality per user
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for i in 0..instance.schedule.n_users() {
        let n_seg = instance.schedule.n_segments(i);
        if n_seg == 0 {
            continue;
        }
        let sum: f64 = plan.levels[i].iter().map(|&l| l as f64).sum();
        let shortfall = (instance.l_req * n_seg as f64 - sum) / n_seg as f64;
        if shortfall > worst {
            worst = shortfall;
            detail = format!("user {i}");
        }
    }
    checks.push(ConstraintCheck { family: "avg quality (C2)", ok: worst <= tol, worst, detail });

    // per-BS airtime capacity
    let mut worst = 0.0f64;
    let mut detail = String::new();
    for t in 1..=instance.assoc.n_slots() {
        for j in 0..instance.assoc.n_bs() {
            let load: f64 = instance.assoc.users_of(j, t).iter().map(|&i| x.share(i, t)).sum();
            if load - 1.0 > worst {
                worst = load - 1.0;
                detail = format!("bs {j} slot {t}");
            }
        }
    }
    checks.push(ConstraintCheck { family: "capacity (C3)", ok: worst <= tol, worst, detail });

    // prebuffer cap, when configured
    if let Some(cap) = instance.prebuffer_cap_bits {
        let mut worst = 0.0f64;
        let mut detail = String::new();
        for i in 0..instance.schedule.n_users() {
            let curve =
                crate::streaming::demand_curve(plan, i, &instance.ladder, &instance.schedule)?;
            let mut delivered = 0.0;
            let mut t = instance.schedule.user(i).entry_slot;
            for (s, &(deadline, playable)) in curve.iter().enumerate() {
                while t <= deadline {
                    delivered += x.share(i, t) * rates.rate_bps(i, t) * tau;
                    t += 1;
                }
                let over = (delivered - playable - cap) / cap.max(1.0);
                if over > worst {
                    worst = over;
                    detail = format!("user {i} segment {}", s + 1);
                }
            }
        }
        checks.push(ConstraintCheck { family: "prebuffer cap", ok: worst <= tol, worst, detail });
    }

    // zero stalls is the playback-level reading of C1
    let report = verify_plan(x, rates, plan, &instance.ladder, &instance.schedule)?;
    let stall = report.total_stall_s();
    checks.push(ConstraintCheck {
        family: "zero stalls",
        ok: stall == 0.0,
        worst: stall,
        detail: String::new(),
    });
    Ok(checks)
}
