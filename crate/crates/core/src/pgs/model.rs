//! The airtime/quality model: continuous share variables `x[i][t]` over
//! present slots, binary level selectors `q[i][s][l]`, and the linear rows
//! tying cumulative demand to cumulative delivery under per-BS capacity.

use super::simplex::{LpProblem, LpRow, Rel};
use super::{PgsError, PgsInstance};
use crate::playback::AllocationPlan;
use crate::streaming::QualityPlan;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VarKind {
    /// Airtime share of `user` at 1-based `slot`.
    Share { user: usize, slot: usize },
    /// Binary selector: `user` streams `segment` (0-based) at `level` (1-based).
    Level { user: usize, segment: usize, level: u32 },
}

#[derive(Debug, Clone)]
pub struct Variable {
    pub kind: VarKind,
    pub lower: f64,
    pub upper: f64,
    pub is_binary: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RowKind {
    /// Cumulative demand through `segment` must not exceed cumulative
    /// delivery by its deadline.
    CumulativeDelivery { user: usize, segment: usize },
    /// Exactly one level per segment.
    Selection { user: usize, segment: usize },
    /// Level-weighted average quality target.
    AverageQuality { user: usize },
    /// Airtime shares on one BS-slot sum to at most one.
    Capacity { bs: usize, slot: usize },
    /// Delivered-minus-playable bits stay under the prebuffer cap.
    PrebufferCap { user: usize, segment: usize },
}

#[derive(Debug, Clone)]
pub struct Row {
    pub kind: RowKind,
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Rel,
    pub rhs: f64,
}

#[derive(Debug, Clone)]
pub struct MilpModel {
    pub vars: Vec<Variable>,
    pub rows: Vec<Row>,
    /// Objective coefficients: 1 on every share column, 0 on level columns.
    pub objective: Vec<f64>,
    /// Column of `x[i][t]`, when user `i` is present at slot `t`.
    x_col: Vec<Vec<Option<usize>>>,
    /// First level column of `(user, segment)`; levels are contiguous.
    q_base: Vec<Vec<usize>>,
    pub n_users: usize,
    pub n_slots: usize,
    pub q_max: u32,
    pub user_ids: Vec<u64>,
    /// The instance the model was built from; keeps decoding, repair, and
    /// post-processing self-contained.
    pub instance: PgsInstance,
}

impl MilpModel {
    pub fn n_vars(&self) -> usize {
        self.vars.len()
    }

    pub fn n_share_vars(&self) -> usize {
        self.vars.iter().filter(|v| !v.is_binary).count()
    }

    pub fn n_level_vars(&self) -> usize {
        self.vars.iter().filter(|v| v.is_binary).count()
    }

    pub fn x_col(&self, user: usize, slot: usize) -> Option<usize> {
        self.x_col[user][slot - 1]
    }

    pub fn q_col(&self, user: usize, segment: usize, level: u32) -> usize {
        self.q_base[user][segment] + (level - 1) as usize
    }

    pub fn rows_of_kind(&self, pred: impl Fn(&RowKind) -> bool) -> usize {
        self.rows.iter().filter(|r| pred(&r.kind)).count()
    }

    /// Relaxed LP: binaries in `[0, 1]` unless overridden per column.
    pub fn to_lp(&self, overrides: &[(usize, f64, f64)]) -> LpProblem {
        let mut lower: Vec<f64> = self.vars.iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = self.vars.iter().map(|v| v.upper).collect();
        for &(col, lo, hi) in overrides {
            lower[col] = lo;
            upper[col] = hi;
        }
        LpProblem {
            n_vars: self.vars.len(),
            objective: self.objective.clone(),
            lower,
            upper,
            rows: self
                .rows
                .iter()
                .map(|r| LpRow { coeffs: r.coeffs.clone(), rel: r.rel, rhs: r.rhs })
                .collect(),
        }
    }

    /// LP over shares only, with every level selector pinned to `plan`.
    pub fn to_lp_with_levels(&self, plan: &QualityPlan) -> LpProblem {
        let mut overrides = Vec::new();
        for (i, levels) in plan.levels.iter().enumerate() {
            for (s, &level) in levels.iter().enumerate() {
                for l in 1..=self.q_max {
                    let v = if l == level { 1.0 } else { 0.0 };
                    overrides.push((self.q_col(i, s, l), v, v));
                }
            }
        }
        self.to_lp(&overrides)
    }

    /// Split a solver vector into allocation and quality plans. Levels are
    /// taken as the largest-weight selector per segment.
    pub fn decode(&self, solution: &[f64]) -> (AllocationPlan, QualityPlan) {
        let mut x = AllocationPlan::zeros(self.n_users, self.n_slots);
        for (i, row) in self.x_col.iter().enumerate() {
            for (k, col) in row.iter().enumerate() {
                if let Some(c) = col {
                    x.set_share(i, k + 1, solution[*c].clamp(0.0, 1.0));
                }
            }
        }
        let mut levels = Vec::with_capacity(self.n_users);
        for (i, bases) in self.q_base.iter().enumerate() {
            let mut user_levels = Vec::with_capacity(bases.len());
            for s in 0..bases.len() {
                let best = (1..=self.q_max)
                    .max_by(|&a, &b| {
                        let va = solution[self.q_col(i, s, a)];
                        let vb = solution[self.q_col(i, s, b)];
                        va.partial_cmp(&vb).expect("selector weights are finite")
                    })
                    .expect("ladder has at least one level");
                user_levels.push(best);
            }
            levels.push(user_levels);
        }
        (x, QualityPlan { levels })
    }

    /// Binary columns whose relaxed value is away from both 0 and 1.
    pub fn fractional_levels(&self, solution: &[f64], tol: f64) -> Vec<usize> {
        self.vars
            .iter()
            .enumerate()
            .filter(|(c, v)| {
                v.is_binary && solution[*c] > tol && solution[*c] < 1.0 - tol
            })
            .map(|(c, _)| c)
            .collect()
    }
}

/// Assemble the optimization model for an instance.
pub fn build_model(instance: &PgsInstance) -> Result<MilpModel, PgsError> {
    let rates = &instance.rates;
    let schedule = &instance.schedule;
    let ladder = &instance.ladder;
    let n_users = rates.n_users();
    let n_slots = rates.n_slots();
    let q_max = ladder.q_max();
    let tau = rates.slot_s;
    let seg_s = schedule.seg_s;

    let mut vars = Vec::new();
    let mut objective = Vec::new();

    // share columns exist only where the user is present; absent slots are
    // pinned to zero by omission
    let mut x_col = vec![vec![None; n_slots]; n_users];
    for i in 0..n_users {
        for t in 1..=n_slots {
            if rates.is_present(i, t) {
                x_col[i][t - 1] = Some(vars.len());
                vars.push(Variable {
                    kind: VarKind::Share { user: i, slot: t },
                    lower: 0.0,
                    upper: 1.0,
                    is_binary: false,
                });
                objective.push(1.0);
            }
        }
    }

    let mut q_base = vec![Vec::new(); n_users];
    for i in 0..n_users {
        for s in 0..schedule.n_segments(i) {
            q_base[i].push(vars.len());
            for l in 1..=q_max {
                vars.push(Variable {
                    kind: VarKind::Level { user: i, segment: s, level: l },
                    lower: 0.0,
                    upper: 1.0,
                    is_binary: true,
                });
                objective.push(0.0);
            }
        }
    }

    let mut model = MilpModel {
        vars,
        rows: Vec::new(),
        objective,
        x_col,
        q_base,
        n_users,
        n_slots,
        q_max,
        user_ids: instance.user_ids.clone(),
        instance: instance.clone(),
    };

    // cumulative delivery: for each user and segment, the bits of all
    // segments up to it must arrive by its deadline
    for i in 0..n_users {
        let entry = schedule.user(i).entry_slot;
        for s in 0..schedule.n_segments(i) {
            let deadline = schedule.user(i).deadline_slots[s];
            let mut coeffs = Vec::new();
            for s2 in 0..=s {
                for l in 1..=q_max {
                    let bits = seg_s * ladder.bitrate_bps(l).expect("level in range");
                    coeffs.push((model.q_col(i, s2, l), bits));
                }
            }
            for t in entry..=deadline {
                if let Some(c) = model.x_col(i, t) {
                    coeffs.push((c, -rates.rate_bps(i, t) * tau));
                }
            }
            model.rows.push(Row {
                kind: RowKind::CumulativeDelivery { user: i, segment: s },
                coeffs,
                rel: Rel::Le,
                rhs: 0.0,
            });
        }
    }

    // exactly one level per segment
    for i in 0..n_users {
        for s in 0..schedule.n_segments(i) {
            model.rows.push(Row {
                kind: RowKind::Selection { user: i, segment: s },
                coeffs: (1..=q_max).map(|l| (model.q_col(i, s, l), 1.0)).collect(),
                rel: Rel::Eq,
                rhs: 1.0,
            });
        }
    }

    // level-weighted average quality
    for i in 0..n_users {
        let n_seg = schedule.n_segments(i);
        if n_seg == 0 {
            continue;
        }
        let coeffs = (0..n_seg)
            .flat_map(|s| (1..=q_max).map(move |l| (s, l)))
            .map(|(s, l)| (model.q_col(i, s, l), l as f64))
            .collect();
        model.rows.push(Row {
            kind: RowKind::AverageQuality { user: i },
            coeffs,
            rel: Rel::Ge,
            rhs: instance.l_req * n_seg as f64,
        });
    }

    // per-BS airtime capacity, one row per BS and slot
    for j in 0..instance.assoc.n_bs() {
        for t in 1..=n_slots {
            let coeffs = instance
                .assoc
                .users_of(j, t)
                .iter()
                .filter_map(|&i| model.x_col(i, t).map(|c| (c, 1.0)))
                .collect();
            model.rows.push(Row {
                kind: RowKind::Capacity { bs: j, slot: t },
                coeffs,
                rel: Rel::Le,
                rhs: 1.0,
            });
        }
    }

    // optional prebuffer cap: delivered minus playable bits at each
    // segment boundary
    if let Some(cap) = instance.prebuffer_cap_bits {
        for i in 0..n_users {
            let entry = schedule.user(i).entry_slot;
            for s in 0..schedule.n_segments(i) {
                let deadline = schedule.user(i).deadline_slots[s];
                let mut coeffs = Vec::new();
                for t in entry..=deadline {
                    if let Some(c) = model.x_col(i, t) {
                        coeffs.push((c, rates.rate_bps(i, t) * tau));
                    }
                }
                for s2 in 0..=s {
                    for l in 1..=q_max {
                        let bits = seg_s * ladder.bitrate_bps(l).expect("level in range");
                        coeffs.push((model.q_col(i, s2, l), -bits));
                    }
                }
                model.rows.push(Row {
                    kind: RowKind::PrebufferCap { user: i, segment: s },
                    coeffs,
                    rel: Rel::Le,
                    rhs: cap,
                });
            }
        }
    }

    Ok(model)
}
