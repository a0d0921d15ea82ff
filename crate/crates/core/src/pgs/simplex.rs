//! Dense two-phase primal simplex with variable bounds.
//!
//! Handles `min c.x` subject to sparse Le/Ge/Eq rows and per-variable
//! bounds `lb <= x <= ub` (finite lower bounds, upper bounds may be
//! infinite). Ge rows are negated to Le during presolve; empty and
//! singleton rows are folded away; remaining rows are equilibrated by
//! their largest coefficient. Dantzig pricing with a Bland fallback after
//! a degeneracy streak guards against cycling.

use thiserror::Error;

/// Pivot / feasibility tolerance on equilibrated rows.
const TOL: f64 = 1e-9;
/// Reduced-cost tolerance.
const COST_TOL: f64 = 1e-9;
/// Consecutive degenerate pivots before switching to Bland's rule.
const DEGEN_LIMIT: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rel {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone)]
pub struct LpRow {
    pub coeffs: Vec<(usize, f64)>,
    pub rel: Rel,
    pub rhs: f64,
}

/// Minimization problem over bounded variables.
#[derive(Debug, Clone)]
pub struct LpProblem {
    pub n_vars: usize,
    pub objective: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub rows: Vec<LpRow>,
}

#[derive(Debug, Clone)]
pub struct LpSolution {
    pub objective: f64,
    pub x: Vec<f64>,
    pub pivots: usize,
}

#[derive(Debug, Error)]
pub enum LpError {
    #[error("infeasible{}", .row.map(|r| format!(" (row {r})")).unwrap_or_default())]
    Infeasible { row: Option<usize> },
    #[error("unbounded")]
    Unbounded,
    #[error("iteration limit reached after {0} pivots")]
    IterationLimit(usize),
    #[error("variable {0} has crossing bounds [{1}, {2}]")]
    BadBounds(usize, f64, f64),
}

impl LpProblem {
    pub fn solve(&self) -> Result<LpSolution, LpError> {
        for j in 0..self.n_vars {
            if !self.lower[j].is_finite() || self.lower[j] > self.upper[j] + TOL {
                return Err(LpError::BadBounds(j, self.lower[j], self.upper[j]));
            }
        }
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();

        // presolve: fold empty and singleton rows into bounds
        let mut kept: Vec<(Vec<(usize, f64)>, f64, usize)> = Vec::new();
        for (idx, row) in self.rows.iter().enumerate() {
            let mut merged: Vec<(usize, f64)> = Vec::with_capacity(row.coeffs.len());
            for &(j, a) in &row.coeffs {
                debug_assert!(j < self.n_vars);
                if a == 0.0 {
                    continue;
                }
                match merged.iter_mut().find(|(k, _)| *k == j) {
                    Some((_, acc)) => *acc += a,
                    None => merged.push((j, a)),
                }
            }
            merged.retain(|&(_, a)| a != 0.0);
            // normalize to Le (Eq becomes a Le pair folded below)
            let variants: &[(f64, f64)] = match row.rel {
                Rel::Le => &[(1.0, 1.0)],
                Rel::Ge => &[(-1.0, -1.0)],
                Rel::Eq => &[(1.0, 1.0), (-1.0, -1.0)],
            };
            for &(coeff_sign, rhs_sign) in variants {
                let rhs = row.rhs * rhs_sign;
                match merged.len() {
                    0 => {
                        if 0.0 > rhs + TOL * rhs.abs().max(1.0) {
                            return Err(LpError::Infeasible { row: Some(idx) });
                        }
                    }
                    1 => {
                        let (j, a) = (merged[0].0, merged[0].1 * coeff_sign);
                        if a > 0.0 {
                            upper[j] = upper[j].min(rhs / a);
                        } else {
                            lower[j] = lower[j].max(rhs / a);
                        }
                        if lower[j] > upper[j] + TOL {
                            return Err(LpError::Infeasible { row: Some(idx) });
                        }
                    }
                    _ => {
                        if coeff_sign == 1.0 {
                            kept.push((merged.clone(), rhs, idx));
                        } else {
                            kept.push((
                                merged.iter().map(|&(j, a)| (j, -a)).collect(),
                                rhs,
                                idx,
                            ));
                        }
                    }
                }
            }
        }
        // after tightening, fixed ranges may have collapsed
        for j in 0..self.n_vars {
            if lower[j] > upper[j] + TOL {
                return Err(LpError::Infeasible { row: None });
            }
            upper[j] = upper[j].max(lower[j]);
        }

        Tableau::build(self, &lower, &upper, &kept).and_then(Tableau::optimize)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum VarState {
    Basic,
    AtLower,
    AtUpper,
}

struct Tableau<'a> {
    problem: &'a LpProblem,
    m: usize,
    width: usize,
    n_structural: usize,
    n_artificial: usize,
    a: Vec<f64>,
    cost: Vec<f64>,
    val: Vec<f64>,
    basis: Vec<usize>,
    in_row: Vec<usize>,
    state: Vec<VarState>,
    lb: Vec<f64>,
    ub: Vec<f64>,
    orig_row: Vec<usize>,
    pivots: usize,
    degen_streak: usize,
    scratch: Vec<f64>,
}

const NONE: usize = usize::MAX;

impl<'a> Tableau<'a> {
    fn build(
        problem: &'a LpProblem,
        lower: &[f64],
        upper: &[f64],
        kept: &[(Vec<(usize, f64)>, f64, usize)],
    ) -> Result<Self, LpError> {
        let n = problem.n_vars;
        let m = kept.len();
        // columns: structural, one slack per Le row, artificials appended on demand
        let n_slack = m;
        let mut width = n + n_slack;

        // residuals with nonbasics at lower bounds determine which rows
        // start with a slack basis and which need an artificial
        let mut residual = vec![0.0; m];
        let mut scale = vec![1.0; m];
        for (r, (coeffs, rhs, _)) in kept.iter().enumerate() {
            let max_abs = coeffs.iter().map(|&(_, a)| a.abs()).fold(0.0, f64::max);
            scale[r] = if max_abs > 0.0 { 1.0 / max_abs } else { 1.0 };
            let lhs: f64 = coeffs.iter().map(|&(j, a)| a * lower[j]).sum();
            residual[r] = (rhs - lhs) * scale[r];
        }
        let needs_artificial: Vec<bool> = residual.iter().map(|&q| q < -TOL).collect();
        let n_artificial = needs_artificial.iter().filter(|&&b| b).count();
        width += n_artificial;

        let mut a = vec![0.0; m * width];
        let mut lb = vec![0.0; width];
        let mut ub = vec![f64::INFINITY; width];
        lb[..n].copy_from_slice(lower);
        ub[..n].copy_from_slice(&upper[..n]);

        let mut basis = vec![NONE; m];
        let mut val = vec![0.0; m];
        let mut state = vec![VarState::AtLower; width];
        let mut next_art = n + n_slack;
        for (r, (coeffs, _, _)) in kept.iter().enumerate() {
            // row sign: artificial rows are negated so the basic variable
            // (slack or artificial) starts with coefficient +1 and value >= 0
            let sgn = if needs_artificial[r] { -1.0 } else { 1.0 };
            let row = &mut a[r * width..(r + 1) * width];
            for &(j, coeff) in coeffs {
                row[j] = coeff * scale[r] * sgn;
            }
            row[n + r] = sgn; // slack of the Le row
            if needs_artificial[r] {
                row[next_art] = 1.0;
                basis[r] = next_art;
                val[r] = -residual[r];
                state[next_art] = VarState::Basic;
                next_art += 1;
            } else {
                basis[r] = n + r;
                val[r] = residual[r];
                state[n + r] = VarState::Basic;
            }
        }
        let mut in_row = vec![NONE; width];
        for (r, &b) in basis.iter().enumerate() {
            in_row[b] = r;
        }
        // nonbasic structurals rest at their lower bound
        for j in 0..width {
            if state[j] != VarState::Basic {
                state[j] = VarState::AtLower;
            }
        }

        Ok(Self {
            problem,
            m,
            width,
            n_structural: n,
            n_artificial,
            a,
            cost: vec![0.0; width],
            val,
            basis,
            in_row,
            state,
            lb,
            ub,
            orig_row: kept.iter().map(|&(_, _, idx)| idx).collect(),
            pivots: 0,
            degen_streak: 0,
            scratch: vec![0.0; width],
        })
    }

    fn value(&self, j: usize) -> f64 {
        match self.state[j] {
            VarState::Basic => self.val[self.in_row[j]],
            VarState::AtLower => self.lb[j],
            VarState::AtUpper => self.ub[j],
        }
    }

    fn optimize(mut self) -> Result<LpSolution, LpError> {
        if self.n_artificial > 0 {
            // phase 1: minimize the sum of artificial variables
            self.cost.fill(0.0);
            for j in self.n_structural + self.m..self.width {
                self.cost[j] = 1.0;
            }
            for r in 0..self.m {
                if self.basis[r] >= self.n_structural + self.m {
                    let row = &self.a[r * self.width..(r + 1) * self.width];
                    for (c, &v) in self.cost.iter_mut().zip(row) {
                        *c -= v;
                    }
                }
            }
            self.run(true)?;
            let infeas: f64 = (0..self.m)
                .filter(|&r| self.basis[r] >= self.n_structural + self.m)
                .map(|r| self.val[r])
                .sum();
            if infeas > 1e-7 {
                let row = (0..self.m)
                    .filter(|&r| self.basis[r] >= self.n_structural + self.m)
                    .max_by(|&p, &q| {
                        self.val[p].partial_cmp(&self.val[q]).expect("finite values")
                    })
                    .map(|r| self.orig_row[r]);
                return Err(LpError::Infeasible { row });
            }
            self.evict_artificials();
            // lock artificials out of the basis for phase 2
            for j in self.n_structural + self.m..self.width {
                self.ub[j] = 0.0;
            }
        }

        // phase 2 costs
        self.cost.fill(0.0);
        self.cost[..self.n_structural].copy_from_slice(&self.problem.objective);
        for r in 0..self.m {
            let cb = if self.basis[r] < self.n_structural {
                self.problem.objective[self.basis[r]]
            } else {
                0.0
            };
            if cb != 0.0 {
                let row = &self.a[r * self.width..(r + 1) * self.width];
                for (c, &v) in self.cost.iter_mut().zip(row) {
                    *c -= cb * v;
                }
            }
        }
        self.run(false)?;

        let x: Vec<f64> = (0..self.n_structural)
            .map(|j| {
                let v = self.value(j);
                v.clamp(self.problem.lower[j], self.problem.upper[j])
            })
            .collect();
        let objective = x
            .iter()
            .zip(&self.problem.objective)
            .map(|(&xv, &c)| xv * c)
            .sum();
        Ok(LpSolution { objective, x, pivots: self.pivots })
    }

    /// Pivot zero-valued artificials out of the basis where possible;
    /// rows that admit no pivot are redundant and keep a zero artificial.
    fn evict_artificials(&mut self) {
        for r in 0..self.m {
            if self.basis[r] < self.n_structural + self.m {
                continue;
            }
            let row = &self.a[r * self.width..(r + 1) * self.width];
            let enter = (0..self.n_structural + self.m)
                .find(|&j| self.state[j] != VarState::Basic && row[j].abs() > 1e-7);
            if let Some(j) = enter {
                self.pivot(r, j, 0.0, VarState::AtLower);
            }
        }
    }

    fn run(&mut self, phase_one: bool) -> Result<(), LpError> {
        let max_iters = 2000 + 50 * (self.m + self.width);
        loop {
            if self.pivots > max_iters {
                return Err(LpError::IterationLimit(self.pivots));
            }
            let bland = self.degen_streak > DEGEN_LIMIT;
            let Some((enter, dir)) = self.price(bland) else {
                return Ok(());
            };
            self.step(enter, dir, bland, phase_one)?;
        }
    }

    /// Pick an entering column and its movement direction (+1 from lower,
    /// -1 from upper), or None at optimality.
    fn price(&self, bland: bool) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64, f64)> = None;
        for j in 0..self.width {
            if self.state[j] == VarState::Basic || self.ub[j] - self.lb[j] <= TOL {
                continue;
            }
            let d = self.cost[j];
            let (eligible, dir) = match self.state[j] {
                VarState::AtLower => (d < -COST_TOL, 1.0),
                VarState::AtUpper => (d > COST_TOL, -1.0),
                VarState::Basic => unreachable!(),
            };
            if !eligible {
                continue;
            }
            if bland {
                return Some((j, dir));
            }
            let score = d.abs();
            if best.map_or(true, |(_, _, s)| score > s) {
                best = Some((j, dir, score));
            }
        }
        best.map(|(j, dir, _)| (j, dir))
    }

    fn step(&mut self, enter: usize, dir: f64, bland: bool, phase_one: bool) -> Result<(), LpError> {
        // ratio test: tightest blocking basic variable, then the entering
        // variable's own bound flip
        let flip = self.ub[enter] - self.lb[enter]; // may be inf
        let mut best: Option<(usize, VarState, f64, f64)> = None; // row, exit, |alpha|, ratio
        for r in 0..self.m {
            let alpha = dir * self.a[r * self.width + enter];
            let b = self.basis[r];
            let (ratio, exit_state) = if alpha > TOL {
                ((self.val[r] - self.lb[b]) / alpha, VarState::AtLower)
            } else if alpha < -TOL {
                if self.ub[b].is_infinite() {
                    continue;
                }
                ((self.ub[b] - self.val[r]) / (-alpha), VarState::AtUpper)
            } else {
                continue;
            };
            let ratio = ratio.max(0.0);
            let abs_alpha = alpha.abs();
            let take = match best {
                None => true,
                Some((br, _, b_alpha, b_ratio)) => {
                    ratio < b_ratio - 1e-12
                        || (ratio < b_ratio + 1e-12
                            && if bland {
                                self.basis[r] < self.basis[br]
                            } else {
                                abs_alpha > b_alpha
                            })
                }
            };
            if take {
                best = Some((r, exit_state, abs_alpha, ratio));
            }
        }

        match best {
            Some((row, exit_state, _, ratio)) if ratio <= flip + 1e-12 => {
                self.note_progress(ratio);
                self.pivot(row, enter, dir * ratio, exit_state);
                Ok(())
            }
            _ => {
                if flip.is_infinite() {
                    return if phase_one {
                        // phase-1 objective is bounded below; treat as stall
                        Err(LpError::IterationLimit(self.pivots))
                    } else {
                        Err(LpError::Unbounded)
                    };
                }
                // bound flip: the entering variable crosses to its other bound
                let delta = dir * flip;
                for r in 0..self.m {
                    self.val[r] -= self.a[r * self.width + enter] * delta;
                }
                self.state[enter] = if dir > 0.0 { VarState::AtUpper } else { VarState::AtLower };
                self.pivots += 1;
                self.note_progress(flip);
                Ok(())
            }
        }
    }

    fn note_progress(&mut self, step: f64) {
        if step > 1e-10 {
            self.degen_streak = 0;
        } else {
            self.degen_streak += 1;
        }
    }

    fn pivot(&mut self, row: usize, enter: usize, delta: f64, exit_state: VarState) {
        let width = self.width;
        let leaving = self.basis[row];
        // move every basic value along the entering direction
        if delta != 0.0 {
            for r in 0..self.m {
                self.val[r] -= self.a[r * width + enter] * delta;
            }
        }
        let entering_value = match self.state[enter] {
            VarState::AtLower => self.lb[enter] + delta,
            VarState::AtUpper => self.ub[enter] + delta,
            VarState::Basic => unreachable!("entering variable is nonbasic"),
        };

        // eliminate the entering column
        let piv = self.a[row * width + enter];
        debug_assert!(piv.abs() > 1e-12, "pivot {piv} too small");
        let inv = 1.0 / piv;
        {
            let r = &mut self.a[row * width..(row + 1) * width];
            for v in r.iter_mut() {
                *v *= inv;
            }
            r[enter] = 1.0;
            self.scratch.copy_from_slice(r);
        }
        for r in 0..self.m {
            if r == row {
                continue;
            }
            let f = self.a[r * width + enter];
            if f != 0.0 {
                let slice = &mut self.a[r * width..(r + 1) * width];
                for (v, &p) in slice.iter_mut().zip(&self.scratch) {
                    *v -= f * p;
                }
                slice[enter] = 0.0;
            }
        }
        let f = self.cost[enter];
        if f != 0.0 {
            for (c, &p) in self.cost.iter_mut().zip(&self.scratch) {
                *c -= f * p;
            }
            self.cost[enter] = 0.0;
        }

        // bookkeeping: basis swap and the stored value of the new basic
        self.val[row] = entering_value;
        self.basis[row] = enter;
        self.in_row[enter] = row;
        self.in_row[leaving] = NONE;
        self.state[enter] = VarState::Basic;
        self.state[leaving] = exit_state;
        if leaving >= self.n_structural + self.m {
            // an artificial that left the basis must never come back
            self.ub[leaving] = 0.0;
        }
        self.pivots += 1;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn row(coeffs: &[(usize, f64)], rel: Rel, rhs: f64) -> LpRow {
        LpRow { coeffs: coeffs.to_vec(), rel, rhs }
    }

    #[test]
    fn maximize_via_negated_costs() {
        // max x + y st x + 2y <= 4, 3x + y <= 6, 0 <= x,y <= 10
        let p = LpProblem {
            n_vars: 2,
            objective: vec![-1.0, -1.0],
            lower: vec![0.0; 2],
            upper: vec![10.0; 2],
            rows: vec![
                row(&[(0, 1.0), (1, 2.0)], Rel::Le, 4.0),
                row(&[(0, 3.0), (1, 1.0)], Rel::Le, 6.0),
            ],
        };
        let s = p.solve().unwrap();
        assert_relative_eq!(s.objective, -2.8, max_relative = 1e-9);
        assert_relative_eq!(s.x[0], 1.6, max_relative = 1e-9);
        assert_relative_eq!(s.x[1], 1.2, max_relative = 1e-9);
    }

    #[test]
    fn equality_and_ge_rows() {
        // min x + y st x + y >= 2, x - y = 0.5, bounds [0, 5]
        let p = LpProblem {
            n_vars: 2,
            objective: vec![1.0, 1.0],
            lower: vec![0.0; 2],
            upper: vec![5.0; 2],
            rows: vec![
                row(&[(0, 1.0), (1, 1.0)], Rel::Ge, 2.0),
                row(&[(0, 1.0), (1, -1.0)], Rel::Eq, 0.5),
            ],
        };
        let s = p.solve().unwrap();
        assert_relative_eq!(s.objective, 2.0, max_relative = 1e-9);
        assert_relative_eq!(s.x[0], 1.25, max_relative = 1e-9);
        assert_relative_eq!(s.x[1], 0.75, max_relative = 1e-9);
    }

    #[test]
    fn upper_bounds_bind_without_rows() {
        // min -x - 2y st x + y <= 3, y <= 1.5 (bound), x <= 2 (bound)
        let p = LpProblem {
            n_vars: 2,
            objective: vec![-1.0, -2.0],
            lower: vec![0.0; 2],
            upper: vec![2.0, 1.5],
            rows: vec![row(&[(0, 1.0), (1, 1.0)], Rel::Le, 3.0)],
        };
        let s = p.solve().unwrap();
        assert_relative_eq!(s.objective, -4.5, max_relative = 1e-9);
        assert_relative_eq!(s.x[0], 1.5, max_relative = 1e-9);
        assert_relative_eq!(s.x[1], 1.5, max_relative = 1e-9);
    }

    #[test]
    fn fixed_variables_respected() {
        let p = LpProblem {
            n_vars: 2,
            objective: vec![1.0, 0.0],
            lower: vec![0.0, 1.0],
            upper: vec![5.0, 1.0],
            rows: vec![row(&[(0, 1.0), (1, 1.0)], Rel::Ge, 3.0)],
        };
        let s = p.solve().unwrap();
        assert_relative_eq!(s.x[1], 1.0);
        assert_relative_eq!(s.objective, 2.0, max_relative = 1e-9);
    }

    #[test]
    fn detects_infeasible() {
        let p = LpProblem {
            n_vars: 1,
            objective: vec![1.0],
            lower: vec![0.0],
            upper: vec![1.0],
            rows: vec![row(&[(0, 1.0)], Rel::Ge, 2.0)],
        };
        assert!(matches!(p.solve(), Err(LpError::Infeasible { .. })));

        let p2 = LpProblem {
            n_vars: 2,
            objective: vec![0.0, 0.0],
            lower: vec![0.0; 2],
            upper: vec![1.0; 2],
            rows: vec![
                row(&[(0, 1.0), (1, 1.0)], Rel::Ge, 3.0),
                row(&[(0, 1.0), (1, 1.0)], Rel::Le, 1.0),
            ],
        };
        assert!(matches!(p2.solve(), Err(LpError::Infeasible { .. })));
    }

    #[test]
    fn detects_unbounded() {
        let p = LpProblem {
            n_vars: 2,
            objective: vec![-1.0, 0.0],
            lower: vec![0.0; 2],
            upper: vec![f64::INFINITY; 2],
            rows: vec![row(&[(0, 1.0), (1, -1.0)], Rel::Le, 1.0)],
        };
        assert!(matches!(p.solve(), Err(LpError::Unbounded)));
    }

    #[test]
    fn empty_and_singleton_rows_fold_into_bounds() {
        let p = LpProblem {
            n_vars: 2,
            objective: vec![-1.0, -1.0],
            lower: vec![0.0; 2],
            upper: vec![f64::INFINITY; 2],
            rows: vec![
                row(&[], Rel::Le, 0.0),
                row(&[(0, 2.0)], Rel::Le, 1.0),
                row(&[(1, 1.0)], Rel::Eq, 0.25),
            ],
        };
        let s = p.solve().unwrap();
        assert_relative_eq!(s.x[0], 0.5, max_relative = 1e-9);
        assert_relative_eq!(s.x[1], 0.25, max_relative = 1e-9);

        let bad = LpProblem {
            n_vars: 1,
            objective: vec![0.0],
            lower: vec![0.0],
            upper: vec![1.0],
            rows: vec![row(&[], Rel::Ge, 1.0)],
        };
        assert!(matches!(bad.solve(), Err(LpError::Infeasible { row: Some(0) })));
    }

    #[test]
    fn degenerate_problem_terminates() {
        // classic cycling-prone structure stays finite under the fallback
        let p = LpProblem {
            n_vars: 4,
            objective: vec![-0.75, 150.0, -0.02, 6.0],
            lower: vec![0.0; 4],
            upper: vec![f64::INFINITY; 4],
            rows: vec![
                row(&[(0, 0.25), (1, -60.0), (2, -0.04), (3, 9.0)], Rel::Le, 0.0),
                row(&[(0, 0.5), (1, -90.0), (2, -0.02), (3, 3.0)], Rel::Le, 0.0),
                row(&[(2, 1.0)], Rel::Le, 1.0),
            ],
        };
        let s = p.solve().unwrap();
        assert_relative_eq!(s.objective, -0.05, max_relative = 1e-6);
    }

    #[test]
    fn random_lps_satisfy_feasibility_and_beat_random_points() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(17);
        for trial in 0..200 {
            let n = rng.gen_range(2..8);
            let m = rng.gen_range(1..6);
            let p = LpProblem {
                n_vars: n,
                objective: (0..n).map(|_| rng.gen_range(-2.0..2.0)).collect(),
                lower: vec![0.0; n],
                upper: (0..n).map(|_| rng.gen_range(0.5..3.0)).collect(),
                rows: (0..m)
                    .map(|_| {
                        let k = rng.gen_range(1..=n);
                        LpRow {
                            coeffs: (0..k).map(|j| (j, rng.gen_range(-1.0..2.0))).collect(),
                            rel: if rng.gen_bool(0.7) { Rel::Le } else { Rel::Ge },
                            rhs: rng.gen_range(-0.5..3.0),
                        }
                    })
                    .collect(),
            };
            let outcome = p.solve();
            let Ok(sol) = outcome else { continue };
            // solution satisfies every row and bound
            for (ri, r) in p.rows.iter().enumerate() {
                let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * sol.x[j]).sum();
                let ok = match r.rel {
                    Rel::Le => lhs <= r.rhs + 1e-6,
                    Rel::Ge => lhs >= r.rhs - 1e-6,
                    Rel::Eq => (lhs - r.rhs).abs() <= 1e-6,
                };
                assert!(ok, "trial {trial} row {ri} violated: {lhs} vs {}", r.rhs);
            }
            // no feasible random point does better
            for _ in 0..200 {
                let cand: Vec<f64> =
                    (0..n).map(|j| rng.gen_range(0.0..=p.upper[j])).collect();
                let feasible = p.rows.iter().all(|r| {
                    let lhs: f64 = r.coeffs.iter().map(|&(j, a)| a * cand[j]).sum();
                    match r.rel {
                        Rel::Le => lhs <= r.rhs,
                        Rel::Ge => lhs >= r.rhs,
                        Rel::Eq => (lhs - r.rhs).abs() <= 1e-9,
                    }
                });
                if feasible {
                    let obj: f64 =
                        cand.iter().zip(&p.objective).map(|(&x, &c)| x * c).sum();
                    assert!(
                        obj >= sol.objective - 1e-6,
                        "trial {trial}: random point beats optimum"
                    );
                }
            }
        }
    }
}
