//! Independent re-check of a solution dump against its configuration:
//! rebuilds the instance, loads `allocation.csv` and `quality.csv`, and
//! reports one pass/fail line per constraint family.

use crate::config::RunConfig;
use crate::runner::build_scenario;
use anyhow::{anyhow, Context};
use pgs_core::pgs::{check_solution, ConstraintCheck, PgsInstance, SOLVE_TOL};
use pgs_core::playback::AllocationPlan;
use pgs_core::radio::build_rate_matrix;
use pgs_core::scenario::associate;
use pgs_core::streaming::{QualityPlan, SegmentSchedule};
use serde::Deserialize;
use std::collections::HashMap;
use std::path::Path;

pub struct VerifyOutcome {
    pub checks: Vec<ConstraintCheck>,
}

impl VerifyOutcome {
    pub fn all_ok(&self) -> bool {
        self.checks.iter().all(|c| c.ok)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for check in &self.checks {
            let verdict = if check.ok { "PASS" } else { "FAIL" };
            out.push_str(&format!("{:<18} {}", check.family, verdict));
            if !check.ok {
                out.push_str(&format!("  worst violation {:.3e} {}", check.worst, check.detail));
            }
            out.push('\n');
        }
        out
    }
}

pub fn verify_dump(config: &RunConfig, dir: &Path) -> anyhow::Result<VerifyOutcome> {
    config.validate().map_err(|e| anyhow!(e))?;
    let scenario = build_scenario(config)?;
    let rates = build_rate_matrix(&scenario, &config.radio);
    let assoc = associate(&scenario);
    let schedule = SegmentSchedule::from_scenario(&scenario, config.segment_s)
        .map_err(|e| anyhow!("schedule: {e}"))?;
    let user_ids: Vec<u64> = scenario.traces.iter().map(|t| t.user_id).collect();
    let index_of: HashMap<u64, usize> =
        user_ids.iter().enumerate().map(|(i, &u)| (u, i)).collect();

    let instance = PgsInstance::with_ids(
        rates,
        assoc,
        config.ladder(),
        schedule.clone(),
        config.l_req,
        config.prebuffer_cap_bits,
        user_ids,
    )
    .map_err(|e| anyhow!("instance: {e}"))?;

    let x = read_allocation(
        &dir.join("allocation.csv"),
        &index_of,
        scenario.n_users(),
        scenario.n_slots,
    )?;
    let plan = read_quality(&dir.join("quality.csv"), &index_of, &schedule)?;

    let checks = check_solution(&instance, &x, &plan, SOLVE_TOL)
        .map_err(|e| anyhow!("check: {e}"))?;
    Ok(VerifyOutcome { checks })
}

fn read_allocation(
    path: &Path,
    index_of: &HashMap<u64, usize>,
    n_users: usize,
    n_slots: usize,
) -> anyhow::Result<AllocationPlan> {
    #[derive(Deserialize)]
    struct Row {
        user_id: u64,
        slot: usize,
        x: f64,
    }
    let mut plan = AllocationPlan::zeros(n_users, n_slots);
    let mut rdr = csv::Reader::from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    for (line, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.with_context(|| format!("{} row {}", path.display(), line + 2))?;
        let &user = index_of
            .get(&row.user_id)
            .ok_or_else(|| anyhow!("allocation row {}: unknown user {}", line + 2, row.user_id))?;
        if row.slot == 0 || row.slot > n_slots {
            return Err(anyhow!(
                "allocation row {}: slot {} outside window of {n_slots}",
                line + 2,
                row.slot
            ));
        }
        plan.set_share(user, row.slot, row.x);
    }
    Ok(plan)
}

fn read_quality(
    path: &Path,
    index_of: &HashMap<u64, usize>,
    schedule: &SegmentSchedule,
) -> anyhow::Result<QualityPlan> {
    #[derive(Deserialize)]
    struct Row {
        user_id: u64,
        segment: usize,
        level: u32,
    }
    let mut levels: Vec<Vec<u32>> =
        (0..schedule.n_users()).map(|i| vec![0; schedule.n_segments(i)]).collect();
    let mut rdr = csv::Reader::from_path(path)
        .with_context(|| format!("reading {}", path.display()))?;
    for (line, row) in rdr.deserialize::<Row>().enumerate() {
        let row = row.with_context(|| format!("{} row {}", path.display(), line + 2))?;
        let &user = index_of
            .get(&row.user_id)
            .ok_or_else(|| anyhow!("quality row {}: unknown user {}", line + 2, row.user_id))?;
        if row.segment == 0 || row.segment > levels[user].len() {
            return Err(anyhow!(
                "quality row {}: user {} has no segment {} (schedule expects {})",
                line + 2,
                row.user_id,
                row.segment,
                levels[user].len()
            ));
        }
        levels[user][row.segment - 1] = row.level;
    }
    for (i, user_levels) in levels.iter().enumerate() {
        if user_levels.iter().any(|&l| l == 0) {
            return Err(anyhow!("quality dump misses segments for user index {i}"));
        }
    }
    Ok(QualityPlan { levels })
}
