//! Experiment orchestration: a single run builds the pipeline end to end
//! (scenario, rates, allocator, playback, power) and emits CSV artifacts;
//! a sweep fans runs out over a parameter grid, optionally in parallel,
//! with byte-stable output either way.

use crate::config::{Allocator, RunConfig, SolverMode};
use anyhow::{anyhow, Context};
use pgs_core::baselines::{run_baseline, BaselineKind};
use pgs_core::fmt_sig9;
use pgs_core::pgs::{
    build_model, heuristic_round, solve_exact, solve_lp_relaxation, PgsInstance, PgsSolution,
    SolveLimits, SolveStatus, SOLVE_TOL,
};
use pgs_core::playback::{verify_plan, write_buffer_csv, AllocationPlan, PlaybackReport};
use pgs_core::power::{energy_report, write_power_csv, PowerReport};
use pgs_core::radio::build_rate_matrix;
use pgs_core::scenario::{
    associate, generate_highway_scenario, import_traces, Scenario,
};
use pgs_core::streaming::{QualityPlan, SegmentSchedule};
use rayon::prelude::*;
use std::io::Write;
use std::path::Path;

/// One summary row. Wall time is kept out of the CSV so repeated runs are
/// byte-identical; it is logged to stderr instead.
#[derive(Debug, Clone)]
pub struct SummaryRecord {
    pub allocator: Allocator,
    pub n_users: usize,
    pub seed: u64,
    pub l_req: Option<f64>,
    pub mean_power_w: f64,
    pub mean_power_sleep_w: f64,
    pub mean_power_active_w: f64,
    pub zero_load_bs_slots: usize,
    pub achieved_avg_level: f64,
    pub total_stall_s: f64,
    pub mean_startup_s: f64,
    pub objective: Option<f64>,
    pub lp_bound: Option<f64>,
    pub solve_status: String,
    pub wall_time_s: f64,
}

pub const SUMMARY_HEADER: &str = "allocator,n_users,seed,l_req,mean_power_w,mean_power_sleep_w,\
mean_power_active_w,zero_load_bs_slots,achieved_avg_level,total_stall_s,mean_startup_s,\
objective,lp_bound,solve_status";

impl SummaryRecord {
    pub fn to_csv_row(&self) -> String {
        let opt = |v: Option<f64>| v.map(fmt_sig9).unwrap_or_default();
        format!(
            "{},{},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.allocator,
            self.n_users,
            self.seed,
            opt(self.l_req),
            fmt_sig9(self.mean_power_w),
            fmt_sig9(self.mean_power_sleep_w),
            fmt_sig9(self.mean_power_active_w),
            self.zero_load_bs_slots,
            fmt_sig9(self.achieved_avg_level),
            fmt_sig9(self.total_stall_s),
            fmt_sig9(self.mean_startup_s),
            opt(self.objective),
            opt(self.lp_bound),
            self.solve_status,
        )
    }
}

/// Everything a run produces, for callers that keep going (sweeps, tests).
pub struct RunOutput {
    pub summary: SummaryRecord,
    pub scenario: Scenario,
    pub allocation: Option<AllocationPlan>,
    pub quality: Option<QualityPlan>,
    pub report: Option<PlaybackReport>,
    pub power: Option<PowerReport>,
    pub power_sleep: Option<PowerReport>,
}

pub fn build_scenario(config: &RunConfig) -> anyhow::Result<Scenario> {
    let mut scenario =
        generate_highway_scenario(&config.scenario).map_err(|e| anyhow!("scenario: {e}"))?;
    if let Some(path) = &config.traces_csv {
        let traces = import_traces(path, &scenario.topology).map_err(|e| anyhow!("traces: {e}"))?;
        scenario.traces = traces;
        pgs_core::scenario::validate_scenario(&scenario).map_err(|e| anyhow!("traces: {e}"))?;
    }
    Ok(scenario)
}

/// Execute one configuration without touching the filesystem.
pub fn execute(config: &RunConfig) -> anyhow::Result<RunOutput> {
    config.validate().map_err(|e| anyhow!(e))?;
    let scenario = build_scenario(config)?;
    let rates = build_rate_matrix(&scenario, &config.radio);
    let assoc = associate(&scenario);
    let ladder = config.ladder();
    let schedule = SegmentSchedule::from_scenario(&scenario, config.segment_s)
        .map_err(|e| anyhow!("schedule: {e}"))?;

    let start = std::time::Instant::now();
    let (allocation, quality, solve_status, objective, lp_bound) = match config.allocator {
        Allocator::Es | Allocator::Rp => {
            let kind = match config.allocator {
                Allocator::Es => BaselineKind::EqualShare,
                _ => BaselineKind::RateProportional,
            };
            let (x, plan, _) = run_baseline(&scenario, &rates, &ladder, &schedule, kind)
                .map_err(|e| anyhow!("baseline: {e}"))?;
            let objective = x.total_airtime();
            (Some(x), Some(plan), "simulated".to_string(), Some(objective), None)
        }
        Allocator::Pgs => {
            let instance = PgsInstance::with_ids(
                rates.clone(),
                assoc.clone(),
                ladder.clone(),
                schedule.clone(),
                config.l_req,
                config.prebuffer_cap_bits,
                scenario.traces.iter().map(|t| t.user_id).collect(),
            )
            .map_err(|e| anyhow!("instance: {e}"))?;
            let solution = solve_pgs(&instance, config)?;
            let status = solution.status.to_string();
            (solution.allocation, solution.quality, status, solution.objective, solution.lp_bound)
        }
    };
    let wall_time_s = start.elapsed().as_secs_f64();

    let (report, power, power_sleep, summary) = match (&allocation, &quality) {
        (Some(x), Some(plan)) => {
            let report = verify_plan(x, &rates, plan, &ladder, &schedule)
                .map_err(|e| anyhow!("playback: {e}"))?;
            let power = energy_report(x, &assoc, &config.power, scenario.n_slots, scenario.slot_s)
                .map_err(|e| anyhow!("power: {e}"))?;
            let sleep_model =
                pgs_core::power::PowerModel { sleep_enabled: true, ..config.power };
            let power_sleep =
                energy_report(x, &assoc, &sleep_model, scenario.n_slots, scenario.slot_s)
                    .map_err(|e| anyhow!("power: {e}"))?;
            let summary = SummaryRecord {
                allocator: config.allocator,
                n_users: scenario.n_users(),
                seed: config.scenario.seed,
                l_req: matches!(config.allocator, Allocator::Pgs).then_some(config.l_req),
                mean_power_w: power.mean_bs_power_w,
                mean_power_sleep_w: power_sleep.mean_bs_power_w,
                mean_power_active_w: power.mean_bs_power_active_w,
                zero_load_bs_slots: power.zero_load_slots,
                achieved_avg_level: report.mean_level,
                total_stall_s: report.total_stall_s(),
                mean_startup_s: report.mean_startup_s,
                objective,
                lp_bound,
                solve_status,
                wall_time_s,
            };
            (Some(report), Some(power), Some(power_sleep), summary)
        }
        _ => {
            let summary = SummaryRecord {
                allocator: config.allocator,
                n_users: scenario.n_users(),
                seed: config.scenario.seed,
                l_req: Some(config.l_req),
                mean_power_w: f64::NAN,
                mean_power_sleep_w: f64::NAN,
                mean_power_active_w: f64::NAN,
                zero_load_bs_slots: 0,
                achieved_avg_level: f64::NAN,
                total_stall_s: f64::NAN,
                mean_startup_s: f64::NAN,
                objective,
                lp_bound,
                solve_status,
                wall_time_s,
            };
            (None, None, None, summary)
        }
    };

    Ok(RunOutput { summary, scenario, allocation, quality, report, power, power_sleep })
}

pub fn solve_pgs(instance: &PgsInstance, config: &RunConfig) -> anyhow::Result<PgsSolution> {
    let model = build_model(instance).map_err(|e| anyhow!("model: {e}"))?;
    let limits = SolveLimits {
        time_limit_s: config.solver.time_limit_s,
        node_limit: config.solver.node_limit,
    };
    let exact = match config.solver.mode {
        SolverMode::Exact => true,
        SolverMode::Heuristic => false,
        SolverMode::Auto => model.n_level_vars() <= config.solver.exact_binary_limit,
    };
    if exact {
        Ok(solve_exact(&model, &limits, SOLVE_TOL))
    } else {
        match solve_lp_relaxation(&model) {
            Ok((_, fractional)) => Ok(heuristic_round(&model, &fractional)),
            Err(pgs_core::pgs::PgsError::Lp(pgs_core::pgs::simplex::LpError::Infeasible {
                ..
            })) => Ok(PgsSolution::infeasible(
                "relaxation infeasible".into(),
                Default::default(),
            )),
            Err(e) => Err(anyhow!("relaxation: {e}")),
        }
    }
}

/// Run one configuration and write its artifacts under the output
/// directory: `summary.csv`, `power_trace.csv`, `power_trace_sleep.csv`,
/// `allocation.csv`, `quality.csv`, and `buffer.csv`.
pub fn run_to_dir(config: &RunConfig, out_dir: &Path) -> anyhow::Result<RunOutput> {
    let output = execute(config)?;
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    write_text(
        &out_dir.join("summary.csv"),
        &format!("{SUMMARY_HEADER}\n{}\n", output.summary.to_csv_row()),
    )?;
    if let (Some(x), Some(plan)) = (&output.allocation, &output.quality) {
        let user_ids: Vec<u64> = output.scenario.traces.iter().map(|t| t.user_id).collect();
        let mut buf = Vec::new();
        write_power_csv(&mut buf, output.power.as_ref().expect("power with plans"))?;
        write_text(&out_dir.join("power_trace.csv"), std::str::from_utf8(&buf)?)?;
        buf.clear();
        write_power_csv(&mut buf, output.power_sleep.as_ref().expect("sleep power"))?;
        write_text(&out_dir.join("power_trace_sleep.csv"), std::str::from_utf8(&buf)?)?;

        write_allocation_csv(&out_dir.join("allocation.csv"), x, &user_ids)?;
        write_quality_csv(&out_dir.join("quality.csv"), plan, &user_ids)?;

        buf.clear();
        write_buffer_csv(&mut buf, output.report.as_ref().expect("report with plans"), &user_ids)?;
        write_text(&out_dir.join("buffer.csv"), std::str::from_utf8(&buf)?)?;
    }
    eprintln!(
        "run: allocator={} n={} seed={} status={} wall={:.2}s",
        output.summary.allocator,
        output.summary.n_users,
        output.summary.seed,
        output.summary.solve_status,
        output.summary.wall_time_s
    );
    Ok(output)
}

pub fn write_allocation_csv(path: &Path, x: &AllocationPlan, user_ids: &[u64]) -> anyhow::Result<()> {
    let mut out = String::from("user_id,slot,x\n");
    for (i, &uid) in user_ids.iter().enumerate() {
        for t in 1..=x.n_slots() {
            let v = x.share(i, t);
            if v > 0.0 {
                out.push_str(&format!("{uid},{t},{}\n", fmt_sig9(v)));
            }
        }
    }
    write_text(path, &out)
}

pub fn write_quality_csv(path: &Path, plan: &QualityPlan, user_ids: &[u64]) -> anyhow::Result<()> {
    let mut out = String::from("user_id,segment,level\n");
    for (i, &uid) in user_ids.iter().enumerate() {
        for (s, &level) in plan.levels[i].iter().enumerate() {
            out.push_str(&format!("{uid},{},{level}\n", s + 1));
        }
    }
    write_text(path, &out)
}

fn write_text(path: &Path, text: &str) -> anyhow::Result<()> {
    let mut file = std::fs::File::create(path)
        .with_context(|| format!("creating {}", path.display()))?;
    file.write_all(text.as_bytes())?;
    Ok(())
}

/// Which knob a sweep varies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum SweepVariable {
    NVehicles,
    LReq,
}

#[derive(Debug, Clone)]
pub struct SweepSpec {
    pub vary: SweepVariable,
    pub values: Vec<f64>,
    pub seeds: Vec<u64>,
    pub allocators: Vec<Allocator>,
    pub parallel: bool,
}

impl SweepSpec {
    pub fn grid(vary: SweepVariable, from: f64, to: f64, step: f64) -> Result<Vec<f64>, String> {
        if !(step > 0.0) {
            return Err("sweep step must be positive".into());
        }
        if to < from {
            return Err(format!("empty sweep grid: to {to} < from {from}"));
        }
        let n = ((to - from) / step + 1e-9).floor() as usize;
        Ok((0..=n).map(|k| from + k as f64 * step).collect())
    }

    pub fn jobs(&self, base: &RunConfig) -> Result<Vec<RunConfig>, String> {
        if self.values.is_empty() || self.seeds.is_empty() || self.allocators.is_empty() {
            return Err("empty sweep grid".into());
        }
        let mut jobs = Vec::new();
        for &value in &self.values {
            for &seed in &self.seeds {
                for &allocator in &self.allocators {
                    let mut config = base.clone();
                    config.allocator = allocator;
                    config.scenario.seed = seed;
                    match self.vary {
                        SweepVariable::NVehicles => {
                            if value < 1.0 || value.fract().abs() > 1e-9 {
                                return Err(format!("n_vehicles grid value {value} not a positive integer"));
                            }
                            config.scenario.n_vehicles = value as usize;
                        }
                        SweepVariable::LReq => config.l_req = value,
                    }
                    config.validate()?;
                    jobs.push(config);
                }
            }
        }
        Ok(jobs)
    }
}

/// Run a sweep and return the summary CSV text (header plus one row per
/// (point, seed, allocator) in grid order, independent of parallelism).
pub fn sweep(base: &RunConfig, spec: &SweepSpec) -> anyhow::Result<String> {
    let jobs = spec.jobs(base).map_err(|e| anyhow!(e))?;
    let results: Vec<anyhow::Result<SummaryRecord>> = if spec.parallel {
        jobs.par_iter().map(|job| execute(job).map(|o| o.summary)).collect()
    } else {
        jobs.iter().map(|job| execute(job).map(|o| o.summary)).collect()
    };
    let mut out = String::from(SUMMARY_HEADER);
    out.push('\n');
    for result in results {
        let record = result?;
        out.push_str(&record.to_csv_row());
        out.push('\n');
    }
    Ok(out)
}

pub fn sweep_to_file(base: &RunConfig, spec: &SweepSpec, out_dir: &Path) -> anyhow::Result<()> {
    let csv = sweep(base, spec)?;
    std::fs::create_dir_all(out_dir)?;
    write_text(&out_dir.join("sweep_summary.csv"), &csv)
}
