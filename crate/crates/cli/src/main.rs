//! `pgs`: plan and evaluate energy-aware airtime/quality allocation for
//! vehicular video streaming.
//!
//! Exit codes: 0 success, 1 validation or verification failure, 2 solver
//! reports infeasible, 3 internal error.

use clap::{Args, Parser, Subcommand};
use pgs_cli::config::{Allocator, RunConfig, SolverMode};
use pgs_cli::runner::{self, SweepSpec, SweepVariable};
use pgs_cli::verify::verify_dump;
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "pgs", version, about = "Energy-aware airtime and video-quality planning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON configuration file; defaults apply when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override the scenario seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the vehicle count.
    #[arg(long)]
    n_vehicles: Option<usize>,
    /// Override the allocator.
    #[arg(long, value_enum)]
    allocator: Option<Allocator>,
    /// Override the quality target (pgs only).
    #[arg(long)]
    l_req: Option<f64>,
    /// Override the solver mode.
    #[arg(long, value_enum)]
    solver: Option<SolverMode>,
    /// Output directory (overrides config and PGS_OUT_DIR).
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

impl Common {
    fn load(&self) -> Result<(RunConfig, PathBuf), String> {
        let mut config = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(seed) = self.seed {
            config.scenario.seed = seed;
        }
        if let Some(n) = self.n_vehicles {
            config.scenario.n_vehicles = n;
        }
        if let Some(allocator) = self.allocator {
            config.allocator = allocator;
        }
        if let Some(l_req) = self.l_req {
            config.l_req = l_req;
        }
        if let Some(mode) = self.solver {
            config.solver.mode = mode;
        }
        config.validate()?;
        let out_dir = self.out_dir.clone().unwrap_or_else(|| config.effective_out_dir());
        Ok((config, out_dir))
    }
}

#[derive(Subcommand)]
enum Command {
    /// Generate a scenario and dump its traces and link rates.
    Generate {
        #[command(flatten)]
        common: Common,
    },
    /// Run one allocator end to end and write all artifacts.
    Run {
        #[command(flatten)]
        common: Common,
    },
    /// Run a parameter grid; one summary row per (point, seed, allocator).
    Sweep {
        #[command(flatten)]
        common: Common,
        /// Parameter to vary.
        #[arg(long, value_enum)]
        vary: SweepVariable,
        #[arg(long)]
        from: f64,
        #[arg(long)]
        to: f64,
        #[arg(long)]
        step: f64,
        /// Comma-separated seeds, one full grid per seed.
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        /// Comma-separated allocators to compare.
        #[arg(long, value_enum, value_delimiter = ',')]
        allocators: Vec<Allocator>,
        /// Run grid points on a thread pool (output is identical).
        #[arg(long)]
        parallel: bool,
    },
    /// Write the optimization model in MPS format.
    ExportMps {
        #[command(flatten)]
        common: Common,
        /// Output file (defaults to <out_dir>/model.mps).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Re-check a solution dump against its configuration.
    Verify {
        #[command(flatten)]
        common: Common,
        /// Directory holding allocation.csv and quality.csv.
        #[arg(long)]
        dir: PathBuf,
    },
}

fn main() -> ExitCode {
    match dispatch() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(3)
        }
    }
}

fn dispatch() -> anyhow::Result<ExitCode> {
    match Cli::parse().command {
        Command::Generate { common } => {
            let (config, out_dir) = match common.load() {
                Ok(v) => v,
                Err(e) => return validation_error(&e),
            };
            let scenario = runner::build_scenario(&config)?;
            std::fs::create_dir_all(&out_dir)?;
            let mut buf = Vec::new();
            pgs_core::scenario::write_traces_csv(&mut buf, &scenario.traces)?;
            std::fs::write(out_dir.join("traces.csv"), &buf)?;
            let rates = pgs_core::radio::build_rate_matrix(&scenario, &config.radio);
            let user_ids: Vec<u64> = scenario.traces.iter().map(|t| t.user_id).collect();
            buf.clear();
            rates.write_csv(&mut buf, &user_ids)?;
            std::fs::write(out_dir.join("rates.csv"), &buf)?;
            println!(
                "generated scenario: {} users, {} slots, {} BSs -> {}",
                scenario.n_users(),
                scenario.n_slots,
                scenario.topology.n_bs(),
                out_dir.display()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Run { common } => {
            let (config, out_dir) = match common.load() {
                Ok(v) => v,
                Err(e) => return validation_error(&e),
            };
            let output = runner::run_to_dir(&config, &out_dir)?;
            println!("{}", runner::SUMMARY_HEADER);
            println!("{}", output.summary.to_csv_row());
            if output.summary.solve_status == "infeasible" {
                if let Some(note) = infeasibility_note(&config) {
                    eprintln!("infeasible: {note}");
                }
                return Ok(ExitCode::from(2));
            }
            Ok(ExitCode::SUCCESS)
        }
        Command::Sweep { common, vary, from, to, step, seeds, allocators, parallel } => {
            let (config, out_dir) = match common.load() {
                Ok(v) => v,
                Err(e) => return validation_error(&e),
            };
            let values = match SweepSpec::grid(vary, from, to, step) {
                Ok(v) => v,
                Err(e) => return validation_error(&e),
            };
            let seeds = if seeds.is_empty() { vec![config.scenario.seed] } else { seeds };
            let allocators =
                if allocators.is_empty() { vec![config.allocator] } else { allocators };
            let spec = SweepSpec { vary, values, seeds, allocators, parallel };
            if let Err(e) = spec.jobs(&config) {
                return validation_error(&e);
            }
            runner::sweep_to_file(&config, &spec, &out_dir)?;
            println!("sweep written to {}", out_dir.join("sweep_summary.csv").display());
            Ok(ExitCode::SUCCESS)
        }
        Command::ExportMps { common, out } => {
            let (config, out_dir) = match common.load() {
                Ok(v) => v,
                Err(e) => return validation_error(&e),
            };
            let scenario = runner::build_scenario(&config)?;
            let instance = pgs_core::pgs::PgsInstance::with_ids(
                pgs_core::radio::build_rate_matrix(&scenario, &config.radio),
                pgs_core::scenario::associate(&scenario),
                config.ladder(),
                pgs_core::streaming::SegmentSchedule::from_scenario(&scenario, config.segment_s)
                    .map_err(|e| anyhow::anyhow!("schedule: {e}"))?,
                config.l_req,
                config.prebuffer_cap_bits,
                scenario.traces.iter().map(|t| t.user_id).collect(),
            )
            .map_err(|e| anyhow::anyhow!("instance: {e}"))?;
            let model = pgs_core::pgs::build_model(&instance)
                .map_err(|e| anyhow::anyhow!("model: {e}"))?;
            let path = out.unwrap_or_else(|| out_dir.join("model.mps"));
            if let Some(parent) = path.parent() {
                if !parent.as_os_str().is_empty() {
                    std::fs::create_dir_all(parent)?;
                }
            }
            pgs_core::pgs::mps::export_mps_file(&model, &path)?;
            println!(
                "wrote {} ({} columns, {} rows)",
                path.display(),
                model.n_vars(),
                model.rows.len()
            );
            Ok(ExitCode::SUCCESS)
        }
        Command::Verify { common, dir } => {
            let (config, _) = match common.load() {
                Ok(v) => v,
                Err(e) => return validation_error(&e),
            };
            let outcome = verify_dump(&config, &dir)?;
            print!("{}", outcome.render());
            if outcome.all_ok() {
                Ok(ExitCode::SUCCESS)
            } else {
                Ok(ExitCode::from(1))
            }
        }
    }
}

fn validation_error(message: &str) -> anyhow::Result<ExitCode> {
    eprintln!("error: {message}");
    Ok(ExitCode::from(1))
}

/// Re-derive the infeasibility note for the printed diagnostics.
fn infeasibility_note(config: &RunConfig) -> Option<String> {
    let scenario = runner::build_scenario(config).ok()?;
    let instance = pgs_core::pgs::PgsInstance::with_ids(
        pgs_core::radio::build_rate_matrix(&scenario, &config.radio),
        pgs_core::scenario::associate(&scenario),
        config.ladder(),
        pgs_core::streaming::SegmentSchedule::from_scenario(&scenario, config.segment_s).ok()?,
        config.l_req,
        config.prebuffer_cap_bits,
        scenario.traces.iter().map(|t| t.user_id).collect(),
    )
    .ok()?;
    let solution = runner::solve_pgs(&instance, config).ok()?;
    solution.infeasibility_note
}
