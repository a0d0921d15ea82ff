//! Run configuration: a JSON document with strict schema validation.
//! Unknown keys are rejected; every field has a default drawn from the
//! standard three-BS highway setup.

use pgs_core::power::PowerModel;
use pgs_core::radio::RadioParams;
use pgs_core::scenario::HighwayParams;
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum Allocator {
    Es,
    Rp,
    Pgs,
}

impl std::fmt::Display for Allocator {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Allocator::Es => "es",
            Allocator::Rp => "rp",
            Allocator::Pgs => "pgs",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum SolverMode {
    /// Exact when the binary count is small, rounding repair otherwise.
    Auto,
    Exact,
    Heuristic,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverConfig {
    pub mode: SolverMode,
    pub time_limit_s: f64,
    pub node_limit: usize,
    /// `auto` switches to the rounding repair above this many binaries.
    pub exact_binary_limit: usize,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { mode: SolverMode::Auto, time_limit_s: 120.0, node_limit: 200_000, exact_binary_limit: 256 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub scenario: HighwayParams,
    pub radio: RadioParams,
    /// Quality ladder bitrates in bits/s, strictly increasing.
    pub ladder_bps: Vec<f64>,
    /// Video segment duration in seconds.
    pub segment_s: f64,
    pub allocator: Allocator,
    /// Target average quality level (pgs only).
    pub l_req: f64,
    pub prebuffer_cap_bits: Option<f64>,
    pub solver: SolverConfig,
    pub power: PowerModel,
    pub out_dir: PathBuf,
    /// Import vehicle traces from this CSV instead of generating them.
    pub traces_csv: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            scenario: HighwayParams::default(),
            radio: RadioParams::default(),
            ladder_bps: vec![0.25e6, 0.5e6, 0.75e6, 1.0e6],
            segment_s: 10.0,
            allocator: Allocator::Pgs,
            l_req: 3.0,
            prebuffer_cap_bits: None,
            solver: SolverConfig::default(),
            power: PowerModel::default(),
            out_dir: PathBuf::from("out"),
            traces_csv: None,
        }
    }
}

impl RunConfig {
    /// Parse and schema-check a JSON config; error messages name the
    /// offending key or value.
    pub fn from_json(text: &str) -> Result<Self, String> {
        let config: RunConfig =
            serde_json::from_str(text).map_err(|e| format!("config: {e}"))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, String> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::from_json(&text)
    }

    pub fn validate(&self) -> Result<(), String> {
        pgs_core::streaming::QualityLadder::new(self.ladder_bps.clone())
            .map_err(|e| format!("ladder_bps: {e}"))?;
        if !(self.segment_s > 0.0) {
            return Err("segment_s must be positive".into());
        }
        let q_max = self.ladder_bps.len() as f64;
        if !(1.0..=q_max).contains(&self.l_req) {
            return Err(format!("l_req {} outside [1, {q_max}]", self.l_req));
        }
        if let Some(cap) = self.prebuffer_cap_bits {
            if !(cap > 0.0) {
                return Err("prebuffer_cap_bits must be positive when set".into());
            }
        }
        self.power.validate().map_err(|e| format!("power: {e}"))?;
        if !(self.solver.time_limit_s > 0.0) {
            return Err("solver.time_limit_s must be positive".into());
        }
        Ok(())
    }

    pub fn ladder(&self) -> pgs_core::streaming::QualityLadder {
        pgs_core::streaming::QualityLadder::new(self.ladder_bps.clone())
            .expect("ladder validated")
    }

    /// Output directory after the `PGS_OUT_DIR` environment override.
    pub fn effective_out_dir(&self) -> PathBuf {
        match std::env::var_os("PGS_OUT_DIR") {
            Some(dir) if !dir.is_empty() => PathBuf::from(dir),
            _ => self.out_dir.clone(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_round_trips_through_json() {
        let config = RunConfig::default();
        let text = serde_json::to_string_pretty(&config).unwrap();
        let back = RunConfig::from_json(&text).unwrap();
        assert_eq!(config, back);
    }

    #[test]
    fn unknown_key_is_named() {
        let err = RunConfig::from_json(r#"{"bandwith": 5000000}"#).unwrap_err();
        assert!(err.contains("bandwith"), "{err}");
        let err =
            RunConfig::from_json(r#"{"radio": {"bandwith_hz": 5e6}}"#).unwrap_err();
        assert!(err.contains("bandwith_hz"), "{err}");
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::from_json(r#"{"l_req": 9.0}"#).is_err());
        assert!(RunConfig::from_json(r#"{"ladder_bps": [2e6, 1e6]}"#).is_err());
        assert!(RunConfig::from_json(r#"{"segment_s": 0.0}"#).is_err());
    }
}
