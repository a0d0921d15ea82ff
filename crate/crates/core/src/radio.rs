//! Link budget: path loss, SNR, and clipped Shannon capacity, turned into
//! the predicted per-user per-slot link-rate matrix.
//!
//! All dB conversions happen at this module's boundary; everything
//! downstream works in bits and seconds.

use crate::scenario::{associate, Scenario};
use serde::{Deserialize, Serialize};

/// Thermal noise density in dBm/Hz.
const NOISE_DENSITY_DBM_HZ: f64 = -174.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RadioParams {
    pub tx_power_dbm: f64,
    pub bandwidth_hz: f64,
    pub noise_figure_db: f64,
    pub snr_clip_db: f64,
    /// Distances below this are clamped before the path-loss log.
    pub min_distance_km: f64,
}

impl Default for RadioParams {
    fn default() -> Self {
        Self {
            tx_power_dbm: 43.0,
            bandwidth_hz: 5e6,
            noise_figure_db: 9.0,
            snr_clip_db: 20.0,
            min_distance_km: 0.035,
        }
    }
}

/// Macro-cell path loss `128.1 + 37.6 log10(d)` with `d` in km, clamped at
/// `min_distance_km` to remove the log singularity.
pub fn path_loss_db(d_km: f64, params: &RadioParams) -> f64 {
    let d = d_km.max(params.min_distance_km);
    128.1 + 37.6 * d.log10()
}

/// Receiver noise floor over the configured bandwidth, in dBm.
pub fn noise_floor_dbm(params: &RadioParams) -> f64 {
    NOISE_DENSITY_DBM_HZ + 10.0 * params.bandwidth_hz.log10() + params.noise_figure_db
}

pub fn snr_db(d_km: f64, params: &RadioParams) -> f64 {
    params.tx_power_dbm - path_loss_db(d_km, params) - noise_floor_dbm(params)
}

/// Shannon capacity with SNR clipping, in bits/s.
pub fn link_rate_bps(snr_db_value: f64, params: &RadioParams) -> f64 {
    let clipped = snr_db_value.min(params.snr_clip_db);
    params.bandwidth_hz * (1.0 + 10f64.powf(clipped / 10.0)).log2()
}

/// Largest rate the model can produce (at or above the clip).
pub fn rate_cap_bps(params: &RadioParams) -> f64 {
    link_rate_bps(params.snr_clip_db, params)
}

/// Predicted link rates `r[i][t]` in bits/s; zero exactly where the user is
/// absent from the window.
#[derive(Debug, Clone, PartialEq)]
pub struct RateMatrix {
    rates_bps: Vec<Vec<f64>>,
    pub slot_s: f64,
}

impl RateMatrix {
    /// Wrap a dense `n_users x n_slots` array; absence is encoded as rate 0.
    pub fn from_rates(rates_bps: Vec<Vec<f64>>, slot_s: f64) -> Self {
        Self { rates_bps, slot_s }
    }

    pub fn n_users(&self) -> usize {
        self.rates_bps.len()
    }

    pub fn n_slots(&self) -> usize {
        self.rates_bps.first().map_or(0, Vec::len)
    }

    /// Rate at a 1-based slot.
    pub fn rate_bps(&self, user: usize, slot: usize) -> f64 {
        self.rates_bps[user][slot - 1]
    }

    pub fn is_present(&self, user: usize, slot: usize) -> bool {
        self.rate_bps(user, slot) > 0.0
    }

    /// 1-based slots during which the user is present.
    pub fn present_slots(&self, user: usize) -> impl Iterator<Item = usize> + '_ {
        self.rates_bps[user]
            .iter()
            .enumerate()
            .filter(|(_, &r)| r > 0.0)
            .map(|(k, _)| k + 1)
    }

    /// Dump as CSV `user_id,slot,rate_bps` (present slots only).
    pub fn write_csv<W: std::io::Write>(&self, out: W, user_ids: &[u64]) -> csv::Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["user_id", "slot", "rate_bps"])?;
        for (i, row) in self.rates_bps.iter().enumerate() {
            for (k, &r) in row.iter().enumerate() {
                if r > 0.0 {
                    w.write_record(&[
                        user_ids[i].to_string(),
                        (k + 1).to_string(),
                        crate::fmt_sig9(r),
                    ])?;
                }
            }
        }
        w.flush()?;
        Ok(())
    }
}

/// Rates from the scenario geometry: distance to the serving (nearest) BS,
/// path loss, SNR, clipped Shannon capacity.
pub fn build_rate_matrix(scenario: &Scenario, params: &RadioParams) -> RateMatrix {
    let assoc = associate(scenario);
    let mut rates = vec![vec![0.0; scenario.n_slots]; scenario.n_users()];
    for (i, trace) in scenario.traces.iter().enumerate() {
        for slot in trace.entry_slot..=trace.exit_slot() {
            let x = trace.positions_m[slot - trace.entry_slot];
            let j = assoc.serving_bs(i, slot).expect("present user is associated");
            let d_km = scenario.topology.distance_m(x, j) / 1000.0;
            rates[i][slot - 1] = link_rate_bps(snr_db(d_km, params), params);
        }
    }
    RateMatrix { rates_bps: rates, slot_s: scenario.slot_s }
}
