//! Load-dependent base-station power: affine in airtime load between a
//! floor and a maximum, with optional zero-power accounting for slots where
//! a BS transmits nothing.

use crate::playback::AllocationPlan;
use crate::scenario::AssociationMap;
use serde::{Deserialize, Serialize};
use thiserror::Error;

const LOAD_TOL: f64 = 1e-9;

#[derive(Debug, Error)]
pub enum PowerError {
    #[error("load {0} outside [0, 1]")]
    LoadOutOfRange(f64),
    #[error("power model requires 0 <= p_min < p_max and sleep_power <= p_min")]
    BadModel,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerModel {
    pub p_min_w: f64,
    pub p_max_w: f64,
    pub sleep_enabled: bool,
    pub sleep_power_w: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self { p_min_w: 200.0, p_max_w: 1300.0, sleep_enabled: false, sleep_power_w: 0.0 }
    }
}

impl PowerModel {
    pub fn validate(&self) -> Result<(), PowerError> {
        if !(self.p_min_w >= 0.0 && self.p_min_w < self.p_max_w)
            || self.sleep_power_w > self.p_min_w
        {
            return Err(PowerError::BadModel);
        }
        Ok(())
    }
}

/// Airtime load of BS `j` at slot `t`: sum of the shares of its users.
pub fn bs_load(x: &AllocationPlan, assoc: &AssociationMap, bs: usize, slot: usize) -> f64 {
    assoc.users_of(bs, slot).iter().map(|&i| x.share(i, slot)).sum()
}

/// Instantaneous BS power at the given load.
pub fn bs_power(load: f64, model: &PowerModel) -> Result<f64, PowerError> {
    if load < -LOAD_TOL || load > 1.0 + LOAD_TOL {
        return Err(PowerError::LoadOutOfRange(load));
    }
    let load = load.clamp(0.0, 1.0);
    if model.sleep_enabled && load == 0.0 {
        return Ok(model.sleep_power_w);
    }
    Ok(model.p_min_w + (model.p_max_w - model.p_min_w) * load)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerReport {
    /// `power_w[j][t-1]`: per-BS per-slot power.
    pub power_w: Vec<Vec<f64>>,
    /// `load[j][t-1]`: per-BS per-slot airtime load.
    pub load: Vec<Vec<f64>>,
    /// Mean over BS-slots (the per-BS average power).
    pub mean_bs_power_w: f64,
    /// Mean over slots of total network power (all BSs summed).
    pub mean_network_power_w: f64,
    /// Per-BS average restricted to slots with at least one present user
    /// anywhere in the network.
    pub mean_bs_power_active_w: f64,
    pub total_energy_j: f64,
    /// BS-slots with zero airtime load.
    pub zero_load_slots: usize,
}

/// Per-slot per-BS power, aggregate means, and total energy for a plan.
pub fn energy_report(
    x: &AllocationPlan,
    assoc: &AssociationMap,
    model: &PowerModel,
    n_slots: usize,
    slot_s: f64,
) -> Result<PowerReport, PowerError> {
    model.validate()?;
    let n_bs = assoc.n_bs();
    let mut power = vec![vec![0.0; n_slots]; n_bs];
    let mut load = vec![vec![0.0; n_slots]; n_bs];
    let mut zero_load_slots = 0;
    let mut active_sum = 0.0;
    let mut active_slots = 0usize;
    for t in 1..=n_slots {
        let mut slot_power = 0.0;
        let mut anyone_present = false;
        for j in 0..n_bs {
            let l = bs_load(x, assoc, j, t);
            anyone_present |= !assoc.users_of(j, t).is_empty();
            let p = bs_power(l, model)?;
            load[j][t - 1] = l;
            power[j][t - 1] = p;
            slot_power += p;
            if l <= LOAD_TOL {
                zero_load_slots += 1;
            }
        }
        if anyone_present {
            active_sum += slot_power;
            active_slots += 1;
        }
    }
    let total: f64 = power.iter().map(|row| row.iter().sum::<f64>()).sum();
    let bs_slots = (n_bs * n_slots) as f64;
    Ok(PowerReport {
        mean_bs_power_w: total / bs_slots,
        mean_network_power_w: total / n_slots as f64,
        mean_bs_power_active_w: if active_slots == 0 {
            0.0
        } else {
            active_sum / (active_slots * n_bs) as f64
        },
        total_energy_j: total * slot_s,
        zero_load_slots,
        power_w: power,
        load,
    })
}

/// Dump as `bs_id,slot,load,power_w` (BS ids 1-based).
pub fn write_power_csv<W: std::io::Write>(out: W, report: &PowerReport) -> csv::Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["bs_id", "slot", "load", "power_w"])?;
    for (j, row) in report.load.iter().enumerate() {
        for (k, &l) in row.iter().enumerate() {
            w.write_record(&[
                (j + 1).to_string(),
                (k + 1).to_string(),
                crate::fmt_sig9(l),
                crate::fmt_sig9(report.power_w[j][k]),
            ])?;
        }
    }
    w.flush()?;
    Ok(())
}
