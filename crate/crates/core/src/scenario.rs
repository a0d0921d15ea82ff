//! Highway scenarios: base-station topology, vehicle traces, and the
//! time-indexed user-to-BS association.
//!
//! A scenario is a deterministic function of its parameters and seed. All
//! values are immutable after construction and safe to share across threads.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::io::Read;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("topology needs at least one base station")]
    NoBaseStations,
    #[error("base-station x-positions must be strictly increasing")]
    UnsortedBaseStations,
    #[error("road length must be positive")]
    BadRoadLength,
    #[error("vehicle speed must be positive (got {0})")]
    BadSpeed(f64),
    #[error("at least one vehicle is required")]
    NoVehicles,
    #[error("vehicle count {0} exceeds supported maximum of {1}")]
    TooManyVehicles(usize, usize),
    #[error("window length must be a positive multiple of the slot duration")]
    BadWindow,
    #[error("slot duration must be positive")]
    BadSlotDuration,
    #[error("arrival schedule places vehicle {0} beyond the window")]
    ArrivalBeyondWindow(usize),
    #[error("trace row {row}: {reason}")]
    BadTraceRow { row: usize, reason: String },
    #[error("trace for user {user}: non-contiguous slots ({prev} followed by {next})")]
    NonContiguousSlots { user: u64, prev: usize, next: usize },
    #[error("trace row {row}: position {pos} m outside road [0, {len} m]")]
    PositionOutOfRange { row: usize, pos: f64, len: f64 },
    #[error("trace for user {user}: entry slot {entry} outside window [1, {t}]")]
    EntryOutsideWindow { user: u64, entry: usize, t: usize },
    #[error("trace for user {user}: positions not monotone")]
    NonMonotoneTrace { user: u64 },
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
}

/// Line of base stations alongside a straight road on the x-axis.
///
/// Each BS sits at `(x, perp_offset_m)`; vehicles travel along `y = 0`
/// from `x = 0` to `x = road_len_m`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Topology {
    pub bs_x_m: Vec<f64>,
    pub perp_offset_m: f64,
    pub road_len_m: f64,
}

impl Topology {
    pub fn new(bs_x_m: Vec<f64>, perp_offset_m: f64, road_len_m: f64) -> Result<Self, ScenarioError> {
        if bs_x_m.is_empty() {
            return Err(ScenarioError::NoBaseStations);
        }
        if bs_x_m.windows(2).any(|w| w[0] >= w[1]) {
            return Err(ScenarioError::UnsortedBaseStations);
        }
        if !(road_len_m > 0.0) {
            return Err(ScenarioError::BadRoadLength);
        }
        Ok(Self { bs_x_m, perp_offset_m, road_len_m })
    }

    pub fn n_bs(&self) -> usize {
        self.bs_x_m.len()
    }

    /// Euclidean distance in meters from a road position to base station `j`.
    pub fn distance_m(&self, road_x_m: f64, j: usize) -> f64 {
        (road_x_m - self.bs_x_m[j]).hypot(self.perp_offset_m)
    }

    /// Nearest base station; exact distance ties go to the lowest index.
    pub fn nearest_bs(&self, road_x_m: f64) -> usize {
        let mut best = 0;
        let mut best_d2 = f64::INFINITY;
        for (j, &bx) in self.bs_x_m.iter().enumerate() {
            let dx = road_x_m - bx;
            let d2 = dx * dx; // perpendicular offset is common to all BSs
            if d2 < best_d2 {
                best_d2 = d2;
                best = j;
            }
        }
        best
    }
}

/// One vehicle's presence on the road, sampled once per slot.
///
/// `positions_m[k]` is the x-coordinate at slot `entry_slot + k`. Slots are
/// 1-based; the position is sampled at the start of the slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleTrace {
    pub user_id: u64,
    pub entry_slot: usize,
    pub positions_m: Vec<f64>,
    pub speed_mps: f64,
}

impl VehicleTrace {
    pub fn exit_slot(&self) -> usize {
        self.entry_slot + self.positions_m.len() - 1
    }

    pub fn is_present(&self, slot: usize) -> bool {
        slot >= self.entry_slot && slot <= self.exit_slot()
    }

    pub fn position_at(&self, slot: usize) -> Option<f64> {
        if self.is_present(slot) {
            Some(self.positions_m[slot - self.entry_slot])
        } else {
            None
        }
    }

    /// Number of slots the vehicle spends in the window.
    pub fn presence_slots(&self) -> usize {
        self.positions_m.len()
    }
}

/// Immutable scenario: topology, per-vehicle traces, and slotting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub topology: Topology,
    pub traces: Vec<VehicleTrace>,
    /// Number of slots in the lookahead window.
    pub n_slots: usize,
    /// Slot duration in seconds.
    pub slot_s: f64,
    pub seed: u64,
}

impl Scenario {
    pub fn n_users(&self) -> usize {
        self.traces.len()
    }

    /// Lookahead window length in seconds.
    pub fn window_s(&self) -> f64 {
        self.n_slots as f64 * self.slot_s
    }
}

/// Vehicle arrival process along the window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ArrivalModel {
    /// One vehicle every `interval_s` seconds, first at slot 1.
    Deterministic { interval_s: f64 },
    /// Poisson arrivals with the given rate, quantized to slots.
    Poisson { rate_per_s: f64 },
}

impl Default for ArrivalModel {
    fn default() -> Self {
        ArrivalModel::Deterministic { interval_s: 1.0 }
    }
}

/// Per-vehicle speed sampling.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpeedModel {
    Constant { mps: f64 },
    /// Uniform jitter: speed drawn from `mps * [1 - frac, 1 + frac]`.
    Jitter { mps: f64, frac: f64 },
}

impl Default for SpeedModel {
    fn default() -> Self {
        SpeedModel::Constant { mps: 25.0 }
    }
}

impl SpeedModel {
    /// Largest speed the model can produce; fixes the road length.
    pub fn max_mps(&self) -> f64 {
        match *self {
            SpeedModel::Constant { mps } => mps,
            SpeedModel::Jitter { mps, frac } => mps * (1.0 + frac),
        }
    }

    fn sample(&self, rng: &mut ChaCha8Rng) -> f64 {
        match *self {
            SpeedModel::Constant { mps } => mps,
            SpeedModel::Jitter { mps, frac } => {
                rng.gen_range(mps * (1.0 - frac)..=mps * (1.0 + frac))
            }
        }
    }
}

pub const MAX_VEHICLES: usize = 200;

/// Parameters for the parametric highway generator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HighwayParams {
    pub n_bs: usize,
    pub bs_spacing_m: f64,
    pub bs_perp_offset_m: f64,
    pub n_vehicles: usize,
    pub arrival: ArrivalModel,
    pub speed: SpeedModel,
    /// Lookahead window in seconds.
    pub window_s: f64,
    /// Slot duration in seconds.
    pub slot_s: f64,
    pub seed: u64,
}

impl Default for HighwayParams {
    fn default() -> Self {
        Self {
            n_bs: 3,
            bs_spacing_m: 1000.0,
            bs_perp_offset_m: 500.0,
            n_vehicles: 10,
            arrival: ArrivalModel::default(),
            speed: SpeedModel::default(),
            window_s: 240.0,
            slot_s: 1.0,
            seed: 1,
        }
    }
}

/// Build a scenario: road of length `speed_max * window`, BS line centered
/// on the road, vehicles entering at `x = 0` per the arrival model.
pub fn generate_highway_scenario(params: &HighwayParams) -> Result<Scenario, ScenarioError> {
    if params.n_bs == 0 {
        return Err(ScenarioError::NoBaseStations);
    }
    if params.n_vehicles == 0 {
        return Err(ScenarioError::NoVehicles);
    }
    if params.n_vehicles > MAX_VEHICLES {
        return Err(ScenarioError::TooManyVehicles(params.n_vehicles, MAX_VEHICLES));
    }
    if !(params.slot_s > 0.0) {
        return Err(ScenarioError::BadSlotDuration);
    }
    let slots = params.window_s / params.slot_s;
    let n_slots = slots.round() as usize;
    if n_slots == 0 || (slots - n_slots as f64).abs() > 1e-9 {
        return Err(ScenarioError::BadWindow);
    }
    if !(params.speed.max_mps() > 0.0) {
        return Err(ScenarioError::BadSpeed(params.speed.max_mps()));
    }
    if let SpeedModel::Jitter { mps, frac } = params.speed {
        if !(mps * (1.0 - frac) > 0.0) {
            return Err(ScenarioError::BadSpeed(mps * (1.0 - frac)));
        }
    }

    let road_len_m = params.speed.max_mps() * params.window_s;
    // BS line centered on the road at the requested spacing.
    let mid = road_len_m / 2.0;
    let half_span = (params.n_bs - 1) as f64 / 2.0;
    let bs_x_m = (0..params.n_bs)
        .map(|k| mid + (k as f64 - half_span) * params.bs_spacing_m)
        .collect();
    let topology = Topology::new(bs_x_m, params.bs_perp_offset_m, road_len_m)?;

    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let entry_slots = sample_entries(&params.arrival, params.n_vehicles, params.slot_s, &mut rng);
    let mut traces = Vec::with_capacity(params.n_vehicles);
    for (k, &entry) in entry_slots.iter().enumerate() {
        if entry > n_slots {
            return Err(ScenarioError::ArrivalBeyondWindow(k + 1));
        }
        let speed = params.speed.sample(&mut rng);
        let mut positions = Vec::new();
        for slot in entry..=n_slots {
            let x = speed * (slot - entry) as f64 * params.slot_s;
            if x > road_len_m {
                break; // vehicle left the road; truncate the trace
            }
            positions.push(x);
        }
        traces.push(VehicleTrace {
            user_id: (k + 1) as u64,
            entry_slot: entry,
            positions_m: positions,
            speed_mps: speed,
        });
    }

    Ok(Scenario { topology, traces, n_slots, slot_s: params.slot_s, seed: params.seed })
}

fn sample_entries(
    arrival: &ArrivalModel,
    n: usize,
    slot_s: f64,
    rng: &mut ChaCha8Rng,
) -> Vec<usize> {
    match *arrival {
        ArrivalModel::Deterministic { interval_s } => (0..n)
            .map(|k| 1 + (k as f64 * interval_s / slot_s).round() as usize)
            .collect(),
        ArrivalModel::Poisson { rate_per_s } => {
            let mut t = 0.0f64;
            (0..n)
                .map(|_| {
                    let u: f64 = rng.gen_range(f64::EPSILON..1.0);
                    t += -u.ln() / rate_per_s;
                    1 + (t / slot_s).floor() as usize
                })
                .collect()
        }
    }
}

/// Time-indexed user-to-BS association (`U[j][t]` and its inverse).
#[derive(Debug, Clone, PartialEq)]
pub struct AssociationMap {
    n_bs: usize,
    n_slots: usize,
    /// `serving[t-1][i]` = BS index serving user i at slot t, if present.
    serving: Vec<Vec<Option<usize>>>,
    /// `by_bs[j][t-1]` = ascending user indices associated with BS j at slot t.
    by_bs: Vec<Vec<Vec<usize>>>,
}

impl AssociationMap {
    /// Build directly from a `serving[t-1][i]` table (for imported or
    /// synthetic associations).
    pub fn from_serving(n_bs: usize, serving: Vec<Vec<Option<usize>>>) -> Self {
        let n_slots = serving.len();
        let n_users = serving.first().map_or(0, Vec::len);
        let mut by_bs = vec![vec![Vec::new(); n_slots]; n_bs];
        for (t_idx, row) in serving.iter().enumerate() {
            for (i, bs) in row.iter().enumerate() {
                if let Some(j) = bs {
                    by_bs[*j][t_idx].push(i);
                }
            }
        }
        let _ = n_users;
        Self { n_bs, n_slots, serving, by_bs }
    }

    pub fn n_bs(&self) -> usize {
        self.n_bs
    }

    pub fn n_slots(&self) -> usize {
        self.n_slots
    }

    pub fn serving_bs(&self, user: usize, slot: usize) -> Option<usize> {
        self.serving[slot - 1][user]
    }

    pub fn users_of(&self, bs: usize, slot: usize) -> &[usize] {
        &self.by_bs[bs][slot - 1]
    }
}

/// Associate every present user with its nearest BS at every slot.
pub fn associate(scenario: &Scenario) -> AssociationMap {
    let n_bs = scenario.topology.n_bs();
    let n_users = scenario.n_users();
    let mut serving = vec![vec![None; n_users]; scenario.n_slots];
    let mut by_bs = vec![vec![Vec::new(); scenario.n_slots]; n_bs];
    for (i, trace) in scenario.traces.iter().enumerate() {
        for slot in trace.entry_slot..=trace.exit_slot() {
            let x = trace.positions_m[slot - trace.entry_slot];
            let j = scenario.topology.nearest_bs(x);
            serving[slot - 1][i] = Some(j);
            by_bs[j][slot - 1].push(i);
        }
    }
    AssociationMap { n_bs, n_slots: scenario.n_slots, serving, by_bs }
}

/// Import traces from CSV with header `user_id,slot,x_m`.
///
/// Slots must be contiguous per user and positions within the road.
pub fn import_traces<P: AsRef<Path>>(
    path: P,
    topology: &Topology,
) -> Result<Vec<VehicleTrace>, ScenarioError> {
    let file = std::fs::File::open(path.as_ref()).map_err(|e| ScenarioError::BadTraceRow {
        row: 0,
        reason: format!("cannot open {}: {e}", path.as_ref().display()),
    })?;
    import_traces_from(file, topology)
}

pub fn import_traces_from<R: Read>(
    reader: R,
    topology: &Topology,
) -> Result<Vec<VehicleTrace>, ScenarioError> {
    #[derive(Deserialize)]
    struct Row {
        user_id: u64,
        slot: usize,
        x_m: f64,
    }

    let mut rdr = csv::Reader::from_reader(reader);
    // rows must stay grouped per user; keep first-seen order
    let mut order: Vec<u64> = Vec::new();
    let mut parts: std::collections::HashMap<u64, VehicleTrace> = std::collections::HashMap::new();
    for (idx, result) in rdr.deserialize::<Row>().enumerate() {
        let row_no = idx + 2; // header is line 1
        let row: Row = result.map_err(|e| ScenarioError::BadTraceRow {
            row: row_no,
            reason: e.to_string(),
        })?;
        if row.slot == 0 {
            return Err(ScenarioError::BadTraceRow {
                row: row_no,
                reason: "slot indices are 1-based".into(),
            });
        }
        if row.x_m < 0.0 || row.x_m > topology.road_len_m {
            return Err(ScenarioError::PositionOutOfRange {
                row: row_no,
                pos: row.x_m,
                len: topology.road_len_m,
            });
        }
        match parts.get_mut(&row.user_id) {
            None => {
                order.push(row.user_id);
                parts.insert(row.user_id, VehicleTrace {
                    user_id: row.user_id,
                    entry_slot: row.slot,
                    positions_m: vec![row.x_m],
                    speed_mps: 0.0,
                });
            }
            Some(trace) => {
                let expected = trace.entry_slot + trace.positions_m.len();
                if row.slot != expected {
                    return Err(ScenarioError::NonContiguousSlots {
                        user: row.user_id,
                        prev: expected - 1,
                        next: row.slot,
                    });
                }
                trace.positions_m.push(row.x_m);
            }
        }
    }

    let mut traces = Vec::with_capacity(order.len());
    for id in order {
        let mut trace = parts.remove(&id).expect("trace recorded");
        let inc = trace.positions_m.windows(2).all(|w| w[1] >= w[0]);
        let dec = trace.positions_m.windows(2).all(|w| w[1] <= w[0]);
        if !inc && !dec {
            return Err(ScenarioError::NonMonotoneTrace { user: id });
        }
        if trace.positions_m.len() > 1 {
            let span = (trace.positions_m.last().unwrap() - trace.positions_m[0]).abs();
            trace.speed_mps = span / (trace.positions_m.len() - 1) as f64;
        }
        traces.push(trace);
    }
    Ok(traces)
}

/// Write traces in the import format (`user_id,slot,x_m`).
pub fn write_traces_csv<W: std::io::Write>(
    out: W,
    traces: &[VehicleTrace],
) -> Result<(), ScenarioError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["user_id", "slot", "x_m"])?;
    for trace in traces {
        for (k, &x) in trace.positions_m.iter().enumerate() {
            w.write_record(&[
                trace.user_id.to_string(),
                (trace.entry_slot + k).to_string(),
                crate::fmt_sig9(x),
            ])?;
        }
    }
    w.flush().map_err(csv::Error::from)?;
    Ok(())
}

/// Check that a scenario's traces fit the window and road.
pub fn validate_scenario(scenario: &Scenario) -> Result<(), ScenarioError> {
    if scenario.n_slots == 0 {
        return Err(ScenarioError::BadWindow);
    }
    for trace in &scenario.traces {
        if trace.entry_slot == 0 || trace.entry_slot > scenario.n_slots {
            return Err(ScenarioError::EntryOutsideWindow {
                user: trace.user_id,
                entry: trace.entry_slot,
                t: scenario.n_slots,
            });
        }
        if trace.exit_slot() > scenario.n_slots {
            return Err(ScenarioError::EntryOutsideWindow {
                user: trace.user_id,
                entry: trace.exit_slot(),
                t: scenario.n_slots,
            });
        }
        for &x in &trace.positions_m {
            if x < 0.0 || x > scenario.topology.road_len_m {
                return Err(ScenarioError::PositionOutOfRange {
                    row: 0,
                    pos: x,
                    len: scenario.topology.road_len_m,
                });
            }
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn default_scenario() -> Scenario {
        generate_highway_scenario(&HighwayParams::default()).unwrap()
    }

    #[test]
    fn bs_positions_centered() {
        let s = generate_highway_scenario(&HighwayParams {
            n_vehicles: 1,
            ..HighwayParams::default()
        })
        .unwrap();
        assert_eq!(s.topology.road_len_m, 6000.0);
        assert_eq!(s.topology.bs_x_m, vec![2000.0, 3000.0, 4000.0]);
    }

    #[test]
    fn deterministic_arrivals_one_per_second() {
        let s = generate_highway_scenario(&HighwayParams {
            n_vehicles: 5,
            ..HighwayParams::default()
        })
        .unwrap();
        let entries: Vec<usize> = s.traces.iter().map(|t| t.entry_slot).collect();
        assert_eq!(entries, vec![1, 2, 3, 4, 5]);
    }

    #[test]
    fn vehicle_stays_on_road_through_window() {
        let s = default_scenario();
        let first = &s.traces[0];
        assert_eq!(first.entry_slot, 1);
        assert_eq!(first.exit_slot(), 240);
        let last_pos = *first.positions_m.last().unwrap();
        assert_eq!(last_pos, 25.0 * 239.0);
        assert!(last_pos < s.topology.road_len_m);
    }

    #[test]
    fn generation_is_deterministic() {
        let params = HighwayParams {
            speed: SpeedModel::Jitter { mps: 25.0, frac: 0.1 },
            seed: 42,
            ..HighwayParams::default()
        };
        let a = generate_highway_scenario(&params).unwrap();
        let b = generate_highway_scenario(&params).unwrap();
        assert_eq!(a, b);
        let c = generate_highway_scenario(&HighwayParams { seed: 43, ..params }).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn rejects_bad_params() {
        let base = HighwayParams::default();
        assert!(generate_highway_scenario(&HighwayParams { n_vehicles: 0, ..base.clone() }).is_err());
        assert!(generate_highway_scenario(&HighwayParams {
            speed: SpeedModel::Constant { mps: 0.0 },
            ..base.clone()
        })
        .is_err());
        assert!(generate_highway_scenario(&HighwayParams {
            window_s: 10.5,
            slot_s: 1.0,
            ..base.clone()
        })
        .is_err());
        assert!(generate_highway_scenario(&HighwayParams { n_vehicles: 500, ..base }).is_err());
    }

    #[test]
    fn association_nearest_and_ties() {
        let topo = Topology::new(vec![2000.0, 3000.0, 4000.0], 500.0, 6000.0).unwrap();
        // abeam BS 2
        assert_eq!(topo.nearest_bs(3000.0), 1);
        // exactly midway between BS 1 and BS 2: lowest index wins
        assert_eq!(topo.nearest_bs(2500.0), 0);
        // road start
        assert_eq!(topo.nearest_bs(0.0), 0);
    }

    #[test]
    fn association_partitions_present_users() {
        let s = default_scenario();
        let assoc = associate(&s);
        for slot in 1..=s.n_slots {
            let mut seen = vec![false; s.n_users()];
            for j in 0..assoc.n_bs() {
                for &i in assoc.users_of(j, slot) {
                    assert!(!seen[i], "user {i} on two BSs at slot {slot}");
                    seen[i] = true;
                    assert_eq!(assoc.serving_bs(i, slot), Some(j));
                }
            }
            for (i, trace) in s.traces.iter().enumerate() {
                assert_eq!(seen[i], trace.is_present(slot));
            }
        }
    }

    #[test]
    fn association_is_distance_optimal() {
        let s = generate_highway_scenario(&HighwayParams {
            speed: SpeedModel::Jitter { mps: 25.0, frac: 0.1 },
            seed: 7,
            ..HighwayParams::default()
        })
        .unwrap();
        let assoc = associate(&s);
        for (i, trace) in s.traces.iter().enumerate() {
            for slot in trace.entry_slot..=trace.exit_slot() {
                let x = trace.position_at(slot).unwrap();
                let j = assoc.serving_bs(i, slot).unwrap();
                let dj = s.topology.distance_m(x, j);
                for k in 0..s.topology.n_bs() {
                    let dk = s.topology.distance_m(x, k);
                    assert!(
                        dj < dk || (dj == dk && j <= k),
                        "slot {slot}: assigned {j} at {dj} but {k} at {dk}"
                    );
                }
            }
        }
    }

    #[test]
    fn import_parses_simple_trace() {
        let topo = Topology::new(vec![100.0], 50.0, 1000.0).unwrap();
        let csv = "user_id,slot,x_m\n1,1,0.0\n1,2,25.0\n";
        let traces = import_traces_from(csv.as_bytes(), &topo).unwrap();
        assert_eq!(traces.len(), 1);
        assert_eq!(traces[0].entry_slot, 1);
        assert_eq!(traces[0].positions_m, vec![0.0, 25.0]);
        assert_eq!(traces[0].speed_mps, 25.0);
    }

    #[test]
    fn import_empty_file_gives_no_traces() {
        let topo = Topology::new(vec![100.0], 50.0, 1000.0).unwrap();
        let traces = import_traces_from("user_id,slot,x_m\n".as_bytes(), &topo).unwrap();
        assert!(traces.is_empty());
    }

    #[test]
    fn import_rejects_non_contiguous_slots() {
        let topo = Topology::new(vec![100.0], 50.0, 1000.0).unwrap();
        let err = import_traces_from("user_id,slot,x_m\n1,1,0\n1,3,50\n".as_bytes(), &topo)
            .unwrap_err();
        assert!(err.to_string().contains("non-contiguous slots"), "{err}");
    }

    #[test]
    fn import_rejects_out_of_range_position() {
        let topo = Topology::new(vec![100.0], 50.0, 1000.0).unwrap();
        let err = import_traces_from("user_id,slot,x_m\n1,1,2000\n".as_bytes(), &topo).unwrap_err();
        assert!(matches!(err, ScenarioError::PositionOutOfRange { row: 2, .. }), "{err}");
    }

    #[test]
    fn trace_roundtrip_through_csv() {
        let s = default_scenario();
        let mut buf = Vec::new();
        write_traces_csv(&mut buf, &s.traces).unwrap();
        let back = import_traces_from(buf.as_slice(), &s.topology).unwrap();
        assert_eq!(back.len(), s.traces.len());
        for (a, b) in back.iter().zip(&s.traces) {
            assert_eq!(a.entry_slot, b.entry_slot);
            assert_eq!(a.positions_m.len(), b.positions_m.len());
        }
    }
}
