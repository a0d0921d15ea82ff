//! Synthetic instance builders shared by unit, integration, and acceptance
//! tests. Not part of the public planning API.
#![doc(hidden)]

use super::PgsInstance;
use crate::radio::RateMatrix;
use crate::scenario::AssociationMap;
use crate::streaming::{QualityLadder, SegmentSchedule};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Instance with every user on one BS. Rates are `rates[i][t-1]` in bits/s
/// with slot duration 1 s; absence is rate 0. Segment counts follow from
/// presence and `seg_s`.
pub fn single_bs_instance(
    rates: Vec<Vec<f64>>,
    ladder: QualityLadder,
    seg_s: f64,
    l_req: f64,
    prebuffer_cap_bits: Option<f64>,
) -> PgsInstance {
    instance_with_bs_of(rates, ladder, seg_s, l_req, prebuffer_cap_bits, |_| 0, 1)
}

/// Two users pinned to different BSs, constant rates, 20 slots.
pub fn two_bs_instance() -> PgsInstance {
    instance_with_bs_of(
        vec![vec![1e6; 20], vec![2e6; 20]],
        QualityLadder::new(vec![0.25e6, 0.5e6]).unwrap(),
        10.0,
        1.0,
        None,
        |user| user,
        2,
    )
}

pub fn instance_with_bs_of(
    rates: Vec<Vec<f64>>,
    ladder: QualityLadder,
    seg_s: f64,
    l_req: f64,
    prebuffer_cap_bits: Option<f64>,
    bs_of: impl Fn(usize) -> usize,
    n_bs: usize,
) -> PgsInstance {
    let n_users = rates.len();
    let n_slots = rates.first().map_or(0, Vec::len);
    let matrix = RateMatrix::from_rates(rates, 1.0);
    let serving: Vec<Vec<Option<usize>>> = (1..=n_slots)
        .map(|t| {
            (0..n_users)
                .map(|i| matrix.is_present(i, t).then(|| bs_of(i)))
                .collect()
        })
        .collect();
    let assoc = AssociationMap::from_serving(n_bs, serving);
    let entries: Vec<(usize, usize)> = (0..n_users)
        .map(|i| {
            let present: Vec<usize> = matrix.present_slots(i).collect();
            let entry = present.first().copied().unwrap_or(1);
            let n_seg = (present.len() as f64 / seg_s).floor() as usize;
            (entry, n_seg)
        })
        .collect();
    let schedule = SegmentSchedule::from_entries(&entries, seg_s, 1.0).unwrap();
    let user_ids = (1..=n_users as u64).collect();
    PgsInstance::with_ids(matrix, assoc, ladder, schedule, l_req, prebuffer_cap_bits, user_ids)
        .expect("synthetic instance is valid")
}

/// Small random instance for oracle cross-checks: up to two users on one or
/// two BSs, up to three segments each, a two-level ladder, and occasionally
/// a prebuffer cap. Enumeration stays within 2^6 assignments.
pub fn random_tiny_instance(seed: u64) -> PgsInstance {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let n_users = rng.gen_range(1..=2usize);
    let seg_slots = [2usize, 3, 5][rng.gen_range(0..3)];
    let seg_s = seg_slots as f64;
    let mut rates = Vec::new();
    let mut total_segments = 0usize;
    for _ in 0..n_users {
        let entry = rng.gen_range(1..=3usize);
        let n_seg = rng.gen_range(1..=3usize).min(6 - total_segments.min(5));
        total_segments += n_seg;
        let tail = rng.gen_range(0..=2usize);
        let end = entry - 1 + n_seg * seg_slots + tail;
        let mut row = vec![0.0; end.max(1)];
        for slot in entry..=end {
            row[slot - 1] = rng.gen_range(0.3e6..3.0e6);
        }
        rates.push(row);
    }
    let n_slots = rates.iter().map(Vec::len).max().unwrap();
    for row in &mut rates {
        row.resize(n_slots, 0.0);
    }

    let low = rng.gen_range(0.2e6..0.6e6);
    let ladder = QualityLadder::new(vec![low, low * rng.gen_range(1.3..2.5)]).unwrap();
    let l_req = 1.0 + rng.gen_range(0..=4) as f64 * 0.25;
    let prebuffer = if rng.gen_bool(0.2) {
        Some(rng.gen_range(2.0e6..30.0e6))
    } else {
        None
    };

    let two_bs = n_users == 2 && rng.gen_bool(0.3);
    if two_bs {
        instance_with_bs_of(rates, ladder, seg_s, l_req, prebuffer, |user| user, 2)
    } else {
        single_bs_instance(rates, ladder, seg_s, l_req, prebuffer)
    }
}
