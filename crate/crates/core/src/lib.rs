//! Energy-aware planning of base-station airtime and video quality for
//! vehicular streaming.
//!
//! The pipeline: generate or import a highway [`scenario`], derive the
//! predicted link-rate matrix ([`radio`]), describe the video workload
//! ([`streaming`]), then either plan jointly with the optimizer ([`pgs`])
//! or run the prediction-free reference allocators ([`baselines`]). Plans
//! are scored by the playback simulator ([`playback`]) and the
//! load-dependent power model ([`power`]).

pub mod baselines;
pub mod pgs;
pub mod playback;
pub mod power;
pub mod radio;
pub mod scenario;
pub mod streaming;

/// Format a float with nine significant digits, the fixed precision used
/// in every CSV this crate emits.
pub fn fmt_sig9(v: f64) -> String {
    format!("{v:.8e}")
}

#[cfg(test)]
mod tests {
    #[test]
    fn sig9_is_stable() {
        assert_eq!(super::fmt_sig9(128.1), "1.28100000e2");
        assert_eq!(super::fmt_sig9(0.0), "0.00000000e0");
        assert_eq!(super::fmt_sig9(-33291057.413758975), "-3.32910574e7");
    }
}
