//! Shared fixtures for the benchmarks.

use rfsqueeze_core::instrument::InstrumentModel;
use rfsqueeze_core::{LOConfig, SystemParams};

/// Excited-state lifetime of the reference emitter (ns).
pub const LIFETIME_NS: f64 = 0.58;

pub fn weak_drive() -> SystemParams {
    SystemParams::from_lifetime_ns(LIFETIME_NS, 0.1).expect("valid parameters")
}

pub fn matched_lo(params: &SystemParams) -> LOConfig {
    LOConfig::matched(params, 0.0).expect("valid LO")
}

pub fn degraded() -> InstrumentModel {
    InstrumentModel::default().with_irf_fwhm(0.5).with_phase_jitter(0.6).with_wandering(0.2)
}
