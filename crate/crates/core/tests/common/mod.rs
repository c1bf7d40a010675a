#![allow(dead_code)]

use rfsqueeze_core::instrument::{
    calibrate_imperfections, log_spaced, Calibration, FreeParameter, InstrumentModel,
};
use rfsqueeze_core::{LOConfig, SystemParams};

/// Emitter lifetime (ns).
pub const LIFETIME_NS: f64 = 0.58;
/// Measured in-phase squeezing: −3.1 % of the vacuum level 1/4.
pub const MEASURED_VARIANCE: f64 = -0.031 * 0.25;
pub const IRF_FWHM_NS: f64 = 0.5;

pub fn weak_drive() -> SystemParams {
    SystemParams::from_lifetime_ns(LIFETIME_NS, 0.1).unwrap()
}

pub fn matched_lo(params: &SystemParams) -> LOConfig {
    LOConfig::matched(params, 0.0).unwrap()
}

/// Phase jitter calibrated so the in-phase variance hits the measured value
/// with the timing response pinned.
pub fn calibrated() -> Calibration {
    let params = weak_drive();
    let base = InstrumentModel::default().with_irf_fwhm(IRF_FWHM_NS);
    calibrate_imperfections(
        &params,
        MEASURED_VARIANCE,
        FreeParameter::PhaseJitterSigma,
        &base,
        &log_spaced(0.01, 10.0, 9).unwrap(),
    )
    .unwrap()
}

pub fn median(mut v: Vec<f64>) -> f64 {
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
