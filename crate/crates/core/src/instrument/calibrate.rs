//! Fits one imperfection width to a measured squeezing value.

use serde::{Deserialize, Serialize};

use super::degrade::{degraded_power_curve, QuadratureResponse};
use super::InstrumentModel;
use crate::dynamics::SystemParams;
use crate::error::{ensure_finite, Error, Result};
use crate::quadrature::QuadratureScan;

/// Lowest normally ordered variance any two-level emitter reaches.
pub const SQUEEZING_FLOOR: f64 = -1.0 / 32.0;

const VALUE_TOL: f64 = 1e-12;
const MAX_ITERATIONS: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreeParameter {
    PhaseJitterSigma,
    IrfFwhm,
}

impl FreeParameter {
    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "phase_jitter_sigma" | "jitter" => Ok(Self::PhaseJitterSigma),
            "irf_fwhm" | "irf" => Ok(Self::IrfFwhm),
            other => Err(Error::InvalidInput(format!(
                "free parameter must be phase_jitter_sigma or irf_fwhm, got {other:?}"
            ))),
        }
    }

    fn set(self, model: &InstrumentModel, value: f64) -> InstrumentModel {
        match self {
            Self::PhaseJitterSigma => model.clone().with_phase_jitter(value),
            Self::IrfFwhm => model.clone().with_irf_fwhm(value),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Calibration {
    pub model: InstrumentModel,
    pub free: FreeParameter,
    pub value: f64,
    pub target: f64,
    /// Ideal in-phase variance at the calibration power.
    pub ideal: f64,
    /// Degraded in-phase variance of the calibrated model.
    pub achieved: f64,
    /// Degraded in-phase variance of the calibrated model over power.
    pub power_curve: QuadratureScan,
}

/// Finds the value of `free` that makes the degraded in-phase variance at
/// `params` equal `target`, holding every other width of `base` fixed.
pub fn calibrate_imperfections(
    params: &SystemParams,
    target: f64,
    free: FreeParameter,
    base: &InstrumentModel,
    s_grid: &[f64],
) -> Result<Calibration> {
    ensure_finite("target", target)?;
    base.validate()?;
    let pinned = free.set(base, 0.0);
    let response = QuadratureResponse::new(params, &pinned)?;
    let ideal = QuadratureResponse::new(params, &InstrumentModel::ideal())?.variance(0.0, 0.0, 0.0)?;
    let eval = |x: f64| -> Result<f64> {
        let m = free.set(&pinned, x);
        response.variance(0.0, m.irf_fwhm, m.phase_jitter_sigma)
    };
    let low = 0.0;
    let high = match free {
        FreeParameter::PhaseJitterSigma => std::f64::consts::PI,
        FreeParameter::IrfFwhm => 20.0 / params.gamma,
    };
    let (f_low, f_high) = (eval(low)?, eval(high)?);
    let no_solution = |detail: &str| Error::NoSolution {
        target,
        low: f_low.min(f_high),
        high: f_low.max(f_high),
        detail: detail.to_string(),
    };
    if target < SQUEEZING_FLOOR {
        return Err(no_solution("below the global squeezing floor of -1/32"));
    }
    let value = if (f_low - target).abs() <= VALUE_TOL {
        low
    } else if (f_high - target).abs() <= VALUE_TOL {
        high
    } else if (f_low - target).signum() == (f_high - target).signum() {
        return Err(no_solution(&format!(
            "{free:?} in [{low}, {high}] does not bracket the target"
        )));
    } else {
        bisect(&eval, low, high, f_low, target)?
    };
    let model = free.set(&pinned, value);
    let achieved = eval(value)?;
    let power_curve = degraded_power_curve(params, &model, s_grid)?;
    Ok(Calibration {
        model,
        free,
        value,
        target,
        ideal,
        achieved,
        power_curve,
    })
}

fn bisect<F: Fn(f64) -> Result<f64>>(f: &F, mut a: f64, mut b: f64, mut fa: f64, target: f64) -> Result<f64> {
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (a + b);
        let fm = f(mid)?;
        if (fm - target).abs() <= VALUE_TOL || (b - a) <= 1e-14 * b.abs().max(1.0) {
            return Ok(mid);
        }
        if (fm - target).signum() == (fa - target).signum() {
            a = mid;
            fa = fm;
        } else {
            b = mid;
        }
    }
    Err(Error::Accuracy {
        context: "calibration bisection".into(),
        defect: b - a,
        tolerance: 1e-14,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn ideal_target_returns_zero_noise() {
        let p = SystemParams::from_lifetime_ns(0.58, 0.1).unwrap();
        let ideal = QuadratureResponse::new(&p, &InstrumentModel::ideal()).unwrap().variance(0.0, 0.0, 0.0).unwrap();
        let cal = calibrate_imperfections(&p, ideal, FreeParameter::PhaseJitterSigma, &InstrumentModel::ideal(), &[0.1]).unwrap();
        assert_eq!(cal.value, 0.0);
        assert_eq!(cal.model.phase_jitter_sigma, 0.0);
    }

    #[test]
    fn jitter_found_with_irf_pinned() {
        let p = SystemParams::from_lifetime_ns(0.58, 0.1).unwrap();
        let base = InstrumentModel::ideal().with_irf_fwhm(0.5);
        let cal = calibrate_imperfections(&p, -0.00775, FreeParameter::PhaseJitterSigma, &base, &[0.1, 1.0]).unwrap();
        assert!(cal.value > 0.0 && cal.value.is_finite());
        assert_abs_diff_eq!(cal.achieved, -0.00775, epsilon = 1e-10);
        assert_eq!(cal.model.irf_fwhm, 0.5);
    }

    #[test]
    fn below_floor_has_no_solution() {
        let p = SystemParams::from_lifetime_ns(0.58, 1.0 / 3.0).unwrap();
        let r = calibrate_imperfections(&p, -0.032, FreeParameter::IrfFwhm, &InstrumentModel::ideal(), &[0.1]);
        assert!(matches!(r, Err(Error::NoSolution { .. })));
    }
}
