//! Fast interferometer phase noise acting on a phase scan.

use std::f64::consts::{PI, TAU};

use num_complex::Complex64 as C64;
use rustfft::FftPlanner;

use super::InstrumentModel;
use crate::error::{Error, Result};
use crate::quadrature::{QuadratureScan, ScanAxis};

/// Circular Gaussian smoothing of `N(φ)` with standard deviation
/// `phase_jitter_sigma`.
///
/// The scan must be uniform and cover one period of either π or 2π, with or
/// without the closing endpoint. Harmonic `m` (in units of 2π/period) is
/// multiplied by `exp(-(2π m/period)² σ²/2)`.
pub fn apply_phase_jitter(scan: &QuadratureScan, model: &InstrumentModel) -> Result<QuadratureScan> {
    let sigma = model.phase_jitter_sigma;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "phase jitter must be finite and non-negative, got {sigma}"
        )));
    }
    if scan.axis != ScanAxis::Phase {
        return Err(Error::InvalidInput("phase jitter acts on phase scans only".into()));
    }
    if sigma == 0.0 {
        return Ok(scan.clone());
    }
    let (samples, period) = periodic_samples(&scan.grid)?;
    let n = samples;
    let mut spectrum: Vec<C64> = scan.variance[..n].iter().map(|&v| C64::new(v, 0.0)).collect();
    let mut planner = FftPlanner::<f64>::new();
    planner.plan_fft_forward(n).process(&mut spectrum);
    for (k, c) in spectrum.iter_mut().enumerate() {
        let m = if k <= n / 2 { k as f64 } else { k as f64 - n as f64 };
        let omega = TAU * m / period;
        *c *= (-0.5 * omega * omega * sigma * sigma).exp();
    }
    planner.plan_fft_inverse(n).process(&mut spectrum);
    let mut variance: Vec<f64> = spectrum.iter().map(|c| c.re / n as f64).collect();
    if scan.grid.len() > n {
        variance.push(variance[0]);
    }
    Ok(QuadratureScan {
        variance,
        ..scan.clone()
    })
}

/// Number of distinct samples in one period, and the period.
fn periodic_samples(grid: &[f64]) -> Result<(usize, f64)> {
    let n = grid.len();
    if n < 4 {
        return Err(Error::InvalidInput("phase scan needs at least 4 points".into()));
    }
    let step = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let uniform = grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1.0));
    if !uniform || step <= 0.0 {
        return Err(Error::InvalidInput("phase scan must be uniform and ascending".into()));
    }
    for period in [PI, TAU] {
        if (n as f64 * step - period).abs() <= 1e-9 * period {
            return Ok((n, period));
        }
        if ((n - 1) as f64 * step - period).abs() <= 1e-9 * period {
            return Ok((n - 1, period));
        }
    }
    Err(Error::InvalidInput(
        "phase scan must cover exactly one period (π or 2π)".into(),
    ))
}

/// `n` phases covering [0, 2π) without the closing endpoint.
pub fn full_period_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SystemParams;
    use crate::quadrature::{variance_phase_scan, FieldSource};
    use approx::assert_abs_diff_eq;

    fn scan(points: usize) -> QuadratureScan {
        let p = SystemParams::from_saturation(1.0, 0.1).unwrap();
        variance_phase_scan(&FieldSource::TwoLevel(p), &full_period_grid(points)).unwrap()
    }

    #[test]
    fn zero_sigma_is_identity() {
        let s = scan(64);
        assert_eq!(apply_phase_jitter(&s, &InstrumentModel::default()).unwrap(), s);
    }

    #[test]
    fn mean_preserved_and_second_harmonic_damped() {
        let s = scan(64);
        let sigma = 0.4;
        let out = apply_phase_jitter(&s, &InstrumentModel::default().with_phase_jitter(sigma)).unwrap();
        let mean = |v: &[f64]| v.iter().sum::<f64>() / v.len() as f64;
        assert_abs_diff_eq!(mean(&out.variance), mean(&s.variance), epsilon = 1e-14);
        // N(φ) = a + b cos 2φ, so the smoothed curve is a + b e^{-2σ²} cos 2φ.
        let a = mean(&s.variance);
        let b = s.variance[0] - a;
        for (phi, v) in out.grid.iter().zip(&out.variance) {
            assert_abs_diff_eq!(*v, a + b * (-2.0 * sigma * sigma).exp() * (2.0 * phi).cos(), epsilon = 1e-14);
        }
    }

    #[test]
    fn closed_endpoint_accepted() {
        let mut grid = full_period_grid(32);
        grid.push(TAU);
        let p = SystemParams::from_saturation(1.0, 0.1).unwrap();
        let s = variance_phase_scan(&FieldSource::TwoLevel(p), &grid).unwrap();
        let out = apply_phase_jitter(&s, &InstrumentModel::default().with_phase_jitter(0.2)).unwrap();
        assert_eq!(out.variance.len(), 33);
        assert_abs_diff_eq!(out.variance[0], out.variance[32], epsilon = 0.0);
    }

    #[test]
    fn partial_period_rejected() {
        let grid: Vec<f64> = (0..10).map(|k| 0.1 * k as f64).collect();
        let p = SystemParams::from_saturation(1.0, 0.1).unwrap();
        let s = variance_phase_scan(&FieldSource::TwoLevel(p), &grid).unwrap();
        assert!(apply_phase_jitter(&s, &InstrumentModel::default().with_phase_jitter(0.2)).is_err());
    }
}
