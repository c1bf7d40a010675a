//! Detector timing response.

use num_complex::Complex64 as C64;
use statrs::function::erf::erfc;

use super::InstrumentModel;
use crate::correlators::CorrelationTrace;
use crate::error::{Error, Result};

/// A symmetric timing-response kernel sampled on a delay grid.
pub trait ResponseKernel {
    /// Weights for offsets `-J..=J` at spacing `step`; they sum to 1.
    fn weights(&self, step: f64) -> Vec<f64>;

    /// Characteristic width checked against the trace span.
    fn width(&self) -> f64;
}

/// Gaussian response of given FWHM, integrated over each delay bin.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GaussianResponse {
    pub fwhm: f64,
}

impl GaussianResponse {
    pub fn sigma(&self) -> f64 {
        self.fwhm / (8.0 * std::f64::consts::LN_2).sqrt()
    }
}

impl ResponseKernel for GaussianResponse {
    fn weights(&self, step: f64) -> Vec<f64> {
        let sigma = self.sigma();
        if sigma == 0.0 {
            return vec![1.0];
        }
        let reach = ((8.0 * sigma / step).ceil() as usize).max(1);
        let scale = 1.0 / (sigma * std::f64::consts::SQRT_2);
        // Mass in [(j - ½)h, (j + ½)h] via erfc to keep the tails accurate.
        let tail = |x: f64| 0.5 * erfc(x * scale);
        let centre = 1.0 - 2.0 * tail(0.5 * step);
        let mut half: Vec<f64> = (1..=reach)
            .map(|j| tail((j as f64 - 0.5) * step) - tail((j as f64 + 0.5) * step))
            .collect();
        let total = centre + 2.0 * half.iter().sum::<f64>();
        half.iter_mut().for_each(|w| *w /= total);
        let mut weights: Vec<f64> = half.iter().rev().copied().collect();
        weights.push(centre / total);
        weights.extend(half);
        weights
    }

    fn width(&self) -> f64 {
        self.fwhm
    }
}

/// Convolves with the model's Gaussian response.
pub fn convolve_irf(trace: &CorrelationTrace, model: &InstrumentModel) -> Result<CorrelationTrace> {
    convolve_with_kernel(trace, &GaussianResponse { fwhm: model.irf_fwhm })
}

/// Mirrors the one-sided trace about τ = 0, convolves, and returns the τ ≥ 0
/// half. Beyond the last delay the trace is continued by its last value.
pub fn convolve_with_kernel(
    trace: &CorrelationTrace,
    kernel: &dyn ResponseKernel,
) -> Result<CorrelationTrace> {
    if !(kernel.width() >= 0.0) {
        return Err(Error::InvalidInput(format!(
            "response width must be non-negative, got {}",
            kernel.width()
        )));
    }
    if kernel.width() == 0.0 {
        return Ok(trace.clone());
    }
    let step = trace.uniform_step().ok_or_else(|| {
        Error::InvalidInput("timing-response convolution needs a uniform delay grid".into())
    })?;
    let span = trace.tau_grid[trace.tau_grid.len() - 1];
    if kernel.width() > span {
        return Err(Error::Accuracy {
            context: "timing response wider than the delay span".into(),
            defect: kernel.width(),
            tolerance: span,
        });
    }
    let weights = kernel.weights(step);
    let reach = (weights.len() / 2) as isize;
    let last = trace.values.len() as isize - 1;
    let sample = |m: isize| trace.values[m.unsigned_abs().min(last as usize)];
    let values = (0..=last)
        .map(|k| {
            weights
                .iter()
                .enumerate()
                .fold(C64::new(0.0, 0.0), |acc, (idx, w)| {
                    acc + sample(k - (idx as isize - reach)) * *w
                })
        })
        .collect();
    Ok(CorrelationTrace {
        values,
        ..trace.clone()
    })
}

/// Convolved value at τ = 0 only.
pub fn convolved_at_zero(values: &[C64], step: f64, kernel: &dyn ResponseKernel) -> C64 {
    if kernel.width() == 0.0 {
        return values[0];
    }
    let weights = kernel.weights(step);
    let reach = weights.len() / 2;
    let last = values.len() - 1;
    weights
        .iter()
        .enumerate()
        .fold(C64::new(0.0, 0.0), |acc, (idx, w)| {
            let offset = idx.abs_diff(reach);
            acc + values[offset.min(last)] * *w
        })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::correlators::{uniform_tau_grid, CorrelationKind};
    use approx::assert_abs_diff_eq;

    #[test]
    fn weights_are_normalized_and_symmetric() {
        let w = GaussianResponse { fwhm: 0.5 }.weights(0.01);
        assert_abs_diff_eq!(w.iter().sum::<f64>(), 1.0, epsilon = 1e-14);
        let n = w.len();
        for k in 0..n / 2 {
            assert_abs_diff_eq!(w[k], w[n - 1 - k], epsilon = 1e-18);
        }
    }

    #[test]
    fn zero_width_is_identity() {
        let grid = uniform_tau_grid(5.0, 51).unwrap();
        let values: Vec<f64> = grid.iter().map(|t| (-t).exp()).collect();
        let trace = CorrelationTrace::from_real(grid, &values, CorrelationKind::G2Rf);
        let out = convolve_irf(&trace, &InstrumentModel::default()).unwrap();
        assert_eq!(out, trace);
    }

    #[test]
    fn too_wide_response_rejected() {
        let grid = uniform_tau_grid(1.0, 11).unwrap();
        let trace = CorrelationTrace::from_real(grid, &[0.0; 11], CorrelationKind::G2Rf);
        let model = InstrumentModel::default().with_irf_fwhm(2.0);
        assert!(matches!(convolve_irf(&trace, &model), Err(Error::Accuracy { .. })));
    }

    #[test]
    fn nonuniform_grid_rejected() {
        let trace = CorrelationTrace::from_real(vec![0.0, 0.1, 0.3, 5.0], &[0.0; 4], CorrelationKind::G2Rf);
        let model = InstrumentModel::default().with_irf_fwhm(0.2);
        assert!(matches!(convolve_irf(&trace, &model), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn zero_delay_shortcut_matches_full_convolution() {
        let grid = uniform_tau_grid(8.0, 801).unwrap();
        let values: Vec<f64> = grid.iter().map(|t| 1.0 - (-t).exp() * (1.0 + t)).collect();
        let trace = CorrelationTrace::from_real(grid, &values, CorrelationKind::G2Rf);
        let kernel = GaussianResponse { fwhm: 0.6 };
        let full = convolve_with_kernel(&trace, &kernel).unwrap();
        let zero = convolved_at_zero(&trace.values, 0.01, &kernel);
        assert_abs_diff_eq!(full.values[0].re, zero.re, epsilon = 1e-15);
    }
}
