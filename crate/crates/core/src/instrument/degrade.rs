//! Ideal quadrature statistics pushed through wandering, timing response and
//! phase noise.

use num_complex::Complex64 as C64;

use super::irf::{convolve_with_kernel, convolved_at_zero, GaussianResponse};
use super::wandering::average_spectral_wandering;
use super::InstrumentModel;
use crate::correlators::{uniform_step, uniform_tau_grid, CorrelationKind, CorrelationTrace, QuadratureFrame, RegressionEngine};
use crate::dynamics::SystemParams;
use crate::error::{ensure_finite, Error, Result};
use crate::quadrature::{FieldSource, QuadratureScan, ScanAxis};

/// Delay span of the response grid, in units of 1/Γ.
const RESPONSE_SPAN: f64 = 25.0;
/// Delay step of the response grid, in units of 1/Γ.
const RESPONSE_STEP: f64 = 0.01;

/// Wandering-averaged quadrature autocorrelation harmonics, with φ measured
/// from the nominal dipole angle.
///
/// The autocorrelation at phase φ is `A(τ) + Re(e^{2iφ} B(τ))`. Timing
/// response and phase noise are applied on demand.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureResponse {
    pub tau_grid: Vec<f64>,
    pub phase_free: Vec<f64>,
    pub second_harmonic: Vec<C64>,
    /// Lab-frame angle of the nominal dipole.
    pub frame_angle: f64,
}

impl QuadratureResponse {
    /// Uses a uniform grid of step 0.01/Γ out to 25/Γ.
    pub fn new(params: &SystemParams, model: &InstrumentModel) -> Result<Self> {
        let points = (RESPONSE_SPAN / RESPONSE_STEP).round() as usize + 1;
        let grid = uniform_tau_grid(RESPONSE_SPAN / params.gamma, points)?;
        Self::on_grid(params, model, &grid)
    }

    pub fn on_grid(params: &SystemParams, model: &InstrumentModel, tau_grid: &[f64]) -> Result<Self> {
        let frame_angle = RegressionEngine::new(params)?.frame_angle(QuadratureFrame::Dipole);
        let frame = QuadratureFrame::Fixed(frame_angle);
        let n = tau_grid.len();
        let packed: Vec<C64> = average_spectral_wandering(params, model, |p| {
            let kernels = RegressionEngine::new(p)?.quadrature_kernels(frame, tau_grid)?;
            let (a, b) = kernels.harmonics();
            Ok(a.into_iter().map(|v| C64::new(v, 0.0)).chain(b).collect::<Vec<C64>>())
        })?;
        Ok(Self {
            tau_grid: tau_grid.to_vec(),
            phase_free: packed[..n].iter().map(|v| v.re).collect(),
            second_harmonic: packed[n..].to_vec(),
            frame_angle,
        })
    }

    fn step(&self) -> Result<f64> {
        uniform_step(&self.tau_grid).ok_or_else(|| Error::InvalidInput("response grid must be uniform".into()))
    }

    /// Degraded `⟨:(ΔX(φ))²:⟩`: the autocorrelation at τ = 0 after the timing
    /// response, with the second harmonic damped by `exp(-2σ²)`.
    pub fn variance(&self, phi: f64, irf_fwhm: f64, jitter_sigma: f64) -> Result<f64> {
        ensure_finite("phi", phi)?;
        let kernel = GaussianResponse { fwhm: irf_fwhm };
        check_width(irf_fwhm, &self.tau_grid)?;
        let (a, b) = if irf_fwhm == 0.0 {
            (self.phase_free[0], self.second_harmonic[0])
        } else {
            let step = self.step()?;
            let a: Vec<C64> = self.phase_free.iter().map(|&v| C64::new(v, 0.0)).collect();
            (
                convolved_at_zero(&a, step, &kernel).re,
                convolved_at_zero(&self.second_harmonic, step, &kernel),
            )
        };
        let damping = (-2.0 * jitter_sigma * jitter_sigma).exp();
        Ok(a + (C64::from_polar(1.0, 2.0 * phi) * b).re * damping)
    }

    /// Full degraded autocorrelation trace at phase φ.
    pub fn autocorrelation(&self, phi: f64, model: &InstrumentModel) -> Result<CorrelationTrace> {
        ensure_finite("phi", phi)?;
        let damping = (-2.0 * model.phase_jitter_sigma.powi(2)).exp();
        let rot = C64::from_polar(1.0, 2.0 * phi);
        let values: Vec<f64> = self
            .phase_free
            .iter()
            .zip(&self.second_harmonic)
            .map(|(a, b)| a + (rot * b).re * damping)
            .collect();
        let trace = CorrelationTrace::from_real(self.tau_grid.clone(), &values, CorrelationKind::QuadratureFluct)
            .with_phase(phi);
        convolve_with_kernel(&trace, &GaussianResponse { fwhm: model.irf_fwhm })
    }
}

fn check_width(fwhm: f64, grid: &[f64]) -> Result<()> {
    if !(fwhm >= 0.0) || !fwhm.is_finite() {
        return Err(Error::InvalidInput(format!(
            "timing-response FWHM must be finite and non-negative, got {fwhm}"
        )));
    }
    let span = grid[grid.len() - 1];
    if fwhm > span {
        return Err(Error::Accuracy {
            context: "timing response wider than the delay span".into(),
            defect: fwhm,
            tolerance: span,
        });
    }
    Ok(())
}

/// Degraded normally ordered variance at phase φ from the nominal dipole.
pub fn degraded_variance(params: &SystemParams, phi: f64, model: &InstrumentModel) -> Result<f64> {
    model.validate()?;
    QuadratureResponse::new(params, model)?.variance(phi, model.irf_fwhm, model.phase_jitter_sigma)
}

/// Degraded variance over a phase grid.
pub fn degraded_phase_scan(
    params: &SystemParams,
    model: &InstrumentModel,
    phi_grid: &[f64],
) -> Result<QuadratureScan> {
    model.validate()?;
    if phi_grid.is_empty() {
        return Err(Error::InvalidInput("phase grid is empty".into()));
    }
    let response = QuadratureResponse::new(params, model)?;
    let variance = phi_grid
        .iter()
        .map(|&phi| response.variance(phi, model.irf_fwhm, model.phase_jitter_sigma))
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadratureScan {
        axis: ScanAxis::Phase,
        grid: phi_grid.to_vec(),
        variance,
        source: FieldSource::TwoLevel(*params),
        phi: None,
    })
}

/// Degraded in-phase (φ = 0) variance over `s_grid`, keeping Γ, Δ and γ_d of
/// `template`.
pub fn degraded_power_curve(
    template: &SystemParams,
    model: &InstrumentModel,
    s_grid: &[f64],
) -> Result<QuadratureScan> {
    model.validate()?;
    if s_grid.is_empty() {
        return Err(Error::InvalidInput("saturation grid is empty".into()));
    }
    let variance = s_grid
        .iter()
        .map(|&s| {
            let params = template.with_saturation(s)?;
            QuadratureResponse::new(&params, model)?.variance(0.0, model.irf_fwhm, model.phase_jitter_sigma)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(QuadratureScan {
        axis: ScanAxis::Power,
        grid: s_grid.to_vec(),
        variance,
        source: FieldSource::TwoLevel(*template),
        phi: Some(0.0),
    })
}

/// `n` logarithmically spaced values from `low` to `high` inclusive.
pub fn log_spaced(low: f64, high: f64, n: usize) -> Result<Vec<f64>> {
    if !(low > 0.0 && high > low && high.is_finite()) || n < 2 {
        return Err(Error::InvalidInput(format!(
            "log grid needs 0 < low < high and at least 2 points, got {low}, {high}, {n}"
        )));
    }
    let (a, b) = (low.ln(), high.ln());
    Ok((0..n)
        .map(|k| {
            if k == n - 1 {
                high
            } else {
                (a + (b - a) * k as f64 / (n - 1) as f64).exp()
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::instrument::jitter::{apply_phase_jitter, full_period_grid};
    use crate::quadrature::{normally_ordered_variance, variance_phase_scan};
    use approx::assert_abs_diff_eq;

    fn params() -> SystemParams {
        SystemParams::from_lifetime_ns(0.58, 0.1).unwrap()
    }

    #[test]
    fn ideal_model_reproduces_ideal_variance() {
        let p = params();
        let ideal = normally_ordered_variance(&p, 0.3).unwrap().normally_ordered_variance;
        assert_abs_diff_eq!(degraded_variance(&p, 0.3, &InstrumentModel::ideal()).unwrap(), ideal, epsilon = 1e-12);
    }

    #[test]
    fn jitter_matches_fft_smoothing() {
        let p = params();
        let model = InstrumentModel::ideal().with_phase_jitter(0.35);
        let grid = full_period_grid(48);
        let ideal = variance_phase_scan(&FieldSource::TwoLevel(p), &grid).unwrap();
        let smoothed = apply_phase_jitter(&ideal, &model).unwrap();
        let degraded = degraded_phase_scan(&p, &model, &grid).unwrap();
        for (a, b) in smoothed.variance.iter().zip(&degraded.variance) {
            assert_abs_diff_eq!(a, b, epsilon = 1e-12);
        }
    }

    #[test]
    fn timing_response_reduces_squeezing() {
        let p = params();
        let ideal = degraded_variance(&p, 0.0, &InstrumentModel::ideal()).unwrap();
        let blurred = degraded_variance(&p, 0.0, &InstrumentModel::ideal().with_irf_fwhm(0.5)).unwrap();
        assert!(ideal < blurred && blurred < 0.0);
    }

    #[test]
    fn wandering_reduces_squeezing() {
        let p = SystemParams::from_saturation(1.0, 0.1).unwrap();
        let ideal = degraded_variance(&p, 0.0, &InstrumentModel::ideal()).unwrap();
        let wandered = degraded_variance(&p, 0.0, &InstrumentModel::ideal().with_wandering(0.3)).unwrap();
        assert!(wandered.abs() < ideal.abs());
    }

    #[test]
    fn log_grid_endpoints() {
        let g = log_spaced(0.01, 30.0, 5).unwrap();
        assert_abs_diff_eq!(g[0], 0.01, epsilon = 1e-15);
        assert_eq!(g[4], 30.0);
    }
}
