//! Steady-state quadrature statistics of the emitted field.
//!
//! Quadratures are `X(φ) = (b e^{iφ} + b† e^{-iφ})/2` with `b = σ⁻ e^{-iθ}`
//! and θ the frame angle (the dipole phase by default). Variances are
//! reported normally ordered, so the vacuum sits at 0 and its full variance is
//! 1/4; a negative value means squeezing.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::correlators::QuadratureFrame;
use crate::dynamics::{build_liouvillian, steady_state, DensityMatrix2, SystemParams};
use crate::error::{ensure_finite, Error, Result};

/// Full quadrature variance of the vacuum.
pub const VACUUM_VARIANCE: f64 = 0.25;

/// Location of the largest squeezing as quoted with the measurements. The
/// ideal two-level model puts the optimum at s = 1/3 instead; both are
/// reported side by side.
pub const QUOTED_OPTIMUM_SATURATION: f64 = 0.36;

/// Percentage of the vacuum variance by which `normally_ordered` lies below it.
pub fn percent_below_vacuum(normally_ordered: f64) -> f64 {
    -normally_ordered / VACUUM_VARIANCE * 100.0
}

/// Normally ordered variance for a given percentage below vacuum.
pub fn variance_from_percent_below_vacuum(percent: f64) -> f64 {
    -percent / 100.0 * VACUUM_VARIANCE
}

/// Squeezing expressed in decibels, `10 log10(full / vacuum)`.
pub fn decibels(normally_ordered: f64) -> f64 {
    10.0 * ((VACUUM_VARIANCE + normally_ordered) / VACUUM_VARIANCE).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureValue {
    pub phi: f64,
    pub normally_ordered_variance: f64,
    pub full_variance: f64,
}

impl QuadratureValue {
    fn new(phi: f64, normally_ordered_variance: f64) -> Self {
        Self {
            phi,
            normally_ordered_variance,
            full_variance: VACUUM_VARIANCE + normally_ordered_variance,
        }
    }

    pub fn is_squeezed(&self) -> bool {
        self.normally_ordered_variance < 0.0
    }
}

/// Field model behind a scan.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum FieldSource {
    TwoLevel(SystemParams),
    /// Coherent laser light: normally ordered variance identically 0.
    Coherent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScanAxis {
    Phase,
    Power,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuadratureScan {
    pub axis: ScanAxis,
    /// Phases in radians or saturation values.
    pub grid: Vec<f64>,
    pub variance: Vec<f64>,
    pub source: FieldSource,
    /// Fixed phase of a power scan.
    pub phi: Option<f64>,
}

impl QuadratureScan {
    /// `(grid point, value)` of the minimum.
    pub fn minimum(&self) -> (f64, f64) {
        self.grid
            .iter()
            .zip(&self.variance)
            .fold((f64::NAN, f64::INFINITY), |best, (&x, &v)| {
                if v < best.1 {
                    (x, v)
                } else {
                    best
                }
            })
    }

    pub fn maximum(&self) -> (f64, f64) {
        self.grid
            .iter()
            .zip(&self.variance)
            .fold((f64::NAN, f64::NEG_INFINITY), |best, (&x, &v)| {
                if v > best.1 {
                    (x, v)
                } else {
                    best
                }
            })
    }

    /// Linearly interpolated grid points where the variance changes sign.
    pub fn zero_crossings(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for k in 1..self.grid.len() {
            let (v0, v1) = (self.variance[k - 1], self.variance[k]);
            if v0 == 0.0 {
                out.push(self.grid[k - 1]);
            } else if v0 * v1 < 0.0 {
                let t = v0 / (v0 - v1);
                out.push(self.grid[k - 1] + t * (self.grid[k] - self.grid[k - 1]));
            }
        }
        out
    }
}

struct SteadyMoments {
    rho: DensityMatrix2,
}

impl SteadyMoments {
    fn new(params: &SystemParams) -> Result<Self> {
        let rho = steady_state(&build_liouvillian(params)?)?;
        Ok(Self { rho })
    }

    fn theta(&self, frame: QuadratureFrame) -> f64 {
        match frame {
            QuadratureFrame::Fixed(theta) => theta,
            QuadratureFrame::Dipole => {
                let m = self.rho.lowering_expectation();
                if m.norm() == 0.0 {
                    0.0
                } else {
                    m.arg()
                }
            }
        }
    }

    fn variance(&self, phi: f64, frame: QuadratureFrame) -> f64 {
        let b = self.rho.lowering_expectation() * C64::from_polar(1.0, -self.theta(frame));
        let mean_x = (C64::from_polar(1.0, phi) * b).re;
        0.5 * self.rho.rho_ee - mean_x * mean_x
    }
}

/// `⟨:(ΔX(φ))²:⟩` with φ measured from the mean dipole.
pub fn normally_ordered_variance(params: &SystemParams, phi: f64) -> Result<QuadratureValue> {
    normally_ordered_variance_in_frame(params, phi, QuadratureFrame::Dipole)
}

/// `⟨:(ΔX(φ))²:⟩` with φ measured in `frame`.
pub fn normally_ordered_variance_in_frame(
    params: &SystemParams,
    phi: f64,
    frame: QuadratureFrame,
) -> Result<QuadratureValue> {
    ensure_finite("phi", phi)?;
    let moments = SteadyMoments::new(params)?;
    Ok(QuadratureValue::new(phi, moments.variance(phi, frame)))
}

pub fn variance_phase_scan(source: &FieldSource, phi_grid: &[f64]) -> Result<QuadratureScan> {
    if phi_grid.is_empty() {
        return Err(Error::InvalidInput("phase grid is empty".into()));
    }
    for &phi in phi_grid {
        ensure_finite("phi", phi)?;
    }
    let variance = match source {
        FieldSource::Coherent => vec![0.0; phi_grid.len()],
        FieldSource::TwoLevel(params) => {
            let moments = SteadyMoments::new(params)?;
            phi_grid
                .iter()
                .map(|&phi| moments.variance(phi, QuadratureFrame::Dipole))
                .collect()
        }
    };
    Ok(QuadratureScan {
        axis: ScanAxis::Phase,
        grid: phi_grid.to_vec(),
        variance,
        source: *source,
        phi: None,
    })
}

/// In-phase (φ = 0) and in-quadrature (φ = π/2) variances over `s_grid`,
/// keeping Γ, Δ and γ_d of `template`.
pub fn variance_power_scan(
    template: &SystemParams,
    s_grid: &[f64],
) -> Result<(QuadratureScan, QuadratureScan)> {
    if s_grid.is_empty() {
        return Err(Error::InvalidInput("saturation grid is empty".into()));
    }
    if s_grid.iter().any(|&s| !(s > 0.0) || !s.is_finite()) {
        return Err(Error::InvalidInput("saturation grid must be positive".into()));
    }
    if s_grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidInput("saturation grid must be ascending".into()));
    }
    let mut in_phase = Vec::with_capacity(s_grid.len());
    let mut in_quadrature = Vec::with_capacity(s_grid.len());
    for &s in s_grid {
        let moments = SteadyMoments::new(&template.with_saturation(s)?)?;
        in_phase.push(moments.variance(0.0, QuadratureFrame::Dipole));
        in_quadrature.push(moments.variance(FRAC_PI_2, QuadratureFrame::Dipole));
    }
    let scan = |variance, phi| QuadratureScan {
        axis: ScanAxis::Power,
        grid: s_grid.to_vec(),
        variance,
        source: FieldSource::TwoLevel(*template),
        phi: Some(phi),
    };
    Ok((scan(in_phase, 0.0), scan(in_quadrature, FRAC_PI_2)))
}

/// `arg⟨σ⁺⟩` of the steady state, in `(-π, π]`; equals `arg(Δ + i(Γ/2 + γ_d))`.
pub fn dipole_phase(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    if params.rabi == 0.0 {
        return Err(Error::UndefinedPhase);
    }
    let rho = steady_state(&build_liouvillian(params)?)?;
    if rho.rho_ge.norm() <= 1e-300 {
        return Err(Error::UndefinedPhase);
    }
    Ok(rho.rho_ge.arg())
}

/// `(1/4 + N(0)) · (1/4 + N(π/2))`.
pub fn heisenberg_product(params: &SystemParams) -> Result<f64> {
    let moments = SteadyMoments::new(params)?;
    let x1 = VACUUM_VARIANCE + moments.variance(0.0, QuadratureFrame::Dipole);
    let x2 = VACUUM_VARIANCE + moments.variance(FRAC_PI_2, QuadratureFrame::Dipole);
    Ok(x1 * x2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use std::f64::consts::PI;

    fn resonant(s: f64) -> SystemParams {
        SystemParams::from_saturation(1.0, s).unwrap()
    }

    #[test]
    fn optimum_and_crossing_values() {
        let v = normally_ordered_variance(&resonant(1.0 / 3.0), 0.0).unwrap();
        assert_abs_diff_eq!(v.normally_ordered_variance, -1.0 / 32.0, epsilon = 1e-12);
        assert_abs_diff_eq!(percent_below_vacuum(v.normally_ordered_variance), 12.5, epsilon = 1e-9);
        let v = normally_ordered_variance(&resonant(1.0), 0.0).unwrap();
        assert_abs_diff_eq!(v.normally_ordered_variance, 0.0, epsilon = 1e-12);
        let v = normally_ordered_variance(&resonant(0.1), FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(v.normally_ordered_variance, 1.0 / 44.0, epsilon = 1e-12);
        assert!(v.full_variance > 0.0);
    }

    #[test]
    fn coherent_reference_is_flat_zero() {
        let grid: Vec<f64> = (0..32).map(|k| k as f64 * PI / 16.0).collect();
        let scan = variance_phase_scan(&FieldSource::Coherent, &grid).unwrap();
        assert!(scan.variance.iter().all(|&v| v == 0.0));
        assert!(variance_phase_scan(&FieldSource::Coherent, &[]).is_err());
    }

    #[test]
    fn weak_drive_squeezing_window_is_narrow() {
        let grid: Vec<f64> = (0..=720).map(|k| -PI / 2.0 + k as f64 * PI / 720.0).collect();
        let scan = variance_phase_scan(&FieldSource::TwoLevel(resonant(0.1)), &grid).unwrap();
        let crossings = scan.zero_crossings();
        assert_eq!(crossings.len(), 2);
        // cos²φ = ρ_ee / (2|⟨σ⁻⟩|²) = (1 + s)/2 bounds the squeezed window.
        let edge = ((1.1f64 / 2.0).sqrt()).acos();
        assert_abs_diff_eq!(crossings[1], edge, epsilon = 1e-4);
        assert_abs_diff_eq!(crossings[0], -edge, epsilon = 1e-4);
        let strong = variance_phase_scan(&FieldSource::TwoLevel(resonant(3.0)), &grid).unwrap();
        assert!(strong.minimum().1 > 0.0);
    }

    #[test]
    fn power_scan_limits() {
        let (inphase, inquad) = variance_power_scan(&resonant(1.0), &[0.1, 1e6]).unwrap();
        assert_abs_diff_eq!(inphase.variance[0], -0.018595041322314, epsilon = 1e-12);
        assert_abs_diff_eq!(inquad.variance[1], 0.25, epsilon = 1e-6);
        assert!(variance_power_scan(&resonant(1.0), &[0.5, 0.1]).is_err());
        assert!(variance_power_scan(&resonant(1.0), &[0.0, 0.1]).is_err());
    }

    #[test]
    fn dipole_phase_follows_detuning() {
        let p = resonant(0.01);
        assert_abs_diff_eq!(dipole_phase(&p).unwrap(), FRAC_PI_2, epsilon = 1e-12);
        assert_abs_diff_eq!(dipole_phase(&p.with_detuning(0.5)).unwrap(), PI / 4.0, epsilon = 1e-12);
        assert!(dipole_phase(&p.with_detuning(1e4)).unwrap() < 1e-3);
        assert!(dipole_phase(&p.with_detuning(-1e4)).unwrap() > PI - 1e-3);
        assert!(matches!(dipole_phase(&resonant(0.0)), Err(Error::UndefinedPhase)));
    }

    #[test]
    fn heisenberg_spot_values() {
        assert_abs_diff_eq!(heisenberg_product(&resonant(0.0)).unwrap(), 1.0 / 16.0, epsilon = 1e-15);
        assert_abs_diff_eq!(heisenberg_product(&resonant(1.0 / 3.0)).unwrap(), 35.0 / 512.0, epsilon = 1e-12);
        assert!(heisenberg_product(&resonant(100.0)).unwrap() > 1.0 / 16.0);
    }

    #[test]
    fn decibel_conversion() {
        assert_abs_diff_eq!(decibels(-1.0 / 32.0), -0.5799, epsilon = 1e-4);
        assert_abs_diff_eq!(variance_from_percent_below_vacuum(3.1), -0.00775, epsilon = 1e-15);
    }
}
