//! Superimposed fluorescence and local-oscillator field, its single-detector
//! fringe, and its intensity autocorrelation split by LO order.
//!
//! The positive-frequency SL field at the detector is
//!
//! ```text
//! E⁺ = b + β e^{-iφ},    b = σ⁻ e^{-iθ}
//! ```
//!
//! with θ the frame angle (dipole phase unless stated otherwise). The LO is a
//! classical amplitude `β ≥ 0` in emitted-field units, so `β²` is the LO flux
//! relative to an RF flux of `ρ_ee`. The cross term of `E⁻E⁺` is `2β X(φ)`.

use nalgebra::Matrix2;
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::correlators::{CorrelationKind, CorrelationTrace, QuadratureFrame, RegressionEngine};
use crate::dynamics::{ops, SystemParams};
use crate::error::{ensure_finite, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LOConfig {
    /// β ≥ 0.
    pub amplitude: f64,
    /// φ in radians.
    pub phase: f64,
}

impl LOConfig {
    pub fn new(amplitude: f64, phase: f64) -> Result<Self> {
        let lo = Self { amplitude, phase };
        lo.validate()?;
        Ok(lo)
    }

    /// LO flux equal to the fluorescence flux, `β² = ρ_ee`.
    pub fn matched(params: &SystemParams, phase: f64) -> Result<Self> {
        let engine = RegressionEngine::new(params)?;
        Self::new(engine.steady_state().rho_ee.sqrt(), phase)
    }

    pub fn blocked() -> Self {
        Self {
            amplitude: 0.0,
            phase: 0.0,
        }
    }

    pub fn beta2(&self) -> f64 {
        self.amplitude * self.amplitude
    }

    pub fn with_phase(self, phase: f64) -> Self {
        Self { phase, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("lo amplitude", self.amplitude)?;
        ensure_finite("lo phase", self.phase)?;
        if self.amplitude < 0.0 {
            return Err(Error::InvalidInput(format!(
                "LO amplitude must be non-negative, got {}",
                self.amplitude
            )));
        }
        Ok(())
    }

    /// `β e^{-iφ}`.
    fn field(&self) -> C64 {
        C64::from_polar(self.amplitude, -self.phase)
    }
}

/// Single-detector SL intensity,
/// `I(φ) = I_RF + I_LO + 2 V sqrt(I_RF I_LO) |c| cos φ`, where `|c|²` is the
/// coherently scattered fraction and `V` the mode overlap.
pub fn sl_intensity(params: &SystemParams, lo: &LOConfig, visibility: f64) -> Result<f64> {
    let fringe = Fringe::new(params, lo, visibility)?;
    Ok(fringe.at(lo.phase))
}

/// Interference fringe of one configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Fringe {
    pub rf_intensity: f64,
    pub lo_intensity: f64,
    /// Amplitude of the coherent fraction, `|⟨σ⁻⟩| / sqrt(ρ_ee)`.
    pub coherent_amplitude: f64,
    pub mode_overlap: f64,
}

impl Fringe {
    pub fn new(params: &SystemParams, lo: &LOConfig, mode_overlap: f64) -> Result<Self> {
        lo.validate()?;
        if !(0.0..=1.0).contains(&mode_overlap) {
            return Err(Error::InvalidInput(format!(
                "visibility must lie in [0, 1], got {mode_overlap}"
            )));
        }
        let engine = RegressionEngine::new(params)?;
        let rho = engine.steady_state();
        let coherent_amplitude = if rho.rho_ee > 0.0 {
            rho.rho_ge.norm() / rho.rho_ee.sqrt()
        } else {
            0.0
        };
        Ok(Self {
            rf_intensity: rho.rho_ee,
            lo_intensity: lo.beta2(),
            coherent_amplitude,
            mode_overlap,
        })
    }

    pub fn at(&self, phi: f64) -> f64 {
        self.rf_intensity + self.lo_intensity + self.cross_amplitude() * phi.cos()
    }

    fn cross_amplitude(&self) -> f64 {
        2.0 * self.mode_overlap
            * (self.rf_intensity * self.lo_intensity).sqrt()
            * self.coherent_amplitude
    }

    /// `(I_max − I_min)/(I_max + I_min)`.
    pub fn visibility(&self) -> f64 {
        let total = self.rf_intensity + self.lo_intensity;
        if total == 0.0 {
            0.0
        } else {
            self.cross_amplitude() / total
        }
    }

    /// Mode overlap that makes the overall fringe visibility equal `target`.
    pub fn mode_overlap_for_visibility(&self, target: f64) -> Result<f64> {
        let unit = Self {
            mode_overlap: 1.0,
            ..*self
        }
        .visibility();
        if !(0.0..=1.0).contains(&target) || unit == 0.0 || target > unit {
            return Err(Error::NoSolution {
                target,
                low: 0.0,
                high: unit,
                detail: "fringe visibility reachable with mode overlap in [0, 1]".into(),
            });
        }
        Ok(target / unit)
    }
}

/// `G²(τ) = ⟨E⁻(0) E⁻(τ) E⁺(τ) E⁺(0)⟩` of the SL field, with φ from the dipole.
pub fn g2_total(params: &SystemParams, lo: &LOConfig, tau_grid: &[f64]) -> Result<CorrelationTrace> {
    g2_total_in_frame(params, lo, QuadratureFrame::Dipole, tau_grid)
}

/// `G²(τ)` with composite field operators fed straight through the regression
/// theorem.
pub fn g2_total_in_frame(
    params: &SystemParams,
    lo: &LOConfig,
    frame: QuadratureFrame,
    tau_grid: &[f64],
) -> Result<CorrelationTrace> {
    lo.validate()?;
    let engine = RegressionEngine::new(params)?;
    let b = ops::lowering() * C64::from_polar(1.0, -engine.frame_angle(frame));
    let e_plus = b + Matrix2::identity() * lo.field();
    let e_minus = e_plus.adjoint();
    let values = engine
        .correlate(&e_minus, &e_plus, &[e_minus * e_plus], tau_grid)?
        .remove(0);
    Ok(CorrelationTrace::new(tau_grid.to_vec(), values, CorrelationKind::G2Total)
        .with_phase(lo.phase)
        .with_beta2(lo.beta2()))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomodyneDecomposition {
    /// `terms[n]` is the coefficient of `βⁿ`, n = 0..=4.
    pub terms: Vec<CorrelationTrace>,
    /// `Σ terms[n] βⁿ`.
    pub total: CorrelationTrace,
    /// `⟨:ΔX(φ,0) ΔX(φ,τ):⟩` recovered from `terms[2]`.
    pub quadrature_term: CorrelationTrace,
    /// `ΔG²₂(τ) = quadrature_scale · quadrature_term(τ)`, equal to `4β²`.
    pub quadrature_scale: f64,
    /// Delay-independent part of `terms[2]`, `2ρ_ee + 4⟨X(φ)⟩²`.
    pub quadrature_background: f64,
}

/// Expands `G²` into the 16 operator products of `(b† + β*)(b†(τ) + β*)(b(τ) + β)(b + β)`
/// and groups them by power of β.
pub fn decompose_by_lo_order(
    params: &SystemParams,
    lo: &LOConfig,
    tau_grid: &[f64],
) -> Result<HomodyneDecomposition> {
    decompose_by_lo_order_in_frame(params, lo, QuadratureFrame::Dipole, tau_grid)
}

pub fn decompose_by_lo_order_in_frame(
    params: &SystemParams,
    lo: &LOConfig,
    frame: QuadratureFrame,
    tau_grid: &[f64],
) -> Result<HomodyneDecomposition> {
    lo.validate()?;
    let engine = RegressionEngine::new(params)?;
    let theta = engine.frame_angle(frame);
    let b = ops::lowering() * C64::from_polar(1.0, -theta);
    let bd = b.adjoint();
    let id: Matrix2<C64> = Matrix2::identity();
    // Unit-modulus LO phase u = e^{-iφ}; the LO amplitude is β·u.
    let u = C64::from_polar(1.0, -lo.phase);
    let uc = u.conj();

    // Middle factor E⁻(τ)E⁺(τ) = b†b + β u b† + β u* b + β².
    let mids = [bd * b, bd, b, id];
    let mid_weights = [(C64::new(1.0, 0.0), 0u8), (u, 1), (uc, 1), (C64::new(1.0, 0.0), 2)];
    // Outer factors: left E⁻(0) ∈ {b†, β u*}, right E⁺(0) ∈ {b, β u}.
    let lefts = [(bd, C64::new(1.0, 0.0), 0u8), (id, uc, 1)];
    let rights = [(b, C64::new(1.0, 0.0), 0u8), (id, u, 1)];

    let n = tau_grid.len();
    let mut terms = vec![vec![C64::new(0.0, 0.0); n]; 5];
    for (left, lw, lp) in &lefts {
        for (right, rw, rp) in &rights {
            let series = engine.correlate(left, right, &mids, tau_grid)?;
            for (values, (mw, mp)) in series.iter().zip(&mid_weights) {
                let order = (lp + rp + mp) as usize;
                let weight = lw * rw * mw;
                for (acc, v) in terms[order].iter_mut().zip(values) {
                    *acc += weight * v;
                }
            }
        }
    }

    let beta = lo.amplitude;
    let mut total = vec![C64::new(0.0, 0.0); n];
    for (order, term) in terms.iter().enumerate() {
        let scale = beta.powi(order as i32);
        for (acc, v) in total.iter_mut().zip(term) {
            *acc += v * scale;
        }
    }

    let rho = engine.steady_state();
    let mean_b = rho.lowering_expectation() * C64::from_polar(1.0, -theta);
    let mean_x = (C64::from_polar(1.0, lo.phase) * mean_b).re;
    let background = 2.0 * rho.rho_ee + 4.0 * mean_x * mean_x;
    let quadrature: Vec<C64> = terms[2]
        .iter()
        .map(|v| C64::new((v.re - background) / 4.0, v.im / 4.0))
        .collect();

    let trace = |values: Vec<C64>, kind| {
        CorrelationTrace::new(tau_grid.to_vec(), values, kind)
            .with_phase(lo.phase)
            .with_beta2(lo.beta2())
    };
    Ok(HomodyneDecomposition {
        terms: terms
            .into_iter()
            .enumerate()
            .map(|(k, v)| trace(v, CorrelationKind::DecompositionTerm(k as u8)))
            .collect(),
        total: trace(total, CorrelationKind::G2Total),
        quadrature_term: trace(quadrature, CorrelationKind::QuadratureFluct),
        quadrature_scale: 4.0 * lo.beta2(),
        quadrature_background: background,
    })
}

/// Writes traces as CSV with header `tau_s,value,kind,phi,beta2`. Delays are
/// multiplied by `time_unit_s` to give seconds.
pub fn write_traces_csv<W: std::io::Write>(
    mut out: W,
    traces: &[&CorrelationTrace],
    time_unit_s: f64,
) -> Result<()> {
    writeln!(out, "tau_s,value,kind,phi,beta2")?;
    for trace in traces {
        let phi = trace.phase.map(|p| format!("{p:.12}")).unwrap_or_default();
        let beta2 = trace.beta2.map(|b| format!("{b:.12}")).unwrap_or_default();
        let kind = trace.kind.label();
        for (tau, v) in trace.tau_grid.iter().zip(&trace.values) {
            writeln!(out, "{:.9e},{:.15e},{kind},{phi},{beta2}", tau * time_unit_s, v.re)?;
        }
    }
    Ok(())
}
