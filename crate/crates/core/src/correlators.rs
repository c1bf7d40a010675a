//! Two-time correlators of the emitted field via the quantum regression
//! theorem: `⟨A(0) B(τ) C(0)⟩ = tr[B · exp(Lτ)(C ρ_ss A)]`.

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::dynamics::{
    build_liouvillian, ops, steady_state, unvectorize, vectorize, DensityMatrix2, Liouvillian,
    SystemParams,
};
use crate::error::{ensure_finite, Error, Result};

/// Points in the default delay grid.
pub const DEFAULT_TAU_POINTS: usize = 400;
/// Span of the default delay grid in units of 1/Γ.
pub const DEFAULT_TAU_SPAN: f64 = 15.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum AtomicOperator {
    Identity,
    /// σ⁻
    Lowering,
    /// σ⁺
    Raising,
    /// σ⁺σ⁻
    Number,
}

impl AtomicOperator {
    pub fn matrix(self) -> Matrix2<C64> {
        match self {
            AtomicOperator::Identity => ops::identity(),
            AtomicOperator::Lowering => ops::lowering(),
            AtomicOperator::Raising => ops::raising(),
            AtomicOperator::Number => ops::number(),
        }
    }

    pub fn parse(id: &str) -> Result<Self> {
        match id {
            "identity" | "I" => Ok(AtomicOperator::Identity),
            "lowering" | "sigma_minus" => Ok(AtomicOperator::Lowering),
            "raising" | "sigma_plus" => Ok(AtomicOperator::Raising),
            "number" | "sigma_plus_sigma_minus" => Ok(AtomicOperator::Number),
            other => Err(Error::InvalidInput(format!("unsupported operator id `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CorrelationKind {
    G1,
    G2Rf,
    ThirdOrderLeft,
    ThirdOrderRight,
    Anomalous,
    QuadratureFluct,
    G2Total,
    /// Coefficient of `|β|ⁿ` in the homodyne expansion.
    DecompositionTerm(u8),
    /// Generic `⟨A(0)B(τ)C(0)⟩`.
    Generic,
}

impl CorrelationKind {
    pub fn label(&self) -> String {
        match self {
            CorrelationKind::G1 => "g1".into(),
            CorrelationKind::G2Rf => "g2_rf".into(),
            CorrelationKind::ThirdOrderLeft => "third_order_left".into(),
            CorrelationKind::ThirdOrderRight => "third_order_right".into(),
            CorrelationKind::Anomalous => "anomalous".into(),
            CorrelationKind::QuadratureFluct => "quadrature_fluct".into(),
            CorrelationKind::G2Total => "g2_total".into(),
            CorrelationKind::DecompositionTerm(n) => format!("decomposition_term_{n}"),
            CorrelationKind::Generic => "generic".into(),
        }
    }
}

/// Correlator values on a delay grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrelationTrace {
    pub tau_grid: Vec<f64>,
    pub values: Vec<C64>,
    pub kind: CorrelationKind,
    pub phase: Option<f64>,
    pub beta2: Option<f64>,
    pub normalized: bool,
}

impl CorrelationTrace {
    pub fn new(tau_grid: Vec<f64>, values: Vec<C64>, kind: CorrelationKind) -> Self {
        debug_assert_eq!(tau_grid.len(), values.len());
        Self {
            tau_grid,
            values,
            kind,
            phase: None,
            beta2: None,
            normalized: false,
        }
    }

    pub fn from_real(tau_grid: Vec<f64>, values: &[f64], kind: CorrelationKind) -> Self {
        let values = values.iter().map(|&v| C64::new(v, 0.0)).collect();
        Self::new(tau_grid, values, kind)
    }

    pub fn with_phase(mut self, phase: f64) -> Self {
        self.phase = Some(phase);
        self
    }

    pub fn with_beta2(mut self, beta2: f64) -> Self {
        self.beta2 = Some(beta2);
        self
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn real(&self) -> Vec<f64> {
        self.values.iter().map(|v| v.re).collect()
    }

    pub fn max_imaginary(&self) -> f64 {
        self.values.iter().map(|v| v.im.abs()).fold(0.0, f64::max)
    }

    pub fn at_zero(&self) -> C64 {
        self.values[0]
    }

    /// Uniform grid spacing, if the grid is uniform to within 1e-9 relative.
    pub fn uniform_step(&self) -> Option<f64> {
        uniform_step(&self.tau_grid)
    }
}

pub(crate) fn uniform_step(grid: &[f64]) -> Option<f64> {
    if grid.len() < 2 {
        return None;
    }
    let step = (grid[grid.len() - 1] - grid[0]) / (grid.len() - 1) as f64;
    let uniform = grid
        .windows(2)
        .all(|w| ((w[1] - w[0]) - step).abs() <= 1e-9 * step.abs().max(1e-300));
    uniform.then_some(step)
}

/// Uniform grid of `points` delays over `[0, span]`.
pub fn uniform_tau_grid(span: f64, points: usize) -> Result<Vec<f64>> {
    ensure_finite("span", span)?;
    if span <= 0.0 || points < 2 {
        return Err(Error::InvalidInput(format!(
            "delay grid needs positive span and at least 2 points, got span {span}, {points} points"
        )));
    }
    let step = span / (points - 1) as f64;
    Ok((0..points).map(|k| k as f64 * step).collect())
}

/// 400 uniform points over `[0, 15/Γ]`.
pub fn default_tau_grid(gamma: f64) -> Result<Vec<f64>> {
    uniform_tau_grid(DEFAULT_TAU_SPAN / gamma, DEFAULT_TAU_POINTS)
}

pub fn validate_tau_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InvalidInput("delay grid is empty".into()));
    }
    if grid[0] != 0.0 {
        return Err(Error::InvalidInput(format!(
            "delay grid must start at 0, starts at {}",
            grid[0]
        )));
    }
    for w in grid.windows(2) {
        ensure_finite("tau", w[1])?;
        if w[1] <= w[0] {
            return Err(Error::InvalidInput(
                "delay grid must be strictly increasing".into(),
            ));
        }
    }
    Ok(())
}

/// Reference angle θ of the quadrature frame: quadratures are built from
/// `b = σ⁻ e^{-iθ}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum QuadratureFrame {
    /// θ = arg⟨σ⁻⟩ of the steady state, so φ = 0 is in phase with the dipole.
    Dipole,
    /// Lab-fixed reference angle.
    Fixed(f64),
}

/// Steady state plus generator, shared by all correlators of one parameter set.
#[derive(Debug, Clone)]
pub struct RegressionEngine {
    liouvillian: Liouvillian,
    steady: DensityMatrix2,
}

impl RegressionEngine {
    pub fn new(params: &SystemParams) -> Result<Self> {
        let liouvillian = build_liouvillian(params)?;
        let steady = steady_state(&liouvillian)?;
        Ok(Self {
            liouvillian,
            steady,
        })
    }

    pub fn steady_state(&self) -> &DensityMatrix2 {
        &self.steady
    }

    pub fn liouvillian(&self) -> &Liouvillian {
        &self.liouvillian
    }

    /// Frame angle θ for `frame`; an undriven emitter uses θ = 0.
    pub fn frame_angle(&self, frame: QuadratureFrame) -> f64 {
        match frame {
            QuadratureFrame::Fixed(theta) => theta,
            QuadratureFrame::Dipole => {
                let mean = self.steady.lowering_expectation();
                if mean.norm() == 0.0 {
                    0.0
                } else {
                    mean.arg()
                }
            }
        }
    }

    /// Steady-state `⟨M⟩`.
    pub fn expectation(&self, m: &Matrix2<C64>) -> C64 {
        (m * self.steady.to_matrix()).trace()
    }

    /// `⟨A(0) B_k(τ) C(0)⟩` for every `B_k`, on a strictly increasing grid
    /// starting at 0.
    pub fn correlate(
        &self,
        left: &Matrix2<C64>,
        right: &Matrix2<C64>,
        mids: &[Matrix2<C64>],
        tau_grid: &[f64],
    ) -> Result<Vec<Vec<C64>>> {
        validate_tau_grid(tau_grid)?;
        let conditioned = right * self.steady.to_matrix() * left;
        let mut state = vectorize(&conditioned);
        let mut out = vec![Vec::with_capacity(tau_grid.len()); mids.len()];
        let mut cached: Option<(f64, Matrix4<C64>)> = None;
        let mut previous = 0.0;
        for &tau in tau_grid {
            let step = tau - previous;
            if step > 0.0 {
                let propagator = match cached {
                    Some((h, p)) if (h - step).abs() <= 1e-12 * step => p,
                    _ => {
                        let p = self.liouvillian.propagator(step);
                        cached = Some((step, p));
                        p
                    }
                };
                state = propagator * state;
            }
            previous = tau;
            let x = unvectorize(&state);
            for (mid, series) in mids.iter().zip(out.iter_mut()) {
                series.push((mid * x).trace());
            }
        }
        Ok(out)
    }

    /// Normal and anomalous quadrature kernels in `frame`.
    pub fn quadrature_kernels(
        &self,
        frame: QuadratureFrame,
        tau_grid: &[f64],
    ) -> Result<QuadratureKernels> {
        let theta = self.frame_angle(frame);
        let rot = C64::from_polar(1.0, -theta);
        let sm = ops::lowering();
        let sp = ops::raising();
        let id = ops::identity();
        // ⟨σ⁺(0)σ⁻(τ)⟩: A = σ⁺, C = I.
        let normal = self.correlate(&sp, &id, &[sm], tau_grid)?.remove(0);
        // ⟨σ⁻(τ)σ⁻(0)⟩: A = I, C = σ⁻.
        let anomalous = self.correlate(&id, &sm, &[sm], tau_grid)?.remove(0);
        let mean = self.steady.lowering_expectation() * rot;
        Ok(QuadratureKernels {
            tau_grid: tau_grid.to_vec(),
            normal,
            anomalous: anomalous.into_iter().map(|v| v * rot * rot).collect(),
            mean,
        })
    }
}

/// Ingredients of `⟨:ΔX(φ,0) ΔX(φ,τ):⟩` for `X(φ) = (b e^{iφ} + b† e^{-iφ})/2`.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureKernels {
    pub tau_grid: Vec<f64>,
    /// `⟨b†(0) b(τ)⟩`
    pub normal: Vec<C64>,
    /// `⟨b(τ) b(0)⟩`
    pub anomalous: Vec<C64>,
    /// `⟨b⟩`
    pub mean: C64,
}

impl QuadratureKernels {
    /// Phase-independent part `A(τ)` and `cos 2φ` part `B(τ)`, such that the
    /// autocorrelation is `A(τ) + Re(e^{2iφ} B(τ))`.
    pub fn harmonics(&self) -> (Vec<f64>, Vec<C64>) {
        let mean_sq = self.mean.norm_sqr();
        let mean2 = self.mean * self.mean;
        let a = self.normal.iter().map(|n| 0.5 * n.re - 0.5 * mean_sq).collect();
        let b = self.anomalous.iter().map(|an| 0.5 * an - 0.5 * mean2).collect();
        (a, b)
    }

    /// Full complex autocorrelation at phase φ; the imaginary part is the
    /// round-off residue.
    pub fn at_phase(&self, phi: f64) -> Vec<C64> {
        let e2 = C64::from_polar(1.0, 2.0 * phi);
        let e1 = C64::from_polar(1.0, phi);
        let mean_x = 0.5 * (self.mean * e1 + (self.mean * e1).conj());
        self.normal
            .iter()
            .zip(&self.anomalous)
            .map(|(n, an)| {
                // ¼[⟨b†(0)b(τ)⟩ + ⟨b†(τ)b(0)⟩ + e^{2iφ}⟨b(τ)b(0)⟩ + e^{-2iφ}⟨b†(0)b†(τ)⟩]
                let xx = 0.25 * (n + n.conj() + e2 * an + (e2 * an).conj());
                xx - mean_x * mean_x
            })
            .collect()
    }
}

/// `⟨A(0) B(τ) C(0)⟩` for operators drawn from the fixed set.
pub fn two_time_correlator(
    params: &SystemParams,
    left: AtomicOperator,
    mid: AtomicOperator,
    right: AtomicOperator,
    tau_grid: &[f64],
) -> Result<CorrelationTrace> {
    let engine = RegressionEngine::new(params)?;
    let values = engine
        .correlate(&left.matrix(), &right.matrix(), &[mid.matrix()], tau_grid)?
        .remove(0);
    let kind = match (left, mid, right) {
        (AtomicOperator::Raising, AtomicOperator::Lowering, AtomicOperator::Identity) => {
            CorrelationKind::G1
        }
        (AtomicOperator::Raising, AtomicOperator::Number, AtomicOperator::Lowering) => {
            CorrelationKind::G2Rf
        }
        (AtomicOperator::Identity, AtomicOperator::Lowering, AtomicOperator::Lowering) => {
            CorrelationKind::Anomalous
        }
        _ => CorrelationKind::Generic,
    };
    Ok(CorrelationTrace::new(tau_grid.to_vec(), values, kind))
}

/// First-order coherence `⟨σ⁺(0)σ⁻(τ)⟩`, optionally divided by `ρ_ee`.
pub fn g1(params: &SystemParams, tau_grid: &[f64], normalized: bool) -> Result<CorrelationTrace> {
    let engine = RegressionEngine::new(params)?;
    let mut values = engine
        .correlate(&ops::raising(), &ops::identity(), &[ops::lowering()], tau_grid)?
        .remove(0);
    if normalized {
        let pop = engine.steady_state().rho_ee;
        if pop == 0.0 {
            return Err(Error::DivisionByZero("g1 normalization with zero population".into()));
        }
        values.iter_mut().for_each(|v| *v /= pop);
    }
    let mut trace = CorrelationTrace::new(tau_grid.to_vec(), values, CorrelationKind::G1);
    trace.normalized = normalized;
    Ok(trace)
}

/// Intensity autocorrelation of the fluorescence,
/// `⟨σ⁺(0)σ⁺(τ)σ⁻(τ)σ⁻(0)⟩`, optionally divided by `ρ_ee²`.
pub fn g2_rf(params: &SystemParams, tau_grid: &[f64], normalized: bool) -> Result<CorrelationTrace> {
    let engine = RegressionEngine::new(params)?;
    let mut values = engine
        .correlate(&ops::raising(), &ops::lowering(), &[ops::number()], tau_grid)?
        .remove(0);
    if normalized {
        let pop = engine.steady_state().rho_ee;
        if pop == 0.0 {
            return Err(Error::DivisionByZero(
                "normalized g2 requires a driven emitter (s > 0)".into(),
            ));
        }
        values.iter_mut().for_each(|v| *v /= pop * pop);
    }
    let mut trace = CorrelationTrace::new(tau_grid.to_vec(), values, CorrelationKind::G2Rf);
    trace.normalized = normalized;
    Ok(trace)
}

/// `⟨:ΔX(φ,0) ΔX(φ,τ):⟩` with φ measured from the mean dipole.
pub fn quadrature_fluctuation_autocorrelation(
    params: &SystemParams,
    phi: f64,
    tau_grid: &[f64],
) -> Result<CorrelationTrace> {
    quadrature_fluctuation_autocorrelation_in_frame(params, phi, QuadratureFrame::Dipole, tau_grid)
}

pub fn quadrature_fluctuation_autocorrelation_in_frame(
    params: &SystemParams,
    phi: f64,
    frame: QuadratureFrame,
    tau_grid: &[f64],
) -> Result<CorrelationTrace> {
    ensure_finite("phi", phi)?;
    let engine = RegressionEngine::new(params)?;
    let kernels = engine.quadrature_kernels(frame, tau_grid)?;
    let values = kernels.at_phase(phi);
    let residue = values.iter().map(|v| v.im.abs()).fold(0.0, f64::max);
    if residue > 1e-12 {
        return Err(Error::Accuracy {
            context: "quadrature autocorrelation imaginary residue".into(),
            defect: residue,
            tolerance: 1e-12,
        });
    }
    let values = values.into_iter().map(|v| C64::new(v.re, 0.0)).collect();
    Ok(CorrelationTrace::new(tau_grid.to_vec(), values, CorrelationKind::QuadratureFluct).with_phase(phi))
}
