//! Driven two-level emitter: parameters, density matrices and the Lindblad
//! generator.
//!
//! The rotating-frame model is
//!
//! ```text
//! H = -Δ σ⁺σ⁻ + (Ω/2)(σ⁺ + σ⁻)
//! dρ/dt = -i[H, ρ] + Γ D[σ⁻]ρ + (γ_d/2) D[σ_z]ρ
//! ```
//!
//! so coherences decay at `Γ/2 + γ_d`. Density matrices are vectorized
//! row-major in the basis order `(gg, ge, eg, ee)`; index `2i + j` holds
//! `ρ_ij` with `g = 0`, `e = 1`.
//!
//! Saturation is `s = 2Ω²/Γ²`, which on resonance without dephasing gives
//! `ρ_ee = s / (2(1 + s))`: half of the asymptotic 1/2 at `s = 1`.

use nalgebra::{Matrix2, Matrix4, Vector4};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

const TRACE_TOL: f64 = 1e-12;
const PSD_TOL: f64 = 1e-12;

/// Emitter and drive parameters. All rates share one angular-frequency unit
/// (inverse of the time unit used for delays).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Radiative decay rate Γ.
    pub gamma: f64,
    /// Rabi frequency Ω.
    pub rabi: f64,
    /// Laser minus transition frequency Δ.
    pub detuning: f64,
    /// Pure dephasing rate γ_d.
    #[serde(default)]
    pub dephasing: f64,
}

impl SystemParams {
    pub fn new(gamma: f64, rabi: f64, detuning: f64, dephasing: f64) -> Result<Self> {
        let params = Self {
            gamma,
            rabi,
            detuning,
            dephasing,
        };
        params.validate()?;
        Ok(params)
    }

    /// Resonant, dephasing-free drive at saturation `s`.
    pub fn from_saturation(gamma: f64, s: f64) -> Result<Self> {
        let rabi = rabi_from_saturation(s, gamma)?;
        Self::new(gamma, rabi, 0.0, 0.0)
    }

    /// Γ = 1/lifetime, so delays are measured in nanoseconds and rates in
    /// inverse nanoseconds.
    pub fn from_lifetime_ns(lifetime_ns: f64, s: f64) -> Result<Self> {
        Self::from_saturation(gamma_from_lifetime(lifetime_ns)?, s)
    }

    pub fn with_detuning(mut self, detuning: f64) -> Self {
        self.detuning = detuning;
        self
    }

    pub fn with_dephasing(mut self, dephasing: f64) -> Self {
        self.dephasing = dephasing;
        self
    }

    pub fn with_saturation(self, s: f64) -> Result<Self> {
        let rabi = rabi_from_saturation(s, self.gamma)?;
        Self::new(self.gamma, rabi, self.detuning, self.dephasing)
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("gamma", self.gamma)?;
        ensure_finite("rabi", self.rabi)?;
        ensure_finite("detuning", self.detuning)?;
        ensure_finite("dephasing", self.dephasing)?;
        if self.gamma <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "gamma must be positive, got {}",
                self.gamma
            )));
        }
        if self.rabi < 0.0 {
            return Err(Error::InvalidInput(format!(
                "rabi must be non-negative, got {}",
                self.rabi
            )));
        }
        if self.dephasing < 0.0 {
            return Err(Error::InvalidInput(format!(
                "dephasing must be non-negative, got {}",
                self.dephasing
            )));
        }
        Ok(())
    }

    /// Nominal saturation `2Ω²/Γ²`, independent of detuning and dephasing.
    pub fn saturation(&self) -> f64 {
        2.0 * self.rabi * self.rabi / (self.gamma * self.gamma)
    }

    /// Saturation of the resonant, undephased drive that would give the same
    /// excited population as these parameters.
    pub fn effective_saturation(&self) -> Result<f64> {
        let rho = steady_state(&build_liouvillian(self)?)?;
        Ok(2.0 * rho.rho_ee / (1.0 - 2.0 * rho.rho_ee))
    }

    /// Half-width of the coherence decay, `Γ/2 + γ_d`.
    pub fn coherence_decay(&self) -> f64 {
        0.5 * self.gamma + self.dephasing
    }
}

/// Γ = 1 / lifetime (ns⁻¹).
pub fn gamma_from_lifetime(lifetime_ns: f64) -> Result<f64> {
    ensure_finite("lifetime_ns", lifetime_ns)?;
    if lifetime_ns <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "lifetime_ns must be positive, got {lifetime_ns}"
        )));
    }
    Ok(1.0 / lifetime_ns)
}

/// Ω = Γ·sqrt(s/2).
pub fn rabi_from_saturation(s: f64, gamma: f64) -> Result<f64> {
    ensure_finite("s", s)?;
    ensure_finite("gamma", gamma)?;
    if s < 0.0 {
        return Err(Error::InvalidInput(format!(
            "saturation must be non-negative, got {s}"
        )));
    }
    if gamma <= 0.0 {
        return Err(Error::InvalidInput(format!(
            "gamma must be positive, got {gamma}"
        )));
    }
    Ok(gamma * (0.5 * s).sqrt())
}

/// Two-level density matrix in the `{|g⟩, |e⟩}` basis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DensityMatrix2 {
    pub rho_gg: f64,
    pub rho_ee: f64,
    /// `⟨g|ρ|e⟩ = ⟨σ⁺⟩`; the opposite corner is its conjugate.
    pub rho_ge: C64,
}

impl DensityMatrix2 {
    pub fn new(rho_gg: f64, rho_ee: f64, rho_ge: C64) -> Result<Self> {
        let rho = Self {
            rho_gg,
            rho_ee,
            rho_ge,
        };
        rho.validate()?;
        Ok(rho)
    }

    pub fn ground() -> Self {
        Self {
            rho_gg: 1.0,
            rho_ee: 0.0,
            rho_ge: C64::new(0.0, 0.0),
        }
    }

    pub fn excited() -> Self {
        Self {
            rho_gg: 0.0,
            rho_ee: 1.0,
            rho_ge: C64::new(0.0, 0.0),
        }
    }

    /// Checks unit trace and positivity.
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("rho_gg", self.rho_gg),
            ("rho_ee", self.rho_ee),
            ("rho_ge.re", self.rho_ge.re),
            ("rho_ge.im", self.rho_ge.im),
        ] {
            ensure_finite(name, v)?;
        }
        let trace = self.rho_gg + self.rho_ee;
        if (trace - 1.0).abs() > TRACE_TOL {
            return Err(Error::InvalidInput(format!(
                "density matrix trace is {trace}, expected 1"
            )));
        }
        if self.rho_gg < -PSD_TOL
            || self.rho_ee < -PSD_TOL
            || self.rho_gg * self.rho_ee < self.rho_ge.norm_sqr() - PSD_TOL
        {
            return Err(Error::InvalidInput(
                "density matrix is not positive semidefinite".into(),
            ));
        }
        Ok(())
    }

    /// `⟨σ⁻⟩ = ρ_eg`.
    pub fn lowering_expectation(&self) -> C64 {
        self.rho_ge.conj()
    }

    pub fn trace(&self) -> f64 {
        self.rho_gg + self.rho_ee
    }

    /// Eigenvalues, ascending.
    pub fn eigenvalues(&self) -> [f64; 2] {
        let mean = 0.5 * (self.rho_gg + self.rho_ee);
        let half_gap = (0.25 * (self.rho_gg - self.rho_ee).powi(2) + self.rho_ge.norm_sqr()).sqrt();
        [mean - half_gap, mean + half_gap]
    }

    pub fn to_matrix(&self) -> Matrix2<C64> {
        Matrix2::new(
            C64::new(self.rho_gg, 0.0),
            self.rho_ge,
            self.rho_ge.conj(),
            C64::new(self.rho_ee, 0.0),
        )
    }

    /// Hermitian part of `m`, with a check that the anti-Hermitian residue and
    /// the trace defect are below `tol`.
    pub fn from_matrix(m: &Matrix2<C64>, tol: f64) -> Result<Self> {
        let anti = (m - m.adjoint()).norm();
        if anti > tol {
            return Err(Error::Accuracy {
                context: "density matrix hermiticity".into(),
                defect: anti,
                tolerance: tol,
            });
        }
        let trace = (m[(0, 0)] + m[(1, 1)]).re;
        if (trace - 1.0).abs() > tol {
            return Err(Error::Accuracy {
                context: "density matrix trace".into(),
                defect: (trace - 1.0).abs(),
                tolerance: tol,
            });
        }
        Ok(Self {
            rho_gg: m[(0, 0)].re,
            rho_ee: m[(1, 1)].re,
            rho_ge: 0.5 * (m[(0, 1)] + m[(1, 0)].conj()),
        })
    }
}

/// Fixed atomic operators.
pub mod ops {
    use super::*;

    pub fn identity() -> Matrix2<C64> {
        Matrix2::identity()
    }

    /// σ⁻ = |g⟩⟨e|.
    pub fn lowering() -> Matrix2<C64> {
        let mut m = Matrix2::zeros();
        m[(0, 1)] = C64::new(1.0, 0.0);
        m
    }

    pub fn raising() -> Matrix2<C64> {
        lowering().adjoint()
    }

    /// σ⁺σ⁻ = |e⟩⟨e|.
    pub fn number() -> Matrix2<C64> {
        let mut m = Matrix2::zeros();
        m[(1, 1)] = C64::new(1.0, 0.0);
        m
    }

    /// σ_z = |e⟩⟨e| − |g⟩⟨g|.
    pub fn sigma_z() -> Matrix2<C64> {
        Matrix2::new(
            C64::new(-1.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(0.0, 0.0),
            C64::new(1.0, 0.0),
        )
    }
}

pub fn vectorize(m: &Matrix2<C64>) -> Vector4<C64> {
    Vector4::new(m[(0, 0)], m[(0, 1)], m[(1, 0)], m[(1, 1)])
}

pub fn unvectorize(v: &Vector4<C64>) -> Matrix2<C64> {
    Matrix2::new(v[0], v[1], v[2], v[3])
}

/// Lindblad generator acting on vectorized 2×2 matrices, basis order
/// `(gg, ge, eg, ee)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Liouvillian {
    matrix: Matrix4<C64>,
}

impl Liouvillian {
    /// Wraps an arbitrary 4×4 generator. No Lindblad-form check is done.
    pub fn from_matrix(matrix: Matrix4<C64>) -> Self {
        Self { matrix }
    }

    pub fn matrix(&self) -> &Matrix4<C64> {
        &self.matrix
    }

    /// Basis labels of the vectorization, in order.
    pub fn basis_order() -> [&'static str; 4] {
        ["gg", "ge", "eg", "ee"]
    }

    pub fn apply(&self, m: &Matrix2<C64>) -> Matrix2<C64> {
        unvectorize(&(self.matrix * vectorize(m)))
    }

    /// `exp(L τ)` as a 4×4 propagator.
    pub fn propagator(&self, tau: f64) -> Matrix4<C64> {
        if tau == 0.0 {
            return Matrix4::identity();
        }
        (self.matrix * C64::new(tau, 0.0)).exp()
    }

    /// Applies `exp(L τ)` to an arbitrary (not necessarily physical) matrix.
    pub fn evolve_operator(&self, m: &Matrix2<C64>, tau: f64) -> Result<Matrix2<C64>> {
        ensure_finite("tau", tau)?;
        if tau < 0.0 {
            return Err(Error::InvalidInput(format!(
                "delay must be non-negative, got {tau}"
            )));
        }
        Ok(unvectorize(&(self.propagator(tau) * vectorize(m))))
    }

    /// Trace-preservation defect: norm of `vec(I)ᵀ L`.
    pub fn trace_defect(&self) -> f64 {
        let identity_row = vectorize(&Matrix2::identity()).transpose();
        (identity_row * self.matrix).norm()
    }
}

/// Builds the Lindblad generator for `params`.
pub fn build_liouvillian(params: &SystemParams) -> Result<Liouvillian> {
    params.validate()?;
    let i = C64::new(0.0, 1.0);
    let sm = ops::lowering();
    let sp = ops::raising();
    let n = ops::number();
    let sz = ops::sigma_z();
    let h = n * C64::new(-params.detuning, 0.0) + (sp + sm) * C64::new(0.5 * params.rabi, 0.0);
    let gamma = C64::new(params.gamma, 0.0);
    let dephase = C64::new(0.5 * params.dephasing, 0.0);

    let generator = |rho: &Matrix2<C64>| -> Matrix2<C64> {
        let commutator = h * rho - rho * h;
        let decay = (sm * rho * sp) - (n * rho + rho * n) * C64::new(0.5, 0.0);
        let dephasing = sz * rho * sz - rho;
        commutator * (-i) + decay * gamma + dephasing * dephase
    };

    let mut matrix = Matrix4::zeros();
    for col in 0..4 {
        let mut basis = Matrix2::zeros();
        basis[(col / 2, col % 2)] = C64::new(1.0, 0.0);
        let image = vectorize(&generator(&basis));
        matrix.set_column(col, &image);
    }
    Ok(Liouvillian { matrix })
}

/// Unique fixed point of `l`, normalized to unit trace.
pub fn steady_state(l: &Liouvillian) -> Result<DensityMatrix2> {
    let scale = l.matrix.norm().max(1e-300);
    let svd = l.matrix.svd(false, false);
    let null_dim = svd
        .singular_values
        .iter()
        .filter(|&&sv| sv <= 1e-10 * scale)
        .count();
    if null_dim != 1 {
        return Err(Error::NoUniqueSteadyState {
            dimension: null_dim,
        });
    }

    // Replace the first equation by the trace condition.
    let mut system = l.matrix;
    let one = C64::new(1.0, 0.0);
    let zero = C64::new(0.0, 0.0);
    system.set_row(0, &nalgebra::RowVector4::new(one, zero, zero, one));
    let rhs = Vector4::new(one, zero, zero, zero);
    let v = system.lu().solve(&rhs).ok_or(Error::NoUniqueSteadyState {
        dimension: null_dim,
    })?;

    let residual = (l.matrix * v).norm();
    if residual > 1e-12 * scale.max(1.0) {
        return Err(Error::Accuracy {
            context: "steady-state residual".into(),
            defect: residual,
            tolerance: 1e-12 * scale.max(1.0),
        });
    }
    let m = unvectorize(&v);
    DensityMatrix2::from_matrix(&m, 1e-10)
}

/// `exp(L τ)` applied to `rho0`.
pub fn propagate(l: &Liouvillian, rho0: &DensityMatrix2, tau: f64) -> Result<DensityMatrix2> {
    let m = l.evolve_operator(&rho0.to_matrix(), tau)?;
    DensityMatrix2::from_matrix(&m, 1e-9)
}
