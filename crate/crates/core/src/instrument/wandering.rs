//! Quasi-static spectral wandering: Gaussian average over the detuning.

use std::sync::OnceLock;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64 as C64;

use super::InstrumentModel;
use crate::dynamics::SystemParams;
use crate::error::{Error, Result};

const NODE_LADDER: [usize; 6] = [16, 32, 64, 128, 256, 512];
const CONVERGENCE_TOL: f64 = 1e-7;

static RULES: OnceLock<Vec<(Vec<f64>, Vec<f64>)>> = OnceLock::new();

fn ladder_rule(level: usize) -> &'static (Vec<f64>, Vec<f64>) {
    &RULES.get_or_init(|| NODE_LADDER.iter().map(|&n| gauss_hermite(n)).collect())[level]
}

/// Gauss–Hermite rule for the standard normal weight: `Σ w_k f(x_k) ≈ E[f(Z)]`.
///
/// Golub–Welsch: nodes are the eigenvalues of the Jacobi matrix with
/// off-diagonal `sqrt(k)`, weights the squared first eigenvector components.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    if n == 1 {
        return (vec![0.0], vec![1.0]);
    }
    let mut jacobi = DMatrix::<f64>::zeros(n, n);
    for k in 1..n {
        let off = (k as f64).sqrt();
        jacobi[(k - 1, k)] = off;
        jacobi[(k, k - 1)] = off;
    }
    let eig = SymmetricEigen::new(jacobi);
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|k| (eig.eigenvalues[k], eig.eigenvectors[(0, k)].powi(2)))
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    let total: f64 = pairs.iter().map(|p| p.1).sum();
    pairs.into_iter().map(|(x, w)| (x, w / total)).unzip()
}

/// Values that can be averaged with real weights.
pub trait Averageable: Sized + Clone {
    fn zeros_like(&self) -> Self;
    fn add_scaled(&mut self, other: &Self, weight: f64);
    fn max_abs_diff(&self, other: &Self) -> f64;
    fn max_abs(&self) -> f64;
}

impl Averageable for f64 {
    fn zeros_like(&self) -> Self {
        0.0
    }
    fn add_scaled(&mut self, other: &Self, weight: f64) {
        *self += weight * other;
    }
    fn max_abs_diff(&self, other: &Self) -> f64 {
        (self - other).abs()
    }
    fn max_abs(&self) -> f64 {
        self.abs()
    }
}

impl Averageable for Vec<f64> {
    fn zeros_like(&self) -> Self {
        vec![0.0; self.len()]
    }
    fn add_scaled(&mut self, other: &Self, weight: f64) {
        self.iter_mut().zip(other).for_each(|(a, b)| *a += weight * b);
    }
    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
    }
    fn max_abs(&self) -> f64 {
        self.iter().map(|a| a.abs()).fold(0.0, f64::max)
    }
}

impl Averageable for Vec<C64> {
    fn zeros_like(&self) -> Self {
        vec![C64::new(0.0, 0.0); self.len()]
    }
    fn add_scaled(&mut self, other: &Self, weight: f64) {
        self.iter_mut().zip(other).for_each(|(a, b)| *a += b * weight);
    }
    fn max_abs_diff(&self, other: &Self) -> f64 {
        self.iter().zip(other).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
    fn max_abs(&self) -> f64 {
        self.iter().map(|a| a.norm()).fold(0.0, f64::max)
    }
}

fn quadrature<T, F>(params: &SystemParams, sigma: f64, level: usize, evaluator: &F) -> Result<T>
where
    T: Averageable,
    F: Fn(&SystemParams) -> Result<T>,
{
    let (xs, ws) = ladder_rule(level);
    let mut acc: Option<T> = None;
    for (x, w) in xs.iter().zip(ws) {
        let shifted = params.with_detuning(params.detuning + sigma * x);
        let value = evaluator(&shifted)?;
        match acc.as_mut() {
            None => {
                let mut first = value.zeros_like();
                first.add_scaled(&value, *w);
                acc = Some(first);
            }
            Some(a) => a.add_scaled(&value, *w),
        }
    }
    Ok(acc.expect("at least one node"))
}

/// `E[f(Δ)]` for `Δ ~ Normal(params.detuning, wandering_sigma²)`.
///
/// The node count is doubled from 16 up to 512 until two successive rules
/// agree to 1e-7 relative; otherwise an accuracy error reports the last difference.
pub fn average_spectral_wandering<T, F>(
    params: &SystemParams,
    model: &InstrumentModel,
    evaluator: F,
) -> Result<T>
where
    T: Averageable,
    F: Fn(&SystemParams) -> Result<T>,
{
    params.validate()?;
    let sigma = model.wandering_sigma;
    if !(sigma >= 0.0) || !sigma.is_finite() {
        return Err(Error::InvalidInput(format!(
            "wandering sigma must be finite and non-negative, got {sigma}"
        )));
    }
    if sigma == 0.0 {
        return evaluator(params);
    }
    if sigma >= params.gamma {
        return Err(Error::InvalidInput(format!(
            "spectral wandering must be sub-linewidth: sigma {sigma} >= gamma {}",
            params.gamma
        )));
    }
    let mut previous = quadrature(params, sigma, 0, &evaluator)?;
    let mut defect = f64::INFINITY;
    for level in 1..NODE_LADDER.len() {
        let current = quadrature(params, sigma, level, &evaluator)?;
        defect = current.max_abs_diff(&previous);
        if defect <= CONVERGENCE_TOL * current.max_abs().max(1e-300) {
            return Ok(current);
        }
        previous = current;
    }
    Err(Error::Accuracy {
        context: "spectral-wandering quadrature did not converge".into(),
        defect,
        tolerance: CONVERGENCE_TOL * previous.max_abs(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn hermite_rule_moments() {
        let (x, w) = gauss_hermite(10);
        let moment = |p: i32| x.iter().zip(&w).map(|(x, w)| w * x.powi(p)).sum::<f64>();
        assert_abs_diff_eq!(moment(0), 1.0, epsilon = 1e-13);
        assert_abs_diff_eq!(moment(1), 0.0, epsilon = 1e-13);
        assert_abs_diff_eq!(moment(2), 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(moment(4), 3.0, epsilon = 1e-11);
        assert_abs_diff_eq!(moment(6), 15.0, epsilon = 1e-10);
        assert_abs_diff_eq!(moment(18), 34459425.0, epsilon = 1e-4);
    }

    #[test]
    fn polynomial_integrand_is_exact() {
        let p = SystemParams::new(1.0, 0.1, 0.2, 0.0).unwrap();
        let model = InstrumentModel::default().with_wandering(0.3);
        let avg: f64 = average_spectral_wandering(&p, &model, |q| Ok(q.detuning.powi(2))).unwrap();
        assert_abs_diff_eq!(avg, 0.04 + 0.09, epsilon = 1e-13);
    }

    #[test]
    fn zero_width_is_identity() {
        let p = SystemParams::new(1.0, 0.1, 0.2, 0.0).unwrap();
        let avg: f64 = average_spectral_wandering(&p, &InstrumentModel::default(), |q| Ok(q.detuning)).unwrap();
        assert_eq!(avg, 0.2);
    }

    #[test]
    fn super_linewidth_rejected() {
        let p = SystemParams::new(1.0, 0.1, 0.0, 0.0).unwrap();
        let model = InstrumentModel::default().with_wandering(1.5);
        assert!(average_spectral_wandering(&p, &model, |q| Ok(q.detuning)).is_err());
    }

    #[test]
    fn nonconvergence_reported() {
        let p = SystemParams::new(1.0, 0.1, 0.0, 0.0).unwrap();
        let model = InstrumentModel::default().with_wandering(0.5);
        let r: Result<f64> = average_spectral_wandering(&p, &model, |q| Ok(q.detuning.abs().sqrt()));
        assert!(matches!(r, Err(Error::Accuracy { .. })), "{r:?}");
    }
}
