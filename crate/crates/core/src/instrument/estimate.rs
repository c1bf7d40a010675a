//! Quadrature-variance estimates from phase-binned histograms.
//!
//! For a histogram in field units, `x(τ) = counts / (coincidence scale)`, the
//! LO-quadratic part of `x(0) − x(∞)` is `4β² ⟨:(ΔX(φ))²:⟩`. The estimator
//! removes the fluorescence-only part with the model `G²_RF` and cancels the
//! odd LO orders by averaging bin `k` with its mirror bin `n − 1 − k`
//! (φ → π − φ flips the sign of `cos φ` and keeps `cos 2φ`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::binning::{phase_bin, DEFAULT_PHASE_BINS};
use super::campaign::{CampaignModel, CampaignResult};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EstimatorOptions {
    pub bootstrap_samples: usize,
    pub bootstrap_seed: u64,
    /// Delays beyond this many lifetimes form the long-delay level.
    pub tail_start: f64,
}

impl Default for EstimatorOptions {
    fn default() -> Self {
        Self {
            bootstrap_samples: 400,
            bootstrap_seed: 0x5eed,
            tail_start: 10.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BinEstimate {
    pub bin: usize,
    pub partner: usize,
    pub phi_low: f64,
    pub phi_high: f64,
    pub intervals: usize,
    pub partner_intervals: usize,
    /// Estimated `⟨:(ΔX(φ))²:⟩`.
    pub estimate: f64,
    /// Bootstrap standard error over intervals; NaN with fewer than two.
    pub standard_error: f64,
    /// The same estimator applied to the noise-free expected histograms.
    pub expected: f64,
}

/// One estimate per occupied phase bin. Bins the campaign with the default
/// bin count if it has not been binned yet.
pub fn estimate_quadrature_variance(
    result: &CampaignResult,
    model: &CampaignModel,
    options: &EstimatorOptions,
) -> Result<Vec<BinEstimate>> {
    let binning = match &result.binned {
        Some(b) => b.clone(),
        None => phase_bin(result, DEFAULT_PHASE_BINS)?,
    };
    let beta2 = model.lo.beta2();
    if beta2 <= 0.0 {
        return Err(Error::InvalidInput("quadrature estimates need a local oscillator".into()));
    }
    let tail_from = options.tail_start / model.params.gamma;
    let tail: Vec<usize> = (0..model.tau_centers.len())
        .filter(|&k| model.tau_centers[k] >= tail_from)
        .collect();
    if tail.is_empty() {
        return Err(Error::InvalidInput(format!(
            "histogram span must reach beyond {tail_from} to define the long-delay level"
        )));
    }
    let contrast = |x: &dyn Fn(usize) -> f64| -> f64 {
        x(0) - tail.iter().map(|&k| x(k)).sum::<f64>() / tail.len() as f64
    };
    let scale = model.coincidence_scale();
    let rf = &model.nominal.g2_rf;
    let rf_contrast = contrast(&|k| rf[k]);

    let observed: Vec<f64> = result
        .intervals
        .iter()
        .map(|r| contrast(&|k| r.counts[k] as f64) / scale)
        .collect();
    let expected: Vec<f64> = result
        .intervals
        .iter()
        .map(|r| {
            let g = model.branch(r.excursion).g2(r.phase_coefficients);
            contrast(&|k| g[k])
        })
        .collect();

    let n = binning.n_bins();
    let mut rng = ChaCha8Rng::seed_from_u64(options.bootstrap_seed ^ result.seed);
    let mut out = Vec::new();
    for bin in &binning.bins {
        if bin.intervals.is_empty() {
            continue;
        }
        let partner = n - 1 - bin.index;
        let members = &bin.intervals;
        let mirror = &binning.bins[partner].intervals;
        let paired = |values: &[f64], a: &[usize], b: &[usize]| -> f64 {
            let mean = |set: &[usize]| set.iter().map(|&i| values[i]).sum::<f64>() / set.len() as f64;
            let combined = if b.is_empty() || partner == bin.index {
                mean(a)
            } else {
                0.5 * (mean(a) + mean(b))
            };
            (combined - rf_contrast) / (4.0 * beta2)
        };
        let estimate = paired(&observed, members, mirror);
        let expected_value = paired(&expected, members, mirror);
        let standard_error = if members.len() + mirror.len() < 2 || options.bootstrap_samples < 2 {
            f64::NAN
        } else {
            let mut draws = Vec::with_capacity(options.bootstrap_samples);
            let mut a = vec![0; members.len()];
            let mut b = vec![0; mirror.len()];
            for _ in 0..options.bootstrap_samples {
                a.iter_mut().for_each(|v| *v = members[rng.random_range(0..members.len())]);
                b.iter_mut().for_each(|v| *v = mirror[rng.random_range(0..mirror.len())]);
                draws.push(paired(&observed, &a, &b));
            }
            let m = draws.iter().sum::<f64>() / draws.len() as f64;
            (draws.iter().map(|d| (d - m).powi(2)).sum::<f64>() / (draws.len() - 1) as f64).sqrt()
        };
        out.push(BinEstimate {
            bin: bin.index,
            partner,
            phi_low: bin.phi_low,
            phi_high: bin.phi_high,
            intervals: members.len(),
            partner_intervals: if partner == bin.index { 0 } else { mirror.len() },
            estimate,
            standard_error,
            expected: expected_value,
        });
    }
    if out.is_empty() {
        return Err(Error::EmptyAcceptance(result.intervals.len()));
    }
    Ok(out)
}
