//! Shot-noise emulator of a long measurement with free-running phase.
//!
//! Each save interval yields one coincidence histogram drawn as independent
//! Poisson counts per delay bin around the expected rate, two singles counts
//! used later as phase meters, and the nuisance monitor channels.

use std::f64::consts::TAU;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Poisson, StandardNormal};
use serde::{Deserialize, Serialize};

use super::binning::PhaseBinning;
use super::irf::{convolve_with_kernel, GaussianResponse};
use super::wandering::average_spectral_wandering;
use super::InstrumentModel;
use crate::correlators::{CorrelationKind, CorrelationTrace, QuadratureFrame, RegressionEngine};
use crate::dynamics::SystemParams;
use crate::error::{Error, Result};
use crate::homodyne::{g2_total_in_frame, LOConfig};

/// Phases at which `G²` is sampled to recover its harmonics `m = 0, ±1, ±2`.
const HARMONIC_SAMPLES: usize = 5;

/// Expected signal of one emitter configuration, on the histogram bin centers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchModel {
    /// Detuning of this configuration.
    pub detuning: f64,
    /// `G²(τ; φ) = Re H₀ + 2 Re(H₁ e^{iφ}) + 2 Re(H₂ e^{2iφ})`, wandering-averaged
    /// and convolved with the timing response.
    pub g2_harmonics: [Vec<C64>; 3],
    /// Same decomposition for the single-detector intensity `⟨E⁻E⁺⟩`.
    pub intensity_harmonics: [C64; 3],
    /// Fluorescence-only `G²`, wandering-averaged and convolved.
    pub g2_rf: Vec<f64>,
    pub population: f64,
}

impl BranchModel {
    /// `G²(τ)` for phase factors `c₁ = ⟨e^{iφ}⟩`, `c₂ = ⟨e^{2iφ}⟩`.
    pub fn g2(&self, coefficients: [C64; 2]) -> Vec<f64> {
        let [h0, h1, h2] = &self.g2_harmonics;
        h0.iter()
            .zip(h1)
            .zip(h2)
            .map(|((a, b), c)| a.re + 2.0 * (b * coefficients[0]).re + 2.0 * (c * coefficients[1]).re)
            .collect()
    }

    pub fn intensity(&self, coefficients: [C64; 2]) -> f64 {
        let [i0, i1, i2] = self.intensity_harmonics;
        i0.re + 2.0 * (i1 * coefficients[0]).re + 2.0 * (i2 * coefficients[1]).re
    }
}

/// Everything about a campaign that does not depend on the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignModel {
    pub params: SystemParams,
    pub lo: LOConfig,
    pub model: InstrumentModel,
    /// Bin centers `k · bin_width`.
    pub tau_centers: Vec<f64>,
    /// Lab-frame angle of the nominal dipole; φ is measured from it.
    pub frame_angle: f64,
    /// Detector counts per second per unit `⟨E⁻E⁺⟩`.
    pub flux_scale: f64,
    pub nominal: BranchModel,
    pub excursion: Option<BranchModel>,
}

impl CampaignModel {
    pub fn build(params: &SystemParams, lo: &LOConfig, model: &InstrumentModel) -> Result<Self> {
        params.validate()?;
        lo.validate()?;
        model.validate()?;
        if model.detector_rate <= 0.0 {
            return Err(Error::InvalidInput("detector_rate must be positive for a campaign".into()));
        }
        let bins = (model.histogram_span / model.bin_width).round() as usize;
        if bins < 2 {
            return Err(Error::InvalidInput(
                "histogram_span must cover at least two delay bins".into(),
            ));
        }
        let engine = RegressionEngine::new(params)?;
        let population = engine.steady_state().rho_ee;
        if population <= 0.0 {
            return Err(Error::InvalidInput("campaign needs a driven emitter (s > 0)".into()));
        }
        let frame_angle = engine.frame_angle(QuadratureFrame::Dipole);
        let margin = ((8.0 * model.irf_sigma() / model.bin_width).ceil() as usize).max(2);
        let grid: Vec<f64> = (0..=bins + margin).map(|k| k as f64 * model.bin_width).collect();
        let nominal = branch(params, lo, model, frame_angle, &grid, bins + 1)?;
        let nuisance = &model.nuisance;
        let excursion = if nuisance.excursion_probability > 0.0 || !nuisance.excursion_intervals.is_empty() {
            let shifted = params.with_detuning(params.detuning + nuisance.excursion_detuning);
            Some(branch(&shifted, lo, model, frame_angle, &grid, bins + 1)?)
        } else {
            None
        };
        Ok(Self {
            params: *params,
            lo: *lo,
            model: model.clone(),
            tau_centers: grid[..=bins].to_vec(),
            frame_angle,
            flux_scale: model.detector_rate / nominal.population,
            nominal,
            excursion,
        })
    }

    pub fn branch(&self, excursion: bool) -> &BranchModel {
        if excursion {
            self.excursion.as_ref().unwrap_or(&self.nominal)
        } else {
            &self.nominal
        }
    }

    /// Expected coincidences per bin over one save interval, per unit `G²`.
    pub fn coincidence_scale(&self) -> f64 {
        let bin_s = self.model.bin_width * self.model.time_unit_s;
        self.flux_scale * self.flux_scale * bin_s * self.model.histogram_period
    }

    /// Jitter-damped phase factors of a frozen phase.
    pub fn frozen_coefficients(&self, phi: f64) -> [C64; 2] {
        let sigma2 = self.model.phase_jitter_sigma.powi(2);
        [
            C64::from_polar((-0.5 * sigma2).exp(), phi),
            C64::from_polar((-2.0 * sigma2).exp(), 2.0 * phi),
        ]
    }

    /// Expected coincidences per bin for a frozen phase.
    pub fn expected_counts(&self, phi: f64) -> Vec<f64> {
        let scale = self.coincidence_scale();
        self.nominal
            .g2(self.frozen_coefficients(phi))
            .into_iter()
            .map(|g| g * scale)
            .collect()
    }

    pub fn simulate(&self, duration_s: f64, seed: u64) -> Result<CampaignResult> {
        let model = &self.model;
        if !(duration_s > 0.0) || !duration_s.is_finite() {
            return Err(Error::InvalidInput(format!(
                "campaign duration must be positive, got {duration_s}"
            )));
        }
        let n_intervals = (duration_s / model.histogram_period + 1e-9).floor() as usize;
        if n_intervals == 0 {
            return Err(Error::InvalidInput(format!(
                "campaign duration {duration_s} s is shorter than one histogram period ({} s)",
                model.histogram_period
            )));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let fringe_reference = self.fringe_scan(&mut rng)?;

        let period = model.histogram_period;
        let substeps = model.phase_substeps;
        let dt = period / substeps as f64;
        let step_sd = (model.drift_diffusion * dt).sqrt();
        let sigma2 = model.phase_jitter_sigma.powi(2);
        let nuisance = &model.nuisance;
        let coincidence_scale = self.coincidence_scale();
        let mut phase = self.lo.phase;
        let mut intervals = Vec::with_capacity(n_intervals);
        for index in 0..n_intervals {
            let excursion_draw: f64 = rng.random();
            let spike_draw: f64 = rng.random();
            let leakage_noise: f64 = rng.sample(StandardNormal);
            let excursion = self.excursion.is_some()
                && (nuisance.excursion_intervals.contains(&index)
                    || excursion_draw < nuisance.excursion_probability);
            let leakage_spike = nuisance.leakage_spikes.contains(&index)
                || spike_draw < nuisance.leakage_spike_probability;
            let leakage = if leakage_spike {
                nuisance.leakage_spike_level
            } else {
                (nuisance.leakage_baseline + nuisance.leakage_noise * leakage_noise).max(0.0)
            };

            let mut sums = [C64::new(0.0, 0.0); 2];
            for _ in 0..substeps {
                let mid = phase + 0.5 * model.drift_rate * dt;
                sums[0] += C64::from_polar(1.0, mid);
                sums[1] += C64::from_polar(1.0, 2.0 * mid);
                let kick: f64 = rng.sample(StandardNormal);
                phase += model.drift_rate * dt + step_sd * kick;
            }
            let mean1 = sums[0] / substeps as f64;
            let coefficients = [
                mean1 * (-0.5 * sigma2).exp(),
                sums[1] / substeps as f64 * (-2.0 * sigma2).exp(),
            ];

            let branch = self.branch(excursion);
            let singles_mean = self.flux_scale * branch.intensity(coefficients) * period;
            let singles = [poisson(&mut rng, singles_mean)?, poisson(&mut rng, singles_mean)?];
            let psb_mean = nuisance.psb_rate * branch.population / self.nominal.population * period;
            let psb_rate = poisson(&mut rng, psb_mean)? as f64 / period;
            let counts = branch
                .g2(coefficients)
                .into_iter()
                .map(|g| poisson(&mut rng, g * coincidence_scale))
                .collect::<Result<Vec<u64>>>()?;
            intervals.push(IntervalRecord {
                index,
                start_s: index as f64 * period,
                true_phase: wrap_phase(mean1.arg()),
                phase_coefficients: coefficients,
                singles,
                psb_rate,
                leakage,
                leakage_spike,
                excursion,
                counts,
            });
        }
        let postselection_log = intervals.iter().map(|r| Acceptance::accepted(r.index)).collect();
        Ok(CampaignResult {
            params: self.params,
            lo: self.lo,
            model: self.model.clone(),
            duration_s,
            seed,
            tau_centers: self.tau_centers.clone(),
            intervals,
            fringe_reference,
            postselection_log,
            binned: None,
        })
    }

    fn fringe_scan(&self, rng: &mut ChaCha8Rng) -> Result<FringeReference> {
        let scan = &self.model.fringe_scan;
        let damping = (-0.5 * self.model.phase_jitter_sigma.powi(2)).exp();
        let mut phases = Vec::with_capacity(scan.points);
        let mut rates = Vec::with_capacity(scan.points);
        for k in 0..scan.points {
            let phi = TAU * k as f64 / scan.points as f64;
            let c = [
                C64::from_polar(damping, phi),
                C64::from_polar(damping.powi(4), 2.0 * phi),
            ];
            let mean = self.flux_scale * self.nominal.intensity(c) * scan.dwell_s;
            let total = poisson(rng, mean)? + poisson(rng, mean)?;
            phases.push(phi);
            rates.push(total as f64 / (2.0 * scan.dwell_s));
        }
        FringeReference::fit(phases, rates, scan.dwell_s)
    }
}

fn branch(
    params: &SystemParams,
    lo: &LOConfig,
    model: &InstrumentModel,
    frame_angle: f64,
    grid: &[f64],
    keep: usize,
) -> Result<BranchModel> {
    let frame = QuadratureFrame::Fixed(frame_angle);
    let n = grid.len();
    let phases: Vec<f64> = (0..HARMONIC_SAMPLES)
        .map(|j| TAU * j as f64 / HARMONIC_SAMPLES as f64)
        .collect();
    // Layout: 5 G² traces, the fluorescence-only G², 5 intensities, ρ_ee.
    let packed: Vec<C64> = average_spectral_wandering(params, model, |p| {
        let mut out = Vec::with_capacity((HARMONIC_SAMPLES + 1) * n + HARMONIC_SAMPLES + 1);
        for &phi in &phases {
            out.extend(g2_total_in_frame(p, &lo.with_phase(phi), frame, grid)?.values);
        }
        out.extend(g2_total_in_frame(p, &LOConfig::blocked(), frame, grid)?.values);
        let engine = RegressionEngine::new(p)?;
        let rho = engine.steady_state();
        let mean_b = rho.lowering_expectation() * C64::from_polar(1.0, -frame_angle);
        for &phi in &phases {
            let x = (C64::from_polar(1.0, phi) * mean_b).re;
            out.push(C64::new(rho.rho_ee + lo.beta2() + 2.0 * lo.amplitude * x, 0.0));
        }
        out.push(C64::new(rho.rho_ee, 0.0));
        Ok(out)
    })?;
    let kernel = GaussianResponse { fwhm: model.irf_fwhm };
    let harmonic = |m: usize, samples: &dyn Fn(usize) -> C64| -> C64 {
        phases
            .iter()
            .enumerate()
            .map(|(j, &phi)| samples(j) * C64::from_polar(1.0, -(m as f64) * phi))
            .sum::<C64>()
            / HARMONIC_SAMPLES as f64
    };
    let convolve = |values: Vec<C64>| -> Result<Vec<C64>> {
        let trace = CorrelationTrace::new(grid.to_vec(), values, CorrelationKind::G2Total);
        let mut out = convolve_with_kernel(&trace, &kernel)?.values;
        out.truncate(keep);
        Ok(out)
    };
    let g2_harmonics = [0, 1, 2]
        .map(|m| (0..n).map(|k| harmonic(m, &|j| packed[j * n + k])).collect::<Vec<C64>>())
        .map(convolve);
    let [h0, h1, h2] = g2_harmonics;
    let g2_rf = convolve(packed[HARMONIC_SAMPLES * n..(HARMONIC_SAMPLES + 1) * n].to_vec())?
        .into_iter()
        .map(|v| v.re)
        .collect();
    let offset = (HARMONIC_SAMPLES + 1) * n;
    let intensity_harmonics = [0, 1, 2].map(|m| harmonic(m, &|j| packed[offset + j]));
    Ok(BranchModel {
        detuning: params.detuning,
        g2_harmonics: [h0?, h1?, h2?],
        intensity_harmonics,
        g2_rf,
        population: packed[offset + HARMONIC_SAMPLES].re,
    })
}

fn poisson(rng: &mut ChaCha8Rng, mean: f64) -> Result<u64> {
    if mean <= 0.0 {
        return Ok(0);
    }
    let dist = Poisson::new(mean)
        .map_err(|e| Error::InvalidInput(format!("Poisson mean {mean}: {e}")))?;
    Ok(dist.sample(rng) as u64)
}

/// Wraps into `(-π, π]`.
pub fn wrap_phase(phi: f64) -> f64 {
    let w = phi.rem_euclid(TAU);
    if w > std::f64::consts::PI {
        w - TAU
    } else {
        w
    }
}

/// Runs one seeded campaign.
pub fn simulate_campaign(
    params: &SystemParams,
    lo: &LOConfig,
    model: &InstrumentModel,
    duration_s: f64,
    seed: u64,
) -> Result<CampaignResult> {
    CampaignModel::build(params, lo, model)?.simulate(duration_s, seed)
}

/// One saved histogram and its monitor channels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalRecord {
    pub index: usize,
    pub start_s: f64,
    /// Circular mean of the phase path over the interval, in `(-π, π]`.
    pub true_phase: f64,
    /// Jitter-damped `⟨e^{iφ}⟩` and `⟨e^{2iφ}⟩` over the interval.
    pub phase_coefficients: [C64; 2],
    /// Singles counts of the two detectors.
    pub singles: [u64; 2],
    /// Phonon-sideband monitor rate (counts/s).
    pub psb_rate: f64,
    /// Laser-leakage fraction.
    pub leakage: f64,
    pub leakage_spike: bool,
    pub excursion: bool,
    /// Coincidences per delay bin.
    pub counts: Vec<u64>,
}

impl IntervalRecord {
    /// Mean singles rate per detector (counts/s).
    pub fn intensity(&self, period_s: f64) -> f64 {
        (self.singles[0] + self.singles[1]) as f64 / (2.0 * period_s)
    }

    pub fn total_counts(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Fit `r(φ) = a + b cos φ + c sin φ` to a scanned-phase fringe.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FringeReference {
    pub phases: Vec<f64>,
    /// Mean singles rate per detector (counts/s).
    pub rates: Vec<f64>,
    pub offset: f64,
    pub amplitude: f64,
    /// Phase of the fringe maximum.
    pub phase_offset: f64,
    /// Statistical standard error of `amplitude`.
    pub amplitude_error: f64,
}

impl FringeReference {
    /// Least-squares fit on a uniform full-period scan.
    pub fn fit(phases: Vec<f64>, rates: Vec<f64>, dwell_s: f64) -> Result<Self> {
        let n = phases.len();
        if n < 3 || rates.len() != n {
            return Err(Error::InvalidInput("fringe fit needs at least 3 matched points".into()));
        }
        let a = rates.iter().sum::<f64>() / n as f64;
        let b = 2.0 / n as f64 * phases.iter().zip(&rates).map(|(p, r)| r * p.cos()).sum::<f64>();
        let c = 2.0 / n as f64 * phases.iter().zip(&rates).map(|(p, r)| r * p.sin()).sum::<f64>();
        // Two detectors, each Poisson: var(rate) = a / (2 dwell).
        let amplitude_error = (2.0 / n as f64 * a.max(0.0) / (2.0 * dwell_s)).sqrt();
        Ok(Self {
            phases,
            rates,
            offset: a,
            amplitude: b.hypot(c),
            phase_offset: c.atan2(b),
            amplitude_error,
        })
    }

    /// Noise-free reference with given extremes.
    pub fn from_extremes(i_min: f64, i_max: f64) -> Self {
        Self {
            phases: Vec::new(),
            rates: Vec::new(),
            offset: 0.5 * (i_max + i_min),
            amplitude: 0.5 * (i_max - i_min),
            phase_offset: 0.0,
            amplitude_error: 0.0,
        }
    }

    pub fn i_min(&self) -> f64 {
        self.offset - self.amplitude
    }

    pub fn i_max(&self) -> f64 {
        self.offset + self.amplitude
    }

    pub fn visibility(&self) -> f64 {
        if self.offset > 0.0 {
            self.amplitude / self.offset
        } else {
            0.0
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Acceptance {
    pub interval: usize,
    pub accepted: bool,
    pub reasons: Vec<String>,
}

impl Acceptance {
    pub fn accepted(interval: usize) -> Self {
        Self {
            interval,
            accepted: true,
            reasons: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CampaignResult {
    pub params: SystemParams,
    pub lo: LOConfig,
    pub model: InstrumentModel,
    pub duration_s: f64,
    pub seed: u64,
    /// Histogram bin centers in delay units.
    pub tau_centers: Vec<f64>,
    pub intervals: Vec<IntervalRecord>,
    pub fringe_reference: FringeReference,
    pub postselection_log: Vec<Acceptance>,
    pub binned: Option<PhaseBinning>,
}

impl CampaignResult {
    pub fn total_coincidences(&self) -> u64 {
        self.intervals.iter().map(IntervalRecord::total_counts).sum()
    }

    pub fn is_accepted(&self, interval: usize) -> bool {
        self.postselection_log
            .get(interval)
            .map(|a| a.accepted)
            .unwrap_or(false)
    }

    pub fn accepted_count(&self) -> usize {
        self.postselection_log.iter().filter(|a| a.accepted).count()
    }

    /// Bins the accepted intervals into `n_bins` phase bins.
    pub fn with_binning(mut self, n_bins: usize) -> Result<Self> {
        self.binned = Some(super::binning::phase_bin(&self, n_bins)?);
        Ok(self)
    }

    /// Writes the directory layout:
    ///
    /// ```text
    /// manifest.json               parameters, seed, per-interval records
    /// fringe_reference.csv        phase_rad,rate_cps
    /// histograms/interval_NNNNN.csv   tau_s,counts
    /// binned/summary.csv          one row per phase bin
    /// binned/bin_NN.csv           tau_s,counts
    /// ```
    pub fn write_dir(&self, dir: &Path, provenance: Option<serde_json::Value>) -> Result<Vec<PathBuf>> {
        let mut written = Vec::new();
        fs::create_dir_all(dir.join("histograms"))?;
        let tau_s: Vec<f64> = self.tau_centers.iter().map(|t| t * self.model.time_unit_s).collect();
        let period = self.model.histogram_period;

        let intervals: Vec<serde_json::Value> = self
            .intervals
            .iter()
            .map(|r| {
                let log = &self.postselection_log[r.index];
                let bin = self
                    .binned
                    .as_ref()
                    .and_then(|b| b.assignments.get(r.index).copied().flatten());
                serde_json::json!({
                    "index": r.index,
                    "start_s": r.start_s,
                    "true_phase_rad": r.true_phase,
                    "singles_counts": r.singles,
                    "intensity_cps": r.intensity(period),
                    "psb_rate_cps": r.psb_rate,
                    "leakage_fraction": r.leakage,
                    "leakage_spike": r.leakage_spike,
                    "excursion": r.excursion,
                    "coincidences": r.total_counts(),
                    "accepted": log.accepted,
                    "reasons": log.reasons,
                    "phase_bin": bin,
                })
            })
            .collect();
        let mut manifest = serde_json::json!({
            "params": self.params,
            "lo": self.lo,
            "instrument": self.model,
            "duration_s": self.duration_s,
            "seed": self.seed,
            "bin_width_s": self.model.bin_width * self.model.time_unit_s,
            "fringe": {
                "offset_cps": self.fringe_reference.offset,
                "amplitude_cps": self.fringe_reference.amplitude,
                "phase_offset_rad": self.fringe_reference.phase_offset,
                "visibility": self.fringe_reference.visibility(),
            },
            "intervals": intervals,
        });
        if let Some(p) = provenance {
            manifest["provenance"] = p;
        }
        let path = dir.join("manifest.json");
        fs::write(&path, serde_json::to_string_pretty(&manifest)? + "\n")?;
        written.push(path);

        let path = dir.join("fringe_reference.csv");
        let mut f = fs::File::create(&path)?;
        writeln!(f, "phase_rad,rate_cps")?;
        for (p, r) in self.fringe_reference.phases.iter().zip(&self.fringe_reference.rates) {
            writeln!(f, "{p:.12},{r:.6}")?;
        }
        written.push(path);

        for r in &self.intervals {
            let path = dir.join("histograms").join(format!("interval_{:05}.csv", r.index));
            written.push(write_histogram(&path, &tau_s, &r.counts)?);
        }

        if let Some(binning) = &self.binned {
            fs::create_dir_all(dir.join("binned"))?;
            let path = dir.join("binned").join("summary.csv");
            let mut f = fs::File::create(&path)?;
            writeln!(
                f,
                "bin,phi_low_rad,phi_high_rad,intensity_low_cps,intensity_high_cps,intervals,coincidences"
            )?;
            for b in &binning.bins {
                writeln!(
                    f,
                    "{},{:.12},{:.12},{:.6},{:.6},{},{}",
                    b.index,
                    b.phi_low,
                    b.phi_high,
                    b.intensity_low,
                    b.intensity_high,
                    b.intervals.len(),
                    b.total_counts
                )?;
            }
            written.push(path);
            for b in &binning.bins {
                let path = dir.join("binned").join(format!("bin_{:02}.csv", b.index));
                written.push(write_histogram(&path, &tau_s, &b.counts)?);
            }
        }
        Ok(written)
    }
}

fn write_histogram(path: &Path, tau_s: &[f64], counts: &[u64]) -> Result<PathBuf> {
    let mut out = String::with_capacity(24 * counts.len() + 16);
    out.push_str("tau_s,counts\n");
    for (t, c) in tau_s.iter().zip(counts) {
        out.push_str(&format!("{t:.6e},{c}\n"));
    }
    fs::write(path, out)?;
    Ok(path.to_path_buf())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn setup() -> (SystemParams, LOConfig) {
        let p = SystemParams::from_lifetime_ns(0.58, 0.1).unwrap();
        let lo = LOConfig::matched(&p, 0.0).unwrap();
        (p, lo)
    }

    #[test]
    fn harmonics_reproduce_direct_g2() {
        let (p, lo) = setup();
        let model = InstrumentModel::ideal();
        let cm = CampaignModel::build(&p, &lo, &model).unwrap();
        for phi in [0.0, 0.7, 2.0] {
            let direct = g2_total_in_frame(&p, &lo.with_phase(phi), QuadratureFrame::Fixed(cm.frame_angle), &cm.tau_centers).unwrap();
            let via = cm.nominal.g2(cm.frozen_coefficients(phi));
            for (a, b) in direct.values.iter().zip(&via) {
                assert!((a.re - b).abs() < 1e-12 * a.re.abs().max(1e-3));
            }
        }
    }

    #[test]
    fn zero_detector_rate_rejected() {
        let (p, lo) = setup();
        let model = InstrumentModel { detector_rate: 0.0, ..InstrumentModel::ideal() };
        assert!(matches!(simulate_campaign(&p, &lo, &model, 600.0, 1), Err(Error::InvalidInput(_))));
    }

    #[test]
    fn zero_duration_rejected() {
        let (p, lo) = setup();
        assert!(simulate_campaign(&p, &lo, &InstrumentModel::ideal(), 0.0, 1).is_err());
    }

    #[test]
    fn phase_wrapping() {
        assert!((wrap_phase(3.0 * std::f64::consts::PI) - std::f64::consts::PI).abs() < 1e-12);
        assert!((wrap_phase(-0.5) + 0.5).abs() < 1e-15);
    }
}
