use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// Everything between the ideal emitter and the recorded histograms.
///
/// Delay-like quantities (`irf_fwhm`, `bin_width`, `histogram_span`) share the
/// time unit of the emitter rates, which is `time_unit_s` seconds (1 ns by
/// default). Laboratory times (`histogram_period`, drift) are in seconds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct InstrumentModel {
    /// Full width at half maximum of the Gaussian detector response.
    pub irf_fwhm: f64,
    /// Standard deviation of fast interferometer phase noise (rad).
    pub phase_jitter_sigma: f64,
    /// Standard deviation of quasi-static spectral wandering of Δ (rate units).
    pub wandering_sigma: f64,
    /// Linear phase drift (rad/s).
    pub drift_rate: f64,
    /// Diffusion constant of the phase random walk (rad²/s).
    pub drift_diffusion: f64,
    /// Singles rate per detector from fluorescence alone (counts/s).
    pub detector_rate: f64,
    /// Histogram save interval (s).
    pub histogram_period: f64,
    /// Width of a delay bin.
    pub bin_width: f64,
    /// Largest recorded delay.
    pub histogram_span: f64,
    /// Seconds per delay unit.
    pub time_unit_s: f64,
    /// Sub-steps per save interval for the phase path.
    pub phase_substeps: usize,
    pub fringe_scan: FringeScan,
    pub nuisance: NuisanceModel,
}

impl Default for InstrumentModel {
    fn default() -> Self {
        Self {
            irf_fwhm: 0.0,
            phase_jitter_sigma: 0.0,
            wandering_sigma: 0.0,
            drift_rate: PI / 1800.0,
            drift_diffusion: 2e-5,
            detector_rate: 1.6e5,
            histogram_period: 60.0,
            bin_width: 0.025,
            histogram_span: 12.0,
            time_unit_s: 1e-9,
            phase_substeps: 20,
            fringe_scan: FringeScan::default(),
            nuisance: NuisanceModel::default(),
        }
    }
}

impl InstrumentModel {
    /// No timing, phase or spectral imperfections.
    pub fn ideal() -> Self {
        Self::default()
    }

    pub fn with_irf_fwhm(mut self, fwhm: f64) -> Self {
        self.irf_fwhm = fwhm;
        self
    }

    pub fn with_phase_jitter(mut self, sigma: f64) -> Self {
        self.phase_jitter_sigma = sigma;
        self
    }

    pub fn with_wandering(mut self, sigma: f64) -> Self {
        self.wandering_sigma = sigma;
        self
    }

    /// Frozen phase: no drift and no random walk.
    pub fn frozen_phase(mut self) -> Self {
        self.drift_rate = 0.0;
        self.drift_diffusion = 0.0;
        self
    }

    /// Gaussian standard deviation of the detector response.
    pub fn irf_sigma(&self) -> f64 {
        self.irf_fwhm / (8.0 * std::f64::consts::LN_2).sqrt()
    }

    pub fn validate(&self) -> Result<()> {
        let non_negative = [
            ("irf_fwhm", self.irf_fwhm),
            ("phase_jitter_sigma", self.phase_jitter_sigma),
            ("wandering_sigma", self.wandering_sigma),
            ("drift_rate", self.drift_rate),
            ("drift_diffusion", self.drift_diffusion),
            ("detector_rate", self.detector_rate),
        ];
        let positive = [
            ("histogram_period", self.histogram_period),
            ("bin_width", self.bin_width),
            ("histogram_span", self.histogram_span),
            ("time_unit_s", self.time_unit_s),
        ];
        let mut problems = Vec::new();
        for (name, v) in non_negative {
            if ensure_finite(name, v).is_err() || v < 0.0 {
                problems.push(format!("{name} must be finite and non-negative, got {v}"));
            }
        }
        for (name, v) in positive {
            if ensure_finite(name, v).is_err() || v <= 0.0 {
                problems.push(format!("{name} must be finite and positive, got {v}"));
            }
        }
        if self.phase_substeps == 0 {
            problems.push("phase_substeps must be at least 1".into());
        }
        if let Err(e) = self.nuisance.validate() {
            problems.push(e.to_string());
        }
        if let Err(e) = self.fringe_scan.validate() {
            problems.push(e.to_string());
        }
        if problems.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidInput(problems.join("; ")))
        }
    }
}

/// Reference fringe measurement used to calibrate phase binning.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FringeScan {
    pub points: usize,
    /// Integration time per phase point (s).
    pub dwell_s: f64,
}

impl Default for FringeScan {
    fn default() -> Self {
        Self {
            points: 64,
            dwell_s: 2.0,
        }
    }
}

impl FringeScan {
    fn validate(&self) -> Result<()> {
        if self.points < 3 || !(self.dwell_s > 0.0) {
            return Err(Error::InvalidInput(format!(
                "fringe scan needs at least 3 points and positive dwell, got {self:?}"
            )));
        }
        Ok(())
    }
}

/// Exogenous monitoring channels and injected disturbances.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NuisanceModel {
    /// Phonon-sideband monitor rate for the emitter on resonance (counts/s).
    pub psb_rate: f64,
    /// Mean laser-leakage fraction in the fluorescence arm.
    pub leakage_baseline: f64,
    /// Standard deviation of the leakage fraction between intervals.
    pub leakage_noise: f64,
    /// Probability that an interval carries a leakage spike.
    pub leakage_spike_probability: f64,
    /// Leakage fraction during a spike.
    pub leakage_spike_level: f64,
    /// Intervals forced to carry a leakage spike.
    pub leakage_spikes: Vec<usize>,
    /// Probability that the emitter sits detuned for a whole interval.
    pub excursion_probability: f64,
    /// Detuning offset during an excursion (rate units).
    pub excursion_detuning: f64,
    /// Intervals forced into an excursion.
    pub excursion_intervals: Vec<usize>,
}

impl Default for NuisanceModel {
    fn default() -> Self {
        Self {
            psb_rate: 2.0e4,
            leakage_baseline: 0.005,
            leakage_noise: 0.0005,
            leakage_spike_probability: 0.0,
            leakage_spike_level: 0.05,
            leakage_spikes: Vec::new(),
            excursion_probability: 0.0,
            excursion_detuning: 0.0,
            excursion_intervals: Vec::new(),
        }
    }
}

impl NuisanceModel {
    fn validate(&self) -> Result<()> {
        let probabilities = [self.leakage_spike_probability, self.excursion_probability];
        if probabilities.iter().any(|p| !(0.0..=1.0).contains(p)) {
            return Err(Error::InvalidInput("nuisance probabilities must lie in [0, 1]".into()));
        }
        for (name, v) in [
            ("psb_rate", self.psb_rate),
            ("leakage_baseline", self.leakage_baseline),
            ("leakage_noise", self.leakage_noise),
            ("leakage_spike_level", self.leakage_spike_level),
        ] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::InvalidInput(format!(
                    "{name} must be finite and non-negative, got {v}"
                )));
            }
        }
        ensure_finite("excursion_detuning", self.excursion_detuning)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate() {
        InstrumentModel::default().validate().unwrap();
    }

    #[test]
    fn every_violation_is_listed() {
        let model = InstrumentModel {
            irf_fwhm: -1.0,
            bin_width: 0.0,
            ..InstrumentModel::default()
        };
        let Err(Error::InvalidInput(msg)) = model.validate() else {
            panic!("expected invalid input");
        };
        assert!(msg.contains("irf_fwhm") && msg.contains("bin_width"));
    }

    #[test]
    fn fwhm_to_sigma() {
        let m = InstrumentModel::default().with_irf_fwhm(2.3548200450309493);
        assert!((m.irf_sigma() - 1.0).abs() < 1e-12);
    }
}
