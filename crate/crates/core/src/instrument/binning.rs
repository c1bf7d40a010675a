//! Phase binning of saved histograms by their singles intensity.
//!
//! A histogram's phase is read off the fringe `I(φ) = I_min + (I_max − I_min) cos²(φ/2)`.
//! Bins are equal in φ over `[0, π]`, which makes them unequal in intensity,
//! with widths following the derivative of `cos²(φ/2)`. The intensity cannot
//! tell `φ` from `−φ`, so phases are folded into `[0, π]`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::campaign::{CampaignResult, FringeReference};
use crate::error::{Error, Result};

pub const DEFAULT_PHASE_BINS: usize = 16;

/// Minimum fringe amplitude, in units of its standard error, for binning.
const MIN_FRINGE_SIGNIFICANCE: f64 = 5.0;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseBinner {
    pub i_min: f64,
    pub i_max: f64,
    /// Intensity at `φ_k = kπ/n`, k = 0..=n; decreasing.
    pub edges: Vec<f64>,
}

impl PhaseBinner {
    pub fn new(reference: &FringeReference, n_bins: usize) -> Result<Self> {
        if n_bins == 0 {
            return Err(Error::InvalidInput("need at least one phase bin".into()));
        }
        let (i_min, i_max) = (reference.i_min(), reference.i_max());
        let span = i_max - i_min;
        if !(span > 0.0)
            || !span.is_finite()
            || reference.amplitude <= MIN_FRINGE_SIGNIFICANCE * reference.amplitude_error
        {
            return Err(Error::CannotBin(format!(
                "fringe reference has no usable visibility (amplitude {:.3e} ± {:.3e})",
                reference.amplitude, reference.amplitude_error
            )));
        }
        let edges = (0..=n_bins)
            .map(|k| {
                let phi = PI * k as f64 / n_bins as f64;
                i_min + span * (0.5 * phi).cos().powi(2)
            })
            .collect();
        Ok(Self { i_min, i_max, edges })
    }

    pub fn n_bins(&self) -> usize {
        self.edges.len() - 1
    }

    /// Folded phase in `[0, π]` from an intensity.
    pub fn estimate_phase(&self, intensity: f64) -> f64 {
        let c = (2.0 * (intensity - self.i_min) / (self.i_max - self.i_min) - 1.0).clamp(-1.0, 1.0);
        c.acos()
    }

    /// Bin index whose intensity interval contains `intensity`; out-of-range
    /// values go to the nearest end bin.
    pub fn assign(&self, intensity: f64) -> usize {
        // Edges decrease: bin k spans [edges[k+1], edges[k]).
        let n = self.n_bins();
        let above = self.edges[1..n].partition_point(|&e| e > intensity);
        above.min(n - 1)
    }

    /// `[φ_low, φ_high]` of bin `k`.
    pub fn phase_range(&self, k: usize) -> (f64, f64) {
        let n = self.n_bins() as f64;
        (PI * k as f64 / n, PI * (k + 1) as f64 / n)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseBin {
    pub index: usize,
    pub phi_low: f64,
    pub phi_high: f64,
    pub intensity_low: f64,
    pub intensity_high: f64,
    pub intervals: Vec<usize>,
    /// Summed coincidences per delay bin.
    pub counts: Vec<u64>,
    pub total_counts: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhaseBinning {
    pub binner: PhaseBinner,
    pub bins: Vec<PhaseBin>,
    /// Bin of every interval; `None` when postselection rejected it.
    pub assignments: Vec<Option<usize>>,
    /// Folded phase estimate of every interval.
    pub estimated_phases: Vec<f64>,
}

impl PhaseBinning {
    pub fn n_bins(&self) -> usize {
        self.bins.len()
    }

    pub fn total_counts(&self) -> u64 {
        self.bins.iter().map(|b| b.total_counts).sum()
    }
}

/// Aggregates accepted histograms per phase bin.
pub fn phase_bin(result: &CampaignResult, n_bins: usize) -> Result<PhaseBinning> {
    let binner = PhaseBinner::new(&result.fringe_reference, n_bins)?;
    let period = result.model.histogram_period;
    let width = result.tau_centers.len();
    let mut bins: Vec<PhaseBin> = (0..n_bins)
        .map(|k| {
            let (phi_low, phi_high) = binner.phase_range(k);
            PhaseBin {
                index: k,
                phi_low,
                phi_high,
                intensity_low: binner.edges[k + 1],
                intensity_high: binner.edges[k],
                intervals: Vec::new(),
                counts: vec![0; width],
                total_counts: 0,
            }
        })
        .collect();
    let mut assignments = Vec::with_capacity(result.intervals.len());
    let mut estimated_phases = Vec::with_capacity(result.intervals.len());
    for record in &result.intervals {
        let intensity = record.intensity(period);
        estimated_phases.push(binner.estimate_phase(intensity));
        if !result.is_accepted(record.index) {
            assignments.push(None);
            continue;
        }
        let k = binner.assign(intensity);
        let bin = &mut bins[k];
        bin.intervals.push(record.index);
        for (acc, c) in bin.counts.iter_mut().zip(&record.counts) {
            *acc += c;
        }
        bin.total_counts += record.total_counts();
        assignments.push(Some(k));
    }
    Ok(PhaseBinning {
        binner,
        bins,
        assignments,
        estimated_phases,
    })
}
