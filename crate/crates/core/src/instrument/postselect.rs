//! Acceptance filtering of saved histograms on the monitor channels.

use serde::{Deserialize, Serialize};

use super::binning::phase_bin;
use super::campaign::{Acceptance, CampaignResult};
use crate::error::{Error, Result};

/// Acceptance thresholds; `None` disables a check.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Thresholds {
    /// Reject intervals whose phonon-sideband rate falls below this (counts/s).
    pub min_psb_rate: Option<f64>,
    /// Reject intervals whose leakage fraction exceeds this.
    pub max_leakage: Option<f64>,
}

impl Thresholds {
    pub fn accept_all() -> Self {
        Self::default()
    }

    fn reasons(&self, psb_rate: f64, leakage: f64) -> Vec<String> {
        let mut reasons = Vec::new();
        if let Some(min) = self.min_psb_rate {
            if psb_rate < min {
                reasons.push(format!("psb_rate {psb_rate:.1} < {min:.1}"));
            }
        }
        if let Some(max) = self.max_leakage {
            if leakage > max {
                reasons.push(format!("leakage {leakage:.5} > {max:.5}"));
            }
        }
        reasons
    }
}

/// Flags intervals that fail a threshold and recomputes the phase binning
/// from the accepted intervals only.
pub fn postselect(result: &CampaignResult, thresholds: &Thresholds) -> Result<CampaignResult> {
    let log: Vec<Acceptance> = result
        .intervals
        .iter()
        .map(|r| {
            let reasons = thresholds.reasons(r.psb_rate, r.leakage);
            Acceptance {
                interval: r.index,
                accepted: reasons.is_empty(),
                reasons,
            }
        })
        .collect();
    if !log.iter().any(|a| a.accepted) {
        return Err(Error::EmptyAcceptance(log.len()));
    }
    let mut out = CampaignResult {
        postselection_log: log,
        binned: None,
        ..result.clone()
    };
    if let Some(previous) = &result.binned {
        out.binned = Some(phase_bin(&out, previous.n_bins())?);
    }
    Ok(out)
}
