//! Detector response, spectral wandering, phase noise and a shot-noise
//! emulator of the phase-binned measurement campaign.

mod binning;
mod calibrate;
mod campaign;
mod degrade;
mod estimate;
mod irf;
mod jitter;
mod model;
mod postselect;
mod wandering;

pub use binning::{phase_bin, PhaseBin, PhaseBinner, PhaseBinning, DEFAULT_PHASE_BINS};
pub use calibrate::{calibrate_imperfections, Calibration, FreeParameter, SQUEEZING_FLOOR};
pub use campaign::{
    simulate_campaign, wrap_phase, Acceptance, BranchModel, CampaignModel, CampaignResult, FringeReference,
    IntervalRecord,
};
pub use degrade::{degraded_phase_scan, degraded_power_curve, degraded_variance, log_spaced, QuadratureResponse};
pub use estimate::{estimate_quadrature_variance, BinEstimate, EstimatorOptions};
pub use irf::{convolve_irf, convolve_with_kernel, convolved_at_zero, GaussianResponse, ResponseKernel};
pub use jitter::{apply_phase_jitter, full_period_grid};
pub use model::{FringeScan, InstrumentModel, NuisanceModel};
pub use postselect::{postselect, Thresholds};
pub use wandering::{average_spectral_wandering, gauss_hermite, Averageable};
