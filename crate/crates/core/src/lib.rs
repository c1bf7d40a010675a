//! Quadrature-squeezed resonance fluorescence from a driven two-level emitter.
//!
//! The crate is organized bottom-up:
//!
//! - [`dynamics`]: Lindblad generator, steady state and propagation.
//! - [`correlators`]: two-time correlators via the quantum regression theorem.
//! - [`quadrature`]: normally ordered quadrature variances and dipole phase.
//! - [`phase_space`]: single-mode field state and its Wigner function.
//! - [`homodyne`]: superimposed-field fringe and intensity correlations.
//! - [`instrument`]: timing response, spectral wandering, phase noise and a
//!   shot-noise campaign emulator with phase binning and postselection.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

/// Version of this crate, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub mod correlators;
pub mod dynamics;
pub mod error;
pub mod homodyne;
pub mod instrument;
pub mod phase_space;
pub mod quadrature;

pub use correlators::{
    g1, g2_rf, quadrature_fluctuation_autocorrelation, two_time_correlator, AtomicOperator,
    CorrelationKind, CorrelationTrace, QuadratureFrame,
};
pub use dynamics::{
    build_liouvillian, propagate, rabi_from_saturation, steady_state, DensityMatrix2, Liouvillian,
    SystemParams,
};
pub use error::{Error, Result};
pub use homodyne::{decompose_by_lo_order, g2_total, sl_intensity, HomodyneDecomposition, LOConfig};
pub use phase_space::{field_state_from_atom, half_max_contour, wigner, FieldModeState, GridSpec, WignerGrid};
pub use quadrature::{
    dipole_phase, heisenberg_product, normally_ordered_variance, variance_phase_scan,
    variance_power_scan, FieldSource, QuadratureScan, QuadratureValue,
};
