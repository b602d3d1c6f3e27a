//! Entanglement between the filtered outputs of a three-mode optomechanical
//! system: one mechanical resonator coupled to two driven cavities.
//!
//! The pipeline runs from [`SystemParams`] through the scattering matrix and
//! band-integrated correlators to the logarithmic negativity:
//!
//! ```
//! use optoent_core::{band_correlators, log_negativity, FilterSpec, SystemParams};
//!
//! let p = SystemParams::symmetric(1.0, 1e5, 1e4).unwrap();
//! let filt = FilterSpec::new(156.5, 10.0).unwrap();
//! let c = band_correlators(&p, &filt).unwrap();
//! let (_, e) = log_negativity(&c).unwrap();
//! assert!(e.en > 5.0);
//! ```

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod approx;
pub mod correlators;
pub mod entanglement;
pub mod error;
pub mod model;
pub mod optimize;
pub mod quadrature;
pub mod scattering;

pub use approx::{Approximation, RegimeTag, RegimeWarning};
pub use correlators::{band_correlators, band_correlators_with, BandOptions, Correlators, FilterSpec};
pub use entanglement::{
    log_negativity, log_negativity_covariance, EntanglementResult, Method, TmstParams,
};
pub use error::{Error, Result};
pub use model::{stability, StabilityReport, SystemParams};
pub use optimize::{
    maximize_en_over_omega, maximize_en_over_tau, sweep, AxisSpec, OptimumReport, SearchOptions,
    SweepOptions, SweepResult, SweepRow, SweepVariable, TauMode,
};
pub use scattering::{scattering_matrix, spectral_point, ScatteringMatrix, SpectralPoint};
