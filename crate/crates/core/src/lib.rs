//! Variable bandpass filtering with first-order allpass warping and
//! coefficient decimation.
//!
//! A fixed linear-phase bandpass prototype is designed once. At run time two
//! knobs retune it without touching its coefficients: the decimation factor
//! `M` keeps every `M`-th tap and stretches the response by `M`, and the
//! warping coefficient `alpha` of the allpass sections that replace the unit
//! delays slides the band to the requested center.

pub mod allpass;
pub mod analyzer;
pub mod cdm;
pub mod cost;
pub mod error;
pub mod prototype;
pub mod roots;
pub mod tuner;
pub mod vdf;
pub mod warped;

pub use error::{Error, Result};
pub use allpass::WarpingCoefficient;
pub use analyzer::{BandpassMeasurement, ResponseCurve};
pub use cdm::DecimationFactor;
pub use prototype::{design_bandpass, FilterSpec, PrototypeFilter};
pub use tuner::VdfConfig;
pub use vdf::VariableFilter;
