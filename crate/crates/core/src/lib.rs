//! Hubbard-model spectra, measurement-driven adiabatic schedules and their
//! cost models.

pub mod cost;
pub mod error;
pub mod model;
pub mod nonfinite;
pub mod schedule;
pub mod spectral;
pub mod walksim;

pub use error::{Error, Result};
