//! Direction-of-arrival bounds for linear arrays placed behind an RF lens.
//!
//! The lens is modelled as a Gaussian amplitude taper whose centre slides
//! across the array with the arrival angle. On top of that model this crate
//! provides:
//!
//! * [`array_model`]: configuration types, steering vector and the lens
//!   amplitude profile, including the power normalization factor.
//! * [`fisher`]: the 3x3 Fisher information over `[amplitude, phase, doa]`,
//!   its closed-form determinant, the lens and bare-array Cramer-Rao bounds
//!   and a finite-difference oracle for cross-checking them.
//! * [`simulate`]: seeded snapshot synthesis, a concentrated maximum
//!   likelihood estimator and Monte Carlo campaigns against the bound.

pub mod array_model;
pub mod error;
pub mod fisher;
mod quadrature;
pub mod simulate;

pub use array_model::{ArrayConfig, DiagMatrix, LensConfig, PhiSupport, SignalParams};
pub use error::{ModelError, Result};
pub use fisher::{DMoments, FisherMatrix, Param};
pub use simulate::{McReport, MlEstimate, SearchConfig, Snapshot};
