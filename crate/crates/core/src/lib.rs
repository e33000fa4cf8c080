//! Degrees-of-freedom (DoF) toolkit for the two-user MIMO interference
//! channel with delayed local CSIT: exact region geometry, two-phase
//! retrospective interference-alignment schemes for every achievable corner
//! point, and end-to-end verification by exact linear algebra over a prime
//! field, plus the K-user MISO scheme.

pub mod config;
pub mod field;
pub mod geometry;
pub mod linalg;
pub mod regions;
pub mod schemes;
pub mod simulator;
pub mod streams;

/// Exact rational scalar used for all region geometry and DoF values.
pub type Rat = num_rational::Ratio<i64>;

/// Default exact field for rank and decoding claims.
pub type PrimeField = field::Fp;
