//! Counting polynomials of degree-constrained edge subsets, their zeros, and
//! the limit theorems those zeros certify.

pub mod asano_engine;
pub mod count_engine;
pub mod error;
pub mod generators;
pub mod ginibre_checks;
pub mod fugacity_stats;
pub mod graph_model;
pub mod limit_theorems;
pub mod poly;
pub mod root_certificates;
pub mod root_finder;
pub mod scalar;
pub mod spin_systems;

pub use error::{Error, Result};
pub use scalar::MpFloat;
pub use scalar::{Real, Scalar};

/// Exact rational arithmetic.
pub type Exact = num_rational::BigRational;
pub type Mp30 = MpFloat<108>;
pub type Mp60 = MpFloat<208>;
pub type Mp120 = MpFloat<408>;
pub type Mp240 = MpFloat<808>;
pub type Mp480 = MpFloat<1608>;
