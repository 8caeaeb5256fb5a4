//! Digit-masked direction sets, complexity-profile bound certificates and
//! exact dyadic box counting.

pub mod bounds;
pub mod directions;
pub mod energy;
pub mod error;
pub mod error_terms;
pub mod fractal;
pub mod harness;
pub mod profile;
pub mod rational;

pub use error::{Error, Result};
