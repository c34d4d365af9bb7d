//! Truncated power series machinery for CR hypersurfaces of infinite type.

pub mod blowup;
pub mod cli;
pub mod crsystem;
pub mod error;
pub mod scalar;
pub mod holomap;
pub mod hypersurface;
pub mod lifting;
pub mod linalg;
pub mod normalform;
pub mod rellich;
pub mod series;
pub mod textfmt;

pub use error::{Error, Result};
