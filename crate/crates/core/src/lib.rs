//! Numerical laboratory for level-one Hecke eigenforms and the Rankin–Selberg
//! and symmetric-square L-functions attached to them.

pub mod analytic;
pub mod arith;
pub mod cli;
pub mod eigenforms;
pub mod error;
pub mod lseries;
pub mod mollifier;
pub mod quad;
pub mod report;
pub mod mp;
pub mod zerolab;

pub use error::{Error, Result};
