//! Universal likelihood-ratio inference for the mean of a `N(theta*, I_d)`
//! sample: split, cross-fit and subsampling confidence sets, their size
//! relative to the classical set, power, and tests of an annulus null.

pub mod data;
pub mod doughnut;
pub mod engine;
pub mod error;
pub mod logspace;
pub mod power;
pub mod regions;
pub mod specfun;

pub use error::{Error, Result};
