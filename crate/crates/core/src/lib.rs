//! Localization accuracy of sensor fields drawn from a Poisson point process.
//!
//! The crate computes the per-realization Cramér–Rao bound for a source seen
//! by randomly placed sensors, its Monte Carlo average over fields, a
//! density-level lower bound with closed-form wideband and narrowband limits,
//! and a maximum-likelihood simulation that exercises all of them.

// `!(x > 0.0)` is used deliberately so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bounds;
pub mod cli;
pub mod crb;
pub mod error;
pub mod geometry;
pub mod mlsim;
pub mod model;
pub mod numerics;
pub mod rng;
pub mod sweep;

pub use error::{Error, Result};
