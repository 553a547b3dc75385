//! Robust M-estimators of the mean and variance of real samples with
//! possibly heavy tails, the non-asymptotic deviation bounds that calibrate
//! them, worst-case distribution constructors, and a reproducible Monte
//! Carlo harness for deviation-quantile and coverage experiments.
//!
//! The estimators replace the empirical average by the root of a truncated
//! estimating equation. With the truncation level tuned to a variance (or
//! kurtosis) bound and a confidence parameter, their deviations stay close
//! to the Gaussian benchmark even when the sample distribution is only
//! assumed to have a finite variance.

// `!(x > 0.0)` deliberately catches NaN alongside non-positive values, and
// the quantile approximations carry their published coefficient digits.
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::excessive_precision)]

pub mod bounds;
pub mod cli;
pub mod distributions;
pub mod error;
pub mod influence;
pub mod kurtosis_mean;
pub mod lepski;
pub mod mean_catoni;
pub mod montecarlo;
pub mod variance_blocks;

pub use error::{Error, Result};
pub use influence::{chi, chi_constants, g, psi, ChiConstants, InfluenceKind};
pub use mean_catoni::{AlphaMode, MeanEstimate, MeanMethod, Sample};
