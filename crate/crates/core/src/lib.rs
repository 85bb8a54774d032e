//! Length-biased Birnbaum–Saunders (LBS) distribution and regression.
//!
//! * [`dist`]: density, survival, hazard, quantile, moments and sampling.
//! * [`shape`]: modes, bimodality and hazard monotonicity.
//! * [`regression`]: dual-link regression with analytic score/Hessian and BFGS fitting.
//! * [`inference`]: asymptotic, percentile and BCa bootstrap intervals.
//! * [`diagnostics`]: GCS, RQ and U residuals, QQ envelopes, Ljung–Box.
//! * [`simstudy`]: Monte Carlo estimation, coverage and residual studies.
//! * [`io`]: CSV ingestion, model configuration, summaries and report files.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod diagnostics;
pub mod dist;
pub mod error;
pub mod inference;
pub mod io;
pub mod numeric;
pub mod regression;
pub mod rng;
pub mod shape;
pub mod simstudy;
pub mod special;

pub use dist::{GammaMixture, LbsParams, StandardizeTerms};
pub use error::{LbsError, Result};
pub use regression::{fit, FitOptions, FitResult, Link, RegressionSpec};
