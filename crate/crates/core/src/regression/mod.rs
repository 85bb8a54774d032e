//! Dual-link LBS regression: model, starting values and maximum likelihood.

mod fit;
mod init;
mod link;
mod model;
pub mod optim;

pub use fit::{fit, FitOptions, FitResult, HessianSource};
pub use init::{initial_values, Y_FLOOR};
pub use link::Link;
pub use model::{HessianWorkspace, RegressionSpec, ScoreWorkspace};
