//! Cauchy data along a framed link: the function β, the second-order data
//! F, G making the reduced normal determinant η positive, and the assembled
//! jets of f on Σ and g.

mod beta;
mod data;
mod fg;
mod qpoly;

pub use beta::{beta_target, choose_beta, verify_beta, BetaFunction, BetaOptions};
pub use data::{assemble_data, CauchyDataSet, DataReport, FJet};
pub use fg::{
    construct_fg, smooth_fg, synthesize, ContinuousFG, FgOptions, GluePath, SmoothFG,
};
pub use qpoly::{eta, q_coefficients, q_extremum, PointData, QPolynomial};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SynthError {
    #[error("no admissible beta up to degree {degree}: {reason}")]
    BetaInfeasible { degree: usize, reason: String },
    #[error("|t3| = {t3:.3e} too small for the extremum of Q")]
    HorizontalPointSingularity { t3: f64 },
    #[error("no margin tau works at horizontal point {index} after 20 halvings")]
    MarginSearchFailed { index: usize },
    #[error("no exterior point found within radius {radius:.3e}")]
    ExteriorPointNotFound { radius: f64 },
    #[error("smoothing failed at degree cap {degree}: min eta {min_eta:.3e}")]
    SmoothingFailed { degree: usize, min_eta: f64 },
    #[error("eta = {eta:.3e} <= 0 at theta = {theta:.4} after gluing")]
    EtaNotPositive { theta: f64, eta: f64 },
    #[error("f0 is not periodic: gap {gap:.3e}")]
    PeriodicityViolated { gap: f64 },
}
