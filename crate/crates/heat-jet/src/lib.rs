//! The 2-jet of the heat solution along a link from its Cauchy data, the
//! checks of Conditions (A), (B), (C), and truncated power-series solutions
//! of the heat and Laplace Cauchy problems.

mod ck;
mod jet;
mod poly3;

pub use ck::{ck_series, harmonic_gradient_potential, link_surface, solve_cauchy, CauchySurface};
pub use jet::{
    condition_report, jet_at, link_jet, link_jet_at, verify_conditions, ConditionReport,
    JetSample, LinkJet, PointType, DEGENERATE_T3,
};
pub use poly3::{
    ball_samples, heat_residual, monomial_index, monomials, n_monomials, Operator,
    ResidualReport, TaylorSolution,
};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum HeatJetError {
    #[error("normal system singular at theta = {theta:.6}: det = {det:.3e}")]
    SingularNormalSystem { theta: f64, det: f64 },
    #[error("condition A violated at theta = {theta:.6}: |grad_xy v| = {value:.3e}")]
    ConditionAViolated { theta: f64, value: f64 },
    #[error("condition B violated at theta = {theta:.6}: expected {expected}, found {found}")]
    ConditionBViolated {
        theta: f64,
        expected: String,
        found: String,
    },
    #[error("condition C violated at theta = {theta:.6}: eta = {eta:.3e}, min singular value {singular_value:.3e}")]
    ConditionCViolated {
        theta: f64,
        eta: f64,
        singular_value: f64,
    },
    #[error("surface is characteristic at theta = {theta:.6}: mu = {mu:.3e}")]
    CharacteristicSurface { theta: f64, mu: f64 },
    #[error("series degree {degree} too low: measured residual order {order:.2}")]
    DegreeTooLow { degree: usize, order: f64 },
    #[error("series system singular: rank {rank} of {size}")]
    SingularSeriesSystem { rank: usize, size: usize },
    #[error("field is not orthogonal to the curve: max |r.t| = {max:.3e}")]
    TangentialField { max: f64 },
    #[error("field is parallel to the curve somewhere: min |t x r| = {min:.3e}")]
    ParallelField { min: f64 },
}
