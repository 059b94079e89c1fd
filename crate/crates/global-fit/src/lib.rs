//! Globally defined heat solutions matched to the jet of `v` along a link:
//! Gaussian multipoles on the plane, Fourier modes on the torus, and the
//! parabolic scaling that relates the two.

pub mod ansatz;
pub mod basis;
pub mod fit;
pub mod scaling;
pub mod torus;

pub use ansatz::{HeatAnsatz, Jet2};
pub use basis::{gaussian_derivs, Dictionary, PlaneSource, JET_ORDERS};
pub use fit::{fit, fit_link, fit_plane, plane_dictionary, FitOptions, FitReport, FitResult, JetTarget, SampleTarget};
pub use scaling::{scale_link, unscale_link, ScalingMap};
pub use torus::{fit_torus, fits_unit_ball, search_torus, TorusFit, TorusSearch};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GlobalFitError {
    #[error("least-squares system has condition number {condition:.3e} above the cap {cap:.1e}; re-seed the dictionary")]
    IllConditionedBasis { condition: f64, cap: f64 },
    #[error("eta floor reached; best eta = {eta:.3e} with discrepancy {discrepancy:.3e}")]
    EtaFloorReached { eta: f64, discrepancy: f64 },
    #[error(transparent)]
    Jet(#[from] heat_jet::HeatJetError),
    #[error(transparent)]
    Synth(#[from] cauchy_synth::SynthError),
}
