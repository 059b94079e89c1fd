//! Critical points of time-dependent stream functions: detection on each
//! time slice, continuation into trajectories, fold location for merges and
//! splits, and comparison with a prescribed pattern.

pub mod arcs;
pub mod compare;
pub mod continuation;
pub mod critical;
pub mod field;
pub mod output;
pub mod swirl;

pub use arcs::{connecting_arcs, polyline_distance, ConnectingArc, LinkPolyline};
pub use compare::{compare_pattern, ArcMatch, Check, CompareOptions, PatternReport};
pub use continuation::{
    continue_trajectories, fit_fold, locate_fold, BifurcationEvent, EventKind, Slice, TrackOptions, Tracking,
    Trajectory,
};
pub use critical::{classify, critical_point, find_critical_points, CriticalPoint, FindOptions, FindResult, DET_TOL};
pub use field::{FnField, PlanarField, SeedGrid};
pub use output::{read_json, read_trajectories_csv, trajectory_rows, write_json, write_trajectories_csv, TrajectoryRow};
pub use swirl::{swirl_angle, velocity};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum TrackError {
    #[error("trajectories {a} and {b} share no time slice")]
    NoCommonSlices { a: usize, b: usize },
    #[error("slice times must increase, got {t0} then {t1}")]
    UnorderedSlices { t0: f64, t1: f64 },
    #[error("ambiguous match at t = {t}, ({x}, {y})")]
    AmbiguousMatching { t: f64, x: f64, y: f64 },
    #[error("event census differs: prescribed {prescribed:?} (MERGE, SPLIT), realized {realized:?}")]
    CensusMismatch { prescribed: [usize; 2], realized: [usize; 2] },
    #[error("{count} extra critical points inside the tube, first at {first:?}")]
    IsolationViolated { count: usize, first: Option<[f64; 3]> },
    #[error("{count} critical points of the wrong type along the arcs")]
    TypeMismatch { count: usize },
    #[error("pattern checks failed: {checks}")]
    PatternFailed { checks: String },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
