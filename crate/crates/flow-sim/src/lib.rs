//! Pseudo-spectral evolution of the stream function on a periodic square:
//! the heat flow and the scaled 2D Navier–Stokes equation in vorticity form,
//! the integral-form consistency check, and the snapshot format.

pub mod duhamel;
pub mod field;
pub mod io;
pub mod sim;

pub use duhamel::{duhamel_residual, gap_study, heat_vs_ns_gap, DuhamelReport, GapStudy, Window};
pub use field::{Fft2, SpectralField};
pub use io::{read_field, read_snapshot, write_field, write_snapshot, IndexEntry, SnapshotHeader, SnapshotIndex, MAGIC};
pub use rustfft::num_complex::Complex64;
pub use sim::{initial_field, rescale_solution, simulate, simulate_with, Dealias, Nonlinear, SimConfig};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("advective Courant number {cfl:.3} exceeds {max} at t = {time:.4}")]
    CflViolation { time: f64, cfl: f64, max: f64 },
    #[error("non-finite amplitudes at t = {time:.4}")]
    NaNDetected { time: f64, last_good: Box<SpectralField> },
    #[error("delta must be positive, got {delta}")]
    NonPositiveDelta { delta: f64 },
    #[error("{found} snapshots stored, at least {needed} needed")]
    InsufficientSnapshots { found: usize, needed: usize },
    #[error("snapshot format: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
