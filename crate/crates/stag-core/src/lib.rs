//! Shared numerics: periodic trigonometric polynomials, bivariate truncated
//! power series and a few dense least-squares helpers.

pub mod linalg;
pub mod series;
pub mod trig;

pub use series::Series2;
pub use trig::{TrigPoly, TrigVec3};

pub const TAU: f64 = std::f64::consts::TAU;

/// Wrap an angle into `[0, 2π)`.
pub fn wrap_angle(u: f64) -> f64 {
    let r = u.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Uniform grid `2πk/n`, k = 0..n.
pub fn uniform_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| TAU * k as f64 / n as f64).collect()
}
