use linkgeom::{FrameField, IntervalLabel};
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use stag_core::linalg::lstsq_eq;
use stag_core::{uniform_grid, TrigPoly, TAU};

use crate::SynthError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaFunction {
    pub coeffs: TrigPoly,
    /// Required sign of β per interval; `0` on negative intervals.
    pub signs: Vec<i8>,
    /// `∮ β t₃ dθ` after the fit.
    pub loop_integral: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BetaOptions {
    pub degree: usize,
    /// Depth `c'` of the sine dip on positive intervals, in `(0, 1)`.
    pub dip: f64,
}

impl Default for BetaOptions {
    fn default() -> Self {
        BetaOptions {
            degree: 8,
            dip: 0.5,
        }
    }
}

const GRID: usize = 4096;

fn quintic_hermite(u: f64, v0: f64, d0: f64, v1: f64, d1: f64, h: f64) -> f64 {
    // second derivatives vanish at both ends
    let s = u / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let s4 = s3 * s;
    let s5 = s4 * s;
    let h0 = 1.0 - 10.0 * s3 + 15.0 * s4 - 6.0 * s5;
    let h1 = s - 6.0 * s3 + 8.0 * s4 - 3.0 * s5;
    let h4 = -4.0 * s3 + 7.0 * s4 - 3.0 * s5;
    let h5 = 10.0 * s3 - 15.0 * s4 + 6.0 * s5;
    h0 * v0 + h * h1 * d0 + h5 * v1 + h * h4 * d1
}

fn interval_sign(label: IntervalLabel) -> f64 {
    match label {
        IntervalLabel::Max => -1.0,
        IntervalLabel::Min => 1.0,
        IntervalLabel::Saddle => 0.0,
    }
}

/// Piecewise target for β on the uniform grid of `GRID` points: a sine dip
/// on positive intervals, quintic bridges on negative ones, plus a bump on
/// the negative intervals sized so that `∮ target·t₃ = 0`.
pub fn beta_target(frame: &FrameField, dip: f64) -> Vec<f64> {
    let grid = uniform_grid(GRID);
    let ivs = &frame.intervals;
    let m = ivs.len();
    let mut base = vec![0.0; GRID];
    let mut bump = vec![0.0; GRID];
    for (i, &th) in grid.iter().enumerate() {
        let j = frame.interval_of(th);
        let iv = &ivs[j];
        let u = (th - iv.start).rem_euclid(TAU);
        let len = iv.len();
        if iv.sign > 0 {
            let s = interval_sign(iv.label);
            base[i] = s * (1.0 - dip * (TAU * u / len).sin());
        } else {
            let prev = &ivs[(j + m - 1) % m];
            let next = &ivs[(j + 1) % m];
            let sp = interval_sign(prev.label);
            let sn = interval_sign(next.label);
            let dp = -sp * dip * TAU / prev.len();
            let dn = -sn * dip * TAU / next.len();
            base[i] = quintic_hermite(u, sp, dp, sn, dn, len);
            bump[i] = (std::f64::consts::PI * u / len).sin().powi(4);
        }
    }
    let t3 = frame.t_field.0[2].sample_uniform(GRID);
    let ib: f64 = base.iter().zip(&t3).map(|(b, t)| b * t).sum();
    let iw: f64 = bump.iter().zip(&t3).map(|(b, t)| b * t).sum();
    let kappa = if iw.abs() > 0.0 { -ib / iw } else { 0.0 };
    base.iter().zip(&bump).map(|(b, w)| b + kappa * w).collect()
}

/// `∮ β t₃ dθ` by the trapezoid rule, exact for the trig degrees involved.
fn loop_integral(frame: &FrameField, beta: &TrigPoly) -> f64 {
    let n = GRID.max(4 * (beta.degree() + frame.t_field.degree()));
    let b = beta.sample_uniform(n);
    let t3 = frame.t_field.0[2].sample_uniform(n);
    TAU / n as f64 * b.iter().zip(&t3).map(|(x, y)| x * y).sum::<f64>()
}

/// Checks the sign plan, the horizontal-point condition `β·∂β < 0` and the
/// loop constraint. `Err` names the violated condition.
pub fn verify_beta(frame: &FrameField, beta: &TrigPoly) -> Result<f64, String> {
    let n = 2048;
    for (j, iv) in frame.positive_intervals() {
        let s = interval_sign(iv.label);
        for i in 0..=n {
            let th = iv.start + iv.len() * i as f64 / n as f64;
            let v = beta.eval(th);
            if v * s <= 0.0 {
                return Err(format!(
                    "beta has the wrong sign on positive interval {j} at theta = {th:.4}"
                ));
            }
        }
    }
    let d = beta.deriv();
    for (j, h) in frame.horizontal.iter().enumerate() {
        let (v, dv) = (beta.eval(h.theta), d.eval(h.theta));
        if v == 0.0 || dv == 0.0 || v * dv >= 0.0 {
            return Err(format!(
                "beta * dbeta = {:.3e} is not negative at horizontal point {j}",
                v * dv
            ));
        }
    }
    let li = loop_integral(frame, beta);
    if li.abs() >= 1e-10 {
        return Err(format!("loop integral of beta t3 is {li:.3e}"));
    }
    Ok(li)
}

fn fit_constrained(frame: &FrameField, target: &[f64], degree: usize) -> TrigPoly {
    let grid = uniform_grid(GRID);
    let nc = 2 * degree + 1;
    let a = DMatrix::from_fn(GRID, nc, |i, k| TrigPoly::basis_row(grid[i], degree)[k]);
    let b = DVector::from_column_slice(target);
    let t3 = frame.t_field.0[2].sample_uniform(GRID);
    let mut c = DMatrix::zeros(1, nc);
    for (i, &th) in grid.iter().enumerate() {
        let row = TrigPoly::basis_row(th, degree);
        for k in 0..nc {
            c[(0, k)] += row[k] * t3[i] * TAU / GRID as f64;
        }
    }
    let d = DVector::zeros(1);
    let x = lstsq_eq(&a, &b, &c, &d);
    TrigPoly::from_packed(x.as_slice())
}

/// Constrained least-squares β, escalating the degree up to four times the
/// requested one.
pub fn choose_beta(frame: &FrameField, opts: &BetaOptions) -> Result<BetaFunction, SynthError> {
    let target = beta_target(frame, opts.dip);
    let d0 = opts.degree.max(1);
    let mut last = String::new();
    let mut degrees = vec![d0, d0 * 3 / 2, 2 * d0, 3 * d0, 4 * d0];
    degrees.dedup();
    for &d in &degrees {
        let beta = fit_constrained(frame, &target, d);
        match verify_beta(frame, &beta) {
            Ok(li) => {
                let signs = frame
                    .intervals
                    .iter()
                    .map(|iv| interval_sign(iv.label) as i8)
                    .collect();
                return Ok(BetaFunction {
                    coeffs: beta,
                    signs,
                    loop_integral: li,
                });
            }
            Err(e) => last = e,
        }
    }
    Err(SynthError::BetaInfeasible {
        degree: 4 * d0,
        reason: last,
    })
}
