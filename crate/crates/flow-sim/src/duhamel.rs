use serde::{Deserialize, Serialize};

use crate::field::SpectralField;
use crate::sim::{simulate_with, Dealias, Nonlinear, SimConfig};
use crate::SimError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DuhamelReport {
    /// `(t, ‖residual‖₂)` at every snapshot from the eighth on.
    pub residuals: Vec<(f64, f64)>,
    pub max: f64,
}

/// Residual of the integral form
/// `ψ̃(t) = e^{tΔ}u₀ − δ∫₀ᵗ e^{(t−s)Δ}Δ⁻¹J(s) ds`, with the `s`-integral
/// taken by the trapezoid rule over the stored snapshots.
pub fn duhamel_residual(series: &[SpectralField], u0: &SpectralField, delta: f64, dealias: Dealias) -> Result<DuhamelReport, SimError> {
    if series.len() < 8 {
        return Err(SimError::InsufficientSnapshots { found: series.len(), needed: 8 });
    }
    let nl = Nonlinear::new(u0, dealias);
    let mut integral = SpectralField::zeros(u0.n, u0.period, series[0].time);
    let mut prev = nl.stream_term(&series[0]);
    let mut residuals = Vec::new();
    for k in 1..series.len() {
        let ds = series[k].time - series[k - 1].time;
        let g = nl.stream_term(&series[k]);
        let carried = integral.heat(ds).coeffs;
        let pushed = prev.heat(ds).coeffs;
        for m in 0..carried.len() {
            integral.coeffs[m] = carried[m] + 0.5 * ds * (pushed[m] + g.coeffs[m]);
        }
        prev = g;
        if k >= 7 {
            let t = series[k].time;
            let heat = u0.heat(t - u0.time);
            let mut r = series[k].sub(&heat);
            for m in 0..r.coeffs.len() {
                r.coeffs[m] += delta * integral.coeffs[m];
            }
            residuals.push((t, r.l2_norm()));
        }
    }
    let max = residuals.iter().fold(0.0f64, |m, r| m.max(r.1));
    Ok(DuhamelReport { residuals, max })
}

/// Spatial window on which the heat/Navier–Stokes gap is sampled.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Window {
    pub x: [f64; 2],
    pub y: [f64; 2],
}

/// `max |∂^α(ψ̃ − e^{tΔ}u₀)|` over grid nodes in `window`, snapshots with
/// `t ≤ t_max` and `|α| ≤ order`; also the running maximum per snapshot.
pub fn heat_vs_ns_gap(series: &[SpectralField], u0: &SpectralField, window: &Window, order: usize, t_max: f64) -> (f64, Vec<(f64, f64)>) {
    let n = u0.n;
    let inside: Vec<usize> = (0..n * n)
        .filter(|m| {
            let (x, y) = (u0.coord(m % n), u0.coord(m / n));
            x >= window.x[0] && x <= window.x[1] && y >= window.y[0] && y <= window.y[1]
        })
        .collect();
    let mut running = Vec::new();
    let mut gap: f64 = 0.0;
    for f in series.iter().filter(|f| f.time <= t_max + 1e-12) {
        let d = f.sub(&u0.heat(f.time - u0.time));
        for tot in 0..=order {
            for a in 0..=tot {
                let g = d.partial_grid(a, tot - a);
                for &m in &inside {
                    gap = gap.max(g[m].abs());
                }
            }
        }
        running.push((f.time, gap));
    }
    (gap, running)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GapStudy {
    pub deltas: Vec<f64>,
    pub gaps: Vec<f64>,
    /// Fitted exponent of `gap ∝ δ₂^p`.
    pub slope: f64,
    /// Mean of `gap/δ₂`, the surrogate for `C_T`.
    pub c_t: f64,
    /// `(max − min)/mean` of `gap/δ₂`.
    pub ratio_spread: f64,
}

/// Runs the scaled equation for each `δ₂` and measures the gap to the heat
/// evolution of `u₀`.
pub fn gap_study(u0: &SpectralField, cfg: &SimConfig, deltas: &[f64], window: &Window, order: usize) -> Result<GapStudy, SimError> {
    let mut gaps = Vec::new();
    for &d in deltas {
        let c = SimConfig { delta: d, ..cfg.clone() };
        let mut series = Vec::new();
        simulate_with(u0, &c, |f| series.push(f.clone()))?;
        gaps.push(heat_vs_ns_gap(&series, u0, window, order, cfg.t_final).0);
    }
    let xs: Vec<f64> = deltas.iter().map(|d| d.ln()).collect();
    let ys: Vec<f64> = gaps.iter().map(|g| g.ln()).collect();
    let n = xs.len() as f64;
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    let ratios: Vec<f64> = gaps.iter().zip(deltas).map(|(g, d)| g / d).collect();
    let c_t = ratios.iter().sum::<f64>() / n;
    let hi = ratios.iter().cloned().fold(f64::MIN, f64::max);
    let lo = ratios.iter().cloned().fold(f64::MAX, f64::min);
    Ok(GapStudy {
        deltas: deltas.to_vec(),
        gaps,
        slope,
        c_t,
        ratio_spread: (hi - lo) / c_t,
    })
}
