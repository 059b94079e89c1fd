use rustfft::num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::field::{coeffs_to_grid, grid_to_coeffs, SpectralField};
use crate::SimError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Dealias {
    TwoThirds,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub delta: f64,
    pub dt: f64,
    pub t_final: f64,
    pub dealias: Dealias,
    /// A snapshot is kept every this many steps, plus the initial state.
    pub snapshot_every: usize,
    /// Largest admissible advective Courant number `δ|∇ψ̃|dt/h`.
    pub max_cfl: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            delta: 0.0,
            dt: 1e-2,
            t_final: 1.0,
            dealias: Dealias::TwoThirds,
            snapshot_every: 1,
            max_cfl: 1.0,
        }
    }
}

impl SimConfig {
    /// Step count and the step size adjusted to land on `t_final`.
    pub fn steps(&self) -> (usize, f64) {
        let m = (self.t_final / self.dt).round().max(1.0) as usize;
        (m, self.t_final / m as f64)
    }
}

/// Nonlinear term of the vorticity equation and its diagnostics.
pub struct Nonlinear {
    n: usize,
    mask: Vec<f64>,
    kx: Vec<f64>,
    ky: Vec<f64>,
    inv_lap: Vec<f64>,
}

impl Nonlinear {
    pub fn new(template: &SpectralField, dealias: Dealias) -> Self {
        let n = template.n;
        let cut = n as f64 / 3.0;
        let mut mask = vec![1.0; n * n];
        let mut kx = vec![0.0; n * n];
        let mut ky = vec![0.0; n * n];
        let mut inv_lap = vec![0.0; n * n];
        for j in 0..n {
            for i in 0..n {
                let (mi, mj) = (crate::field::mode(i, n), crate::field::mode(j, n));
                if dealias == Dealias::TwoThirds && (mi.abs() as f64 >= cut || mj.abs() as f64 >= cut) {
                    mask[j * n + i] = 0.0;
                }
                let (a, b) = (template.wavenumber(i), template.wavenumber(j));
                kx[j * n + i] = a;
                ky[j * n + i] = b;
                let kk = a * a + b * b;
                inv_lap[j * n + i] = if kk > 0.0 { -1.0 / kk } else { 0.0 };
            }
        }
        Nonlinear {
            n,
            mask,
            kx,
            ky,
            inv_lap,
        }
    }

    /// Amplitudes of `J = ψ_x ω_y − ω_x ψ_y` for the vorticity `ω`, with
    /// `ψ = Δ⁻¹ω`, and the largest `|∇ψ|` on the grid. The zero mode of
    /// `J` is returned as is.
    pub fn jacobian(&self, omega: &[Complex64]) -> (Vec<Complex64>, f64) {
        let n = self.n;
        let iu = Complex64::new(0.0, 1.0);
        let mut px = vec![Complex64::new(0.0, 0.0); n * n];
        let mut py = px.clone();
        let mut wx = px.clone();
        let mut wy = px.clone();
        for m in 0..n * n {
            let w = omega[m] * self.mask[m];
            let p = w * self.inv_lap[m];
            px[m] = iu * self.kx[m] * p;
            py[m] = iu * self.ky[m] * p;
            wx[m] = iu * self.kx[m] * w;
            wy[m] = iu * self.ky[m] * w;
        }
        let (gpx, gpy, gwx, gwy) = (
            coeffs_to_grid(&px, n),
            coeffs_to_grid(&py, n),
            coeffs_to_grid(&wx, n),
            coeffs_to_grid(&wy, n),
        );
        let mut umax: f64 = 0.0;
        let prod: Vec<f64> = (0..n * n)
            .map(|m| {
                umax = umax.max(gpx[m].hypot(gpy[m]));
                gpx[m] * gwy[m] - gwx[m] * gpy[m]
            })
            .collect();
        let mut j = grid_to_coeffs(&prod, n);
        for m in 0..n * n {
            j[m] *= self.mask[m];
        }
        (j, umax)
    }

    /// `Δ⁻¹J` for the stream function `ψ`.
    pub fn stream_term(&self, psi: &SpectralField) -> SpectralField {
        let omega: Vec<Complex64> = psi
            .coeffs
            .iter()
            .zip(&self.inv_lap)
            .map(|(c, il)| if *il != 0.0 { c / il } else { Complex64::new(0.0, 0.0) })
            .collect();
        let (mut j, _) = self.jacobian(&omega);
        for m in 0..self.n * self.n {
            j[m] *= self.inv_lap[m];
        }
        SpectralField {
            coeffs: j,
            ..psi.clone()
        }
    }
}

/// Evolves `∂ₜω + δJ = Δω`, `ω = Δψ̃`, by integrating-factor RK4 and calls
/// `emit` with `ψ̃` at every snapshot, starting with the initial state.
pub fn simulate_with(
    psi0: &SpectralField,
    cfg: &SimConfig,
    mut emit: impl FnMut(&SpectralField),
) -> Result<SpectralField, SimError> {
    let n = psi0.n;
    let mut psi = psi0.clone();
    psi.clean();
    let nl = Nonlinear::new(&psi, cfg.dealias);
    let lap: Vec<f64> = nl.inv_lap.iter().map(|v| if *v != 0.0 { 1.0 / v } else { 0.0 }).collect();
    let (steps, dt) = cfg.steps();
    let e1: Vec<f64> = lap.iter().map(|l| (l * dt).exp()).collect();
    let eh: Vec<f64> = lap.iter().map(|l| (0.5 * l * dt).exp()).collect();
    let h = psi.spacing();
    let mut w: Vec<Complex64> = psi.coeffs.iter().zip(&lap).map(|(c, l)| c * l).collect();
    let to_psi = |w: &[Complex64], t: f64| SpectralField {
        n,
        period: psi0.period,
        time: t,
        coeffs: w.iter().zip(&nl.inv_lap).map(|(c, il)| c * il).collect(),
    };
    emit(&to_psi(&w, psi0.time));
    let delta = cfg.delta;
    let rhs = |w: &[Complex64]| -> (Vec<Complex64>, f64) {
        if delta == 0.0 {
            return (vec![Complex64::new(0.0, 0.0); n * n], 0.0);
        }
        let (mut j, umax) = nl.jacobian(w);
        j[0] = Complex64::new(0.0, 0.0);
        j.iter_mut().for_each(|c| *c *= -delta);
        (j, umax)
    };
    let mut t = psi0.time;
    for step in 1..=steps {
        let (a, umax) = rhs(&w);
        let cfl = delta * umax * dt / h;
        if cfl > cfg.max_cfl {
            return Err(SimError::CflViolation { time: t, cfl, max: cfg.max_cfl });
        }
        let wa: Vec<Complex64> = (0..n * n).map(|m| eh[m] * (w[m] + 0.5 * dt * a[m])).collect();
        let (b, _) = rhs(&wa);
        let wb: Vec<Complex64> = (0..n * n).map(|m| eh[m] * w[m] + 0.5 * dt * b[m]).collect();
        let (c, _) = rhs(&wb);
        let wc: Vec<Complex64> = (0..n * n).map(|m| e1[m] * w[m] + dt * eh[m] * c[m]).collect();
        let (d, _) = rhs(&wc);
        let next: Vec<Complex64> = (0..n * n)
            .map(|m| e1[m] * w[m] + dt / 6.0 * (e1[m] * a[m] + 2.0 * eh[m] * (b[m] + c[m]) + d[m]))
            .collect();
        t = psi0.time + dt * step as f64;
        if next.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(SimError::NaNDetected {
                time: t,
                last_good: Box::new(to_psi(&w, t - dt)),
            });
        }
        w = next;
        if step % cfg.snapshot_every.max(1) == 0 || step == steps {
            emit(&to_psi(&w, t));
        }
    }
    Ok(to_psi(&w, t))
}

/// Snapshots of `ψ̃`, including the initial state.
pub fn simulate(psi0: &SpectralField, cfg: &SimConfig) -> Result<Vec<SpectralField>, SimError> {
    let mut out = Vec::new();
    simulate_with(psi0, cfg, |f| out.push(f.clone()))?;
    Ok(out)
}

/// Initial datum from grid samples; the mean is subtracted and returned.
pub fn initial_field(values: &[f64], n: usize, period: f64) -> (SpectralField, f64) {
    SpectralField::from_grid(values, n, period, 0.0)
}

/// `ψ = δψ̃` for every snapshot.
pub fn rescale_solution(series: &[SpectralField], delta: f64) -> Result<Vec<SpectralField>, SimError> {
    if !(delta > 0.0) {
        return Err(SimError::NonPositiveDelta { delta });
    }
    Ok(series.iter().map(|f| f.scale(delta)).collect())
}
