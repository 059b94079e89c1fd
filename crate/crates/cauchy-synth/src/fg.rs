use linkgeom::FrameField;
use serde::{Deserialize, Serialize};
use stag_core::trig::angle_diff;
use stag_core::{uniform_grid, TrigPoly, TAU};

use crate::beta::{choose_beta, BetaFunction, BetaOptions};
use crate::qpoly::{q_coefficients, q_extremum, PointData, QPolynomial};
use crate::SynthError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FgOptions {
    /// Grid size for construction and verification.
    pub grid: usize,
    /// Initial τ_j as a fraction of the distance to the nearest neighbouring
    /// horizontal point.
    pub tau_fraction: f64,
    /// Required `min Q(M)` on the negative intervals, relative to
    /// `min_j η(θ_j)`.
    pub exterior_margin: f64,
    pub radius_bound: f64,
    pub smooth_min_degree: usize,
    pub smooth_max_degree: usize,
}

impl Default for FgOptions {
    fn default() -> Self {
        FgOptions {
            grid: 4096,
            tau_fraction: 0.125,
            exterior_margin: 0.5,
            radius_bound: 1e6,
            smooth_min_degree: 2,
            smooth_max_degree: 512,
        }
    }
}

/// Path from the origin to the exterior point `M` used on the gluing
/// subintervals of negative intervals.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum GluePath {
    Straight,
    /// Out along angle `dir` to radius `radius`, along the circle to the
    /// angle of `M`, then radially to `M`.
    Polyline { dir: f64, radius: f64 },
}

impl GluePath {
    pub fn eval(&self, lambda: f64, m: [f64; 2]) -> [f64; 2] {
        match *self {
            GluePath::Straight => [lambda * m[0], lambda * m[1]],
            GluePath::Polyline { dir, radius } => {
                let rm = m[0].hypot(m[1]);
                let am = m[1].atan2(m[0]);
                let sweep = angle_diff(am, dir);
                let l1 = radius;
                let l2 = radius * sweep.abs();
                let l3 = (radius - rm).abs();
                let s = lambda * (l1 + l2 + l3);
                if s <= l1 {
                    [s * dir.cos(), s * dir.sin()]
                } else if s <= l1 + l2 {
                    let a = dir + sweep * (s - l1) / l2.max(1e-300);
                    [radius * a.cos(), radius * a.sin()]
                } else {
                    let w = if l3 > 0.0 { (s - l1 - l2) / l3 } else { 1.0 };
                    let r = radius + (rm - radius) * w;
                    [r * am.cos(), r * am.sin()]
                }
            }
        }
    }
}

/// Continuous (piecewise) F, G on the uniform θ-grid.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ContinuousFG {
    pub f: Vec<f64>,
    pub g: Vec<f64>,
    pub taus: Vec<f64>,
    pub exterior_point: [f64; 2],
    pub path: GluePath,
    pub eta: Vec<f64>,
    pub eta0: f64,
    #[serde(skip)]
    pub q: Vec<QPolynomial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SmoothFG {
    pub f: TrigPoly,
    pub g: TrigPoly,
    pub degree: usize,
    pub min_eta: f64,
    /// Sup distance between smoothed and continuous `(F, G)`.
    pub deviation: f64,
    /// Sampled Lipschitz constant of `Q` between the two data sets.
    pub lipschitz: f64,
}

struct GridPoint {
    q: QPolynomial,
    pd: PointData,
    /// Nearest horizontal point and distance to it in θ.
    near: usize,
    dist: f64,
    positive: bool,
}

fn ramp(d: f64, tau: f64) -> f64 {
    ((d - tau / 4.0) / (tau / 2.0)).clamp(0.0, 1.0)
}

pub fn construct_fg(
    frame: &FrameField,
    beta: &BetaFunction,
    opts: &FgOptions,
) -> Result<ContinuousFG, SynthError> {
    let n = opts.grid;
    let grid = uniform_grid(n);
    let hs = &frame.horizontal;
    let m = hs.len();
    let pts: Vec<GridPoint> = grid
        .iter()
        .map(|&th| {
            let pd = PointData::new(frame, &beta.coeffs, th);
            let (near, dist) = hs
                .iter()
                .enumerate()
                .map(|(j, h)| (j, angle_diff(th, h.theta).abs()))
                .fold((0, f64::INFINITY), |b, v| if v.1 < b.1 { v } else { b });
            let positive = frame.intervals[frame.interval_of(th)].sign > 0;
            GridPoint {
                q: q_coefficients(&pd),
                pd,
                near,
                dist,
                positive,
            }
        })
        .collect();

    // margins τ_j: Q(0, 0) > 0 on |θ - θ_j| ≤ τ_j
    let mut taus = Vec::with_capacity(m);
    for j in 0..m {
        let gap = angle_diff(hs[(j + 1) % m].theta, hs[j].theta)
            .abs()
            .min(angle_diff(hs[j].theta, hs[(j + m - 1) % m].theta).abs());
        let mut tau = opts.tau_fraction * gap;
        let mut ok = false;
        for _ in 0..=20 {
            let fine = 64;
            let good = (0..=fine).all(|i| {
                let th = hs[j].theta + tau * (2.0 * i as f64 / fine as f64 - 1.0);
                let pd = PointData::new(frame, &beta.coeffs, th);
                q_coefficients(&pd).f0 > 0.0
            }) && pts
                .iter()
                .filter(|p| p.near == j && p.dist <= tau)
                .all(|p| p.q.f0 > 0.0);
            if good {
                ok = true;
                break;
            }
            tau *= 0.5;
        }
        if !ok {
            return Err(SynthError::MarginSearchFailed { index: j });
        }
        taus.push(tau);
    }

    let lam: Vec<f64> = pts.iter().map(|p| ramp(p.dist, taus[p.near])).collect();
    let mut f = vec![0.0; n];
    let mut g = vec![0.0; n];
    for (i, p) in pts.iter().enumerate() {
        if p.positive && lam[i] > 0.0 {
            let (ac, bc, _) = q_extremum(&p.pd, &p.q)?;
            f[i] = lam[i] * ac;
            g[i] = lam[i] * bc;
        }
    }

    // exterior point for the negative intervals
    let neg: Vec<usize> = (0..n).filter(|&i| !pts[i].positive && lam[i] > 0.0).collect();
    let glue: Vec<usize> = neg.iter().cloned().filter(|&i| lam[i] < 1.0).collect();
    let eta_h = hs
        .iter()
        .map(|h| q_coefficients(&PointData::new(frame, &beta.coeffs, h.theta)).f0)
        .fold(f64::INFINITY, f64::min);
    let path_ok = |path: &GluePath, mp: [f64; 2]| {
        glue.iter().all(|&i| {
            let z = path.eval(lam[i], mp);
            pts[i].q.eval(z[0], z[1]) > 0.0
        })
    };
    let mut found = None;
    if neg.is_empty() {
        found = Some(([0.0, 0.0], GluePath::Straight));
    }
    'outer: for (bound, margin) in [
        (opts.radius_bound, opts.exterior_margin * eta_h),
        (opts.radius_bound, 0.0),
        (opts.radius_bound * 1e3, 0.0),
    ] {
        if found.is_some() {
            break;
        }
        let mut r = 1.0;
        while r <= bound {
            for a in 0..8 {
                let ang = a as f64 * TAU / 8.0;
                let mp = [r * ang.cos(), r * ang.sin()];
                let qmin = neg
                    .iter()
                    .map(|&i| pts[i].q.eval(mp[0], mp[1]))
                    .fold(f64::INFINITY, f64::min);
                if qmin <= margin {
                    continue;
                }
                if path_ok(&GluePath::Straight, mp) {
                    found = Some((mp, GluePath::Straight));
                    break 'outer;
                }
                for scale in [1.0, 2.0, 4.0, 8.0] {
                    for k in 0..16 {
                        let path = GluePath::Polyline {
                            dir: k as f64 * TAU / 16.0,
                            radius: r * scale,
                        };
                        if path_ok(&path, mp) {
                            found = Some((mp, path));
                            break 'outer;
                        }
                    }
                }
            }
            r *= 2.0;
        }
    }
    let (mp, path) = found.ok_or(SynthError::ExteriorPointNotFound {
        radius: opts.radius_bound * 1e3,
    })?;
    for &i in &neg {
        let z = path.eval(lam[i], mp);
        f[i] = z[0];
        g[i] = z[1];
    }
    let eta: Vec<f64> = pts
        .iter()
        .enumerate()
        .map(|(i, p)| p.q.eval(f[i], g[i]))
        .collect();
    let (imin, eta0) = eta
        .iter()
        .cloned()
        .enumerate()
        .fold((0, f64::INFINITY), |b, v| if v.1 < b.1 { v } else { b });
    if eta0 <= 0.0 {
        return Err(SynthError::EtaNotPositive {
            theta: grid[imin],
            eta: eta0,
        });
    }
    Ok(ContinuousFG {
        f,
        g,
        taus,
        exterior_point: mp,
        path,
        eta,
        eta0,
        q: pts.into_iter().map(|p| p.q).collect(),
    })
}

fn smoothing_degrees(lo: usize, hi: usize) -> Vec<usize> {
    let mut v = Vec::new();
    let mut d = lo.max(1);
    while d <= hi {
        v.push(d);
        d = if d < 4 { d + 1 } else { d + d / 2 };
    }
    if v.last() != Some(&hi) {
        v.push(hi);
    }
    v
}

/// Truncated Fourier fits of F, G, escalating the degree until
/// `min η > η₀/2` on the construction grid.
pub fn smooth_fg(cont: &ContinuousFG, opts: &FgOptions) -> Result<SmoothFG, SynthError> {
    let n = cont.f.len();
    let hi = opts.smooth_max_degree.min(n / 2 - 1);
    let scale = cont
        .f
        .iter()
        .chain(&cont.g)
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(1.0);
    let full_f = TrigPoly::from_uniform_samples(&cont.f, n / 2 - 1);
    let full_g = TrigPoly::from_uniform_samples(&cont.g, n / 2 - 1);
    // already a trig polynomial: keep it exactly
    let exact = (0..=hi).find(|&d| full_f.tail(d).max(full_g.tail(d)) < 1e-12 * scale);
    let degrees = match exact {
        Some(d) => vec![d],
        None => smoothing_degrees(opts.smooth_min_degree, hi),
    };
    let mut last = f64::NEG_INFINITY;
    for d in degrees {
        let fs = full_f.with_degree(d);
        let gs = full_g.with_degree(d);
        let fv = fs.sample_uniform(n);
        let gv = gs.sample_uniform(n);
        let mut min_eta = f64::INFINITY;
        let mut dev: f64 = 0.0;
        let mut lip: f64 = 0.0;
        for i in 0..n {
            let q = &cont.q[i];
            min_eta = min_eta.min(q.eval(fv[i], gv[i]));
            let df = fv[i] - cont.f[i];
            let dg = gv[i] - cont.g[i];
            let delta = df.hypot(dg);
            dev = dev.max(delta);
            let gr = q.grad(cont.f[i], cont.g[i]);
            lip = lip.max(gr[0].hypot(gr[1]) + 0.5 * q.hessian_norm() * delta);
        }
        last = min_eta;
        if min_eta > 0.5 * cont.eta0 {
            return Ok(SmoothFG {
                f: fs,
                g: gs,
                degree: d,
                min_eta,
                deviation: dev,
                lipschitz: lip,
            });
        }
    }
    Err(SynthError::SmoothingFailed {
        degree: hi,
        min_eta: last,
    })
}

/// β, continuous and smoothed F, G in one pass.
pub fn synthesize(
    frame: &FrameField,
    beta_opts: &BetaOptions,
    fg_opts: &FgOptions,
) -> Result<(BetaFunction, ContinuousFG, SmoothFG), SynthError> {
    let beta = choose_beta(frame, beta_opts)?;
    let cont = construct_fg(frame, &beta, fg_opts)?;
    let smooth = smooth_fg(&cont, fg_opts)?;
    Ok((beta, cont, smooth))
}
