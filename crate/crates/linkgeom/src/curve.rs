use serde::{Deserialize, Serialize};
use stag_core::trig::adaptive_degree;
use stag_core::{uniform_grid, TrigPoly, TrigVec3, TAU};

use crate::vec3::{norm, sub};
use crate::GeomError;

/// Closed curve `φ: [0, 2π) → ℝ²×ℝ₊` given by trigonometric polynomials.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpacetimeCurve {
    pub coeffs: TrigVec3,
    /// Arclength.
    pub length: f64,
    /// `+1` when the orientation follows increasing θ.
    pub orientation: i8,
}

impl SpacetimeCurve {
    /// Curve from coefficients; the length is computed spectrally.
    pub fn new(coeffs: TrigVec3) -> Self {
        let length = curve_length(&coeffs);
        SpacetimeCurve {
            coeffs,
            length,
            orientation: 1,
        }
    }

    pub fn point(&self, theta: f64) -> [f64; 3] {
        self.coeffs.eval(theta)
    }

    /// Parameter derivatives `φ, φ', ..., φ^(m)`.
    pub fn derivs(&self, theta: f64, m: usize) -> Vec<[f64; 3]> {
        self.coeffs.eval_derivs(theta, m)
    }

    pub fn speed(&self, theta: f64) -> f64 {
        norm(self.derivs(theta, 1)[1])
    }

    pub fn degree(&self) -> usize {
        self.coeffs.degree()
    }

    pub fn min_time(&self, n: usize) -> f64 {
        self.coeffs.0[2]
            .sample_uniform(n)
            .into_iter()
            .fold(f64::INFINITY, f64::min)
    }

    /// Largest relative deviation of `|φ'|` from `l/2π` over `n` samples.
    pub fn speed_deviation(&self, n: usize) -> f64 {
        let c = self.length / TAU;
        uniform_grid(n)
            .iter()
            .map(|&u| (self.speed(u) - c).abs() / c)
            .fold(0.0, f64::max)
    }

    /// Same image traversed the other way, `θ ↦ -θ`.
    pub fn reversed(&self) -> Self {
        SpacetimeCurve {
            coeffs: self.coeffs.reversed(),
            length: self.length,
            orientation: self.orientation,
        }
    }

    /// Smallest distance between samples whose arclength separation
    /// exceeds `min_sep`.
    pub fn self_clearance(&self, n: usize, min_sep: f64) -> f64 {
        let pts = self.coeffs.sample_uniform(n);
        let ds = self.length / n as f64;
        let mut best = f64::INFINITY;
        for i in 0..n {
            for j in i + 1..n {
                let k = (j - i).min(n - (j - i));
                if k as f64 * ds <= min_sep {
                    continue;
                }
                best = best.min(norm(sub(pts[i], pts[j])));
            }
        }
        best
    }
}

fn curve_length(c: &TrigVec3) -> f64 {
    // the speed is analytic and periodic, so the trapezoid rule converges
    // geometrically
    let mut n = 64.max(8 * c.degree());
    let mut prev = f64::NAN;
    loop {
        let d = c.deriv().sample_uniform(n);
        let l = TAU * d.iter().map(|v| norm(*v)).sum::<f64>() / n as f64;
        if (l - prev).abs() < 1e-14 * l || n > 1 << 18 {
            return l;
        }
        prev = l;
        n *= 2;
    }
}

/// Least-squares trigonometric fit to an ordered closed loop of samples,
/// taken at equally spaced parameter values. Returns the curve and its
/// largest deviation from the samples.
pub fn analytic_fit(
    samples: &[[f64; 3]],
    degree: usize,
    tol: f64,
) -> Result<(SpacetimeCurve, f64), GeomError> {
    let need = 2 * degree + 1;
    if samples.len() < need {
        return Err(GeomError::TooFewSamples {
            need,
            got: samples.len(),
        });
    }
    let n = samples.len();
    let coeffs = TrigVec3::from_uniform_samples(samples, degree);
    let fitted = coeffs.sample_uniform(n);
    let deviation = fitted
        .iter()
        .zip(samples)
        .map(|(a, b)| norm(sub(*a, *b)))
        .fold(0.0, f64::max);
    if deviation > tol {
        return Err(GeomError::FitToleranceExceeded {
            deviation,
            tol,
            degree,
        });
    }
    let curve = SpacetimeCurve::new(coeffs);
    let min_t = curve.min_time(4096.max(16 * degree));
    if min_t <= 0.0 {
        return Err(GeomError::NonPositiveTime { min_t });
    }
    Ok((curve, deviation))
}

/// Constant-speed reparametrization of the same image.
pub fn arclength_reparametrize(curve: &SpacetimeCurve) -> Result<SpacetimeCurve, GeomError> {
    let dphi = curve.coeffs.deriv();
    let mut m = 1024.max(16 * curve.degree().next_power_of_two());
    loop {
        let speeds: Vec<f64> = dphi.sample_uniform(m).iter().map(|v| norm(*v)).collect();
        let min_speed = speeds.iter().cloned().fold(f64::INFINITY, f64::min);
        if min_speed < 1e-8 {
            return Err(GeomError::DegenerateCurve { min_speed });
        }
        let speed = TrigPoly::from_uniform_samples(&speeds, m / 2 - 1);
        let length = speed.integral();
        let s_per = speed.antiderivative();
        let s0 = s_per.eval(0.0);
        // normalized arclength θ(u) = 2π/l·(a0·u + S(u) - S(0))
        let theta_of = |u: f64| -> (f64, f64) {
            let v = TAU / length * (speed.a0 * u + s_per.eval(u) - s0);
            let dv = TAU / length * speed.eval(u);
            (v, dv)
        };
        let targets = uniform_grid(m);
        let mut us = Vec::with_capacity(m);
        let mut u = 0.0;
        for &th in &targets {
            for _ in 0..60 {
                let (v, dv) = theta_of(u);
                let step = (v - th) / dv;
                u -= step;
                if step.abs() < 1e-15 {
                    break;
                }
            }
            us.push(u);
        }
        let pts: Vec<[f64; 3]> = us.iter().map(|&u| curve.point(u)).collect();
        let full = TrigVec3::from_uniform_samples(&pts, m / 2 - 1);
        let scale = pts.iter().map(|p| norm(*p)).fold(0.0, f64::max).max(1.0);
        let hi = m / 2 - 1;
        // cut at the roundoff floor seen in the top quarter of the spectrum
        let noise = full.tail(hi * 3 / 4);
        let d = adaptive_degree(|d| full.tail(d), 1, hi, (4.0 * noise).max(1e-17 * scale));
        if d < hi * 3 / 4 || m >= 1 << 16 {
            let coeffs = full.with_degree(d);
            let mut out = SpacetimeCurve::new(coeffs);
            out.orientation = curve.orientation;
            return Ok(out);
        }
        m *= 2;
    }
}

/// Close an open polyline with a cubic Hermite return arc kept in `t > 0`
/// and resample the loop uniformly in arclength. Returns the closed samples
/// and the parameter fraction `[0, f)` covered by the original arc.
pub fn close_open_link(points: &[[f64; 3]], n_out: usize) -> (Vec<[f64; 3]>, f64) {
    let m = points.len();
    assert!(m >= 3, "need at least three points");
    let p0 = points[0];
    let p1 = points[m - 1];
    let t0 = sub(points[1], points[0]);
    let t1 = sub(points[m - 1], points[m - 2]);
    let chord = norm(sub(p0, p1)).max(1e-3);
    let unit = |v: [f64; 3]| crate::vec3::scale(v, chord / norm(v).max(1e-300));
    let (m1, m0) = (unit(t1), unit(t0));
    let k = 64;
    let mut ret: Vec<[f64; 3]> = (1..k)
        .map(|i| {
            let s = i as f64 / k as f64;
            let h00 = 2.0 * s * s * s - 3.0 * s * s + 1.0;
            let h10 = s * s * s - 2.0 * s * s + s;
            let h01 = -2.0 * s * s * s + 3.0 * s * s;
            let h11 = s * s * s - s * s;
            let mut p = [0.0; 3];
            for c in 0..3 {
                p[c] = h00 * p1[c] + h10 * m1[c] + h01 * p0[c] + h11 * m0[c];
            }
            p
        })
        .collect();
    let floor = 0.5 * p0[2].min(p1[2]);
    let lowest = ret.iter().map(|p| p[2]).fold(f64::INFINITY, f64::min);
    if lowest < floor {
        for (i, p) in ret.iter_mut().enumerate() {
            let s = (i + 1) as f64 / k as f64;
            p[2] += (floor - lowest) * (std::f64::consts::PI * s).sin();
        }
    }
    let mut poly: Vec<[f64; 3]> = points.to_vec();
    poly.extend(ret);
    let n = poly.len();
    let mut cum = vec![0.0; n + 1];
    for i in 0..n {
        cum[i + 1] = cum[i] + norm(sub(poly[(i + 1) % n], poly[i]));
    }
    let total = cum[n];
    let mut out = Vec::with_capacity(n_out);
    let mut j = 0;
    for q in 0..n_out {
        let s = total * q as f64 / n_out as f64;
        while cum[j + 1] < s {
            j += 1;
        }
        let w = (s - cum[j]) / (cum[j + 1] - cum[j]);
        let a = poly[j];
        let b = poly[(j + 1) % n];
        out.push([
            a[0] + w * (b[0] - a[0]),
            a[1] + w * (b[1] - a[1]),
            a[2] + w * (b[2] - a[2]),
        ]);
    }
    (out, cum[m - 1] / total)
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) fn circle() -> SpacetimeCurve {
        SpacetimeCurve::new(TrigVec3([
            TrigPoly::new(0.0, vec![1.0], vec![0.0]),
            TrigPoly::zero(1),
            TrigPoly::new(2.0, vec![0.0], vec![1.0]),
        ]))
    }

    #[test]
    fn circle_length_is_two_pi() {
        assert!((circle().length - TAU).abs() < 1e-13);
    }

    #[test]
    fn reparametrized_ellipse_has_constant_speed() {
        let e = SpacetimeCurve::new(TrigVec3([
            TrigPoly::new(0.0, vec![2.0], vec![0.0]),
            TrigPoly::zero(1),
            TrigPoly::new(2.0, vec![0.0], vec![1.0]),
        ]));
        let r = arclength_reparametrize(&e).unwrap();
        assert!(r.speed_deviation(2048) < 1e-8);
        assert!((r.length - e.length).abs() < 1e-12);
    }
}
