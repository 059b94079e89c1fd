use nalgebra::{Matrix3, Vector3};
use stag_core::trig::angle_diff;
use stag_core::{uniform_grid, wrap_angle, TAU};

use crate::frame::{FrameField, FramePoint};
use crate::vec3::{add, axpy, cross, det3, dot, norm, scale, sub, V3};
use crate::GeomError;

/// Tubular coordinates `(θ, σ, ρ)` around a framed curve: `Θ₀(θ,σ) = φ + σk`
/// sweeps the surface Σ and `Θ₁ = Θ₀ + ρN` moves off it along its unit
/// normal `N`.
pub struct Tube<'a> {
    pub frame: &'a FrameField,
    pub sigma1: f64,
    pub rho1: f64,
    centers: Vec<V3>,
}

/// Values needed to evaluate `Θ₁` and its Jacobian at `(θ, σ)`.
struct Local {
    phi: V3,
    k: V3,
    /// `∂_s Θ₀ = t + σ k'`
    e: V3,
    /// `∂_s e = t' + σ k''`
    de: V3,
    dk: V3,
}

impl<'a> Tube<'a> {
    pub fn new(frame: &'a FrameField, sigma1: f64, rho1: f64) -> Self {
        let n = 1024.max(8 * frame.curve.degree().next_power_of_two());
        let centers = frame.curve.coeffs.sample_uniform(n);
        Tube {
            frame,
            sigma1,
            rho1,
            centers,
        }
    }

    fn local(&self, theta: f64, sigma: f64) -> Local {
        let (phi, k) = self.frame.arc_jets(theta, 3);
        Local {
            phi: phi[0],
            k: k[0],
            e: axpy(phi[1], sigma, k[1]),
            de: axpy(phi[2], sigma, k[2]),
            dk: k[1],
        }
    }

    pub fn theta0(&self, theta: f64, sigma: f64) -> V3 {
        let l = self.local(theta, sigma);
        axpy(l.phi, sigma, l.k)
    }

    /// Unit normal of Σ, `(∂_sΘ₀ × k)/|·|`.
    pub fn normal(&self, theta: f64, sigma: f64) -> V3 {
        let l = self.local(theta, sigma);
        let w = cross(l.e, l.k);
        scale(w, 1.0 / norm(w))
    }

    pub fn theta1(&self, theta: f64, sigma: f64, rho: f64) -> V3 {
        let l = self.local(theta, sigma);
        let w = cross(l.e, l.k);
        let nn = scale(w, 1.0 / norm(w));
        axpy(axpy(l.phi, sigma, l.k), rho, nn)
    }

    /// Jacobian of `Θ₁` with columns `∂_s, ∂_σ, ∂_ρ` (s = arclength).
    pub fn jacobian(&self, theta: f64, sigma: f64, rho: f64) -> Matrix3<f64> {
        let l = self.local(theta, sigma);
        let w = cross(l.e, l.k);
        let nw = norm(w);
        let nn = scale(w, 1.0 / nw);
        let proj = |dw: V3| -> V3 { scale(sub(dw, scale(nn, dot(nn, dw))), 1.0 / nw) };
        let dw_s = add(cross(l.de, l.k), cross(l.e, l.dk));
        let dw_sigma = cross(l.dk, l.k);
        let cs = axpy(l.e, rho, proj(dw_s));
        let cg = axpy(l.k, rho, proj(dw_sigma));
        Matrix3::from_columns(&[Vector3::from(cs), Vector3::from(cg), Vector3::from(nn)])
    }

    /// Newton inverse `(x, y, t) ↦ (θ, σ, ρ)`, without the tube-membership
    /// check.
    pub fn inverse_unchecked(&self, x: V3) -> Option<(f64, f64, f64)> {
        let n = self.centers.len();
        let (i0, _) = self
            .centers
            .iter()
            .enumerate()
            .map(|(i, c)| (i, norm(sub(*c, x))))
            .fold((0, f64::INFINITY), |b, v| if v.1 < b.1 { v } else { b });
        let mut th = TAU * i0 as f64 / n as f64;
        let fp = self.frame.at(th);
        let d = sub(x, fp.phi);
        let mut sg = dot(d, fp.k);
        let mut rh = dot(d, fp.n);
        // settle θ on the centerline first
        for _ in 0..20 {
            let (p, _) = self.frame.arc_jets(th, 2);
            let r = sub(x, p[0]);
            let g = dot(r, p[1]);
            let h = -dot(p[1], p[1]) + dot(r, p[2]);
            if h >= 0.0 {
                break;
            }
            let step = g / h * self.frame.ds();
            th -= step;
            if step.abs() < 1e-14 {
                break;
            }
        }
        let scale_x = norm(x).max(1.0);
        for _ in 0..60 {
            let f = sub(self.theta1(th, sg, rh), x);
            let res = norm(f);
            let j = self.jacobian(th, sg, rh);
            let step = j.lu().solve(&Vector3::from(f))?;
            th -= step[0] * self.frame.ds();
            sg -= step[1];
            rh -= step[2];
            // one polishing step past the tolerance
            if res < 1e-13 * scale_x {
                return Some((wrap_angle(th), sg, rh));
            }
            if !(th.is_finite() && sg.is_finite() && rh.is_finite()) {
                return None;
            }
        }
        let res = norm(sub(self.theta1(th, sg, rh), x));
        (res < 1e-11 * scale_x).then(|| (wrap_angle(th), sg, rh))
    }

    pub fn contains_params(&self, sigma: f64, rho: f64) -> bool {
        sigma.abs() <= self.sigma1 * (1.0 + 1e-9) && rho.abs() <= self.rho1 * (1.0 + 1e-9)
    }

    /// Newton inverse with the tube-membership check.
    pub fn inverse(&self, x: V3) -> Result<(f64, f64, f64), GeomError> {
        let err = GeomError::InverseDiverged {
            x: x[0],
            y: x[1],
            t: x[2],
        };
        match self.inverse_unchecked(x) {
            Some((th, s, r)) if self.contains_params(s, r) => Ok((th, s, r)),
            _ => Err(err),
        }
    }

    /// Sampled injectivity test: positive Jacobian, round trip through the
    /// inverse, and radius below the reach. Also checks `t > 0` on the
    /// sampled closure.
    pub fn verify(&self, n_theta: usize) -> bool {
        let reach = reach(self.frame);
        if self.sigma1.hypot(self.rho1) >= reach {
            return false;
        }
        let fr = [-1.0, -0.5, 0.0, 0.5, 1.0];
        for th in uniform_grid(n_theta) {
            for &a in &fr {
                for &b in &fr {
                    let (s, r) = (a * self.sigma1, b * self.rho1);
                    let p = self.theta1(th, s, r);
                    if p[2] <= 0.0 {
                        return false;
                    }
                    let jm = self.jacobian(th, s, r);
                    if jm.determinant() <= 0.0 {
                        return false;
                    }
                    match self.inverse_unchecked(p) {
                        Some((th2, s2, r2)) => {
                            if angle_diff(th2, th).abs() > 1e-8
                                || (s2 - s).abs() > 1e-8
                                || (r2 - r).abs() > 1e-8
                            {
                                return false;
                            }
                        }
                        None => return false,
                    }
                }
            }
        }
        true
    }
}

/// Reach estimate: the smaller of the minimal curvature radius and half the
/// self-clearance between points further apart than π curvature radii.
pub fn reach(frame: &FrameField) -> f64 {
    let n = 1024;
    let kmax = uniform_grid(n)
        .into_iter()
        .map(|u| norm(frame.at(u).dt))
        .fold(0.0, f64::max);
    let rc = if kmax > 0.0 { 1.0 / kmax } else { f64::INFINITY };
    let sep = if rc.is_finite() {
        std::f64::consts::PI * rc
    } else {
        frame.curve.length / 4.0
    };
    let clear = frame.curve.self_clearance(512, sep);
    rc.min(clear / 2.0)
}

/// Default half-width `min(0.2, reach/4)`.
pub fn default_radius(frame: &FrameField) -> f64 {
    (reach(frame) / 4.0).min(0.2)
}

/// Verify the tube, halving both half-widths up to six times. Returns the
/// accepted `(σ₁, ρ₁)`.
pub fn tubular_maps(frame: &FrameField, sigma1: f64, rho1: f64) -> Result<(f64, f64), GeomError> {
    let (mut s, mut r) = (sigma1, rho1);
    for _ in 0..=6 {
        if Tube::new(frame, s, r).verify(128) {
            return Ok((s, r));
        }
        s *= 0.5;
        r *= 0.5;
    }
    Err(GeomError::TubeSelfIntersection { retries: 6 })
}

/// First and σ-derivatives of the coordinate functions at a point of the
/// curve. Row `i` of `grad` is `∇` of the i-th coordinate `(θ, σ, ρ)` with
/// respect to `(x, y, t)`, θ measured in arclength.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoordJet {
    pub grad: [[f64; 3]; 3],
    /// `∂_σ` of `grad`, same layout.
    pub dsigma_grad: [[f64; 3]; 3],
}

pub fn coord_jets(p: &FramePoint) -> CoordJet {
    let j = Matrix3::from_columns(&[
        Vector3::from(p.t),
        Vector3::from(p.k),
        Vector3::from(p.n),
    ]);
    // ∂_σ of the columns ∂_sΘ₁, ∂_σΘ₁, ∂_ρΘ₁ on the curve: k', 0, -c t
    let c = p.c();
    let dj = Matrix3::from_columns(&[
        Vector3::from(p.dk),
        Vector3::zeros(),
        Vector3::from(scale(p.t, -c)),
    ]);
    let inv = j.try_inverse().unwrap_or_else(|| j.transpose());
    let dinv = -inv * dj * inv;
    let to_arr = |m: Matrix3<f64>| -> [[f64; 3]; 3] {
        [
            [m[(0, 0)], m[(0, 1)], m[(0, 2)]],
            [m[(1, 0)], m[(1, 1)], m[(1, 2)]],
            [m[(2, 0)], m[(2, 1)], m[(2, 2)]],
        ]
    };
    CoordJet {
        grad: to_arr(inv),
        dsigma_grad: to_arr(dinv),
    }
}

/// `det(t, k, n)`; `+1` for a right-handed frame.
pub fn handedness(p: &FramePoint) -> f64 {
    det3(p.t, p.k, p.n)
}
