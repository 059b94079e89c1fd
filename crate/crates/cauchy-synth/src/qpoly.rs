use linkgeom::{FrameField, FramePoint};
use serde::{Deserialize, Serialize};
use stag_core::TrigPoly;

use crate::SynthError;

/// Frame and β data at one point of the link; `dbeta` is the arclength
/// derivative.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointData {
    pub fp: FramePoint,
    pub beta: f64,
    pub dbeta: f64,
}

impl PointData {
    pub fn new(frame: &FrameField, beta: &TrigPoly, theta: f64) -> Self {
        let b = beta.eval_derivs(theta, 1);
        PointData {
            fp: frame.at(theta),
            beta: b[0],
            dbeta: b[1] * frame.ds(),
        }
    }

    pub fn t3(&self) -> f64 {
        self.fp.t[2]
    }
}

/// `Q(F, G) = A F² + B G² + C F G + D F + E G + F₀`, the reduced normal
/// determinant as a quadratic in the free second-order data.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct QPolynomial {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
    pub e: f64,
    pub f0: f64,
    pub x_beta: f64,
    pub y_beta: f64,
}

impl QPolynomial {
    pub fn eval(&self, f: f64, g: f64) -> f64 {
        self.a * f * f + self.b * g * g + self.c * f * g + self.d * f + self.e * g + self.f0
    }

    pub fn grad(&self, f: f64, g: f64) -> [f64; 2] {
        [
            2.0 * self.a * f + self.c * g + self.d,
            2.0 * self.b * g + self.c * f + self.e,
        ]
    }

    /// `4AB - C²`.
    pub fn hessian_det(&self) -> f64 {
        4.0 * self.a * self.b - self.c * self.c
    }

    /// Spectral norm of the Hessian `[[2A, C], [C, 2B]]`.
    pub fn hessian_norm(&self) -> f64 {
        let (p, q, r) = (2.0 * self.a, self.c, 2.0 * self.b);
        let m = 0.5 * (p + r);
        let d = (0.25 * (p - r) * (p - r) + q * q).sqrt();
        (m.abs() + d).max((m - d).abs())
    }
}

pub fn q_coefficients(p: &PointData) -> QPolynomial {
    let fp = &p.fp;
    let (t, k, n) = (fp.t, fp.k, fp.n);
    let (beta, dbeta) = (p.beta, p.dbeta);
    let t3 = t[2];
    let c = fp.c();
    let mu = fp.mu();
    let x = dbeta * k[2] * t[0] + beta * c * t3 * n[0];
    let y = dbeta * k[2] * t[1] + beta * c * t3 * n[1];
    QPolynomial {
        a: -t3 * (k[0] * k[0] + k[1] * k[1]),
        b: -t3 * mu,
        c: -2.0 * t3 * (n[0] * k[0] + n[1] * k[1]),
        d: beta * t3 - 2.0 * t3 * (x * k[0] + y * k[1]),
        e: -2.0 * t3 * (x * n[0] + y * n[1]),
        f0: beta * (x * n[1] - y * n[0]) - t3 * (x * x + y * y),
        x_beta: x,
        y_beta: y,
    }
}

/// Unique extremum `(a_c, b_c)` of `Q` and its value `Q_c = β²μ/(4t₃)`.
pub fn q_extremum(p: &PointData, q: &QPolynomial) -> Result<(f64, f64, f64), SynthError> {
    let fp = &p.fp;
    let t3 = fp.t[2];
    if t3.abs() < 1e-10 {
        return Err(SynthError::HorizontalPointSingularity { t3 });
    }
    let (k, n) = (fp.k, fp.n);
    let (x, y) = (q.x_beta, q.y_beta);
    let mu = fp.mu();
    let den = 2.0 * t3 * t3;
    let ac = (p.beta * mu + 2.0 * t3 * (y * n[0] - x * n[1])) / den;
    let bc = -(p.beta * (k[0] * n[0] + k[1] * n[1]) + 2.0 * t3 * (y * k[0] - x * k[1])) / den;
    let qc = p.beta * p.beta * mu / (4.0 * t3);
    Ok((ac, bc, qc))
}

/// Reduced normal determinant `η = Q(F, G)`.
pub fn eta(frame: &FrameField, beta: &TrigPoly, f: &TrigPoly, g: &TrigPoly, theta: f64) -> f64 {
    let p = PointData::new(frame, beta, theta);
    q_coefficients(&p).eval(f.eval(theta), g.eval(theta))
}
