use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::{linalg, TAU};

/// `p(u) = a0 + Σ_j cos[j-1]·cos(ju) + sin[j-1]·sin(ju)`, period 2π.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigPoly {
    pub a0: f64,
    pub cos: Vec<f64>,
    pub sin: Vec<f64>,
}

impl TrigPoly {
    pub fn zero(degree: usize) -> Self {
        TrigPoly {
            a0: 0.0,
            cos: vec![0.0; degree],
            sin: vec![0.0; degree],
        }
    }

    pub fn constant(c: f64) -> Self {
        TrigPoly {
            a0: c,
            cos: Vec::new(),
            sin: Vec::new(),
        }
    }

    pub fn new(a0: f64, cos: Vec<f64>, sin: Vec<f64>) -> Self {
        let d = cos.len().max(sin.len());
        let mut p = TrigPoly { a0, cos, sin };
        p.cos.resize(d, 0.0);
        p.sin.resize(d, 0.0);
        p
    }

    pub fn degree(&self) -> usize {
        self.cos.len()
    }

    /// Pad or truncate to exactly `degree` harmonics.
    pub fn with_degree(&self, degree: usize) -> Self {
        let mut p = self.clone();
        p.cos.resize(degree, 0.0);
        p.sin.resize(degree, 0.0);
        p
    }

    /// Number of real coefficients, `2d + 1`.
    pub fn n_coeffs(&self) -> usize {
        2 * self.degree() + 1
    }

    /// Coefficients packed as `[a0, c1, s1, c2, s2, ...]`.
    pub fn packed(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(self.n_coeffs());
        v.push(self.a0);
        for j in 0..self.degree() {
            v.push(self.cos[j]);
            v.push(self.sin[j]);
        }
        v
    }

    pub fn from_packed(v: &[f64]) -> Self {
        assert!(v.len() % 2 == 1, "packed length must be odd");
        let d = (v.len() - 1) / 2;
        TrigPoly {
            a0: v[0],
            cos: (0..d).map(|j| v[1 + 2 * j]).collect(),
            sin: (0..d).map(|j| v[2 + 2 * j]).collect(),
        }
    }

    /// Basis row matching [`packed`](Self::packed) at `u`.
    pub fn basis_row(u: f64, degree: usize) -> Vec<f64> {
        let mut row = Vec::with_capacity(2 * degree + 1);
        row.push(1.0);
        for j in 1..=degree {
            let a = j as f64 * u;
            row.push(a.cos());
            row.push(a.sin());
        }
        row
    }

    pub fn eval(&self, u: f64) -> f64 {
        let (s1, c1) = u.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        let mut acc = self.a0;
        for j in 0..self.degree() {
            let cn = c * c1 - s * s1;
            let sn = s * c1 + c * s1;
            c = cn;
            s = sn;
            acc += self.cos[j] * c + self.sin[j] * s;
        }
        acc
    }

    /// Value and derivatives `p, p', ..., p^(m)` at `u`.
    pub fn eval_derivs(&self, u: f64, m: usize) -> Vec<f64> {
        let mut out = vec![0.0; m + 1];
        out[0] = self.a0;
        let (s1, c1) = u.sin_cos();
        let (mut c, mut s) = (1.0, 0.0);
        for j in 0..self.degree() {
            let cn = c * c1 - s * s1;
            let sn = s * c1 + c * s1;
            c = cn;
            s = sn;
            let w = (j + 1) as f64;
            let (a, b) = (self.cos[j], self.sin[j]);
            // k-th derivative of a cos + b sin cycles through four phases.
            let mut f = 1.0;
            for (k, o) in out.iter_mut().enumerate() {
                let v = match k % 4 {
                    0 => a * c + b * s,
                    1 => -a * s + b * c,
                    2 => -a * c - b * s,
                    _ => a * s - b * c,
                };
                *o += f * v;
                f *= w;
            }
        }
        out
    }

    pub fn deriv(&self) -> TrigPoly {
        let d = self.degree();
        let mut p = TrigPoly::zero(d);
        for j in 0..d {
            let w = (j + 1) as f64;
            p.cos[j] = w * self.sin[j];
            p.sin[j] = -w * self.cos[j];
        }
        p
    }

    /// Zero-mean antiderivative; the constant term of `self` is ignored.
    pub fn antiderivative(&self) -> TrigPoly {
        let d = self.degree();
        let mut p = TrigPoly::zero(d);
        for j in 0..d {
            let w = (j + 1) as f64;
            p.cos[j] = -self.sin[j] / w;
            p.sin[j] = self.cos[j] / w;
        }
        p
    }

    /// `∫_0^{2π} p du`.
    pub fn integral(&self) -> f64 {
        TAU * self.a0
    }

    pub fn scale(&self, k: f64) -> TrigPoly {
        TrigPoly {
            a0: self.a0 * k,
            cos: self.cos.iter().map(|x| x * k).collect(),
            sin: self.sin.iter().map(|x| x * k).collect(),
        }
    }

    pub fn add(&self, other: &TrigPoly) -> TrigPoly {
        let d = self.degree().max(other.degree());
        let a = self.with_degree(d);
        let b = other.with_degree(d);
        TrigPoly {
            a0: a.a0 + b.a0,
            cos: a.cos.iter().zip(&b.cos).map(|(x, y)| x + y).collect(),
            sin: a.sin.iter().zip(&b.sin).map(|(x, y)| x + y).collect(),
        }
    }

    pub fn sub(&self, other: &TrigPoly) -> TrigPoly {
        self.add(&other.scale(-1.0))
    }

    /// Exact product via product-to-sum; degree is the sum of degrees.
    pub fn mul(&self, other: &TrigPoly) -> TrigPoly {
        let (da, db) = (self.degree(), other.degree());
        let d = da + db;
        // complex coefficients c_k for k in -d..=d
        let ca = self.complex_coeffs();
        let cb = other.complex_coeffs();
        let mut c = vec![Complex::new(0.0, 0.0); 2 * d + 1];
        for (i, x) in ca.iter().enumerate() {
            let ki = i as isize - da as isize;
            for (j, y) in cb.iter().enumerate() {
                let kj = j as isize - db as isize;
                c[(ki + kj + d as isize) as usize] += x * y;
            }
        }
        TrigPoly::from_complex(&c, d)
    }

    fn complex_coeffs(&self) -> Vec<Complex<f64>> {
        let d = self.degree();
        let mut c = vec![Complex::new(0.0, 0.0); 2 * d + 1];
        c[d] = Complex::new(self.a0, 0.0);
        for j in 0..d {
            let z = Complex::new(self.cos[j] / 2.0, -self.sin[j] / 2.0);
            c[d + j + 1] = z;
            c[d - j - 1] = z.conj();
        }
        c
    }

    fn from_complex(c: &[Complex<f64>], d: usize) -> TrigPoly {
        let mut p = TrigPoly::zero(d);
        p.a0 = c[d].re;
        for j in 0..d {
            let z = c[d + j + 1];
            p.cos[j] = 2.0 * z.re;
            p.sin[j] = -2.0 * z.im;
        }
        p
    }

    /// Least-squares fit to uniform samples `v_k = p(2πk/n)`; exact
    /// truncated DFT when `n > 2·degree`.
    pub fn from_uniform_samples(values: &[f64], degree: usize) -> TrigPoly {
        let n = values.len();
        assert!(n > 2 * degree, "need more than 2·degree uniform samples");
        let mut buf: Vec<Complex<f64>> = values.iter().map(|&v| Complex::new(v, 0.0)).collect();
        let mut planner = FftPlanner::new();
        planner.plan_fft_forward(n).process(&mut buf);
        let inv = 1.0 / n as f64;
        let mut p = TrigPoly::zero(degree);
        p.a0 = buf[0].re * inv;
        for j in 1..=degree {
            p.cos[j - 1] = 2.0 * buf[j].re * inv;
            p.sin[j - 1] = -2.0 * buf[j].im * inv;
        }
        p
    }

    /// Values on the uniform grid `2πk/n`.
    pub fn sample_uniform(&self, n: usize) -> Vec<f64> {
        let d = self.degree();
        if n <= 2 * d {
            return crate::uniform_grid(n).iter().map(|&u| self.eval(u)).collect();
        }
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        buf[0] = Complex::new(self.a0, 0.0);
        for j in 0..d {
            let z = Complex::new(self.cos[j] / 2.0, -self.sin[j] / 2.0);
            buf[j + 1] = z;
            buf[n - j - 1] = z.conj();
        }
        let mut planner = FftPlanner::new();
        planner.plan_fft_inverse(n).process(&mut buf);
        buf.iter().map(|z| z.re).collect()
    }

    /// Least squares on arbitrary parameter values.
    pub fn fit(us: &[f64], values: &[f64], degree: usize) -> TrigPoly {
        let m = 2 * degree + 1;
        let a = DMatrix::from_fn(us.len(), m, |i, k| {
            if k == 0 {
                1.0
            } else {
                let j = ((k + 1) / 2) as f64;
                if k % 2 == 1 {
                    (j * us[i]).cos()
                } else {
                    (j * us[i]).sin()
                }
            }
        });
        let b = DVector::from_column_slice(values);
        let sol = linalg::lstsq(&a, &b, 1e-14);
        TrigPoly::from_packed(sol.x.as_slice())
    }

    /// Largest absolute coefficient among harmonics `> keep`.
    pub fn tail(&self, keep: usize) -> f64 {
        (keep..self.degree())
            .map(|j| self.cos[j].abs().max(self.sin[j].abs()))
            .fold(0.0, f64::max)
    }

    /// Drop trailing harmonics whose coefficients are all below `tol`.
    pub fn trimmed(&self, tol: f64) -> TrigPoly {
        let mut d = self.degree();
        while d > 0 && self.cos[d - 1].abs() < tol && self.sin[d - 1].abs() < tol {
            d -= 1;
        }
        self.with_degree(d)
    }

    /// Sup norm sampled on a uniform grid of `n` points.
    pub fn sup_norm(&self, n: usize) -> f64 {
        self.sample_uniform(n).iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Reparametrize by `u -> -u`.
    pub fn reversed(&self) -> TrigPoly {
        TrigPoly {
            a0: self.a0,
            cos: self.cos.clone(),
            sin: self.sin.iter().map(|s| -s).collect(),
        }
    }
}

/// Three trigonometric polynomials, e.g. a closed spacetime curve or a field
/// of vectors along it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrigVec3(pub [TrigPoly; 3]);

impl TrigVec3 {
    pub fn eval(&self, u: f64) -> [f64; 3] {
        [self.0[0].eval(u), self.0[1].eval(u), self.0[2].eval(u)]
    }

    /// `out[k]` is the k-th derivative vector.
    pub fn eval_derivs(&self, u: f64, m: usize) -> Vec<[f64; 3]> {
        let a = self.0[0].eval_derivs(u, m);
        let b = self.0[1].eval_derivs(u, m);
        let c = self.0[2].eval_derivs(u, m);
        (0..=m).map(|k| [a[k], b[k], c[k]]).collect()
    }

    pub fn deriv(&self) -> TrigVec3 {
        TrigVec3([self.0[0].deriv(), self.0[1].deriv(), self.0[2].deriv()])
    }

    pub fn degree(&self) -> usize {
        self.0.iter().map(TrigPoly::degree).max().unwrap_or(0)
    }

    pub fn from_uniform_samples(values: &[[f64; 3]], degree: usize) -> TrigVec3 {
        let comp = |i: usize| {
            let v: Vec<f64> = values.iter().map(|p| p[i]).collect();
            TrigPoly::from_uniform_samples(&v, degree)
        };
        TrigVec3([comp(0), comp(1), comp(2)])
    }

    pub fn sample_uniform(&self, n: usize) -> Vec<[f64; 3]> {
        let a = self.0[0].sample_uniform(n);
        let b = self.0[1].sample_uniform(n);
        let c = self.0[2].sample_uniform(n);
        (0..n).map(|k| [a[k], b[k], c[k]]).collect()
    }

    pub fn reversed(&self) -> TrigVec3 {
        TrigVec3([self.0[0].reversed(), self.0[1].reversed(), self.0[2].reversed()])
    }

    pub fn tail(&self, keep: usize) -> f64 {
        self.0.iter().map(|p| p.tail(keep)).fold(0.0, f64::max)
    }

    pub fn with_degree(&self, d: usize) -> TrigVec3 {
        TrigVec3([
            self.0[0].with_degree(d),
            self.0[1].with_degree(d),
            self.0[2].with_degree(d),
        ])
    }
}

/// Smallest degree in `[lo, hi]` whose discarded tail is below `tol`, for a
/// spectrum computed at degree `hi`.
pub fn adaptive_degree(tail_at: impl Fn(usize) -> f64, lo: usize, hi: usize, tol: f64) -> usize {
    (lo..=hi).find(|&d| tail_at(d) < tol).unwrap_or(hi)
}

/// Root of `f` bracketed in `[a, b]` by bisection followed by Newton polish.
pub fn bracketed_root(
    f: impl Fn(f64) -> (f64, f64),
    mut a: f64,
    mut b: f64,
    tol: f64,
) -> f64 {
    let mut fa = f(a).0;
    for _ in 0..200 {
        if (b - a).abs() < 1e-6 {
            break;
        }
        let m = 0.5 * (a + b);
        let fm = f(m).0;
        if (fm < 0.0) == (fa < 0.0) {
            a = m;
            fa = fm;
        } else {
            b = m;
        }
    }
    let (lo, hi) = (a.min(b), a.max(b));
    let mut x = 0.5 * (a + b);
    for _ in 0..50 {
        let (v, d) = f(x);
        if d == 0.0 {
            break;
        }
        let step = v / d;
        let xn = x - step;
        if !(lo - 1e-6..=hi + 1e-6).contains(&xn) {
            break;
        }
        x = xn;
        if step.abs() < tol {
            break;
        }
    }
    x
}

/// `(-π, π]` representative of an angle difference.
pub fn angle_diff(a: f64, b: f64) -> f64 {
    let mut d = (a - b).rem_euclid(TAU);
    if d > PI {
        d -= TAU;
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> TrigPoly {
        TrigPoly::new(0.3, vec![1.0, -0.5, 0.25], vec![0.2, 0.0, -0.7])
    }

    #[test]
    fn derivatives_agree_with_deriv_poly() {
        let p = sample();
        let d1 = p.deriv();
        let d2 = d1.deriv();
        let d3 = d2.deriv();
        for &u in &[0.0, 0.4, 2.1, 5.9] {
            let e = p.eval_derivs(u, 3);
            assert!((e[0] - p.eval(u)).abs() < 1e-13);
            assert!((e[1] - d1.eval(u)).abs() < 1e-13);
            assert!((e[2] - d2.eval(u)).abs() < 1e-12);
            assert!((e[3] - d3.eval(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn product_matches_pointwise() {
        let p = sample();
        let q = TrigPoly::new(-1.0, vec![0.0, 2.0], vec![1.5, 0.1]);
        let r = p.mul(&q);
        assert_eq!(r.degree(), 5);
        for &u in &[0.1, 1.3, 3.3, 6.0] {
            assert!((r.eval(u) - p.eval(u) * q.eval(u)).abs() < 1e-12);
        }
    }

    #[test]
    fn uniform_fit_round_trip() {
        let p = sample();
        let v = p.sample_uniform(32);
        let q = TrigPoly::from_uniform_samples(&v, 3);
        for (a, b) in p.packed().iter().zip(q.packed()) {
            assert!((a - b).abs() < 1e-13);
        }
        let g = crate::uniform_grid(32);
        for (u, x) in g.iter().zip(&v) {
            assert!((p.eval(*u) - x).abs() < 1e-13);
        }
    }

    #[test]
    fn antiderivative_inverts_deriv() {
        let p = sample();
        let q = p.deriv().antiderivative();
        for &u in &[0.0, 1.0, 4.0] {
            assert!((q.eval(u) + p.a0 - p.eval(u)).abs() < 1e-13);
        }
    }

    #[test]
    fn nonuniform_fit_recovers_coefficients() {
        let p = sample();
        let us: Vec<f64> = (0..40).map(|k| (k as f64 * 0.731).rem_euclid(TAU)).collect();
        let vs: Vec<f64> = us.iter().map(|&u| p.eval(u)).collect();
        let q = TrigPoly::fit(&us, &vs, 3);
        for (a, b) in p.packed().iter().zip(q.packed()) {
            assert!((a - b).abs() < 1e-10);
        }
    }

    #[test]
    fn bracketed_root_finds_cos_zero() {
        let r = bracketed_root(|x| (x.cos(), -x.sin()), 1.0, 2.0, 1e-15);
        assert!((r - std::f64::consts::FRAC_PI_2).abs() < 1e-14);
    }
}
