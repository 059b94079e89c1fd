use serde::{Deserialize, Serialize};

/// Operator annihilating the series: `∂_t − ∂_xx − ∂_yy` or the full
/// three-dimensional Laplacian.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Operator {
    Heat,
    Laplace,
}

/// Exponent triples `(i, j, k)` with `i + j + k ≤ d`, graded by total degree.
pub fn monomials(d: usize) -> Vec<[usize; 3]> {
    let mut out = Vec::new();
    for tot in 0..=d {
        for i in (0..=tot).rev() {
            for j in (0..=tot - i).rev() {
                out.push([i, j, tot - i - j]);
            }
        }
    }
    out
}

pub fn n_monomials(d: usize) -> usize {
    (d + 1) * (d + 2) * (d + 3) / 6
}

/// Position of an exponent triple in [`monomials`].
pub fn monomial_index(e: [usize; 3]) -> usize {
    let tot = e[0] + e[1] + e[2];
    let below = if tot == 0 { 0 } else { n_monomials(tot - 1) };
    // within a degree: i descending, then j descending
    let mut off = 0;
    for i in (e[0] + 1..=tot).rev() {
        off += tot - i + 1;
    }
    off += tot - e[0] - e[1];
    below + off
}

/// Polynomial in `(x − x₀, y − y₀, t − t₀)` up to total degree `degree`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TaylorSolution {
    pub base: [f64; 3],
    pub degree: usize,
    pub operator: Operator,
    /// Coefficients in [`monomials`] order.
    pub coeffs: Vec<f64>,
    pub residual: Option<ResidualReport>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub radius: f64,
    pub sup: f64,
    pub sup_half: f64,
    /// `log₂(sup / sup_half)`; `None` when both vanish.
    pub order: Option<f64>,
}

fn powers(x: f64, d: usize) -> Vec<f64> {
    let mut p = vec![1.0; d + 1];
    for i in 1..=d {
        p[i] = p[i - 1] * x;
    }
    p
}

impl TaylorSolution {
    pub fn zero(base: [f64; 3], degree: usize, operator: Operator) -> Self {
        TaylorSolution {
            base,
            degree,
            operator,
            coeffs: vec![0.0; n_monomials(degree)],
            residual: None,
        }
    }

    pub fn coeff(&self, e: [usize; 3]) -> f64 {
        if e[0] + e[1] + e[2] > self.degree {
            0.0
        } else {
            self.coeffs[monomial_index(e)]
        }
    }

    /// Mixed partial `∂ˣ^a ∂ʸ^b ∂ᵗ^c` at the point `p` (absolute coordinates).
    pub fn partial(&self, order: [usize; 3], p: [f64; 3]) -> f64 {
        let d = self.degree;
        let px = powers(p[0] - self.base[0], d);
        let py = powers(p[1] - self.base[1], d);
        let pt = powers(p[2] - self.base[2], d);
        let mut acc = 0.0;
        for (e, &c) in monomials(d).iter().zip(&self.coeffs) {
            if c == 0.0 || e[0] < order[0] || e[1] < order[1] || e[2] < order[2] {
                continue;
            }
            let mut f = c;
            for ax in 0..3 {
                for m in 0..order[ax] {
                    f *= (e[ax] - m) as f64;
                }
            }
            acc += f * px[e[0] - order[0]] * py[e[1] - order[1]] * pt[e[2] - order[2]];
        }
        acc
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.partial([0, 0, 0], p)
    }

    pub fn grad(&self, p: [f64; 3]) -> [f64; 3] {
        [
            self.partial([1, 0, 0], p),
            self.partial([0, 1, 0], p),
            self.partial([0, 0, 1], p),
        ]
    }

    /// Full 3×3 Hessian in `(x, y, t)`.
    pub fn hessian(&self, p: [f64; 3]) -> [[f64; 3]; 3] {
        let mut h = [[0.0; 3]; 3];
        for a in 0..3 {
            for b in 0..3 {
                let mut o = [0; 3];
                o[a] += 1;
                o[b] += 1;
                h[a][b] = self.partial(o, p);
            }
        }
        h
    }

    /// `∂_tP − ΔP` (heat) or `Δ₃P` (Laplace) at `p`.
    pub fn operator_residual(&self, p: [f64; 3]) -> f64 {
        let lap = self.partial([2, 0, 0], p) + self.partial([0, 2, 0], p);
        match self.operator {
            Operator::Heat => self.partial([0, 0, 1], p) - lap,
            Operator::Laplace => lap + self.partial([0, 0, 2], p),
        }
    }

    /// `Q(p) = P(b + R(p − b))` with `R` the rotation by `angle` in the
    /// `(x, y)` plane and `b` the base point.
    pub fn rotated_spatial(&self, angle: f64) -> TaylorSolution {
        let (c, s) = (angle.cos(), angle.sin());
        let binom = |n: usize, k: usize| -> f64 {
            (0..k).fold(1.0, |acc, m| acc * (n - m) as f64 / (m + 1) as f64)
        };
        let mut out = TaylorSolution::zero(self.base, self.degree, self.operator);
        for (e, &v) in monomials(self.degree).iter().zip(&self.coeffs) {
            if v == 0.0 {
                continue;
            }
            let [i, j, k] = *e;
            for a in 0..=i {
                let fa = binom(i, a) * c.powi(a as i32) * (-s).powi((i - a) as i32);
                for b in 0..=j {
                    let fb = binom(j, b) * s.powi(b as i32) * c.powi((j - b) as i32);
                    let idx = monomial_index([a + b, i - a + j - b, k]);
                    out.coeffs[idx] += v * fa * fb;
                }
            }
        }
        out
    }

    /// Rows `(i, j, k, coefficient)` for the coefficient table.
    pub fn table(&self) -> Vec<(usize, usize, usize, f64)> {
        monomials(self.degree)
            .into_iter()
            .zip(&self.coeffs)
            .map(|(e, &c)| (e[0], e[1], e[2], c))
            .collect()
    }
}

/// Points in the ball of radius `r` around the origin: Fibonacci directions
/// at cube-root spaced radii.
pub fn ball_samples(r: f64, n: usize) -> Vec<[f64; 3]> {
    let golden = std::f64::consts::PI * (3.0 - 5f64.sqrt());
    (0..n)
        .map(|i| {
            let z = 1.0 - 2.0 * (i as f64 + 0.5) / n as f64;
            let w = (1.0 - z * z).sqrt();
            let a = golden * i as f64;
            let rad = r * (((i * 7) % n) as f64 + 1.0).cbrt() / (n as f64).cbrt();
            [rad * w * a.cos(), rad * w * a.sin(), rad * z]
        })
        .collect()
}

/// Sampled sup of the operator residual on balls of radius `r` and `r/2`
/// around the base point, with the decay order between them.
pub fn heat_residual(sol: &TaylorSolution, radius: f64, samples: usize) -> ResidualReport {
    let sup_at = |r: f64| {
        ball_samples(r, samples.max(1))
            .into_iter()
            .map(|q| {
                let p = [sol.base[0] + q[0], sol.base[1] + q[1], sol.base[2] + q[2]];
                sol.operator_residual(p).abs()
            })
            .fold(0.0, f64::max)
    };
    let sup = sup_at(radius);
    let sup_half = sup_at(0.5 * radius);
    let scale = sol.coeffs.iter().fold(0.0f64, |m, c| m.max(c.abs())).max(1.0);
    let order = if sup <= 1e-14 * scale || sup_half <= 0.0 {
        None
    } else {
        Some((sup / sup_half).log2())
    };
    ResidualReport {
        radius,
        sup,
        sup_half,
        order,
    }
}
