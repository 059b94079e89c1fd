/// Bivariate power series `Σ c[i][j] p^i q^j` truncated at total degree `deg`.
#[derive(Clone, Debug, PartialEq)]
pub struct Series2 {
    deg: usize,
    c: Vec<f64>,
}

impl Series2 {
    pub fn zero(deg: usize) -> Self {
        Series2 {
            deg,
            c: vec![0.0; (deg + 1) * (deg + 1)],
        }
    }

    pub fn constant(deg: usize, v: f64) -> Self {
        let mut s = Series2::zero(deg);
        s.set(0, 0, v);
        s
    }

    /// Series in `p` only, from Taylor coefficients `a[i]` of `p^i`.
    pub fn from_p(deg: usize, a: &[f64]) -> Self {
        let mut s = Series2::zero(deg);
        for (i, &v) in a.iter().enumerate().take(deg + 1) {
            s.set(i, 0, v);
        }
        s
    }

    /// `a(p) + q·b(p)` from Taylor coefficient lists.
    pub fn linear_in_q(deg: usize, a: &[f64], b: &[f64]) -> Self {
        let mut s = Series2::from_p(deg, a);
        for (i, &v) in b.iter().enumerate() {
            if i + 1 <= deg {
                s.set(i, 1, v);
            }
        }
        s
    }

    pub fn q_var(deg: usize) -> Self {
        let mut s = Series2::zero(deg);
        if deg >= 1 {
            s.set(0, 1, 1.0);
        }
        s
    }

    pub fn deg(&self) -> usize {
        self.deg
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if i + j > self.deg {
            0.0
        } else {
            self.c[i * (self.deg + 1) + j]
        }
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, v: f64) {
        assert!(i + j <= self.deg);
        self.c[i * (self.deg + 1) + j] = v;
    }

    pub fn add(&self, o: &Series2) -> Series2 {
        let mut r = self.clone();
        for (a, b) in r.c.iter_mut().zip(&o.c) {
            *a += b;
        }
        r
    }

    pub fn sub(&self, o: &Series2) -> Series2 {
        let mut r = self.clone();
        for (a, b) in r.c.iter_mut().zip(&o.c) {
            *a -= b;
        }
        r
    }

    pub fn scale(&self, k: f64) -> Series2 {
        let mut r = self.clone();
        r.c.iter_mut().for_each(|a| *a *= k);
        r
    }

    pub fn add_const(&self, k: f64) -> Series2 {
        let mut r = self.clone();
        r.c[0] += k;
        r
    }

    pub fn mul(&self, o: &Series2) -> Series2 {
        let d = self.deg;
        let mut r = Series2::zero(d);
        for i in 0..=d {
            for j in 0..=d - i {
                let a = self.get(i, j);
                if a == 0.0 {
                    continue;
                }
                for k in 0..=d - i - j {
                    for l in 0..=d - i - j - k {
                        let idx = (i + k) * (d + 1) + (j + l);
                        r.c[idx] += a * o.get(k, l);
                    }
                }
            }
        }
        r
    }

    /// `s^{-1/2}` for a series with positive constant term.
    pub fn inv_sqrt(&self) -> Series2 {
        let c0 = self.get(0, 0);
        assert!(c0 > 0.0, "inv_sqrt needs a positive constant term");
        // s = c0 (1 + e), (1+e)^{-1/2} = Σ binom(-1/2, n) e^n
        let e = self.add_const(-c0).scale(1.0 / c0);
        let mut acc = Series2::constant(self.deg, 1.0);
        let mut pow = Series2::constant(self.deg, 1.0);
        let mut coef = 1.0;
        for n in 1..=self.deg {
            pow = pow.mul(&e);
            coef *= (-0.5 - (n as f64 - 1.0)) / n as f64;
            acc = acc.add(&pow.scale(coef));
        }
        acc.scale(1.0 / c0.sqrt())
    }

    pub fn eval(&self, p: f64, q: f64) -> f64 {
        let d = self.deg;
        let mut acc = 0.0;
        let mut pi = 1.0;
        for i in 0..=d {
            let mut qj = 1.0;
            for j in 0..=d - i {
                acc += self.get(i, j) * pi * qj;
                qj *= q;
            }
            pi *= p;
        }
        acc
    }

    /// Coefficients with `i + j == k`, ordered by increasing `j`.
    pub fn homogeneous(&self, k: usize) -> Vec<f64> {
        (0..=k).map(|j| self.get(k - j, j)).collect()
    }
}

/// Taylor coefficients `f^(i)(x0)/i!` from derivative values.
pub fn taylor_from_derivs(derivs: &[f64]) -> Vec<f64> {
    let mut f = 1.0;
    derivs
        .iter()
        .enumerate()
        .map(|(i, d)| {
            if i > 0 {
                f *= i as f64;
            }
            d / f
        })
        .collect()
}
