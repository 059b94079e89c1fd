use serde::{Deserialize, Serialize};

/// `dⁱ/dxⁱ exp(−x²/(4T))` for `i = 0..=n`.
pub fn gaussian_derivs(x: f64, big_t: f64, n: usize) -> Vec<f64> {
    let st = big_t.sqrt();
    let z = x / (2.0 * st);
    let g = (-z * z).exp();
    let f = -1.0 / (2.0 * st);
    let mut h = Vec::with_capacity(n + 1);
    h.push(1.0);
    if n >= 1 {
        h.push(2.0 * z);
    }
    for i in 1..n {
        let v = 2.0 * z * h[i] - 2.0 * i as f64 * h[i - 1];
        h.push(v);
    }
    let mut fi = 1.0;
    h.iter()
        .map(|hi| {
            let v = fi * hi * g;
            fi *= f;
            v
        })
        .collect()
}

fn binom(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, m| acc * (n - m) as f64 / (m + 1) as f64)
}

/// Multipole source: the elements `∂ₓⁱ∂ᵧʲ [exp(−|x−c|²/(4(t+s)))/(t+s)]`,
/// `i + j ≤ order`. Order 0 is a single Gaussian with virtual age `s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlaneSource {
    pub center: [f64; 2],
    pub age: f64,
    pub order: usize,
}

impl PlaneSource {
    pub fn len(&self) -> usize {
        (self.order + 1) * (self.order + 2) / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    fn indices(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        (0..=self.order).flat_map(move |i| (0..=self.order - i).map(move |j| (i, j)))
    }

    /// Values of `∂ₓᵃ∂ᵧᵇ∂ₜᶜ` of every element at `p`, appended to `out`.
    /// Time derivatives use `∂ₜ = Δ`.
    fn push_partials(&self, orders: &[[usize; 3]], p: [f64; 3], out: &mut [Vec<f64>]) {
        let big_t = p[2] + self.age;
        let maxc = orders.iter().map(|o| o[0] + o[1] + 2 * o[2]).max().unwrap_or(0);
        let n = self.order + maxc;
        let dx = gaussian_derivs(p[0] - self.center[0], big_t, n);
        let dy = gaussian_derivs(p[1] - self.center[1], big_t, n);
        let inv_t = 1.0 / big_t;
        for (o, row) in orders.iter().zip(out.iter_mut()) {
            let [a, b, c] = *o;
            for (i, j) in self.indices() {
                let mut v = 0.0;
                for m in 0..=c {
                    v += binom(c, m) * dx[i + a + 2 * m] * dy[j + b + 2 * (c - m)];
                }
                row.push(v * inv_t);
            }
        }
    }
}

/// Caloric dictionary. Torus elements are `cos(√η k·x) e^{−η|k|²t}` and the
/// sine partners for `k` in a half-plane of `[−K, K]²`, i.e. torus modes
/// pulled back by the parabolic scaling.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Dictionary {
    Plane { sources: Vec<PlaneSource> },
    Torus { eta: f64, k_max: usize },
}

impl Dictionary {
    pub fn plane_multipole(center: [f64; 2], age: f64, order: usize) -> Self {
        Dictionary::Plane {
            sources: vec![PlaneSource {
                center,
                age,
                order,
            }],
        }
    }

    /// Wavevectors in the half-plane `k₂ > 0` or `k₂ = 0, k₁ > 0`.
    pub fn wavevectors(k_max: usize) -> Vec<[i64; 2]> {
        let k = k_max as i64;
        let mut out = Vec::new();
        for k1 in -k..=k {
            for k2 in 0..=k {
                if k2 == 0 && k1 <= 0 {
                    continue;
                }
                out.push([k1, k2]);
            }
        }
        out
    }

    pub fn len(&self) -> usize {
        match self {
            Dictionary::Plane { sources } => sources.iter().map(|s| s.len()).sum(),
            Dictionary::Torus { k_max, .. } => 2 * Self::wavevectors(*k_max).len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// One row per requested partial derivative, one entry per element.
    pub fn partials(&self, orders: &[[usize; 3]], p: [f64; 3]) -> Vec<Vec<f64>> {
        let n = self.len();
        let mut out: Vec<Vec<f64>> = orders.iter().map(|_| Vec::with_capacity(n)).collect();
        match self {
            Dictionary::Plane { sources } => {
                for s in sources {
                    s.push_partials(orders, p, &mut out);
                }
            }
            Dictionary::Torus { eta, k_max } => {
                let se = eta.sqrt();
                for k in Self::wavevectors(*k_max) {
                    let kx = se * k[0] as f64;
                    let ky = se * k[1] as f64;
                    let kk = kx * kx + ky * ky;
                    let ph = kx * p[0] + ky * p[1];
                    let e = (-kk * p[2]).exp();
                    for (o, row) in orders.iter().zip(out.iter_mut()) {
                        let [a, b, c] = *o;
                        let pre = kx.powi(a as i32) * ky.powi(b as i32) * (-kk).powi(c as i32) * e;
                        let shift = (a + b) as f64 * std::f64::consts::FRAC_PI_2;
                        row.push(pre * (ph + shift).cos());
                        row.push(pre * (ph + shift).sin());
                    }
                }
            }
        }
        out
    }
}

/// Derivative orders of the 2-jet: `v, v_x, v_y, v_t, v_xx, v_xy, v_yy, v_xt, v_yt`.
pub const JET_ORDERS: [[usize; 3]; 9] = [
    [0, 0, 0],
    [1, 0, 0],
    [0, 1, 0],
    [0, 0, 1],
    [2, 0, 0],
    [1, 1, 0],
    [0, 2, 0],
    [1, 0, 1],
    [0, 1, 1],
];
