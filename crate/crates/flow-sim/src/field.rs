use std::collections::HashMap;
use std::sync::{Arc, Mutex, OnceLock};

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

/// Forward and inverse length-`n` transforms used for 2D FFTs.
pub struct Fft2 {
    n: usize,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl Fft2 {
    pub fn get(n: usize) -> Arc<Fft2> {
        static CACHE: OnceLock<Mutex<HashMap<usize, Arc<Fft2>>>> = OnceLock::new();
        let mut m = CACHE.get_or_init(|| Mutex::new(HashMap::new())).lock().unwrap();
        m.entry(n)
            .or_insert_with(|| {
                let mut p = FftPlanner::new();
                Arc::new(Fft2 {
                    n,
                    fwd: p.plan_fft_forward(n),
                    inv: p.plan_fft_inverse(n),
                })
            })
            .clone()
    }

    fn run(&self, data: &mut [Complex64], inverse: bool) {
        let n = self.n;
        let plan = if inverse { &self.inv } else { &self.fwd };
        plan.process(data);
        let mut col = vec![Complex64::new(0.0, 0.0); n];
        for i in 0..n {
            for j in 0..n {
                col[j] = data[j * n + i];
            }
            plan.process(&mut col);
            for j in 0..n {
                data[j * n + i] = col[j];
            }
        }
    }

    /// Grid values to amplitudes, normalized so that `f = Σ c e^{ik·(x−x₀)}`.
    pub fn forward(&self, data: &mut [Complex64]) {
        self.run(data, false);
        let s = 1.0 / (self.n * self.n) as f64;
        data.iter_mut().for_each(|c| *c *= s);
    }

    pub fn inverse(&self, data: &mut [Complex64]) {
        self.run(data, true);
    }
}

/// Signed FFT index of position `i`.
pub fn mode(i: usize, n: usize) -> i64 {
    if i <= n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

/// Real field on `[−P/2, P/2)²` held by its Fourier amplitudes, `(y, x)`
/// row-major with `y` the slow index. The zero mode and the Nyquist row
/// and column are kept at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    pub n: usize,
    pub period: f64,
    pub time: f64,
    pub coeffs: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(n: usize, period: f64, time: f64) -> Self {
        assert!(n >= 4 && n % 2 == 0, "grid size must be even and at least 4");
        SpectralField {
            n,
            period,
            time,
            coeffs: vec![Complex64::new(0.0, 0.0); n * n],
        }
    }

    pub fn origin(&self) -> f64 {
        -0.5 * self.period
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Grid coordinate `origin + i·h`.
    pub fn coord(&self, i: usize) -> f64 {
        self.origin() + self.spacing() * i as f64
    }

    pub fn wavenumber(&self, i: usize) -> f64 {
        std::f64::consts::TAU / self.period * mode(i, self.n) as f64
    }

    fn is_nyquist(&self, i: usize) -> bool {
        i == self.n / 2
    }

    /// From samples on the grid; returns the field and the mean that was
    /// removed.
    pub fn from_grid(values: &[f64], n: usize, period: f64, time: f64) -> (Self, f64) {
        assert_eq!(values.len(), n * n);
        let mut data: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
        Fft2::get(n).forward(&mut data);
        let mean = data[0].re;
        let mut f = SpectralField {
            n,
            period,
            time,
            coeffs: data,
        };
        f.clean();
        (f, mean)
    }

    /// Zeroes the mean and Nyquist modes and symmetrizes.
    pub fn clean(&mut self) {
        let n = self.n;
        self.coeffs[0] = Complex64::new(0.0, 0.0);
        for j in 0..n {
            for i in 0..n {
                if self.is_nyquist(i) || self.is_nyquist(j) {
                    self.coeffs[j * n + i] = Complex64::new(0.0, 0.0);
                }
            }
        }
        for j in 0..n {
            for i in 0..n {
                let (ci, cj) = ((n - i) % n, (n - j) % n);
                let (a, b) = (j * n + i, cj * n + ci);
                if a < b {
                    let m = 0.5 * (self.coeffs[a] + self.coeffs[b].conj());
                    self.coeffs[a] = m;
                    self.coeffs[b] = m.conj();
                } else if a == b {
                    self.coeffs[a].im = 0.0;
                }
            }
        }
    }

    /// Largest `|c_k − conj(c_{−k})|`.
    pub fn hermitian_error(&self) -> f64 {
        let n = self.n;
        let mut e: f64 = 0.0;
        for j in 0..n {
            for i in 0..n {
                let b = ((n - j) % n) * n + (n - i) % n;
                e = e.max((self.coeffs[j * n + i] - self.coeffs[b].conj()).norm());
            }
        }
        e
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Amplitudes of `∂ₓᵃ∂ᵧᵇ`.
    pub fn partial_coeffs(&self, a: usize, b: usize) -> Vec<Complex64> {
        let n = self.n;
        let mut out = self.coeffs.clone();
        if a == 0 && b == 0 {
            return out;
        }
        let i = Complex64::new(0.0, 1.0);
        for jy in 0..n {
            let ky = i * self.wavenumber(jy);
            let py = ky.powu(b as u32);
            for jx in 0..n {
                let kx = i * self.wavenumber(jx);
                out[jy * n + jx] *= kx.powu(a as u32) * py;
            }
        }
        out
    }

    pub fn partial(&self, a: usize, b: usize) -> SpectralField {
        SpectralField {
            coeffs: self.partial_coeffs(a, b),
            ..self.clone()
        }
    }

    /// Multiplies each amplitude by `m(kx, ky)`.
    pub fn map_modes(&self, m: impl Fn(f64, f64) -> Complex64) -> SpectralField {
        let n = self.n;
        let mut out = self.clone();
        for jy in 0..n {
            let ky = self.wavenumber(jy);
            for jx in 0..n {
                out.coeffs[jy * n + jx] *= m(self.wavenumber(jx), ky);
            }
        }
        out
    }

    pub fn laplacian(&self) -> SpectralField {
        self.map_modes(|kx, ky| Complex64::new(-(kx * kx + ky * ky), 0.0))
    }

    /// `Δ⁻¹` on mean-zero fields.
    pub fn inverse_laplacian(&self) -> SpectralField {
        let mut f = self.map_modes(|kx, ky| {
            let kk = kx * kx + ky * ky;
            Complex64::new(if kk > 0.0 { -1.0 / kk } else { 0.0 }, 0.0)
        });
        f.coeffs[0] = Complex64::new(0.0, 0.0);
        f
    }

    /// `e^{τΔ}` applied to the field.
    pub fn heat(&self, tau: f64) -> SpectralField {
        let mut f = self.map_modes(|kx, ky| Complex64::new((-(kx * kx + ky * ky) * tau).exp(), 0.0));
        f.time += tau;
        f
    }

    pub fn scale(&self, s: f64) -> SpectralField {
        let mut f = self.clone();
        f.coeffs.iter_mut().for_each(|c| *c *= s);
        f
    }

    pub fn sub(&self, o: &SpectralField) -> SpectralField {
        let mut f = self.clone();
        f.coeffs.iter_mut().zip(&o.coeffs).for_each(|(a, b)| *a -= b);
        f
    }

    pub fn to_grid(&self) -> Vec<f64> {
        coeffs_to_grid(&self.coeffs, self.n)
    }

    pub fn partial_grid(&self, a: usize, b: usize) -> Vec<f64> {
        coeffs_to_grid(&self.partial_coeffs(a, b), self.n)
    }

    /// `(Σ|f|² h²)^{1/2}`, the L² norm over the period square.
    pub fn l2_norm(&self) -> f64 {
        self.period * self.coeffs.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
    }

    /// `∫|∇f|²`.
    pub fn energy(&self) -> f64 {
        let p2 = self.period * self.period;
        p2 * self.weighted_sum(|kk| kk)
    }

    /// `∫(Δf)²`.
    pub fn enstrophy(&self) -> f64 {
        let p2 = self.period * self.period;
        p2 * self.weighted_sum(|kk| kk * kk)
    }

    fn weighted_sum(&self, w: impl Fn(f64) -> f64) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for jy in 0..n {
            let ky = self.wavenumber(jy);
            for jx in 0..n {
                let kx = self.wavenumber(jx);
                s += w(kx * kx + ky * ky) * self.coeffs[jy * n + jx].norm_sqr();
            }
        }
        s
    }

    /// Trigonometric interpolant of `∂ₓᵃ∂ᵧᵇ f` at an arbitrary point.
    pub fn eval_partial(&self, a: usize, b: usize, x: f64, y: f64) -> f64 {
        self.eval_local(&[[a, b]], [x, y], [0.0, 0.0], [1, 1])[0][0]
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        self.eval_partial(0, 0, x, y)
    }

    /// Partials on the local lattice `x₀ + (i hx, j hy)`, `i < nx`, `j < ny`,
    /// by separable partial sums; one `ny·nx` block per order, `y` slow.
    pub fn eval_local(&self, orders: &[[usize; 2]], x0: [f64; 2], h: [f64; 2], counts: [usize; 2]) -> Vec<Vec<f64>> {
        let n = self.n;
        let [nx, ny] = counts;
        let o = self.origin();
        let ex: Vec<Vec<Complex64>> = (0..n)
            .map(|jx| {
                let k = self.wavenumber(jx);
                (0..nx)
                    .map(|i| Complex64::from_polar(1.0, k * (x0[0] + h[0] * i as f64 - o)))
                    .collect()
            })
            .collect();
        let ey: Vec<Vec<Complex64>> = (0..n)
            .map(|jy| {
                let k = self.wavenumber(jy);
                (0..ny)
                    .map(|j| Complex64::from_polar(1.0, k * (x0[1] + h[1] * j as f64 - o)))
                    .collect()
            })
            .collect();
        let iu = Complex64::new(0.0, 1.0);
        orders
            .iter()
            .map(|&[a, b]| {
                // rows[jy][i] = Σ_kx c (ikx)^a e^{ikx x_i}
                let mut rows = vec![vec![Complex64::new(0.0, 0.0); nx]; n];
                for jy in 0..n {
                    for jx in 0..n {
                        let c = self.coeffs[jy * n + jx];
                        if c.norm_sqr() == 0.0 {
                            continue;
                        }
                        let c = c * (iu * self.wavenumber(jx)).powu(a as u32);
                        for i in 0..nx {
                            rows[jy][i] += c * ex[jx][i];
                        }
                    }
                }
                let mut out = vec![0.0; nx * ny];
                for jy in 0..n {
                    let fy = (iu * self.wavenumber(jy)).powu(b as u32);
                    for j in 0..ny {
                        let e = fy * ey[jy][j];
                        for i in 0..nx {
                            out[j * nx + i] += (rows[jy][i] * e).re;
                        }
                    }
                }
                out
            })
            .collect()
    }
}

pub fn coeffs_to_grid(c: &[Complex64], n: usize) -> Vec<f64> {
    let mut d = c.to_vec();
    Fft2::get(n).inverse(&mut d);
    d.iter().map(|z| z.re).collect()
}

pub fn grid_to_coeffs(v: &[f64], n: usize) -> Vec<Complex64> {
    let mut d: Vec<Complex64> = v.iter().map(|x| Complex64::new(*x, 0.0)).collect();
    Fft2::get(n).forward(&mut d);
    d
}
