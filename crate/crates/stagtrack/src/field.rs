use flow_sim::SpectralField;
use serde::{Deserialize, Serialize};

/// A scalar field on the plane at one instant.
pub trait PlanarField: Sync {
    fn time(&self) -> f64;

    /// `ψ, ψ_x, ψ_y, ψ_xx, ψ_xy, ψ_yy` at a point.
    fn jet(&self, x: f64, y: f64) -> [f64; 6];

    /// `(ψ_x, ψ_y)` on the lattice `x₀ + (i hx, j hy)`, `y` slow.
    fn grad_lattice(&self, x0: [f64; 2], h: [f64; 2], counts: [usize; 2]) -> (Vec<f64>, Vec<f64>) {
        let [nx, ny] = counts;
        let mut gx = Vec::with_capacity(nx * ny);
        let mut gy = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let d = self.jet(x0[0] + h[0] * i as f64, x0[1] + h[1] * j as f64);
                gx.push(d[1]);
                gy.push(d[2]);
            }
        }
        (gx, gy)
    }
}

impl PlanarField for SpectralField {
    fn time(&self) -> f64 {
        self.time
    }

    fn jet(&self, x: f64, y: f64) -> [f64; 6] {
        let v = self.eval_local(&[[0, 0], [1, 0], [0, 1], [2, 0], [1, 1], [0, 2]], [x, y], [0.0, 0.0], [1, 1]);
        std::array::from_fn(|i| v[i][0])
    }

    fn grad_lattice(&self, x0: [f64; 2], h: [f64; 2], counts: [usize; 2]) -> (Vec<f64>, Vec<f64>) {
        let mut v = self.eval_local(&[[1, 0], [0, 1]], x0, h, counts);
        let gy = v.pop().unwrap();
        let gx = v.pop().unwrap();
        (gx, gy)
    }
}

/// Field given by a closure returning the 2-jet at `(x, y, t)`.
pub struct FnField<F: Fn(f64, f64, f64) -> [f64; 6] + Sync> {
    pub t: f64,
    pub f: F,
}

impl<F: Fn(f64, f64, f64) -> [f64; 6] + Sync> PlanarField for FnField<F> {
    fn time(&self) -> f64 {
        self.t
    }

    fn jet(&self, x: f64, y: f64) -> [f64; 6] {
        (self.f)(x, y, self.t)
    }
}

/// Rectangle scanned for critical points.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeedGrid {
    pub x: [f64; 2],
    pub y: [f64; 2],
    /// Cells per direction.
    pub nx: usize,
    pub ny: usize,
}

impl SeedGrid {
    pub fn spacing(&self) -> [f64; 2] {
        [
            (self.x[1] - self.x[0]) / self.nx as f64,
            (self.y[1] - self.y[0]) / self.ny as f64,
        ]
    }

    /// Grid over the rectangle with cells of side close to `h`.
    pub fn with_spacing(x: [f64; 2], y: [f64; 2], h: f64) -> Self {
        SeedGrid {
            x,
            y,
            nx: (((x[1] - x[0]) / h).ceil() as usize).max(1),
            ny: (((y[1] - y[0]) / h).ceil() as usize).max(1),
        }
    }

    pub fn contains(&self, x: f64, y: f64) -> bool {
        x >= self.x[0] && x <= self.x[1] && y >= self.y[0] && y <= self.y[1]
    }
}
