use serde::{Deserialize, Serialize};

use crate::basis::{Dictionary, JET_ORDERS};

/// `u = c + Σ w_b K_b`, a global heat solution.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HeatAnsatz {
    pub dictionary: Dictionary,
    pub weights: Vec<f64>,
    pub constant: f64,
}

/// `v, v_x, v_y, v_t, v_xx, v_xy, v_yy, v_xt, v_yt` at a point.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Jet2 {
    pub v: f64,
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub xx: f64,
    pub xy: f64,
    pub yy: f64,
    pub xt: f64,
    pub yt: f64,
}

impl Jet2 {
    pub fn from_array(a: [f64; 9]) -> Self {
        Jet2 {
            v: a[0],
            x: a[1],
            y: a[2],
            t: a[3],
            xx: a[4],
            xy: a[5],
            yy: a[6],
            xt: a[7],
            yt: a[8],
        }
    }

    pub fn to_array(&self) -> [f64; 9] {
        [
            self.v, self.x, self.y, self.t, self.xx, self.xy, self.yy, self.xt, self.yt,
        ]
    }
}

impl HeatAnsatz {
    pub fn partials(&self, orders: &[[usize; 3]], p: [f64; 3]) -> Vec<f64> {
        let rows = self.dictionary.partials(orders, p);
        orders
            .iter()
            .zip(rows)
            .map(|(o, row)| {
                let s: f64 = row.iter().zip(&self.weights).map(|(a, w)| a * w).sum();
                if *o == [0, 0, 0] {
                    s + self.constant
                } else {
                    s
                }
            })
            .collect()
    }

    pub fn partial(&self, order: [usize; 3], p: [f64; 3]) -> f64 {
        self.partials(&[order], p)[0]
    }

    pub fn eval(&self, p: [f64; 3]) -> f64 {
        self.partial([0, 0, 0], p)
    }

    pub fn jet(&self, p: [f64; 3]) -> Jet2 {
        let v = self.partials(&JET_ORDERS, p);
        let mut a = [0.0; 9];
        a.copy_from_slice(&v);
        Jet2::from_array(a)
    }

    /// `∂_t u − Δu` at `p`.
    pub fn heat_residual(&self, p: [f64; 3]) -> f64 {
        let v = self.partials(&[[0, 0, 1], [2, 0, 0], [0, 2, 0]], p);
        v[0] - v[1] - v[2]
    }

    /// Values of `u(·, t)` on the grid `origin + h·(i, j)`, row-major with
    /// `y` the slow index.
    pub fn sample_grid(&self, origin: [f64; 2], h: f64, n: usize, t: f64) -> Vec<f64> {
        let mut out = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let p = [origin[0] + h * i as f64, origin[1] + h * j as f64, t];
                out.push(self.eval(p));
            }
        }
        out
    }

    /// Largest weight magnitude.
    pub fn max_weight(&self) -> f64 {
        self.weights.iter().fold(0.0, |m, w| m.max(w.abs()))
    }
}
