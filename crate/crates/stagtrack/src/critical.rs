use heat_jet::PointType;
use serde::{Deserialize, Serialize};

use crate::field::{PlanarField, SeedGrid};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CriticalPoint {
    pub x: f64,
    pub y: f64,
    pub t: f64,
    pub hxx: f64,
    pub hxy: f64,
    pub hyy: f64,
    pub det: f64,
    pub trace: f64,
    pub newton_residual: f64,
    pub kind: PointType,
}

/// Relative degeneracy tolerance: `|det| ≤ tol·|H|²_F` is DEGENERATE.
pub const DET_TOL: f64 = 1e-8;

pub fn classify(hxx: f64, hxy: f64, hyy: f64) -> PointType {
    let det = hxx * hyy - hxy * hxy;
    let scale = hxx * hxx + 2.0 * hxy * hxy + hyy * hyy;
    let tol = DET_TOL * scale;
    if det.abs() <= tol || scale == 0.0 {
        PointType::Degenerate
    } else if det < 0.0 {
        PointType::Saddle
    } else if hxx + hyy < 0.0 {
        PointType::Max
    } else {
        PointType::Min
    }
}

pub fn critical_point(field: &dyn PlanarField, x: f64, y: f64) -> CriticalPoint {
    let j = field.jet(x, y);
    let (hxx, hxy, hyy) = (j[3], j[4], j[5]);
    CriticalPoint {
        x,
        y,
        t: field.time(),
        hxx,
        hxy,
        hyy,
        det: hxx * hyy - hxy * hxy,
        trace: hxx + hyy,
        newton_residual: j[1].hypot(j[2]),
        kind: classify(hxx, hxy, hyy),
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FindOptions {
    /// `‖∇ψ‖` accepted at convergence, relative to `max(1, max‖∇ψ‖)` on the
    /// seed lattice.
    pub newton_tol: f64,
    pub max_iter: usize,
    pub dedup_radius: f64,
    /// Subdivision depth of the fallback when Newton leaves its cell.
    pub max_depth: usize,
}

impl Default for FindOptions {
    fn default() -> Self {
        FindOptions {
            newton_tol: 1e-10,
            max_iter: 40,
            dedup_radius: 1e-6,
            max_depth: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FindResult {
    pub points: Vec<CriticalPoint>,
    /// Cells where Newton kept failing down to the deepest subdivision.
    pub stalled: Vec<[f64; 2]>,
    /// Cells in which both gradient components change sign.
    pub sign_cells: Vec<[usize; 2]>,
}

fn changes_sign(v: [f64; 4]) -> bool {
    let lo = v.iter().cloned().fold(f64::INFINITY, f64::min);
    let hi = v.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    lo <= 0.0 && hi >= 0.0
}

/// Newton on `∇ψ = 0` from `(x, y)`, confined to the box `lo..hi`.
fn newton(field: &dyn PlanarField, mut x: f64, mut y: f64, lo: [f64; 2], hi: [f64; 2], tol: f64, iters: usize) -> Option<(f64, f64)> {
    for _ in 0..iters {
        let j = field.jet(x, y);
        let g = j[1].hypot(j[2]);
        if g < tol {
            return Some((x, y));
        }
        let det = j[3] * j[5] - j[4] * j[4];
        if det == 0.0 || !det.is_finite() {
            return None;
        }
        let dx = -(j[5] * j[1] - j[4] * j[2]) / det;
        let dy = -(-j[4] * j[1] + j[3] * j[2]) / det;
        x += dx;
        y += dy;
        if x < lo[0] || x > hi[0] || y < lo[1] || y > hi[1] {
            return None;
        }
    }
    let j = field.jet(x, y);
    (j[1].hypot(j[2]) < tol).then_some((x, y))
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Outcome {
    Found,
    /// The sign change disappears under subdivision.
    Empty,
    Stalled,
}

fn refine_cell(
    field: &dyn PlanarField,
    x0: [f64; 2],
    h: [f64; 2],
    tol: f64,
    opts: &FindOptions,
    depth: usize,
    out: &mut Vec<(f64, f64)>,
) -> Outcome {
    let lo = [x0[0] - h[0], x0[1] - h[1]];
    let hi = [x0[0] + 2.0 * h[0], x0[1] + 2.0 * h[1]];
    if let Some(p) = newton(field, x0[0] + 0.5 * h[0], x0[1] + 0.5 * h[1], lo, hi, tol, opts.max_iter) {
        out.push(p);
        return Outcome::Found;
    }
    if depth >= opts.max_depth {
        return Outcome::Stalled;
    }
    let hh = [0.5 * h[0], 0.5 * h[1]];
    let (gx, gy) = field.grad_lattice(x0, hh, [3, 3]);
    let mut res = Outcome::Empty;
    for (a, b) in [(0, 0), (1, 0), (0, 1), (1, 1)] {
        let idx = [b * 3 + a, b * 3 + a + 1, (b + 1) * 3 + a, (b + 1) * 3 + a + 1];
        if changes_sign(idx.map(|k| gx[k])) && changes_sign(idx.map(|k| gy[k])) {
            let sx = [x0[0] + a as f64 * hh[0], x0[1] + b as f64 * hh[1]];
            match refine_cell(field, sx, hh, tol, opts, depth + 1, out) {
                Outcome::Found => res = Outcome::Found,
                Outcome::Stalled if res == Outcome::Empty => res = Outcome::Stalled,
                _ => {}
            }
        }
    }
    res
}

/// Critical points of `field` in the seed rectangle: cells where both
/// components of `∇ψ` change sign, refined by Newton with the field's own
/// derivatives, subdividing the cell when Newton leaves it.
pub fn find_critical_points(field: &dyn PlanarField, seed: &SeedGrid, opts: &FindOptions) -> FindResult {
    let h = seed.spacing();
    let (nx, ny) = (seed.nx + 1, seed.ny + 1);
    let (gx, gy) = field.grad_lattice([seed.x[0], seed.y[0]], h, [nx, ny]);
    let gmax = gx.iter().zip(&gy).fold(0.0f64, |m, (a, b)| m.max(a.hypot(*b)));
    let tol = opts.newton_tol * gmax.max(1.0);
    let mut raw = Vec::new();
    let mut stalled = Vec::new();
    let mut sign_cells = Vec::new();
    for j in 0..seed.ny {
        for i in 0..seed.nx {
            let idx = [j * nx + i, j * nx + i + 1, (j + 1) * nx + i, (j + 1) * nx + i + 1];
            if !(changes_sign(idx.map(|k| gx[k])) && changes_sign(idx.map(|k| gy[k]))) {
                continue;
            }
            sign_cells.push([i, j]);
            let x0 = [seed.x[0] + h[0] * i as f64, seed.y[0] + h[1] * j as f64];
            if refine_cell(field, x0, h, tol, opts, 0, &mut raw) == Outcome::Stalled {
                stalled.push([x0[0] + 0.5 * h[0], x0[1] + 0.5 * h[1]]);
            }
        }
    }
    let mut pts: Vec<(f64, f64)> = Vec::new();
    for p in raw {
        if !seed.contains(p.0, p.1) {
            continue;
        }
        if pts.iter().all(|q| (q.0 - p.0).hypot(q.1 - p.1) > opts.dedup_radius) {
            pts.push(p);
        }
    }
    FindResult {
        points: pts.into_iter().map(|(x, y)| critical_point(field, x, y)).collect(),
        stalled,
        sign_cells,
    }
}
