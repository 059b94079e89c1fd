use cauchy_synth::{assemble_data, CauchyDataSet};
use heat_jet::{jet_at, JetSample};
use linkgeom::FrameField;
use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};
use stag_core::{uniform_grid, TrigPoly};

use crate::ansatz::HeatAnsatz;
use crate::basis::{Dictionary, JET_ORDERS};
use crate::GlobalFitError;

/// Least-squares settings. `weights` multiply the value, first-derivative
/// and second-derivative rows of the solve; `measure` does the same for the
/// reported discrepancy, where powers of the tube radius make it a sampled
/// C² surrogate on the tube.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitOptions {
    pub samples: usize,
    pub ring_radii: Vec<f64>,
    pub ring_angles: usize,
    /// Trig degree of the refitted F and G.
    pub fg_degree: usize,
    /// Weight pulling F, G towards the synthesized ones.
    pub prior_weight: f64,
    /// Tikhonov weight on the normalized dictionary columns.
    pub lambda: f64,
    pub weights: [f64; 3],
    pub ring_weight: f64,
    pub measure: [f64; 3],
    pub delta1: f64,
    pub max_condition: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            samples: 256,
            ring_radii: vec![0.03],
            ring_angles: 8,
            fg_degree: 4,
            prior_weight: 0.1,
            lambda: 1e-8,
            weights: [1.0, 1.0, 1.0],
            ring_weight: 1.0,
            measure: [1.0, 0.1, 0.01],
            delta1: 1e-3,
            max_condition: 1e13,
        }
    }
}

/// Jet target at one sample: `jet[0]` is the fixed part, `jet[1]` and
/// `jet[2]` the parts per unit `F` and `G`.
#[derive(Clone, Debug, PartialEq)]
pub struct SampleTarget {
    pub theta: f64,
    pub point: [f64; 3],
    pub k: [f64; 3],
    pub n: [f64; 3],
    pub jet: [[f64; 9]; 3],
}

#[derive(Clone, Debug, PartialEq)]
pub struct JetTarget {
    pub samples: Vec<SampleTarget>,
    /// Prior `(F, G)` when the second-order data are refitted jointly.
    pub free_fg: Option<(TrigPoly, TrigPoly)>,
}

fn jet_array(s: &JetSample) -> [f64; 9] {
    [
        s.v, s.v_x, s.v_y, s.v_t, s.grad_vx[0], s.grad_vx[1], s.grad_vy[1], s.grad_vx[2], s.grad_vy[2],
    ]
}

impl JetTarget {
    /// Jet of the CK solution along the link, affine in `(F, G)`.
    pub fn from_link(frame: &FrameField, data: &CauchyDataSet, samples: usize) -> Result<Self, GlobalFitError> {
        let zero = TrigPoly::constant(0.0);
        let one = TrigPoly::constant(1.0);
        let fixed = CauchyDataSet {
            beta: data.beta.clone(),
            big_f: zero.clone(),
            big_g: zero.clone(),
            f0: data.f0.clone(),
        };
        let unit_f = CauchyDataSet {
            beta: zero.clone(),
            big_f: one.clone(),
            big_g: zero.clone(),
            f0: zero.clone(),
        };
        let unit_g = CauchyDataSet {
            beta: zero.clone(),
            big_f: zero.clone(),
            big_g: one,
            f0: zero,
        };
        let mut out = Vec::with_capacity(samples);
        for th in uniform_grid(samples) {
            let fp = frame.at(th);
            let j0 = jet_at(frame, &fixed, th)?.0;
            let jf = jet_at(frame, &unit_f, th)?.0;
            let jg = jet_at(frame, &unit_g, th)?.0;
            out.push(SampleTarget {
                theta: th,
                point: fp.phi,
                k: fp.k,
                n: fp.n,
                jet: [jet_array(&j0), jet_array(&jf), jet_array(&jg)],
            });
        }
        Ok(JetTarget {
            samples: out,
            free_fg: Some((data.big_f.clone(), data.big_g.clone())),
        })
    }

    /// Fixed jets `v, v_x, v_y, v_t, v_xx, v_xy, v_yy, v_xt, v_yt` at points.
    pub fn from_jets(points: &[[f64; 3]], jets: &[[f64; 9]]) -> Self {
        let samples = points
            .iter()
            .zip(jets)
            .enumerate()
            .map(|(i, (p, j))| SampleTarget {
                theta: i as f64,
                point: *p,
                k: [1.0, 0.0, 0.0],
                n: [0.0, 1.0, 0.0],
                jet: [*j, [0.0; 9], [0.0; 9]],
            })
            .collect();
        JetTarget {
            samples,
            free_fg: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    /// Root mean square of the jet-row residuals under the measure weights.
    pub discrepancy: f64,
    /// `sqrt(objective / rows)` of the solve, including ring, prior and
    /// Tikhonov terms; non-increasing under nested dictionaries.
    pub objective_rms: f64,
    /// Unweighted sup residuals of the value, first-derivative,
    /// second-derivative and ring rows.
    pub sup_value: f64,
    pub sup_first: f64,
    pub sup_second: f64,
    pub sup_ring: f64,
    pub condition: f64,
    pub rows: usize,
    pub columns: usize,
    /// `min η` of the refitted data on 4096 samples, when refitted.
    pub refit_min_eta: Option<f64>,
    pub max_weight: f64,
    pub delta1: f64,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub ansatz: HeatAnsatz,
    pub big_f: Option<TrigPoly>,
    pub big_g: Option<TrigPoly>,
    pub report: FitReport,
}

impl FitResult {
    /// Data set matching the fitted `u`: original β with the refitted F, G.
    pub fn refit_data(&self, frame: &FrameField, data: &CauchyDataSet) -> Result<CauchyDataSet, GlobalFitError> {
        match (&self.big_f, &self.big_g) {
            (Some(f), Some(g)) => Ok(assemble_data(frame, &data.beta, f, g)?),
            _ => Ok(data.clone()),
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Group {
    Value,
    First,
    Second,
    Ring,
    Prior,
}

fn group_of(q: usize) -> Group {
    match q {
        0 => Group::Value,
        1..=3 => Group::First,
        _ => Group::Second,
    }
}

pub fn fit(target: &JetTarget, dictionary: &Dictionary, opts: &FitOptions) -> Result<FitResult, GlobalFitError> {
    let nb = dictionary.len();
    let nt = if target.free_fg.is_some() { 2 * opts.fg_degree + 1 } else { 0 };
    let ncol = nb + 1 + 2 * nt;
    let rings: Vec<(f64, f64)> = if target.free_fg.is_some() {
        opts.ring_radii
            .iter()
            .flat_map(|&r| {
                (0..opts.ring_angles).map(move |a| (r, std::f64::consts::TAU * a as f64 / opts.ring_angles as f64))
            })
            .collect()
    } else {
        Vec::new()
    };
    let ns = target.samples.len();
    let n_prior = if nt > 0 { 2 * ns } else { 0 };
    let nrow = ns * (9 + 2 * rings.len()) + n_prior;
    let mut a = DMatrix::<f64>::zeros(nrow, ncol);
    let mut b = DVector::<f64>::zeros(nrow);
    let mut groups = Vec::with_capacity(nrow);
    let mut wts = Vec::with_capacity(nrow);
    let w_of = |g: Group| match g {
        Group::Value => opts.weights[0],
        Group::First => opts.weights[1],
        Group::Ring => opts.ring_weight,
        Group::Second => opts.weights[2],
        Group::Prior => opts.prior_weight,
    };
    let mut r = 0;
    for s in &target.samples {
        let trow = if nt > 0 {
            TrigPoly::basis_row(s.theta, opts.fg_degree)
        } else {
            Vec::new()
        };
        let rows = dictionary.partials(&JET_ORDERS, s.point);
        for (q, row) in rows.iter().enumerate() {
            let g = group_of(q);
            let w = w_of(g);
            for (c, v) in row.iter().enumerate() {
                a[(r, c)] = w * v;
            }
            if q == 0 {
                a[(r, nb)] = w;
            }
            for (c, tv) in trow.iter().enumerate() {
                a[(r, nb + 1 + c)] = -w * s.jet[1][q] * tv;
                a[(r, nb + 1 + nt + c)] = -w * s.jet[2][q] * tv;
            }
            b[r] = w * s.jet[0][q];
            groups.push(g);
            wts.push(w);
            r += 1;
        }
        for &(rad, al) in &rings {
            let d: [f64; 3] = std::array::from_fn(|m| rad * (al.cos() * s.k[m] + al.sin() * s.n[m]));
            let p = [s.point[0] + d[0], s.point[1] + d[1], s.point[2] + d[2]];
            let rows = dictionary.partials(&[[1, 0, 0], [0, 1, 0]], p);
            // rows of ∇v_x and ∇v_y inside the jet array
            let idx = [[4, 5, 7], [5, 6, 8]];
            for (comp, row) in rows.iter().enumerate() {
                let w = w_of(Group::Ring);
                for (c, v) in row.iter().enumerate() {
                    a[(r, c)] = w * v;
                }
                let lin = |part: usize| -> f64 { (0..3).map(|m| s.jet[part][idx[comp][m]] * d[m]).sum() };
                let (lf, lg) = (lin(1), lin(2));
                for (c, tv) in trow.iter().enumerate() {
                    a[(r, nb + 1 + c)] = -w * lf * tv;
                    a[(r, nb + 1 + nt + c)] = -w * lg * tv;
                }
                b[r] = w * lin(0);
                groups.push(Group::Ring);
                wts.push(w);
                r += 1;
            }
        }
    }
    if let Some((pf, pg)) = &target.free_fg {
        let w = opts.prior_weight;
        for s in &target.samples {
            let trow = TrigPoly::basis_row(s.theta, opts.fg_degree);
            for (part, prior) in [pf, pg].into_iter().enumerate() {
                for (c, tv) in trow.iter().enumerate() {
                    a[(r, nb + 1 + part * nt + c)] = w * tv;
                }
                b[r] = w * prior.eval(s.theta);
                groups.push(Group::Prior);
                wts.push(w);
                r += 1;
            }
        }
    }
    debug_assert_eq!(r, nrow);

    let norms: Vec<f64> = (0..ncol)
        .map(|c| {
            let n = a.column(c).norm();
            if n > 0.0 {
                n
            } else {
                1.0
            }
        })
        .collect();
    let nreg = if opts.lambda > 0.0 { nb + 1 } else { 0 };
    let mut aug = DMatrix::<f64>::zeros(nrow + nreg, ncol);
    for c in 0..ncol {
        for i in 0..nrow {
            aug[(i, c)] = a[(i, c)] / norms[c];
        }
    }
    for j in 0..nreg {
        aug[(nrow + j, j)] = opts.lambda;
    }
    let mut rhs = DVector::<f64>::zeros(nrow + nreg);
    rhs.rows_mut(0, nrow).copy_from(&b);

    let svd = aug.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    let condition = if smin > 0.0 { smax / smin } else { f64::INFINITY };
    if condition > opts.max_condition {
        return Err(GlobalFitError::IllConditionedBasis {
            condition,
            cap: opts.max_condition,
        });
    }
    let y = svd
        .solve(&rhs, smax * 1e-15)
        .map_err(|_| GlobalFitError::IllConditionedBasis {
            condition,
            cap: opts.max_condition,
        })?;
    let objective = (&aug * &y - &rhs).norm_squared();
    let x: Vec<f64> = y.iter().zip(&norms).map(|(v, n)| v / n).collect();
    let res = &a * DVector::from_column_slice(&x) - &b;
    let mut sup = [0.0f64; 4];
    let (mut ss, mut nj) = (0.0, 0usize);
    for i in 0..nrow {
        let m = match groups[i] {
            Group::Value => Some(opts.measure[0]),
            Group::First => Some(opts.measure[1]),
            Group::Second => Some(opts.measure[2]),
            _ => None,
        };
        if let Some(m) = m {
            ss += (m * res[i] / wts[i]).powi(2);
            nj += 1;
        }
        let k = match groups[i] {
            Group::Value => 0,
            Group::First => 1,
            Group::Second => 2,
            Group::Ring => 3,
            Group::Prior => continue,
        };
        sup[k] = sup[k].max((res[i] / wts[i]).abs());
    }

    let ansatz = HeatAnsatz {
        dictionary: dictionary.clone(),
        weights: x[..nb].to_vec(),
        constant: x[nb],
    };
    let (big_f, big_g) = if nt > 0 {
        (
            Some(TrigPoly::from_packed(&x[nb + 1..nb + 1 + nt])),
            Some(TrigPoly::from_packed(&x[nb + 1 + nt..])),
        )
    } else {
        (None, None)
    };
    let discrepancy = (ss / nj.max(1) as f64).sqrt();
    let objective_rms = (objective / nrow as f64).sqrt();
    let passed = discrepancy <= opts.delta1;
    let max_weight = ansatz.max_weight();
    Ok(FitResult {
        ansatz,
        big_f,
        big_g,
        report: FitReport {
            discrepancy,
            objective_rms,
            sup_value: sup[0],
            sup_first: sup[1],
            sup_second: sup[2],
            sup_ring: sup[3],
            condition,
            rows: nrow,
            columns: ncol,
            refit_min_eta: None,
            max_weight,
            delta1: opts.delta1,
            passed,
        },
    })
}

/// Fit along a link with F, G refitted jointly; the refitted data must keep
/// `η > 0` for the fit to pass.
pub fn fit_link(
    frame: &FrameField,
    data: &CauchyDataSet,
    dictionary: &Dictionary,
    opts: &FitOptions,
) -> Result<FitResult, GlobalFitError> {
    let target = JetTarget::from_link(frame, data, opts.samples)?;
    let mut out = fit(&target, dictionary, opts)?;
    let refit = out.refit_data(frame, data)?;
    let eta = refit.min_eta(frame, 4096);
    out.report.refit_min_eta = Some(eta);
    out.report.passed = out.report.passed && eta > 0.0;
    Ok(out)
}

/// Multipole centred on the spatial centroid of the link.
pub fn plane_dictionary(frame: &FrameField, age: f64, order: usize) -> Dictionary {
    let pts = frame.curve.coeffs.sample_uniform(512);
    let n = pts.len() as f64;
    let cx = pts.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = pts.iter().map(|p| p[1]).sum::<f64>() / n;
    Dictionary::plane_multipole([cx, cy], age, order)
}

pub fn fit_plane(
    frame: &FrameField,
    data: &CauchyDataSet,
    age: f64,
    order: usize,
    opts: &FitOptions,
) -> Result<FitResult, GlobalFitError> {
    fit_link(frame, data, &plane_dictionary(frame, age, order), opts)
}
