use linkgeom::vec3::{axpy, cross, norm};
use linkgeom::FrameField;
use serde::{Deserialize, Serialize};
use stag_core::{uniform_grid, TrigPoly, TAU};

use crate::beta::BetaFunction;
use crate::fg::{ContinuousFG, GluePath, SmoothFG};
use crate::qpoly::{q_coefficients, PointData};
use crate::SynthError;

/// Cauchy data on Σ: `f(θ,σ) = f₀ + σβk₃ + σ²F/2` and
/// `g(θ,σ) = βN₃(θ,σ) + σ(G + βc t₃)`, with β, F, G functions of θ only.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CauchyDataSet {
    pub beta: TrigPoly,
    pub big_f: TrigPoly,
    pub big_g: TrigPoly,
    /// `f₀(θ) = ∫₀^θ β t₃ ds`.
    pub f0: TrigPoly,
}

/// Jet of `f` on the curve; θ-derivatives are arclength derivatives.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FJet {
    pub f0: f64,
    pub f_theta: f64,
    pub f_sigma: f64,
    pub f_theta_theta: f64,
    pub f_sigma_theta: f64,
    pub f_sigma_sigma: f64,
}

pub fn assemble_data(
    frame: &FrameField,
    beta: &TrigPoly,
    big_f: &TrigPoly,
    big_g: &TrigPoly,
) -> Result<CauchyDataSet, SynthError> {
    let p = beta.mul(&frame.t_field.0[2]);
    let gap = frame.curve.length * p.a0;
    if gap.abs() > 1e-10 {
        return Err(SynthError::PeriodicityViolated { gap });
    }
    let anti = p.antiderivative().scale(frame.curve.length / TAU);
    let f0 = anti.add(&TrigPoly::constant(-anti.eval(0.0)));
    Ok(CauchyDataSet {
        beta: beta.clone(),
        big_f: big_f.clone(),
        big_g: big_g.clone(),
        f0,
    })
}

impl CauchyDataSet {
    pub fn point(&self, frame: &FrameField, theta: f64) -> PointData {
        PointData::new(frame, &self.beta, theta)
    }

    pub fn f_jet(&self, frame: &FrameField, theta: f64) -> FJet {
        let p = self.point(frame, theta);
        let fp = &p.fp;
        FJet {
            f0: self.f0.eval(theta),
            f_theta: p.beta * fp.t[2],
            f_sigma: p.beta * fp.k[2],
            f_theta_theta: p.dbeta * fp.t[2] + p.beta * fp.dt[2],
            f_sigma_theta: p.dbeta * fp.k[2] + p.beta * fp.dk[2],
            f_sigma_sigma: self.big_f.eval(theta),
        }
    }

    pub fn f_on_sigma(&self, frame: &FrameField, theta: f64, sigma: f64) -> f64 {
        let k3 = frame.k_field.0[2].eval(theta);
        self.f0.eval(theta)
            + sigma * self.beta.eval(theta) * k3
            + 0.5 * sigma * sigma * self.big_f.eval(theta)
    }

    pub fn g_on_sigma(&self, frame: &FrameField, theta: f64, sigma: f64) -> f64 {
        let fp = frame.at(theta);
        let w = cross(axpy(fp.t, sigma, fp.dk), fp.k);
        let n3 = w[2] / norm(w);
        let b = self.beta.eval(theta);
        b * n3 + sigma * (self.big_g.eval(theta) + b * fp.c() * fp.t[2])
    }

    /// `(g, ∂_σ g)` on the curve.
    pub fn g_jet(&self, frame: &FrameField, theta: f64) -> (f64, f64) {
        let n3 = frame.n_field.0[2].eval(theta);
        (self.beta.eval(theta) * n3, self.big_g.eval(theta))
    }

    pub fn eta(&self, frame: &FrameField, theta: f64) -> f64 {
        let p = self.point(frame, theta);
        q_coefficients(&p).eval(self.big_f.eval(theta), self.big_g.eval(theta))
    }

    /// Smallest η over `n` uniform samples.
    pub fn min_eta(&self, frame: &FrameField, n: usize) -> f64 {
        uniform_grid(n)
            .into_iter()
            .map(|u| self.eta(frame, u))
            .fold(f64::INFINITY, f64::min)
    }
}

/// Certificates of a synthesis run, for the data-set report.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DataReport {
    pub beta: TrigPoly,
    pub big_f: TrigPoly,
    pub big_g: TrigPoly,
    pub beta_loop_integral: f64,
    pub taus: Vec<f64>,
    pub exterior_point: [f64; 2],
    pub glue_path: GluePath,
    pub eta_continuous_min: f64,
    pub eta_smooth_min: f64,
    pub eta_horizontal: Vec<f64>,
    pub smoothing_degree: usize,
    pub smoothing_deviation: f64,
    pub lipschitz: f64,
}

impl DataReport {
    pub fn new(
        frame: &FrameField,
        beta: &BetaFunction,
        cont: &ContinuousFG,
        smooth: &SmoothFG,
    ) -> Self {
        let eta_horizontal = frame
            .horizontal
            .iter()
            .map(|h| q_coefficients(&PointData::new(frame, &beta.coeffs, h.theta)).f0)
            .collect();
        DataReport {
            beta: beta.coeffs.clone(),
            big_f: smooth.f.clone(),
            big_g: smooth.g.clone(),
            beta_loop_integral: beta.loop_integral,
            taus: cont.taus.clone(),
            exterior_point: cont.exterior_point,
            glue_path: cont.path,
            eta_continuous_min: cont.eta0,
            eta_smooth_min: smooth.min_eta,
            eta_horizontal,
            smoothing_degree: smooth.degree,
            smoothing_deviation: smooth.deviation,
            lipschitz: smooth.lipschitz,
        }
    }
}
