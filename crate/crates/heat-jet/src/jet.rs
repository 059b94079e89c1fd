use std::fmt;

use cauchy_synth::{q_coefficients, CauchyDataSet};
use linkgeom::{coord_jets, FrameField, IntervalLabel};
use nalgebra::Matrix2x3;
use serde::{Deserialize, Serialize};
use stag_core::uniform_grid;

use crate::HeatJetError;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum PointType {
    Max,
    Min,
    Saddle,
    Degenerate,
}

impl fmt::Display for PointType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            PointType::Max => "MAX",
            PointType::Min => "MIN",
            PointType::Saddle => "SADDLE",
            PointType::Degenerate => "DEGENERATE",
        };
        f.write_str(s)
    }
}

/// 2-jet of `v` at one point of the link.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct JetSample {
    pub theta: f64,
    pub v: f64,
    pub v_x: f64,
    pub v_y: f64,
    pub v_t: f64,
    pub beta: f64,
    pub mu: f64,
    pub t: [f64; 3],
    pub k: [f64; 3],
    pub n: [f64; 3],
    pub dsigma_vx: f64,
    pub dsigma_vy: f64,
    pub drho_vx: f64,
    pub drho_vy: f64,
    /// `[[∂_σv_x, ∂_ρv_x], [∂_σv_y, ∂_ρv_y]]`.
    pub h_n: [[f64; 2]; 2],
    pub d_n: f64,
    pub eta: f64,
    pub d_xy: f64,
    pub d_xt: f64,
    pub d_yt: f64,
    /// Rows `∇₃v_x`, `∇₃v_y`.
    pub grad_vx: [f64; 3],
    pub grad_vy: [f64; 3],
    pub label: PointType,
}

impl JetSample {
    /// `[[v_xx, v_xy], [v_yx, v_yy]]`.
    pub fn spatial_hessian(&self) -> [[f64; 2]; 2] {
        [
            [self.grad_vx[0], self.grad_vx[1]],
            [self.grad_vy[0], self.grad_vy[1]],
        ]
    }

    /// Singular values of the 2×3 array `(∇₃v_x, ∇₃v_y)`, descending.
    pub fn singular_values(&self) -> [f64; 2] {
        let m = Matrix2x3::new(
            self.grad_vx[0],
            self.grad_vx[1],
            self.grad_vx[2],
            self.grad_vy[0],
            self.grad_vy[1],
            self.grad_vy[2],
        );
        let s = m.singular_values();
        [s[0].max(s[1]), s[0].min(s[1])]
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkJet {
    pub samples: Vec<JetSample>,
    /// Largest gap between the chain-rule `∂_σv` and the closed form
    /// `F k + G n + (X, Y)`.
    pub closed_form_gap: f64,
    /// Largest gap between the direct solve and the matrix display with the
    /// second slot read as `∂_σv_y`.
    pub matrix_route_gap: f64,
    /// Same display read literally, with `∂_σv_x` in both slots.
    pub literal_route_gap: f64,
    /// Largest residual of the first normal constraint.
    pub constraint_residual: f64,
}

/// `|t₃|` below which a sample is typed degenerate.
pub const DEGENERATE_T3: f64 = 1e-10;

pub fn jet_at(frame: &FrameField, data: &CauchyDataSet, theta: f64) -> Result<(JetSample, [f64; 4]), HeatJetError> {
    let pd = data.point(frame, theta);
    let fp = pd.fp;
    let (t, k, n) = (fp.t, fp.k, fp.n);
    let beta = pd.beta;
    let fj = data.f_jet(frame, theta);
    let (g, g_sigma) = data.g_jet(frame, theta);
    let cj = coord_jets(&fp);
    let (gr, dg) = (cj.grad, cj.dsigma_grad);
    let chain = |ax: usize| -> f64 {
        fj.f_sigma_theta * gr[0][ax]
            + fj.f_sigma_sigma * gr[1][ax]
            + g_sigma * gr[2][ax]
            + fj.f_theta * dg[0][ax]
            + fj.f_sigma * dg[1][ax]
            + g * dg[2][ax]
    };
    let a = chain(0);
    let b = chain(1);
    let first = |ax: usize| fj.f_theta * gr[0][ax] + fj.f_sigma * gr[1][ax] + g * gr[2][ax];
    let (v_x, v_y, v_t) = (first(0), first(1), first(2));

    let q = q_coefficients(&pd);
    let big_f = data.big_f.eval(theta);
    let big_g = data.big_g.eval(theta);
    let a_cf = big_f * k[0] + big_g * n[0] + q.x_beta;
    let b_cf = big_f * k[1] + big_g * n[1] + q.y_beta;
    let closed_gap = (a - a_cf).abs().max((b - b_cf).abs());

    // n₁P + n₂Q = β − a k₁ − b k₂,  n₂P − n₁Q = b k₁ − a k₂
    let det = -(n[0] * n[0] + n[1] * n[1]);
    if det.abs() < 1e-12 {
        return Err(HeatJetError::SingularNormalSystem { theta, det });
    }
    let r1 = beta - a * k[0] - b * k[1];
    let r2 = b * k[0] - a * k[1];
    let p = (-n[0] * r1 - n[1] * r2) / det;
    let qv = (-n[1] * r1 + n[0] * r2) / det;
    let mu = -det;

    let display = |sx: f64, sy: f64| -> (f64, f64) {
        let m2 = [-k[0] * sx - k[1] * sy, -k[1] * sx + k[0] * sy];
        (
            (n[0] * m2[0] + n[1] * m2[1] + beta * n[0]) / mu,
            (n[1] * m2[0] - n[0] * m2[1] + beta * n[1]) / mu,
        )
    };
    let (pm, qm) = display(a, b);
    let (pl, ql) = display(a, a);
    let route_gap = (pm - p).abs().max((qm - qv).abs());
    let literal_gap = (pl - p).abs().max((ql - qv).abs());
    let constraint = (a * k[0] + p * n[0] + b * k[1] + qv * n[1] - beta).abs();

    let d_n = a * qv - p * b;
    let grad_vx: [f64; 3] = [0, 1, 2].map(|ax| a * gr[1][ax] + p * gr[2][ax]);
    let grad_vy: [f64; 3] = [0, 1, 2].map(|ax| b * gr[1][ax] + qv * gr[2][ax]);
    let d_xy = grad_vx[0] * grad_vy[1] - grad_vx[1] * grad_vy[0];
    let d_xt = grad_vx[0] * grad_vy[2] - grad_vx[2] * grad_vy[0];
    let d_yt = grad_vx[1] * grad_vy[2] - grad_vx[2] * grad_vy[1];
    let label = if t[2].abs() <= DEGENERATE_T3 || d_n == 0.0 {
        PointType::Degenerate
    } else if d_n * t[2] > 0.0 {
        if beta < 0.0 {
            PointType::Max
        } else {
            PointType::Min
        }
    } else {
        PointType::Saddle
    };
    let s = JetSample {
        theta,
        v: fj.f0,
        v_x,
        v_y,
        v_t,
        beta,
        mu,
        t,
        k,
        n,
        dsigma_vx: a,
        dsigma_vy: b,
        drho_vx: p,
        drho_vy: qv,
        h_n: [[a, p], [b, qv]],
        d_n,
        eta: mu * d_n,
        d_xy,
        d_xt,
        d_yt,
        grad_vx,
        grad_vy,
        label,
    };
    Ok((s, [closed_gap, route_gap, literal_gap, constraint]))
}

/// Jet of `v` at `n` uniform samples of the link.
pub fn link_jet(frame: &FrameField, data: &CauchyDataSet, n: usize) -> Result<LinkJet, HeatJetError> {
    link_jet_at(frame, data, &uniform_grid(n))
}

pub fn link_jet_at(frame: &FrameField, data: &CauchyDataSet, thetas: &[f64]) -> Result<LinkJet, HeatJetError> {
    let mut samples = Vec::with_capacity(thetas.len());
    let mut gaps = [0.0f64; 4];
    for &th in thetas {
        let (s, g) = jet_at(frame, data, th)?;
        samples.push(s);
        for i in 0..4 {
            gaps[i] = gaps[i].max(g[i]);
        }
    }
    Ok(LinkJet {
        samples,
        closed_form_gap: gaps[0],
        matrix_route_gap: gaps[1],
        literal_route_gap: gaps[2],
        constraint_residual: gaps[3],
    })
}

/// Worst offenders for Conditions (A), (B), (C).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub samples: usize,
    pub max_grad_xy: f64,
    pub worst_a_theta: f64,
    pub label_mismatches: usize,
    pub first_mismatch: Option<(f64, String, String)>,
    pub min_eta: f64,
    pub min_eta_theta: f64,
    /// Smallest `σ_min − floor` over the samples, where
    /// `floor = min η / (μ · max σ_max)`.
    pub min_sv_margin: f64,
    pub min_sv: f64,
    pub min_sv_theta: f64,
    pub passed: [bool; 3],
}

impl fmt::Display for ConditionReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let ok = |b: bool| if b { "PASS" } else { "FAIL" };
        writeln!(f, "samples: {}", self.samples)?;
        writeln!(
            f,
            "condition A: {}  max |v_x|,|v_y| = {:.3e} at theta = {:.6}",
            ok(self.passed[0]),
            self.max_grad_xy,
            self.worst_a_theta
        )?;
        match &self.first_mismatch {
            Some((th, want, got)) => writeln!(
                f,
                "condition B: {}  {} mismatches, first at theta = {:.6} (expected {}, got {})",
                ok(self.passed[1]),
                self.label_mismatches,
                th,
                want,
                got
            )?,
            None => writeln!(f, "condition B: {}  0 mismatches", ok(self.passed[1]))?,
        }
        write!(
            f,
            "condition C: {}  min eta = {:.3e} at theta = {:.6}; min singular value = {:.3e} at theta = {:.6}",
            ok(self.passed[2]),
            self.min_eta,
            self.min_eta_theta,
            self.min_sv,
            self.min_sv_theta
        )
    }
}

fn expected_type(frame: &FrameField, theta: f64) -> PointType {
    let iv = &frame.intervals[frame.interval_of(theta)];
    match iv.label {
        IntervalLabel::Max => PointType::Max,
        IntervalLabel::Min => PointType::Min,
        IntervalLabel::Saddle => PointType::Saddle,
    }
}

fn near_horizontal(frame: &FrameField, theta: f64) -> bool {
    frame
        .horizontal
        .iter()
        .any(|h| stag_core::trig::angle_diff(h.theta, theta).abs() < 1e-8)
}

/// Builds the report, then raises the first violated condition.
pub fn condition_report(jet: &LinkJet, frame: &FrameField) -> ConditionReport {
    let mut max_a = 0.0f64;
    let mut worst_a = 0.0;
    let mut mism = 0;
    let mut first = None;
    let mut min_eta = f64::INFINITY;
    let mut min_eta_th = 0.0;
    let svs: Vec<[f64; 2]> = jet.samples.iter().map(|s| s.singular_values()).collect();
    let smax = svs.iter().map(|s| s[0]).fold(0.0, f64::max);
    for s in &jet.samples {
        let a = s.v_x.abs().max(s.v_y.abs());
        if a > max_a {
            max_a = a;
            worst_a = s.theta;
        }
        let want = expected_type(frame, s.theta);
        let ok = s.label == want
            || (s.label == PointType::Degenerate && near_horizontal(frame, s.theta));
        if !ok {
            mism += 1;
            if first.is_none() {
                first = Some((s.theta, want.to_string(), s.label.to_string()));
            }
        }
        if s.eta < min_eta {
            min_eta = s.eta;
            min_eta_th = s.theta;
        }
    }
    let mut min_sv = f64::INFINITY;
    let mut min_sv_th = 0.0;
    let mut margin = f64::INFINITY;
    for (s, sv) in jet.samples.iter().zip(&svs) {
        if sv[1] < min_sv {
            min_sv = sv[1];
            min_sv_th = s.theta;
        }
        let floor = (1.0 - 1e-9) * min_eta / (s.mu * smax);
        margin = margin.min(sv[1] - floor);
    }
    let c_ok = min_eta > 0.0 && margin >= 0.0;
    ConditionReport {
        samples: jet.samples.len(),
        max_grad_xy: max_a,
        worst_a_theta: worst_a,
        label_mismatches: mism,
        first_mismatch: first,
        min_eta,
        min_eta_theta: min_eta_th,
        min_sv_margin: margin,
        min_sv,
        min_sv_theta: min_sv_th,
        passed: [max_a <= 1e-12, mism == 0, c_ok],
    }
}

pub fn verify_conditions(jet: &LinkJet, frame: &FrameField) -> Result<ConditionReport, HeatJetError> {
    let rep = condition_report(jet, frame);
    if !rep.passed[0] {
        return Err(HeatJetError::ConditionAViolated {
            theta: rep.worst_a_theta,
            value: rep.max_grad_xy,
        });
    }
    if let Some((theta, want, got)) = &rep.first_mismatch {
        return Err(HeatJetError::ConditionBViolated {
            theta: *theta,
            expected: want.clone(),
            found: got.clone(),
        });
    }
    if !rep.passed[2] {
        return Err(HeatJetError::ConditionCViolated {
            theta: rep.min_eta_theta,
            eta: rep.min_eta,
            singular_value: rep.min_sv,
        });
    }
    Ok(rep)
}
