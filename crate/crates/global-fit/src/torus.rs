use cauchy_synth::CauchyDataSet;
use linkgeom::FrameField;
use serde::{Deserialize, Serialize};

use crate::basis::Dictionary;
use crate::fit::{fit_link, FitOptions, FitResult};
use crate::scaling::ScalingMap;
use crate::GlobalFitError;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusSearch {
    pub eta0: f64,
    pub eta_floor: f64,
    pub k_max: usize,
    /// Discrepancy budget ε₂.
    pub eps2: f64,
}

impl Default for TorusSearch {
    fn default() -> Self {
        TorusSearch {
            eta0: 1.0,
            eta_floor: 1e-3,
            k_max: 6,
            eps2: 1e-3,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TorusFit {
    pub eta: f64,
    pub result: FitResult,
    /// `(η, discrepancy)` for every η tried.
    pub history: Vec<(f64, f64)>,
}

/// Whether `Λ_η(L)` lies in `B₁ × (0, ∞)`.
pub fn fits_unit_ball(frame: &FrameField, eta: f64) -> bool {
    let m = ScalingMap::new(eta);
    frame.curve.coeffs.sample_uniform(1024).iter().all(|p| {
        let q = m.forward(*p);
        q[0].hypot(q[1]) < 1.0 && q[2] > 0.0
    })
}

/// Fit of `u∘Λ_η` with `u` a torus caloric function of wavevectors in
/// `[−K, K]²`, in the link's own coordinates.
pub fn fit_torus(
    frame: &FrameField,
    data: &CauchyDataSet,
    eta: f64,
    k_max: usize,
    opts: &FitOptions,
) -> Result<FitResult, GlobalFitError> {
    fit_link(frame, data, &Dictionary::Torus { eta, k_max }, opts)
}

/// Halves η from `eta0` until the fit discrepancy drops below ε₂ and the
/// refitted data keep `η > 0`.
pub fn search_torus(
    frame: &FrameField,
    data: &CauchyDataSet,
    opts: &FitOptions,
    search: &TorusSearch,
) -> Result<TorusFit, GlobalFitError> {
    let mut eta = search.eta0.min(1.0);
    let mut history = Vec::new();
    let mut best: Option<(f64, f64)> = None;
    let opts = FitOptions {
        delta1: search.eps2,
        ..opts.clone()
    };
    while eta >= search.eta_floor {
        if fits_unit_ball(frame, eta) {
            let r = fit_torus(frame, data, eta, search.k_max, &opts)?;
            let d = r.report.discrepancy;
            history.push((eta, d));
            if best.is_none_or(|(_, bd)| d < bd) {
                best = Some((eta, d));
            }
            if r.report.passed {
                return Ok(TorusFit {
                    eta,
                    result: r,
                    history,
                });
            }
        }
        eta *= 0.5;
    }
    let (eta, discrepancy) = best.unwrap_or((eta, f64::INFINITY));
    Err(GlobalFitError::EtaFloorReached { eta, discrepancy })
}
