use linkgeom::SpacetimeCurve;
use serde::{Deserialize, Serialize};
use stag_core::TrigVec3;

/// Parabolic scaling `Λ_η(x, y, t) = (√η x, √η y, η t)`, which maps heat
/// solutions to heat solutions.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScalingMap {
    pub eta: f64,
}

impl ScalingMap {
    pub fn new(eta: f64) -> Self {
        assert!(eta > 0.0 && eta <= 1.0, "eta must lie in (0, 1]");
        ScalingMap { eta }
    }

    pub fn forward(&self, p: [f64; 3]) -> [f64; 3] {
        let s = self.eta.sqrt();
        [s * p[0], s * p[1], self.eta * p[2]]
    }

    pub fn inverse(&self, p: [f64; 3]) -> [f64; 3] {
        let s = self.eta.sqrt();
        [p[0] / s, p[1] / s, p[2] / self.eta]
    }

    /// `(u∘Λ_η)` at `p` for any function `u` of spacetime.
    pub fn pullback<F: Fn([f64; 3]) -> f64>(&self, u: F) -> impl Fn([f64; 3]) -> f64 {
        let m = *self;
        move |p| u(m.forward(p))
    }
}

/// `Λ_η(L)`. The scaling multiplies `t₃` by a positive factor pointwise, so
/// horizontal points, interval signs and labels carry over unchanged; the
/// curve is re-parametrized by arclength when a frame is built on it.
pub fn scale_link(curve: &SpacetimeCurve, eta: f64) -> SpacetimeCurve {
    let m = ScalingMap::new(eta);
    let s = eta.sqrt();
    let c = &curve.coeffs.0;
    let coeffs = TrigVec3([c[0].scale(s), c[1].scale(s), c[2].scale(m.eta)]);
    let mut out = SpacetimeCurve::new(coeffs);
    out.orientation = curve.orientation;
    out
}

/// Inverse bookkeeping for [`scale_link`].
pub fn unscale_link(curve: &SpacetimeCurve, eta: f64) -> SpacetimeCurve {
    let s = eta.sqrt();
    let c = &curve.coeffs.0;
    let coeffs = TrigVec3([c[0].scale(1.0 / s), c[1].scale(1.0 / s), c[2].scale(1.0 / eta)]);
    let mut out = SpacetimeCurve::new(coeffs);
    out.orientation = curve.orientation;
    out
}

