//! Spacetime links: trigonometric curve fits, arclength parametrization,
//! the moving frame `(t, k, n)`, horizontal points, the positive/negative
//! interval partition, and tubular coordinates with their jets.

mod curve;
mod error;
mod frame;
mod tube;
pub mod vec3;

pub use curve::{analytic_fit, arclength_reparametrize, close_open_link, SpacetimeCurve};
pub use error::GeomError;
pub use frame::{
    constant_field, default_seeds, frame_defect, horizontal_points, partition_intervals,
    sliding_field, sliding_field_from_seed, tangent_field, FrameField, FramePoint, FrameReport,
    HorizontalPoint, Interval, IntervalLabel, SlidingField,
};
pub use tube::{coord_jets, default_radius, handedness, reach, tubular_maps, CoordJet, Tube};

use stag_core::TrigVec3;

/// Inputs for [`build_frame`].
#[derive(Clone, Debug)]
pub struct FrameOptions {
    /// `-1` reverses the curve so the orientation follows increasing θ.
    pub orientation: i8,
    /// Positive-interval indices (after orientation) carrying maxima.
    pub max_labels: Vec<usize>,
    pub seed: Option<TrigVec3>,
    pub horizontal_tol: f64,
    pub k3_tol: f64,
    /// `None` selects `min(0.2, reach/4)`.
    pub sigma1: Option<f64>,
    pub rho1: Option<f64>,
}

impl Default for FrameOptions {
    fn default() -> Self {
        FrameOptions {
            orientation: 1,
            max_labels: Vec::new(),
            seed: None,
            horizontal_tol: 1e-6,
            k3_tol: 0.1,
            sigma1: None,
            rho1: None,
        }
    }
}

/// Arclength-parametrize, orient, find horizontal points, partition, pick
/// the sliding field and verify the tube.
pub fn build_frame(curve: &SpacetimeCurve, opts: &FrameOptions) -> Result<FrameField, GeomError> {
    let mut c = arclength_reparametrize(curve)?;
    if opts.orientation < 0 {
        c = c.reversed();
    }
    c.orientation = 1;
    let min_t = c.min_time(4096);
    if min_t <= 0.0 {
        return Err(GeomError::NonPositiveTime { min_t });
    }
    let hs = horizontal_points(&c, opts.horizontal_tol)?;
    let iv = partition_intervals(&c, &hs, 1, &opts.max_labels)?;
    let sf = sliding_field(&c, &hs, opts.seed.as_ref(), opts.k3_tol)?;
    let mut fr = FrameField::new(c, sf.k, hs, iv, 0.0, 0.0);
    let r = default_radius(&fr);
    let (s1, r1) = tubular_maps(
        &fr,
        opts.sigma1.unwrap_or(r),
        opts.rho1.unwrap_or(r),
    )?;
    fr.sigma1 = s1;
    fr.rho1 = r1;
    Ok(fr)
}
