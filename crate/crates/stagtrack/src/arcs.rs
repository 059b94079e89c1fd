use heat_jet::PointType;
use linkgeom::{FrameField, IntervalLabel, SpacetimeCurve};
use serde::{Deserialize, Serialize};
use stag_core::TAU;

use crate::continuation::EventKind;

/// Prescribed connecting arc: the part of the link between the midpoints of
/// the two intervals adjacent to one horizontal point.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConnectingArc {
    pub kind: EventKind,
    pub theta_apex: f64,
    pub apex: [f64; 3],
    /// Start of the arc's parameter range; the range is `[start, start + len]`.
    pub start: f64,
    pub len: f64,
    pub points: Vec<[f64; 3]>,
    pub types: Vec<PointType>,
}

impl ConnectingArc {
    /// Offset of `theta` from the start of the range, if inside it.
    pub fn local(&self, theta: f64) -> Option<f64> {
        let u = (theta - self.start).rem_euclid(TAU);
        (u <= self.len).then_some(u)
    }
}

pub fn label_type(l: IntervalLabel) -> PointType {
    match l {
        IntervalLabel::Max => PointType::Max,
        IntervalLabel::Min => PointType::Min,
        IntervalLabel::Saddle => PointType::Saddle,
    }
}

/// One arc per horizontal point; a local maximum of `t` along the link is a
/// merge, a local minimum a split.
pub fn connecting_arcs(frame: &FrameField, samples: usize) -> Vec<ConnectingArc> {
    let ivs = &frame.intervals;
    let mid = |j: usize| ivs[j].start + 0.5 * ivs[j].len();
    let mut out = Vec::new();
    for h in &frame.horizontal {
        let before = frame.interval_of(h.theta - 1e-9);
        let after = frame.interval_of(h.theta + 1e-9);
        let start = mid(before);
        let len = (mid(after) - start).rem_euclid(TAU);
        let kind = if h.slope < 0.0 { EventKind::Merge } else { EventKind::Split };
        let mut points = Vec::with_capacity(samples + 1);
        let mut types = Vec::with_capacity(samples + 1);
        for i in 0..=samples {
            let th = start + len * i as f64 / samples as f64;
            points.push(frame.curve.point(th));
            let u = (th - h.theta).rem_euclid(TAU);
            types.push(if u.min(TAU - u) < 1e-12 {
                PointType::Degenerate
            } else {
                label_type(ivs[frame.interval_of(th)].label)
            });
        }
        out.push(ConnectingArc {
            kind,
            theta_apex: h.theta,
            apex: frame.curve.point(h.theta),
            start,
            len,
            points,
            types,
        });
    }
    out
}

/// Dense closed polyline of the link for spacetime distance queries.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkPolyline {
    pub thetas: Vec<f64>,
    pub points: Vec<[f64; 3]>,
}

fn seg_dist(p: [f64; 3], a: [f64; 3], b: [f64; 3]) -> (f64, f64) {
    let d = [b[0] - a[0], b[1] - a[1], b[2] - a[2]];
    let w = [p[0] - a[0], p[1] - a[1], p[2] - a[2]];
    let dd = d[0] * d[0] + d[1] * d[1] + d[2] * d[2];
    let s = if dd > 0.0 {
        ((w[0] * d[0] + w[1] * d[1] + w[2] * d[2]) / dd).clamp(0.0, 1.0)
    } else {
        0.0
    };
    let q = [w[0] - s * d[0], w[1] - s * d[1], w[2] - s * d[2]];
    ((q[0] * q[0] + q[1] * q[1] + q[2] * q[2]).sqrt(), s)
}

/// Distance from `p` to the polyline through `pts` (open).
pub fn polyline_distance(p: [f64; 3], pts: &[[f64; 3]]) -> f64 {
    if pts.len() == 1 {
        return seg_dist(p, pts[0], pts[0]).0;
    }
    pts.windows(2).map(|w| seg_dist(p, w[0], w[1]).0).fold(f64::INFINITY, f64::min)
}

impl LinkPolyline {
    pub fn new(curve: &SpacetimeCurve, n: usize) -> Self {
        let thetas: Vec<f64> = (0..n).map(|i| TAU * i as f64 / n as f64).collect();
        let points = thetas.iter().map(|t| curve.point(*t)).collect();
        LinkPolyline { thetas, points }
    }

    /// Distance to the closed polyline and the parameter of the nearest
    /// point.
    pub fn nearest(&self, p: [f64; 3]) -> (f64, f64) {
        let n = self.points.len();
        let mut best = (f64::INFINITY, 0.0);
        for i in 0..n {
            let j = (i + 1) % n;
            let (d, s) = seg_dist(p, self.points[i], self.points[j]);
            if d < best.0 {
                best = (d, self.thetas[i] + s * TAU / n as f64);
            }
        }
        best
    }

    pub fn distance(&self, p: [f64; 3]) -> f64 {
        self.nearest(p).0
    }
}
