use heat_jet::PointType;
use serde::{Deserialize, Serialize};

use crate::arcs::{polyline_distance, ConnectingArc, LinkPolyline};
use crate::continuation::{EventKind, Tracking};
use crate::TrackError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    /// Spacetime radius of the tube around the link.
    pub tube_radius: f64,
    /// Hausdorff budget ε.
    pub epsilon: f64,
    /// Realized points closer than this to an arc apex are not typed.
    pub apex_exclusion: f64,
}

impl CompareOptions {
    /// ε set to 0.1 tube radii and the apex exclusion to one radius.
    pub fn with_tube(tube_radius: f64) -> Self {
        CompareOptions {
            tube_radius,
            epsilon: 0.1 * tube_radius,
            apex_exclusion: tube_radius,
        }
    }
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions::with_tube(0.1)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ArcMatch {
    pub arc: usize,
    pub kind: EventKind,
    pub event: Option<usize>,
    pub event_offset: f64,
    pub trajectories: Vec<usize>,
    pub realized_points: usize,
    /// Realized → arc.
    pub hausdorff_to_arc: f64,
    /// Arc → realized.
    pub hausdorff_from_arc: f64,
    pub typed_points: usize,
    pub type_mismatches: usize,
    pub unimodal: bool,
}

impl ArcMatch {
    pub fn hausdorff(&self) -> f64 {
        self.hausdorff_to_arc.max(self.hausdorff_from_arc)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PatternReport {
    pub prescribed: [usize; 2],
    /// MERGE and SPLIT events inside the tube.
    pub realized: [usize; 2],
    pub events_outside_tube: usize,
    pub arcs: Vec<ArcMatch>,
    /// `(t, x, y)` of critical points in the tube that belong to no matched
    /// trajectory.
    pub unmatched_in_tube: Vec<[f64; 3]>,
    /// Slices where the in-tube count changes with no event in between.
    pub count_jumps: Vec<f64>,
    pub checks: Vec<Check>,
    pub options: CompareOptions,
    pub passed: bool,
}

impl PatternReport {
    fn check(&self, name: &str) -> bool {
        self.checks.iter().any(|c| c.name == name && c.passed)
    }

    /// First failing check as an error.
    pub fn into_result(self) -> Result<PatternReport, TrackError> {
        if !self.check("census") {
            return Err(TrackError::CensusMismatch { prescribed: self.prescribed, realized: self.realized });
        }
        if !self.check("isolation") {
            return Err(TrackError::IsolationViolated { count: self.unmatched_in_tube.len(), first: self.unmatched_in_tube.first().copied() });
        }
        if !self.check("types") {
            let n = self.arcs.iter().map(|a| a.type_mismatches).sum();
            return Err(TrackError::TypeMismatch { count: n });
        }
        if !self.passed {
            let names: Vec<String> = self.checks.iter().filter(|c| !c.passed).map(|c| c.name.clone()).collect();
            return Err(TrackError::PatternFailed { checks: names.join(", ") });
        }
        Ok(self)
    }
}

impl std::fmt::Display for PatternReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(
            f,
            "census: prescribed {} MERGE / {} SPLIT, realized {} / {} ({} events outside the tube)",
            self.prescribed[0], self.prescribed[1], self.realized[0], self.realized[1], self.events_outside_tube
        )?;
        for a in &self.arcs {
            writeln!(
                f,
                "arc {} {}: event {:?} offset {:.2e}, Hausdorff {:.3e} / {:.3e}, types {}/{} wrong, unimodal {}",
                a.arc, a.kind, a.event, a.event_offset, a.hausdorff_to_arc, a.hausdorff_from_arc, a.type_mismatches, a.typed_points, a.unimodal
            )?;
        }
        for c in &self.checks {
            writeln!(f, "{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail)?;
        }
        Ok(())
    }
}

fn d3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

/// Realized-versus-prescribed comparison inside the tube: event census,
/// two-sided Hausdorff distance per arc, type agreement, isolation,
/// unimodality of the height along each realized cap or cup, and constancy
/// of the in-tube count between events.
pub fn compare_pattern(tracking: &Tracking, arcs: &[ConnectingArc], link: &LinkPolyline, opts: &CompareOptions) -> PatternReport {
    let r = opts.tube_radius;
    let prescribed = [
        arcs.iter().filter(|a| a.kind == EventKind::Merge).count(),
        arcs.iter().filter(|a| a.kind == EventKind::Split).count(),
    ];
    let in_tube: Vec<bool> = tracking.events.iter().map(|e| link.distance([e.x, e.y, e.t]) < r).collect();
    let realized = [
        tracking.events.iter().zip(&in_tube).filter(|(e, t)| **t && e.kind == EventKind::Merge).count(),
        tracking.events.iter().zip(&in_tube).filter(|(e, t)| **t && e.kind == EventKind::Split).count(),
    ];
    let events_outside_tube = in_tube.iter().filter(|t| !**t).count();

    let mut used = vec![false; tracking.events.len()];
    let mut matches = Vec::new();
    let mut matched_trajs = std::collections::HashSet::new();
    for (ai, arc) in arcs.iter().enumerate() {
        let best = tracking
            .events
            .iter()
            .enumerate()
            .filter(|(i, e)| in_tube[*i] && !used[*i] && e.kind == arc.kind)
            .map(|(i, e)| (i, d3([e.x, e.y, e.t], arc.apex)))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        let mut m = ArcMatch {
            arc: ai,
            kind: arc.kind,
            event: None,
            event_offset: f64::INFINITY,
            trajectories: Vec::new(),
            realized_points: 0,
            hausdorff_to_arc: f64::INFINITY,
            hausdorff_from_arc: f64::INFINITY,
            typed_points: 0,
            type_mismatches: 0,
            unimodal: false,
        };
        let Some((ei, off)) = best else {
            matches.push(m);
            continue;
        };
        used[ei] = true;
        let ev = tracking.events[ei];
        m.event = Some(ei);
        m.event_offset = off;
        m.trajectories = ev.trajectories.to_vec();
        let mut branches: Vec<Vec<([f64; 3], PointType, f64)>> = Vec::new();
        // whole in-tube paths, so the arc ends are not clipped by the slicing
        let mut paths: Vec<Vec<[f64; 3]>> = Vec::new();
        for &tid in &ev.trajectories {
            matched_trajs.insert(tid);
            let tr = &tracking.trajectories[tid];
            let mut b = Vec::new();
            let mut path = Vec::new();
            for p in &tr.points {
                let q = [p.x, p.y, p.t];
                let (d, th) = link.nearest(q);
                if d < r {
                    path.push(q);
                    if let Some(u) = arc.local(th) {
                        b.push((q, p.kind, u));
                    }
                }
            }
            branches.push(b);
            paths.push(path);
        }
        // realized polyline: first path, the fold point, second path
        let apex = [ev.x, ev.y, ev.t];
        let mut poly: Vec<[f64; 3]> = Vec::new();
        let order_in_time = |b: &Vec<[f64; 3]>, towards_event: bool| -> Vec<[f64; 3]> {
            let mut v = b.clone();
            v.sort_by(|a, c| a[2].total_cmp(&c[2]));
            let rising = ev.kind == EventKind::Merge;
            if rising != towards_event {
                v.reverse();
            }
            v
        };
        if let Some(b0) = paths.first() {
            poly.extend(order_in_time(b0, true));
        }
        poly.push(apex);
        if let Some(b1) = paths.get(1) {
            poly.extend(order_in_time(b1, false));
        }
        let all: Vec<&([f64; 3], PointType, f64)> = branches.iter().flatten().collect();
        m.realized_points = all.len();
        if !all.is_empty() {
            m.hausdorff_to_arc = all.iter().map(|p| polyline_distance(p.0, &arc.points)).fold(0.0, f64::max);
            m.hausdorff_to_arc = m.hausdorff_to_arc.max(polyline_distance(apex, &arc.points));
            m.hausdorff_from_arc = arc.points.iter().map(|q| polyline_distance(*q, &poly)).fold(0.0, f64::max);
        }
        for p in &all {
            if p.1 == PointType::Degenerate || d3(p.0, arc.apex) < opts.apex_exclusion {
                continue;
            }
            let (k, _) = arc
                .points
                .iter()
                .enumerate()
                .map(|(k, q)| (k, d3(*q, p.0)))
                .min_by(|a, b| a.1.total_cmp(&b.1))
                .unwrap();
            m.typed_points += 1;
            if arc.types[k] != PointType::Degenerate && arc.types[k] != p.1 {
                m.type_mismatches += 1;
            }
        }
        let mut hu: Vec<(f64, f64)> = all.iter().map(|p| (p.2, p.0[2])).collect();
        hu.sort_by(|a, b| a.0.total_cmp(&b.0));
        m.unimodal = !hu.is_empty() && unimodal(&hu, arc.kind);
        matches.push(m);
    }

    let mut unmatched = Vec::new();
    for tr in &tracking.trajectories {
        if matched_trajs.contains(&tr.id) {
            continue;
        }
        for p in &tr.points {
            if link.distance([p.x, p.y, p.t]) < r {
                unmatched.push([p.t, p.x, p.y]);
            }
        }
    }

    let ns = tracking.slice_times.len();
    let mut counts = vec![0usize; ns];
    for tr in &tracking.trajectories {
        for (p, s) in tr.points.iter().zip(&tr.slices) {
            if link.distance([p.x, p.y, p.t]) < r {
                counts[*s] += 1;
            }
        }
    }
    let event_times: Vec<f64> = tracking.events.iter().zip(&in_tube).filter(|(_, t)| **t).map(|(e, _)| e.t).collect();
    let mut jumps = Vec::new();
    for k in 0..ns.saturating_sub(1) {
        if counts[k] != counts[k + 1] {
            let (t0, t1) = (tracking.slice_times[k], tracking.slice_times[k + 1]);
            let slack = t1 - t0;
            if !event_times.iter().any(|t| *t >= t0 - slack && *t <= t1 + slack) {
                jumps.push(t1);
            }
        }
    }

    let hmax = matches.iter().map(|m| m.hausdorff()).fold(0.0, f64::max);
    let mism: usize = matches.iter().map(|m| m.type_mismatches).sum();
    let typed: usize = matches.iter().map(|m| m.typed_points).sum();
    let checks = vec![
        Check {
            name: "census".into(),
            passed: prescribed == realized,
            detail: format!("prescribed {:?}, realized {:?}", prescribed, realized),
        },
        Check {
            name: "hausdorff".into(),
            passed: matches.iter().all(|m| m.event.is_some()) && hmax <= opts.epsilon,
            detail: format!("max {:.3e} against budget {:.3e}", hmax, opts.epsilon),
        },
        Check {
            name: "types".into(),
            passed: mism == 0 && typed > 0,
            detail: format!("{mism} of {typed} typed points disagree"),
        },
        Check {
            name: "isolation".into(),
            passed: unmatched.is_empty(),
            detail: format!("{} unmatched critical points in the tube", unmatched.len()),
        },
        Check {
            name: "unimodality".into(),
            passed: matches.iter().all(|m| m.unimodal),
            detail: format!("{} of {} arcs unimodal", matches.iter().filter(|m| m.unimodal).count(), matches.len()),
        },
        Check {
            name: "count".into(),
            passed: jumps.is_empty(),
            detail: format!("{} unexplained changes of the in-tube count", jumps.len()),
        },
    ];
    let passed = checks.iter().all(|c| c.passed);
    PatternReport {
        prescribed,
        realized,
        events_outside_tube,
        arcs: matches,
        unmatched_in_tube: unmatched,
        count_jumps: jumps,
        checks,
        options: opts.clone(),
        passed,
    }
}

/// Height samples `(u, t)` sorted by `u` rise then fall (MERGE) or fall
/// then rise (SPLIT).
pub fn unimodal(hu: &[(f64, f64)], kind: EventKind) -> bool {
    let h: Vec<f64> = hu
        .iter()
        .map(|p| if kind == EventKind::Merge { p.1 } else { -p.1 })
        .collect();
    let k = h
        .iter()
        .enumerate()
        .max_by(|a, b| a.1.total_cmp(b.1))
        .map(|x| x.0)
        .unwrap_or(0);
    let tol = 1e-9;
    h[..=k].windows(2).all(|w| w[1] >= w[0] - tol) && h[k..].windows(2).all(|w| w[1] <= w[0] + tol)
}
