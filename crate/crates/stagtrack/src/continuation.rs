use heat_jet::PointType;
use serde::{Deserialize, Serialize};

use crate::critical::CriticalPoint;
use crate::TrackError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Slice {
    pub time: f64,
    pub points: Vec<CriticalPoint>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Trajectory {
    pub id: usize,
    pub points: Vec<CriticalPoint>,
    /// Slice index of each point.
    pub slices: Vec<usize>,
}

impl Trajectory {
    /// Type of the first nondegenerate point.
    pub fn kind(&self) -> PointType {
        self.points
            .iter()
            .map(|p| p.kind)
            .find(|k| *k != PointType::Degenerate)
            .unwrap_or(PointType::Degenerate)
    }

    /// Number of type changes between nondegenerate points.
    pub fn type_changes(&self) -> usize {
        let ks: Vec<PointType> = self
            .points
            .iter()
            .map(|p| p.kind)
            .filter(|k| *k != PointType::Degenerate)
            .collect();
        ks.windows(2).filter(|w| w[0] != w[1]).count()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum EventKind {
    Merge,
    Split,
}

impl std::fmt::Display for EventKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            EventKind::Merge => "MERGE",
            EventKind::Split => "SPLIT",
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BifurcationEvent {
    pub kind: EventKind,
    pub x: f64,
    pub y: f64,
    pub t: f64,
    /// Extremum trajectory first, then the saddle.
    pub trajectories: [usize; 2],
    /// Fitted `a` in `separation² = a|t − t_c|`.
    pub coefficient: f64,
    /// `None` when too few common slices remain to judge the fit.
    pub fit_residual: Option<f64>,
    /// Fit residual above 10% of the data norm.
    pub poor_fit: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackOptions {
    /// Speed coefficient `c₁`; estimated from the first slices when `None`.
    pub c1: Option<f64>,
    /// Fold coefficient `c₂`; `3√a` with `a = fold_coefficient` when `None`.
    pub c2: Option<f64>,
    pub fold_coefficient: f64,
    pub gate_max: f64,
    /// Slices used by the fold fit.
    pub fold_slices: usize,
    /// Abort on ambiguous matches instead of flagging them.
    pub strict: bool,
}

impl Default for TrackOptions {
    fn default() -> Self {
        TrackOptions {
            c1: None,
            c2: None,
            fold_coefficient: 4.0,
            gate_max: f64::INFINITY,
            fold_slices: 6,
            strict: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tracking {
    pub trajectories: Vec<Trajectory>,
    pub events: Vec<BifurcationEvent>,
    pub slice_times: Vec<f64>,
    pub c1: f64,
    pub c2: f64,
    /// `(t, x, y)` of matches that had a rival within 10% of the gate.
    pub ambiguities: Vec<[f64; 3]>,
}

impl Tracking {
    pub fn count(&self, kind: EventKind) -> usize {
        self.events.iter().filter(|e| e.kind == kind).count()
    }

    /// Applies `m` to every point and event location `(x, y, t)`; used to
    /// carry torus results back through the inverse scaling.
    pub fn map_points(&mut self, m: impl Fn([f64; 3]) -> [f64; 3]) {
        for tr in &mut self.trajectories {
            for p in &mut tr.points {
                let q = m([p.x, p.y, p.t]);
                p.x = q[0];
                p.y = q[1];
                p.t = q[2];
            }
        }
        for e in &mut self.events {
            let q = m([e.x, e.y, e.t]);
            e.x = q[0];
            e.y = q[1];
            e.t = q[2];
        }
        for t in &mut self.slice_times {
            *t = m([0.0, 0.0, *t])[2];
        }
    }
}

fn compatible(a: PointType, b: PointType) -> bool {
    a == b || a == PointType::Degenerate || b == PointType::Degenerate
}

fn is_extremum(k: PointType) -> bool {
    matches!(k, PointType::Max | PointType::Min)
}

fn dist(a: &CriticalPoint, b: &CriticalPoint) -> f64 {
    (a.x - b.x).hypot(a.y - b.y)
}

fn estimate_speed(slices: &[Slice]) -> f64 {
    if slices.len() < 2 {
        return 0.0;
    }
    let dt = slices[1].time - slices[0].time;
    let mut d: Vec<f64> = slices[0]
        .points
        .iter()
        .filter_map(|p| {
            slices[1]
                .points
                .iter()
                .filter(|q| compatible(p.kind, q.kind))
                .map(|q| dist(p, q))
                .min_by(|a, b| a.total_cmp(b))
        })
        .collect();
    if d.is_empty() || dt <= 0.0 {
        return 0.0;
    }
    d.sort_by(|a, b| a.total_cmp(b));
    d[d.len() / 2] / dt
}

/// `(t_c, x*, y*, a, residual)` from `separation² = α + βt` and a linear
/// fit of the midpoint, over the given common slices.
pub fn fit_fold(ts: &[f64], a: &[[f64; 2]], b: &[[f64; 2]]) -> (f64, f64, f64, f64, f64) {
    let n = ts.len();
    let s2: Vec<f64> = (0..n).map(|i| (a[i][0] - b[i][0]).powi(2) + (a[i][1] - b[i][1]).powi(2)).collect();
    let line = |ys: &[f64]| -> (f64, f64) {
        if n < 2 {
            return (ys[0], 0.0);
        }
        let mt = ts.iter().sum::<f64>() / n as f64;
        let my = ys.iter().sum::<f64>() / n as f64;
        let sxx: f64 = ts.iter().map(|t| (t - mt).powi(2)).sum();
        let sxy: f64 = ts.iter().zip(ys).map(|(t, y)| (t - mt) * (y - my)).sum();
        let beta = if sxx > 0.0 { sxy / sxx } else { 0.0 };
        (my - beta * mt, beta)
    };
    let (alpha, beta) = line(&s2);
    let tc = if beta != 0.0 { -alpha / beta } else { ts[n - 1] };
    let mx: Vec<f64> = (0..n).map(|i| 0.5 * (a[i][0] + b[i][0])).collect();
    let my: Vec<f64> = (0..n).map(|i| 0.5 * (a[i][1] + b[i][1])).collect();
    let (ax, bx) = line(&mx);
    let (ay, by) = line(&my);
    let norm = s2.iter().map(|v| v * v).sum::<f64>().sqrt();
    let res = ts.iter().zip(&s2).map(|(t, v)| (alpha + beta * t - v).powi(2)).sum::<f64>().sqrt();
    let rel = if n < 3 {
        f64::INFINITY
    } else if norm > 0.0 {
        res / norm
    } else {
        0.0
    };
    (tc, ax + bx * tc, ay + by * tc, beta.abs(), rel)
}

/// Fold location from the last (MERGE) or first (SPLIT) common slices of two
/// trajectories.
pub fn locate_fold(ext: &Trajectory, sad: &Trajectory, kind: EventKind, slices: &[f64], m: usize) -> Result<BifurcationEvent, TrackError> {
    let mut common: Vec<(usize, usize, usize)> = Vec::new();
    for (i, s) in ext.slices.iter().enumerate() {
        if let Some(j) = sad.slices.iter().position(|q| q == s) {
            common.push((*s, i, j));
        }
    }
    if common.is_empty() {
        return Err(TrackError::NoCommonSlices { a: ext.id, b: sad.id });
    }
    let take: Vec<(usize, usize, usize)> = match kind {
        EventKind::Merge => common[common.len().saturating_sub(m)..].to_vec(),
        EventKind::Split => common[..m.min(common.len())].to_vec(),
    };
    let ts: Vec<f64> = take.iter().map(|c| slices[c.0]).collect();
    let pa: Vec<[f64; 2]> = take.iter().map(|c| [ext.points[c.1].x, ext.points[c.1].y]).collect();
    let pb: Vec<[f64; 2]> = take.iter().map(|c| [sad.points[c.2].x, sad.points[c.2].y]).collect();
    let (t, x, y, a, r) = fit_fold(&ts, &pa, &pb);
    Ok(BifurcationEvent {
        kind,
        x,
        y,
        t,
        trajectories: [ext.id, sad.id],
        coefficient: a,
        fit_residual: r.is_finite().then_some(r),
        poor_fit: !(r <= 0.1),
    })
}

/// Pairs extremum/saddle points among `cands` closer than `gate`, nearest
/// pairs first.
fn pair_up(cands: &[(usize, CriticalPoint)], gate: f64) -> Vec<(usize, usize)> {
    let mut pairs = Vec::new();
    for (a, pa) in cands {
        for (b, pb) in cands {
            if is_extremum(pa.kind) && pb.kind == PointType::Saddle {
                let d = dist(pa, pb);
                if d < gate {
                    pairs.push((d, *a, *b));
                }
            }
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut used = std::collections::HashSet::new();
    let mut out = Vec::new();
    for (_, a, b) in pairs {
        if used.contains(&a) || used.contains(&b) {
            continue;
        }
        used.insert(a);
        used.insert(b);
        out.push((a, b));
    }
    out
}

/// Greedy nearest-neighbour continuation between consecutive slices with
/// the gate `min(gate_max, max(c₁dt, c₂√dt))`; disappearing extremum/saddle
/// pairs become MERGE events and appearing ones SPLIT events.
pub fn continue_trajectories(slices: &[Slice], opts: &TrackOptions) -> Result<Tracking, TrackError> {
    for w in slices.windows(2) {
        if w[1].time <= w[0].time {
            return Err(TrackError::UnorderedSlices { t0: w[0].time, t1: w[1].time });
        }
    }
    let c1 = opts.c1.unwrap_or_else(|| 3.0 * estimate_speed(slices));
    let c2 = opts.c2.unwrap_or(3.0 * opts.fold_coefficient.sqrt());
    let times: Vec<f64> = slices.iter().map(|s| s.time).collect();
    let mut trajs: Vec<Trajectory> = Vec::new();
    // trajectory id of each point of the current slice
    let mut current: Vec<usize> = Vec::new();
    if let Some(s0) = slices.first() {
        for p in &s0.points {
            current.push(trajs.len());
            trajs.push(Trajectory { id: trajs.len(), points: vec![*p], slices: vec![0] });
        }
    }
    let mut pending: Vec<(EventKind, usize, usize)> = Vec::new();
    let mut ambiguities = Vec::new();
    for k in 0..slices.len().saturating_sub(1) {
        let (prev, next) = (&slices[k].points, &slices[k + 1].points);
        let dt = times[k + 1] - times[k];
        let gate = opts.gate_max.min((c1 * dt).max(c2 * dt.sqrt()));
        let mut cand = Vec::new();
        for (i, p) in prev.iter().enumerate() {
            for (j, q) in next.iter().enumerate() {
                let d = dist(p, q);
                if d < gate && compatible(p.kind, q.kind) {
                    cand.push((d, i, j));
                }
            }
        }
        cand.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut from = vec![None; prev.len()];
        let mut to = vec![None; next.len()];
        for &(d, i, j) in &cand {
            if from[i].is_some() || to[j].is_some() {
                continue;
            }
            from[i] = Some(j);
            to[j] = Some(i);
            let rival = cand
                .iter()
                .any(|&(d2, i2, j2)| ((i2 == i) != (j2 == j)) && (d2 - d).abs() < 0.1 * gate);
            if rival {
                if opts.strict {
                    return Err(TrackError::AmbiguousMatching { t: times[k + 1], x: next[j].x, y: next[j].y });
                }
                ambiguities.push([times[k + 1], next[j].x, next[j].y]);
            }
        }
        let mut new_current = vec![usize::MAX; next.len()];
        for (j, q) in next.iter().enumerate() {
            if let Some(i) = to[j] {
                let id = current[i];
                trajs[id].points.push(*q);
                trajs[id].slices.push(k + 1);
                new_current[j] = id;
            }
        }
        let ending: Vec<(usize, CriticalPoint)> = (0..prev.len())
            .filter(|i| from[*i].is_none())
            .map(|i| (current[i], prev[i]))
            .collect();
        for (a, b) in pair_up(&ending, gate) {
            pending.push((EventKind::Merge, a, b));
        }
        let mut starting = Vec::new();
        for (j, q) in next.iter().enumerate() {
            if to[j].is_none() {
                let id = trajs.len();
                trajs.push(Trajectory { id, points: vec![*q], slices: vec![k + 1] });
                new_current[j] = id;
                starting.push((id, *q));
            }
        }
        for (a, b) in pair_up(&starting, gate) {
            pending.push((EventKind::Split, a, b));
        }
        current = new_current;
    }
    let mut events = Vec::new();
    for (kind, a, b) in pending {
        events.push(locate_fold(&trajs[a], &trajs[b], kind, &times, opts.fold_slices.max(2))?);
    }
    events.sort_by(|a, b| a.t.total_cmp(&b.t));
    Ok(Tracking { trajectories: trajs, events, slice_times: times, c1, c2, ambiguities })
}
