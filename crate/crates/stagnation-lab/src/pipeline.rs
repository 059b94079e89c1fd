use cauchy_synth::{assemble_data, synthesize, BetaOptions, CauchyDataSet, DataReport, FgOptions};
use flow_sim::{heat_vs_ns_gap, simulate_with, SimConfig, SpectralField, Window};
use global_fit::{fit_plane, fit_torus, search_torus, FitOptions, FitResult, HeatAnsatz, TorusSearch};
use heat_jet::{condition_report, link_jet, verify_conditions, ConditionReport};
use linkgeom::{analytic_fit, build_frame, close_open_link, constant_field, FrameField, FrameOptions, SpacetimeCurve};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use stag_core::{uniform_grid, TrigVec3};
use stagtrack::{
    compare_pattern, connecting_arcs, continue_trajectories, find_critical_points, CompareOptions, FindOptions,
    LinkPolyline, PatternReport, PlanarField, SeedGrid, Slice, TrackOptions, Tracking,
};

use crate::config::{LabConfig, LinkSection, Mode};
use crate::slice::AnsatzSlice;
use crate::LabError;

fn stage<E: std::fmt::Display>(name: &'static str) -> impl Fn(E) -> LabError {
    move |e| LabError::Stage { stage: name, message: e.to_string() }
}

fn fail(name: &'static str, message: String) -> LabError {
    LabError::Stage { stage: name, message }
}

fn preset_point(name: &str, u: f64) -> [f64; 3] {
    match name {
        "circle" => [u.cos(), 0.0, 2.0 + u.sin()],
        _ => [
            u.cos() + 0.5 * (2.0 * u).cos(),
            u.sin() - 0.5 * (2.0 * u).sin(),
            2.0 + 0.3 * (3.0 * u).sin(),
        ],
    }
}

/// Analytic curve described by the `[link]` section.
pub fn link_curve(l: &LinkSection) -> Result<SpacetimeCurve, LabError> {
    if let Some(c) = &l.coeffs {
        return Ok(SpacetimeCurve::new(TrigVec3([c.x.clone(), c.y.clone(), c.t.clone()])));
    }
    let samples: Vec<[f64; 3]> = match (&l.preset, &l.points) {
        (Some(p), _) => uniform_grid(l.samples).into_iter().map(|u| preset_point(p, u)).collect(),
        (_, Some(pts)) if l.closed => pts.clone(),
        (_, Some(pts)) => close_open_link(pts, l.samples.max(pts.len())).0,
        _ => return Err(LabError::Config("`link`: no curve given".into())),
    };
    Ok(analytic_fit(&samples, l.fit_degree, l.fit_tol).map_err(stage("synthesize"))?.0)
}

pub fn link_frame(l: &LinkSection) -> Result<FrameField, LabError> {
    let curve = link_curve(l)?;
    let opts = FrameOptions {
        orientation: l.orientation,
        max_labels: l.labels.iter().filter(|s| s.label == "MAX").map(|s| s.interval_index).collect(),
        seed: l.sliding_seed.map(constant_field),
        horizontal_tol: l.horizontal_tol,
        k3_tol: l.k3_tol,
        sigma1: l.sigma1,
        rho1: l.rho1,
    };
    build_frame(&curve, &opts).map_err(stage("synthesize"))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Certificate {
    pub report: DataReport,
    /// `min η` of the smoothed data on 4096 samples.
    pub min_eta: f64,
    pub horizontal_points: usize,
    pub intervals: usize,
}

#[derive(Clone, Debug)]
pub struct Synthesis {
    pub frame: FrameField,
    pub data: CauchyDataSet,
    pub certificate: Certificate,
}

pub fn run_synthesize(cfg: &LabConfig) -> Result<Synthesis, LabError> {
    let frame = link_frame(&cfg.link)?;
    let d = &cfg.data;
    let bo = BetaOptions { degree: d.beta_degree, dip: d.dip };
    let fo = FgOptions {
        grid: d.grid,
        tau_fraction: d.tau_fraction,
        exterior_margin: d.exterior_margin,
        radius_bound: d.radius_bound,
        smooth_min_degree: d.smooth_min_degree,
        smooth_max_degree: d.smooth_max_degree,
    };
    let (beta, cont, smooth) = synthesize(&frame, &bo, &fo).map_err(stage("synthesize"))?;
    let data = assemble_data(&frame, &beta.coeffs, &smooth.f, &smooth.g).map_err(stage("synthesize"))?;
    let min_eta = data.min_eta(&frame, 4096);
    let certificate = Certificate {
        report: DataReport::new(&frame, &beta, &cont, &smooth),
        min_eta,
        horizontal_points: frame.horizontal.len(),
        intervals: frame.intervals.len(),
    };
    if !(min_eta > 0.0) {
        return Err(fail("synthesize", format!("min eta = {min_eta:.3e} is not positive")));
    }
    Ok(Synthesis { frame, data, certificate })
}

pub fn run_verify(cfg: &LabConfig, frame: &FrameField, data: &CauchyDataSet) -> Result<ConditionReport, LabError> {
    let jet = link_jet(frame, data, cfg.data.verify_samples).map_err(stage("verify"))?;
    verify_conditions(&jet, frame).map_err(stage("verify"))
}

/// Fitted heat solution with the data it realizes.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FitArtifact {
    pub mode: Mode,
    /// Scaling parameter of the torus fit; 1 on the plane.
    pub eta: f64,
    pub history: Vec<(f64, f64)>,
    pub result: FitResult,
    pub refit: CauchyDataSet,
    /// Conditions of the refitted data.
    pub conditions: ConditionReport,
    /// Smallest `|∇ψ|` on the outer half of the tube and where it occurs.
    pub shell_gradient: f64,
    pub shell_argmin: [f64; 3],
    /// `min(σ_min, shell gradient)`, in link units: the C² size of
    /// perturbation the tracked pattern is expected to survive.
    pub margin: f64,
}

/// Smallest `|∇ψ|` over lattice points at distance `[r/2, r)` from the link,
/// on slices covering the link's time range.
pub fn shell_gradient(cfg: &LabConfig, frame: &FrameField, ansatz: &HeatAnsatz) -> (f64, [f64; 3]) {
    let r = cfg.compare.tube_radius;
    let b = LinkBox::of(frame).grow(r, cfg.time_margin());
    let link = LinkPolyline::new(&frame.curve, cfg.compare.link_samples);
    let h = 2.0 * cfg.track.seed_spacing;
    let nx = ((b.x[1] - b.x[0]) / h).ceil() as usize + 1;
    let ny = ((b.y[1] - b.y[0]) / h).ceil() as usize + 1;
    let ht = 2.0 * cfg.sim.slice_dt;
    let nt = ((b.t[1] - b.t[0]) / ht).ceil() as usize + 1;
    let mut best = (f64::INFINITY, [0.0; 3]);
    for k in 0..nt {
        let t = b.t[0] + ht * k as f64;
        let f = AnsatzSlice { ansatz, t };
        let (gx, gy) = f.grad_lattice([b.x[0], b.y[0]], [h, h], [nx, ny]);
        for j in 0..ny {
            for i in 0..nx {
                let p = [b.x[0] + h * i as f64, b.y[0] + h * j as f64, t];
                let d = link.distance(p);
                let g = gx[j * nx + i].hypot(gy[j * nx + i]);
                if d >= 0.5 * r && d < r && g < best.0 {
                    best = (g, p);
                }
            }
        }
    }
    best
}

pub fn fit_options(cfg: &LabConfig) -> FitOptions {
    let f = &cfg.fit;
    FitOptions {
        samples: f.samples,
        ring_radii: f.ring_radii.clone(),
        ring_angles: f.ring_angles,
        fg_degree: f.fg_degree,
        prior_weight: f.prior_weight,
        lambda: f.lambda,
        weights: f.weights,
        ring_weight: f.ring_weight,
        measure: f.measure,
        delta1: f.delta1,
        max_condition: f.max_condition,
    }
}

pub fn run_fit(cfg: &LabConfig, frame: &FrameField, data: &CauchyDataSet) -> Result<FitArtifact, LabError> {
    let opts = fit_options(cfg);
    let (eta, history, result) = match cfg.fit.mode {
        Mode::Plane => (1.0, Vec::new(), fit_plane(frame, data, cfg.fit.age, cfg.fit.order, &opts).map_err(stage("fit"))?),
        Mode::Torus => {
            let s = TorusSearch { eta0: cfg.fit.eta0, eta_floor: cfg.fit.eta_floor, k_max: cfg.fit.k_max, eps2: cfg.fit.eps2 };
            let tf = search_torus(frame, data, &opts, &s).map_err(stage("fit"))?;
            (tf.eta, tf.history, tf.result)
        }
    };
    if !result.report.passed {
        return Err(fail("fit", format!(
            "discrepancy {:.3e} against budget {:.1e}, refitted min eta {:?}",
            result.report.discrepancy, result.report.delta1, result.report.refit_min_eta
        )));
    }
    let refit = result.refit_data(frame, data).map_err(stage("fit"))?;
    let jet = link_jet(frame, &refit, cfg.data.verify_samples).map_err(stage("fit"))?;
    let conditions = condition_report(&jet, frame);
    let (shell_gradient, shell_argmin) = shell_gradient(cfg, frame, &result.ansatz);
    Ok(FitArtifact {
        mode: cfg.fit.mode,
        eta,
        history,
        margin: conditions.min_sv.min(shell_gradient),
        shell_gradient,
        shell_argmin,
        result,
        refit,
        conditions,
    })
}

/// Refit at a given torus η, bypassing the search.
pub fn fit_torus_at(cfg: &LabConfig, frame: &FrameField, data: &CauchyDataSet, eta: f64) -> Result<FitResult, LabError> {
    fit_torus(frame, data, eta, cfg.fit.k_max, &fit_options(cfg)).map_err(stage("fit"))
}

/// Map between link coordinates and the coordinates of the simulation:
/// the identity on the plane, `Λ_η` on the torus.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub mode: Mode,
    pub eta: f64,
    pub n: usize,
    pub period: f64,
}

impl Domain {
    pub fn new(cfg: &LabConfig, eta: f64) -> Self {
        let period = match cfg.fit.mode {
            Mode::Plane => cfg.sim.period,
            Mode::Torus => std::f64::consts::TAU,
        };
        Domain { mode: cfg.fit.mode, eta, n: cfg.sim.n, period }
    }

    pub fn to_sim(&self, p: [f64; 3]) -> [f64; 3] {
        let s = self.eta.sqrt();
        [s * p[0], s * p[1], self.eta * p[2]]
    }

    pub fn to_link(&self, p: [f64; 3]) -> [f64; 3] {
        let s = self.eta.sqrt();
        [p[0] / s, p[1] / s, p[2] / self.eta]
    }

    pub fn spacing(&self) -> f64 {
        self.period / self.n as f64
    }

    /// Samples of the ansatz at `t = 0` on the simulation grid.
    pub fn initial_grid(&self, ansatz: &HeatAnsatz) -> Vec<f64> {
        let s = self.eta.sqrt();
        let o = -0.5 * self.period / s;
        ansatz.sample_grid([o, o], self.spacing() / s, self.n, 0.0)
    }
}

/// Spatial box and time range of the link in link coordinates.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinkBox {
    pub x: [f64; 2],
    pub y: [f64; 2],
    pub t: [f64; 2],
}

impl LinkBox {
    pub fn of(frame: &FrameField) -> Self {
        let mut b = LinkBox { x: [f64::INFINITY, f64::NEG_INFINITY], y: [f64::INFINITY, f64::NEG_INFINITY], t: [f64::INFINITY, f64::NEG_INFINITY] };
        for p in frame.curve.coeffs.sample_uniform(2048) {
            for (r, v) in [(&mut b.x, p[0]), (&mut b.y, p[1]), (&mut b.t, p[2])] {
                r[0] = r[0].min(v);
                r[1] = r[1].max(v);
            }
        }
        b
    }

    pub fn grow(&self, m: f64, mt: f64) -> Self {
        LinkBox {
            x: [self.x[0] - m, self.x[1] + m],
            y: [self.y[0] - m, self.y[1] + m],
            t: [(self.t[0] - mt).max(0.0), self.t[1] + mt],
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SimReport {
    pub domain: Domain,
    pub delta: f64,
    /// δ of the probe run that measured `C_T`, when δ was chosen.
    pub probe_delta: Option<f64>,
    /// Measured heat/Navier–Stokes C² gap per unit δ on the window.
    pub c_t: Option<f64>,
    /// C² gap of the final run on the window, in simulation units.
    pub gap: f64,
    pub margin: f64,
    /// `gap ≤ margin`: the run is close enough to the heat flow to carry
    /// the fitted pattern.
    pub certified: bool,
    pub dt: f64,
    pub steps: usize,
    pub t_final: f64,
    /// `(t, energy, enstrophy)` at every stored step.
    pub energy: Vec<[f64; 3]>,
    /// Mean removed from the initial grid.
    pub mean: f64,
    pub window: Window,
    pub slice_times: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SimArtifact {
    pub report: SimReport,
    pub initial: SpectralField,
    /// Snapshots of ψ̃ inside the tracking time window, in simulation units.
    pub snapshots: Vec<SpectralField>,
}

fn gap_window(cfg: &LabConfig, frame: &FrameField, d: &Domain) -> Window {
    let b = LinkBox::of(frame).grow(cfg.window_margin(), 0.0);
    let s = d.eta.sqrt();
    let h = d.spacing();
    Window { x: [s * b.x[0] - h, s * b.x[1] + h], y: [s * b.y[0] - h, s * b.y[1] + h] }
}

fn c2_sup(f: &SpectralField) -> f64 {
    let mut m = 0.0f64;
    for tot in 0..=2 {
        for a in 0..=tot {
            m = f.partial_grid(a, tot - a).iter().fold(m, |m, v| m.max(v.abs()));
        }
    }
    m
}

/// Smooth bump on the simulation grid with C² sup norm `size`, centred on
/// the link and oscillating in a direction drawn from `seed`.
pub fn perturbation(frame: &FrameField, d: &Domain, seed: u64, size: f64) -> Vec<f64> {
    let b = LinkBox::of(frame);
    let s = d.eta.sqrt();
    let c = [s * 0.5 * (b.x[0] + b.x[1]), s * 0.5 * (b.y[0] + b.y[1])];
    let w = s * (0.5 * (b.x[1] - b.x[0]).max(b.y[1] - b.y[0])).max(0.25);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ang: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let phase: f64 = rng.random_range(0.0..std::f64::consts::TAU);
    let k = [ang.cos() / w, ang.sin() / w];
    let (n, h, o) = (d.n, d.spacing(), -0.5 * d.period);
    let mut v = vec![0.0; n * n];
    for j in 0..n {
        for i in 0..n {
            let (x, y) = (o + h * i as f64 - c[0], o + h * j as f64 - c[1]);
            v[j * n + i] = (-(x * x + y * y) / (2.0 * w * w)).exp() * (k[0] * x + k[1] * y + phase).cos();
        }
    }
    let f = SpectralField::from_grid(&v, n, d.period, 0.0).0;
    let m = c2_sup(&f);
    let g = f.scale(size / m).to_grid();
    g
}

/// Runs the scaled Navier–Stokes equation from the fitted `u(·, 0)` (plus
/// `extra` on the grid, if given), choosing δ from a probe run when the
/// configuration does not fix it.
pub fn run_simulate(cfg: &LabConfig, frame: &FrameField, fit: &FitArtifact, extra: Option<&[f64]>) -> Result<SimArtifact, LabError> {
    let d = Domain::new(cfg, fit.eta);
    let mut grid = d.initial_grid(&fit.result.ansatz);
    if let Some(e) = extra {
        for (g, e) in grid.iter_mut().zip(e) {
            *g += e;
        }
    }
    if grid.iter().any(|v| !v.is_finite()) {
        return Err(fail("simulate", "initial datum is not finite on the grid".to_string()));
    }
    let (u0, mean) = SpectralField::from_grid(&grid, d.n, d.period, 0.0);
    let lb = LinkBox::of(frame).grow(0.0, cfg.time_margin());
    let (t_lo, t_hi) = (fit.eta * lb.t[0], fit.eta * lb.t[1]);
    let dt = cfg.sim.dt * fit.eta;
    let every = ((cfg.sim.slice_dt / cfg.sim.dt).round() as usize).max(1);
    let steps = ((t_hi / dt).ceil() as usize).div_ceil(every) * every;
    let t_final = steps as f64 * dt;
    let window = gap_window(cfg, frame, &d);
    let base = SimConfig {
        delta: 0.0,
        dt,
        t_final,
        dealias: cfg.sim.dealias,
        snapshot_every: every,
        max_cfl: cfg.sim.max_cfl,
    };
    let gap_of = |f: &SpectralField| heat_vs_ns_gap(std::slice::from_ref(f), &u0, &window, 2, f64::INFINITY).0;
    let (delta, probe_delta, c_t) = match cfg.sim.delta {
        Some(x) => (x, None, None),
        None => {
            let gmax = u0.partial_grid(1, 0).iter().chain(&u0.partial_grid(0, 1)).fold(0.0f64, |m, v| m.max(v.abs()));
            let dp = 1e-3 * d.spacing() / (dt * gmax.max(1e-300));
            let mut gap = 0.0f64;
            simulate_with(&u0, &SimConfig { delta: dp, ..base.clone() }, |f| gap = gap.max(gap_of(f))).map_err(stage("simulate"))?;
            let ct = gap / dp;
            let target = cfg.sim.delta_safety * fit.margin;
            let delta = if ct > 0.0 { dp.min(target / ct) } else { dp };
            (delta, Some(dp), Some(ct))
        }
    };
    let mut energy = Vec::new();
    let mut snapshots = Vec::new();
    let mut gap = 0.0f64;
    let tol = 1e-9 * dt;
    simulate_with(&u0, &SimConfig { delta, ..base }, |f| {
        energy.push([f.time, f.energy(), f.enstrophy()]);
        if delta > 0.0 {
            gap = gap.max(gap_of(f));
        }
        if f.time >= t_lo - tol && f.time <= t_hi + tol {
            snapshots.push(f.clone());
        }
    })
    .map_err(stage("simulate"))?;
    let certified = gap <= fit.margin;
    if !certified && cfg.sim.delta.is_none() {
        return Err(fail(
            "simulate",
            format!("heat/Navier-Stokes gap {gap:.3e} at delta {delta:.3e} exceeds the fit margin {:.3e}", fit.margin),
        ));
    }
    let report = SimReport {
        domain: d,
        delta,
        probe_delta,
        c_t,
        gap,
        margin: fit.margin,
        certified,
        dt,
        steps,
        t_final,
        energy,
        mean,
        window,
        slice_times: snapshots.iter().map(|f| f.time).collect(),
    };
    Ok(SimArtifact { report, initial: u0, snapshots })
}

fn find_options(cfg: &LabConfig) -> FindOptions {
    FindOptions {
        newton_tol: cfg.track.newton_tol,
        max_iter: cfg.track.max_iter,
        dedup_radius: cfg.track.dedup_radius,
        max_depth: cfg.track.max_depth,
    }
}

/// Critical points of each field inside `seed`, slices in parallel.
pub fn detect_slices<F: PlanarField>(fields: &[F], seed: &SeedGrid, opts: &FindOptions, threads: Option<usize>) -> Vec<(Slice, usize)> {
    let nt = threads
        .or_else(|| std::thread::available_parallelism().ok().map(|n| n.get()))
        .unwrap_or(1)
        .clamp(1, fields.len().max(1));
    let chunk = fields.len().div_ceil(nt).max(1);
    std::thread::scope(|s| {
        let handles: Vec<_> = fields
            .chunks(chunk)
            .map(|c| {
                s.spawn(move || {
                    c.iter()
                        .map(|f| {
                            let r = find_critical_points(f, seed, opts);
                            (Slice { time: f.time(), points: r.points }, r.stalled.len())
                        })
                        .collect::<Vec<_>>()
                })
            })
            .collect();
        handles.into_iter().flat_map(|h| h.join().expect("slice worker")).collect()
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TrackReport {
    pub slices: usize,
    pub seed: SeedGrid,
    pub stalled_cells: usize,
    pub points: usize,
    pub tracking: Tracking,
}

/// Seed window in simulation coordinates.
pub fn seed_grid(cfg: &LabConfig, frame: &FrameField, eta: f64) -> SeedGrid {
    let b = LinkBox::of(frame).grow(cfg.window_margin(), 0.0);
    let s = eta.sqrt();
    SeedGrid::with_spacing([s * b.x[0], s * b.x[1]], [s * b.y[0], s * b.y[1]], s * cfg.track.seed_spacing)
}

/// Tracks critical points through `fields` (simulation coordinates) and
/// returns the result in link coordinates.
pub fn run_track<F: PlanarField>(cfg: &LabConfig, frame: &FrameField, eta: f64, fields: &[F]) -> Result<TrackReport, LabError> {
    let seed = seed_grid(cfg, frame, eta);
    let found = detect_slices(fields, &seed, &find_options(cfg), cfg.track.threads);
    let stalled_cells = found.iter().map(|s| s.1).sum();
    let slices: Vec<Slice> = found.into_iter().map(|s| s.0).collect();
    let points = slices.iter().map(|s| s.points.len()).sum();
    let t = &cfg.track;
    let opts = TrackOptions {
        c1: t.c1.map(|c| c * eta.sqrt() / eta),
        c2: t.c2,
        fold_coefficient: t.fold_coefficient,
        gate_max: t.gate_max.map_or(f64::INFINITY, |g| g * eta.sqrt()),
        fold_slices: t.fold_slices,
        strict: t.strict,
    };
    let mut tracking = continue_trajectories(&slices, &opts).map_err(stage("track"))?;
    if eta != 1.0 {
        let d = Domain { mode: Mode::Torus, eta, n: 0, period: 0.0 };
        tracking.map_points(|p| d.to_link(p));
        for tr in &mut tracking.trajectories {
            for p in &mut tr.points {
                p.hxx *= eta;
                p.hxy *= eta;
                p.hyy *= eta;
                p.det *= eta * eta;
                p.trace *= eta;
            }
        }
        tracking.c1 *= eta / eta.sqrt();
    }
    Ok(TrackReport { slices: slices.len(), seed, stalled_cells, points, tracking })
}

pub fn compare_options(cfg: &LabConfig) -> CompareOptions {
    CompareOptions {
        tube_radius: cfg.compare.tube_radius,
        epsilon: cfg.epsilon(),
        apex_exclusion: cfg.compare.apex_exclusion.unwrap_or(cfg.compare.tube_radius),
    }
}

pub fn run_compare(cfg: &LabConfig, frame: &FrameField, tracking: &Tracking) -> PatternReport {
    let arcs = connecting_arcs(frame, cfg.compare.arc_samples);
    let link = LinkPolyline::new(&frame.curve, cfg.compare.link_samples);
    compare_pattern(tracking, &arcs, &link, &compare_options(cfg))
}

/// Outcome of re-running the pipeline from a perturbed initial datum.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProbeReport {
    pub fraction: f64,
    /// C² sup norm of the perturbation.
    pub size: f64,
    pub base_census: [usize; 2],
    pub probe_census: [usize; 2],
    pub base_type_mismatches: usize,
    pub probe_type_mismatches: usize,
    pub probe: PatternReport,
    pub passed: bool,
}

fn type_mismatches(r: &PatternReport) -> usize {
    r.arcs.iter().map(|a| a.type_mismatches).sum()
}

pub fn stability_probe(cfg: &LabConfig, frame: &FrameField, fit: &FitArtifact, base: &PatternReport) -> Result<ProbeReport, LabError> {
    let d = Domain::new(cfg, fit.eta);
    let size = cfg.compare.probe_fraction * fit.margin;
    let extra = perturbation(frame, &d, cfg.seed, size);
    let sim = run_simulate(cfg, frame, fit, Some(&extra))?;
    let tr = run_track(cfg, frame, fit.eta, &sim.snapshots)?;
    let probe = run_compare(cfg, frame, &tr.tracking);
    let types_ok = |r: &PatternReport| r.checks.iter().any(|c| c.name == "types" && c.passed);
    let passed = probe.realized == base.realized && types_ok(&probe) == types_ok(base);
    Ok(ProbeReport {
        fraction: cfg.compare.probe_fraction,
        size,
        base_census: base.realized,
        probe_census: probe.realized,
        base_type_mismatches: type_mismatches(base),
        probe_type_mismatches: type_mismatches(&probe),
        probe,
        passed,
    })
}
