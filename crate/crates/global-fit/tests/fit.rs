use std::sync::OnceLock;

use cauchy_synth::*;
use global_fit::*;
use heat_jet::jet_at;
use linkgeom::{analytic_fit, build_frame, constant_field, horizontal_points, FrameField, FrameOptions};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stag_core::uniform_grid;

fn frame_from(f: impl Fn(f64) -> [f64; 3], degree: usize) -> FrameField {
    let pts: Vec<[f64; 3]> = uniform_grid(128).into_iter().map(f).collect();
    let (c, _) = analytic_fit(&pts, degree, 1e-10).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let opts = FrameOptions {
        max_labels: vec![1],
        seed: Some(constant_field([0.0, r, r])),
        ..FrameOptions::default()
    };
    build_frame(&c, &opts).unwrap()
}

fn circle() -> &'static (FrameField, CauchyDataSet) {
    static C: OnceLock<(FrameField, CauchyDataSet)> = OnceLock::new();
    C.get_or_init(|| {
        let fr = frame_from(|u| [u.cos(), 0.0, 2.0 + u.sin()], 3);
        let (beta, _, smooth) = synthesize(&fr, &BetaOptions::default(), &FgOptions::default()).unwrap();
        let data = assemble_data(&fr, &beta.coeffs, &smooth.f, &smooth.g).unwrap();
        (fr, data)
    })
}

fn circle_fit() -> &'static FitResult {
    static F: OnceLock<FitResult> = OnceLock::new();
    F.get_or_init(|| {
        let (fr, data) = circle();
        fit_plane(fr, data, 2.0, 18, &FitOptions::default()).unwrap()
    })
}

fn random_points(n: usize, seed: u64, lo: [f64; 3], hi: [f64; 3]) -> Vec<[f64; 3]> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| std::array::from_fn(|i| rng.random_range(lo[i]..hi[i])))
        .collect()
}

fn exact_options() -> FitOptions {
    FitOptions {
        lambda: 0.0,
        max_condition: f64::INFINITY,
        ..FitOptions::default()
    }
}

#[test]
fn representable_plane_target_is_interpolated() {
    let dict = Dictionary::plane_multipole([0.1, -0.2], 1.5, 5);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let truth = HeatAnsatz {
        dictionary: dict.clone(),
        weights: (0..dict.len()).map(|_| rng.random_range(-1.0..1.0)).collect(),
        constant: 0.4,
    };
    let pts = random_points(60, 4, [-1.0, -1.0, 0.5], [1.0, 1.0, 2.5]);
    let jets: Vec<[f64; 9]> = pts.iter().map(|p| truth.jet(*p).to_array()).collect();
    let r = fit(&JetTarget::from_jets(&pts, &jets), &dict, &exact_options()).unwrap();
    assert!(r.report.discrepancy < 1e-10, "{:?}", r.report);
}

#[test]
fn band_limited_torus_target_is_fitted_exactly() {
    let u = |p: [f64; 3]| -> [f64; 9] {
        let (x, y, t) = (p[0], p[1], p[2]);
        let e1 = (-t).exp();
        let e5 = (-5.0 * t).exp();
        let (c1, s1) = (x.cos(), x.sin());
        let ph = x + 2.0 * y;
        let (c2, s2) = (ph.cos(), ph.sin());
        // u = 0.7 cos x e^{-t} + 0.3 sin(x + 2y) e^{-5t}
        [
            0.7 * c1 * e1 + 0.3 * s2 * e5,
            -0.7 * s1 * e1 + 0.3 * c2 * e5,
            0.6 * c2 * e5,
            -0.7 * c1 * e1 - 1.5 * s2 * e5,
            -0.7 * c1 * e1 - 0.3 * s2 * e5,
            -0.6 * s2 * e5,
            -1.2 * s2 * e5,
            0.7 * s1 * e1 - 1.5 * c2 * e5,
            -3.0 * c2 * e5,
        ]
    };
    let pts = random_points(80, 5, [-3.0, -3.0, 0.0], [3.0, 3.0, 1.0]);
    let jets: Vec<[f64; 9]> = pts.iter().map(|p| u(*p)).collect();
    let dict = Dictionary::Torus { eta: 1.0, k_max: 2 };
    let r = fit(&JetTarget::from_jets(&pts, &jets), &dict, &exact_options()).unwrap();
    assert!(r.report.discrepancy < 1e-10, "{:?}", r.report);
    assert!(r.ansatz.constant.abs() < 1e-9);
    for p in random_points(20, 6, [-3.0, -3.0, 0.0], [3.0, 3.0, 1.0]) {
        assert!((r.ansatz.eval(p) - u(p)[0]).abs() < 1e-9);
    }
}

#[test]
fn nested_dictionaries_never_increase_discrepancy() {
    let (fr, data) = circle();
    let mut pts = Vec::new();
    let mut jets = Vec::new();
    for th in uniform_grid(96) {
        let (s, _) = jet_at(fr, data, th).unwrap();
        pts.push(fr.at(th).phi);
        jets.push([
            s.v, s.v_x, s.v_y, s.v_t, s.grad_vx[0], s.grad_vx[1], s.grad_vy[1], s.grad_vx[2], s.grad_vy[2],
        ]);
    }
    let target = JetTarget::from_jets(&pts, &jets);
    let opts = FitOptions {
        lambda: 0.0,
        max_condition: f64::INFINITY,
        weights: [1.0, 0.1, 0.01],
        measure: [1.0, 0.1, 0.01],
        ..FitOptions::default()
    };
    let mut last = f64::INFINITY;
    // element counts 21, 45, 91, 190
    for order in [5, 8, 12, 18] {
        let d = plane_dictionary(fr, 2.0, order);
        let r = fit(&target, &d, &opts).unwrap();
        assert!(r.report.discrepancy <= last * (1.0 + 1e-9), "order {order}: {:?}", r.report);
        last = r.report.discrepancy;
    }
}

#[test]
fn nested_objective_is_monotone_with_free_second_order_data() {
    let (fr, data) = circle();
    let target = JetTarget::from_link(fr, data, 64).unwrap();
    let mut last = f64::INFINITY;
    for order in [6, 9, 13] {
        let r = fit(&target, &plane_dictionary(fr, 2.0, order), &FitOptions::default()).unwrap();
        assert!(r.report.objective_rms <= last * (1.0 + 1e-9));
        last = r.report.objective_rms;
    }
}

#[test]
fn circle_plane_fit_meets_budget() {
    let (fr, data) = circle();
    let r = circle_fit();
    let rep = &r.report;
    assert!(rep.passed, "{rep:?}");
    assert!(rep.discrepancy <= 1e-3);
    assert!(rep.refit_min_eta.unwrap() > 0.0);
    // the fitted u matches the refitted jet at off-grid points
    let refit = r.refit_data(fr, data).unwrap();
    for i in 0..16 {
        let th = (i as f64 + 0.37) * std::f64::consts::TAU / 16.0;
        let (s, _) = jet_at(fr, &refit, th).unwrap();
        let j = r.ansatz.jet(fr.at(th).phi);
        assert!((j.v - s.v).abs() < 5e-3);
        assert!(j.x.hypot(j.y) < 2e-2);
        assert!((j.t - s.v_t).abs() < 2e-2);
        assert!((j.xx - s.grad_vx[0]).abs() < 5e-2);
        assert!((j.yy - s.grad_vy[1]).abs() < 5e-2);
    }
}

#[test]
fn fitted_ansatz_is_caloric() {
    let r = circle_fit();
    for p in random_points(50, 7, [-2.0, -2.0, 0.5], [2.0, 2.0, 3.5]) {
        let rows = r.ansatz.dictionary.partials(&[[0, 0, 1], [2, 0, 0], [0, 2, 0]], p);
        let scale: f64 = (0..rows[0].len())
            .map(|b| r.ansatz.weights[b].abs() * (rows[0][b].abs() + rows[1][b].abs() + rows[2][b].abs()))
            .sum();
        assert!(r.ansatz.heat_residual(p).abs() <= 1e-12 * scale.max(1.0));
        for b in 0..rows[0].len() {
            let e = rows[0][b] - rows[1][b] - rows[2][b];
            let s = rows[0][b].abs() + rows[1][b].abs() + rows[2][b].abs();
            assert!(e.abs() <= 1e-12 * s.max(1e-300), "element {b}: {e:e} vs {s:e}");
        }
    }
}

#[test]
fn torus_pullback_is_caloric() {
    let eta = 0.1;
    let scaled = Dictionary::Torus { eta, k_max: 3 };
    let unit = Dictionary::Torus { eta: 1.0, k_max: 3 };
    let m = ScalingMap::new(eta);
    for p in random_points(30, 8, [-4.0, -4.0, 0.0], [4.0, 4.0, 2.0]) {
        let a = scaled.partials(&[[0, 0, 0], [0, 0, 1], [2, 0, 0], [0, 2, 0]], p);
        let b = unit.partials(&[[0, 0, 0], [0, 0, 1]], m.forward(p));
        for e in 0..a[0].len() {
            assert!((a[0][e] - b[0][e]).abs() < 1e-13);
            assert!((a[1][e] - eta * b[1][e]).abs() < 1e-12);
            assert!((a[1][e] - a[2][e] - a[3][e]).abs() < 1e-12);
        }
        let g = |q: [f64; 3]| (-(q[0] * q[0] + q[1] * q[1]) / (4.0 * (q[2] + 1.0))).exp() / (q[2] + 1.0);
        let v = m.pullback(g);
        assert!((v(p) - g(m.forward(p))).abs() < 1e-15);
    }
}

#[test]
fn scaling_map_round_trips() {
    let m = ScalingMap::new(0.3);
    for p in random_points(20, 9, [-2.0, -2.0, 0.0], [2.0, 2.0, 3.0]) {
        let q = m.inverse(m.forward(p));
        for i in 0..3 {
            assert!((q[i] - p[i]).abs() < 1e-14);
        }
    }
}

#[test]
fn scale_link_examples() {
    let (fr, _) = circle();
    let c = &fr.curve;
    let same = scale_link(c, 1.0);
    for th in uniform_grid(64) {
        assert_eq!(same.point(th), c.point(th));
    }
    let q = scale_link(c, 0.25);
    let ext = |cv: &linkgeom::SpacetimeCurve, i: usize| {
        let v: Vec<f64> = uniform_grid(2048).into_iter().map(|t| cv.point(t)[i]).collect();
        v.iter().cloned().fold(f64::MIN, f64::max) - v.iter().cloned().fold(f64::MAX, f64::min)
    };
    assert!((ext(&q, 2) - 0.25 * ext(c, 2)).abs() < 1e-12);
    assert!((ext(&q, 0) - 0.5 * ext(c, 0)).abs() < 1e-12);
    let back = unscale_link(&q, 0.25);
    for th in uniform_grid(64) {
        let (a, b) = (back.point(th), c.point(th));
        for i in 0..3 {
            assert!((a[i] - b[i]).abs() < 1e-12);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]
    #[test]
    fn horizontal_count_is_scale_invariant(eta in 0.01f64..1.0, tilt in -0.5f64..0.5) {
        let f = move |u: f64| [u.cos() + tilt * (2.0 * u).sin(), u.sin(), 2.0 + (2.0 * u).sin() + tilt * u.cos()];
        let pts: Vec<[f64; 3]> = uniform_grid(128).into_iter().map(f).collect();
        let (c, _) = analytic_fit(&pts, 4, 1e-10).unwrap();
        let a = horizontal_points(&c, 1e-8).unwrap();
        let b = horizontal_points(&scale_link(&c, eta), 1e-8).unwrap();
        prop_assert_eq!(a.len(), b.len());
        for (x, y) in a.iter().zip(&b) {
            prop_assert!((x.theta - y.theta).abs() < 1e-8);
        }
    }
}

#[test]
fn torus_discrepancy_trends_down_under_halving() {
    let (fr, data) = circle();
    let opts = FitOptions {
        samples: 128,
        ..FitOptions::default()
    };
    let etas = [1.0, 0.5, 0.25, 0.125, 0.0625];
    let d: Vec<f64> = etas
        .iter()
        .map(|&e| fit_torus(fr, data, e, 6, &opts).unwrap().report.discrepancy)
        .collect();
    // least-squares slope of log d against the halving count
    let n = d.len() as f64;
    let xs: Vec<f64> = (0..d.len()).map(|i| i as f64).collect();
    let ys: Vec<f64> = d.iter().map(|v| v.ln()).collect();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let slope = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
        / xs.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
    assert!(slope <= 0.0, "{d:?}");
    assert!(d[4] <= d[0], "{d:?}");
}

#[test]
fn torus_search_stops_at_first_passing_eta() {
    let (fr, data) = circle();
    let s = TorusSearch {
        eta0: 1.0,
        k_max: 6,
        ..TorusSearch::default()
    };
    let t = search_torus(fr, data, &FitOptions::default(), &s).unwrap();
    assert!(t.result.report.passed);
    assert!(t.result.report.discrepancy < s.eps2);
    assert!(fits_unit_ball(fr, t.eta));
    assert!(t.eta < 1.0);
    assert_eq!(t.history.last().unwrap().0, t.eta);
}

#[test]
fn torus_search_reports_floor() {
    let (fr, data) = circle();
    let s = TorusSearch {
        eta0: 0.25,
        eta_floor: 0.1,
        k_max: 4,
        eps2: 1e-12,
    };
    match search_torus(fr, data, &FitOptions { samples: 64, ..FitOptions::default() }, &s) {
        Err(GlobalFitError::EtaFloorReached { eta, discrepancy }) => {
            assert!(eta >= 0.1 && discrepancy > 1e-12);
        }
        other => panic!("expected the floor error, got {other:?}"),
    }
}

#[test]
fn condition_cap_is_enforced() {
    let (fr, data) = circle();
    let opts = FitOptions {
        samples: 32,
        max_condition: 10.0,
        ..FitOptions::default()
    };
    assert!(matches!(
        fit_plane(fr, data, 2.0, 6, &opts),
        Err(GlobalFitError::IllConditionedBasis { .. })
    ));
}

#[test]
fn ansatz_serialization_round_trips() {
    let r = circle_fit();
    let s = serde_json::to_string(&r.ansatz).unwrap();
    assert!(s.contains("\"mode\":\"plane\""));
    let back: HeatAnsatz = serde_json::from_str(&s).unwrap();
    assert_eq!(back.dictionary, r.ansatz.dictionary);
    for (a, b) in back.weights.iter().zip(&r.ansatz.weights) {
        assert!((a - b).abs() <= 1e-15 * b.abs());
    }
    let grid = r.ansatz.sample_grid([-1.0, -1.0], 0.5, 5, 0.0);
    assert_eq!(grid.len(), 25);
    assert!((grid[7] - r.ansatz.eval([0.0, -0.5, 0.0])).abs() < 1e-9 * grid[7].abs().max(1.0));
}

#[test]
fn gaussian_derivatives_match_finite_differences() {
    let t = 0.7;
    let h = 1e-5;
    for x in [-1.3, 0.0, 0.4, 2.2] {
        let d = gaussian_derivs(x, t, 4);
        let dp = gaussian_derivs(x + h, t, 4);
        let dm = gaussian_derivs(x - h, t, 4);
        for i in 0..4 {
            let fd = (dp[i] - dm[i]) / (2.0 * h);
            assert!((fd - d[i + 1]).abs() < 1e-6 * (1.0 + d[i + 1].abs()));
        }
    }
}
