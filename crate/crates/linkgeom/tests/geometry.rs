use linkgeom::vec3::{cross, dot, norm, sub};
use linkgeom::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use stag_core::{uniform_grid, TrigPoly, TrigVec3, TAU};

fn curve_from(f: impl Fn(f64) -> [f64; 3], n: usize) -> Vec<[f64; 3]> {
    uniform_grid(n).into_iter().map(f).collect()
}

fn circle_pts(u: f64) -> [f64; 3] {
    [u.cos(), 0.0, 2.0 + u.sin()]
}

fn trefoil_pts(u: f64) -> [f64; 3] {
    [
        u.cos() + 0.5 * (2.0 * u).cos(),
        u.sin() - 0.5 * (2.0 * u).sin(),
        2.0 + 0.3 * (3.0 * u).sin(),
    ]
}

fn circle() -> SpacetimeCurve {
    analytic_fit(&curve_from(circle_pts, 64), 3, 1e-12).unwrap().0
}

fn circle_frame() -> FrameField {
    let c = arclength_reparametrize(&circle()).unwrap();
    let hs = horizontal_points(&c, 1e-6).unwrap();
    let iv = partition_intervals(&c, &hs, 1, &[]).unwrap();
    let seed = TrigVec3([
        TrigPoly::new(0.0, vec![-1.0], vec![0.0]),
        TrigPoly::zero(1),
        TrigPoly::new(0.0, vec![0.0], vec![-1.0]),
    ]);
    let sf = sliding_field(&c, &hs, Some(&seed), 0.1).unwrap();
    FrameField::new(c, sf.k, hs, iv, 0.2, 0.2)
}

#[test]
fn fit_recovers_circle_coefficients() {
    let (c, dev) = analytic_fit(&curve_from(circle_pts, 64), 3, 1e-12).unwrap();
    assert!(dev < 1e-12);
    assert!((c.coeffs.0[0].cos[0] - 1.0).abs() < 1e-14);
    assert!((c.coeffs.0[2].a0 - 2.0).abs() < 1e-14);
    assert!((c.coeffs.0[2].sin[0] - 1.0).abs() < 1e-14);
    assert!(c.coeffs.0[1].sup_norm(64) < 1e-15);
}

#[test]
fn fit_trefoil_at_degree_five() {
    let (_, dev) = analytic_fit(&curve_from(trefoil_pts, 128), 5, 1e-10).unwrap();
    assert!(dev < 1e-10);
}

#[test]
fn noisy_fit_matches_direct_least_squares() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let pts: Vec<[f64; 3]> = curve_from(circle_pts, 128)
        .into_iter()
        .map(|p| {
            [
                p[0] + rng.random_range(-1e-3..1e-3),
                p[1] + rng.random_range(-1e-3..1e-3),
                p[2] + rng.random_range(-1e-3..1e-3),
            ]
        })
        .collect();
    let (c, dev) = analytic_fit(&pts, 3, 2e-3).unwrap();
    assert!(dev <= 2e-3);
    // oracle: dense least squares on the same samples
    let us = uniform_grid(128);
    let mut oracle_dev: f64 = 0.0;
    let comps: Vec<TrigPoly> = (0..3)
        .map(|i| {
            let v: Vec<f64> = pts.iter().map(|p| p[i]).collect();
            TrigPoly::fit(&us, &v, 3)
        })
        .collect();
    for (k, &u) in us.iter().enumerate() {
        let q = [comps[0].eval(u), comps[1].eval(u), comps[2].eval(u)];
        oracle_dev = oracle_dev.max(norm(sub(q, pts[k])));
        assert!(norm(sub(q, c.point(u))) < 1e-12);
    }
    assert!((oracle_dev - dev).abs() < 1e-12);
}

#[test]
fn fit_rejects_too_low_degree_and_negative_time() {
    let err = analytic_fit(&curve_from(trefoil_pts, 128), 1, 1e-6).unwrap_err();
    assert!(matches!(err, GeomError::FitToleranceExceeded { .. }));
    let low = curve_from(|u| [u.cos(), 0.0, 0.5 + u.sin()], 64);
    let err = analytic_fit(&low, 3, 1e-10).unwrap_err();
    assert!(matches!(err, GeomError::NonPositiveTime { .. }));
}

#[test]
fn circle_is_already_arclength() {
    let c = circle();
    let r = arclength_reparametrize(&c).unwrap();
    assert!((r.length - TAU).abs() < 1e-12);
    for u in uniform_grid(50) {
        assert!(norm(sub(r.point(u), c.point(u))) < 1e-12);
    }
}

fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> f64 {
    fn rec(f: &dyn Fn(f64) -> f64, a: f64, b: f64, fa: f64, fm: f64, fb: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let m = 0.5 * (a + b);
        let (lm, rm) = (0.5 * (a + m), 0.5 * (m + b));
        let (flm, frm) = (f(lm), f(rm));
        let left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        let right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        if depth == 0 || (left + right - whole).abs() <= 15.0 * tol {
            return left + right + (left + right - whole) / 15.0;
        }
        rec(f, a, m, fa, flm, fm, left, tol / 2.0, depth - 1)
            + rec(f, m, b, fm, frm, fb, right, tol / 2.0, depth - 1)
    }
    let (fa, fb, fm) = (f(a), f(b), f(0.5 * (a + b)));
    let whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
    rec(f, a, b, fa, fm, fb, whole, tol, 50)
}

#[test]
fn ellipse_length_matches_quadrature() {
    let (e, _) = analytic_fit(&curve_from(|u| [2.0 * u.cos(), 0.0, 2.0 + u.sin()], 64), 3, 1e-12).unwrap();
    let r = arclength_reparametrize(&e).unwrap();
    let oracle = adaptive_simpson(&|u: f64| (4.0 * u.sin() * u.sin() + u.cos() * u.cos()).sqrt(), 0.0, TAU, 1e-13);
    assert!((r.length - oracle).abs() < 1e-10, "{} vs {}", r.length, oracle);
    assert!(r.speed_deviation(4096) < 1e-8);
}

fn hausdorff(a: &SpacetimeCurve, b: &SpacetimeCurve) -> f64 {
    // distance from samples of `a` to the curve `b`, refined by Newton
    let dense = b.coeffs.sample_uniform(4096);
    let mut worst: f64 = 0.0;
    for p in a.coeffs.sample_uniform(512) {
        let i = (0..dense.len())
            .min_by(|&i, &j| norm(sub(dense[i], p)).partial_cmp(&norm(sub(dense[j], p))).unwrap())
            .unwrap();
        let mut u = TAU * i as f64 / dense.len() as f64;
        for _ in 0..30 {
            let d = b.derivs(u, 2);
            let r = sub(d[0], p);
            let g = dot(r, d[1]);
            let h = dot(d[1], d[1]) + dot(r, d[2]);
            u -= g / h;
        }
        worst = worst.max(norm(sub(b.point(u), p)));
    }
    worst
}

#[test]
fn reparametrization_preserves_image() {
    for pts in [curve_from(trefoil_pts, 128), curve_from(|u| [2.0 * u.cos(), 0.3 * u.sin(), 2.0 + u.sin()], 64)] {
        let (c, _) = analytic_fit(&pts, 5, 1e-10).unwrap();
        let r = arclength_reparametrize(&c).unwrap();
        assert!(hausdorff(&r, &c) < 1e-9);
        assert!(hausdorff(&c, &r) < 1e-9);
        assert!(r.speed_deviation(4096) < 1e-8);
    }
}

#[test]
fn circle_horizontal_points() {
    let c = arclength_reparametrize(&circle()).unwrap();
    let hs = horizontal_points(&c, 1e-6).unwrap();
    assert_eq!(hs.len(), 2);
    assert!((hs[0].theta - TAU / 4.0).abs() < 1e-12);
    assert!((hs[1].theta - 3.0 * TAU / 4.0).abs() < 1e-12);
}

#[test]
fn six_horizontal_points_match_scan_oracle() {
    let (c, _) = analytic_fit(&curve_from(trefoil_pts, 128), 5, 1e-10).unwrap();
    let c = arclength_reparametrize(&c).unwrap();
    let hs = horizontal_points(&c, 1e-6).unwrap();
    assert_eq!(hs.len(), 6);
    // oracle: sign changes of the height difference on a fine grid
    let n = 20000;
    let h: Vec<f64> = uniform_grid(n).iter().map(|&u| c.point(u)[2]).collect();
    let mut changes = 0;
    for i in 0..n {
        let d0 = h[(i + 1) % n] - h[i];
        let d1 = h[(i + 2) % n] - h[(i + 1) % n];
        if (d0 < 0.0) != (d1 < 0.0) {
            changes += 1;
        }
    }
    assert_eq!(changes, 6);
}

#[test]
fn flat_curve_is_degenerate() {
    let (c, _) = analytic_fit(&curve_from(|u| [u.cos(), u.sin(), 2.0], 64), 3, 1e-12).unwrap();
    let err = horizontal_points(&c, 1e-6).unwrap_err();
    assert!(matches!(err, GeomError::DegenerateHorizontalPoint { .. }));
}

#[test]
fn circle_partition_and_reversal() {
    let c = arclength_reparametrize(&circle()).unwrap();
    let hs = horizontal_points(&c, 1e-6).unwrap();
    let iv = partition_intervals(&c, &hs, 1, &[1]).unwrap();
    assert_eq!(iv[0].sign, -1);
    assert!((iv[0].start - TAU / 4.0).abs() < 1e-12 && (iv[0].end - 3.0 * TAU / 4.0).abs() < 1e-12);
    assert_eq!(iv[1].sign, 1);
    assert_eq!(iv[1].label, IntervalLabel::Max);
    assert!((iv[1].end - (TAU + TAU / 4.0)).abs() < 1e-12);
    let rev = partition_intervals(&c, &hs, -1, &[]).unwrap();
    assert_eq!(rev[0].sign, 1);
    assert_eq!(rev[1].sign, -1);
    assert_eq!(rev[0].label, IntervalLabel::Min);
    let err = partition_intervals(&c, &hs, 1, &[0]).unwrap_err();
    assert_eq!(err, GeomError::LabelOutOfRange { index: 0 });
}

#[test]
fn six_point_partition_alternates() {
    let (c, _) = analytic_fit(&curve_from(trefoil_pts, 128), 5, 1e-10).unwrap();
    let c = arclength_reparametrize(&c).unwrap();
    let hs = horizontal_points(&c, 1e-6).unwrap();
    let iv = partition_intervals(&c, &hs, 1, &[]).unwrap();
    assert_eq!(iv.len(), 6);
    for i in 0..6 {
        assert_eq!(iv[i].sign, -iv[(i + 1) % 6].sign);
        let mid = 0.5 * (iv[i].start + iv[i].end);
        let t3 = c.derivs(mid, 1)[1][2];
        assert_eq!(t3 > 0.0, iv[i].sign > 0);
    }
}

#[test]
fn circle_seed_accepted_unchanged() {
    let fr = circle_frame();
    let p = fr.at(TAU / 4.0);
    assert!((p.k[2] + 1.0).abs() < 1e-12);
    for u in uniform_grid(64) {
        let k = fr.k_field.eval(u);
        assert!(norm(sub(k, [-u.cos(), 0.0, -u.sin()])) < 1e-12);
    }
}

#[test]
fn circle_seed_e2_is_rotated() {
    let c = arclength_reparametrize(&circle()).unwrap();
    let hs = horizontal_points(&c, 1e-6).unwrap();
    let seed = constant_field([0.0, 1.0, 0.0]);
    let sf = sliding_field(&c, &hs, Some(&seed), 0.1).unwrap();
    assert!(sf.rotation[0].abs() > 0.0);
    // oracle: the projected seed is e₂ itself, so the rotation is the
    // smallest grid angle with |sin α| ≥ 0.1
    let alpha = sf.rotation[0].abs();
    assert!(alpha.sin() >= 0.1);
    assert!((alpha - TAU / 128.0 * (0.1f64.asin() / (TAU / 128.0)).ceil()).abs() < 1e-12);
    for h in &hs {
        assert!(sf.k.eval(h.theta)[2].abs() >= 0.1);
    }
    let fr = FrameField::new(c, sf.k, hs, vec![], 0.1, 0.1);
    let rep = fr.invariant_report(1024);
    assert!(rep.min_mu > 0.0);
    assert!(rep.orthonormality < 1e-10);
}

#[test]
fn default_seed_succeeds_on_trefoil() {
    let (c, _) = analytic_fit(&curve_from(trefoil_pts, 128), 5, 1e-10).unwrap();
    let fr = build_frame(&c, &FrameOptions::default()).unwrap();
    let rep = fr.invariant_report(2048);
    assert!(rep.orthonormality < 1e-10);
    assert!(rep.handedness < 1e-10);
    assert!(rep.vertical_sum < 1e-10);
    assert!(rep.min_mu > 0.0);
    for h in &fr.horizontal {
        assert!(fr.at(h.theta).k[2].abs() >= 0.1);
    }
    assert!(fr.sigma1 > 0.0 && fr.sigma1 <= 0.2);
}

#[test]
fn tube_forward_on_curve_and_injective_circle() {
    let fr = circle_frame();
    let tube = Tube::new(&fr, 0.2, 0.2);
    for u in uniform_grid(37) {
        assert!(norm(sub(tube.theta1(u, 0.0, 0.0), fr.curve.point(u))) < 1e-14);
    }
    assert!((reach(&fr) - 1.0).abs() < 1e-3);
    assert_eq!(tubular_maps(&fr, 0.2, 0.2).unwrap(), (0.2, 0.2));
}

#[test]
fn tube_round_trip_random_points() {
    let (c, _) = analytic_fit(&curve_from(trefoil_pts, 128), 5, 1e-10).unwrap();
    let fr = build_frame(&c, &FrameOptions::default()).unwrap();
    let tube = Tube::new(&fr, fr.sigma1, fr.rho1);
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..1000 {
        let th = rng.random_range(0.0..TAU);
        let s = rng.random_range(-1.0..1.0) * fr.sigma1;
        let r = rng.random_range(-1.0..1.0) * fr.rho1;
        let (th2, s2, r2) = tube.inverse(tube.theta1(th, s, r)).unwrap();
        assert!(stag_core::trig::angle_diff(th2, th).abs() < 1e-10);
        assert!((s2 - s).abs() < 1e-10 && (r2 - r).abs() < 1e-10);
    }
    let far = [10.0, 10.0, 10.0];
    assert!(matches!(tube.inverse(far), Err(GeomError::InverseDiverged { .. })));
}

#[test]
fn coord_jet_first_rows_are_frame() {
    let fr = circle_frame();
    for u in uniform_grid(16) {
        let p = fr.at(u);
        let j = coord_jets(&p);
        for i in 0..3 {
            assert!((j.grad[0][i] - p.t[i]).abs() < 1e-12);
            assert!((j.grad[1][i] - p.k[i]).abs() < 1e-12);
            assert!((j.grad[2][i] - p.n[i]).abs() < 1e-12);
        }
    }
}

/// Gradient of `(s, σ, ρ)` at `x` by central differences of the inverse.
fn fd_grad(tube: &Tube, x: [f64; 3], h: f64) -> [[f64; 3]; 3] {
    let l = tube.frame.curve.length / TAU;
    let mut g = [[0.0; 3]; 3];
    for j in 0..3 {
        let mut xp = x;
        let mut xm = x;
        xp[j] += h;
        xm[j] -= h;
        let a = tube.inverse_unchecked(xp).unwrap();
        let b = tube.inverse_unchecked(xm).unwrap();
        g[0][j] = stag_core::trig::angle_diff(a.0, b.0) * l / (2.0 * h);
        g[1][j] = (a.1 - b.1) / (2.0 * h);
        g[2][j] = (a.2 - b.2) / (2.0 * h);
    }
    g
}

#[test]
fn coord_jet_second_derivatives_match_finite_differences() {
    let (c, _) = analytic_fit(&curve_from(|u| [u.cos(), 0.2 * (2.0 * u).sin(), 2.0 + u.sin()], 64), 3, 1e-12).unwrap();
    for fr in [circle_frame(), build_frame(&c, &FrameOptions::default()).unwrap()] {
        let tube = Tube::new(&fr, fr.sigma1, fr.rho1);
        for &u in &[0.3, 1.9, 4.4] {
            let p = fr.at(u);
            let jet = coord_jets(&p);
            let hs = 1e-2;
            let g = |k: f64| fd_grad(&tube, tube.theta1(u, k * hs, 0.0), 1e-5);
            let (g2m, g1m, g1p, g2p) = (g(-2.0), g(-1.0), g(1.0), g(2.0));
            for i in 0..3 {
                for j in 0..3 {
                    let d = (g2m[i][j] - 8.0 * g1m[i][j] + 8.0 * g1p[i][j] - g2p[i][j]) / (12.0 * hs);
                    assert!(
                        (d - jet.dsigma_grad[i][j]).abs() < 1e-6,
                        "θ={u} [{i}][{j}]: fd {d} vs {}",
                        jet.dsigma_grad[i][j]
                    );
                }
            }
        }
    }
}

#[test]
fn straight_line_has_zero_second_derivatives() {
    let p = FramePoint {
        theta: 0.0,
        phi: [0.0, 0.0, 1.0],
        t: [1.0, 0.0, 0.0],
        k: [0.0, 0.6, 0.8],
        n: cross([1.0, 0.0, 0.0], [0.0, 0.6, 0.8]),
        dt: [0.0; 3],
        dk: [0.0; 3],
        dn: [0.0; 3],
    };
    let j = coord_jets(&p);
    for row in j.dsigma_grad {
        for v in row {
            assert_eq!(v, 0.0);
        }
    }
}

#[test]
fn open_link_closure_stays_positive() {
    let arc: Vec<[f64; 3]> = (0..40)
        .map(|i| {
            let s = i as f64 / 39.0 * 2.0;
            [s, 0.3 * s * s, 1.0 + 0.2 * s]
        })
        .collect();
    let (closed, frac) = close_open_link(&arc, 256);
    assert!(frac > 0.2 && frac < 0.9);
    assert!(closed.iter().all(|p| p[2] > 0.0));
    let (c, dev) = analytic_fit(&closed, 40, 0.05).unwrap();
    assert!(dev < 0.05);
    assert!(c.min_time(4096) > 0.0);
}

fn random_curve(a: [f64; 6]) -> SpacetimeCurve {
    // circle in a tilted plane plus small second harmonics, t > 0
    let comps = [
        TrigPoly::new(0.0, vec![1.0, a[0]], vec![0.0, a[1]]),
        TrigPoly::new(0.0, vec![a[2], a[3]], vec![0.3, 0.0]),
        TrigPoly::new(3.0, vec![a[4]], vec![0.8 + a[5]]),
    ];
    SpacetimeCurve::new(TrigVec3(comps))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn frame_invariants_hold(a in proptest::array::uniform6(-0.15f64..0.15)) {
        let c = random_curve(a);
        let fr = build_frame(&c, &FrameOptions::default()).unwrap();
        let rep = fr.invariant_report(2048);
        prop_assert!(rep.orthonormality < 1e-10);
        prop_assert!(rep.handedness < 1e-10);
        prop_assert!(rep.vertical_sum < 1e-10);
        prop_assert!(rep.min_mu > 0.0);
        // ∮ t₃ dθ vanishes
        prop_assert!(fr.t_field.0[2].integral().abs() < 1e-10);
        // partition alternates, count equals m and is even
        let m = fr.horizontal.len();
        prop_assert_eq!(fr.intervals.len(), m);
        prop_assert_eq!(m % 2, 0);
        for i in 0..m {
            prop_assert_eq!(fr.intervals[i].sign, -fr.intervals[(i + 1) % m].sign);
        }
    }

    #[test]
    fn tube_round_trip(a in proptest::array::uniform6(-0.15f64..0.15), th in 0.0..TAU, s in -1.0f64..1.0, r in -1.0f64..1.0) {
        let c = random_curve(a);
        let fr = build_frame(&c, &FrameOptions::default()).unwrap();
        let tube = Tube::new(&fr, fr.sigma1, fr.rho1);
        let (s, r) = (s * fr.sigma1, r * fr.rho1);
        let (th2, s2, r2) = tube.inverse(tube.theta1(th, s, r)).unwrap();
        prop_assert!(stag_core::trig::angle_diff(th2, th).abs() < 1e-10);
        prop_assert!((s2 - s).abs() < 1e-10 && (r2 - r).abs() < 1e-10);
        // duality: grad · Jacobian = identity
        let jm = tube.jacobian(th, 0.0, 0.0);
        let jet = coord_jets(&fr.at(th));
        for i in 0..3 {
            for j in 0..3 {
                let v: f64 = (0..3).map(|l| jet.grad[i][l] * jm[(l, j)]).sum();
                let id = if i == j { 1.0 } else { 0.0 };
                prop_assert!((v - id).abs() < 1e-10);
            }
        }
    }
}
