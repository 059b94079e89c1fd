use cauchy_synth::*;
use linkgeom::{analytic_fit, build_frame, constant_field, FrameField, FrameOptions};
use proptest::prelude::*;
use stag_core::{uniform_grid, TrigPoly, TAU};

fn frame_from(f: impl Fn(f64) -> [f64; 3], degree: usize, max_labels: Vec<usize>) -> FrameField {
    let pts: Vec<[f64; 3]> = uniform_grid(128).into_iter().map(f).collect();
    let (c, _) = analytic_fit(&pts, degree, 1e-10).unwrap();
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let opts = FrameOptions {
        max_labels,
        seed: Some(constant_field([0.0, r, r])),
        ..FrameOptions::default()
    };
    build_frame(&c, &opts).unwrap()
}

fn circle_frame(max: bool) -> FrameField {
    frame_from(|u| [u.cos(), 0.0, 2.0 + u.sin()], 3, if max { vec![1] } else { vec![] })
}

fn trefoil_frame() -> FrameField {
    frame_from(
        |u| {
            [
                u.cos() + 0.5 * (2.0 * u).cos(),
                u.sin() - 0.5 * (2.0 * u).sin(),
                2.0 + 0.3 * (3.0 * u).sin(),
            ]
        },
        5,
        vec![],
    )
}

#[test]
fn circle_beta_sign_plan() {
    let fr = circle_frame(true);
    let b = choose_beta(&fr, &BetaOptions::default()).unwrap();
    assert!(b.coeffs.eval(0.0) < 0.0);
    let h = TAU / 4.0;
    assert!(b.coeffs.eval(h) * b.coeffs.deriv().eval(h) < 0.0);
    assert!(b.loop_integral.abs() < 1e-10);
    let fr = circle_frame(false);
    let b = choose_beta(&fr, &BetaOptions::default()).unwrap();
    assert!(b.coeffs.eval(0.0) > 0.0);
}

#[test]
fn constant_beta_is_rejected() {
    let fr = circle_frame(true);
    let err = verify_beta(&fr, &TrigPoly::constant(-1.0)).unwrap_err();
    assert!(err.contains("horizontal point"), "{err}");
}

#[test]
fn trefoil_beta_accepted() {
    let fr = trefoil_frame();
    let b = choose_beta(&fr, &BetaOptions::default()).unwrap();
    assert!(verify_beta(&fr, &b.coeffs).is_ok());
}

#[test]
fn hessian_determinant_identity() {
    for fr in [circle_frame(true), trefoil_frame()] {
        let b = choose_beta(&fr, &BetaOptions::default()).unwrap();
        for i in 0..512 {
            let th = TAU * (i as f64 + 0.37) / 512.0;
            let p = PointData::new(&fr, &b.coeffs, th);
            let q = q_coefficients(&p);
            let t3 = p.t3();
            let want = 4.0 * t3.powi(4);
            // relative 1e-10, above the cancellation floor of 4AB - C²
            let floor = 1e-13 * (4.0 * (q.a * q.b).abs() + q.c * q.c);
            assert!((q.hessian_det() - want).abs() <= 1e-10 * want + floor);
        }
    }
}

#[test]
fn horizontal_point_coefficients() {
    for fr in [circle_frame(true), trefoil_frame()] {
        let b = choose_beta(&fr, &BetaOptions::default()).unwrap();
        for h in &fr.horizontal {
            let p = PointData::new(&fr, &b.coeffs, h.theta);
            let q = q_coefficients(&p);
            for v in [q.a, q.b, q.c, q.d, q.e] {
                assert!(v.abs() < 1e-12);
            }
            let n = p.fp.n;
            let lit = p.beta * (q.x_beta * n[1] - q.y_beta * n[0]);
            assert!((q.f0 - lit).abs() < 1e-12);
            // oracle: with t₃ = 0, X = β'k₃t₁, Y = β'k₃t₂ and t₁n₂ - t₂n₁ = -k₃
            let k3 = p.fp.k[2];
            let oracle = -p.beta * p.dbeta * k3 * k3;
            assert!(
                (q.eval(0.0, 0.0) - oracle).abs() < 1e-10 * oracle.abs().max(1.0),
                "{} vs {oracle}, t3 {:e}",
                q.eval(0.0, 0.0),
                p.t3()
            );
            assert!(oracle > 0.0);
        }
    }
}

#[test]
fn extremum_value_matches_direct_evaluation() {
    for fr in [circle_frame(true), trefoil_frame()] {
        let b = choose_beta(&fr, &BetaOptions::default()).unwrap();
        let mut checked = 0;
        for i in 0..512 {
            let th = TAU * (i as f64 + 0.11) / 512.0;
            let p = PointData::new(&fr, &b.coeffs, th);
            if p.t3().abs() <= 1e-6 {
                continue;
            }
            let q = q_coefficients(&p);
            let (ac, bc, qc) = q_extremum(&p, &q).unwrap();
            let direct = q.eval(ac, bc);
            // relative 1e-10, above the cancellation floor of the evaluation
            let terms = (q.a * ac * ac).abs()
                + (q.b * bc * bc).abs()
                + (q.c * ac * bc).abs()
                + (q.d * ac).abs()
                + (q.e * bc).abs()
                + q.f0.abs();
            assert!(
                (direct - qc).abs() <= 1e-10 * qc.abs() + 1e-13 * terms,
                "{direct} vs {qc}"
            );
            let g = q.grad(ac, bc);
            assert!(g[0].hypot(g[1]) <= 1e-8 * (1.0 + ac.hypot(bc)));
            assert_eq!(qc > 0.0, p.t3() > 0.0);
            checked += 1;
        }
        assert!(checked > 400);
    }
}

#[test]
fn extremum_with_zero_beta_and_singularity() {
    let fr = circle_frame(true);
    let mut p = PointData::new(&fr, &TrigPoly::constant(0.0), 0.4);
    let q = q_coefficients(&p);
    assert_eq!(q_extremum(&p, &q).unwrap().2, 0.0);
    p.fp.t = [p.fp.t[0], p.fp.t[1], 1e-12];
    assert!(matches!(
        q_extremum(&p, &q),
        Err(SynthError::HorizontalPointSingularity { .. })
    ));
}

#[test]
fn circle_construction_keeps_eta_positive() {
    let fr = circle_frame(true);
    let opts = FgOptions::default();
    let b = choose_beta(&fr, &BetaOptions::default()).unwrap();
    let cont = construct_fg(&fr, &b, &opts).unwrap();
    assert!(cont.eta0 > 0.0);
    let grid = uniform_grid(opts.grid);
    // dense oracle: re-evaluate Q from scratch at every grid point
    for (i, &th) in grid.iter().enumerate() {
        let p = PointData::new(&fr, &b.coeffs, th);
        let q = q_coefficients(&p);
        let e = q.eval(cont.f[i], cont.g[i]);
        assert!(e > 0.0);
        assert!((e - cont.eta[i]).abs() < 1e-12 * e.abs().max(1.0));
    }
    // V' of the positive interval: η = Q_c = β²μ/(4t₃)
    let i0 = 0;
    let p = PointData::new(&fr, &b.coeffs, grid[i0]);
    let qc = p.beta * p.beta * p.fp.mu() / (4.0 * p.t3());
    assert!((cont.eta[i0] - qc).abs() < 1e-10 * qc);
    // U neighbourhoods: F = G = 0
    for h in &fr.horizontal {
        let i = (h.theta / TAU * opts.grid as f64).round() as usize % opts.grid;
        assert_eq!(cont.f[i], 0.0);
        assert_eq!(cont.g[i], 0.0);
    }
}

#[test]
fn smoothing_keeps_half_the_margin_and_obeys_lipschitz_bound() {
    for fr in [circle_frame(true), circle_frame(false), trefoil_frame()] {
        let opts = FgOptions::default();
        let (_, cont, sm) = synthesize(&fr, &BetaOptions::default(), &opts).unwrap();
        assert!(sm.min_eta >= 0.5 * cont.eta0);
        let fv = sm.f.sample_uniform(opts.grid);
        let gv = sm.g.sample_uniform(opts.grid);
        for i in 0..opts.grid {
            let e = cont.q[i].eval(fv[i], gv[i]);
            assert!((e - cont.eta[i]).abs() <= sm.lipschitz * sm.deviation * (1.0 + 1e-12));
        }
    }
}

#[test]
fn exact_polynomial_input_is_unchanged() {
    let fr = circle_frame(true);
    let opts = FgOptions::default();
    let b = choose_beta(&fr, &BetaOptions::default()).unwrap();
    let mut cont = construct_fg(&fr, &b, &opts).unwrap();
    let (_, _, sm) = synthesize(&fr, &BetaOptions::default(), &opts).unwrap();
    cont.f = sm.f.sample_uniform(opts.grid);
    cont.g = sm.g.sample_uniform(opts.grid);
    cont.eta = (0..opts.grid).map(|i| cont.q[i].eval(cont.f[i], cont.g[i])).collect();
    cont.eta0 = cont.eta.iter().cloned().fold(f64::INFINITY, f64::min);
    let again = smooth_fg(&cont, &opts).unwrap();
    assert_eq!(again.degree, sm.degree);
    assert!(again.deviation < 1e-12);
    assert!((again.min_eta - sm.min_eta).abs() < 1e-12);
}

#[test]
fn assembled_jets() {
    let fr = circle_frame(true);
    let (b, _, sm) = synthesize(&fr, &BetaOptions::default(), &FgOptions::default()).unwrap();
    let data = assemble_data(&fr, &b.coeffs, &sm.f, &sm.g).unwrap();
    let ds = fr.ds();
    let h = 1e-4;
    for &th in &[0.2, 1.3, 2.9, 4.0, 5.5] {
        let j = data.f_jet(&fr, th);
        let p = data.point(&fr, th);
        assert!((j.f_sigma - p.beta * p.fp.k[2]).abs() < 1e-14);
        assert!((j.f_theta - p.beta * p.fp.t[2]).abs() < 1e-14);
        let fs = |s: f64| data.f_on_sigma(&fr, th, s);
        let d1 = (fs(h) - fs(-h)) / (2.0 * h);
        let d2 = (fs(h) - 2.0 * fs(0.0) + fs(-h)) / (h * h);
        assert!((d1 - j.f_sigma).abs() < 1e-9);
        assert!((d2 - j.f_sigma_sigma).abs() < 1e-6);
        // ∂_θ f₀ = β t₃ and the mixed derivative of the assembly
        let dth = h / ds;
        let f0d = (data.f0.eval(th + dth) - data.f0.eval(th - dth)) / (2.0 * h);
        assert!((f0d - j.f_theta).abs() < 1e-7);
        let mixed = |u: f64| data.f_on_sigma(&fr, u, h) - data.f_on_sigma(&fr, u, -h);
        let dst = (mixed(th + dth) - mixed(th - dth)) / (4.0 * h * h);
        assert!((dst - j.f_sigma_theta).abs() < 1e-5);
        // g on the curve and its σ-derivative
        let (g0, gs) = data.g_jet(&fr, th);
        assert!((data.g_on_sigma(&fr, th, 0.0) - g0).abs() < 1e-14);
        assert!((g0 - p.beta * p.fp.n[2]).abs() < 1e-14);
        let gd = (data.g_on_sigma(&fr, th, h) - data.g_on_sigma(&fr, th, -h)) / (2.0 * h);
        assert!((gd - gs).abs() < 1e-7, "{gd} vs {gs}");
    }
    assert!((data.f0.eval(0.0)).abs() < 1e-14);
    assert!((data.f0.eval(TAU) - data.f0.eval(0.0)).abs() < 1e-10);
}

#[test]
fn periodicity_violation_detected() {
    let fr = circle_frame(true);
    // β = cos θ has ∮ β t₃ ≠ 0 on the circle
    let beta = TrigPoly::new(0.0, vec![1.0], vec![0.0]);
    let err = assemble_data(&fr, &beta, &TrigPoly::constant(0.0), &TrigPoly::constant(0.0));
    assert!(matches!(err, Err(SynthError::PeriodicityViolated { .. })));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn beta_scaling_scales_horizontal_eta(c in 0.1f64..10.0) {
        let fr = circle_frame(true);
        let b = choose_beta(&fr, &BetaOptions::default()).unwrap();
        let bc = b.coeffs.scale(c);
        for h in &fr.horizontal {
            let e1 = q_coefficients(&PointData::new(&fr, &b.coeffs, h.theta)).f0;
            let e2 = q_coefficients(&PointData::new(&fr, &bc, h.theta)).f0;
            prop_assert!((e2 - c * c * e1).abs() < 1e-10 * e2.abs());
            prop_assert!(e2 > 0.0);
        }
        prop_assert!(verify_beta(&fr, &bc).is_ok());
    }

    #[test]
    fn scaled_data_scales_eta(c in 0.1f64..10.0, th in 0.0..TAU) {
        let fr = trefoil_frame();
        let (b, _, sm) = synthesize(&fr, &BetaOptions::default(), &FgOptions::default()).unwrap();
        let e1 = eta(&fr, &b.coeffs, &sm.f, &sm.g, th);
        let e2 = eta(&fr, &b.coeffs.scale(c), &sm.f.scale(c), &sm.g.scale(c), th);
        prop_assert!((e2 - c * c * e1).abs() < 1e-9 * (1.0 + e2.abs()));
        prop_assert!(e1 > 0.0);
    }

    #[test]
    fn tangential_compatibility_is_exact(th in 0.0..TAU) {
        let fr = trefoil_frame();
        let (b, _, sm) = synthesize(&fr, &BetaOptions::default(), &FgOptions::default()).unwrap();
        let data = assemble_data(&fr, &b.coeffs, &sm.f, &sm.g).unwrap();
        let j = data.f_jet(&fr, th);
        let p = fr.at(th);
        let lhs = p.n[1] * (j.f_sigma * p.t[2] - j.f_theta * p.k[2]);
        let rhs = p.n[0] * (j.f_sigma * p.t[2] - j.f_theta * p.k[2]);
        prop_assert!(lhs.abs() < 1e-14 && rhs.abs() < 1e-14);
    }
}
