use flow_sim::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::{PI, TAU};

fn sample(n: usize, period: f64, f: impl Fn(f64, f64) -> f64) -> Vec<f64> {
    let h = period / n as f64;
    let o = -0.5 * period;
    let mut v = Vec::with_capacity(n * n);
    for j in 0..n {
        for i in 0..n {
            v.push(f(o + h * i as f64, o + h * j as f64));
        }
    }
    v
}

fn generic(n: usize) -> SpectralField {
    let v = sample(n, TAU, |x, y| {
        (x).sin() * (2.0 * y).cos() + 0.6 * (3.0 * x + y).cos() + 0.4 * (x - 2.0 * y).sin() + 0.3 * (2.0 * x).cos()
    });
    SpectralField::from_grid(&v, n, TAU, 0.0).0
}

fn max_diff(a: &SpectralField, b: &SpectralField) -> f64 {
    a.to_grid().iter().zip(b.to_grid()).fold(0.0f64, |m, (x, y)| m.max((x - y).abs()))
}

#[test]
fn zero_delta_is_heat_flow() {
    let u0 = generic(64);
    let cfg = SimConfig { delta: 0.0, dt: 0.01, t_final: 1.0, ..SimConfig::default() };
    let end = simulate(&u0, &cfg).unwrap().pop().unwrap();
    assert!((end.time - 1.0).abs() < 1e-12);
    assert!(max_diff(&end, &u0.heat(1.0)) < 1e-12);
}

#[test]
fn eigenfunction_decays_for_any_delta() {
    let v = sample(64, TAU, |x, y| x.cos() * y.cos());
    let u0 = SpectralField::from_grid(&v, 64, TAU, 0.0).0;
    for delta in [0.0, 0.1, 1.0] {
        let cfg = SimConfig { delta, dt: 0.01, t_final: 1.0, ..SimConfig::default() };
        let end = simulate(&u0, &cfg).unwrap().pop().unwrap();
        let e = (-2.0f64).exp();
        let exact = SpectralField::from_grid(&v.iter().map(|x| x * e).collect::<Vec<_>>(), 64, TAU, 1.0).0;
        assert!(max_diff(&end, &exact) < 1e-8, "delta {delta}");
    }
}

#[test]
fn energy_and_enstrophy_do_not_increase() {
    let u0 = generic(64).scale(3.0);
    let cfg = SimConfig { delta: 1.0, dt: 0.005, t_final: 1.0, snapshot_every: 10, ..SimConfig::default() };
    let s = simulate(&u0, &cfg).unwrap();
    assert!(s.len() >= 20);
    for w in s.windows(2) {
        assert!(w[1].energy() <= w[0].energy() * (1.0 + 1e-12));
        assert!(w[1].enstrophy() <= w[0].enstrophy() * (1.0 + 1e-12));
    }
}

#[test]
fn time_stepping_is_fourth_order() {
    let u0 = generic(32).scale(1.5);
    let run = |dt: f64| {
        let cfg = SimConfig { delta: 1.0, dt, t_final: 0.5, snapshot_every: 1000, ..SimConfig::default() };
        simulate(&u0, &cfg).unwrap().pop().unwrap()
    };
    let (a, b, c) = (run(0.02), run(0.01), run(0.005));
    let order = (b.sub(&a).l2_norm() / c.sub(&b).l2_norm()).log2();
    assert!(order >= 3.5, "measured order {order}");
}

#[test]
fn doubling_resolution_changes_little() {
    let f = |x: f64, y: f64| 0.5 * (x.cos() + (y + 0.3).sin()).exp() * 0.2;
    let run = |n: usize| {
        let u0 = SpectralField::from_grid(&sample(n, TAU, f), n, TAU, 0.0).0;
        let cfg = SimConfig { delta: 1.0, dt: 0.01, t_final: 0.5, snapshot_every: 1000, ..SimConfig::default() };
        simulate(&u0, &cfg).unwrap().pop().unwrap()
    };
    let (a, b) = (run(64), run(128));
    for (x, y) in [(0.3, -1.2), (2.0, 0.5), (-2.9, 3.0)] {
        assert!((a.eval(x, y) - b.eval(x, y)).abs() < 1e-10);
    }
}

#[test]
fn dealiased_term_has_zero_mean() {
    let u0 = generic(64).scale(5.0);
    let nl = Nonlinear::new(&u0, Dealias::TwoThirds);
    let w = u0.laplacian();
    let (j, _) = nl.jacobian(&w.coeffs);
    let scale = j.iter().fold(0.0f64, |m, c| m.max(c.norm()));
    assert!(j[0].norm() <= 1e-12 * scale.max(1.0));
}

#[test]
fn stored_fields_stay_hermitian_and_mean_free() {
    let v: Vec<f64> = sample(32, TAU, |x, y| 2.0 + x.sin() * (y + x).cos());
    let (u0, mean) = initial_field(&v, 32, TAU);
    assert!((mean - 2.0).abs() < 1e-12);
    let cfg = SimConfig { delta: 1.0, dt: 0.01, t_final: 0.3, ..SimConfig::default() };
    for f in simulate(&u0, &cfg).unwrap() {
        assert!(f.hermitian_error() < 1e-13);
        assert!(f.mean().abs() < 1e-15);
    }
}

#[test]
fn duhamel_form_is_satisfied() {
    let u0 = generic(64);
    let cfg = SimConfig { delta: 0.0, dt: 0.01, t_final: 0.2, ..SimConfig::default() };
    let s = simulate(&u0, &cfg).unwrap();
    assert!(duhamel_residual(&s, &u0, 0.0, Dealias::TwoThirds).unwrap().max < 1e-12);

    let v = sample(64, TAU, |x, y| x.cos() * y.cos());
    let e0 = SpectralField::from_grid(&v, 64, TAU, 0.0).0;
    let cfg = SimConfig { delta: 1.0, dt: 0.01, t_final: 0.5, ..SimConfig::default() };
    let s = simulate(&e0, &cfg).unwrap();
    assert!(duhamel_residual(&s, &e0, 1.0, Dealias::TwoThirds).unwrap().max < 1e-10);

    let dt = 1e-3;
    let cfg = SimConfig { delta: 1e-3, dt, t_final: 1.0, ..SimConfig::default() };
    let s = simulate(&u0, &cfg).unwrap();
    let r = duhamel_residual(&s, &u0, 1e-3, Dealias::TwoThirds).unwrap();
    assert!(r.max < f64::max(1e-6, 10.0 * dt * dt), "{}", r.max);
    assert!(matches!(
        duhamel_residual(&s[..5], &u0, 1e-3, Dealias::TwoThirds),
        Err(SimError::InsufficientSnapshots { found: 5, .. })
    ));
}

#[test]
fn gap_is_linear_in_delta() {
    let u0 = generic(64);
    let cfg = SimConfig { dt: 0.01, t_final: 1.0, ..SimConfig::default() };
    let win = Window { x: [-1.0, 1.0], y: [-1.0, 1.0] };
    let st = gap_study(&u0, &cfg, &[1e-2, 5e-3, 2.5e-3], &win, 2).unwrap();
    assert!((0.9..=1.1).contains(&st.slope), "{st:?}");
    assert!(st.ratio_spread < 0.15, "{st:?}");
    let s0 = simulate(&u0, &SimConfig { delta: 0.0, ..cfg.clone() }).unwrap();
    assert!(heat_vs_ns_gap(&s0, &u0, &win, 2, 1.0).0 < 1e-12);
    let s1 = simulate(&u0, &SimConfig { delta: 1e-2, ..cfg }).unwrap();
    let (_, running) = heat_vs_ns_gap(&s1, &u0, &win, 2, 1.0);
    assert!(running.windows(2).all(|w| w[1].1 >= w[0].1));
}

#[test]
fn rescaling_keeps_critical_structure() {
    let v = sample(32, TAU, |x, y| x.cos() * y.cos() + 0.2 * (2.0 * x).sin());
    let u0 = SpectralField::from_grid(&v, 32, TAU, 0.0).0;
    let s = vec![u0.clone()];
    let same = rescale_solution(&s, 1.0).unwrap();
    assert_eq!(same[0], u0);
    assert!(matches!(rescale_solution(&s, 0.0), Err(SimError::NonPositiveDelta { .. })));
    let r = rescale_solution(&s, 0.01).unwrap();
    let det = |f: &SpectralField, x: f64, y: f64| {
        f.eval_partial(2, 0, x, y) * f.eval_partial(0, 2, x, y) - f.eval_partial(1, 1, x, y).powi(2)
    };
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for _ in 0..5 {
        let (x, y) = (rng.random_range(-PI..PI), rng.random_range(-PI..PI));
        let (gx, gy) = (u0.eval_partial(1, 0, x, y), u0.eval_partial(0, 1, x, y));
        let (hx, hy) = (r[0].eval_partial(1, 0, x, y), r[0].eval_partial(0, 1, x, y));
        assert!((hx - 0.01 * gx).abs() < 1e-14 && (hy - 0.01 * gy).abs() < 1e-14);
    }
    // saddle of cos x cos y at (π/2, π/2), shifted by the sin 2x term only in x
    assert!(det(&u0, PI / 2.0, PI / 2.0) < 0.0);
    assert!(det(&r[0], PI / 2.0, PI / 2.0) < 0.0);
}

#[test]
fn cfl_and_blow_up_are_reported() {
    let u0 = generic(32).scale(100.0);
    let cfg = SimConfig { delta: 10.0, dt: 0.1, t_final: 1.0, ..SimConfig::default() };
    assert!(matches!(simulate(&u0, &cfg), Err(SimError::CflViolation { .. })));
    let cfg = SimConfig { delta: 1e3, dt: 0.1, t_final: 50.0, max_cfl: f64::INFINITY, ..SimConfig::default() };
    match simulate(&u0, &cfg) {
        Err(SimError::NaNDetected { last_good, .. }) => {
            assert!(last_good.coeffs.iter().all(|c| c.re.is_finite()));
        }
        other => panic!("expected blow-up, got {:?}", other.map(|v| v.len())),
    }
}

#[test]
fn local_evaluation_matches_grid() {
    let u0 = generic(32);
    let g = u0.partial_grid(1, 1);
    let h = u0.spacing();
    let x0 = [u0.coord(3), u0.coord(5)];
    let loc = u0.eval_local(&[[1, 1], [0, 0]], x0, [h, h], [4, 3]);
    for j in 0..3 {
        for i in 0..4 {
            assert!((loc[0][j * 4 + i] - g[(5 + j) * 32 + 3 + i]).abs() < 1e-12);
        }
    }
    let exact = |x: f64, y: f64| x.sin() * (2.0 * y).cos() + 0.6 * (3.0 * x + y).cos() + 0.4 * (x - 2.0 * y).sin() + 0.3 * (2.0 * x).cos();
    assert!((u0.eval(0.123, -2.2) - exact(0.123, -2.2)).abs() < 1e-12);
}

#[test]
fn snapshot_files_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let u0 = generic(16);
    let p = dir.path().join("s0.bin");
    write_field(&p, &u0).unwrap();
    let back = read_field(&p).unwrap();
    assert!(max_diff(&back, &u0) < 1e-14);
    let bytes = std::fs::read(&p).unwrap();
    assert_eq!(&bytes[..7], MAGIC);
    assert_eq!(bytes.len(), 7 + 32 + 8 * 256);
    let two = vec![u0.to_grid(), u0.partial_grid(1, 0)];
    let h = SnapshotHeader { n: 16, period: TAU, time: 0.5, fields: 2 };
    write_snapshot(&p, &h, &two).unwrap();
    let (hb, fb) = read_snapshot(&p).unwrap();
    assert_eq!(hb, h);
    assert_eq!(fb, two);
    let idx = SnapshotIndex {
        n: 16,
        period: TAU,
        delta: 0.1,
        snapshots: vec![IndexEntry { path: "s0.bin".into(), time: 0.5 }],
    };
    idx.save(&dir.path().join("index.json")).unwrap();
    let ib = SnapshotIndex::load(&dir.path().join("index.json")).unwrap();
    assert_eq!(ib, idx);
    assert_eq!(ib.load_fields(dir.path()).unwrap().len(), 1);
    std::fs::write(&p, b"NOTSTG1xxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxxx").unwrap();
    assert!(matches!(read_snapshot(&p), Err(SimError::Format(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]
    #[test]
    fn grids_give_hermitian_mean_free_fields(seed in 0u64..1000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let v: Vec<f64> = (0..256).map(|_| rng.random_range(-1.0..1.0)).collect();
        let (f, _) = SpectralField::from_grid(&v, 16, 3.0, 0.0);
        prop_assert!(f.hermitian_error() < 1e-13);
        prop_assert!(f.mean() == 0.0);
        let g = f.to_grid();
        prop_assert!(g.iter().sum::<f64>().abs() < 1e-12);
    }
}
