use proptest::prelude::*;
use stag_core::linalg::lstsq;
use stag_core::{uniform_grid, wrap_angle, Series2, TrigPoly, TAU};

fn poly() -> impl Strategy<Value = TrigPoly> {
    (1usize..6).prop_flat_map(|d| {
        (-2.0..2.0f64, prop::collection::vec(-2.0..2.0f64, d), prop::collection::vec(-2.0..2.0f64, d))
            .prop_map(|(a0, c, s)| TrigPoly::new(a0, c, s))
    })
}

proptest! {
    #[test]
    fn samples_round_trip(p in poly()) {
        let n = 4 * p.degree() + 3;
        let q = TrigPoly::from_uniform_samples(&p.sample_uniform(n), p.degree());
        for (a, b) in p.packed().iter().zip(q.packed()) {
            prop_assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fft_sampling_matches_eval(p in poly()) {
        let n = 32;
        for (u, v) in uniform_grid(n).into_iter().zip(p.sample_uniform(n)) {
            prop_assert!((p.eval(u) - v).abs() < 1e-12);
        }
    }

    #[test]
    fn antiderivative_inverts_deriv(p in poly(), u in 0.0..TAU) {
        let q = p.antiderivative().deriv();
        prop_assert!((q.eval(u) - (p.eval(u) - p.a0)).abs() < 1e-12);
        prop_assert!((p.deriv().integral()).abs() < 1e-12);
    }

    #[test]
    fn product_is_pointwise(p in poly(), q in poly(), u in 0.0..TAU) {
        prop_assert!((p.mul(&q).eval(u) - p.eval(u) * q.eval(u)).abs() < 1e-11);
    }

    #[test]
    fn derivative_matches_difference_quotient(p in poly(), u in 0.0..TAU) {
        let h = 1e-5;
        let fd = (p.eval(u + h) - p.eval(u - h)) / (2.0 * h);
        prop_assert!((p.eval_derivs(u, 1)[1] - fd).abs() < 1e-7);
    }

    #[test]
    fn wrapped_angles_stay_in_range(u in -1e3..1e3f64) {
        let w = wrap_angle(u);
        prop_assert!((0.0..TAU).contains(&w));
        prop_assert!(((u - w) / TAU - ((u - w) / TAU).round()).abs() < 1e-9);
    }

    #[test]
    fn series_product_evaluates_pointwise(a in prop::collection::vec(-1.0..1.0f64, 3), p in -0.1..0.1f64, q in -0.1..0.1f64) {
        let x = Series2::from_p(3, &a);
        let y = Series2::q_var(3).add_const(1.0);
        let lhs = x.mul(&y).eval(p, q);
        let rhs = x.eval(p, q) * (1.0 + q);
        prop_assert!((lhs - rhs).abs() < 1e-12);
    }

    #[test]
    fn lstsq_recovers_exact_solutions(x in prop::collection::vec(-3.0..3.0f64, 3)) {
        let a = nalgebra::DMatrix::from_fn(6, 3, |i, j| ((i + 1) as f64).powi(j as i32));
        let xv = nalgebra::DVector::from_vec(x.clone());
        let sol = lstsq(&a, &(&a * &xv), 1e-12);
        prop_assert_eq!(sol.rank, 3);
        prop_assert!((sol.x - xv).amax() < 1e-9);
    }
}
