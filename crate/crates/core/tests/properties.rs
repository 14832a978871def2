use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use tsallis_monogamy::measures::{f_q, tsallis_from_spectrum, QParam, Q_C1, Q_C2};
use tsallis_monogamy::monogamy::{ckw_check, tee_sq_residual};
use tsallis_monogamy::qstate::{haar_random, state_from_json, state_to_json, State};

fn q(v: f64) -> QParam {
    QParam::new(v).unwrap()
}

proptest! {
    #[test]
    fn f_q_is_increasing(qv in 0.05f64..6.0, a in 0.0f64..1.0, b in 0.0f64..1.0) {
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(f_q(lo, q(qv)).unwrap() <= f_q(hi, q(qv)).unwrap() + 1e-15);
    }

    #[test]
    fn f_q_is_concave_on_the_concave_regime(
        qv in prop_oneof![Q_C1..2.0, 3.0..Q_C2],
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
        t in 0.0f64..1.0,
    ) {
        let f = |x: f64| f_q(x, q(qv)).unwrap();
        let mid = t * a + (1.0 - t) * b;
        prop_assert!(f(mid) >= t * f(a) + (1.0 - t) * f(b) - 1e-12);
    }

    #[test]
    fn f_q_squared_is_convex_on_the_window(
        qv in Q_C1..Q_C2,
        a in 0.0f64..1.0,
        b in 0.0f64..1.0,
        t in 0.0f64..1.0,
    ) {
        let f2 = |x: f64| f_q(x, q(qv)).unwrap().powi(2);
        let mid = t * a + (1.0 - t) * b;
        prop_assert!(f2(mid) <= t * f2(a) + (1.0 - t) * f2(b) + 1e-12);
    }

    #[test]
    fn entropy_is_continuous_through_q_equal_1(p in 0.01f64..0.99, eps in 1e-7f64..1e-5) {
        let spec = [p, 1.0 - p];
        let at1 = tsallis_from_spectrum(&spec, q(1.0));
        for side in [1.0 - eps, 1.0 + eps] {
            prop_assert!((tsallis_from_spectrum(&spec, q(side)) - at1).abs() < 10.0 * eps);
        }
    }

    #[test]
    fn qubit_residuals_are_nonnegative(seed in any::<u64>(), n in 3usize..=5, qv in Q_C1..Q_C2, focus in 0usize..3) {
        let psi = haar_random(&vec![2; n], &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(tee_sq_residual(&psi, focus, q(qv)).unwrap().residual >= -1e-8);
        prop_assert!(ckw_check(&psi, focus).unwrap().residual >= -1e-9);
    }

    #[test]
    fn json_round_trip_is_exact(seed in any::<u64>()) {
        let psi = haar_random(&[2, 3], &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        let back = state_from_json(&state_to_json(&State::Pure(psi.clone()))).unwrap();
        match back {
            State::Pure(p) => prop_assert_eq!(p.amplitudes(), psi.amplitudes()),
            State::Mixed(_) => prop_assert!(false, "pure state came back mixed"),
        }
    }
}
