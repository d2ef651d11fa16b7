use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavespeed_core::model::{cooperative_coexistence, to_cooperative};
use wavespeed_core::{CompetitionParams, Lv1Params};

#[test]
fn cooperative_structure_on_sample_grid() {
    // 100 x 100 points of R = {u >= 0, v <= 1}, cross-partials by central differences
    let h = 1e-6;
    for p in [
        CompetitionParams::new(1.0, 1.0, 2.0, 2.0).unwrap(),
        CompetitionParams::new(0.05, 3.0, 8.0, 1.2).unwrap(),
        CompetitionParams::new(40.0, 0.2, 1.01, 30.0).unwrap(),
    ] {
        for i in 0..100 {
            for j in 0..100 {
                let u = 3.0 * i as f64 / 99.0;
                let v = 1.0 - 3.0 * j as f64 / 99.0;
                let dfdv = (p.reaction_f(u, v + h) - p.reaction_f(u, v - h)) / (2.0 * h);
                let dgdu = (p.reaction_g(u + h, v) - p.reaction_g(u - h, v)) / (2.0 * h);
                assert!(dfdv >= -1e-7, "df/dv = {dfdv} at ({u}, {v})");
                assert!(dgdu >= -1e-7, "dg/du = {dgdu} at ({u}, {v})");
            }
        }
    }
}

#[test]
fn lv1_round_trip() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut checked = 0;
    while checked < 100 {
        let gamma = 10f64.powf(rng.random_range(-1.0..1.0));
        let alpha = (1.0 / gamma) * rng.random_range(1.01..5.0);
        let beta = alpha * rng.random_range(1.01..5.0);
        let d = 10f64.powf(rng.random_range(-2.0..2.0));
        let lv1 = Lv1Params::new(d, alpha, beta, gamma).unwrap();
        let back = lv1.to_lv2().unwrap().to_lv1();
        for (a, b) in [
            (lv1.d, back.d),
            (lv1.alpha, back.alpha),
            (lv1.beta, back.beta),
            (lv1.gamma, back.gamma),
        ] {
            assert!(
                (a / b - 1.0).abs() < 4.0 * f64::EPSILON,
                "{lv1:?} vs {back:?}"
            );
        }
        checked += 1;
    }
}

proptest! {
    #[test]
    fn coexistence_is_a_zero_of_the_reaction(
        d in 0.01f64..100.0,
        r in 0.01f64..100.0,
        k1 in 1.001f64..50.0,
        k2 in 1.001f64..50.0,
    ) {
        let p = CompetitionParams::new(d, r, k1, k2).unwrap();
        let (ub, vb) = p.coexistence();
        let (u, v) = to_cooperative(ub, vb);
        let (us, vs) = cooperative_coexistence(&p);
        prop_assert!((u - us).abs() < 1e-12 && (v - vs).abs() < 1e-12);
        // relative to the size of the individual terms
        let scale = k1 * k2;
        prop_assert!(p.reaction_f(u, v).abs() < 1e-14 * scale);
        prop_assert!(p.reaction_g(u, v).abs() < 1e-14 * scale);
        let e = p.equilibria();
        prop_assert_eq!(e.stable_a, (0.0, 1.0));
        prop_assert_eq!(e.stable_b, (1.0, 0.0));
    }

    #[test]
    fn validation_rejects_weak_competition(k1 in 0.0f64..1.0, k2 in 1.5f64..3.0) {
        prop_assert!(CompetitionParams::new(1.0, 1.0, k1, k2).is_err());
        prop_assert!(CompetitionParams::new(1.0, 1.0, k2, k1).is_err());
    }
}
