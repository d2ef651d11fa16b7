use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use wavespeed_core::model::cooperative_coexistence;
use wavespeed_core::pde::{
    estimate_speed, refine_check, simulate, smoothed_step, write_trajectory, Scheme, SimConfig,
};
use wavespeed_core::CompetitionParams;

fn params(d: f64, r: f64, k1: f64, k2: f64) -> CompetitionParams {
    CompetitionParams::new(d, r, k1, k2).unwrap()
}

#[test]
fn equilibria_stay_put_away_from_the_ends() {
    // the ends are clamped to (0, 0) and (1, 1), so only the middle half is checked
    let cfg = SimConfig::new(100.0, 0.1, 0.02, 5.0).unwrap();
    let n = cfg.grid.n_points();
    for p in [params(2.0, 1.0, 3.0, 3.0), params(0.1, 4.0, 1.5, 6.0)] {
        let (us, vs) = cooperative_coexistence(&p);
        for (u0, v0) in [(0.0, 0.0), (us, vs)] {
            let out = simulate(&p, &cfg, vec![u0; n], vec![v0; n], &[5.0]).unwrap();
            let snap = &out[0];
            for i in n / 4..3 * n / 4 {
                assert!((snap.u[i] - u0).abs() < 1e-10, "u at {i}: {}", snap.u[i]);
                assert!((snap.v[i] - v0).abs() < 1e-10, "v at {i}: {}", snap.v[i]);
            }
        }
    }
}

#[test]
fn ordered_data_stay_ordered() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let cfg = SimConfig::new(20.0, 0.1, 0.02, 10.0).unwrap();
    let n = cfg.grid.n_points();
    for _ in 0..10 {
        let p = params(
            10f64.powf(rng.random_range(-1.0..1.0)),
            10f64.powf(rng.random_range(-0.5..0.5)),
            rng.random_range(1.1..6.0),
            rng.random_range(1.1..6.0),
        );
        let lo_u: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let lo_v: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..1.0)).collect();
        let hi_u: Vec<f64> = lo_u.iter().map(|u| rng.random_range(*u..=1.0)).collect();
        let hi_v: Vec<f64> = lo_v.iter().map(|v| rng.random_range(*v..=1.0)).collect();
        let times = [0.5, 2.0, 10.0];
        let lo = simulate(&p, &cfg, lo_u, lo_v, &times).unwrap();
        let hi = simulate(&p, &cfg, hi_u, hi_v, &times).unwrap();
        for (a, b) in lo.iter().zip(&hi) {
            assert!(
                a.u.iter().zip(&b.u).all(|(x, y)| x <= y),
                "{p:?} u at t = {}",
                a.t
            );
            assert!(
                a.v.iter().zip(&b.v).all(|(x, y)| x <= y),
                "{p:?} v at t = {}",
                a.t
            );
        }
    }
}

#[test]
fn unit_square_is_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    // dt well above the reaction limit, so sub-stepping is exercised
    let cfg = SimConfig::new(20.0, 0.1, 0.5, 20.0).unwrap();
    let n = cfg.grid.n_points();
    for _ in 0..10 {
        let p = params(
            10f64.powf(rng.random_range(-2.0..2.0)),
            10f64.powf(rng.random_range(-1.0..1.0)),
            rng.random_range(1.1..20.0),
            rng.random_range(1.1..20.0),
        );
        let u0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        let v0: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..=1.0)).collect();
        let times: Vec<f64> = (1..=40).map(|i| 0.5 * i as f64).collect();
        for snap in simulate(&p, &cfg, u0, v0, &times).unwrap() {
            for w in snap.u.iter().chain(&snap.v) {
                assert!(
                    (-1e-10..=1.0 + 1e-10).contains(w),
                    "{p:?}: {w} at t = {}",
                    snap.t
                );
            }
        }
    }
}

#[test]
fn refinement_agrees_at_the_symmetric_point() {
    let cfg = SimConfig::new(100.0, 0.1, 0.02, 200.0).unwrap();
    let check = refine_check(&params(1.0, 1.0, 2.0, 2.0), &cfg).unwrap();
    assert!(check.agree);
    assert!(
        check.coarse.c_hat.abs() < 1e-6 && check.fine.c_hat.abs() < 1e-6,
        "{check:?}"
    );
}

#[test]
fn speed_is_insensitive_to_domain_size() {
    let p = params(11.0, 1.0, 3.0, 3.0);
    let short = estimate_speed(&p, &SimConfig::new(100.0, 0.1, 0.02, 200.0).unwrap()).unwrap();
    let long = estimate_speed(&p, &SimConfig::new(200.0, 0.1, 0.02, 200.0).unwrap()).unwrap();
    assert!(short.converged && long.converged);
    assert!(
        (short.c_hat - long.c_hat).abs() < 0.01,
        "{} vs {}",
        short.c_hat,
        long.c_hat
    );
    assert!(long.c_hat < 0.0);
}

#[test]
fn second_order_scheme_agrees() {
    let p = params(11.0, 1.0, 3.0, 3.0);
    let mut cfg = SimConfig::new(100.0, 0.1, 0.01, 200.0).unwrap();
    let euler = estimate_speed(&p, &cfg).unwrap();
    cfg.scheme = Scheme::Sbdf2;
    let bdf = estimate_speed(&p, &cfg).unwrap();
    assert!(
        (euler.c_hat - bdf.c_hat).abs() < 0.005,
        "{} vs {}",
        euler.c_hat,
        bdf.c_hat
    );
}

#[test]
fn trajectory_dump_layout() {
    let cfg = SimConfig::new(2.0, 0.5, 0.1, 1.0).unwrap();
    let p = params(1.0, 1.0, 2.0, 2.0);
    let s = smoothed_step(&cfg.grid);
    let snaps = simulate(&p, &cfg, s.clone(), s, &[0.0, 1.0]).unwrap();
    let mut buf = Vec::new();
    write_trajectory(&cfg.grid, &snaps, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "t,x,u,v");
    assert_eq!(lines.len(), 1 + 2 * cfg.grid.n_points());
    assert!(lines[1].starts_with("0,-2,0,0"));
    let last: Vec<f64> = lines
        .last()
        .unwrap()
        .split(',')
        .map(|f| f.parse().unwrap())
        .collect();
    assert_eq!(last[..3], [1.0, 2.0, 1.0]);

    let mut bad = vec![0.0; cfg.grid.n_points()];
    bad[3] = 1.5;
    assert!(simulate(&p, &cfg, bad.clone(), bad, &[1.0]).is_err());
}
