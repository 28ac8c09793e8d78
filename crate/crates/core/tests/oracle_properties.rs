use baa_core::baa::{build_schedule, SampledGapOracle};
use baa_core::cg_oracle::{init_oracle, theta_tilde, Branch};
use baa_core::model::{make_random_cost, HamiltonianFamily, RunParams};
use baa_core::spectrum::{solve_ground, spectral_gap, tau, theta};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SEEDS: u64 = 200;

fn instance(v: usize, chi: f64, kappa: f64, seed: u64) -> HamiltonianFamily {
    HamiltonianFamily::new(make_random_cost(v, chi, kappa, seed).unwrap())
}

#[test]
fn sampled_theta_concentrates() {
    let params = RunParams::default();
    let c0 = params.c0;
    let eps0 = 0.9 * c0 * (1.0 - c0) / (1.0 + c0);
    for (v, chi, kappa) in [(64, 0.4, 2.0), (128, 0.2, 4.0)] {
        let fam = instance(v, chi, kappa, 1);
        let wmax = fam.cost().wmax();
        let mut probe_rng = ChaCha8Rng::seed_from_u64(2);
        let probes: Vec<(f64, f64)> = (0..20)
            .map(|_| (probe_rng.gen_range(0.0..0.99), probe_rng.gen_range(0.0..1.0)))
            .collect();
        let mut good = 0;
        for seed in 0..SEEDS {
            let mut st = init_oracle(&fam, &RunParams { seed, ..params }, chi, kappa).unwrap();
            let x_min = st.x_min();
            let ok = probes.iter().all(|&(s, u)| {
                let x = x_min + u * 2.0 * v as f64;
                let exact = theta(&fam, s, x).unwrap();
                let est = theta_tilde(&mut st, &fam, s, x).unwrap();
                (exact - est).abs() <= eps0 * x_min / (tau(s) * wmax + x)
            });
            good += ok as u64;
        }
        let frac = good as f64 / SEEDS as f64;
        assert!(frac >= 1.0 - params.p, "V = {v}: {frac}");
    }
}

#[test]
fn sampled_theta_is_deterministic_per_seed() {
    let fam = instance(50, 0.3, 3.0, 8);
    let params = RunParams { seed: 77, ..RunParams::default() };
    let mut a = init_oracle(&fam, &params, 0.3, 3.0).unwrap();
    let mut b = init_oracle(&fam, &params, 0.3, 3.0).unwrap();
    for (s, x) in [(0.1, 30.0), (0.5, 12.0), (0.9, 40.0)] {
        assert_eq!(theta_tilde(&mut a, &fam, s, x).unwrap(), theta_tilde(&mut b, &fam, s, x).unwrap());
    }
    assert_eq!(a.samples(), b.samples());
    let mut c = init_oracle(&fam, &RunParams { seed: 78, ..params }, 0.3, 3.0).unwrap();
    theta_tilde(&mut c, &fam, 0.5, 12.0).unwrap();
    assert_ne!(a.samples(), c.samples());
}

#[test]
fn root_estimates_satisfy_residual_bound() {
    let fam = instance(64, 0.4, 2.0, 5);
    let wmax = fam.cost().wmax();
    for seed in 0..20 {
        let params = RunParams { seed, ..RunParams::default() };
        let mut oracle = SampledGapOracle::new(&fam, &params, 0.4, 2.0).unwrap();
        build_schedule(&fam, &mut oracle, &params).unwrap();
        for r in oracle.state().trace().iter().filter(|r| r.branch == Branch::Root) {
            let s = r.s + r.ds;
            let big_x = solve_ground(&fam, s).unwrap().x;
            let resid = (tau(s) * wmax + r.x0) * theta(&fam, s, r.x0).unwrap().abs();
            assert!((r.x0 - big_x).abs() <= resid * (1.0 + 1e-9) + 1e-9 * big_x);
        }
    }
}

#[test]
fn oracle_answers_stay_below_gap_with_confidence() {
    let params = RunParams::default();
    for (v, chi, kappa) in [(32, 0.4, 1.5), (128, 0.2, 4.0)] {
        let fam = instance(v, chi, kappa, 3);
        let mut sound = 0;
        for seed in 0..SEEDS {
            let p = RunParams { seed, ..params };
            let mut oracle = SampledGapOracle::new(&fam, &p, chi, kappa).unwrap();
            build_schedule(&fam, &mut oracle, &p).unwrap();
            let ok = oracle.state().trace().iter().filter(|r| r.branch == Branch::Root).all(|r| {
                let s = r.s + r.ds;
                let big_x = solve_ground(&fam, s).unwrap().x;
                r.gamma <= spectral_gap(&fam, s).unwrap() * (1.0 + 1e-12) && (r.x0 - big_x).abs() <= params.c0 * big_x
            });
            sound += ok as u32;
        }
        let frac = sound as f64 / SEEDS as f64;
        assert!(frac >= 1.0 - params.p - 0.05, "V = {v}: {frac}");
    }
}
