use baa_core::model::{make_grover_cost, make_random_cost, CostFunction, HamiltonianFamily};
use nalgebra::DMatrix;
use num_complex::Complex64;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// `(1 - s)(V I - J) + s W` built entry by entry.
fn explicit_dense(costs: &[f64], s: f64) -> DMatrix<f64> {
    let v = costs.len();
    DMatrix::from_fn(v, v, |i, j| {
        let lap = if i == j { v as f64 - 1.0 } else { -1.0 };
        (1.0 - s) * lap + if i == j { s * costs[i] } else { 0.0 }
    })
}

#[test]
fn matvec_matches_explicit_matrix() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..100 {
        let v = rng.gen_range(2..=256);
        let kappa: f64 = if v == 2 { 1.0 } else { rng.gen_range(1.0..4.0) };
        let chi = rng.gen_range(0.05..=1.0 / kappa);
        let fam = HamiltonianFamily::new(make_random_cost(v, chi, kappa, rng.gen()).unwrap());
        let s = rng.gen_range(0.0..=1.0);
        let x: Vec<f64> = (0..v).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let dense = explicit_dense(fam.cost().costs(), s);
        let want = &dense * nalgebra::DVector::from_column_slice(&x);
        let got = fam.apply(s, &x).unwrap();
        let scale = want.amax().max(1.0);
        for (a, b) in got.iter().zip(want.iter()) {
            assert!((a - b).abs() <= 1e-12 * scale);
        }
        assert!((fam.dense(s) - &dense).amax() <= 1e-12 * v as f64);

        let z: Vec<Complex64> = x.iter().map(|&r| Complex64::new(r, -0.5 * r)).collect();
        let gz = fam.apply(s, &z).unwrap();
        for (a, b) in gz.iter().zip(want.iter()) {
            assert!((a - Complex64::new(*b, -0.5 * b)).norm() <= 1e-12 * scale);
        }
    }
}

#[test]
fn commutator_norm_matches_dense() {
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    for _ in 0..20 {
        let v = rng.gen_range(3..=40);
        let fam = HamiltonianFamily::new(make_random_cost(v, 0.3, 3.0, rng.gen()).unwrap());
        let w = DMatrix::from_diagonal(&nalgebra::DVector::from_column_slice(fam.cost().costs()));
        let l = explicit_dense(&vec![0.0; v], 0.0);
        let c = &w * &l - &l * &w;
        let norm = c.singular_values().max();
        assert!((fam.commutator_norm() - norm).abs() <= 1e-9 * norm.max(1.0));
    }
}

#[test]
fn grover_layout() {
    let c = make_grover_cost(8, 0.25).unwrap();
    assert_eq!(c.marked(), 0);
    assert_eq!(c.costs()[1..], [2.0; 7]);
    assert_eq!(c.kappa(), 1.0);
    assert_eq!(c.grover_weight(), Some(0.25));
}

proptest! {
    #[test]
    fn random_costs_keep_promises(v in 3usize..300, kappa in 1.0f64..5.0, frac in 0.01f64..1.0, seed in any::<u64>()) {
        let chi = frac / kappa;
        let c = make_random_cost(v, chi, kappa, seed).unwrap();
        let zeros = c.costs().iter().filter(|&&w| w == 0.0).count();
        prop_assert_eq!(zeros, 1);
        prop_assert_eq!(c.costs()[c.marked()], 0.0);
        let vf = v as f64;
        prop_assert!((c.w1() - chi * vf).abs() <= 1e-12 * vf);
        prop_assert!((c.wmax() - kappa * chi * vf).abs() <= 1e-9 * vf);
        prop_assert!(c.wmax() <= vf * (1.0 + 1e-12));
        prop_assert!(c.costs().iter().all(|&w| w == 0.0 || w >= c.w1()));
        prop_assert_eq!(&make_random_cost(v, chi, kappa, seed).unwrap(), &c);
        let back = CostFunction::from_json(&c.to_json()).unwrap();
        prop_assert_eq!(back, c);
    }
}
