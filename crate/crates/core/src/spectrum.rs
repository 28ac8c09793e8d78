//! Exact spectral oracle for `H(s)` built on the secular equation of a
//! diagonal-minus-rank-one matrix.
//!
//! `H(s) = D(s) - (1 - s) 1 1^T` with `D(s) = diag((1 - s) V + s W_u)`. Every
//! eigenvector with non-zero component sum solves
//! `(1 - s) sum_u 1 / (D_u - lambda) = 1`, which has one root below the
//! smallest pole and one root strictly between each pair of consecutive
//! distinct poles. A pole of multiplicity `k` is itself an eigenvalue of
//! multiplicity `k - 1`.
//!
//! The ground state is handled in the rescaled form `G(s) = H(s) / (1 - s)`,
//! where `X = V - lambda_0(G)` is the unique positive root of
//! `theta(s, x) = sum_u (tau W_u + x)^{-1} - 1`, `tau = s / (1 - s)`.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::Serialize;

use crate::model::HamiltonianFamily;
use crate::{Error, Result};

/// Upper clamp on `tau = s / (1 - s)`.
pub const TAU_MAX: f64 = 1e15;

/// Largest matrix accepted by [`dense_eigendecomposition`].
pub const DENSE_CAP: usize = 2048;

const MAX_ITER: usize = 300;

/// `tau = s / (1 - s)`, clamped at [`TAU_MAX`] (and for `s >= 1`).
pub fn tau(s: f64) -> f64 {
    if s >= 1.0 {
        TAU_MAX
    } else {
        (s / (1.0 - s)).min(TAU_MAX)
    }
}

fn check_s(s: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!(
            "s must lie in [0, 1], got {s}"
        )));
    }
    Ok(())
}

/// `theta(s, x) = sum_u (tau W_u + x)^{-1} - 1`; strictly decreasing in `x`.
pub fn theta(family: &HamiltonianFamily, s: f64, x: f64) -> Result<f64> {
    check_s(s)?;
    if !(x > 0.0) {
        return Err(Error::Pole(x));
    }
    let t = tau(s);
    Ok(family
        .cost()
        .costs()
        .iter()
        .map(|&w| 1.0 / (t * w + x))
        .sum::<f64>()
        - 1.0)
}

/// Ground state of `H(s)` together with `X(s) = V - lambda_0(G(s))`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroundState {
    pub s: f64,
    pub lambda0: f64,
    pub x: f64,
    /// Strictly positive on `[0, 1)`, unit 2-norm.
    pub phi: Vec<f64>,
}

impl GroundState {
    /// `g_{m}(s) = X - 1`.
    pub fn g_marked(&self) -> f64 {
        self.x - 1.0
    }
}

/// Ground energy, gap and ground state of `H(s)` at one point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralPoint {
    pub s: f64,
    pub lambda0: f64,
    pub lambda1: f64,
    pub gap: f64,
    pub x: f64,
    pub phi: Vec<f64>,
}

/// Solves for the ground state through the positive root of [`theta`].
///
/// `s = 1` is read off `W`: the ground state is `e_m` and `X = 1`, the limit
/// of `X(s)` as `s -> 1`.
pub fn solve_ground(family: &HamiltonianFamily, s: f64) -> Result<GroundState> {
    check_s(s)?;
    let costs = family.cost().costs();
    let n = costs.len();
    let vf = n as f64;
    let m = family.cost().marked();
    if s == 1.0 {
        let mut phi = vec![0.0; n];
        phi[m] = 1.0;
        return Ok(GroundState {
            s,
            lambda0: 0.0,
            x: 1.0,
            phi,
        });
    }
    let t = tau(s);
    let x = if s == 0.0 {
        vf
    } else {
        // theta(1) > 0 from the marked term alone, theta(V) <= 0 since every term <= 1/V.
        let f = |x: f64| {
            let mut val = -1.0;
            let mut der = 0.0;
            for &w in costs {
                let r = 1.0 / (t * w + x);
                val += r;
                der -= r * r;
            }
            (val, der)
        };
        let (fv, _) = f(vf);
        if fv >= 0.0 {
            vf
        } else {
            rtsafe(f, 1.0, vf, false)?
        }
    };
    let mut phi: Vec<f64> = costs.iter().map(|&w| 1.0 / (x + t * w)).collect();
    let norm = phi.iter().map(|p| p * p).sum::<f64>().sqrt();
    phi.iter_mut().for_each(|p| *p /= norm);
    Ok(GroundState {
        s,
        lambda0: (1.0 - s) * (vf - x),
        x,
        phi,
    })
}

/// Ground-state amplitude on the marked vertex.
pub fn phi_marked(family: &HamiltonianFamily, s: f64) -> Result<f64> {
    let g = solve_ground(family, s)?;
    Ok(g.phi[family.cost().marked()])
}

/// Distinct pole groups `(representative cost, multiplicity)` of `D(s)`,
/// merging poles closer than `1e-12 V`.
fn pole_groups(family: &HamiltonianFamily, s: f64) -> Vec<(f64, usize)> {
    let mut w = family.cost().costs().to_vec();
    w.sort_by(f64::total_cmp);
    let tol = 1e-12 * family.dim() as f64;
    let mut groups: Vec<(f64, usize)> = Vec::new();
    for c in w {
        match groups.last_mut() {
            Some((rep, k)) if s * (c - *rep) <= tol => *k += 1,
            _ => groups.push((c, 1)),
        }
    }
    groups
}

/// Distance `t = d_0 - lambda_0 > 0` of the ground energy below the first pole.
fn root_below(groups: &[(f64, usize)], s: f64, vf: f64) -> Result<f64> {
    let w0 = groups[0].0;
    let f = |t: f64| {
        let mut val = -1.0;
        let mut der = 0.0;
        for &(w, k) in groups {
            let r = 1.0 / (s * (w - w0) + t);
            val += (1.0 - s) * k as f64 * r;
            der -= (1.0 - s) * k as f64 * r * r;
        }
        (val, der)
    };
    let hi = (1.0 - s) * vf;
    if f(hi).0 >= 0.0 {
        return Ok(hi);
    }
    rtsafe(f, 0.0, hi, false)
}

/// Offset `t` of the secular root in `(d_j, d_{j+1})` measured from `d_j`.
fn root_between(groups: &[(f64, usize)], s: f64, j: usize) -> Result<f64> {
    let wj = groups[j].0;
    let width = s * (groups[j + 1].0 - wj);
    let f = |t: f64| {
        let mut val = -1.0;
        let mut der = 0.0;
        for &(w, k) in groups {
            let r = 1.0 / (s * (w - wj) - t);
            val += (1.0 - s) * k as f64 * r;
            der += (1.0 - s) * k as f64 * r * r;
        }
        (val, der)
    };
    rtsafe(f, 0.0, width, true)
}

/// All `V` eigenvalues of `H(s)` in ascending order.
pub fn full_spectrum(family: &HamiltonianFamily, s: f64) -> Result<Vec<f64>> {
    check_s(s)?;
    let vf = family.dim() as f64;
    if s == 1.0 {
        let mut w = family.cost().costs().to_vec();
        w.sort_by(f64::total_cmp);
        return Ok(w);
    }
    let groups = pole_groups(family, s);
    let pole = |w: f64| (1.0 - s) * vf + s * w;
    let mut eig = Vec::with_capacity(family.dim());
    eig.push(pole(groups[0].0) - root_below(&groups, s, vf)?);
    for j in 0..groups.len() {
        let d = pole(groups[j].0);
        eig.extend(std::iter::repeat(d).take(groups[j].1 - 1));
        if j + 1 < groups.len() {
            eig.push(d + root_between(&groups, s, j)?);
        }
    }
    eig.sort_by(f64::total_cmp);
    Ok(eig)
}

/// `(lambda_0, lambda_1, gamma)` of `H(s)` from the two lowest secular roots.
///
/// The gap is assembled from the two offsets around the first pole, so it
/// carries no cancellation error even when both eigenvalues are large.
pub fn lowest_two(family: &HamiltonianFamily, s: f64) -> Result<(f64, f64, f64)> {
    check_s(s)?;
    let vf = family.dim() as f64;
    if s == 1.0 {
        let w1 = family.cost().w1();
        return Ok((0.0, w1, w1));
    }
    let groups = pole_groups(family, s);
    let d0 = (1.0 - s) * vf + s * groups[0].0;
    let below = root_below(&groups, s, vf)?;
    let above = if groups[0].1 >= 2 || groups.len() == 1 {
        0.0
    } else {
        root_between(&groups, s, 0)?
    };
    Ok((d0 - below, d0 + above, below + above))
}

/// Spectral gap `gamma(s) = lambda_1 - lambda_0` of `H(s)`.
pub fn spectral_gap(family: &HamiltonianFamily, s: f64) -> Result<f64> {
    Ok(lowest_two(family, s)?.2)
}

pub fn spectral_point(family: &HamiltonianFamily, s: f64) -> Result<SpectralPoint> {
    let ground = solve_ground(family, s)?;
    let (_, lambda1, gap) = lowest_two(family, s)?;
    Ok(SpectralPoint {
        s,
        lambda0: ground.lambda0,
        lambda1,
        gap,
        x: ground.x,
        phi: ground.phi,
    })
}

/// The unique `s_min` with `phi(m)^2 = 1/2`, by bisection on the ground state.
pub fn locate_s_min(family: &HamiltonianFamily) -> Result<f64> {
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        let pm = phi_marked(family, mid)?;
        if pm * pm < 0.5 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Symmetric eigendecomposition with eigenvalues ascending and eigenvectors
/// as matching columns.
pub fn dense_eigendecomposition(matrix: &DMatrix<f64>) -> Result<(Vec<f64>, DMatrix<f64>)> {
    let n = matrix.nrows();
    if matrix.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: matrix.ncols(),
        });
    }
    if n > DENSE_CAP {
        return Err(Error::SizeCap {
            what: "dense dimension",
            got: n,
            cap: DENSE_CAP,
        });
    }
    let eig = SymmetricEigen::new(matrix.clone());
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok((values, vectors))
}

/// Safeguarded Newton iteration on a monotone function bracketed by `[lo, hi]`.
///
/// `f` returns the value and derivative. With `increasing` the root satisfies
/// `f(lo) < 0 < f(hi)`, otherwise the signs are swapped. Endpoints are never
/// evaluated, so poles may sit on them.
fn rtsafe<F>(f: F, mut lo: f64, mut hi: f64, increasing: bool) -> Result<f64>
where
    F: Fn(f64) -> (f64, f64),
{
    let sign = if increasing { 1.0 } else { -1.0 };
    let mut x = 0.5 * (lo + hi);
    let mut dx_old = hi - lo;
    let mut dx = dx_old;
    for _ in 0..MAX_ITER {
        let (v, d) = f(x);
        let (v, d) = (sign * v, sign * d);
        if v == 0.0 {
            return Ok(x);
        }
        if v < 0.0 {
            lo = x;
        } else {
            hi = x;
        }
        if hi - lo <= 4.0 * f64::EPSILON * hi.abs().max(lo.abs()) {
            return Ok(0.5 * (lo + hi));
        }
        let newton = x - v / d;
        let bisect = !(d > 0.0)
            || !(newton > lo && newton < hi)
            || (2.0 * v).abs() > (dx_old * d).abs();
        dx_old = dx;
        if bisect {
            dx = 0.5 * (hi - lo);
            x = lo + dx;
        } else {
            dx = v / d;
            x = newton;
            if dx.abs() <= 1e-14 * x.abs() {
                return Ok(x);
            }
        }
    }
    Err(Error::Convergence(format!(
        "no convergence in {MAX_ITER} iterations, bracket [{lo:e}, {hi:e}]"
    )))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{make_grover_cost, make_random_cost, CostFunction};
    use approx::assert_relative_eq;

    fn diag0222() -> HamiltonianFamily {
        HamiltonianFamily::new(CostFunction::new(vec![0.0, 2.0, 2.0, 2.0]).unwrap())
    }

    fn random(v: usize, seed: u64) -> HamiltonianFamily {
        HamiltonianFamily::new(make_random_cost(v, 0.3, 2.5, seed).unwrap())
    }

    #[test]
    fn theta_examples() {
        let fam = random(10, 3);
        assert_relative_eq!(theta(&fam, 0.0, 10.0).unwrap(), 0.0, epsilon = 1e-15);
        let fam = diag0222();
        let r3 = 3f64.sqrt();
        assert!(theta(&fam, 0.5, 1.0 + r3).unwrap().abs() < 1e-15);
        assert_relative_eq!(theta(&fam, 0.5, 1.0).unwrap(), 1.0, epsilon = 1e-15);
        assert!(matches!(theta(&fam, 0.5, 0.0), Err(Error::Pole(_))));
        assert!(matches!(theta(&fam, 0.5, -1.0), Err(Error::Pole(_))));
    }

    #[test]
    fn ground_state_examples() {
        let fam = random(9, 1);
        let g = solve_ground(&fam, 0.0).unwrap();
        assert_eq!(g.x, 9.0);
        assert_eq!(g.lambda0, 0.0);
        assert!(g.phi.iter().all(|&p| (p - 1.0 / 3.0).abs() < 1e-15));

        // Frozen from the 4x4 dense eigensolver: X = 1 + sqrt 3.
        let fam = diag0222();
        let g = solve_ground(&fam, 0.5).unwrap();
        let r3 = 3f64.sqrt();
        assert_relative_eq!(g.x, 1.0 + r3, max_relative = 1e-14);
        assert_relative_eq!(g.lambda0, (3.0 - r3) / 2.0, max_relative = 1e-13);
        assert_relative_eq!(g.lambda0, 0.633_974_596_215_561_3, max_relative = 1e-13);
        assert_relative_eq!(g.phi[0] * g.phi[0], 0.5, max_relative = 1e-13);

        let g = solve_ground(&fam, 1.0).unwrap();
        assert_eq!(g.phi, vec![1.0, 0.0, 0.0, 0.0]);
        assert_eq!(g.x, 1.0);
    }

    #[test]
    fn grover_ground_energy_closed_form() {
        for &v in &[2usize, 5, 64, 1000] {
            let fam = HamiltonianFamily::new(make_grover_cost(v, 1.0).unwrap());
            let vf = v as f64;
            for i in 0..=20 {
                let s = i as f64 / 21.0;
                let exact = 0.5
                    * vf
                    * (1.0 - (1.0 - 4.0 * (vf - 1.0) / vf * s * (1.0 - s)).sqrt());
                let g = solve_ground(&fam, s).unwrap();
                assert!((g.lambda0 - exact).abs() <= 1e-11 * vf, "V={v} s={s}");
            }
        }
    }

    #[test]
    fn full_spectrum_examples() {
        let fam = diag0222();
        let r3 = 3f64.sqrt();
        let eig = full_spectrum(&fam, 0.5).unwrap();
        let expect = [(3.0 - r3) / 2.0, (3.0 + r3) / 2.0, 3.0, 3.0];
        for (a, b) in eig.iter().zip(expect) {
            assert_relative_eq!(*a, b, max_relative = 1e-13);
        }
        assert_relative_eq!(eig.iter().sum::<f64>(), 9.0, max_relative = 1e-13);

        let fam = random(7, 2);
        let eig = full_spectrum(&fam, 0.0).unwrap();
        assert_eq!(eig.len(), 7);
        assert!(eig[0].abs() < 1e-12);
        assert!(eig[1..].iter().all(|&e| e == 7.0));

        assert_eq!(full_spectrum(&diag0222(), 1.0).unwrap(), vec![0.0, 2.0, 2.0, 2.0]);
    }

    #[test]
    fn gap_examples() {
        let fam = random(12, 5);
        assert_relative_eq!(spectral_gap(&fam, 0.0).unwrap(), 12.0, max_relative = 1e-14);
        assert_eq!(spectral_gap(&fam, 1.0).unwrap(), fam.cost().w1());

        let fam = diag0222();
        let g = spectral_gap(&fam, 0.5).unwrap();
        assert_relative_eq!(g, 3f64.sqrt(), max_relative = 1e-14);
        assert_relative_eq!(g / 4.0, 0.433_012_701_892_219_3, max_relative = 1e-13);
        // Closed-form Grover curve at w = 0.5, V = 4.
        let (w, v, s): (f64, f64, f64) = (0.5, 4.0, 0.5);
        let curve = ((1.0 - (1.0 - w) * s).powi(2) - 4.0 * w * s * (1.0 - s) * (v - 1.0) / v).sqrt();
        assert_relative_eq!(g / 4.0, curve, max_relative = 1e-13);
    }

    #[test]
    fn dense_examples() {
        let (vals, _) = dense_eigendecomposition(&DMatrix::identity(5, 5)).unwrap();
        assert!(vals.iter().all(|&v| (v - 1.0).abs() < 1e-14));

        let lap = HamiltonianFamily::new(make_grover_cost(3, 1.0).unwrap()).dense(0.0);
        let (vals, _) = dense_eigendecomposition(&lap).unwrap();
        for (a, b) in vals.iter().zip([0.0, 3.0, 3.0]) {
            assert!((a - b).abs() < 1e-13);
        }

        let h = diag0222().dense(0.5);
        let (vals, vecs) = dense_eigendecomposition(&h).unwrap();
        let r3 = 3f64.sqrt();
        for (a, b) in vals.iter().zip([(3.0 - r3) / 2.0, (3.0 + r3) / 2.0, 3.0, 3.0]) {
            assert!((a - b).abs() < 1e-13);
        }
        for (k, lam) in vals.iter().enumerate() {
            let v = vecs.column(k);
            let resid = (&h * v - v * *lam).norm();
            assert!(resid <= 1e-9 * h.norm());
        }

        assert!(matches!(
            dense_eigendecomposition(&DMatrix::zeros(DENSE_CAP + 1, DENSE_CAP + 1)),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn secular_roots_interlace_poles() {
        let fam = random(40, 11);
        for &s in &[0.1, 0.4, 0.7, 0.95] {
            let eig = full_spectrum(&fam, s).unwrap();
            let groups = pole_groups(&fam, s);
            let poles: Vec<f64> = groups
                .iter()
                .map(|&(w, _)| (1.0 - s) * 40.0 + s * w)
                .collect();
            // Remove pole copies and check the remaining roots interlace.
            let mut roots = eig.clone();
            for (&(_, k), &d) in groups.iter().zip(&poles) {
                for _ in 1..k {
                    let i = roots.iter().position(|&e| e == d).unwrap();
                    roots.remove(i);
                }
            }
            assert_eq!(roots.len(), poles.len());
            assert!(roots[0] < poles[0]);
            for j in 1..roots.len() {
                assert!(poles[j - 1] < roots[j] && roots[j] < poles[j]);
            }
        }
    }

    #[test]
    fn ground_routes_agree() {
        for seed in 0..10 {
            let fam = random(30, seed);
            for i in 0..=16 {
                let s = i as f64 / 17.0;
                let g = solve_ground(&fam, s).unwrap();
                let (l0, l1, gap) = lowest_two(&fam, s).unwrap();
                assert!((g.lambda0 - l0).abs() <= 1e-12 * 30.0);
                assert!((l1 - l0 - gap).abs() <= 1e-11 * 30.0);
                let sum: f64 = g.phi.iter().map(|p| p * p).sum();
                assert!((sum - 1.0).abs() < 1e-14);
                assert!(g.phi.iter().all(|&p| p > 0.0));
                assert!(theta(&fam, s, g.x).unwrap().abs() < 1e-12);
            }
        }
    }

    #[test]
    fn s_min_balances_marked_amplitude() {
        let fam = diag0222();
        // phi(m)^2 = 1/2 exactly at s = 1/2 for this instance.
        assert!((locate_s_min(&fam).unwrap() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn rejects_out_of_range_s() {
        let fam = diag0222();
        assert!(solve_ground(&fam, -0.1).is_err());
        assert!(full_spectrum(&fam, 1.5).is_err());
    }
}
