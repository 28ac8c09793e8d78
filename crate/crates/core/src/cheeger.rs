//! Weighted Cheeger ratios of the complete graph under a positive ground state.
//!
//! On the complete graph the cut sum separates:
//! `sum_{u in S, v notin S} phi(u) phi(v) = (sum_S phi)(sum_total - sum_S phi)`,
//! so every ratio costs a single pass over the subset.

use serde::Serialize;

use crate::{Error, Result};

/// Largest vertex count accepted by [`cheeger_constant_bruteforce`].
pub const BRUTEFORCE_CAP: usize = 20;

/// Which lower bound of [`gap_sandwich`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Before the avoided crossing, `gamma(G) >= h_m`.
    PreSmin,
    /// After the avoided crossing, `gamma(G) >= h_m / kappa^3`.
    PostSmin,
    /// `gamma >= sqrt(h^2 + d^2) - d` with `d = V - 1`.
    Generic,
}

/// All ratios for one cut.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CutReport {
    pub subset: Vec<usize>,
    pub g_s: f64,
    pub g_complement: f64,
    pub h_s: f64,
    pub cut_energy: f64,
}

fn check_phi(phi: &[f64]) -> Result<()> {
    if phi.len() < 2 {
        return Err(Error::InvalidParameter(
            "phi needs at least two entries".into(),
        ));
    }
    if let Some(u) = phi.iter().position(|&p| !(p > 0.0) || !p.is_finite()) {
        return Err(Error::InvalidParameter(format!(
            "phi must be strictly positive, phi[{u}] = {}",
            phi[u]
        )));
    }
    Ok(())
}

/// `(sum_S phi, sum_S phi^2, sum_total phi, sum_total phi^2)`.
fn subset_sums(phi: &[f64], subset: &[usize]) -> Result<(f64, f64, f64, f64)> {
    check_phi(phi)?;
    let n = phi.len();
    let mut member = vec![false; n];
    for &u in subset {
        if u >= n {
            return Err(Error::InvalidParameter(format!(
                "vertex {u} out of range for V = {n}"
            )));
        }
        if std::mem::replace(&mut member[u], true) {
            return Err(Error::InvalidParameter(format!("vertex {u} repeated")));
        }
    }
    if subset.is_empty() || subset.len() == n {
        return Err(Error::InvalidParameter(
            "cut subset must be nonempty and proper".into(),
        ));
    }
    let (mut a, mut a2, mut t, mut t2) = (0.0, 0.0, 0.0, 0.0);
    for (u, &p) in phi.iter().enumerate() {
        t += p;
        t2 += p * p;
        if member[u] {
            a += p;
            a2 += p * p;
        }
    }
    Ok((a, a2, t, t2))
}

fn cut_numerator(a: f64, t: f64) -> f64 {
    (a * (t - a)).max(0.0)
}

/// `g_S = sum_{u in S, v notin S} phi(u) phi(v) / sum_{u in S} phi(u)^2`.
pub fn g_ratio(phi: &[f64], subset: &[usize]) -> Result<f64> {
    let (a, a2, t, _) = subset_sums(phi, subset)?;
    Ok(cut_numerator(a, t) / a2)
}

/// `h_S = max(g_S, g_{V \ S})`.
pub fn h_ratio(phi: &[f64], subset: &[usize]) -> Result<f64> {
    Ok(cut_report(phi, subset)?.h_s)
}

/// `<phi| C_S |phi>` for the cut operator of `S`.
pub fn cut_energy(phi: &[f64], subset: &[usize]) -> Result<f64> {
    let (a, _, t, _) = subset_sums(phi, subset)?;
    Ok(cut_numerator(a, t))
}

pub fn cut_report(phi: &[f64], subset: &[usize]) -> Result<CutReport> {
    let (a, a2, t, t2) = subset_sums(phi, subset)?;
    let num = cut_numerator(a, t);
    let g_s = num / a2;
    let g_complement = num / (t2 - a2).max(f64::MIN_POSITIVE);
    let mut sorted = subset.to_vec();
    sorted.sort_unstable();
    Ok(CutReport {
        subset: sorted,
        g_s,
        g_complement,
        h_s: g_s.max(g_complement),
        cut_energy: num,
    })
}

/// `g_{m}` for the single marked vertex.
pub fn g_marked(phi: &[f64], marked: usize) -> Result<f64> {
    g_ratio(phi, &[marked])
}

/// `h_{m} = max(g_{m}, g_{V \ m})`.
pub fn h_marked(phi: &[f64], marked: usize) -> Result<f64> {
    h_ratio(phi, &[marked])
}

/// Exact Cheeger constant `h = min_S h_S` by Gray-code enumeration.
///
/// Ties within a relative `1e-12` go to the lexicographically smallest
/// sorted vertex list. The returned value is recomputed from scratch for the
/// winning subset.
pub fn cheeger_constant_bruteforce(phi: &[f64]) -> Result<(f64, Vec<usize>)> {
    check_phi(phi)?;
    let n = phi.len();
    if n > BRUTEFORCE_CAP {
        return Err(Error::SizeCap {
            what: "brute-force Cheeger vertex count",
            got: n,
            cap: BRUTEFORCE_CAP,
        });
    }
    let t: f64 = phi.iter().sum();
    let t2: f64 = phi.iter().map(|p| p * p).sum();
    let full = (1u32 << n) - 1;
    let members = |mask: u32| -> Vec<usize> { (0..n).filter(|&u| mask >> u & 1 == 1).collect() };

    let (mut a, mut a2) = (0.0, 0.0);
    let mut mask = 0u32;
    let mut best = f64::INFINITY;
    let mut best_set: Vec<usize> = Vec::new();
    for i in 1u32..(1u32 << n) {
        let bit = i.trailing_zeros() as usize;
        mask ^= 1 << bit;
        if mask >> bit & 1 == 1 {
            a += phi[bit];
            a2 += phi[bit] * phi[bit];
        } else {
            a -= phi[bit];
            a2 -= phi[bit] * phi[bit];
        }
        if mask == full {
            continue;
        }
        let num = cut_numerator(a, t);
        let h = (num / a2.max(f64::MIN_POSITIVE)).max(num / (t2 - a2).max(f64::MIN_POSITIVE));
        if h < best * (1.0 - 1e-12) {
            best = h;
            best_set = members(mask);
        } else if h <= best * (1.0 + 1e-12) {
            let cand = members(mask);
            if cand < best_set {
                best_set = cand;
            }
        }
    }
    let h = h_ratio(phi, &best_set)?;
    Ok((h, best_set))
}

/// `Phi(m) = max(phi_m / sqrt(1 - phi_m^2), sqrt(1 - phi_m^2) / phi_m)`.
pub fn phi_functional(phi_m: f64) -> Result<f64> {
    if !(phi_m > 0.0 && phi_m < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "marked amplitude must lie in (0, 1), got {phi_m}"
        )));
    }
    let c = (1.0 - phi_m * phi_m).sqrt();
    Ok((phi_m / c).max(c / phi_m))
}

/// `(lower, upper)` bounds on the gap of `G` given `h`, with `upper = 2h`.
pub fn gap_sandwich(h: f64, kappa: f64, v: usize, regime: Regime) -> Result<(f64, f64)> {
    if !(h >= 0.0) || !h.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "Cheeger ratio must be nonnegative, got {h}"
        )));
    }
    if !(kappa >= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "kappa must be at least 1, got {kappa}"
        )));
    }
    let lower = match regime {
        Regime::PreSmin => h,
        Regime::PostSmin => h / kappa.powi(3),
        Regime::Generic => {
            let d = v.saturating_sub(1) as f64;
            // sqrt(h^2 + d^2) - d without cancellation.
            if h == 0.0 {
                0.0
            } else {
                h * h / ((h * h + d * d).sqrt() + d)
            }
        }
    };
    Ok((lower, 2.0 * h))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{CostFunction, HamiltonianFamily};
    use crate::spectrum::{solve_ground, spectral_gap};
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn uniform(v: usize) -> Vec<f64> {
        vec![1.0 / (v as f64).sqrt(); v]
    }

    fn balanced_phi() -> Vec<f64> {
        let fam = HamiltonianFamily::new(CostFunction::new(vec![0.0, 2.0, 2.0, 2.0]).unwrap());
        solve_ground(&fam, 0.5).unwrap().phi
    }

    #[test]
    fn g_ratio_examples() {
        for v in [2, 5, 16] {
            assert_relative_eq!(g_ratio(&uniform(v), &[0]).unwrap(), v as f64 - 1.0, max_relative = 1e-14);
        }
        let half: Vec<usize> = (0..8).collect();
        assert_relative_eq!(g_ratio(&uniform(16), &half).unwrap(), 8.0, max_relative = 1e-14);
        assert_relative_eq!(g_ratio(&balanced_phi(), &[0]).unwrap(), 3f64.sqrt(), max_relative = 1e-12);
    }

    #[test]
    fn h_ratio_examples() {
        assert_relative_eq!(h_ratio(&uniform(4), &[0]).unwrap(), 3.0, max_relative = 1e-14);
        let r = cut_report(&balanced_phi(), &[0]).unwrap();
        assert_relative_eq!(r.h_s, 3f64.sqrt(), max_relative = 1e-12);
        assert_relative_eq!(r.g_s, r.g_complement, max_relative = 1e-12);
        let phi = vec![0.1, 0.5, 0.3, 0.7, 0.2];
        assert_relative_eq!(h_ratio(&phi, &[1, 3]).unwrap(), h_ratio(&phi, &[0, 2, 4]).unwrap(), max_relative = 1e-14);
    }

    #[test]
    fn ratio_errors() {
        let phi = uniform(4);
        assert!(g_ratio(&phi, &[]).is_err());
        assert!(g_ratio(&phi, &[0, 1, 2, 3]).is_err());
        assert!(g_ratio(&phi, &[4]).is_err());
        assert!(g_ratio(&phi, &[1, 1]).is_err());
        assert!(g_ratio(&[0.5, 0.0, 0.5], &[0]).is_err());
    }

    #[test]
    fn bruteforce_examples() {
        let (h, set) = cheeger_constant_bruteforce(&uniform(4)).unwrap();
        assert_relative_eq!(h, 2.0, max_relative = 1e-14);
        assert_eq!(set, vec![0, 1]);

        let phi = vec![0.6, 0.8];
        let (h, set) = cheeger_constant_bruteforce(&phi).unwrap();
        assert_eq!(set, vec![0]);
        assert_relative_eq!(h, h_ratio(&phi, &[0]).unwrap(), max_relative = 1e-15);

        // The cut {m} and its complement share h; the complement sorts first.
        let costs: Vec<f64> = (0..8).map(|u| if u == 3 { 0.0 } else { 6.0 }).collect();
        let fam = HamiltonianFamily::new(CostFunction::new(costs).unwrap());
        let phi = solve_ground(&fam, 0.98).unwrap().phi;
        let (_, set) = cheeger_constant_bruteforce(&phi).unwrap();
        assert_eq!(set, vec![0, 1, 2, 4, 5, 6, 7]);

        assert!(matches!(
            cheeger_constant_bruteforce(&uniform(21)),
            Err(Error::SizeCap { .. })
        ));
    }

    #[test]
    fn bruteforce_matches_naive_enumeration() {
        let phi: Vec<f64> = (0..9).map(|u| 0.2 + ((u * 7) % 5) as f64 * 0.13).collect();
        let (h, _) = cheeger_constant_bruteforce(&phi).unwrap();
        let mut naive = f64::INFINITY;
        for mask in 1u32..(1 << 9) - 1 {
            let s: Vec<usize> = (0..9).filter(|&u| mask >> u & 1 == 1).collect();
            let mut num = 0.0;
            for &u in &s {
                for v in (0..9).filter(|v| !s.contains(v)) {
                    num += phi[u] * phi[v];
                }
            }
            let a2: f64 = s.iter().map(|&u| phi[u] * phi[u]).sum();
            let b2: f64 = (0..9).filter(|v| !s.contains(v)).map(|v| phi[v] * phi[v]).sum();
            naive = naive.min((num / a2).max(num / b2));
        }
        assert_relative_eq!(h, naive, max_relative = 1e-12);
    }

    #[test]
    fn phi_functional_examples() {
        assert_relative_eq!(phi_functional(0.5f64.sqrt()).unwrap(), 1.0, max_relative = 1e-15);
        assert_relative_eq!(phi_functional(0.5).unwrap(), 3f64.sqrt(), max_relative = 1e-15);
        assert_relative_eq!(phi_functional(0.9).unwrap(), 0.9 / 0.19f64.sqrt(), max_relative = 1e-12);
        assert!(phi_functional(0.0).is_err());
        assert!(phi_functional(1.0).is_err());
    }

    #[test]
    fn sandwich_examples() {
        let (lo, hi) = gap_sandwich(3.0, 1.0, 4, Regime::Generic).unwrap();
        assert_relative_eq!(lo, 18f64.sqrt() - 3.0, max_relative = 1e-14);
        assert_eq!(hi, 6.0);
        let fam = HamiltonianFamily::new(CostFunction::new(vec![0.0, 2.0, 2.0, 2.0]).unwrap());
        let gamma0 = spectral_gap(&fam, 0.0).unwrap();
        assert!(lo <= gamma0 && gamma0 <= hi);

        let r3 = 3f64.sqrt();
        let (lo, hi) = gap_sandwich(r3, 1.0, 4, Regime::PostSmin).unwrap();
        assert_eq!((lo, hi), (r3, 2.0 * r3));
        let gamma_g = spectral_gap(&fam, 0.5).unwrap() / 0.5;
        assert!(lo <= gamma_g && gamma_g <= hi * (1.0 + 1e-12));

        for regime in [Regime::PreSmin, Regime::PostSmin, Regime::Generic] {
            assert_eq!(gap_sandwich(0.0, 2.0, 9, regime).unwrap(), (0.0, 0.0));
        }
        assert!(gap_sandwich(-1.0, 1.0, 4, Regime::Generic).is_err());
    }

    #[test]
    fn cut_energy_examples() {
        assert_relative_eq!(cut_energy(&uniform(4), &[0]).unwrap(), 0.75, max_relative = 1e-14);
        assert_relative_eq!(cut_energy(&balanced_phi(), &[0]).unwrap(), 3f64.sqrt() / 2.0, max_relative = 1e-12);
    }

    proptest! {
        #[test]
        fn report_invariants(raw in proptest::collection::vec(0.01f64..1.0, 2..30), bits in any::<u64>()) {
            let norm = raw.iter().map(|p| p * p).sum::<f64>().sqrt();
            let phi: Vec<f64> = raw.iter().map(|p| p / norm).collect();
            let n = phi.len();
            let mut subset: Vec<usize> = (0..n).filter(|&u| bits >> (u % 64) & 1 == 1).collect();
            if subset.is_empty() { subset.push(0); }
            if subset.len() == n { subset.pop(); }
            let r = cut_report(&phi, &subset).unwrap();
            prop_assert!(r.h_s >= r.g_s && r.h_s >= r.g_complement && r.g_s >= 0.0 && r.g_complement >= 0.0);
            let a2: f64 = subset.iter().map(|&u| phi[u] * phi[u]).sum();
            prop_assert!((r.g_s * a2 - r.g_complement * (1.0 - a2)).abs() <= 1e-12 * r.cut_energy.max(1.0));
            prop_assert!((r.g_s * a2 - r.cut_energy).abs() <= 1e-14 * r.cut_energy.max(1.0));
        }
    }
}
