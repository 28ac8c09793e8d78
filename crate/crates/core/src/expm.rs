//! Chebyshev propagator `exp(-i theta A) v` for Hermitian `A` with spectrum in `[0, 1]`.
//!
//! With `B = 2A - I` the spectrum moves to `[-1, 1]` and
//! `exp(-i z B) = J_0(z) + 2 sum_k (-i)^k J_k(z) T_k(B)`, `z = theta / 2`.

use num_complex::Complex64;

/// Coefficients below this magnitude past `k > z` end the expansion.
const COEFF_FLOOR: f64 = 1e-17;

/// `J_0(z), ..., J_K(z)` for `z >= 0`, truncated once the tail is negligible.
///
/// Miller's backward recurrence from well above `z`, normalized by
/// `J_0 + 2 sum J_{2k} = 1`.
pub(crate) fn bessel_j_sequence(z: f64) -> Vec<f64> {
    if z == 0.0 {
        return vec![1.0];
    }
    let start = (z + 12.0 * z.cbrt() + 30.0).ceil() as usize;
    let start = start + start % 2;
    let mut j = vec![0.0; start + 2];
    j[start] = 1e-300;
    for k in (1..=start).rev() {
        j[k - 1] = 2.0 * k as f64 / z * j[k] - j[k + 1];
        if j[k - 1].abs() > 1e250 {
            for v in j.iter_mut().skip(k - 1) {
                *v *= 1e-250;
            }
        }
    }
    let norm = j[0] + 2.0 * j.iter().skip(2).step_by(2).sum::<f64>();
    let mut out: Vec<f64> = j[..=start].iter().map(|v| v / norm).collect();
    let cut = (0..out.len())
        .find(|&k| k as f64 > z && out[k].abs() < COEFF_FLOOR)
        .unwrap_or(out.len());
    out.truncate(cut.max(1));
    out
}

/// Scratch buffers reused across substeps.
pub(crate) struct ChebyshevWork {
    prev: Vec<Complex64>,
    cur: Vec<Complex64>,
    next: Vec<Complex64>,
    acc: Vec<Complex64>,
}

impl ChebyshevWork {
    pub(crate) fn new(n: usize) -> Self {
        let z = Complex64::new(0.0, 0.0);
        Self {
            prev: vec![z; n],
            cur: vec![z; n],
            next: vec![z; n],
            acc: vec![z; n],
        }
    }
}

/// Overwrites `v` with `exp(-i theta A) v`; returns the number of `A` products.
///
/// `apply` writes `A x` into its second argument.
pub(crate) fn propagate<F>(apply: &mut F, theta: f64, v: &mut [Complex64], work: &mut ChebyshevWork) -> usize
where
    F: FnMut(&[Complex64], &mut [Complex64]),
{
    let z = 0.5 * theta;
    let coeffs = bessel_j_sequence(z);
    let ChebyshevWork { prev, cur, next, acc } = work;
    let n = v.len();
    // exp(-i theta A) = exp(-i z) exp(-i z B).
    let global = Complex64::from_polar(1.0, -z);
    // (-i)^k cycles through 1, -i, -1, i.
    let phase = [
        Complex64::new(1.0, 0.0),
        Complex64::new(0.0, -1.0),
        Complex64::new(-1.0, 0.0),
        Complex64::new(0.0, 1.0),
    ];
    for i in 0..n {
        acc[i] = v[i] * coeffs[0];
    }
    if coeffs.len() == 1 {
        for i in 0..n {
            v[i] = acc[i] * global;
        }
        return 0;
    }
    prev.copy_from_slice(v);
    // T_1 v = B v = 2 A v - v.
    apply(v, cur);
    let mut products = 1;
    for i in 0..n {
        cur[i] = cur[i] * 2.0 - v[i];
    }
    let c1 = phase[1] * (2.0 * coeffs[1]);
    for i in 0..n {
        acc[i] += cur[i] * c1;
    }
    for (k, &jk) in coeffs.iter().enumerate().skip(2) {
        apply(cur, next);
        products += 1;
        for i in 0..n {
            next[i] = (next[i] * 2.0 - cur[i]) * 2.0 - prev[i];
        }
        let ck = phase[k % 4] * (2.0 * jk);
        for i in 0..n {
            acc[i] += next[i] * ck;
        }
        std::mem::swap(prev, cur);
        std::mem::swap(cur, next);
    }
    for i in 0..n {
        v[i] = acc[i] * global;
    }
    products
}
