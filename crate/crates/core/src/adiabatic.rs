//! Schedule-driven adiabatic evolution along piecewise-linear segments.
//!
//! Each segment `[s0, s1]` evolves under the normalized interpolation
//! `H(sigma) / lambda_max` for time `T = (c0 + 7 c0^2 / 4) lambda_max / (eps gamma_min)`,
//! where `gamma_min` is a Weyl lower bound on the gap over the segment.
//!
//! The integrator is the exponential midpoint rule: every substep freezes the
//! Hamiltonian at its midpoint and applies the exact exponential through a
//! Chebyshev expansion. Its global error is `O(h^2)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::expm::{propagate, ChebyshevWork};
use crate::model::{HamiltonianFamily, RunParams};
use crate::{Error, Result};

/// Substep cap per segment.
pub const MAX_SUBSTEPS: usize = 50_000_000;

/// Norm drift tolerated before renormalization.
pub const NORM_DRIFT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Checkpoint {
    pub s: f64,
    pub gamma: f64,
}

/// Checkpoints from `s = 0` to `s = 1` with the evolution time of every segment.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Schedule {
    pub checkpoints: Vec<Checkpoint>,
    pub times: Vec<f64>,
}

impl Schedule {
    /// Attaches segment times to `checkpoints`; rejects any segment whose gap
    /// lower bound is not positive.
    pub fn build(checkpoints: Vec<Checkpoint>, lambda_max: f64, c0: f64, epsilon: f64) -> Result<Self> {
        validate_checkpoints(&checkpoints, true)?;
        let times = gap_lower_bounds(&checkpoints, lambda_max)?
            .into_iter()
            .map(|g| segment_time(g, lambda_max, c0, epsilon))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self { checkpoints, times })
    }

    pub fn validate(&self) -> Result<()> {
        validate_checkpoints(&self.checkpoints, true)?;
        if self.times.len() + 1 != self.checkpoints.len() {
            return Err(Error::InvalidSchedule(format!(
                "{} checkpoints need {} segment times, got {}",
                self.checkpoints.len(),
                self.checkpoints.len() - 1,
                self.times.len()
            )));
        }
        if let Some(t) = self.times.iter().find(|&&t| !(t > 0.0) || !t.is_finite()) {
            return Err(Error::InvalidSchedule(format!(
                "segment times must be positive, got {t}"
            )));
        }
        Ok(())
    }

    pub fn segments(&self) -> usize {
        self.times.len()
    }

    pub fn total_time(&self) -> f64 {
        self.times.iter().sum()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let sched: Self = serde_json::from_str(text)?;
        sched.validate()?;
        Ok(sched)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("schedule serializes")
    }
}

/// Checks `s_0 = 0`, strictly increasing `s` in `[0, 1]`, positive gaps and,
/// with `require_end`, `s_last = 1`.
pub fn validate_checkpoints(checkpoints: &[Checkpoint], require_end: bool) -> Result<()> {
    let first = checkpoints
        .first()
        .ok_or_else(|| Error::InvalidSchedule("schedule has no checkpoints".into()))?;
    if checkpoints.len() < 2 {
        return Err(Error::InvalidSchedule("schedule needs at least two checkpoints".into()));
    }
    if first.s != 0.0 {
        return Err(Error::InvalidSchedule(format!("schedule starts at s = {}", first.s)));
    }
    for w in checkpoints.windows(2) {
        if !(w[1].s > w[0].s) || w[1].s > 1.0 {
            return Err(Error::InvalidSchedule(format!(
                "checkpoints must increase within [0, 1]: {} then {}",
                w[0].s, w[1].s
            )));
        }
    }
    if let Some(c) = checkpoints.iter().find(|c| !(c.gamma > 0.0) || !c.gamma.is_finite()) {
        return Err(Error::InvalidSchedule(format!(
            "checkpoint gap at s = {} must be positive, got {}",
            c.s, c.gamma
        )));
    }
    if require_end && checkpoints.last().map(|c| c.s) != Some(1.0) {
        return Err(Error::InvalidSchedule("schedule must end at s = 1".into()));
    }
    Ok(())
}

/// `(gamma - 4 ds lambda_max, gamma + 4 ds lambda_max)`.
pub fn weyl_drift_bound(gamma: f64, delta_s: f64, lambda_max: f64) -> (f64, f64) {
    let drift = 4.0 * delta_s * lambda_max;
    (gamma - drift, gamma + drift)
}

/// `(gamma0 + gamma1) / 2 - 2 (s1 - s0) lambda_max`; may be nonpositive.
pub fn segment_gap_lower_bound(gamma0: f64, gamma1: f64, s0: f64, s1: f64, lambda_max: f64) -> f64 {
    0.5 * (gamma0 + gamma1) - 2.0 * (s1 - s0) * lambda_max
}

/// `T = (c0 + 7 c0^2 / 4) lambda_max / (epsilon gamma_min)`.
pub fn segment_time(gamma_min: f64, lambda_max: f64, c0: f64, epsilon: f64) -> Result<f64> {
    if !(gamma_min > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "segment gap lower bound must be positive, got {gamma_min}"
        )));
    }
    Ok((c0 + 1.75 * c0 * c0) * lambda_max / (epsilon * gamma_min))
}

/// Segment gap lower bounds for consecutive checkpoints; errors on any `<= 0`.
pub fn gap_lower_bounds(checkpoints: &[Checkpoint], lambda_max: f64) -> Result<Vec<f64>> {
    checkpoints
        .windows(2)
        .map(|w| {
            let g = segment_gap_lower_bound(w[0].gamma, w[1].gamma, w[0].s, w[1].s, lambda_max);
            if g > 0.0 {
                Ok(g)
            } else {
                Err(Error::InvalidSchedule(format!(
                    "segment from s = {} has gap lower bound {g} <= 0",
                    w[0].s
                )))
            }
        })
        .collect()
}

/// Appends `(min(s_f + ds, 1), gamma_f - 4 ds lambda_max)` when `ds != 0` and
/// the last checkpoint is short of `s = 1`.
pub fn extend_checkpoints(checkpoints: &[Checkpoint], delta_s: f64, lambda_max: f64) -> Vec<Checkpoint> {
    let mut out = checkpoints.to_vec();
    if delta_s != 0.0 {
        if let Some(&last) = checkpoints.last() {
            if last.s < 1.0 {
                out.push(Checkpoint {
                    s: (last.s + delta_s).min(1.0),
                    gamma: weyl_drift_bound(last.gamma, delta_s, lambda_max).0,
                });
            }
        }
    }
    out
}

/// A normalized pure state on the vertices.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    amplitudes: Vec<Complex64>,
}

impl QuantumState {
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        let state = Self { amplitudes };
        let drift = (state.norm() - 1.0).abs();
        if drift > NORM_DRIFT_TOL {
            return Err(Error::NormDrift(drift));
        }
        Ok(state)
    }

    /// Ground state of `H(0)`.
    pub fn uniform(v: usize) -> Self {
        let a = 1.0 / (v as f64).sqrt();
        Self {
            amplitudes: vec![Complex64::new(a, 0.0); v],
        }
    }

    pub fn basis(v: usize, u: usize) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); v];
        amplitudes[u] = Complex64::new(1.0, 0.0);
        Self { amplitudes }
    }

    pub fn from_real(v: &[f64]) -> Result<Self> {
        Self::new(v.iter().map(|&x| Complex64::new(x, 0.0)).collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    /// `<phi|psi>` for a real vector `phi`.
    pub fn overlap_real(&self, phi: &[f64]) -> Complex64 {
        self.amplitudes.iter().zip(phi).map(|(a, &p)| a * p).sum()
    }

    /// `|| |psi><psi| - |phi><phi| ||` in operator norm, `sqrt(1 - |<phi|psi>|^2)`.
    pub fn projector_distance(&self, phi: &[f64]) -> f64 {
        let o = self.overlap_real(phi).norm_sqr();
        (1.0 - o).max(0.0).sqrt()
    }
}

/// Largest phase `T h` a single substep may accumulate.
pub const MAX_STEP_PHASE: f64 = 8.0;

/// Substep count meeting `tol` for the exponential midpoint rule.
///
/// The leading local error of one substep is `h^3 T^2 ||[A', A]|| / 12` with
/// `A = H / lambda_max`. Along a linear segment
/// `[A', A] = ds [W, L] / lambda_max^2` for every `s`, so
/// `||[A', A]|| = ds * commutator / lambda_max^2` where `commutator` is
/// [`HamiltonianFamily::commutator_norm`]. Substeps are further capped at
/// phase [`MAX_STEP_PHASE`] so higher-order terms stay subleading.
pub fn substeps_for(t: f64, delta_s: f64, commutator: f64, lambda_max: f64, tol: f64) -> Result<usize> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tolerance must be positive, got {tol}")));
    }
    let c = delta_s * commutator / (lambda_max * lambda_max);
    let n = (t * (c / (12.0 * tol)).sqrt())
        .max(t / MAX_STEP_PHASE)
        .ceil()
        .max(1.0);
    if n > MAX_SUBSTEPS as f64 {
        return Err(Error::Integrator(format!(
            "tolerance {tol:e} needs {n:e} substeps, cap is {MAX_SUBSTEPS}"
        )));
    }
    Ok(n as usize)
}

/// Evolves `psi` across `[s0, s1]` for time `t` with at most `tol` global error.
pub fn evolve_segment(
    family: &HamiltonianFamily,
    s0: f64,
    s1: f64,
    t: f64,
    psi: &QuantumState,
    tol: f64,
) -> Result<QuantumState> {
    let n = substeps_for(t, s1 - s0, family.commutator_norm(), family.lambda_max(), tol)?;
    evolve_segment_steps(family, s0, s1, t, psi, n)
}

/// [`evolve_segment`] with an explicit substep count.
pub fn evolve_segment_steps(
    family: &HamiltonianFamily,
    s0: f64,
    s1: f64,
    t: f64,
    psi: &QuantumState,
    substeps: usize,
) -> Result<QuantumState> {
    if !(0.0..=1.0).contains(&s0) || !(0.0..=1.0).contains(&s1) || s1 < s0 {
        return Err(Error::InvalidParameter(format!(
            "segment [{s0}, {s1}] must lie in [0, 1] with s0 <= s1"
        )));
    }
    if !(t >= 0.0) || !t.is_finite() {
        return Err(Error::InvalidParameter(format!("evolution time must be finite and nonnegative, got {t}")));
    }
    if psi.dim() != family.dim() {
        return Err(Error::DimensionMismatch {
            expected: family.dim(),
            got: psi.dim(),
        });
    }
    if substeps == 0 {
        return Err(Error::InvalidParameter("substep count must be positive".into()));
    }
    if t == 0.0 {
        return Ok(psi.clone());
    }
    let inv = 1.0 / family.lambda_max();
    let h = 1.0 / substeps as f64;
    let mut v = psi.amplitudes.clone();
    let mut work = ChebyshevWork::new(v.len());
    for j in 0..substeps {
        let sigma = (j as f64 + 0.5) * h;
        let s = s0 + sigma * (s1 - s0);
        let mut apply = |x: &[Complex64], y: &mut [Complex64]| {
            family.apply_into(s, x, y).expect("dimensions checked");
            for yi in y.iter_mut() {
                *yi *= inv;
            }
        };
        propagate(&mut apply, t * h, &mut v, &mut work);
    }
    let norm = v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let drift = (norm - 1.0).abs();
    if drift > NORM_DRIFT_TOL {
        return Err(Error::NormDrift(drift));
    }
    v.iter_mut().for_each(|a| *a /= norm);
    Ok(QuantumState { amplitudes: v })
}

/// Prepares the uniform state and evolves it through every segment of
/// `checkpoints`, extended by one Weyl-bounded step when `delta_s != 0`.
///
/// Times follow [`segment_time`] with the run's `c0` and `epsilon`; the
/// integrator tolerance per segment is `params.tol`.
pub fn generate_state(
    family: &HamiltonianFamily,
    checkpoints: &[Checkpoint],
    delta_s: f64,
    params: &RunParams,
) -> Result<QuantumState> {
    params.validate()?;
    let lambda_max = family.lambda_max();
    let points = extend_checkpoints(checkpoints, delta_s, lambda_max);
    validate_checkpoints(&points, false)?;
    let bounds = gap_lower_bounds(&points, lambda_max)?;
    let mut psi = QuantumState::uniform(family.dim());
    for (w, g) in points.windows(2).zip(bounds) {
        let t = segment_time(g, lambda_max, params.c0, params.epsilon)?;
        psi = evolve_segment(family, w[0].s, w[1].s, t, &psi, params.tol)?;
    }
    Ok(psi)
}

/// Evolves along a schedule with its stored segment times.
pub fn evolve_schedule(family: &HamiltonianFamily, schedule: &Schedule, tol: f64) -> Result<QuantumState> {
    schedule.validate()?;
    let mut psi = QuantumState::uniform(family.dim());
    for (w, &t) in schedule.checkpoints.windows(2).zip(&schedule.times) {
        psi = evolve_segment(family, w[0].s, w[1].s, t, &psi, tol)?;
    }
    Ok(psi)
}

/// Adiabatic deviation bound `sum_i (c0 + 7 c0^2 / 4 + c1) lambda_max / (T_i gamma_i)`.
///
/// Gaps are measured against the normalized Hamiltonian `H / lambda_max`, so
/// a segment timed by [`segment_time`] contributes exactly `epsilon`.
pub fn error_budget(times: &[f64], gap_lower_bounds: &[f64], c0: f64, c1: f64, lambda_max: f64) -> Result<f64> {
    if times.len() != gap_lower_bounds.len() {
        return Err(Error::DimensionMismatch {
            expected: times.len(),
            got: gap_lower_bounds.len(),
        });
    }
    let k = c0 + 1.75 * c0 * c0 + c1;
    times
        .iter()
        .zip(gap_lower_bounds)
        .map(|(&t, &g)| {
            if !(t > 0.0) || !(g > 0.0) {
                Err(Error::InvalidParameter(format!(
                    "budget inputs must be positive, got T = {t}, gamma = {g}"
                )))
            } else {
                Ok(k * lambda_max / (t * g))
            }
        })
        .sum()
}

/// [`error_budget`] of a schedule with `c1 = 0` and Weyl segment bounds.
pub fn schedule_error_budget(schedule: &Schedule, c0: f64, lambda_max: f64) -> Result<f64> {
    schedule.validate()?;
    let bounds = gap_lower_bounds(&schedule.checkpoints, lambda_max)?;
    error_budget(&schedule.times, &bounds, c0, 0.0, lambda_max)
}
