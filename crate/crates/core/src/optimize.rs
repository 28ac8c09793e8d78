//! Outer loop that guesses the spectral ratio `kappa` on a geometric ladder,
//! repeats the schedule builder at each rung and stops at the first measured
//! vertex of zero cost.

use rand::distributions::{Distribution, WeightedIndex};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::adiabatic::{generate_state, QuantumState, NORM_DRIFT_TOL};
use crate::baa::{build_schedule, SampledGapOracle};
use crate::model::{HamiltonianFamily, RunParams};
use crate::{Error, Result};

/// Whether runs are integrated and measured or only costed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum CostMode {
    Integrate,
    /// Schedules are built and timed; no state is produced, so nothing is measured.
    AnalyticCost,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct PhaseCounters {
    pub schedule_builds: usize,
    pub integrations: usize,
    pub measurements: usize,
    pub fallback_runs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OptimizeReport {
    pub found_vertex: Option<usize>,
    pub kappa_used: f64,
    /// Number of schedule-builder runs.
    pub iterations: usize,
    pub total_queries: usize,
    pub total_evolution_time: f64,
    pub wall_breakdown: PhaseCounters,
}

/// Ladder exponent step `delta = (3/2) ln(3/2) / ln V`.
pub fn ladder_delta(v: usize) -> f64 {
    1.5 * 1.5f64.ln() / (v as f64).ln()
}

/// Repetitions per rung, `ceil(ln(p V^{-1/6}) / ln((1 + 1/e) eps))`, at least one.
pub fn repetitions(v: usize, p: f64, epsilon: f64) -> usize {
    let den = ((1.0 + (-1f64).exp()) * epsilon).ln();
    if !(den < 0.0) {
        return 1;
    }
    let num = (p * (v as f64).powf(-1.0 / 6.0)).ln();
    (num / den).ceil().max(1.0) as usize
}

/// Rungs `kappa_i = 1 + V^{i delta - 1/4}` for `i = 0..=ceil(1 / (4 delta))`.
pub fn kappa_ladder(v: usize) -> Vec<f64> {
    let delta = ladder_delta(v);
    let top = (1.0 / (4.0 * delta)).ceil() as usize;
    (0..=top)
        .map(|i| 1.0 + (v as f64).powf(i as f64 * delta - 0.25))
        .collect()
}

/// First rung at or above `kappa`, if any.
pub fn covering_rung(ladder: &[f64], kappa: f64) -> Option<f64> {
    ladder.iter().copied().find(|&k| k >= kappa)
}

/// `shots` independent computational-basis outcomes drawn from `|psi(u)|^2`.
pub fn measure_state(psi: &QuantumState, shots: usize, seed: u64) -> Result<Vec<usize>> {
    let drift = (psi.norm() - 1.0).abs();
    if drift > NORM_DRIFT_TOL {
        return Err(Error::NormDrift(drift));
    }
    let dist = WeightedIndex::new(psi.probabilities()).map_err(|e| Error::Sampling(e.to_string()))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..shots).map(|_| dist.sample(&mut rng)).collect())
}

/// Independent seed for attempt `rep` at rung `rung`.
fn sub_seed(seed: u64, rung: usize, rep: usize) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((rung as u64) << 32) | rep as u64);
    rng.next_u64()
}

struct Attempt {
    queries: usize,
    time: f64,
    vertex: Option<usize>,
}

fn attempt(
    family: &HamiltonianFamily,
    params: &RunParams,
    kappa: f64,
    seed: u64,
    mode: CostMode,
    counters: &mut PhaseCounters,
) -> Result<Attempt> {
    let run_params = RunParams { seed, ..*params };
    let chi = family.cost().chi();
    let mut oracle = SampledGapOracle::new(family, &run_params, chi, kappa)?;
    let built = build_schedule(family, &mut oracle, &run_params)?;
    counters.schedule_builds += 1;
    let mut out = Attempt {
        queries: built.queries,
        time: built.schedule.total_time(),
        vertex: None,
    };
    if mode == CostMode::Integrate {
        let psi = generate_state(family, &built.schedule.checkpoints, 0.0, &run_params)?;
        counters.integrations += 1;
        // A separate stream keeps the measurement independent of the oracle samples.
        let b = measure_state(&psi, 1, seed ^ 0x9e37_79b9_7f4a_7c15)?[0];
        counters.measurements += 1;
        out.vertex = Some(b);
    }
    Ok(out)
}

/// Runs the ladder, then the worst-case fallback `kappa = lambda_max / gamma(1)`.
///
/// Only the instance's `chi` is read; its true `kappa` stays hidden.
pub fn optimize(family: &HamiltonianFamily, params: &RunParams, mode: CostMode) -> Result<OptimizeReport> {
    params.validate()?;
    let v = family.dim();
    if v < 3 {
        return Err(Error::InvalidInstance(format!("the kappa ladder needs V >= 3, got {v}")));
    }
    let reps = repetitions(v, params.p, params.epsilon);
    let mut report = OptimizeReport {
        found_vertex: None,
        kappa_used: f64::NAN,
        iterations: 0,
        total_queries: 0,
        total_evolution_time: 0.0,
        wall_breakdown: PhaseCounters::default(),
    };
    let costs = family.cost().costs();
    let ladder = kappa_ladder(v);
    let fallback = family.lambda_max() / family.cost().w1();
    let plan = ladder
        .iter()
        .enumerate()
        .map(|(i, &k)| (i, k, reps, false))
        .chain(std::iter::once((ladder.len(), fallback, 1, true)));
    for (rung, kappa, count, is_fallback) in plan {
        report.kappa_used = kappa;
        for rep in 0..count {
            let a = attempt(family, params, kappa, sub_seed(params.seed, rung, rep), mode, &mut report.wall_breakdown)?;
            report.iterations += 1;
            report.total_queries += a.queries;
            report.total_evolution_time += a.time;
            if is_fallback {
                report.wall_breakdown.fallback_runs += 1;
            }
            if let Some(b) = a.vertex.filter(|&b| costs[b] == 0.0) {
                report.found_vertex = Some(b);
                return Ok(report);
            }
        }
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn delta_example() {
        assert!((ladder_delta(4096) - 0.073_12).abs() < 1e-5);
        assert_eq!(ladder_delta(4096), 1.5 * 1.5f64.ln() / 4096f64.ln());
    }

    #[test]
    fn repetitions_example() {
        let n = repetitions(4096, 0.1, 0.2);
        let raw = (0.1 * 4096f64.powf(-1.0 / 6.0)).ln() / ((1.0 + (-1f64).exp()) * 0.2).ln();
        assert_eq!(n, raw.ceil() as usize);
        assert!(n >= 1);
        assert_eq!(repetitions(64, 0.9, 0.9), 1);
    }

    #[test]
    fn ladder_shape() {
        let l = kappa_ladder(4096);
        assert!((l[0] - 1.125).abs() < 1e-12);
        assert!(*l.last().unwrap() >= 2.0);
        assert!(l.windows(2).all(|w| w[1] > w[0]));
    }

    #[test]
    fn measure_examples() {
        let e = QuantumState::basis(5, 3);
        assert!(measure_state(&e, 100, 1).unwrap().iter().all(|&b| b == 3));

        let u = QuantumState::uniform(4);
        let draws = measure_state(&u, 100_000, 7).unwrap();
        for v in 0..4 {
            let f = draws.iter().filter(|&&b| b == v).count() as f64 / 1e5;
            assert!((f - 0.25).abs() < 0.01);
        }
        assert_eq!(measure_state(&u, 10, 3).unwrap(), measure_state(&u, 10, 3).unwrap());
    }
}
