//! The adaptive schedule builder and sublevel-set diagnostics.
//!
//! Starting from the known gap `V` of the Laplacian, each step advances by
//! `ds = min(c0 gamma / (4 lambda_max), 1 - s)` and asks a gap oracle for a
//! lower bound at the new point.

use serde::Serialize;

use crate::adiabatic::{generate_state, Checkpoint, QuantumState, Schedule};
use crate::cg_oracle::{get_gap, init_oracle, OracleState};
use crate::model::{HamiltonianFamily, RunParams};
use crate::spectrum::spectral_gap;
use crate::{Error, Result};

/// Query cap for one schedule.
pub const MAX_QUERIES: usize = 10_000_000;

/// Anything that answers `get_gap(s, ds, gamma)` with a gap estimate at `s + ds`.
pub trait GapOracle {
    fn get_gap(&mut self, s: f64, delta_s: f64, gamma: f64) -> Result<f64>;
}

/// Returns the true gap at `s + ds`.
#[derive(Debug, Clone, Copy)]
pub struct ExactGapOracle<'a> {
    family: &'a HamiltonianFamily,
}

pub fn exact_gap_oracle(family: &HamiltonianFamily) -> ExactGapOracle<'_> {
    ExactGapOracle { family }
}

impl GapOracle for ExactGapOracle<'_> {
    fn get_gap(&mut self, s: f64, delta_s: f64, _gamma: f64) -> Result<f64> {
        spectral_gap(self.family, (s + delta_s).min(1.0))
    }
}

/// The sampled complete-graph oracle bound to one instance.
#[derive(Debug, Clone)]
pub struct SampledGapOracle<'a> {
    family: &'a HamiltonianFamily,
    state: OracleState,
}

impl<'a> SampledGapOracle<'a> {
    pub fn new(family: &'a HamiltonianFamily, params: &RunParams, chi: f64, kappa: f64) -> Result<Self> {
        Ok(Self {
            family,
            state: init_oracle(family, params, chi, kappa)?,
        })
    }

    pub fn state(&self) -> &OracleState {
        &self.state
    }

    pub fn into_state(self) -> OracleState {
        self.state
    }
}

impl GapOracle for SampledGapOracle<'_> {
    fn get_gap(&mut self, s: f64, delta_s: f64, gamma: f64) -> Result<f64> {
        get_gap(&mut self.state, self.family, s, delta_s, gamma)
    }
}

/// A finished schedule and the number of oracle calls it took.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BuiltSchedule {
    pub schedule: Schedule,
    pub queries: usize,
}

/// Builds the checkpoint list without evolving; segment times included.
pub fn build_schedule<O: GapOracle + ?Sized>(
    family: &HamiltonianFamily,
    oracle: &mut O,
    params: &RunParams,
) -> Result<BuiltSchedule> {
    params.validate()?;
    let lambda_max = family.lambda_max();
    let mut s = 0.0;
    let mut gamma = family.dim() as f64;
    let mut checkpoints = vec![Checkpoint { s, gamma }];
    let mut queries = 0;
    while s < 1.0 {
        if queries >= MAX_QUERIES {
            return Err(Error::Convergence(format!(
                "schedule not finished after {MAX_QUERIES} queries, s = {s}"
            )));
        }
        let ds = (params.c0 * gamma / (4.0 * lambda_max)).min(1.0 - s);
        gamma = oracle.get_gap(s, ds, gamma)?;
        queries += 1;
        let next = if ds >= 1.0 - s { 1.0 } else { s + ds };
        if !(gamma > 0.0) || !gamma.is_finite() {
            return Err(Error::NonPositiveGap { s: next, gamma });
        }
        if next <= s {
            return Err(Error::Convergence(format!("step size underflow at s = {s}")));
        }
        s = next;
        checkpoints.push(Checkpoint { s, gamma });
    }
    let schedule = Schedule::build(checkpoints, lambda_max, params.c0, params.epsilon)?;
    Ok(BuiltSchedule { schedule, queries })
}

/// Outcome of one full run.
#[derive(Debug, Clone)]
pub struct BaaRun {
    pub schedule: Schedule,
    pub queries: usize,
    pub state: QuantumState,
}

impl BaaRun {
    /// `sqrt(1 - |<m|psi>|^2)`, the distance to the exact final projector.
    pub fn infidelity(&self, marked: usize) -> f64 {
        (1.0 - self.state.probabilities()[marked]).max(0.0).sqrt()
    }
}

/// Builds a schedule with `oracle` and evolves along it.
pub fn run_baa<O: GapOracle + ?Sized>(family: &HamiltonianFamily, oracle: &mut O, params: &RunParams) -> Result<BaaRun> {
    let built = build_schedule(family, oracle, params)?;
    let state = generate_state(family, &built.schedule.checkpoints, 0.0, params)?;
    Ok(BaaRun {
        schedule: built.schedule,
        queries: built.queries,
        state,
    })
}

/// Grid statistics of the sublevel sets `I_k = {s : Gamma(s) <= lambda_max / 2^k}`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SublevelProfile {
    pub k_values: Vec<u32>,
    pub measures: Vec<f64>,
    pub interval_counts: Vec<usize>,
    pub fitted_c: f64,
}

impl SublevelProfile {
    /// Largest interval count over all `k`.
    pub fn max_intervals(&self) -> usize {
        self.interval_counts.iter().copied().max().unwrap_or(0)
    }
}

/// Sublevel profile of `(s, Gamma)` samples on a uniform grid over `[0, 1]`.
///
/// Each sample stands for a cell of width `1 / len`.
pub fn sublevel_profile(samples: &[(f64, f64)], lambda_max: f64, k_max: u32) -> Result<SublevelProfile> {
    let need = 1usize
        .checked_shl(k_max + 2)
        .ok_or_else(|| Error::InvalidParameter(format!("k_max = {k_max} too large")))?;
    if samples.len() < need {
        return Err(Error::InvalidParameter(format!(
            "grid of {} points cannot resolve k_max = {k_max}, need {need}",
            samples.len()
        )));
    }
    if samples.windows(2).any(|w| !(w[1].0 > w[0].0)) || samples.iter().any(|p| !(0.0..=1.0).contains(&p.0)) {
        return Err(Error::InvalidParameter("grid must increase within [0, 1]".into()));
    }
    let cell = 1.0 / samples.len() as f64;
    let mut profile = SublevelProfile {
        k_values: Vec::new(),
        measures: Vec::new(),
        interval_counts: Vec::new(),
        fitted_c: 0.0,
    };
    for k in 0..=k_max {
        let level = lambda_max / 2f64.powi(k as i32);
        let mut count = 0;
        let mut runs = 0;
        let mut inside = false;
        for &(_, g) in samples {
            let hit = g <= level;
            if hit {
                count += 1;
                if !inside {
                    runs += 1;
                }
            }
            inside = hit;
        }
        let mu = count as f64 * cell;
        profile.k_values.push(k);
        profile.measures.push(mu);
        profile.interval_counts.push(runs);
        profile.fitted_c = profile.fitted_c.max(2f64.powi(k as i32) * mu);
    }
    Ok(profile)
}

/// Exact gap on a uniform grid of `points` values `s = i / (points - 1)`.
pub fn exact_gap_grid(family: &HamiltonianFamily, points: usize) -> Result<Vec<(f64, f64)>> {
    if points < 2 {
        return Err(Error::InvalidParameter("grid needs at least two points".into()));
    }
    (0..points)
        .map(|i| {
            let s = i as f64 / (points - 1) as f64;
            Ok((s, spectral_gap(family, s)?))
        })
        .collect()
}

/// `8 eps^{-1} (c0 + 7 c0^2 / 4)(8 C / c0 + 2 R)(lambda_max / Gamma_min)`.
pub fn total_time_bound(params: &RunParams, profile: &SublevelProfile, lambda_max: f64, gamma_min: f64) -> f64 {
    let c0 = params.c0;
    8.0 / params.epsilon * (c0 + 1.75 * c0 * c0) * (8.0 * profile.fitted_c / c0 + 2.0 * profile.max_intervals() as f64)
        * (lambda_max / gamma_min)
}
