//! Sampled gap oracle for the complete graph.
//!
//! Before the avoided crossing the oracle tracks `X(s)` through the root of a
//! sampled secular function `theta_tilde` and converts it to a gap lower
//! bound. Once the root leaves the region where sampling is reliable it
//! certifies an upper bound `S_min` on the crossing and finishes the schedule
//! from analytic bounds alone.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::model::{HamiltonianFamily, RunParams};
use crate::spectrum::tau;
use crate::{Error, Result};

/// Consecutive zero-cost draws tolerated before sampling gives up.
pub const MAX_REJECTIONS: usize = 1_000_000;

/// Largest sample budget accepted.
pub const MAX_SAMPLES: usize = 100_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Branch {
    Root,
    Cutoff,
    Envelope,
}

/// One oracle call.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TraceRecord {
    pub s: f64,
    pub ds: f64,
    pub branch: Branch,
    /// New root estimate, `0` off the root branch.
    pub x0: f64,
    pub gamma: f64,
}

#[derive(Debug, Clone)]
pub struct OracleState {
    samples: Vec<f64>,
    /// Distinct sample values with counts, built once the budget is filled.
    histogram: Vec<(f64, usize)>,
    n: usize,
    x_min: f64,
    s_min: f64,
    c0: f64,
    p: f64,
    chi: f64,
    kappa: f64,
    rng: ChaCha8Rng,
    trace: Vec<TraceRecord>,
}

/// `x_min = max([(kappa - 1)(V - 1)]^(2/3) / kappa^3, 2 (1 + c0) sqrt V)`.
pub fn x_min_for(v: usize, kappa: f64, c0: f64) -> f64 {
    let vf = v as f64;
    let a = ((kappa - 1.0) * (vf - 1.0)).powf(2.0 / 3.0) / kappa.powi(3);
    a.max(2.0 * (1.0 + c0) * vf.sqrt())
}

/// Sample budget `n` for the given cutoff; `1` when `kappa = 1`.
pub fn sample_budget(v: usize, kappa: f64, c0: f64, p: f64, x_min: f64) -> f64 {
    let vf = v as f64;
    let r = (1.0 + c0) / (1.0 - c0);
    let raw = r * r * 5.0 * (vf - 1.0).powi(2) * (kappa - 1.0).powi(2) / (8.0 * c0 * c0 * x_min * x_min)
        * (2.0 / p).ln();
    raw.ceil().max(1.0)
}

/// Fixed bisection count `ceil(log2[(19 / c0)(((1 + c0)/(1 - c0))^3 - 1)])`.
pub fn bisection_steps(c0: f64) -> usize {
    let r = (1.0 + c0) / (1.0 - c0);
    ((19.0 / c0) * (r.powi(3) - 1.0)).log2().ceil().max(1.0) as usize
}

pub fn init_oracle(family: &HamiltonianFamily, params: &RunParams, chi: f64, kappa: f64) -> Result<OracleState> {
    params.validate()?;
    let v = family.dim();
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!("kappa must be at least 1, got {kappa}")));
    }
    if !(chi > 0.0) || chi * v as f64 > family.cost().w1() * (1.0 + 1e-12) {
        return Err(Error::InvalidParameter(format!(
            "chi = {chi} violates 0 < chi V <= W_u1 = {}",
            family.cost().w1()
        )));
    }
    let x_min = x_min_for(v, kappa, params.c0);
    let n = sample_budget(v, kappa, params.c0, params.p, x_min);
    if n > MAX_SAMPLES as f64 {
        return Err(Error::SizeCap {
            what: "oracle sample budget",
            got: n.min(usize::MAX as f64) as usize,
            cap: MAX_SAMPLES,
        });
    }
    Ok(OracleState {
        samples: Vec::new(),
        histogram: Vec::new(),
        n: n as usize,
        x_min,
        s_min: 0.0,
        c0: params.c0,
        p: params.p,
        chi,
        kappa,
        rng: ChaCha8Rng::seed_from_u64(params.seed),
        trace: Vec::new(),
    })
}

impl OracleState {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    /// `0` until the cutoff fires.
    pub fn s_min(&self) -> f64 {
        self.s_min
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn trace(&self) -> &[TraceRecord] {
        &self.trace
    }

    /// Writes the trace as one JSON object per line.
    pub fn trace_jsonl(&self) -> String {
        self.trace
            .iter()
            .map(|r| serde_json::to_string(r).expect("trace serializes") + "\n")
            .collect()
    }

    fn fill(&mut self, family: &HamiltonianFamily) -> Result<()> {
        let costs = family.cost().costs();
        while self.samples.len() < self.n {
            let mut rejected = 0;
            loop {
                let w = costs[self.rng.gen_range(0..costs.len())];
                if w != 0.0 {
                    self.samples.push(w);
                    break;
                }
                rejected += 1;
                if rejected >= MAX_REJECTIONS {
                    return Err(Error::Sampling(format!(
                        "{MAX_REJECTIONS} consecutive zero-cost draws"
                    )));
                }
            }
        }
        if self.histogram.is_empty() {
            let mut sorted = self.samples.clone();
            sorted.sort_by(f64::total_cmp);
            for w in sorted {
                match self.histogram.last_mut() {
                    Some((val, k)) if *val == w => *k += 1,
                    _ => self.histogram.push((w, 1)),
                }
            }
        }
        Ok(())
    }

    /// Moves `S_min` up to `value`; never lowers it.
    fn raise_s_min(&mut self, value: f64) {
        self.s_min = self.s_min.max(value);
    }
}

/// `((V - 1)/n) sum_i (tau W_i + x)^{-1} + 1/x - 1`, filling the samples on first use.
pub fn theta_tilde(state: &mut OracleState, family: &HamiltonianFamily, s: f64, x: f64) -> Result<f64> {
    if !(x > 0.0) {
        return Err(Error::Pole(x));
    }
    if !(0.0..=1.0).contains(&s) {
        return Err(Error::InvalidParameter(format!("s must lie in [0, 1], got {s}")));
    }
    state.fill(family)?;
    let t = tau(s);
    let sum: f64 = state
        .histogram
        .iter()
        .map(|&(w, k)| k as f64 / (t * w + x))
        .sum();
    Ok((family.dim() as f64 - 1.0) / state.n as f64 * sum + 1.0 / x - 1.0)
}

/// Certified upper bound on the crossing recorded when the cutoff fires.
///
/// The raw bound `s + 4 (1 - s) x_min / ((1 - c0)^2 chi V)` reaches `1` on
/// small instances; it is capped by `1 - chi / 5`, which also bounds the
/// crossing from above.
pub fn s_min_bound(s: f64, x_min: f64, c0: f64, chi: f64, v: usize) -> f64 {
    let raw = s + 4.0 * (1.0 - s) * x_min / ((1.0 - c0).powi(2) * chi * v as f64);
    raw.min(1.0 - chi / 5.0)
}

/// Next root estimate at `s + delta_s`, or `0` after setting `S_min`.
pub fn find_root(state: &mut OracleState, family: &HamiltonianFamily, s: f64, delta_s: f64, x0: f64) -> Result<f64> {
    let next = s + delta_s;
    if x0 <= state.x_min || theta_tilde(state, family, next, state.x_min)? < 0.0 {
        let bound = s_min_bound(s, state.x_min, state.c0, state.chi, family.dim());
        state.raise_s_min(bound);
        return Ok(0.0);
    }
    let c0 = state.c0;
    let mut lo = (1.0 - c0).powi(2) / (1.0 + c0) * x0;
    let mut hi = (1.0 + c0).powi(2) / (1.0 - c0) * x0;
    for _ in 0..bisection_steps(c0) {
        let mid = 0.5 * (lo + hi);
        if theta_tilde(state, family, next, mid)? > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Analytic gap bounds once `S_min` is known.
pub fn finish_schedule(state: &OracleState, family: &HamiltonianFamily, s: f64, delta_s: f64, gamma: f64) -> f64 {
    let vf = family.dim() as f64;
    let k = state.kappa;
    if s <= state.s_min {
        ((1.0 - state.c0) * gamma).max((1.0 - s - delta_s) * (vf - 1.0).sqrt() / k.powi(4))
    } else {
        state.chi * (vf - 2.0) / (4.0 * k.powi(5)) * (s + delta_s - state.s_min)
            + (vf - 2.0) / (2.0 * k.powi(4) * (vf - 1.0).sqrt()) * (1.0 - state.s_min)
    }
}

/// One oracle query: a lower bound on the gap at `s + delta_s` given the
/// previous answer `gamma`.
pub fn get_gap(state: &mut OracleState, family: &HamiltonianFamily, s: f64, delta_s: f64, gamma: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&s) || !(delta_s >= 0.0) || s + delta_s > 1.0 {
        return Err(Error::InvalidParameter(format!(
            "oracle step from s = {s} by {delta_s} leaves [0, 1]"
        )));
    }
    if state.s_min > 0.0 {
        let g = finish_schedule(state, family, s, delta_s, gamma);
        state.trace.push(TraceRecord { s, ds: delta_s, branch: Branch::Envelope, x0: 0.0, gamma: g });
        return Ok(g);
    }
    let x0 = if s == 0.0 {
        family.dim() as f64
    } else {
        (1.0 + state.c0) * (gamma / (1.0 - s) + 1.0)
    };
    let x1 = find_root(state, family, s, delta_s, x0)?;
    if x1 == 0.0 {
        let g = finish_schedule(state, family, s, delta_s, gamma);
        state.trace.push(TraceRecord { s, ds: delta_s, branch: Branch::Cutoff, x0: 0.0, gamma: g });
        return Ok(g);
    }
    let g = (1.0 - s - delta_s) * (x1 / (1.0 + state.c0) - 1.0);
    state.trace.push(TraceRecord { s, ds: delta_s, branch: Branch::Root, x0: x1, gamma: g });
    Ok(g)
}
