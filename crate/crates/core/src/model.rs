//! Problem instances: cost functions, the interpolated Hamiltonian family
//! `H(s) = (1 - s) L + s W`, and run parameters.

use std::iter::Sum;
use std::ops::{Mul, Sub};

use nalgebra::DMatrix;
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Largest vertex count accepted by the matrix-free paths.
pub const MAX_VERTICES: usize = 1 << 20;

/// Diagonal cost function `W` on the vertices of the complete graph.
///
/// Construction enforces the instance promises: exactly one zero entry (the
/// marked vertex), every other entry strictly positive, and `max W <= V`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "CostFile", into = "CostFile")]
pub struct CostFunction {
    costs: Vec<f64>,
    marked: usize,
    w1: f64,
    wmax: f64,
}

/// On-disk layout: `{"V": int, "costs": [..], "m": int}`.
#[derive(Serialize, Deserialize)]
struct CostFile {
    #[serde(rename = "V")]
    v: usize,
    costs: Vec<f64>,
    m: usize,
}

impl TryFrom<CostFile> for CostFunction {
    type Error = Error;

    fn try_from(file: CostFile) -> Result<Self> {
        if file.costs.len() != file.v {
            return Err(Error::InvalidInstance(format!(
                "V = {} but {} costs given",
                file.v,
                file.costs.len()
            )));
        }
        let cost = CostFunction::new(file.costs)?;
        if cost.marked != file.m {
            return Err(Error::InvalidInstance(format!(
                "m = {} but the zero cost sits at vertex {}",
                file.m, cost.marked
            )));
        }
        Ok(cost)
    }
}

impl From<CostFunction> for CostFile {
    fn from(cost: CostFunction) -> Self {
        CostFile {
            v: cost.costs.len(),
            m: cost.marked,
            costs: cost.costs,
        }
    }
}

impl CostFunction {
    /// Validates `costs` against the instance promises.
    pub fn new(costs: Vec<f64>) -> Result<Self> {
        let v = costs.len();
        if v < 2 {
            return Err(Error::InvalidInstance(format!("need V >= 2, got {v}")));
        }
        if v > MAX_VERTICES {
            return Err(Error::SizeCap {
                what: "V",
                got: v,
                cap: MAX_VERTICES,
            });
        }
        let vf = v as f64;
        let mut marked = None;
        let mut w1 = f64::INFINITY;
        let mut wmax = 0.0_f64;
        for (u, &w) in costs.iter().enumerate() {
            if !w.is_finite() || w < 0.0 {
                return Err(Error::InvalidInstance(format!(
                    "cost {w} at vertex {u} is not a finite non-negative number"
                )));
            }
            if w == 0.0 {
                if let Some(prev) = marked {
                    return Err(Error::InvalidInstance(format!(
                        "zero cost at both {prev} and {u}; the minimum must be unique"
                    )));
                }
                marked = Some(u);
            } else {
                w1 = w1.min(w);
                wmax = wmax.max(w);
            }
        }
        let marked = marked
            .ok_or_else(|| Error::InvalidInstance("no vertex has zero cost".into()))?;
        if wmax > vf * (1.0 + 1e-12) {
            return Err(Error::InvalidInstance(format!(
                "max cost {wmax} exceeds V = {v}"
            )));
        }
        Ok(Self {
            costs,
            marked,
            w1,
            wmax,
        })
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("cost function serializes")
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    /// The marked vertex `m`, the unique zero of `W`.
    pub fn marked(&self) -> usize {
        self.marked
    }

    /// Second-smallest cost `W_{u1}`, which is also the gap of `H(1)`.
    pub fn w1(&self) -> f64 {
        self.w1
    }

    pub fn wmax(&self) -> f64 {
        self.wmax
    }

    /// Gap fraction `chi = W_{u1} / V`.
    pub fn chi(&self) -> f64 {
        self.w1 / self.costs.len() as f64
    }

    /// Spectral ratio `kappa = W_{u_{V-1}} / W_{u1}`.
    pub fn kappa(&self) -> f64 {
        self.wmax / self.w1
    }

    /// If every unmarked vertex carries the same cost `w V`, returns `w`.
    pub fn grover_weight(&self) -> Option<f64> {
        (self.wmax == self.w1).then(|| self.w1 / self.costs.len() as f64)
    }
}

/// Grover cost function: `W_0 = 0` and `W_u = w V` otherwise.
pub fn make_grover_cost(v: usize, w: f64) -> Result<CostFunction> {
    if !(w > 0.0 && w <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "Grover weight must lie in (0, 1], got {w}"
        )));
    }
    if v < 2 {
        return Err(Error::InvalidInstance(format!("need V >= 2, got {v}")));
    }
    let mut costs = vec![w * v as f64; v];
    costs[0] = 0.0;
    CostFunction::new(costs)
}

/// Seeded random instance with `W_{u1} = chi V` and `W_{u_{V-1}} = kappa chi V`.
///
/// The marked vertex is placed uniformly at random; the remaining costs are
/// uniform on `[chi V, kappa chi V]` with both endpoints attained.
pub fn make_random_cost(v: usize, chi: f64, kappa: f64, seed: u64) -> Result<CostFunction> {
    if v < 2 {
        return Err(Error::InvalidInstance(format!("need V >= 2, got {v}")));
    }
    if !(chi > 0.0 && chi <= 1.0) {
        return Err(Error::InvalidParameter(format!(
            "chi must lie in (0, 1], got {chi}"
        )));
    }
    if !(kappa >= 1.0) || !kappa.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "kappa must be >= 1, got {kappa}"
        )));
    }
    if chi * kappa > 1.0 + 1e-12 {
        return Err(Error::InvalidParameter(format!(
            "chi * kappa = {} > 1 would break ||W|| <= V",
            chi * kappa
        )));
    }
    if v == 2 && kappa != 1.0 {
        return Err(Error::InvalidParameter(
            "V = 2 has a single unmarked vertex, so kappa must be 1".into(),
        ));
    }
    let vf = v as f64;
    let lo = chi * vf;
    let hi = (kappa * chi * vf).min(vf);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let marked = rng.gen_range(0..v);
    let mut costs: Vec<f64> = (0..v)
        .map(|u| {
            if u == marked {
                0.0
            } else if hi > lo {
                rng.gen_range(lo..=hi)
            } else {
                lo
            }
        })
        .collect();
    // Pin the extremes on two distinct unmarked vertices.
    let others: Vec<usize> = (0..v).filter(|&u| u != marked).collect();
    let picks = sample(&mut rng, others.len(), others.len().min(2));
    let picks: Vec<usize> = picks.iter().map(|i| others[i]).collect();
    costs[picks[0]] = lo;
    if let Some(&j) = picks.get(1) {
        costs[j] = hi;
    }
    CostFunction::new(costs)
}

/// The family `H(s) = (1 - s) L + s W` with `lambda_max = V >= ||H(s)||`.
#[derive(Debug, Clone, PartialEq)]
pub struct HamiltonianFamily {
    cost: CostFunction,
    lambda_max: f64,
}

impl HamiltonianFamily {
    pub fn new(cost: CostFunction) -> Self {
        let lambda_max = cost.len() as f64;
        Self { cost, lambda_max }
    }

    pub fn cost(&self) -> &CostFunction {
        &self.cost
    }

    pub fn dim(&self) -> usize {
        self.cost.len()
    }

    pub fn lambda_max(&self) -> f64 {
        self.lambda_max
    }

    /// `||[W, L]||`, equal to `sqrt(V sum W_u^2 - (sum W_u)^2)`.
    ///
    /// `[W, L] = [W, -11^T] = 1 a^T - a 1^T` with `a = W 1`, a rank-two
    /// antisymmetric matrix whose norm is `sqrt(|a|^2 |1|^2 - (a . 1)^2)`.
    pub fn commutator_norm(&self) -> f64 {
        let c = self.cost.costs();
        let sum: f64 = c.iter().sum();
        let sq: f64 = c.iter().map(|w| w * w).sum();
        (c.len() as f64 * sq - sum * sum).max(0.0).sqrt()
    }

    /// Diagonal part `(1 - s) V + s W_u` of `H(s)`.
    pub fn diagonal(&self, s: f64) -> Vec<f64> {
        let v = self.dim() as f64;
        self.cost
            .costs()
            .iter()
            .map(|&w| (1.0 - s) * v + s * w)
            .collect()
    }

    /// `out = H(s) v`, computed in `O(V)` using `L = V I - J`.
    pub fn apply_into<T>(&self, s: f64, v: &[T], out: &mut [T]) -> Result<()>
    where
        T: Copy + Mul<f64, Output = T> + Sub<Output = T> + Sum<T>,
    {
        let n = self.dim();
        if v.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: v.len(),
            });
        }
        if out.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: out.len(),
            });
        }
        let total: T = v.iter().copied().sum();
        let shift = total * (1.0 - s);
        let vf = n as f64;
        for ((o, &x), &w) in out.iter_mut().zip(v).zip(self.cost.costs()) {
            *o = x * ((1.0 - s) * vf + s * w) - shift;
        }
        Ok(())
    }

    pub fn apply<T>(&self, s: f64, v: &[T]) -> Result<Vec<T>>
    where
        T: Copy + Mul<f64, Output = T> + Sub<Output = T> + Sum<T>,
    {
        let mut out = v.to_vec();
        self.apply_into(s, v, &mut out)?;
        Ok(out)
    }

    /// Explicit `V x V` matrix of `H(s)`; only for small reference checks.
    pub fn dense(&self, s: f64) -> DMatrix<f64> {
        let n = self.dim();
        let diag = self.diagonal(s);
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                diag[i] - (1.0 - s)
            } else {
                -(1.0 - s)
            }
        })
    }
}

/// Constants shared by one run of the schedule builder and integrator.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunParams {
    /// Step-size constant `c0` in `(0, 1)`.
    pub c0: f64,
    /// Target adiabatic error.
    pub epsilon: f64,
    /// Failure probability of the sampled oracle.
    pub p: f64,
    pub seed: u64,
    /// Per-segment 2-norm tolerance of the Schrödinger integrator.
    pub tol: f64,
}

impl Default for RunParams {
    fn default() -> Self {
        Self {
            c0: 0.5,
            epsilon: 0.2,
            p: 0.1,
            seed: 0,
            tol: 1e-4,
        }
    }
}

impl RunParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.c0 > 0.0 && self.c0 < 1.0) {
            return Err(Error::InvalidParameter(format!(
                "c0 must lie in (0, 1), got {}",
                self.c0
            )));
        }
        if !(self.epsilon > 0.0) || !self.epsilon.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "epsilon must be positive, got {}",
                self.epsilon
            )));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "p must lie in (0, 1], got {}",
                self.p
            )));
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "integrator tolerance must be positive, got {}",
                self.tol
            )));
        }
        Ok(())
    }
}
