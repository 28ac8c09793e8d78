use std::path::Path;

use baa_core::adiabatic::{evolve_schedule, schedule_error_budget, Schedule};
use baa_core::baa::{build_schedule, exact_gap_oracle, run_baa, BaaRun, SampledGapOracle};
use baa_core::cg_oracle::Branch;
use baa_core::cheeger::{cheeger_constant_bruteforce, g_marked, gap_sandwich, h_marked, Regime};
use baa_core::model::{make_grover_cost, make_random_cost};
use baa_core::optimize::{optimize, CostMode};
use baa_core::spectrum::{solve_ground, spectral_gap, spectral_point};
use baa_core::{HamiltonianFamily, RunParams};
use rayon::prelude::*;
use serde::Serialize;

use crate::output::{config_hash, num, write_bytes, write_json, Table};
use crate::{
    load_instance, BaaRunArgs, CheegerArgs, Cli, CliError, Command, EvolveArgs, GapProfileArgs, InstanceKind,
    OptimizeArgs, OracleKind, ScalingArgs, SpectrumArgs,
};

/// Relative slack when comparing a computed gap against its bounds.
const AUDIT_SLACK: f64 = 1e-9;

pub fn run(cli: &Cli) -> Result<(), CliError> {
    let out = cli.global.out.as_deref();
    let seed = cli.global.seed;
    match &cli.command {
        Command::Spectrum(a) => spectrum(cli, a, out, seed),
        Command::GapProfile(a) => gap_profile(cli, a, out, seed),
        Command::CheegerAudit(a) => cheeger_audit(cli, a, out, seed),
        Command::BaaRun(a) => baa_run(a, out, seed),
        Command::Evolve(a) => evolve(a, out, seed),
        Command::OptimizeRun(a) => optimize_run(a, out, seed),
        Command::ScalingStudy(a) => scaling_study(cli, a, out, seed),
    }
}

/// `n` evenly spaced points over `[0, 1]`.
fn grid(n: u64) -> impl Iterator<Item = f64> {
    (0..n).map(move |i| i as f64 / (n - 1) as f64)
}

fn spectrum(cli: &Cli, a: &SpectrumArgs, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let (cost, bytes) = load_instance(&a.instance, seed)?;
    let m = cost.marked();
    let fam = HamiltonianFamily::new(cost);
    let mut table = Table::new(vec!["s", "lambda0", "lambda1", "gap", "X", "phi_m"]);
    for s in grid(a.s_grid) {
        let p = spectral_point(&fam, s)?;
        table.push(vec![num(s), num(p.lambda0), num(p.lambda1), num(p.gap), num(p.x), num(p.phi[m])]);
    }
    write_bytes(out, &table.render("spectrum", &config_hash(cli, bytes.as_deref())))
}

/// `sqrt((1 - (1 - w) s)^2 - 4 w s (1 - s)(V - 1) / V)`, the normalized Grover gap.
pub fn grover_gap_over_v(v: usize, w: f64, s: f64) -> f64 {
    let vf = v as f64;
    let a = 1.0 - (1.0 - w) * s;
    (a * a - 4.0 * w * s * (1.0 - s) * (vf - 1.0) / vf).max(0.0).sqrt()
}

fn gap_profile(cli: &Cli, a: &GapProfileArgs, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let (cost, bytes) = load_instance(&a.instance, seed)?;
    let weight = cost.grover_weight();
    let fam = HamiltonianFamily::new(cost);
    let v = fam.dim();
    let mut header = vec!["s", "gamma", "gamma_over_v"];
    if weight.is_some() {
        header.push("closed_form");
    }
    let mut table = Table::new(header);
    for s in grid(a.grid) {
        let g = spectral_gap(&fam, s)?;
        let mut row = vec![num(s), num(g), num(g / v as f64)];
        if let Some(w) = weight {
            row.push(num(grover_gap_over_v(v, w, s)));
        }
        table.push(row);
    }
    write_bytes(out, &table.render("gap-profile", &config_hash(cli, bytes.as_deref())))
}

fn cheeger_audit(cli: &Cli, a: &CheegerArgs, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let (cost, bytes) = load_instance(&a.instance, seed)?;
    let m = cost.marked();
    let kappa = cost.kappa();
    let fam = HamiltonianFamily::new(cost);
    let v = fam.dim();
    let mut header = vec!["s", "g_m", "h_m", "gap", "lower", "upper"];
    if a.bruteforce {
        header.extend(["h", "generic_lower", "generic_upper"]);
    }
    header.push("violated");
    let mut table = Table::new(header);
    let mut violations = 0;
    for i in 0..a.grid {
        let s = i as f64 / a.grid as f64;
        let phi = solve_ground(&fam, s)?.phi;
        // Gap of G(s) = H(s) / (1 - s).
        let gap = spectral_gap(&fam, s)? / (1.0 - s);
        let g = g_marked(&phi, m)?;
        let h = h_marked(&phi, m)?;
        let (post, upper) = gap_sandwich(h, kappa, v, Regime::PostSmin)?;
        let lower = post.max(g);
        let mut bad = gap > upper * (1.0 + AUDIT_SLACK) || gap < lower * (1.0 - AUDIT_SLACK);
        let mut row = vec![num(s), num(g), num(h), num(gap), num(lower), num(upper)];
        if a.bruteforce {
            let (hb, _) = cheeger_constant_bruteforce(&phi)?;
            let (lo, hi) = gap_sandwich(hb, kappa, v, Regime::Generic)?;
            bad |= gap > hi * (1.0 + AUDIT_SLACK) || gap < lo * (1.0 - AUDIT_SLACK);
            row.extend([num(hb), num(lo), num(hi)]);
        }
        violations += bad as usize;
        row.push(bad.to_string());
        table.push(row);
    }
    write_bytes(out, &table.render("cheeger-audit", &config_hash(cli, bytes.as_deref())))?;
    if a.audit && violations > 0 {
        return Err(CliError::Audit(format!("{violations} of {} grid points violate the sandwich", a.grid)));
    }
    Ok(())
}

#[derive(Serialize)]
struct BaaReport {
    oracle: OracleKind,
    v: usize,
    marked: usize,
    queries: usize,
    total_time: f64,
    segments: usize,
    fidelity: f64,
    infidelity: f64,
    error_budget: f64,
    sample_budget: Option<usize>,
    s_min_bound: Option<f64>,
    schedule: Schedule,
}

fn baa_run(a: &BaaRunArgs, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let (cost, _) = load_instance(&a.instance, seed)?;
    let fam = HamiltonianFamily::new(cost);
    let params = a.run.params(seed);
    let (run, oracle_state): (BaaRun, _) = match a.oracle {
        OracleKind::Exact => (run_baa(&fam, &mut exact_gap_oracle(&fam), &params)?, None),
        OracleKind::Sampled => {
            let mut oracle = SampledGapOracle::new(&fam, &params, fam.cost().chi(), fam.cost().kappa())?;
            let run = run_baa(&fam, &mut oracle, &params)?;
            (run, Some(oracle.into_state()))
        }
    };
    if let Some(path) = &a.trace {
        let text = oracle_state.as_ref().map(|s| s.trace_jsonl()).unwrap_or_default();
        write_bytes(Some(path), text.as_bytes())?;
    }
    if let Some(path) = &a.schedule_out {
        write_bytes(Some(path), format!("{}\n", run.schedule.to_json()).as_bytes())?;
    }
    let m = fam.cost().marked();
    let infidelity = run.infidelity(m);
    let report = BaaReport {
        oracle: a.oracle,
        v: fam.dim(),
        marked: m,
        queries: run.queries,
        total_time: run.schedule.total_time(),
        segments: run.schedule.segments(),
        fidelity: run.state.probabilities()[m],
        infidelity,
        error_budget: schedule_error_budget(&run.schedule, params.c0, fam.lambda_max())?,
        sample_budget: oracle_state.as_ref().map(|s| s.n()),
        s_min_bound: oracle_state.as_ref().map(|s| s.s_min()),
        schedule: run.schedule,
    };
    write_json(out, &report)
}

#[derive(Serialize)]
struct EvolveReport {
    v: usize,
    marked: usize,
    segments: usize,
    total_time: f64,
    fidelity: f64,
    infidelity: f64,
    epsilon: f64,
    error_budget: f64,
}

fn evolve(a: &EvolveArgs, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let (cost, _) = load_instance(&a.instance, seed)?;
    let fam = HamiltonianFamily::new(cost);
    let params = a.run.params(seed);
    params.validate()?;
    let text = std::fs::read_to_string(&a.schedule).map_err(|e| CliError::Io(a.schedule.clone(), e))?;
    let schedule = Schedule::from_json(&text)?;
    let psi = evolve_schedule(&fam, &schedule, params.tol)?;
    let m = fam.cost().marked();
    let fidelity = psi.probabilities()[m];
    let report = EvolveReport {
        v: fam.dim(),
        marked: m,
        segments: schedule.segments(),
        total_time: schedule.total_time(),
        fidelity,
        infidelity: (1.0 - fidelity).max(0.0).sqrt(),
        epsilon: params.epsilon,
        error_budget: schedule_error_budget(&schedule, params.c0, fam.lambda_max())?,
    };
    write_json(out, &report)
}

fn optimize_run(a: &OptimizeArgs, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let (cost, _) = load_instance(&a.instance, seed)?;
    let fam = HamiltonianFamily::new(cost);
    let mode = if a.analytic_cost {
        CostMode::AnalyticCost
    } else {
        CostMode::Integrate
    };
    let report = optimize(&fam, &a.run.params(seed), mode)?;
    write_json(out, &report)
}

struct ScalingRow {
    v: usize,
    seed: u64,
    queries: usize,
    total_time: f64,
    envelope_steps: usize,
    sample_budget: usize,
}

fn scaling_row(a: &ScalingArgs, v: usize, seed: u64) -> Result<ScalingRow, CliError> {
    let cost = match a.class {
        InstanceKind::Grover => make_grover_cost(v, a.weight)?,
        InstanceKind::Random => make_random_cost(v, a.chi, a.kappa, seed)?,
    };
    let fam = HamiltonianFamily::new(cost);
    let params: RunParams = a.run.params(seed);
    let mut row = ScalingRow {
        v,
        seed,
        queries: 0,
        total_time: 0.0,
        envelope_steps: 0,
        sample_budget: 0,
    };
    let built = match a.oracle {
        OracleKind::Exact => build_schedule(&fam, &mut exact_gap_oracle(&fam), &params)?,
        OracleKind::Sampled => {
            let mut oracle = SampledGapOracle::new(&fam, &params, fam.cost().chi(), fam.cost().kappa())?;
            let built = build_schedule(&fam, &mut oracle, &params)?;
            let state = oracle.into_state();
            row.envelope_steps = state.trace().iter().filter(|r| r.branch != Branch::Root).count();
            row.sample_budget = state.n();
            built
        }
    };
    row.queries = built.queries;
    row.total_time = built.schedule.total_time();
    Ok(row)
}

/// Least-squares slope of `y` against `x`.
fn slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

fn scaling_study(cli: &Cli, a: &ScalingArgs, out: Option<&Path>, seed: u64) -> Result<(), CliError> {
    let mut sizes = a.sizes.clone();
    sizes.sort_unstable();
    sizes.dedup();
    let jobs: Vec<(usize, u64)> = sizes
        .iter()
        .flat_map(|&v| (0..a.seeds).map(move |k| (v, seed + k)))
        .collect();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.global.threads as usize)
        .build()
        .map_err(|e| CliError::Usage(e.to_string()))?;
    let rows: Vec<ScalingRow> = pool.install(|| {
        jobs.par_iter()
            .map(|&(v, s)| scaling_row(a, v, s))
            .collect::<Result<_, _>>()
    })?;
    let mut table = Table::new(vec!["v", "seed", "queries", "total_time", "envelope_steps", "sample_budget"]);
    for r in &rows {
        table.push(vec![
            r.v.to_string(),
            r.seed.to_string(),
            r.queries.to_string(),
            num(r.total_time),
            r.envelope_steps.to_string(),
            r.sample_budget.to_string(),
        ]);
    }
    let mut log_v = Vec::new();
    let mut log_t = Vec::new();
    let mut per_log = Vec::new();
    for &v in &sizes {
        let group: Vec<&ScalingRow> = rows.iter().filter(|r| r.v == v).collect();
        let n = group.len() as f64;
        let mean_t = group.iter().map(|r| r.total_time).sum::<f64>() / n;
        let mean_q = group.iter().map(|r| r.queries as f64).sum::<f64>() / n;
        log_v.push((v as f64).ln());
        log_t.push(mean_t.ln());
        per_log.push(mean_q / (v as f64).log2());
    }
    if sizes.len() >= 2 {
        table.comment(format!("fit total_time_loglog_slope={}", num(slope(&log_v, &log_t))));
        let log2_v: Vec<f64> = sizes.iter().map(|&v| (v as f64).log2()).collect();
        table.comment(format!("fit queries_per_log2v_slope={}", num(slope(&log2_v, &per_log))));
        let joined: Vec<String> = per_log.iter().map(|&r| num(r)).collect();
        table.comment(format!("fit queries_per_log2v={}", joined.join(";")));
    }
    write_bytes(out, &table.render("scaling-study", &config_hash(cli, None)))
}
