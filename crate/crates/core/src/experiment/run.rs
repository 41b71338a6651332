//! Sweep execution over `(δ, seed)` cells.

use std::time::Instant;

use crate::error::Result;
use crate::landweber::{auto_stepsize, run_paired, IterationConfig, PairedTrace};
use crate::noise::add_noise_stream;
use crate::operator::NonlinearProblem;
use crate::par;
use crate::problems::problem_by_name;
use crate::rules::{decide, k_opt_oracle, Rule};

use super::config::{ExperimentConfig, NoiseStreams, OmegaMode};

/// One `(problem, δ, seed, rule)` outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub problem: String,
    pub delta_rel: f64,
    pub delta_abs: f64,
    pub seed: u64,
    pub rule: Rule,
    pub k_star: Option<usize>,
    pub boundary_hit: bool,
    pub abs_error: Option<f64>,
    /// `abs_error / ‖x_{k_opt} − x†‖`
    pub error_ratio: Option<f64>,
    /// `k_star / k_opt`; absent when `k_opt = 0`.
    pub k_ratio: Option<f64>,
    pub wall_time_ms: Option<f64>,
}

impl ReportRow {
    pub fn attained(&self) -> bool {
        self.k_star.is_some()
    }
}

/// A completed Landweber run for one sweep cell.
#[derive(Debug, Clone)]
pub struct CellRun {
    pub delta_index: usize,
    pub delta_rel: f64,
    pub delta_abs: f64,
    pub seed: u64,
    pub omega: f64,
    pub tau: f64,
    pub trace: PairedTrace,
    pub wall_time_ms: f64,
}

/// A failed sweep cell.
#[derive(Debug, Clone, PartialEq)]
pub struct CellFailure {
    pub delta_rel: f64,
    pub seed: u64,
    pub message: String,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct ExperimentReport {
    /// Ordered by δ as configured, then seed, then rule.
    pub rows: Vec<ReportRow>,
    pub failures: Vec<CellFailure>,
}

fn stepsize(p: &dyn NonlinearProblem, cfg: &ExperimentConfig) -> Result<f64> {
    let b = p.benchmark();
    match cfg.omega {
        OmegaMode::AutoAtDagger => auto_stepsize(p, &b.x_dagger, cfg.omega_safety),
        OmegaMode::AutoAtX0 => auto_stepsize(p, &b.x0, cfg.omega_safety),
        OmegaMode::Fixed(w) => Ok(w),
    }
}

/// Runs the Landweber iteration for cell `(delta_index, seed)`.
///
/// Noise comes from stream 0 of `seed` under [`NoiseStreams::Shared`] and from
/// stream `delta_index` under [`NoiseStreams::PerDelta`].
pub fn run_cell(
    p: &dyn NonlinearProblem,
    cfg: &ExperimentConfig,
    omega: f64,
    y: &crate::grid::GridFunction,
    delta_index: usize,
    seed: u64,
) -> Result<CellRun> {
    let start = Instant::now();
    let b = p.benchmark();
    let delta_rel = cfg.delta_rel[delta_index];
    let stream = match cfg.noise_streams {
        NoiseStreams::Shared => 0,
        NoiseStreams::PerDelta => delta_index as u64,
    };
    let (y_delta, delta_abs) = add_noise_stream(y, delta_rel, seed, stream)?;
    let it = IterationConfig::benchmark(p, omega, cfg.kmax)?;
    let trace = run_paired(p, &y_delta, &b.x0, &it, Some(&b.x_dagger))?;
    Ok(CellRun {
        delta_index,
        delta_rel,
        delta_abs,
        seed,
        omega,
        tau: cfg.tau,
        trace,
        wall_time_ms: start.elapsed().as_secs_f64() * 1e3,
    })
}

/// Report rows for one finished cell, in the configured rule order.
pub fn rows_for_cell(problem: &str, cfg: &ExperimentConfig, cell: &CellRun) -> Result<Vec<ReportRow>> {
    let trace = &cell.trace;
    let err = trace.error.as_deref().unwrap_or(&[]);
    let opt = k_opt_oracle(trace)?;
    let k_opt = opt.k_star.unwrap_or(0);
    let opt_err = err[k_opt];
    cfg.rules
        .iter()
        .map(|&rule| {
            let d = decide(rule, trace, cell.delta_abs, cell.tau, &cfg.window)?;
            let abs_error = d.k_star.map(|k| err[k]);
            Ok(ReportRow {
                problem: problem.to_string(),
                delta_rel: cell.delta_rel,
                delta_abs: cell.delta_abs,
                seed: cell.seed,
                rule,
                k_star: d.k_star,
                boundary_hit: d.boundary_hit,
                abs_error,
                error_ratio: abs_error.map(|e| if opt_err > 0.0 { e / opt_err } else if e == 0.0 { 1.0 } else { f64::INFINITY }),
                k_ratio: d.k_star.and_then(|k| (k_opt > 0).then(|| k as f64 / k_opt as f64)),
                wall_time_ms: cfg.wall_time.then_some(cell.wall_time_ms),
            })
        })
        .collect()
}

/// Runs every cell and hands each finished run to `visit` (in report order)
/// before assembling the report.
pub fn run_experiment_with(
    cfg: &ExperimentConfig,
    mut visit: impl FnMut(&CellRun) -> Result<()>,
) -> Result<ExperimentReport> {
    cfg.validate()?;
    let p = problem_by_name(&cfg.problem, cfg.n)?;
    let omega = stepsize(p.as_ref(), cfg)?;
    let y = p.exact_data()?;
    let cells: Vec<(usize, u64)> = (0..cfg.delta_rel.len())
        .flat_map(|d| cfg.seeds.iter().map(move |&s| (d, s)))
        .collect();
    let runs = par::map(cfg.execution, &cells, |&(d, s)| run_cell(p.as_ref(), cfg, omega, &y, d, s));
    let mut report = ExperimentReport::default();
    for ((d, seed), run) in cells.into_iter().zip(runs) {
        match run.and_then(|cell| {
            visit(&cell)?;
            rows_for_cell(p.name(), cfg, &cell)
        }) {
            Ok(rows) => report.rows.extend(rows),
            Err(e) => report.failures.push(CellFailure {
                delta_rel: cfg.delta_rel[d],
                seed,
                message: e.to_string(),
            }),
        }
    }
    Ok(report)
}

/// Runs the configured sweep. Cells run in parallel under
/// [`Execution::Parallel`](crate::par::Execution); the report order does not
/// depend on it.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ExperimentReport> {
    run_experiment_with(cfg, |_| Ok(()))
}
