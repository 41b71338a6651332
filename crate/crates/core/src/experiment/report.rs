//! CSV output and summaries.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::landweber::PairedTrace;
use crate::rules::{psi_dp, psi_hd, psi_hr, psi_ls, psi_qo, Rule};

use super::run::{ExperimentReport, ReportRow};

pub const CSV_HEADER: &str =
    "problem,delta_rel,delta_abs,seed,rule,k_star,attained,boundary_hit,abs_error,error_ratio,k_ratio,wall_time_ms";

pub const SERIES_HEADER: &str = "k,residual,error,psi_hd,psi_hr,psi_qo,psi_ls,psi_dp";

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn csv_row(r: &ReportRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{},{}",
        r.problem,
        r.delta_rel,
        r.delta_abs,
        r.seed,
        r.rule,
        r.k_star.map(|k| k as i64).unwrap_or(-1),
        r.attained(),
        r.boundary_hit,
        opt(r.abs_error),
        opt(r.error_ratio),
        opt(r.k_ratio),
        opt(r.wall_time_ms),
    )
}

/// The report as CSV text. Unattained rules carry `k_star = -1` and empty
/// error fields.
pub fn to_csv(report: &ExperimentReport) -> String {
    let mut out = String::with_capacity(64 * (report.rows.len() + 1));
    out.push_str(CSV_HEADER);
    out.push('\n');
    for r in &report.rows {
        out.push_str(&csv_row(r));
        out.push('\n');
    }
    out
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    let io = |e: std::io::Error| Error::Io { path: path.display().to_string(), message: e.to_string() };
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).map_err(io)?;
    }
    fs::write(path, text).map_err(io)
}

pub fn emit_csv(report: &ExperimentReport, path: &Path) -> Result<()> {
    write_file(path, &to_csv(report))
}

/// Per-index series for plotting, one row per `k = 0..=defined_up_to`.
///
/// ψ columns are empty at `k = 0`, as is `error` when the trace has none.
pub fn series_csv(trace: &PairedTrace, delta_abs: f64, tau: f64) -> String {
    let psis = [psi_hd(trace), psi_hr(trace), psi_qo(trace), psi_ls(trace), psi_dp(trace, delta_abs, tau)];
    let mut out = String::new();
    out.push_str(SERIES_HEADER);
    out.push('\n');
    for k in 0..=trace.defined_up_to() {
        let err = trace.error.as_ref().map(|e| e[k]);
        let _ = write!(out, "{k},{},{}", trace.residual_norm[k], opt(err));
        for s in &psis {
            let _ = write!(out, ",{}", opt(s.at(k)));
        }
        out.push('\n');
    }
    out
}

pub fn emit_series(trace: &PairedTrace, delta_abs: f64, tau: f64, path: &Path) -> Result<()> {
    write_file(path, &series_csv(trace, delta_abs, tau))
}

/// Aggregate over all `(δ, seed)` rows of one rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleSummary {
    pub problem: String,
    pub rule: Rule,
    pub runs: usize,
    pub median_error_ratio: Option<f64>,
    pub max_error_ratio: Option<f64>,
    pub median_k_ratio: Option<f64>,
    pub max_k_ratio: Option<f64>,
    pub boundary_hits: usize,
    pub not_attained: usize,
}

/// Median with the mean of the two middle values for even lengths.
pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let m = v.len() / 2;
    Some(if v.len() % 2 == 1 { v[m] } else { 0.5 * (v[m - 1] + v[m]) })
}

fn max(values: &[f64]) -> Option<f64> {
    values.iter().copied().max_by(f64::total_cmp)
}

/// One summary per `(problem, rule)` in first-appearance order.
pub fn summarize(report: &ExperimentReport) -> Vec<RuleSummary> {
    let mut keys: Vec<(String, Rule)> = Vec::new();
    for r in &report.rows {
        if !keys.iter().any(|(p, rule)| *p == r.problem && *rule == r.rule) {
            keys.push((r.problem.clone(), r.rule));
        }
    }
    keys.into_iter()
        .map(|(problem, rule)| {
            let rows: Vec<&ReportRow> =
                report.rows.iter().filter(|r| r.problem == problem && r.rule == rule).collect();
            let er: Vec<f64> = rows.iter().filter_map(|r| r.error_ratio).collect();
            let kr: Vec<f64> = rows.iter().filter_map(|r| r.k_ratio).collect();
            RuleSummary {
                runs: rows.len(),
                median_error_ratio: median(&er),
                max_error_ratio: max(&er),
                median_k_ratio: median(&kr),
                max_k_ratio: max(&kr),
                boundary_hits: rows.iter().filter(|r| r.boundary_hit).count(),
                not_attained: rows.iter().filter(|r| !r.attained()).count(),
                problem,
                rule,
            }
        })
        .collect()
}

/// Fixed-width text table of [`summarize`].
pub fn summary_table(summaries: &[RuleSummary]) -> String {
    let f = |v: Option<f64>| v.map(|x| format!("{x:.3}")).unwrap_or_else(|| "-".into());
    let mut out = format!(
        "{:<12} {:<5} {:>5} {:>10} {:>10} {:>10} {:>10}  flags\n",
        "problem", "rule", "runs", "med err", "max err", "med k", "max k"
    );
    for s in summaries {
        let mut flags = Vec::new();
        if s.boundary_hits > 0 {
            flags.push(format!("boundary x{}", s.boundary_hits));
        }
        if s.not_attained > 0 {
            flags.push(format!("not attained x{}", s.not_attained));
        }
        let _ = writeln!(
            out,
            "{:<12} {:<5} {:>5} {:>10} {:>10} {:>10} {:>10}  {}",
            s.problem,
            s.rule.name(),
            s.runs,
            f(s.median_error_ratio),
            f(s.max_error_ratio),
            f(s.median_k_ratio),
            f(s.max_k_ratio),
            flags.join(", ")
        );
    }
    out
}
