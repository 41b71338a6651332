//! Stopping rules over a [`PairedTrace`].
//!
//! | rule | ψ(k) |
//! |------|------|
//! | HD   | `√k ‖F(x_k) − y^δ‖` |
//! | HR   | `k ⟨y^δ − F(x_{2k}), y^δ − F(x_k)⟩` |
//! | QO   | `‖x_{2k} − x_k‖` |
//! | LS   | `⟨x_k, x_{2k} − x_k⟩` |
//! | DP   | `| ‖F(x_k) − y^δ‖ − τδ |` (diagnostic; the rule itself is the first crossing) |
//!
//! Heuristic rules pick the minimizer of ψ over a search window. Landweber
//! functionals start near zero and rise before reaching the informative
//! minimum, so the window skips the first `k_min` indices and, by default,
//! the initial ascent that follows.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::landweber::PairedTrace;

/// Default first index of the heuristic search window.
pub const DEFAULT_K_MIN: usize = 10;

/// Lower end of the heuristic search window.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchWindow {
    pub k_min: usize,
    /// Move the window start past the ascent of ψ beginning at `k_min`.
    pub skip_ascent: bool,
}

impl Default for SearchWindow {
    fn default() -> Self {
        Self { k_min: DEFAULT_K_MIN, skip_ascent: true }
    }
}

impl SearchWindow {
    pub fn fixed(k_min: usize) -> Self {
        Self { k_min, skip_ascent: false }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    Dp,
    Hd,
    Hr,
    Qo,
    Ls,
    Opt,
}

impl Rule {
    pub const ALL: [Rule; 6] = [Rule::Dp, Rule::Hd, Rule::Hr, Rule::Qo, Rule::Ls, Rule::Opt];
    pub const HEURISTIC: [Rule; 4] = [Rule::Hd, Rule::Hr, Rule::Qo, Rule::Ls];

    pub fn name(self) -> &'static str {
        match self {
            Rule::Dp => "dp",
            Rule::Hd => "hd",
            Rule::Hr => "hr",
            Rule::Qo => "qo",
            Rule::Ls => "ls",
            Rule::Opt => "opt",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown rule `{s}`")))
    }
}

/// Values `ψ(1) … ψ(defined_up_to)`.
#[derive(Debug, Clone, PartialEq)]
pub struct PsiSeries {
    rule: Rule,
    values: Vec<f64>,
}

impl PsiSeries {
    /// Builds a series from `ψ(1), ψ(2), …`.
    pub fn new(rule: Rule, values: Vec<f64>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index: i + 1 });
        }
        Ok(Self { rule, values })
    }

    pub fn rule(&self) -> Rule {
        self.rule
    }

    pub fn defined_up_to(&self) -> usize {
        self.values.len()
    }

    /// `ψ(k)` for `1 ≤ k ≤ defined_up_to`.
    pub fn at(&self, k: usize) -> Option<f64> {
        k.checked_sub(1).and_then(|i| self.values.get(i)).copied()
    }

    /// `(k, ψ(k))` pairs.
    pub fn iter(&self) -> impl Iterator<Item = (usize, f64)> + '_ {
        self.values.iter().enumerate().map(|(i, &v)| (i + 1, v))
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

fn series_from(rule: Rule, trace: &PairedTrace, f: impl Fn(usize) -> f64) -> PsiSeries {
    let values = (1..=trace.defined_up_to()).map(f).collect();
    PsiSeries { rule, values }
}

pub fn psi_hd(trace: &PairedTrace) -> PsiSeries {
    series_from(Rule::Hd, trace, |k| (k as f64).sqrt() * trace.residual_norm[k])
}

pub fn psi_hr(trace: &PairedTrace) -> PsiSeries {
    series_from(Rule::Hr, trace, |k| k as f64 * trace.hr_pair[k])
}

pub fn psi_qo(trace: &PairedTrace) -> PsiSeries {
    series_from(Rule::Qo, trace, |k| trace.qo[k])
}

pub fn psi_ls(trace: &PairedTrace) -> PsiSeries {
    series_from(Rule::Ls, trace, |k| trace.ls[k])
}

pub fn psi_dp(trace: &PairedTrace, delta_abs: f64, tau: f64) -> PsiSeries {
    series_from(Rule::Dp, trace, |k| (trace.residual_norm[k] - tau * delta_abs).abs())
}

/// The ψ series of a heuristic rule; `None` for DP and the oracle.
pub fn psi_for(rule: Rule, trace: &PairedTrace) -> Option<PsiSeries> {
    match rule {
        Rule::Hd => Some(psi_hd(trace)),
        Rule::Hr => Some(psi_hr(trace)),
        Rule::Qo => Some(psi_qo(trace)),
        Rule::Ls => Some(psi_ls(trace)),
        Rule::Dp | Rule::Opt => None,
    }
}

/// Outcome of a stopping rule.
#[derive(Debug, Clone, PartialEq)]
pub struct RuleDecision {
    pub rule: Rule,
    /// `None` when the rule is not attained within the trace.
    pub k_star: Option<usize>,
    pub psi_at_kstar: Option<f64>,
    /// Strict interior local minima `(k, ψ(k))` of the full series; a plateau
    /// counts once, at its first index.
    pub local_minima: Vec<(usize, f64)>,
    /// Inclusive search window.
    pub window: (usize, usize),
    /// Set when the minimizer sits on the upper end of the window.
    pub boundary_hit: bool,
}

impl RuleDecision {
    pub fn attained(&self) -> bool {
        self.k_star.is_some()
    }
}

/// Interior local minima of `(k, v)` pairs with consecutive `k`.
pub fn local_minima(points: &[(usize, f64)]) -> Vec<(usize, f64)> {
    let mut out = Vec::new();
    let mut falling = false;
    let mut candidate = None;
    for w in points.windows(2) {
        let (prev, next) = (w[0], w[1]);
        if next.1 < prev.1 {
            falling = true;
            candidate = None;
        } else if next.1 > prev.1 {
            if falling {
                out.push(candidate.unwrap_or(prev));
            }
            falling = false;
            candidate = None;
        } else if falling && candidate.is_none() {
            candidate = Some(prev);
        }
    }
    out
}

/// Global minimizer of ψ over `[k_min, k_max_search]`, ties toward smaller `k`.
pub fn select_kstar(series: &PsiSeries, k_min: usize, k_max_search: usize) -> Result<RuleDecision> {
    if k_min == 0 || k_min > k_max_search || k_max_search > series.defined_up_to() {
        return Err(Error::InvalidArgument(format!(
            "empty search window [{k_min}, {k_max_search}] for a series defined on [1, {}]",
            series.defined_up_to()
        )));
    }
    let mut best = (k_min, series.values[k_min - 1]);
    for k in k_min + 1..=k_max_search {
        let v = series.values[k - 1];
        if v < best.1 {
            best = (k, v);
        }
    }
    let points: Vec<(usize, f64)> = series.iter().collect();
    Ok(RuleDecision {
        rule: series.rule,
        k_star: Some(best.0),
        psi_at_kstar: Some(best.1),
        local_minima: local_minima(&points),
        window: (k_min, k_max_search),
        boundary_hit: best.0 == k_max_search,
    })
}

/// First `k` with `‖F(x_k) − y^δ‖ ≤ τδ`.
pub fn discrepancy_stop(trace: &PairedTrace, delta_abs: f64, tau: f64) -> Result<RuleDecision> {
    if !(delta_abs >= 0.0) {
        return Err(Error::InvalidArgument(format!("noise level {delta_abs} < 0")));
    }
    if !(tau >= 1.0) {
        return Err(Error::InvalidArgument(format!("tau = {tau} < 1")));
    }
    let level = tau * delta_abs;
    let k_star = trace.residual_norm.iter().position(|&r| r <= level);
    let points: Vec<(usize, f64)> = psi_dp(trace, delta_abs, tau).iter().collect();
    Ok(RuleDecision {
        rule: Rule::Dp,
        k_star,
        psi_at_kstar: k_star.map(|k| (trace.residual_norm[k] - level).abs()),
        local_minima: local_minima(&points),
        window: (0, trace.defined_up_to()),
        boundary_hit: false,
    })
}

/// `argmin_k ‖x_k − x†‖`, ties toward smaller `k`.
pub fn k_opt_oracle(trace: &PairedTrace) -> Result<RuleDecision> {
    let err = trace
        .error
        .as_ref()
        .ok_or_else(|| Error::InvalidArgument("trace has no error series (x† not supplied)".into()))?;
    let (k, v) = err
        .iter()
        .enumerate()
        .fold((0, f64::INFINITY), |best, (k, &v)| if v < best.1 { (k, v) } else { best });
    let points: Vec<(usize, f64)> = err.iter().cloned().enumerate().collect();
    Ok(RuleDecision {
        rule: Rule::Opt,
        k_star: Some(k),
        psi_at_kstar: Some(v),
        local_minima: local_minima(&points),
        window: (0, trace.defined_up_to()),
        boundary_hit: false,
    })
}

/// First `k ≥ k_min` at which ψ stops increasing, capped at `k_max`.
///
/// This is the first local maximum at or after `k_min`, or `k_min` itself
/// when ψ is not rising there.
pub fn skip_ascent(series: &PsiSeries, k_min: usize, k_max: usize) -> usize {
    let v = &series.values;
    let mut k = k_min.max(1);
    while k < k_max && v[k] >= v[k - 1] {
        k += 1;
    }
    k.min(k_max)
}

/// Applies `rule` on the window `[start, min(kmax, defined_up_to)]`, where
/// `start` is `window.k_min`, advanced past the initial ascent when
/// `window.skip_ascent` is set.
///
/// A heuristic rule whose window is empty (the run terminated before `k_min`)
/// is reported as not attained.
pub fn decide(
    rule: Rule,
    trace: &PairedTrace,
    delta_abs: f64,
    tau: f64,
    window: &SearchWindow,
) -> Result<RuleDecision> {
    let k_min = window.k_min;
    match rule {
        Rule::Dp => discrepancy_stop(trace, delta_abs, tau),
        Rule::Opt => k_opt_oracle(trace),
        _ => {
            let series = psi_for(rule, trace).expect("heuristic rule");
            let k_max_search = trace.kmax.min(series.defined_up_to());
            if k_min == 0 || k_min > k_max_search {
                return Ok(RuleDecision {
                    rule,
                    k_star: None,
                    psi_at_kstar: None,
                    local_minima: local_minima(&series.iter().collect::<Vec<_>>()),
                    window: (k_min, k_max_search),
                    boundary_hit: false,
                });
            }
            let start = if window.skip_ascent {
                skip_ascent(&series, k_min, k_max_search)
            } else {
                k_min
            };
            select_kstar(&series, start, k_max_search)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::landweber::Termination;

    fn trace_from_residuals(res: Vec<f64>) -> PairedTrace {
        let n = res.len();
        PairedTrace {
            residual_norm: res,
            error: None,
            dist_to_x0: vec![0.0; n],
            qo: vec![0.0; n],
            ls: vec![0.0; n],
            hr_pair: vec![0.0; n],
            termination: Termination::Completed,
            kmax: n - 1,
            steps: 0,
            forward_evals: 0,
        }
    }

    #[test]
    fn rule_names_round_trip() {
        for r in Rule::ALL {
            assert_eq!(r.name().parse::<Rule>().unwrap(), r);
        }
        assert!("tikhonov".parse::<Rule>().is_err());
    }

    #[test]
    fn direct_minimum() {
        let s = PsiSeries::new(Rule::Qo, vec![3.0, 1.0, 2.0, 0.5, 4.0]).unwrap();
        let d = select_kstar(&s, 1, 5).unwrap();
        assert_eq!(d.k_star, Some(4));
        assert!(!d.boundary_hit);
        assert_eq!(d.local_minima, vec![(2, 1.0), (4, 0.5)]);
    }

    #[test]
    fn increasing_series_stops_at_window_start() {
        let s = PsiSeries::new(Rule::Hd, (1..=20).map(|k| k as f64).collect()).unwrap();
        let d = select_kstar(&s, 3, 20).unwrap();
        assert_eq!(d.k_star, Some(3));
        assert!(!d.boundary_hit);
        assert!(d.local_minima.is_empty());
    }

    #[test]
    fn decreasing_series_hits_boundary() {
        // residual_k = 1/k  ⇒  ψ_HD(k) = k^{-1/2}
        let res = (0..=30).map(|k| if k == 0 { 2.0 } else { 1.0 / k as f64 }).collect();
        let t = trace_from_residuals(res);
        let d = decide(Rule::Hd, &t, 0.0, 1.0, &SearchWindow::fixed(1)).unwrap();
        assert_eq!(d.k_star, Some(30));
        assert!(d.boundary_hit);
    }

    #[test]
    fn ties_prefer_smaller_index() {
        let s = PsiSeries::new(Rule::Ls, vec![2.0, 1.0, 1.0, 3.0]).unwrap();
        assert_eq!(select_kstar(&s, 1, 4).unwrap().k_star, Some(2));
        assert_eq!(local_minima(&s.iter().collect::<Vec<_>>()), vec![(2, 1.0)]);
    }

    #[test]
    fn empty_window_is_an_error() {
        let s = PsiSeries::new(Rule::Qo, vec![1.0; 5]).unwrap();
        assert!(select_kstar(&s, 0, 3).is_err());
        assert!(select_kstar(&s, 4, 3).is_err());
        assert!(select_kstar(&s, 1, 6).is_err());
    }

    #[test]
    fn discrepancy_edges() {
        let t = trace_from_residuals(vec![1.0, 0.5, 0.2, 0.1]);
        assert_eq!(discrepancy_stop(&t, 1.0, 1.0).unwrap().k_star, Some(0));
        assert_eq!(discrepancy_stop(&t, 0.25, 1.0).unwrap().k_star, Some(2));
        assert_eq!(discrepancy_stop(&t, 0.0, 1.0).unwrap().k_star, None);
        assert!(discrepancy_stop(&t, 0.1, 0.5).is_err());
    }

    #[test]
    fn hr_sign_follows_pair_product() {
        let mut t = trace_from_residuals(vec![1.0, 1.0, 1.0]);
        t.hr_pair = vec![0.0, -1.0, -1.0];
        let s = psi_hr(&t);
        assert_eq!(s.values(), &[-1.0, -2.0]);
    }

    #[test]
    fn oracle_needs_errors() {
        let mut t = trace_from_residuals(vec![1.0, 0.5, 0.2]);
        assert!(k_opt_oracle(&t).is_err());
        t.error = Some(vec![3.0, 1.0, 2.0]);
        assert_eq!(k_opt_oracle(&t).unwrap().k_star, Some(1));
    }

    #[test]
    fn short_trace_is_not_attained() {
        let t = trace_from_residuals(vec![1.0, 0.5, 0.2]);
        let d = decide(Rule::Qo, &t, 0.1, 1.1, &SearchWindow::fixed(10)).unwrap();
        assert!(!d.attained());
    }
}
