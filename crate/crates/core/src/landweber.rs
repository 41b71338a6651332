//! Nonlinear Landweber iteration `x_{k+1} = x_k + ω F′(x_k)*(y^δ − F(x_k))`
//! and the paired `(k, 2k)` trace used by the stopping rules.
//!
//! [`run_paired`] advances two copies of the same iteration from `x₀`: a
//! tortoise at index `k` and a hare at index `2k`. Every quantity the stopping
//! functionals need at the pair `(x_k, x_{2k})` is recorded on the fly, so
//! memory stays `O(kmax)` scalars instead of `O(kmax)` iterates.

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::operator::{DomainStatus, NonlinearProblem};
use crate::opnorm::problem_opnorm;

/// Power-iteration budget used by [`auto_stepsize`].
pub const OPNORM_ITERS: usize = 2000;
pub const OPNORM_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct IterationConfig {
    pub omega: f64,
    /// Largest index `k` for which paired quantities are produced; the hare runs to `2 kmax`.
    pub kmax: usize,
    /// Stop once `‖x_j − x₀‖_X` exceeds this.
    pub divergence_radius: f64,
    /// Stop once the residual exceeds this multiple of the initial residual.
    pub residual_blowup: f64,
}

impl IterationConfig {
    pub const DEFAULT_BLOWUP: f64 = 10.0;
    pub const BLIND_RADIUS: f64 = 100.0;

    /// Guards for a run where `x†` is unknown.
    pub fn blind(omega: f64, kmax: usize) -> Self {
        Self {
            omega,
            kmax,
            divergence_radius: Self::BLIND_RADIUS,
            residual_blowup: Self::DEFAULT_BLOWUP,
        }
    }

    /// Guards for a benchmark run: radius `10 ‖x† − x₀‖_X`.
    pub fn benchmark(p: &dyn NonlinearProblem, omega: f64, kmax: usize) -> Result<Self> {
        let b = p.benchmark();
        let gap = p.domain().norm(&b.x_dagger.sub(&b.x0))?;
        let radius = if gap > 0.0 { 10.0 * gap } else { Self::BLIND_RADIUS };
        Ok(Self {
            omega,
            kmax,
            divergence_radius: radius,
            residual_blowup: Self::DEFAULT_BLOWUP,
        })
    }

    fn validate(&self) -> Result<()> {
        if !(self.omega >= 0.0) || !self.omega.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid stepsize {}", self.omega)));
        }
        if !(self.divergence_radius > 0.0) || !(self.residual_blowup > 0.0) {
            return Err(Error::InvalidArgument("guards must be positive".into()));
        }
        Ok(())
    }
}

/// Why a paired run ended. Indices are hare (iteration) indices.
#[derive(Debug, Clone, PartialEq)]
pub enum Termination {
    Completed,
    DomainViolation { index: usize, reason: String },
    RadiusExceeded(usize),
    ResidualBlowup(usize),
    NonFinite(usize),
}

impl Termination {
    pub fn is_completed(&self) -> bool {
        matches!(self, Termination::Completed)
    }

    /// Iteration index of the first rejected iterate.
    pub fn index(&self) -> Option<usize> {
        match self {
            Termination::Completed => None,
            Termination::DomainViolation { index, .. } => Some(*index),
            Termination::RadiusExceeded(j) | Termination::ResidualBlowup(j) | Termination::NonFinite(j) => {
                Some(*j)
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            Termination::Completed => "completed".into(),
            Termination::DomainViolation { index, .. } => format!("domain_violation({index})"),
            Termination::RadiusExceeded(j) => format!("radius_exceeded({j})"),
            Termination::ResidualBlowup(j) => format!("residual_blowup({j})"),
            Termination::NonFinite(j) => format!("non_finite({j})"),
        }
    }
}

/// Per-index record of a Landweber run; all vectors are indexed by `k = 0..=defined_up_to()`.
#[derive(Debug, Clone, PartialEq)]
pub struct PairedTrace {
    /// `‖F(x_k) − y^δ‖_Y`
    pub residual_norm: Vec<f64>,
    /// `‖x_k − x†‖_X`, when `x†` was supplied.
    pub error: Option<Vec<f64>>,
    /// `‖x_k − x₀‖_X`
    pub dist_to_x0: Vec<f64>,
    /// `‖x_{2k} − x_k‖_X`
    pub qo: Vec<f64>,
    /// `⟨x_k, x_{2k} − x_k⟩_X`
    pub ls: Vec<f64>,
    /// `⟨y^δ − F(x_{2k}), y^δ − F(x_k)⟩_Y`
    pub hr_pair: Vec<f64>,
    pub termination: Termination,
    pub kmax: usize,
    /// Landweber steps performed (tortoise plus hare).
    pub steps: usize,
    /// Forward evaluations performed.
    pub forward_evals: usize,
}

impl PairedTrace {
    pub fn defined_up_to(&self) -> usize {
        self.residual_norm.len().saturating_sub(1)
    }
}

/// `y^δ − F(x)`, tagged like `y^δ`.
fn residual(p: &dyn NonlinearProblem, x: &GridFunction, y_delta: &GridFunction) -> Result<GridFunction> {
    Ok(y_delta.sub(&p.apply(x)?))
}

fn step_from_residual(
    p: &dyn NonlinearProblem,
    x: &GridFunction,
    r: &GridFunction,
    omega: f64,
) -> Result<GridFunction> {
    Ok(x.add_scaled(omega, &p.adjoint(x, r)?))
}

/// One Landweber step from `x`.
pub fn landweber_step(
    p: &dyn NonlinearProblem,
    x: &GridFunction,
    y_delta: &GridFunction,
    omega: f64,
) -> Result<GridFunction> {
    let r = residual(p, x, y_delta)?;
    step_from_residual(p, x, &r, omega)
}

/// All iterates `x_0 … x_steps` (no guards). Memory grows with `steps`; meant
/// for cross-checking [`run_paired`] and for small runs.
pub fn run_store_all(
    p: &dyn NonlinearProblem,
    y_delta: &GridFunction,
    x0: &GridFunction,
    omega: f64,
    steps: usize,
) -> Result<Vec<GridFunction>> {
    let mut out = Vec::with_capacity(steps + 1);
    out.push(x0.clone());
    for k in 0..steps {
        let next = landweber_step(p, &out[k], y_delta, omega)?;
        out.push(next);
    }
    Ok(out)
}

/// The iterate `x_k`, replayed from `x₀`.
pub fn iterate_at(
    p: &dyn NonlinearProblem,
    y_delta: &GridFunction,
    x0: &GridFunction,
    omega: f64,
    k: usize,
) -> Result<GridFunction> {
    let mut x = x0.clone();
    for _ in 0..k {
        x = landweber_step(p, &x, y_delta, omega)?;
    }
    Ok(x)
}

/// `ω = safety / ‖F′(x_ref)‖²`.
pub fn auto_stepsize(p: &dyn NonlinearProblem, x_ref: &GridFunction, safety: f64) -> Result<f64> {
    if !(safety > 0.0 && safety <= 1.0) {
        return Err(Error::InvalidArgument(format!(
            "stepsize safety factor must lie in (0, 1], got {safety}"
        )));
    }
    if let DomainStatus::Outside(why) = p.domain_check(x_ref) {
        return Err(Error::DomainViolation(why));
    }
    let norm = problem_opnorm(p, x_ref, OPNORM_ITERS, OPNORM_TOL)?;
    if !(norm > 0.0) {
        return Err(Error::InvalidArgument(
            "derivative has zero norm; no stepsize can be derived".into(),
        ));
    }
    Ok(safety / (norm * norm))
}

struct Guards<'a> {
    p: &'a dyn NonlinearProblem,
    x0: &'a GridFunction,
    y_delta: &'a GridFunction,
    radius: f64,
    residual_cap: f64,
}

impl Guards<'_> {
    /// Checks iterate `x` at hare index `j` and returns its residual.
    fn admit(&self, x: &GridFunction, j: usize) -> std::result::Result<GridFunction, Termination> {
        if !x.is_finite() {
            return Err(Termination::NonFinite(j));
        }
        if let DomainStatus::Outside(reason) = self.p.domain_check(x) {
            return Err(Termination::DomainViolation { index: j, reason });
        }
        let xs = self.p.domain();
        if xs.norm_unchecked(x.sub(self.x0).values()) > self.radius {
            return Err(Termination::RadiusExceeded(j));
        }
        let r = match residual(self.p, x, self.y_delta) {
            Ok(r) => r,
            Err(Error::DomainViolation(reason)) => {
                return Err(Termination::DomainViolation { index: j, reason })
            }
            Err(_) => return Err(Termination::NonFinite(j)),
        };
        if !r.is_finite() {
            return Err(Termination::NonFinite(j));
        }
        if self.p.range().norm_unchecked(r.values()) > self.residual_cap {
            return Err(Termination::ResidualBlowup(j));
        }
        Ok(r)
    }
}

/// Runs Landweber iteration with tortoise–hare pairing.
///
/// If a guard rejects hare iterate `j`, the trace keeps every `k` with
/// `2k < j` and records the termination; no error is returned for that case.
pub fn run_paired(
    p: &dyn NonlinearProblem,
    y_delta: &GridFunction,
    x0: &GridFunction,
    cfg: &IterationConfig,
    x_dagger: Option<&GridFunction>,
) -> Result<PairedTrace> {
    cfg.validate()?;
    if let DomainStatus::Outside(why) = p.domain_check(x0) {
        return Err(Error::DomainViolation(why));
    }
    let xs = p.domain();
    let ys = p.range();
    let omega = cfg.omega;

    let mut forward_evals = 1;
    let r0 = residual(p, x0, y_delta)?;
    let r0_norm = ys.norm(&r0)?;
    let guards = Guards {
        p,
        x0,
        y_delta,
        radius: cfg.divergence_radius,
        residual_cap: cfg.residual_blowup * r0_norm.max(f64::MIN_POSITIVE),
    };

    let cap = cfg.kmax + 1;
    let mut trace = PairedTrace {
        residual_norm: Vec::with_capacity(cap),
        error: x_dagger.map(|_| Vec::with_capacity(cap)),
        dist_to_x0: Vec::with_capacity(cap),
        qo: Vec::with_capacity(cap),
        ls: Vec::with_capacity(cap),
        hr_pair: Vec::with_capacity(cap),
        termination: Termination::Completed,
        kmax: cfg.kmax,
        steps: 0,
        forward_evals: 0,
    };

    let (mut x_t, mut r_t) = (x0.clone(), r0.clone());
    let (mut x_h, mut r_h) = (x0.clone(), r0);
    for k in 0..=cfg.kmax {
        let diff = x_h.sub(&x_t);
        trace.residual_norm.push(ys.norm_unchecked(r_t.values()));
        if let (Some(err), Some(xd)) = (trace.error.as_mut(), x_dagger) {
            err.push(xs.norm_unchecked(x_t.sub(xd).values()));
        }
        trace.dist_to_x0.push(xs.norm_unchecked(x_t.sub(x0).values()));
        trace.qo.push(xs.norm_unchecked(diff.values()));
        trace.ls.push(xs.inner_unchecked(x_t.values(), diff.values()));
        trace.hr_pair.push(ys.inner_unchecked(r_h.values(), r_t.values()));
        if k == cfg.kmax {
            break;
        }

        // hare: x_{2k} -> x_{2k+1} -> x_{2k+2}
        let mut stop = None;
        for j in [2 * k + 1, 2 * k + 2] {
            let next = step_from_residual(p, &x_h, &r_h, omega)?;
            trace.steps += 1;
            forward_evals += 1;
            match guards.admit(&next, j) {
                Ok(r) => {
                    x_h = next;
                    r_h = r;
                }
                Err(t) => {
                    stop = Some(t);
                    break;
                }
            }
        }
        if let Some(t) = stop {
            trace.termination = t;
            break;
        }

        // tortoise: x_k -> x_{k+1}; the hare already validated this iterate
        x_t = step_from_residual(p, &x_t, &r_t, omega)?;
        r_t = residual(p, &x_t, y_delta)?;
        trace.steps += 1;
        forward_evals += 1;
    }
    trace.forward_evals = forward_evals;
    Ok(trace)
}
