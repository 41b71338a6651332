//! The nonlinear-operator contract and generic correctness checks.

use rand::Rng;

use crate::error::{Error, Result};
use crate::grid::{GridFunction, InnerProductSpec};
use crate::noise::{rng, standard_normal};

/// Whether a point lies in the domain of definition of an operator.
#[derive(Debug, Clone, PartialEq)]
pub enum DomainStatus {
    Inside,
    Outside(String),
}

impl DomainStatus {
    pub fn is_inside(&self) -> bool {
        matches!(self, DomainStatus::Inside)
    }
}

/// Reference setup shipped with a test problem.
#[derive(Debug, Clone)]
pub struct Benchmark {
    pub x_dagger: GridFunction,
    pub x0: GridFunction,
    pub default_n: usize,
    pub tau: f64,
    /// Relative noise levels, largest first.
    pub delta_rel_list: Vec<f64>,
    pub kmax: usize,
}

/// A Fréchet-differentiable map `F: D(F) ⊂ X → Y` between discretized Hilbert spaces.
///
/// `adjoint` must be the adjoint of `derivative` with respect to the inner
/// products of [`domain`](Self::domain) and [`range`](Self::range).
pub trait NonlinearProblem: Send + Sync {
    fn name(&self) -> &str;
    /// The space `X`.
    fn domain(&self) -> &InnerProductSpec;
    /// The space `Y`.
    fn range(&self) -> &InnerProductSpec;
    fn apply(&self, x: &GridFunction) -> Result<GridFunction>;
    /// `F′(x) h`.
    fn derivative(&self, x: &GridFunction, h: &GridFunction) -> Result<GridFunction>;
    /// `F′(x)* r`.
    fn adjoint(&self, x: &GridFunction, r: &GridFunction) -> Result<GridFunction>;
    fn domain_check(&self, x: &GridFunction) -> DomainStatus;
    fn benchmark(&self) -> &Benchmark;

    /// Noise-free data `F(x†)` for the benchmark.
    fn exact_data(&self) -> Result<GridFunction> {
        self.apply(&self.benchmark().x_dagger)
    }

    /// Relative error a central difference must reach in [`operator_gates`].
    fn fd_tolerance(&self) -> f64 {
        1e-6
    }
}

/// One step of the finite-difference sweep.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FdStep {
    pub step: f64,
    /// `None` when `x ± t h` leaves the domain.
    pub error: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FdReport {
    pub best_rel_err: f64,
    /// True if `F′(x)h = 0`, in which case errors are absolute.
    pub absolute: bool,
    pub per_step: Vec<FdStep>,
}

/// Compares the central difference `(F(x+th) − F(x−th)) / 2t` with `F′(x)h`
/// in the `Y` norm for each step `t`.
pub fn fd_derivative_check(
    p: &dyn NonlinearProblem,
    x: &GridFunction,
    h: &GridFunction,
    steps: &[f64],
) -> Result<FdReport> {
    if steps.is_empty() {
        return Err(Error::InvalidArgument("empty step list".into()));
    }
    let y = p.range();
    let d = p.derivative(x, h)?;
    let d_norm = y.norm(&d)?;
    let absolute = d_norm == 0.0;
    let mut per_step = Vec::with_capacity(steps.len());
    for &t in steps {
        let xp = x.add_scaled(t, h);
        let xm = x.add_scaled(-t, h);
        if !p.domain_check(&xp).is_inside() || !p.domain_check(&xm).is_inside() {
            per_step.push(FdStep { step: t, error: None });
            continue;
        }
        let fp = p.apply(&xp)?;
        let fm = p.apply(&xm)?;
        let fd = fp.sub(&fm).scaled(0.5 / t);
        let err = y.norm(&fd.sub(&d))?;
        let err = if absolute { err } else { err / d_norm };
        per_step.push(FdStep {
            step: t,
            error: Some(err),
        });
    }
    let best_rel_err = per_step
        .iter()
        .filter_map(|s| s.error)
        .fold(f64::INFINITY, f64::min);
    Ok(FdReport {
        best_rel_err,
        absolute,
        per_step,
    })
}

/// `|⟨F′(x)h, r⟩_Y − ⟨h, F′(x)*r⟩_X| / (‖F′(x)h‖_Y ‖r‖_Y + tiny)` for one pair.
pub fn adjoint_mismatch(
    p: &dyn NonlinearProblem,
    x: &GridFunction,
    h: &GridFunction,
    r: &GridFunction,
) -> Result<f64> {
    let jh = p.derivative(x, h)?;
    let jtr = p.adjoint(x, r)?;
    let lhs = p.range().inner(&jh, r)?;
    let rhs = p.domain().inner(h, &jtr)?;
    let scale = p.range().norm(&jh)? * p.range().norm(r)?;
    Ok((lhs - rhs).abs() / (scale + f64::MIN_POSITIVE))
}

/// Maximum [`adjoint_mismatch`] over `trials` random Gaussian pairs `(h, r)`.
pub fn adjoint_check(
    p: &dyn NonlinearProblem,
    x: &GridFunction,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if trials == 0 {
        return Err(Error::InvalidArgument("trials must be at least 1".into()));
    }
    if let DomainStatus::Outside(why) = p.domain_check(x) {
        return Err(Error::DomainViolation(why));
    }
    let mut rng = rng(seed, 0);
    let (xs, ys) = (p.domain(), p.range());
    let mut worst = 0.0_f64;
    for _ in 0..trials {
        let h = GridFunction::new(xs.grid(), xs.space(), standard_normal(&mut rng, xs.grid().len()))?;
        let r = GridFunction::new(ys.grid(), ys.space(), standard_normal(&mut rng, ys.grid().len()))?;
        worst = worst.max(adjoint_mismatch(p, x, &h, &r)?);
    }
    Ok(worst)
}

/// Random smooth perturbation of `center`: a sum of a few low sine/cosine
/// modes with Gaussian amplitudes, rescaled to sup-norm `amplitude`.
pub fn smooth_perturbation(center: &GridFunction, amplitude: f64, seed: u64) -> GridFunction {
    let mut rng = rng(seed, 0x5eed);
    let modes: Vec<(f64, f64)> = (1..=4)
        .map(|_| (rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    let pts = center.grid().points();
    let mut pert: Vec<f64> = pts
        .iter()
        .map(|&s| {
            modes
                .iter()
                .enumerate()
                .map(|(k, (a, b))| {
                    let w = 2.0 * std::f64::consts::PI * (k + 1) as f64;
                    a * (w * s).sin() + b * (w * s).cos()
                })
                .sum::<f64>()
        })
        .collect();
    let m = pert.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    if m > 0.0 {
        pert.iter_mut().for_each(|v| *v *= amplitude / m);
    }
    let mut out = center.clone();
    out.values_mut()
        .iter_mut()
        .zip(pert)
        .for_each(|(v, d)| *v += d);
    out
}

/// Tolerance for [`adjoint_check`] in [`operator_gates`].
pub const ADJOINT_TOLERANCE: f64 = 1e-10;

/// Steps tried by [`operator_gates`].
pub const GATE_STEPS: [f64; 8] = [1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7];

/// Adjoint and finite-difference results at one point.
#[derive(Debug, Clone, PartialEq)]
pub struct GatePoint {
    pub label: String,
    pub adjoint_mismatch: f64,
    pub fd_rel_err: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct GateReport {
    pub points: Vec<GatePoint>,
    pub adjoint_tolerance: f64,
    pub fd_tolerance: f64,
}

impl GateReport {
    pub fn passed(&self) -> bool {
        self.points
            .iter()
            .all(|g| g.adjoint_mismatch <= self.adjoint_tolerance && g.fd_rel_err <= self.fd_tolerance)
    }
}

/// Runs the adjoint and finite-difference checks at `x†`, `x₀` and
/// `random_points` smooth perturbations of `x†` inside the domain.
pub fn operator_gates(p: &dyn NonlinearProblem, random_points: usize, seed: u64) -> Result<GateReport> {
    let b = p.benchmark();
    let mut points = vec![("x_dagger".to_string(), b.x_dagger.clone()), ("x0".to_string(), b.x0.clone())];
    let mut draw = seed;
    while points.len() < random_points + 2 {
        let x = smooth_perturbation(&b.x_dagger, 0.5, draw);
        draw += 1;
        if p.domain_check(&x).is_inside() {
            points.push((format!("random[{}]", points.len() - 2), x));
        } else if draw > seed + 100 * (random_points as u64 + 1) {
            return Err(Error::DomainViolation("could not sample points inside the domain".into()));
        }
    }
    let zero = GridFunction::zeros(b.x_dagger.grid(), b.x_dagger.space());
    let points = points
        .into_iter()
        .enumerate()
        .map(|(i, (label, x))| {
            let h = smooth_perturbation(&zero, 1.0, seed.wrapping_add(1000 + i as u64));
            Ok(GatePoint {
                label,
                adjoint_mismatch: adjoint_check(p, &x, 10, seed.wrapping_add(i as u64))?,
                fd_rel_err: fd_derivative_check(p, &x, &h, &GATE_STEPS)?.best_rel_err,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(GateReport { points, adjoint_tolerance: ADJOINT_TOLERANCE, fd_tolerance: p.fd_tolerance() })
}
