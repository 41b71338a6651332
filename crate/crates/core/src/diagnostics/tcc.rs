//! Sampled tangential-cone ratios.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::noise::{rng, standard_normal};
use crate::operator::NonlinearProblem;
use crate::par::{self, Execution};

/// Quantile levels reported by [`tcc_ratio`].
pub const TCC_QUANTILES: [f64; 3] = [0.5, 0.9, 0.99];

/// Relative size below which `‖F(x) − F(x̃)‖` counts as degenerate.
const DEGENERATE: f64 = 1e-14;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TccReport {
    /// Largest sampled `η`; a lower bound for the true constant.
    pub eta_max: f64,
    /// `(level, value)` for each level in [`TCC_QUANTILES`].
    pub eta_quantiles: Vec<(f64, f64)>,
    pub evaluated: usize,
    /// Pairs with a degenerate denominator.
    pub skipped_degenerate: usize,
    /// Pairs with a point outside the problem domain.
    pub skipped_domain: usize,
}

enum Sample {
    Eta(f64),
    Degenerate,
    Outside,
}

fn unit_direction(p: &dyn NonlinearProblem, seed: u64, stream: u64) -> Result<GridFunction> {
    let xs = p.domain();
    let mut g = rng(seed, stream);
    loop {
        let d = GridFunction::new(xs.grid(), xs.space(), standard_normal(&mut g, xs.grid().len()))?;
        let n = xs.norm(&d)?;
        if n > 0.0 {
            return Ok(d.scaled(1.0 / n));
        }
    }
}

fn sample(
    p: &dyn NonlinearProblem,
    center: &GridFunction,
    radius: f64,
    seed: u64,
    index: u64,
    scale: f64,
) -> Result<Sample> {
    let x = center.add_scaled(radius, &unit_direction(p, seed, 2 * index)?);
    let xt = center.add_scaled(radius, &unit_direction(p, seed, 2 * index + 1)?);
    if !p.domain_check(&x).is_inside() || !p.domain_check(&xt).is_inside() {
        return Ok(Sample::Outside);
    }
    let ys = p.range();
    let fx = p.apply(&x)?;
    let diff = fx.sub(&p.apply(&xt)?);
    let den = ys.norm(&diff)?;
    if den < DEGENERATE * scale {
        return Ok(Sample::Degenerate);
    }
    let lin = p.derivative(&x, &x.sub(&xt))?;
    Ok(Sample::Eta(ys.norm(&diff.sub(&lin))? / den))
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    let pos = q * (sorted.len() - 1) as f64;
    let lo = pos.floor() as usize;
    let hi = pos.ceil() as usize;
    sorted[lo] + (pos - lo as f64) * (sorted[hi] - sorted[lo])
}

/// `η(x, x̃) = ‖F(x) − F(x̃) − F′(x)(x − x̃)‖ / ‖F(x) − F(x̃)‖` over `samples`
/// random pairs `x, x̃ = center + radius·d` with independent unit directions
/// `d` in X.
///
/// Pairs whose denominator falls below `1e-14·‖F(center)‖` or that leave the
/// domain are skipped and counted. Every pair is drawn from its own stream of
/// `seed`, so the result does not depend on `mode`.
pub fn tcc_ratio(
    p: &dyn NonlinearProblem,
    center: &GridFunction,
    radius: f64,
    samples: usize,
    seed: u64,
    mode: Execution,
) -> Result<TccReport> {
    if samples == 0 {
        return Err(Error::InvalidArgument("tcc_ratio needs at least one sample".into()));
    }
    if !(radius > 0.0) || !radius.is_finite() {
        return Err(Error::InvalidArgument(format!("radius {radius} must be positive")));
    }
    let scale = p.range().norm(&p.apply(center)?)?;
    let results = par::map_range(mode, samples, |i| sample(p, center, radius, seed, i as u64, scale));
    let mut etas = Vec::with_capacity(samples);
    let (mut degenerate, mut outside) = (0, 0);
    for r in results {
        match r? {
            Sample::Eta(v) => etas.push(v),
            Sample::Degenerate => degenerate += 1,
            Sample::Outside => outside += 1,
        }
    }
    if etas.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "all {samples} pairs skipped ({degenerate} degenerate, {outside} outside the domain)"
        )));
    }
    etas.sort_by(f64::total_cmp);
    Ok(TccReport {
        eta_max: *etas.last().unwrap(),
        eta_quantiles: TCC_QUANTILES.iter().map(|&q| (q, quantile(&etas, q))).collect(),
        evaluated: etas.len(),
        skipped_degenerate: degenerate,
        skipped_domain: outside,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantiles_interpolate() {
        let v = [0.0, 1.0, 2.0, 3.0, 4.0];
        assert_eq!(quantile(&v, 0.5), 2.0);
        assert_eq!(quantile(&v, 0.0), 0.0);
        assert_eq!(quantile(&v, 1.0), 4.0);
        assert!((quantile(&v, 0.9) - 3.6).abs() < 1e-12);
    }
}
