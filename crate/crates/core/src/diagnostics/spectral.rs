//! Muckenhoupt and regularity constants of a singular system.

use std::fmt;

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};

/// Singular values with the coefficient magnitudes of a data error and of a
/// solution in the corresponding singular bases.
#[derive(Debug, Clone, PartialEq)]
pub struct SingularSystem {
    sigma: Vec<f64>,
    noise_coeffs: Vec<f64>,
    sol_coeffs: Vec<f64>,
    t0: f64,
}

impl SingularSystem {
    /// `sigma` must be positive and nonincreasing; `t0` defaults to `σ_max²`.
    pub fn new(
        sigma: Vec<f64>,
        noise_coeffs: Vec<f64>,
        sol_coeffs: Vec<f64>,
        t0: Option<f64>,
    ) -> Result<Self> {
        if sigma.is_empty() {
            return Err(Error::InvalidArgument("empty singular system".into()));
        }
        if noise_coeffs.len() != sigma.len() || sol_coeffs.len() != sigma.len() {
            return Err(Error::InvalidArgument(format!(
                "coefficient lengths ({}, {}) differ from {} singular values",
                noise_coeffs.len(),
                sol_coeffs.len(),
                sigma.len()
            )));
        }
        if let Some(i) = sigma.iter().position(|s| !(*s > 0.0) || !s.is_finite()) {
            return Err(Error::InvalidArgument(format!("sigma[{i}] = {} is not positive", sigma[i])));
        }
        if sigma.windows(2).any(|w| w[1] > w[0]) {
            return Err(Error::InvalidArgument("singular values must be nonincreasing".into()));
        }
        let all_finite = noise_coeffs.iter().chain(&sol_coeffs).all(|c| c.is_finite());
        if !all_finite {
            return Err(Error::InvalidArgument("non-finite coefficient".into()));
        }
        let t0 = t0.unwrap_or(sigma[0] * sigma[0]);
        if !(t0 > 0.0) {
            return Err(Error::InvalidArgument(format!("t0 = {t0} must be positive")));
        }
        Ok(Self {
            sigma,
            noise_coeffs: noise_coeffs.into_iter().map(f64::abs).collect(),
            sol_coeffs: sol_coeffs.into_iter().map(f64::abs).collect(),
            t0,
        })
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }

    pub fn noise_coeffs(&self) -> &[f64] {
        &self.noise_coeffs
    }

    pub fn sol_coeffs(&self) -> &[f64] {
        &self.sol_coeffs
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn len(&self) -> usize {
        self.sigma.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sigma.is_empty()
    }

    /// Rescales to `σ_max = 1` (and `t0` accordingly), as needed by the
    /// Landweber filter.
    pub fn normalized(&self) -> Self {
        let s = self.sigma[0];
        Self {
            sigma: self.sigma.iter().map(|v| v / s).collect(),
            noise_coeffs: self.noise_coeffs.clone(),
            sol_coeffs: self.sol_coeffs.clone(),
            t0: self.t0 / (s * s),
        }
    }

    /// `{σᵢ²} ∩ (0, t0]` without the smallest value, where the right-hand
    /// side of the Muckenhoupt inequality is an empty sum.
    pub fn muckenhoupt_grid(&self) -> Vec<f64> {
        let min = self.sigma[self.len() - 1].powi(2);
        self.squared_breakpoints(|t| t > min)
    }

    /// `{σᵢ²} ∩ (0, t0]` without `σ_max²`, where the denominator of the
    /// regularity condition is an empty sum.
    pub fn regularity_grid(&self) -> Vec<f64> {
        let max = self.sigma[0].powi(2);
        self.squared_breakpoints(|t| t < max)
    }

    fn squared_breakpoints(&self, keep: impl Fn(f64) -> bool) -> Vec<f64> {
        let mut t: Vec<f64> = self
            .sigma
            .iter()
            .map(|s| s * s)
            .filter(|&t| t <= self.t0 && keep(t))
            .collect();
        t.dedup();
        t
    }

    fn check_grid(&self, t_grid: &[f64]) -> Result<()> {
        if t_grid.is_empty() {
            return Err(Error::InvalidArgument("empty t grid".into()));
        }
        if let Some(t) = t_grid.iter().find(|&&t| !(t > 0.0 && t <= self.t0)) {
            return Err(Error::InvalidArgument(format!("t = {t} outside (0, {}]", self.t0)));
        }
        Ok(())
    }

    /// Number of indices with `σᵢ² ≥ t`.
    fn count_at_least(&self, t: f64) -> usize {
        self.sigma.partition_point(|s| s * s >= t)
    }

    /// Number of indices with `σᵢ² > t`.
    fn count_above(&self, t: f64) -> usize {
        self.sigma.partition_point(|s| s * s > t)
    }
}

/// A constant that may be infinite. Serialized as a number or `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Constant {
    Finite(f64),
    Infinite,
}

impl Constant {
    pub fn is_finite(self) -> bool {
        matches!(self, Constant::Finite(_))
    }

    pub fn value(self) -> f64 {
        match self {
            Constant::Finite(v) => v,
            Constant::Infinite => f64::INFINITY,
        }
    }

    fn ratio(num: f64, den: f64) -> Self {
        if den > 0.0 {
            Constant::Finite(num / den)
        } else if num > 0.0 {
            Constant::Infinite
        } else {
            Constant::Finite(0.0)
        }
    }
}

impl fmt::Display for Constant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Constant::Finite(v) => write!(f, "{v:e}"),
            Constant::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Constant {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Constant::Finite(v) => s.serialize_f64(*v),
            Constant::Infinite => s.serialize_str("inf"),
        }
    }
}

/// Supremum of a ratio over a `t` grid and the `t` attaining it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ConstantReport {
    pub constant: Constant,
    pub worst_t: f64,
}

fn supremum(t_grid: &[f64], mut ratio: impl FnMut(f64) -> Constant) -> ConstantReport {
    let mut best = ConstantReport { constant: Constant::Finite(f64::NEG_INFINITY), worst_t: t_grid[0] };
    for &t in t_grid {
        let c = ratio(t);
        if c.value() > best.constant.value() {
            best = ConstantReport { constant: c, worst_t: t };
            if !c.is_finite() {
                break;
            }
        }
    }
    best
}

fn check_p(p: u32) -> Result<()> {
    if p == 1 || p == 2 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("p must be 1 or 2, got {p}")))
    }
}

/// Smallest `C` with
/// `Σ_{σᵢ²≥t} (t/σᵢ²)|eᵢ|² ≤ C Σ_{σᵢ²<t} (σᵢ²/t)^{p−1}|eᵢ|²` for all `t` in
/// `t_grid`, where `eᵢ` are the noise coefficients.
///
/// `0/0` counts as 0 and `positive/0` as infinite.
pub fn muckenhoupt_constant(ss: &SingularSystem, p: u32, t_grid: &[f64]) -> Result<ConstantReport> {
    check_p(p)?;
    ss.check_grid(t_grid)?;
    let n = ss.len();
    let e2: Vec<f64> = ss.noise_coeffs.iter().map(|e| e * e).collect();
    // head[i] = Σ_{j<i} e_j²/σ_j², tail[i] = Σ_{j≥i} σ_j^{2(p−1)} e_j²
    let mut head = vec![0.0; n + 1];
    for i in 0..n {
        head[i + 1] = head[i] + e2[i] / (ss.sigma[i] * ss.sigma[i]);
    }
    let mut tail = vec![0.0; n + 1];
    for i in (0..n).rev() {
        tail[i] = tail[i + 1] + ss.sigma[i].powi(2 * (p as i32 - 1)) * e2[i];
    }
    Ok(supremum(t_grid, |t| {
        let split = ss.count_at_least(t);
        let lhs = t * head[split];
        let rhs = tail[split] / t.powi(p as i32 - 1);
        Constant::ratio(lhs, rhs)
    }))
}

/// Residual filter `r(λ, α)` of a regularization method.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FilterSpec {
    /// `(1 − λ)^{1/α}` with `α = 1/k`; needs `λ ∈ [0, 1]`.
    Landweber,
    /// `α / (α + λ)`.
    Tikhonov,
}

impl FilterSpec {
    pub fn residual(self, lambda: f64, alpha: f64) -> f64 {
        match self {
            FilterSpec::Landweber => (1.0 - lambda).max(0.0).powf(1.0 / alpha),
            FilterSpec::Tikhonov => alpha / (alpha + lambda),
        }
    }
}

/// Smallest `C` with
/// `Σ_{σᵢ²≤t} |xᵢ|² ≤ C Σ_{σᵢ²>t} (σᵢ²/t)^{p−1} r(σᵢ², t)² |xᵢ|²` for all `t`
/// in `t_grid`, where `xᵢ` are the solution coefficients and `α = t`.
///
/// The Landweber filter needs `σ_max ≤ 1`; see [`SingularSystem::normalized`].
pub fn regularity_constant(
    ss: &SingularSystem,
    p: u32,
    filter: FilterSpec,
    t_grid: &[f64],
) -> Result<ConstantReport> {
    check_p(p)?;
    ss.check_grid(t_grid)?;
    if filter == FilterSpec::Landweber && ss.sigma[0] > 1.0 {
        return Err(Error::InvalidArgument(format!(
            "Landweber filter needs sigma_max <= 1, got {}; rescale with SingularSystem::normalized",
            ss.sigma[0]
        )));
    }
    let n = ss.len();
    let x2: Vec<f64> = ss.sol_coeffs.iter().map(|x| x * x).collect();
    let mut low = vec![0.0; n + 1];
    for i in (0..n).rev() {
        low[i] = low[i + 1] + x2[i];
    }
    Ok(supremum(t_grid, |t| {
        let split = ss.count_above(t);
        let den: f64 = (0..split)
            .map(|i| {
                let s2 = ss.sigma[i] * ss.sigma[i];
                (s2 / t).powi(p as i32 - 1) * filter.residual(s2, t).powi(2) * x2[i]
            })
            .sum();
        Constant::ratio(low[split], den)
    }))
}
