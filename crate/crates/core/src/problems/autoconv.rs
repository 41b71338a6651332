//! Periodic auto-convolution `F(x)(s) = ∫₀¹ x(s − t) x(t) dt` on L²(0,1).

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, InnerProductSpec, Layout, Space};
use crate::operator::{Benchmark, DomainStatus, NonlinearProblem};

use super::log_levels;

/// `(1/n) Σ_j a[(i − j) mod n] b[j]`.
fn circular(a: &[f64], b: &[f64]) -> Vec<f64> {
    let n = a.len();
    let inv_n = 1.0 / n as f64;
    (0..n)
        .map(|i| {
            let mut s = 0.0;
            for (j, bj) in b.iter().enumerate() {
                s += a[(i + n - j) % n] * bj;
            }
            s * inv_n
        })
        .collect()
}

/// `(1/n) Σ_i a[(i − j) mod n] r[i]`, the transpose of `h ↦ circular(a, h)`
/// with respect to the rectangle-rule pairing.
fn circular_t(a: &[f64], r: &[f64]) -> Vec<f64> {
    let n = a.len();
    let inv_n = 1.0 / n as f64;
    (0..n)
        .map(|j| {
            let mut s = 0.0;
            for (i, ri) in r.iter().enumerate() {
                s += a[(i + n - j) % n] * ri;
            }
            s * inv_n
        })
        .collect()
}

/// Rectangle-rule auto-convolution on a periodic grid.
pub fn autoconv_apply(x: &GridFunction) -> Result<GridFunction> {
    if x.grid().layout() != Layout::Periodic {
        return Err(Error::InvalidArgument(
            "auto-convolution needs a periodic grid".into(),
        ));
    }
    GridFunction::new(x.grid(), Space::L2, circular(x.values(), x.values()))
}

#[derive(Debug, Clone)]
pub struct AutoConvolutionProblem {
    space: InnerProductSpec,
    bench: Benchmark,
}

impl AutoConvolutionProblem {
    pub fn new(n: usize) -> Result<Self> {
        let grid = Grid::periodic(n)?;
        let x_dagger = GridFunction::from_fn(grid, Space::L2, |s| 10.0 + SQRT_2 * (2.0 * PI * s).sin())?;
        let x0 = GridFunction::from_fn(grid, Space::L2, |s| {
            10.0 + 0.25 * SQRT_2 * (2.0 * PI * s).sin()
        })?;
        Ok(Self {
            space: InnerProductSpec::l2(grid),
            bench: Benchmark {
                x_dagger,
                x0,
                default_n: 60,
                tau: 1.1,
                delta_rel_list: log_levels(1e-4, 1e-3, 8),
                kmax: 5000,
            },
        })
    }

    fn check(&self, x: &GridFunction) -> Result<()> {
        if x.grid() != self.space.grid() {
            return Err(Error::GridMismatch(format!(
                "{:?} vs problem grid {:?}",
                x.grid(),
                self.space.grid()
            )));
        }
        Ok(())
    }
}

impl NonlinearProblem for AutoConvolutionProblem {
    fn name(&self) -> &str {
        "autoconv"
    }

    fn domain(&self) -> &InnerProductSpec {
        &self.space
    }

    fn range(&self) -> &InnerProductSpec {
        &self.space
    }

    fn apply(&self, x: &GridFunction) -> Result<GridFunction> {
        self.check(x)?;
        autoconv_apply(x)
    }

    fn derivative(&self, x: &GridFunction, h: &GridFunction) -> Result<GridFunction> {
        self.check(x)?;
        self.check(h)?;
        let v = circular(x.values(), h.values()).into_iter().map(|v| 2.0 * v).collect();
        Ok(GridFunction::raw(x.grid(), Space::L2, v))
    }

    fn adjoint(&self, x: &GridFunction, r: &GridFunction) -> Result<GridFunction> {
        self.check(x)?;
        self.check(r)?;
        let v = circular_t(x.values(), r.values()).into_iter().map(|v| 2.0 * v).collect();
        Ok(GridFunction::raw(x.grid(), Space::L2, v))
    }

    fn domain_check(&self, x: &GridFunction) -> DomainStatus {
        if x.is_finite() {
            DomainStatus::Inside
        } else {
            DomainStatus::Outside("non-finite values".into())
        }
    }

    fn benchmark(&self) -> &Benchmark {
        &self.bench
    }

    /// Central differences are exact for a quadratic map up to roundoff.
    fn fd_tolerance(&self) -> f64 {
        1e-12
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_squares() {
        let g = Grid::periodic(60).unwrap();
        let x = GridFunction::constant(g, Space::L2, 3.0).unwrap();
        let y = autoconv_apply(&x).unwrap();
        assert!(y.values().iter().all(|v| (v - 9.0).abs() < 1e-12));
    }

    #[test]
    fn cosine_halves() {
        let g = Grid::periodic(60).unwrap();
        let x = GridFunction::from_fn(g, Space::L2, |s| (2.0 * PI * s).cos()).unwrap();
        let y = autoconv_apply(&x).unwrap();
        for (s, v) in g.points().iter().zip(y.values()) {
            assert!((v - 0.5 * (2.0 * PI * s).cos()).abs() < 1e-12);
        }
    }

    #[test]
    fn nodal_grid_rejected() {
        let x = GridFunction::constant(Grid::nodal(4).unwrap(), Space::L2, 1.0).unwrap();
        assert!(autoconv_apply(&x).is_err());
    }
}
