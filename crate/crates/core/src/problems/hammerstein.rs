//! `F(x)(s) = ∫₀ˢ x(t)³ dt` from H¹(0,1) to L²(0,1).

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, InnerProductSpec, Layout, Space};
use crate::operator::{Benchmark, DomainStatus, NonlinearProblem};

use super::log_levels;

/// Smallest admissible value of `x`; the operator is only well behaved for
/// solutions bounded away from zero.
pub const HAMMERSTEIN_LOWER: f64 = 1e-3;

/// Cumulative trapezoid of `g`, starting from 0 at `s = 0`.
fn cumulative_trapezoid(h: f64, g: &[f64]) -> Vec<f64> {
    let mut out = Vec::with_capacity(g.len());
    let mut acc = 0.0;
    out.push(0.0);
    for w in g.windows(2) {
        acc += 0.5 * h * (w[0] + w[1]);
        out.push(acc);
    }
    out
}

/// Transpose of [`cumulative_trapezoid`].
fn cumulative_trapezoid_t(h: f64, z: &[f64]) -> Vec<f64> {
    let n = z.len() - 1;
    let mut out = vec![0.0; n + 1];
    // tail[j] = Σ_{i > j} z_i
    let mut tail = 0.0;
    for j in (0..=n).rev() {
        out[j] = if j == 0 {
            0.5 * h * tail
        } else {
            0.5 * h * z[j] + h * tail
        };
        tail += z[j];
    }
    out
}

/// Forward map on a nodal grid; the result is tagged L².
pub fn hammerstein_apply(x: &GridFunction) -> Result<GridFunction> {
    if x.grid().layout() != Layout::Nodal {
        return Err(Error::InvalidArgument("Hammerstein operator needs a nodal grid".into()));
    }
    let cubes: Vec<f64> = x.values().iter().map(|v| v * v * v).collect();
    GridFunction::new(x.grid(), Space::L2, cumulative_trapezoid(x.grid().h(), &cubes))
}

#[derive(Debug, Clone)]
pub struct HammersteinProblem {
    x_space: InnerProductSpec,
    y_space: InnerProductSpec,
    bench: Benchmark,
}

impl HammersteinProblem {
    pub fn new(n: usize) -> Result<Self> {
        let grid = Grid::nodal(n)?;
        let x_dagger = GridFunction::from_fn(grid, Space::H1, |s| 2.0 + (s - 0.5) / 10.0)?;
        let x0 = GridFunction::constant(grid, Space::H1, 1.0)?;
        Ok(Self {
            x_space: InnerProductSpec::h1(grid)?,
            y_space: InnerProductSpec::l2(grid),
            bench: Benchmark {
                x_dagger,
                x0,
                default_n: 128,
                tau: 2.0,
                delta_rel_list: log_levels(1e-3, 2e-2, 8),
                kmax: 100_000,
            },
        })
    }

    fn check(&self, x: &GridFunction) -> Result<()> {
        if x.grid() != self.x_space.grid() {
            return Err(Error::GridMismatch(format!(
                "{:?} vs problem grid {:?}",
                x.grid(),
                self.x_space.grid()
            )));
        }
        Ok(())
    }
}

impl NonlinearProblem for HammersteinProblem {
    fn name(&self) -> &str {
        "hammerstein"
    }

    fn domain(&self) -> &InnerProductSpec {
        &self.x_space
    }

    fn range(&self) -> &InnerProductSpec {
        &self.y_space
    }

    fn apply(&self, x: &GridFunction) -> Result<GridFunction> {
        self.check(x)?;
        hammerstein_apply(x)
    }

    fn derivative(&self, x: &GridFunction, h: &GridFunction) -> Result<GridFunction> {
        self.check(x)?;
        self.check(h)?;
        let g: Vec<f64> = x
            .values()
            .iter()
            .zip(h.values())
            .map(|(x, h)| 3.0 * x * x * h)
            .collect();
        Ok(GridFunction::raw(
            x.grid(),
            Space::L2,
            cumulative_trapezoid(x.grid().h(), &g),
        ))
    }

    fn adjoint(&self, x: &GridFunction, r: &GridFunction) -> Result<GridFunction> {
        self.check(x)?;
        if r.grid() != self.y_space.grid() {
            return Err(Error::GridMismatch("residual grid".into()));
        }
        let grid = x.grid();
        let z: Vec<f64> = r
            .values()
            .iter()
            .zip(grid.l2_weights())
            .map(|(r, w)| r * w)
            .collect();
        let functional: Vec<f64> = cumulative_trapezoid_t(grid.h(), &z)
            .into_iter()
            .zip(x.values())
            .map(|(c, x)| 3.0 * x * x * c)
            .collect();
        self.x_space.riesz(functional)
    }

    fn domain_check(&self, x: &GridFunction) -> DomainStatus {
        if !x.is_finite() {
            return DomainStatus::Outside("non-finite values".into());
        }
        let m = x.min_value();
        if m < HAMMERSTEIN_LOWER {
            DomainStatus::Outside(format!("min x = {m:e} below {HAMMERSTEIN_LOWER:e}"))
        } else {
            DomainStatus::Inside
        }
    }

    fn benchmark(&self) -> &Benchmark {
        &self.bench
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn transpose_is_exact() {
        let h = 0.1;
        let n = 7;
        for j in 0..=n {
            let mut e = vec![0.0; n + 1];
            e[j] = 1.0;
            let col = cumulative_trapezoid(h, &e);
            for i in 0..=n {
                let mut f = vec![0.0; n + 1];
                f[i] = 1.0;
                let row = cumulative_trapezoid_t(h, &f);
                assert!((col[i] - row[j]).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn constants_integrate_exactly() {
        let p = HammersteinProblem::new(128).unwrap();
        let g = p.domain().grid();
        let one = GridFunction::constant(g, Space::H1, 1.0).unwrap();
        let y = p.apply(&one).unwrap();
        for (s, v) in g.points().iter().zip(y.values()) {
            assert!((v - s).abs() < 1e-14);
        }
        let d = p.derivative(&one, &one).unwrap();
        for (s, v) in g.points().iter().zip(d.values()) {
            assert!((v - 3.0 * s).abs() < 1e-14);
        }
    }

    #[test]
    fn domain_guard() {
        let p = HammersteinProblem::new(8).unwrap();
        let g = p.domain().grid();
        let low = GridFunction::constant(g, Space::H1, 1e-4).unwrap();
        assert!(!p.domain_check(&low).is_inside());
    }
}
