//! Diffusion-coefficient estimation: `a ↦ u(a)` where
//! `−(a u′)′ = f` on (0,1), `u(0) = u(1) = 0`.
//!
//! Piecewise-linear finite elements on a uniform nodal grid. The coefficient is
//! sampled at nodes and averaged arithmetically onto element midpoints, so the
//! stiffness matrix `K(a)` is linear in `a`. The load vector is `M f` with the
//! consistent mass matrix.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction, InnerProductSpec, Layout, Space};
use crate::operator::{Benchmark, DomainStatus, NonlinearProblem};
use crate::tridiag::SymTridiagonal;

use super::log_levels;

pub const DEFAULT_A_LOWER: f64 = 0.1;
pub const DEFAULT_FINE_FACTOR: usize = 4;

fn midpoints(a: &[f64]) -> Vec<f64> {
    a.windows(2).map(|w| 0.5 * (w[0] + w[1])).collect()
}

/// Stiffness matrix restricted to interior nodes.
fn stiffness(grid: Grid, a: &[f64]) -> SymTridiagonal {
    let n = grid.cells();
    let inv_h = 1.0 / grid.h();
    let am = midpoints(a);
    let diag = (1..n).map(|i| (am[i - 1] + am[i]) * inv_h).collect();
    let off = (1..n.saturating_sub(1)).map(|i| -am[i] * inv_h).collect();
    SymTridiagonal::new(diag, off)
}

/// Interior entries of `K(c) u` for a nodal `u` with zero boundary values.
fn apply_stiffness(grid: Grid, c: &[f64], u: &[f64]) -> Vec<f64> {
    let n = grid.cells();
    let inv_h = 1.0 / grid.h();
    let cm = midpoints(c);
    (1..n)
        .map(|i| (cm[i - 1] * (u[i] - u[i - 1]) - cm[i] * (u[i + 1] - u[i])) * inv_h)
        .collect()
}

fn load_vector(grid: Grid, f: &[f64]) -> Vec<f64> {
    let h = grid.h();
    (1..grid.cells())
        .map(|i| h / 6.0 * (f[i - 1] + 4.0 * f[i] + f[i + 1]))
        .collect()
}

fn pad_boundary(interior: Vec<f64>) -> Vec<f64> {
    let mut v = Vec::with_capacity(interior.len() + 2);
    v.push(0.0);
    v.extend(interior);
    v.push(0.0);
    v
}

/// Solves `−(a u′)′ = f`, `u(0) = u(1) = 0` on the grid of `a`.
///
/// `a` must be strictly positive; the returned `u` is tagged L² and has zero
/// boundary samples.
pub fn diffusion_solve(a: &GridFunction, f: &GridFunction) -> Result<GridFunction> {
    let grid = a.grid();
    if grid.layout() != Layout::Nodal {
        return Err(Error::InvalidArgument("diffusion solve needs a nodal grid".into()));
    }
    if f.grid() != grid {
        return Err(Error::GridMismatch("load and coefficient grids differ".into()));
    }
    if grid.cells() < 2 {
        return Err(Error::InvalidArgument("diffusion solve needs at least 2 cells".into()));
    }
    if let Some(i) = a.values().iter().position(|v| !(*v > 0.0) || !v.is_finite()) {
        return Err(Error::DomainViolation(format!(
            "coefficient a = {} at node {i} is not positive",
            a.values()[i]
        )));
    }
    let k = stiffness(grid, a.values());
    let u = k.solve(&load_vector(grid, f.values()))?;
    Ok(GridFunction::raw(grid, Space::L2, pad_boundary(u)))
}

#[derive(Clone)]
pub struct DiffusionProblem {
    x_space: InnerProductSpec,
    y_space: InnerProductSpec,
    a_lower: f64,
    fine_factor: usize,
    load: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    f_coarse: GridFunction,
    bench: Benchmark,
}

impl std::fmt::Debug for DiffusionProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("DiffusionProblem")
            .field("grid", &self.x_space.grid())
            .field("a_lower", &self.a_lower)
            .field("fine_factor", &self.fine_factor)
            .finish()
    }
}

impl DiffusionProblem {
    /// Default setup: load `f ≡ 1`, data on a 4× finer grid, `a ≥ 0.1`.
    pub fn new(n: usize) -> Result<Self> {
        Self::with_load(n, DEFAULT_FINE_FACTOR, |_| 1.0)
    }

    pub fn with_load(
        n: usize,
        fine_factor: usize,
        load: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Result<Self> {
        if fine_factor == 0 {
            return Err(Error::InvalidArgument("fine_factor must be positive".into()));
        }
        let grid = Grid::nodal(n)?;
        let f_coarse = GridFunction::from_fn(grid, Space::L2, &load)?;
        let x_dagger = GridFunction::from_fn(grid, Space::H1, |s| 2.0 + s * (1.0 - s))?;
        let x0 = GridFunction::constant(grid, Space::H1, 2.1)?;
        Ok(Self {
            x_space: InnerProductSpec::h1(grid)?,
            y_space: InnerProductSpec::l2(grid),
            a_lower: DEFAULT_A_LOWER,
            fine_factor,
            load: Arc::new(load),
            f_coarse,
            bench: Benchmark {
                x_dagger,
                x0,
                default_n: 50,
                tau: 1.1,
                delta_rel_list: log_levels(1e-3, 1e-2, 8),
                kmax: 20_000,
            },
        })
    }

    pub fn a_lower(&self) -> f64 {
        self.a_lower
    }

    pub fn fine_factor(&self) -> usize {
        self.fine_factor
    }

    fn check(&self, a: &GridFunction) -> Result<()> {
        if a.grid() != self.x_space.grid() {
            return Err(Error::GridMismatch(format!(
                "{:?} vs problem grid {:?}",
                a.grid(),
                self.x_space.grid()
            )));
        }
        if let DomainStatus::Outside(why) = self.domain_check(a) {
            return Err(Error::DomainViolation(why));
        }
        Ok(())
    }

    /// `u(a)` with the stored load.
    pub fn forward(&self, a: &GridFunction) -> Result<GridFunction> {
        self.check(a)?;
        diffusion_solve(a, &self.f_coarse)
    }
}

impl NonlinearProblem for DiffusionProblem {
    fn name(&self) -> &str {
        "diffusion1d"
    }

    fn domain(&self) -> &InnerProductSpec {
        &self.x_space
    }

    fn range(&self) -> &InnerProductSpec {
        &self.y_space
    }

    fn apply(&self, a: &GridFunction) -> Result<GridFunction> {
        self.forward(a)
    }

    fn derivative(&self, a: &GridFunction, h: &GridFunction) -> Result<GridFunction> {
        self.check(a)?;
        if h.grid() != a.grid() {
            return Err(Error::GridMismatch("direction grid".into()));
        }
        let grid = a.grid();
        let u = diffusion_solve(a, &self.f_coarse)?;
        // K(a) w = −K(h) u(a)
        let rhs: Vec<f64> = apply_stiffness(grid, h.values(), u.values())
            .into_iter()
            .map(|v| -v)
            .collect();
        let w = stiffness(grid, a.values()).solve(&rhs)?;
        Ok(GridFunction::raw(grid, Space::L2, pad_boundary(w)))
    }

    fn adjoint(&self, a: &GridFunction, r: &GridFunction) -> Result<GridFunction> {
        self.check(a)?;
        if r.grid() != self.y_space.grid() {
            return Err(Error::GridMismatch("residual grid".into()));
        }
        let grid = a.grid();
        let n = grid.cells();
        let inv_h = 1.0 / grid.h();
        let u = diffusion_solve(a, &self.f_coarse)?;
        let weights = grid.l2_weights();
        let z: Vec<f64> = (1..n).map(|i| r.values()[i] * weights[i]).collect();
        let p = pad_boundary(stiffness(grid, a.values()).solve(&z)?);
        let u = u.values();
        // functional_j = −∂/∂h_j pᵀ K(h) u
        let mut functional = vec![0.0; n + 1];
        for e in 0..n {
            let g = 0.5 * (p[e + 1] - p[e]) * (u[e + 1] - u[e]) * inv_h;
            functional[e] -= g;
            functional[e + 1] -= g;
        }
        self.x_space.riesz(functional)
    }

    fn domain_check(&self, a: &GridFunction) -> DomainStatus {
        if !a.is_finite() {
            return DomainStatus::Outside("non-finite values".into());
        }
        let m = a.min_value();
        if m < self.a_lower {
            DomainStatus::Outside(format!("min a = {m:e} below {:e}", self.a_lower))
        } else {
            DomainStatus::Inside
        }
    }

    fn benchmark(&self) -> &Benchmark {
        &self.bench
    }

    /// Data computed on a `fine_factor`-times finer grid and injected at the
    /// coarse nodes.
    fn exact_data(&self) -> Result<GridFunction> {
        let coarse = self.x_space.grid();
        let fine = Grid::nodal(coarse.cells() * self.fine_factor)?;
        let a = GridFunction::from_fn(fine, Space::H1, |s| 2.0 + s * (1.0 - s))?;
        let f = GridFunction::from_fn(fine, Space::L2, self.load.as_ref())?;
        let u = diffusion_solve(&a, &f)?;
        let values = (0..coarse.len())
            .map(|i| u.values()[i * self.fine_factor])
            .collect();
        GridFunction::new(coarse, Space::L2, values)
    }
}
