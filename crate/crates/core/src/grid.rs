//! Uniform grids on `[0, 1]`, grid functions and their L² / H¹ pairings.
//!
//! A [`GridFunction`] stores nodal samples together with the Hilbert space it
//! lives in. L² pairings use the composite trapezoid rule on nodal grids and the
//! rectangle rule on periodic grids. H¹ pairings use the exact Gram matrix of
//! piecewise-linear hat functions, `M + S` (mass plus stiffness).

use crate::error::{Error, Result};
use crate::tridiag::SymTridiagonal;

/// Sample layout of a uniform grid with `n` cells.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Layout {
    /// `n + 1` samples at `s_i = i / n`, endpoints included.
    Nodal,
    /// `n` samples of a 1-periodic function, one per cell of the periodic
    /// partition `[(i - 1/2)/n, (i + 1/2)/n)`, taken at the cell midpoint
    /// `s_i = i / n`.
    Periodic,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Grid {
    n: usize,
    layout: Layout,
}

impl Grid {
    pub fn new(n: usize, layout: Layout) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidArgument("grid needs at least one cell".into()));
        }
        Ok(Self { n, layout })
    }

    pub fn nodal(n: usize) -> Result<Self> {
        Self::new(n, Layout::Nodal)
    }

    pub fn periodic(n: usize) -> Result<Self> {
        Self::new(n, Layout::Periodic)
    }

    /// Number of cells.
    pub fn cells(&self) -> usize {
        self.n
    }

    pub fn layout(&self) -> Layout {
        self.layout
    }

    /// Mesh width `1 / n`.
    pub fn h(&self) -> f64 {
        1.0 / self.n as f64
    }

    /// Number of stored samples.
    pub fn len(&self) -> usize {
        match self.layout {
            Layout::Nodal => self.n + 1,
            Layout::Periodic => self.n,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Sample positions.
    pub fn points(&self) -> Vec<f64> {
        (0..self.len()).map(|i| i as f64 / self.n as f64).collect()
    }

    /// Quadrature weights of the L² pairing.
    pub fn l2_weights(&self) -> Vec<f64> {
        let h = self.h();
        match self.layout {
            Layout::Nodal => {
                let mut w = vec![h; self.n + 1];
                w[0] = 0.5 * h;
                w[self.n] = 0.5 * h;
                w
            }
            Layout::Periodic => vec![h; self.n],
        }
    }

    /// Gram matrix `M + S` of the hat-function basis in H¹(0,1).
    pub fn h1_gram(&self) -> Result<SymTridiagonal> {
        if self.layout != Layout::Nodal {
            return Err(Error::InvalidArgument(
                "H1 pairing needs a nodal grid".into(),
            ));
        }
        let h = self.h();
        let n = self.n;
        let mut diag = vec![2.0 * h / 3.0 + 2.0 / h; n + 1];
        diag[0] = h / 3.0 + 1.0 / h;
        diag[n] = h / 3.0 + 1.0 / h;
        let off = vec![h / 6.0 - 1.0 / h; n];
        Ok(SymTridiagonal::new(diag, off))
    }
}

/// Hilbert space tag carried by a [`GridFunction`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Space {
    L2,
    H1,
}

impl std::fmt::Display for Space {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Space::L2 => write!(f, "L2"),
            Space::H1 => write!(f, "H1"),
        }
    }
}

/// Samples of a function on a uniform grid, tagged with its space.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction {
    grid: Grid,
    space: Space,
    values: Vec<f64>,
}

impl GridFunction {
    /// Checked constructor: length must match the layout and values must be finite.
    pub fn new(grid: Grid, space: Space, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::GridMismatch(format!(
                "{} values for a grid with {} samples",
                values.len(),
                grid.len()
            )));
        }
        if let Some(index) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        if space == Space::H1 && grid.layout() != Layout::Nodal {
            return Err(Error::InvalidArgument(
                "H1 functions need a nodal grid".into(),
            ));
        }
        Ok(Self { grid, space, values })
    }

    /// Unchecked constructor for arithmetic results; finiteness is the caller's concern.
    pub(crate) fn raw(grid: Grid, space: Space, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), grid.len());
        Self { grid, space, values }
    }

    pub fn from_fn(grid: Grid, space: Space, f: impl Fn(f64) -> f64) -> Result<Self> {
        Self::new(grid, space, grid.points().into_iter().map(f).collect())
    }

    pub fn constant(grid: Grid, space: Space, c: f64) -> Result<Self> {
        Self::new(grid, space, vec![c; grid.len()])
    }

    pub fn zeros(grid: Grid, space: Space) -> Self {
        Self::raw(grid, space, vec![0.0; grid.len()])
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    /// Same samples, different space tag.
    pub fn with_space(mut self, space: Space) -> Result<Self> {
        if space == Space::H1 && self.grid.layout() != Layout::Nodal {
            return Err(Error::InvalidArgument(
                "H1 functions need a nodal grid".into(),
            ));
        }
        self.space = space;
        Ok(self)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self::raw(self.grid, self.space, self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn scaled(&self, a: f64) -> Self {
        self.map(|v| a * v)
    }

    /// `self + a * other`.
    pub fn add_scaled(&self, a: f64, other: &Self) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self::raw(
            self.grid,
            self.space,
            self.values
                .iter()
                .zip(&other.values)
                .map(|(x, y)| x + a * y)
                .collect(),
        )
    }

    pub fn sub(&self, other: &Self) -> Self {
        self.add_scaled(-1.0, other)
    }

    pub fn add(&self, other: &Self) -> Self {
        self.add_scaled(1.0, other)
    }

    pub fn max_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_value(&self) -> f64 {
        self.values.iter().cloned().fold(f64::INFINITY, f64::min)
    }
}

fn check_pair(u: &GridFunction, v: &GridFunction, space: Space) -> Result<()> {
    if u.grid != v.grid {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", u.grid, v.grid)));
    }
    for w in [u, v] {
        if w.space != space {
            return Err(Error::SpaceMismatch {
                expected: space.to_string(),
                found: w.space.to_string(),
            });
        }
        if let Some(index) = w.values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
    }
    Ok(())
}

fn l2_sum(grid: Grid, u: &[f64], v: &[f64]) -> f64 {
    let h = grid.h();
    let s: f64 = u.iter().zip(v).map(|(a, b)| a * b).sum();
    match grid.layout() {
        Layout::Nodal => {
            let n = grid.cells();
            h * (s - 0.5 * (u[0] * v[0] + u[n] * v[n]))
        }
        Layout::Periodic => h * s,
    }
}

/// Quadrature approximation of `∫₀¹ u v` (trapezoid on nodal grids, rectangle on periodic ones).
pub fn l2_inner(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    check_pair(u, v, Space::L2)?;
    Ok(l2_sum(u.grid, &u.values, &v.values))
}

fn h1_sum(grid: Grid, u: &[f64], v: &[f64]) -> f64 {
    // vᵀ(M + S)u, assembled element by element
    let h = grid.h();
    let mut s = 0.0;
    for e in 0..grid.cells() {
        let (u0, u1, v0, v1) = (u[e], u[e + 1], v[e], v[e + 1]);
        let mass = h / 6.0 * (2.0 * u0 * v0 + u0 * v1 + u1 * v0 + 2.0 * u1 * v1);
        let stiff = (u1 - u0) * (v1 - v0) / h;
        s += mass + stiff;
    }
    s
}

/// `∫₀¹ u v + ∫₀¹ u′ v′` for piecewise-linear interpolants on a nodal grid.
pub fn h1_inner(u: &GridFunction, v: &GridFunction) -> Result<f64> {
    if u.grid.layout() != Layout::Nodal || v.grid.layout() != Layout::Nodal {
        return Err(Error::InvalidArgument(
            "H1 pairing needs a nodal grid".into(),
        ));
    }
    check_pair(u, v, Space::H1)?;
    Ok(h1_sum(u.grid, &u.values, &v.values))
}

/// Inner-product structure of one space on one grid.
#[derive(Debug, Clone)]
pub struct InnerProductSpec {
    grid: Grid,
    space: Space,
    gram: Option<SymTridiagonal>,
}

impl InnerProductSpec {
    pub fn l2(grid: Grid) -> Self {
        Self {
            grid,
            space: Space::L2,
            gram: None,
        }
    }

    pub fn h1(grid: Grid) -> Result<Self> {
        Ok(Self {
            grid,
            space: Space::H1,
            gram: Some(grid.h1_gram()?),
        })
    }

    pub fn new(grid: Grid, space: Space) -> Result<Self> {
        match space {
            Space::L2 => Ok(Self::l2(grid)),
            Space::H1 => Self::h1(grid),
        }
    }

    pub fn grid(&self) -> Grid {
        self.grid
    }

    pub fn space(&self) -> Space {
        self.space
    }

    pub fn inner(&self, u: &GridFunction, v: &GridFunction) -> Result<f64> {
        if u.grid != self.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs space grid {:?}",
                u.grid, self.grid
            )));
        }
        match self.space {
            Space::L2 => l2_inner(u, v),
            Space::H1 => h1_inner(u, v),
        }
    }

    pub fn norm(&self, u: &GridFunction) -> Result<f64> {
        Ok(self.inner(u, u)?.max(0.0).sqrt())
    }

    /// Inner product without tag or finiteness checks, for hot loops whose inputs
    /// were already validated.
    pub(crate) fn inner_unchecked(&self, u: &[f64], v: &[f64]) -> f64 {
        match self.space {
            Space::L2 => l2_sum(self.grid, u, v),
            Space::H1 => h1_sum(self.grid, u, v),
        }
    }

    pub(crate) fn norm_unchecked(&self, u: &[f64]) -> f64 {
        self.inner_unchecked(u, u).max(0.0).sqrt()
    }

    /// Riesz representative of a linear functional given by its action on the
    /// sample basis: returns `w` with `⟨w, e_j⟩ = functional[j]` for every basis
    /// vector `e_j`, i.e. solves `G w = functional` for the space's Gram matrix `G`.
    pub fn riesz(&self, functional: Vec<f64>) -> Result<GridFunction> {
        if functional.len() != self.grid.len() {
            return Err(Error::GridMismatch(format!(
                "functional of length {} on a grid with {} samples",
                functional.len(),
                self.grid.len()
            )));
        }
        let values = match &self.gram {
            Some(g) => g.solve(&functional)?,
            None => functional
                .iter()
                .zip(self.grid.l2_weights())
                .map(|(f, w)| f / w)
                .collect(),
        };
        Ok(GridFunction::raw(self.grid, self.space, values))
    }

    /// Maps an L² representative `r` to the `w` in this space with
    /// `⟨w, v⟩_X = ⟨r, v⟩_{L²}` for all grid functions `v`.
    pub fn gram_solve(&self, r: &GridFunction) -> Result<GridFunction> {
        if r.grid != self.grid {
            return Err(Error::GridMismatch(format!(
                "{:?} vs space grid {:?}",
                r.grid, self.grid
            )));
        }
        if self.space != Space::H1 {
            return Err(Error::InvalidArgument(
                "gram_solve maps into H1; the space is L2".into(),
            ));
        }
        if let Some(index) = r.values.iter().position(|x| !x.is_finite()) {
            return Err(Error::NonFinite { index });
        }
        let functional: Vec<f64> = r
            .values
            .iter()
            .zip(self.grid.l2_weights())
            .map(|(v, w)| v * w)
            .collect();
        self.riesz(functional)
    }
}
