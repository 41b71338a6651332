//! Dense singular value decomposition of a linearized forward operator.

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{GridFunction, InnerProductSpec, Space};
use crate::operator::NonlinearProblem;
use crate::par::{self, Execution};

use super::spectral::SingularSystem;

/// Largest grid for which the Jacobian is assembled densely.
pub const MAX_DENSE_DIM: usize = 513;

/// Singular values at or below this fraction of `σ_max` are dropped.
pub const RANK_TOL: f64 = 1e-10;

/// Singular triples `(σᵢ, uᵢ, vᵢ)` of `F′(x)` with `uᵢ` orthonormal in X and
/// `vᵢ` orthonormal in Y.
#[derive(Debug, Clone)]
pub struct JacobianSvd {
    pub sigma: Vec<f64>,
    /// Columns are `uᵢ`.
    pub u: DMatrix<f64>,
    /// Columns are `vᵢ`.
    pub v: DMatrix<f64>,
    x_space: InnerProductSpec,
    y_space: InnerProductSpec,
}

fn gram(space: &InnerProductSpec) -> Result<DMatrix<f64>> {
    let grid = space.grid();
    let n = grid.len();
    Ok(match space.space() {
        Space::L2 => DMatrix::from_diagonal(&DVector::from_vec(grid.l2_weights())),
        Space::H1 => {
            let t = grid.h1_gram()?;
            let mut g = DMatrix::zeros(n, n);
            for i in 0..n {
                g[(i, i)] = t.diag[i];
            }
            for (i, &o) in t.off.iter().enumerate() {
                g[(i, i + 1)] = o;
                g[(i + 1, i)] = o;
            }
            g
        }
    })
}

fn cholesky_factor(space: &InnerProductSpec) -> Result<DMatrix<f64>> {
    Cholesky::new(gram(space)?)
        .map(|c| c.l())
        .ok_or_else(|| Error::Singular("Gram matrix is not positive definite".into()))
}

impl JacobianSvd {
    pub fn x_space(&self) -> &InnerProductSpec {
        &self.x_space
    }

    pub fn y_space(&self) -> &InnerProductSpec {
        &self.y_space
    }

    pub fn rank(&self) -> usize {
        self.sigma.len()
    }

    pub fn condition_number(&self) -> f64 {
        self.sigma[0] / self.sigma[self.rank() - 1]
    }

    fn coefficients(space: &InnerProductSpec, basis: &DMatrix<f64>, f: &GridFunction) -> Result<Vec<f64>> {
        if f.grid() != space.grid() {
            return Err(Error::GridMismatch("coefficient input grid".into()));
        }
        Ok((0..basis.ncols())
            .map(|i| {
                let col: Vec<f64> = basis.column(i).iter().copied().collect();
                space.inner_unchecked(&col, f.values())
            })
            .collect())
    }

    /// `⟨f, uᵢ⟩_X` for every retained index.
    pub fn x_coefficients(&self, f: &GridFunction) -> Result<Vec<f64>> {
        Self::coefficients(&self.x_space, &self.u, f)
    }

    /// `⟨g, vᵢ⟩_Y` for every retained index.
    pub fn y_coefficients(&self, g: &GridFunction) -> Result<Vec<f64>> {
        Self::coefficients(&self.y_space, &self.v, g)
    }

    /// Singular system with the coefficients of a data error and a solution.
    pub fn singular_system(&self, data_error: &GridFunction, solution: &GridFunction) -> Result<SingularSystem> {
        SingularSystem::new(
            self.sigma.clone(),
            self.y_coefficients(data_error)?,
            self.x_coefficients(solution)?,
            None,
        )
    }
}

/// Gram-weighted SVD of a dense matrix `J` mapping coefficients in `x_space`
/// to coefficients in `y_space`.
///
/// With Cholesky factors `G_X = L_X L_Xᵀ` and `G_Y = L_Y L_Yᵀ`, the SVD of
/// `L_Yᵀ J L_X⁻ᵀ` yields the singular values; right vectors are mapped back by
/// `L_X⁻ᵀ` and left vectors are `J uᵢ / σᵢ`.
pub fn weighted_svd(j: DMatrix<f64>, x_space: &InnerProductSpec, y_space: &InnerProductSpec) -> Result<JacobianSvd> {
    let lx = cholesky_factor(x_space)?;
    let ly = cholesky_factor(y_space)?;
    let lx_t = lx.transpose();
    // B = L_Yᵀ J L_X⁻ᵀ, via Bᵀ = L_X⁻¹ Jᵀ L_Y
    let bt = lx
        .solve_lower_triangular(&(j.transpose() * &ly))
        .ok_or_else(|| Error::Singular("X Gram factor".into()))?;
    let svd = bt.transpose().svd(false, true);
    let Some(zt) = svd.v_t else {
        return Err(Error::Singular("SVD did not converge".into()));
    };
    let mut order: Vec<usize> = (0..svd.singular_values.len()).collect();
    order.sort_by(|&a, &b| svd.singular_values[b].total_cmp(&svd.singular_values[a]));
    let smax = svd.singular_values[order[0]];
    if !(smax > 0.0) {
        return Err(Error::Singular("zero operator".into()));
    }
    let keep: Vec<usize> = order
        .into_iter()
        .filter(|&i| svd.singular_values[i] > RANK_TOL * smax)
        .collect();
    let sigma: Vec<f64> = keep.iter().map(|&i| svd.singular_values[i]).collect();
    let z = zt.transpose();
    let u_tilde = DMatrix::from_columns(&keep.iter().map(|&i| z.column(i)).collect::<Vec<_>>());
    let u = lx_t
        .solve_upper_triangular(&u_tilde)
        .ok_or_else(|| Error::Singular("X Gram factor".into()))?;
    // left vectors from the right ones; the SVD's own left factor loses
    // accuracy when J is far from full rank
    let mut v = &j * &u;
    for (mut col, s) in v.column_iter_mut().zip(&sigma) {
        col /= *s;
    }
    Ok(JacobianSvd { sigma, u, v, x_space: x_space.clone(), y_space: y_space.clone() })
}

/// Assembles `F′(x)` column by column and returns its Gram-weighted SVD.
///
/// Singular values below `RANK_TOL·σ_max` are dropped, so the result has the
/// numerical rank of the Jacobian.
pub fn jacobian_svd(p: &dyn NonlinearProblem, x: &GridFunction, mode: Execution) -> Result<JacobianSvd> {
    let xs = p.domain();
    let ys = p.range();
    let n = xs.grid().len();
    let m = ys.grid().len();
    if n > MAX_DENSE_DIM || m > MAX_DENSE_DIM {
        return Err(Error::InvalidArgument(format!(
            "dense Jacobian of size {m}x{n} exceeds the limit of {MAX_DENSE_DIM}"
        )));
    }
    if !p.domain_check(x).is_inside() {
        return Err(Error::DomainViolation("linearization point outside the domain".into()));
    }
    let columns = par::map_range(mode, n, |j| {
        let mut e = GridFunction::zeros(xs.grid(), xs.space());
        e.values_mut()[j] = 1.0;
        p.derivative(x, &e).map(GridFunction::into_values)
    });
    let mut jac = DMatrix::zeros(m, n);
    for (j, col) in columns.into_iter().enumerate() {
        for (i, v) in col?.into_iter().enumerate() {
            jac[(i, j)] = v;
        }
    }
    weighted_svd(jac, xs, ys)
}
