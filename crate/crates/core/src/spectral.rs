//! Discretized Mercer decomposition of a covariance operator.
//!
//! The operator `f -> int K(., u) f(u) du` is discretized with the grid's
//! trapezoid weights `D`. Eigenpairs of the symmetric matrix
//! `D^{1/2} G D^{1/2}` give eigenvalues `lambda_k` and, after scaling by
//! `D^{-1/2}`, eigenfunctions orthonormal in the quadrature inner product.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::{check_same_grid, Grid, GridFunction};
use crate::kernels::{gram, KernelSpec};
use crate::Scalar;

/// Default relative clip threshold for eigenvalues.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-10;

/// Eigenvalues (descending) and grid-sampled eigenfunctions of a discretized
/// covariance operator.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralBasis<T: Scalar> {
    grid: Arc<Grid<T>>,
    eigenvalues: Vec<T>,
    /// `n x m`, column `j` holds `phi_j` at the grid points.
    eigenfunctions: DMatrix<T>,
    truncation_tol: T,
    /// `K(t_i, t_i)`, kept for tail-variance reporting.
    kernel_diagonal: Vec<T>,
}

impl<T: Scalar> SpectralBasis<T> {
    /// Builds a basis from explicit eigen data, checking the invariants.
    pub fn from_parts(
        grid: Arc<Grid<T>>,
        eigenvalues: Vec<T>,
        eigenfunctions: Vec<GridFunction<T>>,
    ) -> Result<Self> {
        if eigenvalues.is_empty() {
            return Err(Error::EmptyBasis);
        }
        if eigenvalues.len() != eigenfunctions.len() {
            return Err(Error::LengthMismatch { expected: eigenvalues.len(), got: eigenfunctions.len() });
        }
        if eigenvalues.windows(2).any(|w| w[1] > w[0]) || !(eigenvalues[eigenvalues.len() - 1] > T::zero()) {
            return Err(Error::InvalidArgument("eigenvalues must be positive and descending".into()));
        }
        let n = grid.len();
        let m = eigenvalues.len();
        let mut phi = DMatrix::zeros(n, m);
        for (j, f) in eigenfunctions.iter().enumerate() {
            check_same_grid(&grid, f.grid())?;
            phi.set_column(j, &DVector::from_column_slice(f.values()));
        }
        let weights = grid.weights();
        let tol = T::check_tol(1e-8);
        for a in 0..m {
            for b in 0..=a {
                let ip = (0..n).fold(T::zero(), |acc, i| acc + weights[i] * phi[(i, a)] * phi[(i, b)]);
                let target = if a == b { T::one() } else { T::zero() };
                if (ip - target).abs() > tol {
                    return Err(Error::InvalidArgument(format!(
                        "eigenfunctions {a} and {b} are not orthonormal (inner product {ip})"
                    )));
                }
            }
        }
        let kernel_diagonal = (0..n)
            .map(|i| (0..m).fold(T::zero(), |acc, j| acc + eigenvalues[j] * phi[(i, j)] * phi[(i, j)]))
            .collect();
        Ok(Self { grid, eigenvalues, eigenfunctions: phi, truncation_tol: T::zero(), kernel_diagonal })
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }

    pub fn eigenvalues(&self) -> &[T] {
        &self.eigenvalues
    }

    pub fn eigenfunction_matrix(&self) -> &DMatrix<T> {
        &self.eigenfunctions
    }

    pub fn eigenfunction(&self, j: usize) -> GridFunction<T> {
        GridFunction::new(self.grid.clone(), self.eigenfunctions.column(j).iter().copied().collect())
            .expect("column length equals grid size")
    }

    pub fn truncation_tol(&self) -> T {
        self.truncation_tol
    }

    pub fn kernel_diagonal(&self) -> &[T] {
        &self.kernel_diagonal
    }

    /// Keeps the leading `m` eigenpairs.
    pub fn truncated(&self, m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::EmptyBasis);
        }
        let m = m.min(self.len());
        Ok(Self {
            grid: self.grid.clone(),
            eigenvalues: self.eigenvalues[..m].to_vec(),
            eigenfunctions: self.eigenfunctions.columns(0, m).into_owned(),
            truncation_tol: self.truncation_tol,
            kernel_diagonal: self.kernel_diagonal.clone(),
        })
    }

    /// Quadrature trace `sum_i w_i K(t_i, t_i)` minus the retained
    /// eigenvalue mass.
    pub fn clipped_mass(&self) -> T {
        let trace = crate::grid::weighted_dot(self.grid.weights(), &self.kernel_diagonal, &vec![T::one(); self.grid.len()]);
        let kept = self.eigenvalues.iter().fold(T::zero(), |a, &l| a + l);
        trace - kept
    }

    /// `K(t_i, t_i) - sum_j lambda_j phi_j(t_i)^2`: variance lost to
    /// truncation at grid point `i`.
    pub fn tail_variance(&self, i: usize) -> T {
        let kept = (0..self.len()).fold(T::zero(), |acc, j| {
            let p = self.eigenfunctions[(i, j)];
            acc + self.eigenvalues[j] * p * p
        });
        self.kernel_diagonal[i] - kept
    }

    /// Same eigen data on the same grid.
    pub fn same_as(&self, other: &Self) -> bool {
        std::ptr::eq(self, other)
            || (self.grid.same_as(&other.grid)
                && self.eigenvalues == other.eigenvalues
                && self.eigenfunctions == other.eigenfunctions)
    }
}

/// Eigen-decomposes `W^{1/2} G W^{1/2}` for a symmetric `G` and positive
/// weights `W`.
///
/// Returns eigenvalues above `truncation_tol * lambda_1` in descending order
/// and the matching `W`-orthonormal eigenvectors as columns, signs fixed so
/// the first clearly nonzero entry of each is positive.
pub fn eig_weighted<T: Scalar>(g: &DMatrix<T>, weights: &[T], truncation_tol: T) -> Result<(Vec<T>, DMatrix<T>)> {
    let n = g.nrows();
    if g.ncols() != n || weights.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: weights.len() });
    }
    if truncation_tol < T::zero() {
        return Err(Error::InvalidArgument("truncation tolerance must be >= 0".into()));
    }
    let sqrt_w: Vec<T> = weights.iter().map(|w| w.sqrt()).collect();
    let b = DMatrix::from_fn(n, n, |i, j| sqrt_w[i] * g[(i, j)] * sqrt_w[j]);
    let eig = b.symmetric_eigen();

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| {
        eig.eigenvalues[b].partial_cmp(&eig.eigenvalues[a]).unwrap_or(std::cmp::Ordering::Equal).then(a.cmp(&b))
    });
    let top = eig.eigenvalues[order[0]];
    if !(top > T::zero()) {
        return Err(Error::EmptyBasis);
    }
    let cutoff = truncation_tol * top;
    let kept: Vec<usize> = order.into_iter().filter(|&k| eig.eigenvalues[k] > cutoff && eig.eigenvalues[k] > T::zero()).collect();

    let mut phi = DMatrix::zeros(n, kept.len());
    for (col, &k) in kept.iter().enumerate() {
        let u = eig.eigenvectors.column(k);
        let mut v: Vec<T> = (0..n).map(|i| u[i] / sqrt_w[i]).collect();
        let norm2 = (0..n).fold(T::zero(), |acc, i| acc + weights[i] * v[i] * v[i]);
        let scale = T::one() / norm2.sqrt();
        let max = v.iter().fold(T::zero(), |m, x| m.max(x.abs()));
        let lead = v.iter().copied().find(|x| x.abs() > T::lit(1e-8) * max).unwrap_or(T::one());
        let sign = if lead < T::zero() { -T::one() } else { T::one() };
        for x in v.iter_mut() {
            *x *= scale * sign;
        }
        phi.set_column(col, &DVector::from_vec(v));
    }
    Ok((kept.iter().map(|&k| eig.eigenvalues[k]).collect(), phi))
}

/// Spectral basis of the kernel's covariance operator on `grid`.
pub fn eig_basis<T: Scalar>(spec: &KernelSpec<T>, grid: &Arc<Grid<T>>, truncation_tol: T) -> Result<SpectralBasis<T>> {
    let g = gram(spec, grid)?;
    basis_from_gram(&g, grid, truncation_tol)
}

/// Spectral basis from a precomputed Gram matrix on `grid`.
pub fn basis_from_gram<T: Scalar>(g: &DMatrix<T>, grid: &Arc<Grid<T>>, truncation_tol: T) -> Result<SpectralBasis<T>> {
    let (eigenvalues, eigenfunctions) = eig_weighted(g, grid.weights(), truncation_tol)?;
    if eigenvalues.is_empty() {
        return Err(Error::EmptyBasis);
    }
    Ok(SpectralBasis {
        grid: grid.clone(),
        eigenvalues,
        eigenfunctions,
        truncation_tol,
        kernel_diagonal: g.diagonal().iter().copied().collect(),
    })
}

/// Coefficients `w_j = <f, phi_j>` in the quadrature inner product.
pub fn project<T: Scalar>(f: &GridFunction<T>, basis: &SpectralBasis<T>) -> Result<Vec<T>> {
    check_same_grid(f.grid(), &basis.grid)?;
    let weighted = DVector::from_iterator(
        f.len(),
        f.values().iter().zip(basis.grid.weights()).map(|(&v, &w)| v * w),
    );
    Ok(basis.eigenfunctions.tr_mul(&weighted).iter().copied().collect())
}

/// `sum_j w_j phi_j`; `w` may be shorter than the basis.
pub fn reconstruct<T: Scalar>(w: &[T], basis: &SpectralBasis<T>) -> Result<GridFunction<T>> {
    if w.len() > basis.len() {
        return Err(Error::LengthMismatch { expected: basis.len(), got: w.len() });
    }
    let cols = basis.eigenfunctions.columns(0, w.len());
    let values = cols * DVector::from_column_slice(w);
    GridFunction::new(basis.grid.clone(), values.iter().copied().collect())
}
