//! RKHS elements and norms: the spectral series norm, closed-form norms of the
//! Brownian-motion family, pushforward under integration, direct sums and
//! the finite-dimensional case.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernels::KernelSpec;
use crate::quadrature::cumulative_trapezoid;
use crate::spectral::{project, reconstruct, SpectralBasis};
use crate::Scalar;

/// `sum_j w_j phi_j` in a spectral basis.
#[derive(Debug, Clone)]
pub struct RkhsElement<T: Scalar> {
    basis: Arc<SpectralBasis<T>>,
    coeffs: Vec<T>,
}

impl<T: Scalar> RkhsElement<T> {
    /// Shorter coefficient vectors are padded with zeros.
    pub fn new(basis: Arc<SpectralBasis<T>>, mut coeffs: Vec<T>) -> Result<Self> {
        if coeffs.len() > basis.len() {
            return Err(Error::LengthMismatch { expected: basis.len(), got: coeffs.len() });
        }
        if let Some(c) = coeffs.iter().find(|c| !c.is_finite()) {
            return Err(Error::InvalidArgument(format!("non-finite coefficient {c}")));
        }
        coeffs.resize(basis.len(), T::zero());
        Ok(Self { basis, coeffs })
    }

    pub fn zero(basis: Arc<SpectralBasis<T>>) -> Self {
        let coeffs = vec![T::zero(); basis.len()];
        Self { basis, coeffs }
    }

    /// Projection of a grid function onto the basis.
    pub fn from_function(f: &GridFunction<T>, basis: Arc<SpectralBasis<T>>) -> Result<Self> {
        let coeffs = project(f, &basis)?;
        Ok(Self { basis, coeffs })
    }

    pub fn basis(&self) -> &Arc<SpectralBasis<T>> {
        &self.basis
    }

    pub fn coeffs(&self) -> &[T] {
        &self.coeffs
    }

    /// Coordinates in the RKHS-orthonormal basis `sqrt(lambda_j) phi_j`.
    pub fn orthonormal_coords(&self) -> Vec<T> {
        self.coeffs.iter().zip(self.basis.eigenvalues()).map(|(&w, &l)| w / l.sqrt()).collect()
    }

    pub fn to_function(&self) -> GridFunction<T> {
        reconstruct(&self.coeffs, &self.basis).expect("coefficients match basis length")
    }

    /// Keeps the first `m` coefficients and zeroes the rest.
    pub fn truncated(&self, m: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        for c in coeffs.iter_mut().skip(m) {
            *c = T::zero();
        }
        Self { basis: self.basis.clone(), coeffs }
    }

    pub(crate) fn shares_basis(&self, other: &SpectralBasis<T>) -> bool {
        std::ptr::eq(Arc::as_ptr(&self.basis), other) || self.basis.same_as(other)
    }
}

/// `<v, w>_H = sum_j v_j w_j / lambda_j`.
pub fn rkhs_inner_series<T: Scalar>(v: &RkhsElement<T>, w: &RkhsElement<T>) -> Result<T> {
    if !v.shares_basis(&w.basis) {
        return Err(Error::BasisMismatch);
    }
    Ok(v.coeffs
        .iter()
        .zip(&w.coeffs)
        .zip(v.basis.eigenvalues())
        .fold(T::zero(), |acc, ((&a, &b), &l)| acc + a * b / l))
}

pub fn rkhs_norm_series<T: Scalar>(e: &RkhsElement<T>) -> T {
    e.coeffs
        .iter()
        .zip(e.basis.eigenvalues())
        .fold(T::zero(), |acc, (&w, &l)| acc + w * w / l)
        .sqrt()
}

fn forward_difference_energy<T: Scalar>(values: &[T], h: T) -> T {
    values.windows(2).fold(T::zero(), |acc, p| {
        let d = (p[1] - p[0]) / h;
        acc + h * d * d
    })
}

fn not_in_bm_rkhs<T: Scalar>(f0: T) -> Error {
    Error::NotInRkhs(format!("f(0) = {f0:e} but Brownian-motion RKHS functions vanish at 0"))
}

/// `sqrt(int f'^2)` for Brownian motion, by forward differences.
///
/// Functions with `f(0) != 0` are outside the RKHS and yield
/// [`Error::NotInRkhs`].
pub fn rkhs_norm_bm<T: Scalar>(f: &GridFunction<T>) -> Result<T> {
    let f0 = f.values()[0];
    if f0.abs() > T::check_tol(1e-8) {
        return Err(not_in_bm_rkhs(f0));
    }
    Ok(forward_difference_energy(f.values(), f.grid().spacing()).sqrt())
}

/// `sqrt(f(0)^2 + int f'^2)` for Brownian motion released at zero.
pub fn rkhs_norm_released<T: Scalar>(f: &GridFunction<T>) -> T {
    let f0 = f.values()[0];
    (f0 * f0 + forward_difference_energy(f.values(), f.grid().spacing())).sqrt()
}

/// `f^(i)(0)` for `i <= k` from the interpolating polynomial of degree `k + 2`
/// through the first grid points.
fn derivatives_at_zero<T: Scalar>(v: &[T], h: T, k: u32) -> Result<Vec<T>> {
    let p = k as usize + 3;
    let vander = DMatrix::from_fn(p, p, |r, c| T::from_usize_lossy(r).powi(c as i32));
    let rhs = DVector::from_column_slice(&v[..p]);
    let a = vander
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::NotConverged("singular interpolation system".into()))?;
    let mut fact = T::one();
    Ok((0..=k as usize)
        .map(|i| {
            if i > 0 {
                fact *= T::from_usize_lossy(i);
            }
            a[i] * fact / h.powi(i as i32)
        })
        .collect())
}

/// `int (f^(k+1))^2` by `k + 1` iterated central differences. Each pass
/// loses one point at either end; the uncovered end pieces take the nearest
/// computed value.
fn top_derivative_energy<T: Scalar>(v: &[T], h: T, k: u32) -> T {
    let n = v.len();
    let two_h = h + h;
    let mut d = v.to_vec();
    let (mut lo, mut hi) = (0usize, n - 1);
    for _ in 0..=k {
        let prev = d.clone();
        for i in lo + 1..hi {
            d[i] = (prev[i + 1] - prev[i - 1]) / two_h;
        }
        lo += 1;
        hi -= 1;
    }
    let sq = |x: T| x * x;
    let inner = d[lo..=hi].windows(2).fold(T::zero(), |acc, p| acc + h * (sq(p[0]) + sq(p[1])) / T::lit(2.0));
    let edge = T::from_usize_lossy(lo) * h;
    inner + edge * (sq(d[lo]) + sq(d[hi]))
}

/// Minimum grid size for the released integrated-BM norm of order `k`.
pub fn min_grid_for_intbm(k: u32) -> usize {
    50 * (k as usize + 1)
}

/// `sqrt(sum_{i<=k} f^(i)(0)^2 + int (f^(k+1))^2)`: RKHS norm of
/// `sum_{i<=k} Z_i t^i/i! + I^k W`.
pub fn rkhs_norm_intbm_released<T: Scalar>(f: &GridFunction<T>, k: u32) -> Result<T> {
    let required = min_grid_for_intbm(k);
    if f.len() < required {
        return Err(Error::GridTooCoarse { n: f.len(), required });
    }
    let h = f.grid().spacing();
    let boundary = derivatives_at_zero(f.values(), h, k)?.iter().fold(T::zero(), |acc, &d| acc + d * d);
    Ok((boundary + top_derivative_energy(f.values(), h, k)).sqrt())
}

/// Closed-form RKHS norm of `f` for kernels whose RKHS is known explicitly:
/// Brownian motion, released Brownian motion, and released `k`-fold
/// integrated Brownian motion. `None` for other kernels.
pub fn analytic_norm<T: Scalar>(spec: &KernelSpec<T>, f: &GridFunction<T>) -> Option<Result<T>> {
    match spec {
        KernelSpec::BrownianMotion => Some(rkhs_norm_bm(f)),
        KernelSpec::ReleasedBM => Some(Ok(rkhs_norm_released(f))),
        KernelSpec::Sum(parts) => match parts.as_slice() {
            [KernelSpec::Polynomial { degree }, KernelSpec::IntegratedBM { k }] if degree == k => {
                Some(rkhs_norm_intbm_released(f, *k))
            }
            _ => None,
        },
        _ => None,
    }
}

/// Applies `I^k` (k-fold integration from 0) to the element and returns the
/// image together with its RKHS norm, which equals the norm of `e` because
/// the integration map is an isometry between the two RKHSs.
pub fn pushforward_integrate<T: Scalar>(e: &RkhsElement<T>, k: u32) -> (GridFunction<T>, T) {
    let f = e.to_function();
    (integrate_k(&f, k), rkhs_norm_series(e))
}

/// `I^k f` by repeated cumulative trapezoid integration.
pub fn integrate_k<T: Scalar>(f: &GridFunction<T>, k: u32) -> GridFunction<T> {
    let h = f.grid().spacing();
    let mut values = f.values().to_vec();
    for _ in 0..k {
        values = cumulative_trapezoid(&values, h);
    }
    GridFunction::new(f.grid().clone(), values).expect("integration preserves length")
}

/// Norm of `h^V + h^W` in the RKHS of `V + W` when the two RKHSs are
/// complementary: `sqrt(a_V^2 + a_W^2)`.
pub fn direct_sum_norm<T: Scalar>(a_v: T, a_w: T) -> Result<T> {
    if a_v < T::zero() || a_w < T::zero() {
        return Err(Error::InvalidArgument(format!("norms must be >= 0, got ({a_v}, {a_w})")));
    }
    Ok((a_v * a_v + a_w * a_w).sqrt())
}

/// Series scales of `V + W` when both expand on a common orthonormal basis:
/// `sqrt(mu_i^2 + mu'_i^2)`.
pub fn shared_basis_sum_eigs<T: Scalar>(mu: &[T], mu_prime: &[T]) -> Result<Vec<T>> {
    if mu.len() != mu_prime.len() {
        return Err(Error::LengthMismatch { expected: mu.len(), got: mu_prime.len() });
    }
    Ok(mu.iter().zip(mu_prime).map(|(&a, &b)| (a * a + b * b).sqrt()).collect())
}

/// RKHS norm of `b` for a Gaussian vector with covariance `cov`:
/// `sqrt(g^T cov g)` with `g` the minimum-norm solution of `cov g = b`.
pub fn finite_dim_norm<T: Scalar>(cov: &DMatrix<T>, b: &DVector<T>) -> Result<T> {
    if cov.nrows() != b.len() || !cov.is_square() {
        return Err(Error::LengthMismatch { expected: cov.nrows(), got: b.len() });
    }
    let eig = cov.clone().symmetric_eigen();
    let top = eig.eigenvalues.iter().fold(T::zero(), |m, &v| m.max(v.abs()));
    let cutoff = T::check_tol(1e-12) * top;
    let ut_b = eig.eigenvectors.tr_mul(b);
    let scaled = DVector::from_iterator(
        b.len(),
        ut_b.iter().zip(eig.eigenvalues.iter()).map(|(&c, &l)| if l > cutoff { c / l } else { T::zero() }),
    );
    let g = &eig.eigenvectors * scaled;
    let residual = (cov * &g - b).norm();
    if residual > T::check_tol(1e-8) * b.norm() {
        return Err(Error::NotInRkhs(format!("b is outside the range of the covariance (residual {residual:e})")));
    }
    Ok(g.dot(&(cov * &g)).max(T::zero()).sqrt())
}
