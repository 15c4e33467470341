//! Deterministic structural checks: isometry of the RKHS under integration,
//! the released-BM direct sum, and the shared-basis sum that is not a direct
//! sum.

use std::sync::Arc;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernels::KernelSpec;
use crate::report::CheckReport;
use crate::rkhs::{
    direct_sum_norm, pushforward_integrate, rkhs_norm_bm, rkhs_norm_released, rkhs_norm_series,
    shared_basis_sum_eigs, RkhsElement,
};
use crate::spectral::{eig_basis, SpectralBasis};
use crate::Scalar;

pub const ISOMETRY_REL_TOL: f64 = 0.05;
pub const DIRECT_SUM_TOL: f64 = 1e-8;
pub const SHARED_EIG_TOL: f64 = 1e-8;
pub const SPLIT_IDENTITY_TOL: f64 = 1e-10;

/// Compares `||e||` in the Brownian-motion RKHS with the norm of `I^k e`
/// recomputed in the eigenbasis of `k`-fold integrated Brownian motion.
///
/// The second basis is truncated at `truncation_tol`; the default
/// eigenvalue cutoff is too fine for projecting a discretized image.
pub fn check_isometry_integration<T: Scalar>(
    basis_bm: &Arc<SpectralBasis<T>>,
    k: u32,
    elements: &[RkhsElement<T>],
    truncation_tol: T,
) -> Result<Vec<CheckReport>> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be >= 1".into()));
    }
    let target = eig_basis(&KernelSpec::IntegratedBM { k }, basis_bm.grid(), truncation_tol)?;
    elements
        .par_iter()
        .enumerate()
        .map(|(i, e)| {
            if !e.shares_basis(basis_bm) {
                return Err(Error::BasisMismatch);
            }
            let (image, before) = pushforward_integrate(e, k);
            let after = rkhs_norm_series(&RkhsElement::from_function(&image, Arc::new(target.clone()))?);
            let (before, after) = (before.as_f64(), after.as_f64());
            let rel = if before == 0.0 { after.abs() } else { (after - before).abs() / before };
            Ok(CheckReport::new(format!("isometry[{i}]"), before, after, ISOMETRY_REL_TOL, rel <= ISOMETRY_REL_TOL)
                .with_detail(format!("k={k} rel_diff={rel:.3e}")))
        })
        .collect()
}

/// `||f||^2` under released Brownian motion against
/// `f(0)^2 + ||f - f(0)||^2` under Brownian motion.
pub fn check_direct_sum<T: Scalar>(f: &GridFunction<T>) -> Result<CheckReport> {
    let f0 = f.values()[0];
    let rest = f.map(|v| v - f0);
    let whole = rkhs_norm_released(f).as_f64();
    let parts = direct_sum_norm(f0.abs(), rkhs_norm_bm(&rest)?)?.as_f64();
    let lhs = whole * whole;
    let rhs = parts * parts;
    let slack = DIRECT_SUM_TOL * (1.0 + lhs);
    Ok(CheckReport::new("direct-sum", lhs, rhs, slack, (lhs - rhs).abs() <= slack))
}

/// Golden-section minimum of `a^2 / mu^2 + (1 - a)^2 / nu^2` over `a`.
fn min_split(mu: f64, nu: f64) -> f64 {
    let f = |a: f64| a * a / (mu * mu) + (1.0 - a) * (1.0 - a) / (nu * nu);
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let (mut lo, mut hi) = (-1.0f64, 2.0f64);
    while hi - lo > 1e-12 {
        let x1 = hi - r * (hi - lo);
        let x2 = lo + r * (hi - lo);
        if f(x1) <= f(x2) {
            hi = x2;
        } else {
            lo = x1;
        }
    }
    f(0.5 * (lo + hi))
}

/// Processes `V = sum mu_i Z_i phi_i` and `W = sum mu'_i Z'_i phi_i` on a
/// common orthonormal set taken from `phi`.
///
/// Returns two rows: the eigenvalues of the discretized `V + W` kernel
/// against `mu_i^2 + mu'_i^2`, and the per-coordinate identity
/// `min_a a^2/mu^2 + (1-a)^2/mu'^2 = 1/(mu^2 + mu'^2)`, together with the
/// strict excess of the naive split `a = 1/2` that shows the norm of the sum
/// is not the Pythagorean sum of the parts.
pub fn check_shared_basis_counterexample<T: Scalar>(
    mu: &[T],
    mu_prime: &[T],
    phi: &SpectralBasis<T>,
) -> Result<Vec<CheckReport>> {
    let combined = shared_basis_sum_eigs(mu, mu_prime)?;
    if mu.is_empty() || mu.len() > phi.len() {
        return Err(Error::LengthMismatch { expected: phi.len(), got: mu.len() });
    }
    if mu.iter().chain(mu_prime).any(|&v| !(v > T::zero())) {
        return Err(Error::InvalidArgument("scales must be positive".into()));
    }
    let funcs: Vec<GridFunction<T>> = (0..mu.len()).map(|j| phi.eigenfunction(j)).collect();
    let series = |s: &[T]| KernelSpec::series(s.iter().map(|&v| v * v).collect(), funcs.clone());
    let sum = KernelSpec::Sum(vec![series(mu)?, series(mu_prime)?]);
    let basis = eig_basis(&sum, phi.grid(), T::lit(1e-14))?;
    let mut want: Vec<f64> = combined.iter().map(|v| (*v * *v).as_f64()).collect();
    want.sort_by(|a, b| b.total_cmp(a));
    let got: Vec<f64> = basis.eigenvalues().iter().map(|v| v.as_f64()).collect();
    let scale = want[0];
    let eig_err = want
        .iter()
        .enumerate()
        .map(|(i, w)| (got.get(i).copied().unwrap_or(0.0) - w).abs())
        .fold(0.0f64, f64::max)
        / scale;
    let eig_row = CheckReport::new("shared-basis-eigs", got.len() as f64, want.len() as f64, SHARED_EIG_TOL, eig_err <= SHARED_EIG_TOL)
        .with_detail(format!("max_rel_err={eig_err:.3e}"));

    let mut worst = 0.0f64;
    let mut min_excess = f64::INFINITY;
    for (&m, &p) in mu.iter().zip(mu_prime) {
        let (m, p) = (m.as_f64(), p.as_f64());
        let exact = 1.0 / (m * m + p * p);
        worst = worst.max((min_split(m, p) - exact).abs() / exact);
        let naive = 0.25 / (m * m) + 0.25 / (p * p);
        min_excess = min_excess.min(naive - exact);
    }
    let (m0, p0) = (mu[0].as_f64(), mu_prime[0].as_f64());
    let split_row = CheckReport::new(
        "shared-basis-split",
        min_split(m0, p0),
        1.0 / (m0 * m0 + p0 * p0),
        SPLIT_IDENTITY_TOL,
        worst <= SPLIT_IDENTITY_TOL && (min_excess > 1e-8 || mu.iter().zip(mu_prime).all(|(a, b)| a == b)),
    )
    .with_detail(format!("max_rel_err={worst:.3e} naive_excess={min_excess:.3e}"));
    Ok(vec![eig_row, split_row])
}
