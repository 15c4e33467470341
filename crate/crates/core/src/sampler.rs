//! Karhunen–Loève path sampling, an exact finite-dimensional sampler and
//! Cameron–Martin log likelihood ratios.
//!
//! Randomness is counter based: draw `k` under seed `s` reads the ChaCha8
//! keystream with key `s` and stream id `k`, so any draw can be regenerated
//! on its own and parallel evaluation matches serial evaluation bit for bit.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand::RngCore;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};
use crate::grid::GridFunction;
use crate::kernels::validate_psd;
use crate::rkhs::RkhsElement;
use crate::spectral::SpectralBasis;
use crate::Scalar;

/// Draws are generated in fixed blocks of this many consecutive indices.
pub const BLOCK: usize = 256;

fn stream(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Open-interval uniform from the top 53 bits of a word.
#[inline]
fn unit_open(word: u64) -> f64 {
    ((word >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

/// Inverse standard normal CDF.
#[inline]
pub fn normal_quantile(p: f64) -> f64 {
    -std::f64::consts::SQRT_2 * erfc_inv(2.0 * p)
}

/// Standard normal CDF.
#[inline]
pub fn normal_cdf(x: f64) -> f64 {
    0.5 * statrs::function::erf::erfc(-x / std::f64::consts::SQRT_2)
}

/// The first `m` standard normals of draw `index` under `seed`.
pub fn standard_normals(seed: u64, index: u64, m: usize) -> Vec<f64> {
    let mut rng = stream(seed, index);
    (0..m).map(|_| normal_quantile(unit_open(rng.next_u64()))).collect()
}

/// One Karhunen–Loève draw: `path = sum_j sqrt(lambda_j) z_j phi_j`.
#[derive(Debug, Clone)]
pub struct KlDraw<T: Scalar> {
    seed: u64,
    index: u64,
    z: Vec<T>,
    path: GridFunction<T>,
    basis: Arc<SpectralBasis<T>>,
}

impl<T: Scalar> KlDraw<T> {
    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn index(&self) -> u64 {
        self.index
    }

    pub fn z(&self) -> &[T] {
        &self.z
    }

    pub fn path(&self) -> &GridFunction<T> {
        &self.path
    }

    pub fn basis(&self) -> &Arc<SpectralBasis<T>> {
        &self.basis
    }
}

/// `Phi * diag(sqrt(lambda))`, the map from normal coefficients to paths.
pub(crate) fn path_operator<T: Scalar>(basis: &SpectralBasis<T>) -> DMatrix<T> {
    let mut a = basis.eigenfunction_matrix().clone();
    for (j, &l) in basis.eigenvalues().iter().enumerate() {
        a.column_mut(j).scale_mut(l.sqrt());
    }
    a
}

/// Evaluates `f(index, z, path)` for draws `start .. start + count`.
///
/// Work is split into blocks of [`BLOCK`] indices aligned to multiples of
/// `BLOCK`, paths are formed by one matrix product per block, and results
/// come back in index order.
pub fn map_draws<T, R, F>(basis: &SpectralBasis<T>, start: u64, count: usize, seed: u64, f: F) -> Vec<R>
where
    T: Scalar,
    R: Send,
    F: Fn(u64, &[T], &[T]) -> R + Sync,
{
    let a = path_operator(basis);
    let m = basis.len();
    let end = start + count as u64;
    let b = BLOCK as u64;
    let blocks: Vec<(u64, u64)> = {
        let mut out = Vec::new();
        let mut lo = start;
        while lo < end {
            let hi = ((lo / b + 1) * b).min(end);
            out.push((lo, hi));
            lo = hi;
        }
        out
    };
    blocks
        .into_par_iter()
        .flat_map_iter(|(lo, hi)| {
            let k = (hi - lo) as usize;
            let mut z = DMatrix::<T>::zeros(m, k);
            for c in 0..k {
                for (r, v) in standard_normals(seed, lo + c as u64, m).into_iter().enumerate() {
                    z[(r, c)] = T::lit(v);
                }
            }
            let paths = &a * &z;
            (0..k)
                .map(|c| f(lo + c as u64, z.column(c).as_slice(), paths.column(c).as_slice()))
                .collect::<Vec<_>>()
        })
        .collect()
}

/// `count` draws starting at index 0.
pub fn sample_kl<T: Scalar>(basis: &Arc<SpectralBasis<T>>, count: usize, seed: u64) -> Result<Vec<KlDraw<T>>> {
    sample_kl_range(basis, 0, count, seed)
}

/// Draws `start .. start + count`; identical to the matching slice of a
/// longer run.
pub fn sample_kl_range<T: Scalar>(
    basis: &Arc<SpectralBasis<T>>,
    start: u64,
    count: usize,
    seed: u64,
) -> Result<Vec<KlDraw<T>>> {
    if count == 0 {
        return Err(Error::InvalidArgument("count must be >= 1".into()));
    }
    let grid = basis.grid().clone();
    let parts = map_draws(basis, start, count, seed, |i, z, p| (i, z.to_vec(), p.to_vec()));
    parts
        .into_iter()
        .map(|(index, z, p)| {
            Ok(KlDraw { seed, index, z, path: GridFunction::new(grid.clone(), p)?, basis: basis.clone() })
        })
        .collect()
}

/// Draws with covariance `cov` via its symmetric square root.
pub fn sample_exact<T: Scalar>(cov: &DMatrix<T>, count: usize, seed: u64) -> Result<Vec<DVector<T>>> {
    let root = symmetric_sqrt(cov)?;
    let d = cov.nrows();
    Ok((0..count as u64)
        .into_par_iter()
        .map(|i| {
            let z = DVector::from_iterator(d, standard_normals(seed, i, d).into_iter().map(T::lit));
            &root * z
        })
        .collect())
}

pub(crate) fn symmetric_sqrt<T: Scalar>(cov: &DMatrix<T>) -> Result<DMatrix<T>> {
    validate_psd(cov)?;
    let eig = cov.clone().symmetric_eigen();
    let s = DVector::from_iterator(eig.eigenvalues.len(), eig.eigenvalues.iter().map(|&l| l.max(T::zero()).sqrt()));
    let u = &eig.eigenvectors;
    Ok(u * DMatrix::from_diagonal(&s) * u.transpose())
}

/// `Uh - ||h||_H^2 / 2` with `Uh = sum_j z_j w_j / sqrt(lambda_j)`.
pub fn cm_log_ratio<T: Scalar>(h: &RkhsElement<T>, draw: &KlDraw<T>) -> Result<T> {
    if !h.shares_basis(&draw.basis) {
        return Err(Error::BasisMismatch);
    }
    Ok(cm_log_ratio_z(&h.orthonormal_coords(), &draw.z))
}

/// Same as [`cm_log_ratio`] from orthonormal coordinates `c` and normals `z`.
pub fn cm_log_ratio_z<T: Scalar>(c: &[T], z: &[T]) -> T {
    let (u, sq) = c.iter().zip(z).fold((T::zero(), T::zero()), |(u, sq), (&c, &z)| (u + c * z, sq + c * c));
    let sq = sq + c.iter().skip(z.len()).fold(T::zero(), |a, &c| a + c * c);
    u - sq / T::lit(2.0)
}
