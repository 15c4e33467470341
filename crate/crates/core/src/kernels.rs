//! Covariance kernels of the Gaussian processes on `[0, 1]` and Gram-matrix
//! assembly.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use nalgebra::DMatrix;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{Grid, GridFunction};
use crate::quadrature::gl8_unit;
use crate::Scalar;

/// A covariance kernel `K(s, t)`.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelSpec<T> {
    /// `s ∧ t`.
    BrownianMotion,
    /// `Z + W_t`: `1 + s ∧ t`.
    ReleasedBM,
    /// `k`-fold integrated Brownian motion `I^k W`.
    IntegratedBM { k: u32 },
    /// `R_t = int_0^t (t - u)^(alpha - 1/2) dW_u`.
    RiemannLiouville { alpha: T },
    /// Polynomial process `sum_{i <= degree} Z_i t^i / i!`.
    Polynomial { degree: u32 },
    /// Sum of independent processes.
    Sum(Vec<KernelSpec<T>>),
    /// Covariance matrix of a finite-dimensional Gaussian vector; `s` and `t`
    /// are mapped to the nearest of `d` equispaced indices.
    FiniteDim(DMatrix<T>),
    /// `sum_j lambda_j phi_j(s) phi_j(t)`.
    Series { eigenvalues: Vec<T>, eigenfunctions: Vec<GridFunction<T>> },
}

impl<T: Scalar> KernelSpec<T> {
    pub fn riemann_liouville(alpha: T) -> Result<Self> {
        let spec = KernelSpec::RiemannLiouville { alpha };
        spec.validate()?;
        Ok(spec)
    }

    pub fn finite_dim(cov: DMatrix<T>) -> Result<Self> {
        let spec = KernelSpec::FiniteDim(cov);
        spec.validate()?;
        Ok(spec)
    }

    pub fn series(eigenvalues: Vec<T>, eigenfunctions: Vec<GridFunction<T>>) -> Result<Self> {
        let spec = KernelSpec::Series { eigenvalues, eigenfunctions };
        spec.validate()?;
        Ok(spec)
    }

    /// `Z + I^k W`, the process of the approximation lower-bound example.
    pub fn integrated_plus_constant(k: u32) -> Self {
        KernelSpec::Sum(vec![KernelSpec::Polynomial { degree: 0 }, KernelSpec::IntegratedBM { k }])
    }

    /// `sum_{i <= k} Z_i t^i / i! + I^k W`, all derivatives at zero released.
    pub fn released_integrated(k: u32) -> Self {
        KernelSpec::Sum(vec![KernelSpec::Polynomial { degree: k }, KernelSpec::IntegratedBM { k }])
    }

    pub fn validate(&self) -> Result<()> {
        match self {
            KernelSpec::RiemannLiouville { alpha } if !(*alpha > T::zero()) => Err(
                Error::InvalidKernel(format!("Riemann-Liouville alpha must be > 0, got {alpha}")),
            ),
            KernelSpec::IntegratedBM { k } if *k == 0 => {
                Err(Error::InvalidKernel("integrated BM needs k >= 1".into()))
            }
            KernelSpec::Sum(parts) => {
                if parts.is_empty() {
                    return Err(Error::InvalidKernel("empty kernel sum".into()));
                }
                parts.iter().try_for_each(|p| p.validate())
            }
            KernelSpec::FiniteDim(cov) => validate_psd(cov),
            KernelSpec::Series { eigenvalues, eigenfunctions } => {
                if eigenvalues.len() != eigenfunctions.len() || eigenvalues.is_empty() {
                    return Err(Error::InvalidKernel(format!(
                        "series needs matching non-empty eigen data ({} values, {} functions)",
                        eigenvalues.len(),
                        eigenfunctions.len()
                    )));
                }
                if let Some(l) = eigenvalues.iter().find(|&&l| !(l > T::zero())) {
                    return Err(Error::InvalidKernel(format!("series eigenvalue {l} is not > 0")));
                }
                let n = eigenfunctions[0].len();
                if eigenfunctions.iter().any(|f| f.len() != n) {
                    return Err(Error::InvalidKernel("series eigenfunctions on different grids".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Evaluates `K(s, t)` for `s, t` in `[0, 1]`.
    pub fn eval(&self, s: T, t: T) -> Result<T> {
        for x in [s, t] {
            if !(x >= T::zero() && x <= T::one()) {
                return Err(Error::OutOfDomain(x.as_f64()));
            }
        }
        Ok(self.eval_unchecked(s, t))
    }

    fn eval_unchecked(&self, s: T, t: T) -> T {
        let (lo, hi) = if s <= t { (s, t) } else { (t, s) };
        match self {
            KernelSpec::BrownianMotion => lo,
            KernelSpec::ReleasedBM => T::one() + lo,
            KernelSpec::IntegratedBM { k } => integrated_bm_cov(*k, lo, hi),
            KernelSpec::RiemannLiouville { alpha } => riemann_liouville_cov(*alpha, lo, hi),
            KernelSpec::Polynomial { degree } => {
                let st = s * t;
                let mut term = T::one();
                let mut acc = T::one();
                for i in 1..=*degree {
                    let fi = T::from_u32(i).unwrap();
                    term *= st / (fi * fi);
                    acc += term;
                }
                acc
            }
            KernelSpec::Sum(parts) => parts.iter().fold(T::zero(), |acc, p| acc + p.eval_unchecked(s, t)),
            KernelSpec::FiniteDim(cov) => {
                let d = cov.nrows();
                let idx = |x: T| {
                    if d == 1 {
                        0
                    } else {
                        ((x * T::from_usize_lossy(d - 1)).round().as_f64() as usize).min(d - 1)
                    }
                };
                cov[(idx(s), idx(t))]
            }
            KernelSpec::Series { eigenvalues, eigenfunctions } => eigenvalues
                .iter()
                .zip(eigenfunctions)
                .fold(T::zero(), |acc, (&l, f)| acc + l * f.eval_nearest(s) * f.eval_nearest(t)),
        }
    }
}

/// `int_0^lo (lo - u)^k (hi - u)^k du / (k!)^2`, expanded in powers of
/// `hi - lo` so the result is exact up to rounding.
fn integrated_bm_cov<T: Scalar>(k: u32, lo: T, hi: T) -> T {
    let d = hi - lo;
    let mut acc = T::zero();
    let mut binom = T::one();
    for j in 0..=k {
        if j > 0 {
            binom = binom * T::from_u32(k - j + 1).unwrap() / T::from_u32(j).unwrap();
        }
        let p = T::from_u32(k + j + 1).unwrap();
        acc += binom * d.powi((k - j) as i32) * lo.powi((k + j + 1) as i32) / p;
    }
    let mut fact = T::one();
    for i in 2..=k {
        fact *= T::from_u32(i).unwrap();
    }
    acc / (fact * fact)
}

/// `int_0^lo (hi - u)^e (lo - u)^e du` with `e = alpha - 1/2`.
///
/// The substitution `u = lo (1 - v^2)` turns the endpoint factor into
/// `v^(2e+1)`, integrable for every `alpha > 0`; the `v`-integral uses eight
/// 8-point Gauss–Legendre panels graded geometrically toward `v = 0`.
fn riemann_liouville_cov<T: Scalar>(alpha: T, lo: T, hi: T) -> T {
    if lo <= T::zero() {
        return T::zero();
    }
    let two = T::lit(2.0);
    let e = alpha - T::lit(0.5);
    if hi == lo {
        return lo.powf(two * alpha) / (two * alpha);
    }
    let gap = hi - lo;
    let (nodes, weights) = gl8_unit();
    let mut acc = T::zero();
    let mut right = T::one();
    for panel in 0..8 {
        let left = if panel == 7 { T::zero() } else { right / two };
        let width = right - left;
        for (&x, &w) in nodes.iter().zip(weights) {
            let v = left + width * T::lit(x);
            let v2 = lo * v * v;
            let f = (gap + v2).powf(e) * if v2 > T::zero() { v2.powf(e) } else { T::zero() } * v;
            acc += width * T::lit(w) * f;
        }
        right = left;
    }
    two * lo * acc
}

/// Symmetric within `1e-10` and PSD within eigenvalue tolerance `-1e-10`.
pub(crate) fn validate_psd<T: Scalar>(cov: &DMatrix<T>) -> Result<()> {
    if !cov.is_square() || cov.nrows() == 0 {
        return Err(Error::InvalidKernel(format!(
            "covariance must be square and non-empty, got {}x{}",
            cov.nrows(),
            cov.ncols()
        )));
    }
    let tol = T::check_tol(1e-10);
    let scale = cov.iter().fold(T::one(), |m, v| m.max(v.abs()));
    for i in 0..cov.nrows() {
        for j in 0..i {
            if (cov[(i, j)] - cov[(j, i)]).abs() > tol * scale {
                return Err(Error::InvalidKernel(format!("covariance not symmetric at ({i}, {j})")));
            }
        }
    }
    let min = cov.clone().symmetric_eigenvalues().iter().fold(T::max_value().unwrap(), |m, &v| m.min(v));
    if min < -tol * scale {
        return Err(Error::NotPsd(min.as_f64()));
    }
    Ok(())
}

/// Gram matrix `G_ij = K(t_i, t_j)`.
///
/// Only the upper triangle is evaluated and mirrored, so the result is
/// exactly symmetric.
pub fn gram<T: Scalar>(spec: &KernelSpec<T>, grid: &Grid<T>) -> Result<DMatrix<T>> {
    spec.validate()?;
    let pts = grid.points();
    let n = pts.len();
    let rows: Vec<Vec<T>> = (0..n)
        .into_par_iter()
        .map(|i| (i..n).map(|j| spec.eval_unchecked(pts[i], pts[j])).collect())
        .collect();
    let mut g = DMatrix::zeros(n, n);
    for (i, row) in rows.into_iter().enumerate() {
        for (off, v) in row.into_iter().enumerate() {
            g[(i, i + off)] = v;
            g[(i + off, i)] = v;
        }
    }
    Ok(g)
}

/// `sigma(W)` for the supremum norm: `sqrt(max_i K(t_i, t_i))`.
pub fn sup_variance<T: Scalar>(spec: &KernelSpec<T>, grid: &Grid<T>) -> Result<T> {
    spec.validate()?;
    let max = grid.points().iter().fold(T::zero(), |m, &t| m.max(spec.eval_unchecked(t, t)));
    Ok(max.sqrt())
}

/// The canonical RKHS element `K(s, .)` on a grid.
pub fn kernel_section<T: Scalar>(spec: &KernelSpec<T>, s: T, grid: &Arc<Grid<T>>) -> Result<GridFunction<T>> {
    spec.eval(s, s)?;
    Ok(GridFunction::from_fn(grid.clone(), |t| spec.eval_unchecked(s, t)))
}

impl<T: Scalar> fmt::Display for KernelSpec<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KernelSpec::BrownianMotion => write!(f, "bm"),
            KernelSpec::ReleasedBM => write!(f, "released-bm"),
            KernelSpec::IntegratedBM { k } => write!(f, "ibm:k={k}"),
            KernelSpec::RiemannLiouville { alpha } => write!(f, "rl:alpha={alpha}"),
            KernelSpec::Polynomial { degree } => write!(f, "poly:k={degree}"),
            KernelSpec::Sum(parts) => {
                for (i, p) in parts.iter().enumerate() {
                    if i > 0 {
                        write!(f, "+")?;
                    }
                    write!(f, "{p}")?;
                }
                Ok(())
            }
            KernelSpec::FiniteDim(cov) => write!(f, "finite:dim={}", cov.nrows()),
            KernelSpec::Series { eigenvalues, .. } => write!(f, "series:terms={}", eigenvalues.len()),
        }
    }
}

/// Parses the command-line kernel syntax: `bm`, `released-bm`, `ibm:k=2`,
/// `rl:alpha=0.8`, `poly:k=1`, and sums joined with `+`.
impl<T: Scalar> FromStr for KernelSpec<T> {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let parts: Vec<&str> = s.split('+').map(str::trim).collect();
        if parts.len() > 1 {
            let specs = parts.into_iter().map(parse_atom).collect::<Result<Vec<_>>>()?;
            let spec = KernelSpec::Sum(specs);
            spec.validate()?;
            return Ok(spec);
        }
        parse_atom(s.trim())
    }
}

fn parse_atom<T: Scalar>(s: &str) -> Result<KernelSpec<T>> {
    let (name, params) = match s.split_once(':') {
        Some((n, p)) => (n, Some(p)),
        None => (s, None),
    };
    let param = |key: &str| -> Result<&str> {
        let p = params.ok_or_else(|| Error::InvalidKernel(format!("'{name}' needs {key}=<value>")))?;
        p.split(',')
            .filter_map(|kv| kv.split_once('='))
            .find(|(k, _)| k.trim() == key)
            .map(|(_, v)| v.trim())
            .ok_or_else(|| Error::InvalidKernel(format!("'{name}' needs {key}=<value>")))
    };
    let int = |key: &str| -> Result<u32> {
        let v = param(key)?;
        v.parse().map_err(|_| Error::InvalidKernel(format!("{key}='{v}' is not a non-negative integer")))
    };
    let spec = match name {
        "bm" => KernelSpec::BrownianMotion,
        "released-bm" => KernelSpec::ReleasedBM,
        "ibm" => KernelSpec::IntegratedBM { k: int("k")? },
        "poly" => KernelSpec::Polynomial { degree: int("k")? },
        "rl" => {
            let v = param("alpha")?;
            let alpha: f64 =
                v.parse().map_err(|_| Error::InvalidKernel(format!("alpha='{v}' is not a number")))?;
            KernelSpec::RiemannLiouville { alpha: T::lit(alpha) }
        }
        other => return Err(Error::InvalidKernel(format!("unknown kernel '{other}'"))),
    };
    spec.validate()?;
    Ok(spec)
}
