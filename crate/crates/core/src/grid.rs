//! Uniform grids on `[0, 1]` with trapezoid weights, and the functions that
//! live on them.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::Scalar;

/// Uniform grid `t_i = i / (n - 1)` with trapezoid quadrature weights.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid<T> {
    points: Vec<T>,
    weights: Vec<T>,
}

impl<T: Scalar> Grid<T> {
    pub fn uniform(n: usize) -> Result<Self> {
        if n < 2 {
            return Err(Error::GridTooSmall(n));
        }
        let last = T::from_usize_lossy(n - 1);
        let h = T::one() / last;
        let points = (0..n)
            .map(|i| if i == n - 1 { T::one() } else { T::from_usize_lossy(i) / last })
            .collect();
        let half = h / T::lit(2.0);
        let weights = (0..n).map(|i| if i == 0 || i == n - 1 { half } else { h }).collect();
        Ok(Self { points, weights })
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[T] {
        &self.points
    }

    pub fn weights(&self) -> &[T] {
        &self.weights
    }

    pub fn spacing(&self) -> T {
        self.points[1] - self.points[0]
    }

    /// Index of the grid point closest to `t`.
    pub fn nearest_index(&self, t: T) -> usize {
        let n = self.len();
        let pos = (t * T::from_usize_lossy(n - 1)).round().as_f64();
        (pos.max(0.0) as usize).min(n - 1)
    }

    /// Uniform grids are determined by their size.
    pub fn same_as(&self, other: &Self) -> bool {
        self.len() == other.len()
    }
}

/// Shorthand constructor returning a shareable grid.
pub fn make_grid<T: Scalar>(n: usize) -> Result<Arc<Grid<T>>> {
    Grid::uniform(n).map(Arc::new)
}

pub(crate) fn check_same_grid<T: Scalar>(a: &Grid<T>, b: &Grid<T>) -> Result<()> {
    if a.same_as(b) {
        Ok(())
    } else {
        Err(Error::GridMismatch { left: a.len(), right: b.len() })
    }
}

/// Function sampled at the points of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction<T> {
    grid: Arc<Grid<T>>,
    values: Vec<T>,
}

impl<T: Scalar> GridFunction<T> {
    pub fn new(grid: Arc<Grid<T>>, values: Vec<T>) -> Result<Self> {
        if values.len() != grid.len() {
            return Err(Error::LengthMismatch { expected: grid.len(), got: values.len() });
        }
        Ok(Self { grid, values })
    }

    pub fn from_fn(grid: Arc<Grid<T>>, f: impl Fn(T) -> T) -> Self {
        let values = grid.points().iter().map(|&t| f(t)).collect();
        Self { grid, values }
    }

    pub fn zeros(grid: Arc<Grid<T>>) -> Self {
        let values = vec![T::zero(); grid.len()];
        Self { grid, values }
    }

    pub fn grid(&self) -> &Arc<Grid<T>> {
        &self.grid
    }

    pub fn values(&self) -> &[T] {
        &self.values
    }

    pub fn into_values(self) -> Vec<T> {
        self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// Value at the grid point nearest to `t`.
    pub fn eval_nearest(&self, t: T) -> T {
        self.values[self.grid.nearest_index(t)]
    }

    pub fn map(&self, f: impl Fn(T) -> T) -> Self {
        Self { grid: self.grid.clone(), values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn scale(&self, a: T) -> Self {
        self.map(|v| v * a)
    }

    /// `self + a * other`.
    pub fn axpy(&self, a: T, other: &Self) -> Result<Self> {
        check_same_grid(&self.grid, &other.grid)?;
        let values = self.values.iter().zip(&other.values).map(|(&x, &y)| x + a * y).collect();
        Ok(Self { grid: self.grid.clone(), values })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.axpy(-T::one(), other)
    }
}

/// Quadrature inner product `sum_i w_i f_i g_i`.
pub fn inner_l2<T: Scalar>(f: &GridFunction<T>, g: &GridFunction<T>) -> Result<T> {
    check_same_grid(&f.grid, &g.grid)?;
    Ok(weighted_dot(f.grid.weights(), &f.values, &g.values))
}

pub(crate) fn weighted_dot<T: Scalar>(w: &[T], a: &[T], b: &[T]) -> T {
    w.iter().zip(a).zip(b).fold(T::zero(), |acc, ((&w, &x), &y)| acc + w * x * y)
}

/// The two function norms used throughout.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NormKind {
    Sup,
    L2,
}

impl fmt::Display for NormKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            NormKind::Sup => "sup",
            NormKind::L2 => "l2",
        })
    }
}

impl FromStr for NormKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sup" => Ok(NormKind::Sup),
            "l2" => Ok(NormKind::L2),
            other => Err(Error::InvalidArgument(format!("unknown norm '{other}' (sup|l2)"))),
        }
    }
}

pub fn norm<T: Scalar>(f: &GridFunction<T>, which: NormKind) -> T {
    norm_of_values(f.grid.weights(), &f.values, which)
}

pub(crate) fn norm_of_values<T: Scalar>(weights: &[T], values: &[T], which: NormKind) -> T {
    match which {
        NormKind::Sup => values.iter().fold(T::zero(), |m, &v| m.max(v.abs())),
        NormKind::L2 => weighted_dot(weights, values, values).max(T::zero()).sqrt(),
    }
}
