//! Scalar abstraction shared by every numerical routine in the crate.

use std::fmt::{Debug, Display, LowerExp};

use nalgebra::RealField;
use num_traits::{FromPrimitive, ToPrimitive};

/// Real floating-point scalar: `f32` or `f64`.
///
/// Arithmetic and elementary functions come from [`RealField`] so the same
/// type flows into the dense eigen and Cholesky solvers; conversions go
/// through `num-traits`.
pub trait Scalar:
    RealField + Copy + FromPrimitive + ToPrimitive + Debug + Display + LowerExp + Send + Sync
{
    /// Converts an `f64` literal. Never fails for the implemented types.
    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("f64 literal representable")
    }

    #[inline]
    fn as_f64(self) -> f64 {
        self.to_f64().expect("finite scalar converts to f64")
    }

    #[inline]
    fn from_usize_lossy(n: usize) -> Self {
        Self::from_usize(n).expect("usize representable")
    }

    /// Tolerance appropriate for checks that would be `1e-8` in double
    /// precision; looser in single precision.
    #[inline]
    fn check_tol(tight: f64) -> Self {
        let eps = Self::default_epsilon().as_f64();
        Self::lit(tight.max(eps * 1e3))
    }
}

impl Scalar for f32 {}
impl Scalar for f64 {}
