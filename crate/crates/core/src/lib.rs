//! Gaussian process priors through their reproducing kernel Hilbert spaces.
//!
//! Kernels are discretized on uniform grids of `[0, 1]` and eigen-decomposed
//! with trapezoid weights. The resulting spectral bases drive RKHS norms,
//! Karhunen–Loève sampling, Monte Carlo small-ball estimates, the
//! concentration function and contraction-rate solving.
//!
//! Everything numerical is generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` and `*32` aliases below name the common instantiations.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod concentration;
pub mod error;
pub mod grid;
pub mod kernels;
pub mod qp;
pub mod quadrature;
pub mod report;
pub mod rkhs;
pub mod sampler;
pub mod scalar;
pub mod smallball;
pub mod spectral;
pub mod verify_structure;

pub use concentration::{
    approx_term, concentration_fn, ellipsoid_entropy, exponent_translate, fit_loglog, solve_rate, ApproxTerm,
    ConcentrationCurve, ConcentrationPoint, RateKind, RateSolution, TabulatedCurve,
};
pub use error::{Error, Result};
pub use grid::{inner_l2, make_grid, norm, Grid, GridFunction, NormKind};
pub use kernels::{gram, kernel_section, sup_variance, KernelSpec};
pub use report::CheckReport;
pub use rkhs::{analytic_norm, rkhs_norm_series, RkhsElement};
pub use sampler::{cm_log_ratio, sample_exact, sample_kl, KlDraw};
pub use scalar::Scalar;
pub use smallball::{smallball_curve, smallball_mc, SmallBallEstimate};
pub use spectral::{eig_basis, project, reconstruct, SpectralBasis, DEFAULT_TRUNCATION_TOL};

pub type Grid64 = Grid<f64>;
pub type Grid32 = Grid<f32>;
pub type GridFunction64 = GridFunction<f64>;
pub type GridFunction32 = GridFunction<f32>;
pub type KernelSpec64 = KernelSpec<f64>;
pub type KernelSpec32 = KernelSpec<f32>;
pub type SpectralBasis64 = SpectralBasis<f64>;
pub type SpectralBasis32 = SpectralBasis<f32>;
pub type RkhsElement64 = RkhsElement<f64>;
pub type RkhsElement32 = RkhsElement<f32>;
pub type KlDraw64 = KlDraw<f64>;
pub type KlDraw32 = KlDraw<f32>;
