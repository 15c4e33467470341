//! The concentration function `phi_w(eps)`, contraction-rate solving, the
//! small-ball/entropy exponent translation and a finite-dimensional entropy
//! estimator.
//!
//! Two constant conventions coexist: `approx_term` is
//! `inf 1/2 ||h||_H^2` as in the concentration function, while the
//! approximation rate equation uses `inf ||h||_H^2` without the half. The
//! rate helpers take whichever curve they are given and do not rescale.

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::grid::{weighted_dot, GridFunction, NormKind};
use crate::qp::solve_box_qp;
use crate::sampler::path_operator;
use crate::smallball::{smallball_curve, SmallBallEstimate};
use crate::spectral::{project, SpectralBasis};
use crate::Scalar;

/// Minimizer of `1/2 ||h||_H^2` over `||h - w|| <= eps`.
#[derive(Debug, Clone, PartialEq)]
pub struct ApproxTerm<T> {
    pub value: T,
    /// Basis coefficients `h_j` of the minimizer.
    pub coeffs: Vec<T>,
    /// Upper bound on `value - optimum` (plus grid effects in the sup case).
    pub gap: T,
    /// Lagrange multiplier `mu` of the l2 problem; `None` in the sup case.
    pub multiplier: Option<T>,
}

pub fn approx_term<T: Scalar>(w: &GridFunction<T>, basis: &SpectralBasis<T>, eps: T, norm: NormKind) -> Result<ApproxTerm<T>> {
    if !(eps > T::zero()) {
        return Err(Error::InvalidArgument(format!("eps must be > 0, got {eps}")));
    }
    crate::grid::check_same_grid(w.grid(), basis.grid())?;
    match norm {
        NormKind::L2 => approx_l2(w, basis, eps),
        NormKind::Sup => approx_sup(w, basis, eps),
    }
}

fn approx_l2<T: Scalar>(w: &GridFunction<T>, basis: &SpectralBasis<T>, eps: T) -> Result<ApproxTerm<T>> {
    let wj = project(w, basis)?;
    let lam = basis.eigenvalues();
    let in_span = wj.iter().fold(T::zero(), |a, &v| a + v * v);
    let total = weighted_dot(w.grid().weights(), w.values(), w.values());
    let r2 = (total - in_span).max(T::zero());
    let budget = eps * eps - r2;
    if budget < T::zero() {
        return Err(Error::Infeasible(format!(
            "l2 distance {:e} from the basis span exceeds eps = {eps}",
            r2.sqrt()
        )));
    }
    let half = T::lit(0.5);
    if in_span <= budget {
        return Ok(ApproxTerm { value: T::zero(), coeffs: vec![T::zero(); wj.len()], gap: T::zero(), multiplier: Some(T::zero()) });
    }
    // distance^2 at multiplier mu; decreasing in mu
    let dist2 = |mu: T| {
        wj.iter().zip(lam).fold(T::zero(), |a, (&w, &l)| {
            let d = w / (T::one() + mu * l);
            a + d * d
        })
    };
    let value_at = |mu: T| {
        let coeffs: Vec<T> = wj.iter().zip(lam).map(|(&w, &l)| w * mu * l / (T::one() + mu * l)).collect();
        let v = coeffs.iter().zip(lam).fold(T::zero(), |a, (&h, &l)| a + h * h / l);
        (half * v, coeffs)
    };
    let mut hi = T::one() / lam[0];
    while dist2(hi) > budget {
        hi *= T::lit(2.0);
        if !hi.is_finite() {
            return Err(Error::NotConverged("multiplier bracket overflowed".into()));
        }
    }
    let mut lo = T::zero();
    for _ in 0..300 {
        let mid = (lo + hi) / T::lit(2.0);
        if mid <= lo || mid >= hi {
            break;
        }
        if dist2(mid) > budget {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // hi is feasible; the optimum lies between the two values
    let (value, coeffs) = value_at(hi);
    let (low_value, _) = value_at(lo);
    Ok(ApproxTerm { value, coeffs, gap: (value - low_value).max(T::zero()), multiplier: Some(hi) })
}

fn approx_sup<T: Scalar>(w: &GridFunction<T>, basis: &SpectralBasis<T>, eps: T) -> Result<ApproxTerm<T>> {
    let a = path_operator(basis);
    let target = DVector::from_column_slice(w.values());
    let sol = solve_box_qp(&a, &target, eps)?;
    let coeffs: Vec<T> = sol.c.iter().zip(basis.eigenvalues()).map(|(&c, &l)| c * l.sqrt()).collect();
    let resid = &a * &sol.c - &target;
    let zsum = sol.z_upper.sum() + sol.z_lower.sum();
    // half the largest jump of h - w bounds the excess between grid points
    let jump = resid.as_slice().windows(2).fold(T::zero(), |m, p| m.max((p[1] - p[0]).abs())) / T::lit(2.0);
    let gap = (sol.primal - sol.dual).max(T::zero()) + (sol.max_violation.max(T::zero()) + jump) * zsum;
    Ok(ApproxTerm { value: sol.primal, coeffs, gap, multiplier: None })
}

/// One point of the concentration function.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationPoint {
    pub eps: f64,
    pub approx_term: f64,
    pub neg_log_smallball: f64,
    pub phi: f64,
    pub optimizer_gap: f64,
    pub smallball: SmallBallEstimate,
}

/// Concentration curve; stops at the first radius whose centered small ball
/// saw no hits.
#[derive(Debug, Clone, PartialEq)]
pub struct ConcentrationCurve {
    pub points: Vec<ConcentrationPoint>,
    pub truncated_at: Option<f64>,
}

impl ConcentrationCurve {
    pub fn warning(&self) -> Option<String> {
        self.truncated_at.map(|e| format!("no small-ball hits at eps = {e}; curve truncated"))
    }
}

/// `phi_w(eps) = approx_term + (-log P(||W|| < eps))` on a descending
/// radius list. All radii share the same draws.
pub fn concentration_fn<T: Scalar>(
    w: &GridFunction<T>,
    basis: &SpectralBasis<T>,
    eps_list: &[T],
    norm: NormKind,
    trials: usize,
    seed: u64,
) -> Result<ConcentrationCurve> {
    if eps_list.is_empty() {
        return Err(Error::InvalidArgument("empty eps list".into()));
    }
    if eps_list.windows(2).any(|p| !(p[1] < p[0])) {
        return Err(Error::InvalidArgument("eps list must be strictly decreasing".into()));
    }
    let balls = smallball_curve(basis, eps_list, norm, None, trials, seed)?;
    let approx: Vec<Result<ApproxTerm<T>>> = eps_list.par_iter().map(|&e| approx_term(w, basis, e, norm)).collect();
    let mut points = Vec::new();
    let mut truncated_at = None;
    for ((&eps, ball), term) in eps_list.iter().zip(balls).zip(approx) {
        if ball.hits == 0 {
            truncated_at = Some(eps.as_f64());
            break;
        }
        let term = term?;
        let a = term.value.as_f64();
        points.push(ConcentrationPoint {
            eps: eps.as_f64(),
            approx_term: a,
            neg_log_smallball: ball.neg_log_p,
            phi: a + ball.neg_log_p,
            optimizer_gap: term.gap.as_f64(),
            smallball: ball,
        });
    }
    Ok(ConcentrationCurve { points, truncated_at })
}

/// Default relative tolerance of [`solve_rate`].
pub const RATE_TOL: f64 = 1e-6;

/// Which rate equation a solution refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RateKind {
    PriorMass,
    Approximation,
    Combined,
}

impl fmt::Display for RateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RateKind::PriorMass => "prior-mass",
            RateKind::Approximation => "approximation",
            RateKind::Combined => "combined",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RateSolution {
    pub n: f64,
    pub eps_n: f64,
    pub which: RateKind,
    /// `phi(eps_n) - n eps_n^2`, never positive.
    pub residual: f64,
}

/// Smallest `eps` in `domain` with `phi(eps) <= n eps^2`, by bisection in
/// `log eps` until the bracket ratio is within `1 + tol`.
pub fn solve_rate(phi: impl Fn(f64) -> f64, n: f64, domain: (f64, f64), which: RateKind, tol: f64) -> Result<RateSolution> {
    let (mut lo, mut hi) = domain;
    if !(n > 0.0) || !(lo > 0.0) || !(hi > lo) || !(tol > 0.0) {
        return Err(Error::InvalidArgument(format!("need n > 0, 0 < lo < hi, tol > 0; got n={n}, domain=({lo}, {hi}), tol={tol}")));
    }
    let g = |e: f64| phi(e) - n * e * e;
    if g(lo) <= 0.0 || g(hi) > 0.0 {
        return Err(Error::NoCrossing { lo, hi });
    }
    while hi / lo > 1.0 + tol {
        let mid = (lo * hi).sqrt();
        if g(mid) <= 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(RateSolution { n, eps_n: hi, which, residual: g(hi) })
}

/// The worse (larger) of a prior-mass and an approximation rate.
pub fn combined_rate(prior: &RateSolution, approx: &RateSolution) -> RateSolution {
    let pick = if prior.eps_n >= approx.eps_n { prior } else { approx };
    RateSolution { which: RateKind::Combined, ..pick.clone() }
}

/// Sampled nonincreasing curve, interpolated linearly in log-log
/// coordinates (linearly where a value is zero).
#[derive(Debug, Clone, PartialEq)]
pub struct TabulatedCurve {
    eps: Vec<f64>,
    values: Vec<f64>,
}

impl TabulatedCurve {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument("a tabulated curve needs at least 2 points".into()));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.iter().any(|&(e, v)| !(e > 0.0) || !(v >= 0.0) || !v.is_finite()) {
            return Err(Error::InvalidArgument("tabulated curve needs eps > 0 and finite values >= 0".into()));
        }
        if points.windows(2).any(|p| p[1].0 == p[0].0 || p[1].1 > p[0].1) {
            return Err(Error::InvalidArgument("tabulated curve must be nonincreasing with distinct eps".into()));
        }
        let (eps, values) = points.into_iter().unzip();
        Ok(Self { eps, values })
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.eps[0], *self.eps.last().unwrap())
    }

    pub fn eval(&self, e: f64) -> f64 {
        let (lo, hi) = self.domain();
        let e = e.clamp(lo, hi);
        let i = self.eps.partition_point(|&x| x <= e).clamp(1, self.eps.len() - 1);
        let (e0, e1) = (self.eps[i - 1], self.eps[i]);
        let (v0, v1) = (self.values[i - 1], self.values[i]);
        if v0 > 0.0 && v1 > 0.0 {
            let t = (e / e0).ln() / (e1 / e0).ln();
            (v0.ln() + t * (v1 / v0).ln()).exp()
        } else {
            v0 + (e - e0) / (e1 - e0) * (v1 - v0)
        }
    }

    pub fn solve_rate(&self, n: f64, which: RateKind) -> Result<RateSolution> {
        solve_rate(|e| self.eval(e), n, self.domain(), which, RATE_TOL)
    }
}

/// `(2 alpha / (2 + alpha), 2 beta / (2 + alpha))`: entropy exponents
/// matching small-ball exponents `eps^-alpha (log 1/eps)^beta`.
pub fn exponent_translate(alpha: f64, beta: f64) -> Result<(f64, f64)> {
    if !(alpha > 0.0) {
        return Err(Error::InvalidArgument(format!("alpha must be > 0, got {alpha}")));
    }
    Ok((2.0 * alpha / (2.0 + alpha), 2.0 * beta / (2.0 + alpha)))
}

/// Largest dimension accepted by [`ellipsoid_entropy`].
pub const MAX_ENTROPY_DIM: usize = 8;
const MAX_CANDIDATES: usize = 4_000_000;

/// Greedy `eps`-packing of an ellipsoid in the Euclidean norm.
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyEstimate {
    pub packing: usize,
    /// `log packing`: at most `log N(eps/2)` and at least `log N(eps)`.
    pub log_packing: f64,
}

/// Packs `{x : sum x_i^2 / a_i^2 <= 1}` greedily with points of a cubic
/// lattice of spacing `eps / 2`, in lexicographic order, keeping pairwise
/// distances `>= eps`.
pub fn ellipsoid_entropy(semiaxes: &[f64], eps: f64) -> Result<EntropyEstimate> {
    let d = semiaxes.len();
    if d > MAX_ENTROPY_DIM {
        return Err(Error::DimensionCap { dim: d, max: MAX_ENTROPY_DIM });
    }
    if d == 0 || !(eps > 0.0) || semiaxes.iter().any(|&a| !(a > 0.0)) {
        return Err(Error::InvalidArgument("need at least one positive semiaxis and eps > 0".into()));
    }
    if semiaxes.iter().all(|&a| a <= eps) {
        return Ok(EntropyEstimate { packing: 1, log_packing: 0.0 });
    }
    let step = eps / 2.0;
    let tol = 1e-12;
    let reach: Vec<i64> = semiaxes.iter().map(|&a| (a / step + tol).floor() as i64).collect();
    let count = reach.iter().try_fold(1usize, |acc, &r| acc.checked_mul(2 * r as usize + 1));
    match count {
        Some(c) if c <= MAX_CANDIDATES => {}
        _ => return Err(Error::InvalidArgument(format!("lattice too large for eps = {eps}"))),
    }
    let mut idx: Vec<i64> = reach.iter().map(|r| -r).collect();
    let mut chosen: Vec<Vec<f64>> = Vec::new();
    let eps2 = eps * eps * (1.0 - tol);
    loop {
        let x: Vec<f64> = idx.iter().map(|&k| k as f64 * step).collect();
        let q: f64 = x.iter().zip(semiaxes).map(|(x, a)| x * x / (a * a)).sum();
        if q <= 1.0 + tol && chosen.iter().all(|p| p.iter().zip(&x).map(|(a, b)| (a - b) * (a - b)).sum::<f64>() >= eps2) {
            chosen.push(x);
        }
        let mut k = d;
        loop {
            if k == 0 {
                let packing = chosen.len();
                return Ok(EntropyEstimate { packing, log_packing: (packing as f64).ln() });
            }
            k -= 1;
            if idx[k] < reach[k] {
                idx[k] += 1;
                break;
            }
            idx[k] = -reach[k];
        }
    }
}

/// Least-squares line through `(log 1/eps, log value)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogLogFit {
    pub slope: f64,
    pub intercept: f64,
}

pub fn fit_loglog(points: &[(f64, f64)]) -> Result<LogLogFit> {
    if points.len() < 3 {
        return Err(Error::InvalidArgument(format!("need >= 3 points, got {}", points.len())));
    }
    if points.iter().any(|&(e, v)| !(e > 0.0) || !(v > 0.0)) {
        return Err(Error::InvalidArgument("eps and values must be positive".into()));
    }
    let x = DMatrix::from_fn(points.len(), 2, |i, j| if j == 0 { 1.0 } else { (1.0 / points[i].0).ln() });
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.1.ln()));
    let sol = (x.transpose() * &x)
        .lu()
        .solve(&(x.transpose() * y))
        .ok_or_else(|| Error::InvalidArgument("eps values must not all coincide".into()))?;
    Ok(LogLogFit { slope: sol[1], intercept: sol[0] })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::grid::{make_grid, norm_of_values};
    use crate::kernels::KernelSpec;
    use crate::spectral::{eig_basis, reconstruct, DEFAULT_TRUNCATION_TOL};

    fn distance(basis: &SpectralBasis<f64>, a: &[f64], b: &[f64], norm: NormKind) -> f64 {
        let diff: Vec<f64> = a.iter().zip(b).map(|(&x, &y)| x - y).collect();
        norm_of_values(basis.grid().weights(), &diff, norm)
    }

    fn unit_basis() -> SpectralBasis<f64> {
        let g = make_grid(5).unwrap();
        let one = GridFunction::from_fn(g.clone(), |_| 1.0);
        SpectralBasis::from_parts(g, vec![1.0], vec![one]).unwrap()
    }

    #[test]
    fn scalar_l2_problem() {
        let b = unit_basis();
        let w = GridFunction::from_fn(b.grid().clone(), |_| 1.0);
        let r = approx_term(&w, &b, 0.5, NormKind::L2).unwrap();
        assert!((r.coeffs[0] - 0.5).abs() < 1e-12);
        assert!((r.value - 0.125).abs() < 1e-12);
        let s = approx_term(&w, &b, 0.5, NormKind::Sup).unwrap();
        assert!((s.value - 0.125).abs() < 1e-8);
    }

    #[test]
    fn zero_target_and_bad_eps() {
        let g = make_grid::<f64>(101).unwrap();
        let b = eig_basis(&KernelSpec::BrownianMotion, &g, DEFAULT_TRUNCATION_TOL).unwrap();
        let w = GridFunction::zeros(g);
        for norm in [NormKind::L2, NormKind::Sup] {
            let r = approx_term(&w, &b, 0.1, norm).unwrap();
            assert!(r.value.abs() < 1e-10);
            assert!(approx_term(&w, &b, 0.0, norm).is_err());
        }
    }

    #[test]
    fn l2_kkt_residual_and_value_bounds() {
        let g = make_grid::<f64>(201).unwrap();
        let b = eig_basis(&KernelSpec::BrownianMotion, &g, DEFAULT_TRUNCATION_TOL).unwrap();
        let w = GridFunction::from_fn(g, |t| t);
        let full = {
            let wj = project(&w, &b).unwrap();
            0.5 * wj.iter().zip(b.eigenvalues()).map(|(w, l)| w * w / l).sum::<f64>()
        };
        let mut prev = 0.0;
        for eps in [0.3, 0.1, 0.03, 0.01, 0.001] {
            let r = approx_term(&w, &b, eps, NormKind::L2).unwrap();
            let mu = r.multiplier.unwrap();
            let wj = project(&w, &b).unwrap();
            for ((h, w), l) in r.coeffs.iter().zip(&wj).zip(b.eigenvalues()) {
                assert!((h * (1.0 + mu * l) - mu * l * w).abs() < 1e-8);
            }
            assert!(r.value <= full + 1e-12 && r.value >= prev);
            let sup = approx_term(&w, &b, eps, NormKind::Sup).unwrap();
            assert!(sup.value >= r.value - 1e-8, "eps={eps} sup={} l2={}", sup.value, r.value);
            prev = r.value;
        }
        assert!((prev - full).abs() / full < 0.02, "prev={prev} full={full}");
    }

    #[test]
    fn l2_infeasible_outside_span() {
        let g = make_grid::<f64>(21).unwrap();
        let b = eig_basis(&KernelSpec::BrownianMotion, &g, DEFAULT_TRUNCATION_TOL).unwrap().truncated(1).unwrap();
        let w = GridFunction::from_fn(g, |t: f64| (9.0 * t).sin());
        assert!(matches!(approx_term(&w, &b, 0.01, NormKind::L2), Err(Error::Infeasible(_))));
    }

    #[test]
    fn sup_constraints_hold_at_grid_points() {
        let g = make_grid::<f64>(101).unwrap();
        let b = eig_basis(&KernelSpec::BrownianMotion, &g, DEFAULT_TRUNCATION_TOL).unwrap();
        let w = GridFunction::from_fn(g, |t: f64| (3.0 * t).sin());
        let r = approx_term(&w, &b, 0.05, NormKind::Sup).unwrap();
        let h = reconstruct(&r.coeffs, &b).unwrap();
        assert!(distance(&b, h.values(), w.values(), NormKind::Sup) <= 0.05 + 1e-8);
        assert!(r.gap >= 0.0);
    }

    #[test]
    fn rate_closed_forms() {
        let r = solve_rate(|e| e.powi(-2), 1e4, (1e-9, 1e9), RateKind::PriorMass, RATE_TOL).unwrap();
        assert!((r.eps_n - 0.1).abs() / 0.1 <= 1e-6);
        assert!(r.residual <= 0.0);
        let c = solve_rate(|_| 3.0, 12.0, (1e-9, 1e9), RateKind::PriorMass, RATE_TOL).unwrap();
        assert!((c.eps_n - 0.5).abs() / 0.5 <= 1e-6);
        assert!(matches!(solve_rate(|_| 3.0, 12.0, (1.0, 2.0), RateKind::PriorMass, RATE_TOL), Err(Error::NoCrossing { .. })));
    }

    #[test]
    fn tabulated_rate_matches_callable() {
        let pts: Vec<(f64, f64)> = (0..40).map(|i| {
            let e = 10f64.powf(-3.0 + 3.0 * i as f64 / 39.0);
            (e, e.powf(-1.5))
        }).collect();
        let curve = TabulatedCurve::new(pts).unwrap();
        let r = curve.solve_rate(1e5, RateKind::PriorMass).unwrap();
        let want = 1e5f64.powf(-1.0 / 3.5);
        assert!((r.eps_n - want).abs() / want < 1e-6);
        let smaller = r.eps_n * (1.0 - 10.0 * RATE_TOL);
        assert!(curve.eval(smaller) > 1e5 * smaller * smaller);
    }

    #[test]
    fn combined_takes_the_worse_rate() {
        let a = RateSolution { n: 1.0, eps_n: 0.1, which: RateKind::PriorMass, residual: 0.0 };
        let b = RateSolution { n: 1.0, eps_n: 0.2, which: RateKind::Approximation, residual: 0.0 };
        let c = combined_rate(&a, &b);
        assert_eq!(c.eps_n, 0.2);
        assert_eq!(c.which, RateKind::Combined);
    }

    #[test]
    fn exponent_translation() {
        assert_eq!(exponent_translate(2.0, 0.0).unwrap(), (1.0, 0.0));
        assert_eq!(exponent_translate(2.0, 2.0).unwrap(), (1.0, 1.0));
        assert!((exponent_translate(1e9, 0.0).unwrap().0 - 2.0).abs() < 1e-8);
        assert!(exponent_translate(0.0, 1.0).is_err());
    }

    #[test]
    fn packing_counts() {
        assert_eq!(ellipsoid_entropy(&[0.3, 0.2], 0.5).unwrap().packing, 1);
        let one = ellipsoid_entropy(&[1.0], 0.1).unwrap();
        assert!((10..=21).contains(&one.packing), "{}", one.packing);
        assert!(ellipsoid_entropy(&[1.0, 1.0], 0.5).unwrap().packing >= 4);
        assert!(matches!(ellipsoid_entropy(&[1.0; 9], 0.5), Err(Error::DimensionCap { dim: 9, max: 8 })));
        let small = ellipsoid_entropy(&[1.0, 0.5, 0.25], 0.2).unwrap().packing;
        let big = ellipsoid_entropy(&[1.0, 0.5, 0.25], 0.1).unwrap().packing;
        assert!(big > small);
    }

    #[test]
    fn loglog_fits() {
        let pts = |f: &dyn Fn(f64) -> f64| [0.2, 0.1, 0.05, 0.02].iter().map(|&e| (e, f(e))).collect::<Vec<_>>();
        assert!((fit_loglog(&pts(&|e| 1.0 / e)).unwrap().slope - 1.0).abs() < 1e-10);
        assert!((fit_loglog(&pts(&|e| 3.0 * e.powf(-2.0 / 3.0))).unwrap().slope - 2.0 / 3.0).abs() < 1e-10);
        assert!(fit_loglog(&pts(&|_| 5.0)).unwrap().slope.abs() < 1e-10);
        assert!(fit_loglog(&[(0.1, 1.0), (0.2, 1.0)]).is_err());
        assert!(fit_loglog(&[(0.1, 1.0), (0.2, 0.0), (0.3, 1.0)]).is_err());
    }

    #[test]
    fn concentration_curve_is_monotone() {
        let g = make_grid::<f64>(101).unwrap();
        let b = Arc::new(eig_basis(&KernelSpec::BrownianMotion, &g, DEFAULT_TRUNCATION_TOL).unwrap());
        let w = GridFunction::from_fn(g, |t| t);
        let c = concentration_fn(&w, &b, &[0.8, 0.5, 0.3], NormKind::L2, 4000, 3).unwrap();
        assert_eq!(c.points.len(), 3);
        assert!(c.points.windows(2).all(|p| p[1].phi >= p[0].phi && p[1].approx_term >= p[0].approx_term));
        assert!(concentration_fn(&w, &b, &[0.3, 0.5], NormKind::L2, 4000, 3).is_err());
    }
}
