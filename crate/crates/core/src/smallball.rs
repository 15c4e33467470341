//! Monte Carlo small-ball probabilities and the statistical checks built on
//! them: the shift inequality, the concentration-function sandwich, Borell's
//! inequality and the tail bound around the median.
//!
//! Probabilities and standard errors are reported in `f64` whatever the
//! scalar type of the basis. Every check allows three standard errors of
//! slack.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::concentration::approx_term;
use crate::error::{Error, Result};
use crate::grid::{check_same_grid, norm_of_values, GridFunction, NormKind};
use crate::report::CheckReport;
use crate::rkhs::{rkhs_norm_series, RkhsElement};
use crate::sampler::{map_draws, normal_cdf, normal_quantile, sample_exact, symmetric_sqrt};
use crate::spectral::SpectralBasis;
use crate::Scalar;

/// Minimum number of trials accepted by the estimators.
pub const MIN_TRIALS: usize = 100;
/// Two-sided 95% normal quantile.
pub const Z95: f64 = 1.959963984540054;
/// One-sided 95% normal quantile, used when no hits were seen.
pub const Z95_ONE_SIDED: f64 = 1.6448536269514722;
/// Slack multiplier for all statistical checks.
pub const SLACK_SE: f64 = 3.0;

#[derive(Debug, Clone, PartialEq)]
pub struct SmallBallEstimate {
    pub eps: f64,
    pub norm: NormKind,
    /// Grid values of the ball center, `None` for the origin.
    pub center: Option<Vec<f64>>,
    pub hits: u64,
    pub trials: u64,
    pub p_hat: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    /// `-log p_hat`, `+inf` when there were no hits.
    pub neg_log_p: f64,
}

impl SmallBallEstimate {
    fn new(eps: f64, norm: NormKind, center: Option<Vec<f64>>, hits: u64, trials: u64) -> Self {
        let p_hat = hits as f64 / trials as f64;
        let (ci_low, ci_high) = wilson(hits, trials);
        let neg_log_p = if hits == 0 { f64::INFINITY } else { -p_hat.ln() };
        Self { eps, norm, center, hits, trials, p_hat, ci_low, ci_high, neg_log_p }
    }

    pub fn is_sentinel(&self) -> bool {
        self.hits == 0
    }

    /// Binomial standard error of `p_hat`.
    pub fn se(&self) -> f64 {
        (self.p_hat * (1.0 - self.p_hat) / self.trials as f64).sqrt()
    }

    /// Delta-method standard error of `-log p_hat`; infinite without hits.
    pub fn neg_log_se(&self) -> f64 {
        if self.hits == 0 {
            f64::INFINITY
        } else {
            self.se() / self.p_hat
        }
    }
}

/// 95% Wilson score interval. With zero (or all) hits the open side uses
/// the one-sided quantile and the other side is pinned at 0 (or 1).
pub fn wilson(hits: u64, trials: u64) -> (f64, f64) {
    let n = trials as f64;
    if hits == 0 {
        let z2 = Z95_ONE_SIDED * Z95_ONE_SIDED;
        return (0.0, z2 / (n + z2));
    }
    if hits == trials {
        let z2 = Z95_ONE_SIDED * Z95_ONE_SIDED;
        return (n / (n + z2), 1.0);
    }
    let p = hits as f64 / n;
    let z2 = Z95 * Z95;
    let denom = 1.0 + z2 / n;
    let mid = (p + z2 / (2.0 * n)) / denom;
    let half = Z95 * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    ((mid - half).max(0.0), (mid + half).min(1.0))
}

fn check_trials(trials: usize) -> Result<()> {
    if trials < MIN_TRIALS {
        return Err(Error::InvalidArgument(format!("trials must be >= {MIN_TRIALS}, got {trials}")));
    }
    Ok(())
}

/// `||path_k - center||` for draws `0 .. trials`.
pub fn draw_norms<T: Scalar>(
    basis: &SpectralBasis<T>,
    center: Option<&GridFunction<T>>,
    norm: NormKind,
    trials: usize,
    seed: u64,
) -> Result<Vec<T>> {
    if let Some(c) = center {
        check_same_grid(c.grid(), basis.grid())?;
    }
    let weights = basis.grid().weights();
    let center = center.map(|c| c.values());
    Ok(map_draws(basis, 0, trials, seed, |_, _, path| match center {
        Some(c) => {
            let d: Vec<T> = path.iter().zip(c).map(|(&p, &c)| p - c).collect();
            norm_of_values(weights, &d, norm)
        }
        None => norm_of_values(weights, path, norm),
    }))
}

/// Small-ball estimates at several radii from one set of draws.
pub fn smallball_curve<T: Scalar>(
    basis: &SpectralBasis<T>,
    eps_list: &[T],
    norm: NormKind,
    center: Option<&GridFunction<T>>,
    trials: usize,
    seed: u64,
) -> Result<Vec<SmallBallEstimate>> {
    check_trials(trials)?;
    if let Some(e) = eps_list.iter().find(|e| !(**e > T::zero())) {
        return Err(Error::InvalidArgument(format!("eps must be > 0, got {e}")));
    }
    let norms = draw_norms(basis, center, norm, trials, seed)?;
    let center_values = center.map(|c| c.values().iter().map(|v| v.as_f64()).collect::<Vec<_>>());
    Ok(eps_list
        .iter()
        .map(|&eps| {
            let hits = norms.iter().filter(|&&v| v < eps).count() as u64;
            SmallBallEstimate::new(eps.as_f64(), norm, center_values.clone(), hits, trials as u64)
        })
        .collect())
}

/// `P(||W - center|| < eps)` by plain Monte Carlo over KL draws.
pub fn smallball_mc<T: Scalar>(
    basis: &SpectralBasis<T>,
    eps: T,
    norm: NormKind,
    center: Option<&GridFunction<T>>,
    trials: usize,
    seed: u64,
) -> Result<SmallBallEstimate> {
    Ok(smallball_curve(basis, &[eps], norm, center, trials, seed)?.remove(0))
}

/// `P(W - h in C) >= exp(-||h||_H^2 / 2) P(W in C)` for `C` the centered
/// `eps`-ball.
pub fn check_shift_inequality<T: Scalar>(
    basis: &SpectralBasis<T>,
    h: &RkhsElement<T>,
    eps: T,
    norm: NormKind,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    if !h.shares_basis(basis) {
        return Err(Error::BasisMismatch);
    }
    let shifted = smallball_mc(basis, eps, norm, Some(&h.to_function()), trials, seed)?;
    let centered = smallball_mc(basis, eps, norm, None, trials, seed)?;
    let hn = rkhs_norm_series(h).as_f64();
    let factor = (-0.5 * hn * hn).exp();
    let slack = SLACK_SE * shifted.se().hypot(factor * centered.se());
    let passed = shifted.p_hat >= factor * centered.p_hat - slack;
    Ok(CheckReport::new("shift", shifted.p_hat, factor * centered.p_hat, slack, passed).with_detail(format!(
        "eps={} norm={norm} |h|_H={hn:.6}",
        eps.as_f64()
    )))
}

/// `phi_w(eps) <= -log P(||W - w|| < eps) <= phi_w(eps / 2)`.
///
/// When the centered ball at `eps / 2` sees no hits its exponent is
/// replaced by the lower bound `-log ci_high`, which only makes the upper
/// comparison harder to pass.
pub fn check_sandwich<T: Scalar>(
    basis: &SpectralBasis<T>,
    w: &GridFunction<T>,
    eps: T,
    norm: NormKind,
    trials: usize,
    seed: u64,
) -> Result<CheckReport> {
    let half_eps = eps / T::lit(2.0);
    let decentered = smallball_mc(basis, eps, norm, Some(w), trials, seed)?;
    let centered = smallball_curve(basis, &[eps, half_eps], norm, None, trials, seed)?;
    let outer = approx_term(w, basis, eps, norm)?;
    let inner = approx_term(w, basis, half_eps, norm)?;
    let label = format!("eps={} norm={norm}", eps.as_f64());

    if decentered.is_sentinel() || centered[0].is_sentinel() {
        return Ok(CheckReport::new("sandwich", f64::INFINITY, f64::NAN, 0.0, false)
            .with_detail(format!("{label}: no small-ball hits, exponent not estimable")));
    }
    let middle = decentered.neg_log_p;
    let phi_outer = outer.value.as_f64() + centered[0].neg_log_p;
    let (inner_exp, inner_se) = if centered[1].is_sentinel() {
        (-centered[1].ci_high.ln(), 0.0)
    } else {
        (centered[1].neg_log_p, centered[1].neg_log_se())
    };
    let phi_inner = inner.value.as_f64() + inner_exp;
    let slack_low = SLACK_SE * decentered.neg_log_se().hypot(centered[0].neg_log_se()) + outer.gap.as_f64();
    let slack_high = SLACK_SE * decentered.neg_log_se().hypot(inner_se) + inner.gap.as_f64();
    let passed = phi_outer - slack_low <= middle && middle <= phi_inner + slack_high;
    Ok(CheckReport::new("sandwich", middle, phi_inner, slack_high.max(slack_low), passed)
        .with_detail(format!("{label} phi(eps)={phi_outer:.6} phi(eps/2)={phi_inner:.6}")))
}

/// Euclidean distance from `y` (eigen coordinates) to the ellipsoid with
/// semiaxes `a`, some of which may be zero.
fn distance_to_ellipsoid(y: &[f64], a: &[f64]) -> f64 {
    let proj = |tau: f64| -> Vec<f64> {
        y.iter().zip(a).map(|(&y, &a)| if a > 0.0 { y * a * a / (a * a + tau) } else { 0.0 }).collect()
    };
    let level = |p: &[f64]| p.iter().zip(a).filter(|(_, &a)| a > 0.0).map(|(p, a)| p * p / (a * a)).sum::<f64>();
    let p0 = proj(0.0);
    let p = if level(&p0) <= 1.0 {
        p0
    } else {
        let (mut lo, mut hi) = (0.0f64, 1.0f64);
        while level(&proj(hi)) > 1.0 {
            hi *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if level(&proj(mid)) > 1.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        proj(hi)
    };
    y.iter().zip(&p).map(|(y, p)| (y - p) * (y - p)).sum::<f64>().sqrt()
}

/// Borell's inequality `P(W in eps B_1 + M H_1) >= Phi(Phi^-1(P(|W| < eps)) + M)`
/// for a Gaussian vector in dimension one or two, Euclidean norm.
pub fn check_borell(cov: &DMatrix<f64>, eps: f64, m: f64, trials: usize, seed: u64) -> Result<CheckReport> {
    let d = cov.nrows();
    if d > 2 {
        return Err(Error::DimensionCap { dim: d, max: 2 });
    }
    check_trials(trials)?;
    if !(eps > 0.0) || !(m >= 0.0) {
        return Err(Error::InvalidArgument(format!("need eps > 0 and M >= 0, got eps={eps}, M={m}")));
    }
    let eig = cov.clone().symmetric_eigen();
    let axes: Vec<f64> = eig.eigenvalues.iter().map(|&l| m * l.max(0.0).sqrt()).collect();
    let u = eig.eigenvectors;
    let draws = sample_exact(cov, trials, seed)?;
    let (in_ball, in_sum) = draws
        .par_iter()
        .map(|x| {
            let y: Vec<f64> = u.tr_mul(x).iter().copied().collect();
            ((x.norm() < eps) as u64, (distance_to_ellipsoid(&y, &axes) <= eps) as u64)
        })
        .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
    let n = trials as f64;
    let p0 = in_ball as f64 / n;
    let lhs = SmallBallEstimate::new(eps, NormKind::L2, None, in_sum, trials as u64);
    let (rhs, rhs_se) = if in_ball == 0 {
        (0.0, 0.0)
    } else if in_ball == trials as u64 {
        (1.0, 0.0)
    } else {
        let q = normal_quantile(p0);
        let dens = |x: f64| (-0.5 * x * x).exp();
        let se_p = (p0 * (1.0 - p0) / n).sqrt();
        (normal_cdf(q + m), dens(q + m) / dens(q) * se_p)
    };
    let slack = SLACK_SE * lhs.se().hypot(rhs_se);
    let passed = lhs.p_hat >= rhs - slack;
    Ok(CheckReport::new("borell", lhs.p_hat, rhs, slack, passed)
        .with_detail(format!("dim={d} eps={eps} M={m} P(|W|<eps)={p0:.6}")))
}

fn median(sorted: &[f64]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    }
}

fn tail_report(mut norms: Vec<f64>, sigma: f64, x: f64, label: String) -> Result<CheckReport> {
    if !(x > 0.0) {
        return Err(Error::InvalidArgument(format!("x must be > 0, got {x}")));
    }
    norms.sort_by(f64::total_cmp);
    let med = median(&norms);
    let n = norms.len() as f64;
    let freq = norms.iter().filter(|&&v| v - med > x).count() as f64 / n;
    let se = (freq * (1.0 - freq) / n).sqrt();
    let bound = 1.0 - normal_cdf(x / sigma);
    let slack = SLACK_SE * se;
    Ok(CheckReport::new("tail", freq, bound, slack, freq - slack <= bound)
        .with_detail(format!("{label} x={x} median={med:.6} sigma={sigma:.6}")))
}

/// `P(||W|| - M(W) > x) <= 1 - Phi(x / sigma(W))` for the sup norm of KL
/// paths, with `sigma^2 = max_t K(t, t)`.
pub fn check_tail<T: Scalar>(basis: &SpectralBasis<T>, x: f64, trials: usize, seed: u64) -> Result<CheckReport> {
    check_trials(trials)?;
    let norms = draw_norms(basis, None, NormKind::Sup, trials, seed)?.into_iter().map(|v| v.as_f64()).collect();
    let sigma = basis.kernel_diagonal().iter().fold(0.0f64, |m, v| m.max(v.as_f64())).sqrt();
    tail_report(norms, sigma, x, "norm=sup".into())
}

/// Tail check for a Gaussian vector in the max norm.
pub fn check_tail_cov(cov: &DMatrix<f64>, x: f64, trials: usize, seed: u64) -> Result<CheckReport> {
    check_trials(trials)?;
    symmetric_sqrt(cov)?;
    let norms = sample_exact(cov, trials, seed)?.iter().map(|v: &DVector<f64>| v.amax()).collect();
    let sigma = cov.diagonal().iter().fold(0.0f64, |m, &v| m.max(v)).sqrt();
    tail_report(norms, sigma, x, format!("dim={}", cov.nrows()))
}

/// Closed forms for a scalar standard normal `W`, where the RKHS norm of
/// `h` is `|h|` and every norm is the absolute value.
pub mod scalar {
    use crate::sampler::{normal_cdf, normal_quantile};

    /// `(P(|Z - mu| < eps), exp(-mu^2 / 2) P(|Z| < eps))`.
    pub fn shift(mu: f64, eps: f64) -> (f64, f64) {
        let lhs = normal_cdf(eps - mu) - normal_cdf(-eps - mu);
        (lhs, (-0.5 * mu * mu).exp() * ball(eps))
    }

    /// `P(|Z| < eps)`.
    pub fn ball(eps: f64) -> f64 {
        2.0 * normal_cdf(eps) - 1.0
    }

    /// `phi_w(eps) = max(|w| - eps, 0)^2 / 2 - log P(|Z| < eps)`.
    pub fn concentration(w: f64, eps: f64) -> f64 {
        let gap = (w.abs() - eps).max(0.0);
        0.5 * gap * gap - ball(eps).ln()
    }

    /// `(phi_w(eps), -log P(|Z - w| < eps), phi_w(eps / 2))`.
    pub fn sandwich(w: f64, eps: f64) -> (f64, f64, f64) {
        let middle = -(normal_cdf(w + eps) - normal_cdf(w - eps)).ln();
        (concentration(w, eps), middle, concentration(w, eps / 2.0))
    }

    /// `(P(|Z| <= eps + M), Phi(Phi^-1(P(|Z| < eps)) + M))`.
    pub fn borell(eps: f64, m: f64) -> (f64, f64) {
        (ball(eps + m), normal_cdf(normal_quantile(ball(eps)) + m))
    }

    /// `(median of |Z|, 1 - Phi(x), P(|Z| - median > x))`.
    pub fn tail(x: f64) -> (f64, f64, f64) {
        let med = normal_quantile(0.75);
        (med, 1.0 - normal_cdf(x), 2.0 * (1.0 - normal_cdf(med + x)))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::Arc;

    use crate::grid::make_grid;
    use crate::kernels::KernelSpec;
    use crate::spectral::{eig_basis, DEFAULT_TRUNCATION_TOL};

    fn unit_basis() -> SpectralBasis<f64> {
        let g = make_grid(5).unwrap();
        let one = GridFunction::from_fn(g.clone(), |_| 1.0);
        SpectralBasis::from_parts(g, vec![1.0], vec![one]).unwrap()
    }

    fn bm(n: usize) -> Arc<SpectralBasis<f64>> {
        let g = make_grid(n).unwrap();
        Arc::new(eig_basis(&KernelSpec::BrownianMotion, &g, DEFAULT_TRUNCATION_TOL).unwrap())
    }

    #[test]
    fn wilson_interval_properties() {
        for (h, n) in [(0u64, 100u64), (1, 100), (50, 100), (99, 100), (100, 100), (3, 100000)] {
            let (lo, hi) = wilson(h, n);
            let p = h as f64 / n as f64;
            assert!(0.0 <= lo && lo <= p && p <= hi && hi <= 1.0, "{h}/{n}: [{lo}, {hi}]");
        }
        // textbook value for 50/100
        let (lo, hi) = wilson(50, 100);
        assert!((lo - 0.4038).abs() < 1e-4 && (hi - 0.5962).abs() < 1e-4);
    }

    #[test]
    fn scalar_ball_probability() {
        let b = unit_basis();
        let e = smallball_mc(&b, 1.0, NormKind::Sup, None, 100_000, 1).unwrap();
        let truth = scalar::ball(1.0);
        assert!((truth - 0.682689492).abs() < 1e-9);
        assert!((e.p_hat - truth).abs() < 3.0 * e.se());
    }

    #[test]
    fn huge_and_far_balls() {
        let b = bm(51);
        let big = smallball_mc(&b, 100.0, NormKind::Sup, None, 1000, 2).unwrap();
        assert_eq!(big.hits, 1000);
        let far = GridFunction::from_fn(b.grid().clone(), |_| 50.0);
        let e = smallball_mc(&b, 0.1, NormKind::Sup, Some(&far), 1000, 2).unwrap();
        assert_eq!(e.hits, 0);
        assert!(e.neg_log_p.is_infinite() && e.is_sentinel());
        assert!(smallball_mc(&b, 0.0, NormKind::Sup, None, 1000, 2).is_err());
        assert!(smallball_mc(&b, 1.0, NormKind::Sup, None, 99, 2).is_err());
    }

    #[test]
    fn monotone_in_eps_and_anderson() {
        let b = bm(101);
        let eps = [1.2, 0.9, 0.7, 0.5];
        let c = smallball_curve(&b, &eps, NormKind::Sup, None, 20_000, 4).unwrap();
        assert!(c.windows(2).all(|p| p[1].hits <= p[0].hits));
        let center = GridFunction::from_fn(b.grid().clone(), |t: f64| 0.4 * (3.0 * t).sin());
        let d = smallball_curve(&b, &eps, NormKind::Sup, Some(&center), 20_000, 4).unwrap();
        for (c, d) in c.iter().zip(&d) {
            assert!(c.p_hat >= d.p_hat - 3.0 * c.se().hypot(d.se()));
        }
    }

    #[test]
    fn scalar_closed_forms() {
        let (l, r) = scalar::shift(1.0, 0.5);
        assert!((l - 0.2417).abs() < 1e-4 && (r - 0.2322).abs() < 1e-4);
        let (l, r) = scalar::borell(0.1, 1.0);
        assert!((l - 0.7287).abs() < 1e-3 && (r - 0.342).abs() < 1e-3);
        let (l0, r0) = scalar::borell(0.3, 0.0);
        assert!((l0 - r0).abs() < 1e-9);
        let (med, bound, truth) = scalar::tail(1.0);
        assert!((med - 0.6745).abs() < 1e-4 && (bound - 0.1587).abs() < 1e-4 && (truth - 0.094).abs() < 1e-3);
        let (a, m, c) = scalar::sandwich(1.0, 0.5);
        assert!(a <= m && m <= c, "{a} {m} {c}");
    }

    #[test]
    fn scalar_checks_agree_with_closed_forms() {
        let b = unit_basis();
        let basis = Arc::new(b.clone());
        let h = RkhsElement::new(basis.clone(), vec![1.0]).unwrap();
        let r = check_shift_inequality(&basis, &h, 0.5, NormKind::Sup, 100_000, 9).unwrap();
        assert!(r.passed, "{r}");
        let (l, _) = scalar::shift(1.0, 0.5);
        assert!((r.lhs - l).abs() < 0.01);

        let w = GridFunction::from_fn(b.grid().clone(), |_| 1.0);
        let s = check_sandwich(&b, &w, 0.5, NormKind::Sup, 100_000, 9).unwrap();
        assert!(s.passed, "{s}");
        let (_, mid, _) = scalar::sandwich(1.0, 0.5);
        assert!((s.lhs - mid).abs() < 0.05);

        let one = DMatrix::from_element(1, 1, 1.0);
        let bo = check_borell(&one, 0.1, 1.0, 100_000, 9).unwrap();
        assert!(bo.passed, "{bo}");
        assert!((bo.lhs - 0.7287).abs() < 0.01);
        let t = check_tail_cov(&one, 1.0, 100_000, 9).unwrap();
        assert!(t.passed && (t.lhs - 0.094).abs() < 0.005, "{t}");
    }

    #[test]
    fn zero_shift_is_trivial() {
        let b = bm(51);
        let r = check_shift_inequality(&b, &RkhsElement::zero(b.clone()), 0.5, NormKind::Sup, 2000, 1).unwrap();
        assert!(r.passed && r.lhs == r.rhs);
    }

    #[test]
    fn borell_two_dimensional_and_cap() {
        let id = DMatrix::<f64>::identity(2, 2);
        assert!(check_borell(&id, 0.5, 2.0, 20_000, 5).unwrap().passed);
        let degenerate = DMatrix::from_row_slice(2, 2, &[1.0, 1.0, 1.0, 1.0]);
        assert!(check_borell(&degenerate, 0.3, 1.0, 20_000, 5).unwrap().passed);
        assert!(matches!(check_borell(&DMatrix::identity(3, 3), 0.5, 1.0, 1000, 5), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn ellipsoid_distance() {
        assert_eq!(distance_to_ellipsoid(&[0.5, 0.0], &[1.0, 1.0]), 0.0);
        assert!((distance_to_ellipsoid(&[3.0, 0.0], &[1.0, 2.0]) - 2.0).abs() < 1e-12);
        assert!((distance_to_ellipsoid(&[0.0, 3.0], &[1.0, 2.0]) - 1.0).abs() < 1e-12);
        assert!((distance_to_ellipsoid(&[1.0, 1.0], &[0.0, 0.0]) - 2f64.sqrt()).abs() < 1e-12);
        assert!((distance_to_ellipsoid(&[0.5, 1.0], &[1.0, 0.0]) - 1.0).abs() < 1e-12);
    }
}
