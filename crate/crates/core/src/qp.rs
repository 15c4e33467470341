//! Box-constrained minimum-norm problem
//!
//! ```text
//! minimize  ||c||^2 / 2   subject to   |A c - w|_i <= eps  for every row i
//! ```
//!
//! solved by a Mehrotra predictor-corrector interior-point method. The
//! Newton system reduces to `I + A^T D A` with `D` diagonal, which is always
//! positive definite.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::Scalar;

#[derive(Debug, Clone)]
pub struct QpSolution<T> {
    pub c: DVector<T>,
    /// Multipliers of the upper and lower constraints.
    pub z_upper: DVector<T>,
    pub z_lower: DVector<T>,
    pub primal: T,
    pub dual: T,
    pub max_violation: T,
    pub iterations: usize,
}

const MAX_ITER: usize = 200;

fn max_step<T: Scalar>(x: &DVector<T>, dx: &DVector<T>) -> T {
    x.iter().zip(dx.iter()).fold(T::one(), |a, (&x, &d)| if d < T::zero() { a.min(-x / d) } else { a })
}

pub fn solve_box_qp<T: Scalar>(a: &DMatrix<T>, w: &DVector<T>, eps: T) -> Result<QpSolution<T>> {
    let (n, m) = a.shape();
    if w.len() != n {
        return Err(Error::LengthMismatch { expected: n, got: w.len() });
    }
    if eps <= T::zero() {
        return Err(Error::InvalidArgument(format!("eps must be > 0, got {eps}")));
    }
    let one = T::one();
    let tol = T::check_tol(1e-10);
    let scale = one + w.amax() + eps;
    // constraints: A c + s1 = w + eps, -A c + s2 = eps - w
    let g1 = w.add_scalar(eps);
    let g2 = w.map(|v| eps - v);
    let mut c = DVector::<T>::zeros(m);
    let start = scale.max(one);
    let mut s1 = DVector::from_element(n, start);
    let mut s2 = DVector::from_element(n, start);
    let mut z1 = DVector::from_element(n, one);
    let mut z2 = DVector::from_element(n, one);
    let at = a.transpose();
    let total = T::from_usize_lossy(2 * n);

    for iter in 0..MAX_ITER {
        let ac = a * &c;
        let rp1 = &ac + &s1 - &g1;
        let rp2 = -&ac + &s2 - &g2;
        let rd = &c + &at * (&z1 - &z2);
        let mu = (s1.dot(&z1) + s2.dot(&z2)) / total;
        let viol = rp1.amax().max(rp2.amax());
        if viol <= tol * scale && rd.amax() <= tol * (one + c.amax()) && mu <= tol * T::lit(1e-2) * scale {
            return Ok(finish(a, w, eps, c, z1, z2, iter));
        }
        if z1.amax().max(z2.amax()) > T::lit(1e14) {
            return Err(Error::Infeasible(format!("no function in the span lies within {eps} of the target")));
        }

        let cap = T::lit(1e14);
        let d1 = z1.component_div(&s1).map(|v| v.min(cap));
        let d2 = z2.component_div(&s2).map(|v| v.min(cap));
        let mut k = DMatrix::<T>::identity(m, m);
        let dsum = &d1 + &d2;
        let mut scaled = a.clone();
        for (i, mut row) in scaled.row_iter_mut().enumerate() {
            row *= dsum[i];
        }
        k.gemm(one, &at, &scaled, one);
        let chol = k
            .cholesky()
            .ok_or_else(|| Error::NotConverged("interior-point Newton matrix lost definiteness".into()))?;

        // rc = s o z - target; solve for (dc, ds, dz)
        let solve = |rc1: &DVector<T>, rc2: &DVector<T>| {
            let v1 = d1.component_mul(&rp1) - rc1.component_div(&s1);
            let v2 = d2.component_mul(&rp2) - rc2.component_div(&s2);
            let rhs = -&rd - &at * (&v1 - &v2);
            let dc = chol.solve(&rhs);
            let adc = a * &dc;
            let dz1 = d1.component_mul(&(&adc + &rp1)) - rc1.component_div(&s1);
            let dz2 = d2.component_mul(&(-&adc + &rp2)) - rc2.component_div(&s2);
            let ds1 = -(rc1 + s1.component_mul(&dz1)).component_div(&z1);
            let ds2 = -(rc2 + s2.component_mul(&dz2)).component_div(&z2);
            (dc, ds1, ds2, dz1, dz2)
        };

        let rc1 = s1.component_mul(&z1);
        let rc2 = s2.component_mul(&z2);
        let (_, ds1a, ds2a, dz1a, dz2a) = solve(&rc1, &rc2);
        let alpha_p = max_step(&s1, &ds1a).min(max_step(&s2, &ds2a));
        let alpha_d = max_step(&z1, &dz1a).min(max_step(&z2, &dz2a));
        let alpha = alpha_p.min(alpha_d);
        let mu_aff = ((&s1 + &ds1a * alpha).dot(&(&z1 + &dz1a * alpha))
            + (&s2 + &ds2a * alpha).dot(&(&z2 + &dz2a * alpha)))
            / total;
        let sigma = (mu_aff / mu).powi(3).min(one);

        let target = sigma * mu;
        let rc1 = rc1 + ds1a.component_mul(&dz1a).add_scalar(-target);
        let rc2 = rc2 + ds2a.component_mul(&dz2a).add_scalar(-target);
        let (dc, ds1, ds2, dz1, dz2) = solve(&rc1, &rc2);
        let eta = T::lit(0.99);
        let alpha = (eta * max_step(&s1, &ds1).min(max_step(&s2, &ds2)).min(max_step(&z1, &dz1)).min(max_step(&z2, &dz2)))
            .min(one);
        c += dc * alpha;
        s1 += ds1 * alpha;
        s2 += ds2 * alpha;
        z1 += dz1 * alpha;
        z2 += dz2 * alpha;
    }
    Err(Error::NotConverged(format!("interior-point method did not converge in {MAX_ITER} iterations")))
}

fn finish<T: Scalar>(
    a: &DMatrix<T>,
    w: &DVector<T>,
    eps: T,
    c: DVector<T>,
    z1: DVector<T>,
    z2: DVector<T>,
    iterations: usize,
) -> QpSolution<T> {
    let half = T::lit(0.5);
    let primal = half * c.norm_squared();
    // dual: -|A^T (z1 - z2)|^2 / 2 - (w + eps)^T z1 - (eps - w)^T z2
    let atz = a.tr_mul(&(&z1 - &z2));
    let dual = -half * atz.norm_squared() - w.dot(&(&z1 - &z2)) - eps * (z1.sum() + z2.sum());
    let r = a * &c - w;
    let max_violation = r.iter().fold(T::zero(), |m, &v| m.max(v.abs() - eps));
    QpSolution { c, z_upper: z1, z_lower: z2, primal, dual, max_violation, iterations }
}
