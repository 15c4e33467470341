//! Gauss–Legendre rules and cumulative trapezoid integration.

use std::sync::OnceLock;

use crate::Scalar;

/// Nodes and weights of the `n`-point Gauss–Legendre rule on `[-1, 1]`,
/// computed by Newton iteration on the Legendre recurrence.
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp = 0.0;
        for _ in 0..100 {
            let (mut p0, mut p1) = (1.0, x);
            for k in 2..=n {
                let kf = k as f64;
                let p2 = ((2.0 * kf - 1.0) * x * p1 - (kf - 1.0) * p0) / kf;
                p0 = p1;
                p1 = p2;
            }
            dp = nf * (x * p1 - p0) / (x * x - 1.0);
            let dx = p1 / dp;
            x -= dx;
            if dx.abs() < 1e-16 {
                break;
            }
        }
        nodes[i] = -x;
        nodes[n - 1 - i] = x;
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

/// 8-point rule mapped to `[0, 1]`, cached.
pub(crate) fn gl8_unit() -> &'static (Vec<f64>, Vec<f64>) {
    static RULE: OnceLock<(Vec<f64>, Vec<f64>)> = OnceLock::new();
    RULE.get_or_init(|| {
        let (x, w) = gauss_legendre(8);
        (x.iter().map(|v| 0.5 * (v + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
    })
}

/// Running trapezoid integral `F(t_i) = int_0^{t_i} f`, with `F(0) = 0`.
pub fn cumulative_trapezoid<T: Scalar>(values: &[T], h: T) -> Vec<T> {
    let half = h / T::lit(2.0);
    let mut out = Vec::with_capacity(values.len());
    let mut acc = T::zero();
    out.push(acc);
    for pair in values.windows(2) {
        acc += half * (pair[0] + pair[1]);
        out.push(acc);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn gauss_legendre_integrates_polynomials_exactly() {
        for n in [1usize, 2, 5, 8, 16] {
            let (x, w) = gauss_legendre(n);
            assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
            // degree 2n-1 is exact
            let d = 2 * n - 1;
            let q: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(d as i32 - 1)).sum();
            let exact = if (d - 1) % 2 == 0 { 2.0 / d as f64 } else { 0.0 };
            assert!((q - exact).abs() < 1e-13, "n={n} q={q} exact={exact}");
        }
    }

    #[test]
    fn cumulative_trapezoid_of_constant() {
        let f = cumulative_trapezoid(&[1.0, 1.0, 1.0], 0.5);
        assert_eq!(f, vec![0.0, 0.5, 1.0]);
    }
}
