//! End-to-end acceptance run: one pass/fail line per criterion.

use std::f64::consts::PI;
use std::process::Command;
use std::sync::Arc;
use std::time::Instant;

use gprkhs::concentration::RATE_TOL;
use gprkhs::sampler::{cm_log_ratio_z, map_draws};
use gprkhs::smallball::{check_borell, check_sandwich, check_shift_inequality, scalar};
use gprkhs::verify_structure::{check_direct_sum, check_isometry_integration, check_shared_basis_counterexample};
use gprkhs::{
    approx_term, eig_basis, exponent_translate, fit_loglog, kernel_section, make_grid, project, rkhs_norm_series,
    solve_rate, GridFunction64, KernelSpec64, NormKind, RateKind, RkhsElement64, SpectralBasis64,
};
use nalgebra::DMatrix;

struct Line {
    id: u32,
    passed: bool,
    text: String,
}

fn basis(spec: &KernelSpec64, n: usize, tol: f64) -> Arc<SpectralBasis64> {
    Arc::new(eig_basis(spec, &make_grid(n).unwrap(), tol).unwrap())
}

/// Standard normal CDF by composite Simpson integration of the density.
fn phi_cdf(x: f64) -> f64 {
    let steps = 4000;
    let h = x / steps as f64;
    let dens = |u: f64| (-0.5 * u * u).exp() / (2.0 * PI).sqrt();
    let mut s = dens(0.0) + dens(x);
    for i in 1..steps {
        s += dens(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    0.5 + s * h / 3.0
}

fn phi_inv(p: f64) -> f64 {
    let (mut lo, mut hi) = (-10.0, 10.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if phi_cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn c1_spectral() -> Line {
    let start = Instant::now();
    let b = basis(&KernelSpec64::BrownianMotion, 2001, 1e-10);
    let worst = (1..=5)
        .map(|k| {
            let want = 1.0 / ((k as f64 - 0.5) * PI).powi(2);
            (b.eigenvalues()[k - 1] - want).abs() / want
        })
        .fold(0.0f64, f64::max);
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: 1,
        passed: worst <= 0.01 && secs < 30.0,
        text: format!("BM top-5 eigenvalues at n=2001, max rel err {worst:.3e} (tol 1e-2), {secs:.1}s (< 30s)"),
    }
}

type Oracle = fn(f64) -> f64;

fn c2_reproducing() -> Line {
    let mut worst = 0.0f64;
    let cases: [(KernelSpec64, Oracle); 2] = [
        (KernelSpec64::BrownianMotion, |s| s.sqrt()),
        (KernelSpec64::riemann_liouville(1.0).unwrap(), |s| s / 2f64.sqrt()),
    ];
    for (spec, oracle) in &cases {
        let b = basis(spec, 501, 1e-10);
        for s in [0.25, 0.5, 0.75] {
            let sec = kernel_section(spec, s, b.grid()).unwrap();
            let got = rkhs_norm_series(&RkhsElement64::from_function(&sec, b.clone()).unwrap());
            worst = worst.max((got - oracle(s)).abs() / oracle(s));
        }
    }
    Line {
        id: 2,
        passed: worst <= 0.02,
        text: format!("|K(s,.)|_H vs sqrt K(s,s) on bm and rl(alpha=1), max rel err {worst:.3e} (tol 2e-2)"),
    }
}

fn c3_cameron_martin() -> Line {
    let full = basis(&KernelSpec64::BrownianMotion, 101, 1e-10);
    let b = Arc::new(full.truncated(20).unwrap());
    let sec = kernel_section(&KernelSpec64::BrownianMotion, 1.0, b.grid()).unwrap();
    let h = RkhsElement64::from_function(&sec, b.clone()).unwrap();
    let c = h.orthonormal_coords();
    let draws = 1_000_000;
    let v = map_draws(&b, 0, draws, 11, |_, z, _| cm_log_ratio_z(&c, z).exp());
    let n = draws as f64;
    let mean = v.iter().sum::<f64>() / n;
    let se = (v.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1.0) / n).sqrt();
    let mc_ok = (mean - 1.0).abs() <= 3.0 * se;

    let mut scalar_err = 0.0f64;
    for (hh, x) in [(0.7, -1.3), (1.0, 0.2), (-2.0, 2.5), (0.1, 0.0)] {
        let dens = |u: f64| (-0.5 * u * u).exp();
        let want = (dens(x - hh) / dens(x)).ln();
        scalar_err = scalar_err.max((cm_log_ratio_z(&[hh], &[x]) - want).abs());
    }
    Line {
        id: 3,
        passed: mc_ok && scalar_err <= 1e-12,
        text: format!(
            "E exp(U h - |h|^2/2) = {mean:.5} +- {se:.5} at 1e6 draws (within 3 SE: {mc_ok}); scalar density ratio err {scalar_err:.1e} (tol 1e-12)"
        ),
    }
}

fn c4_shift() -> Line {
    let configs: Vec<(&str, KernelSpec64, f64, f64, NormKind)> = vec![
        ("bm", KernelSpec64::BrownianMotion, 1.0, 0.5, NormKind::Sup),
        ("released-bm", KernelSpec64::ReleasedBM, 0.5, 1.0, NormKind::Sup),
        ("ibm:k=1", KernelSpec64::IntegratedBM { k: 1 }, 1.0, 0.3, NormKind::L2),
        ("rl:alpha=0.8", KernelSpec64::riemann_liouville(0.8).unwrap(), 0.6, 0.5, NormKind::Sup),
        ("poly:degree=1", KernelSpec64::Polynomial { degree: 1 }, 0.4, 0.5, NormKind::L2),
    ];
    let mut fails = Vec::new();
    for (name, spec, s, eps, norm) in &configs {
        let b = basis(spec, 201, 1e-10);
        let sec = kernel_section(spec, *s, b.grid()).unwrap();
        let h = RkhsElement64::from_function(&sec, b.clone()).unwrap();
        let r = check_shift_inequality(&b, &h, *eps, *norm, 100_000, 4).unwrap();
        if !r.passed {
            fails.push(format!("{name}: {r}"));
        }
    }
    let (lhs, rhs) = scalar::shift(1.0, 0.5);
    let lhs_o = phi_cdf(-0.5) - phi_cdf(-1.5);
    let rhs_o = (-0.5f64).exp() * (2.0 * phi_cdf(0.5) - 1.0);
    let scalar_ok = (lhs - 0.2417).abs() <= 1e-4 && (rhs - 0.2322).abs() <= 1e-4 && (lhs - lhs_o).abs() <= 1e-10 && (rhs - rhs_o).abs() <= 1e-10 && lhs >= rhs;
    Line {
        id: 4,
        passed: fails.is_empty() && scalar_ok,
        text: format!(
            "shift inequality MC {}/5 configurations pass; scalar LHS {lhs:.4} >= RHS {rhs:.4} (oracle {lhs_o:.4}, {rhs_o:.4}){}",
            5 - fails.len(),
            if fails.is_empty() { String::new() } else { format!("; {}", fails.join("; ")) }
        ),
    }
}

fn c5_sandwich() -> Line {
    let start = Instant::now();
    let b = basis(&KernelSpec64::BrownianMotion, 201, 1e-10);
    let w = GridFunction64::from_fn(b.grid().clone(), |t| t);
    let rows: Vec<_> = [0.4, 0.2].iter().map(|&e| check_sandwich(&b, &w, e, NormKind::L2, 100_000, 5).unwrap()).collect();
    let secs = start.elapsed().as_secs_f64();
    Line {
        id: 5,
        passed: rows.iter().all(|r| r.passed) && secs < 60.0,
        text: format!(
            "sandwich for bm, w = id, l2 norm: {}; {secs:.1}s (< 60s)",
            rows.iter().map(|r| r.to_string()).collect::<Vec<_>>().join(" | ")
        ),
    }
}

fn c6_borell() -> Line {
    let (lhs, rhs) = scalar::borell(0.1, 1.0);
    let lhs_o = 2.0 * phi_cdf(1.1) - 1.0;
    let rhs_o = phi_cdf(phi_inv(2.0 * phi_cdf(0.1) - 1.0) + 1.0);
    let scalar_ok = (lhs - lhs_o).abs() <= 1e-3 && (rhs - rhs_o).abs() <= 1e-3 && lhs >= rhs;
    let r = check_borell(&DMatrix::identity(2, 2), 0.5, 2.0, 100_000, 6).unwrap();
    Line {
        id: 6,
        passed: scalar_ok && r.passed,
        text: format!("scalar LHS {lhs:.4} >= RHS {rhs:.4} (oracle {lhs_o:.4}, {rhs_o:.4}); 2-D {r}"),
    }
}

/// Dense search over coefficient pairs, refined three times around the best.
fn brute_force(
    lam: &[f64],
    feasible: impl Fn(f64, f64) -> bool,
    center: (f64, f64),
    radius: f64,
) -> f64 {
    let obj = |a: f64, b: f64| 0.5 * (a * a / lam[0] + b * b / lam[1]);
    let (mut cx, mut cy, mut r) = (center.0, center.1, radius);
    let mut best = f64::INFINITY;
    for _ in 0..4 {
        let steps = 400;
        let (mut bx, mut by) = (cx, cy);
        for i in 0..=steps {
            for j in 0..=steps {
                let a = cx - r + 2.0 * r * i as f64 / steps as f64;
                let b = cy - r + 2.0 * r * j as f64 / steps as f64;
                if feasible(a, b) && obj(a, b) < best {
                    best = obj(a, b);
                    (bx, by) = (a, b);
                }
            }
        }
        (cx, cy, r) = (bx, by, r * 4.0 / steps as f64);
    }
    best
}

fn c7_optimizer() -> Line {
    let full = basis(&KernelSpec64::BrownianMotion, 101, 1e-10);
    let b = full.truncated(2).unwrap();
    let lam = b.eigenvalues().to_vec();
    let (p1, p2) = (b.eigenfunction(0), b.eigenfunction(1));
    let mut l2_err = 0.0f64;
    let mut kkt = 0.0f64;
    let mut bracket_ok = true;
    for (w1, w2, eps) in [(0.3, 0.2, 0.1), (0.5, -0.4, 0.25), (0.2, 0.05, 0.02), (1.0, 1.0, 0.6)] {
        let vals: Vec<f64> = p1.values().iter().zip(p2.values()).map(|(a, c)| w1 * a + w2 * c).collect();
        let w = GridFunction64::new(b.grid().clone(), vals.clone()).unwrap();
        let got = approx_term(&w, &b, eps, NormKind::L2).unwrap();
        let wj = project(&w, &b).unwrap();
        let l2_feasible = |a: f64, c: f64| (a - wj[0]).powi(2) + (c - wj[1]).powi(2) <= eps * eps;
        let brute = brute_force(&lam, l2_feasible, (wj[0], wj[1]), eps);
        l2_err = l2_err.max((got.value - brute).abs());
        let mu = got.multiplier.unwrap();
        for j in 0..2 {
            kkt = kkt.max((got.coeffs[j] * (1.0 + mu * lam[j]) - mu * lam[j] * wj[j]).abs());
        }

        let sup = approx_term(&w, &b, eps, NormKind::Sup).unwrap();
        let sup_feasible = |a: f64, c: f64| {
            p1.values().iter().zip(p2.values()).zip(&vals).all(|((x, y), v)| (a * x + c * y - v).abs() <= eps)
        };
        let brute_sup = brute_force(&lam, sup_feasible, (wj[0], wj[1]), eps);
        bracket_ok &= got.value <= sup.value + 1e-12 && sup.value <= brute_sup + sup.gap + 1e-12;
    }
    Line {
        id: 7,
        passed: l2_err <= 1e-4 && kkt <= 1e-8 && bracket_ok,
        text: format!(
            "2-D toys: l2 vs brute force max err {l2_err:.2e} (tol 1e-4); KKT residual {kkt:.2e} (tol 1e-8); sup brackets hold: {bracket_ok}"
        ),
    }
}

fn c8_rate() -> Line {
    let mut worst = 0.0f64;
    for alpha in [1.0, 2.0, 4.0] {
        for n in [1e3, 1e6] {
            let sol = solve_rate(|e| e.powf(-alpha), n, (1e-12, 1e12), RateKind::PriorMass, RATE_TOL).unwrap();
            let want = n.powf(-1.0 / (2.0 + alpha));
            worst = worst.max((sol.eps_n - want).abs() / want);
        }
    }
    Line {
        id: 8,
        passed: worst <= 1e-6,
        text: format!("eps^-alpha rates vs n^(-1/(2+alpha)), max rel err {worst:.2e} (tol 1e-6)"),
    }
}

fn c9_exponents() -> Line {
    let (a, b) = exponent_translate(2.0, 0.0).unwrap();
    let mut prev = 0.0;
    let mut monotone = true;
    for i in 1..=400 {
        let alpha = 0.05 * 1.04f64.powi(i);
        let (t, _) = exponent_translate(alpha, 0.0).unwrap();
        monotone &= t > prev && t < 2.0;
        prev = t;
    }
    let far = exponent_translate(1e9, 0.0).unwrap().0;
    let passed = a == 1.0 && b == 0.0 && monotone && (2.0 - far).abs() < 1e-8;
    Line {
        id: 9,
        passed,
        text: format!("(2,0) -> ({a},{b}); increasing in alpha below 2: {monotone}; alpha=1e9 gives {far:.10}"),
    }
}

fn c10_example() -> Line {
    let start = Instant::now();
    let eps = [0.2, 0.1, 0.05, 0.02];
    let slope = |spec: &KernelSpec64| {
        let b = basis(spec, 501, 1e-10);
        let w = GridFunction64::from_fn(b.grid().clone(), |t| t);
        let pts: Vec<(f64, f64)> = eps.iter().map(|&e| (e, approx_term(&w, &b, e, NormKind::Sup).unwrap().value)).collect();
        (fit_loglog(&pts).unwrap().slope, pts)
    };
    let (plain, plain_pts) = slope(&KernelSpec64::integrated_plus_constant(1));
    let (released, rel_pts) = slope(&KernelSpec64::released_integrated(1));
    let secs = start.elapsed().as_secs_f64();
    let fmt = |p: &[(f64, f64)]| p.iter().map(|(_, v)| format!("{v:.4}")).collect::<Vec<_>>().join(",");
    let plain_ok = plain >= 0.85;
    let released_ok = (0.5..=0.8).contains(&released);
    Line {
        id: 10,
        passed: plain_ok && released_ok && secs < 120.0,
        text: format!(
            "approx_term slope at w = id, sup norm: Z+I^1W {:.3} [{}] (>= 0.85: {plain_ok}); released {:.3} [{}] (in [0.5, 0.8]: {released_ok}); {secs:.1}s",
            plain,
            fmt(&plain_pts),
            released,
            fmt(&rel_pts)
        ),
    }
}

fn c11_structure() -> Line {
    let bm = basis(&KernelSpec64::BrownianMotion, 501, 1e-10);
    let id = GridFunction64::from_fn(bm.grid().clone(), |t| t);
    let mut c = vec![0.0; bm.len()];
    for (j, v) in [(0, 0.5), (1, -0.3), (3, 0.2), (5, 0.1), (8, -0.05)] {
        c[j] = v;
    }
    let elems = vec![RkhsElement64::zero(bm.clone()), RkhsElement64::from_function(&id, bm.clone()).unwrap(), RkhsElement64::new(bm.clone(), c).unwrap()];
    let iso = check_isometry_integration(&bm, 1, &elems, 1e-8).unwrap();
    let iso_ok = iso.iter().all(|r| r.passed);
    let g = bm.grid().clone();
    let ds: Vec<_> = [
        GridFunction64::from_fn(g.clone(), |t: f64| 0.3 + t.sin()),
        GridFunction64::from_fn(g.clone(), |t| 1.0 + t),
        GridFunction64::from_fn(g, |t: f64| (3.0 * t).cos()),
    ]
    .iter()
    .map(|f| check_direct_sum(f).unwrap())
    .collect();
    let ds_ok = ds.iter().all(|r| r.passed);
    let mut split_err = 0.0f64;
    let mut ce_ok = true;
    for (m, p) in [(3.0, 4.0), (1.0, 0.25), (0.5, 2.0)] {
        let rows = check_shared_basis_counterexample(&[m], &[p], &bm).unwrap();
        ce_ok &= rows.iter().all(|r| r.passed);
        let a = m * m / (m * m + p * p);
        let oracle = a * a / (m * m) + (1.0 - a) * (1.0 - a) / (p * p);
        split_err = split_err.max((rows[1].lhs - oracle).abs());
    }
    Line {
        id: 11,
        passed: iso_ok && ds_ok && ce_ok && split_err <= 1e-10,
        text: format!(
            "isometry k=1 ({} elements, 5%): {iso_ok}; direct sum (1e-8): {ds_ok}; split identity max err {split_err:.1e} (tol 1e-10)",
            iso.len()
        ),
    }
}

fn c12_determinism() -> Line {
    let run = || {
        Command::new(env!("CARGO_BIN_EXE_gprkhs"))
            .args(["verify", "--seed", "7", "--trials", "100000"])
            .output()
            .expect("binary runs")
    };
    let (a, b) = (run(), run());
    let same = a.stdout == b.stdout && !a.stdout.is_empty();
    Line {
        id: 12,
        passed: same && a.status.success(),
        text: format!("two runs of verify --seed 7: byte-identical {same} ({} bytes), exit code {:?}", a.stdout.len(), a.status.code()),
    }
}

fn main() {
    let checks: [fn() -> Line; 12] = [
        c1_spectral,
        c2_reproducing,
        c3_cameron_martin,
        c4_shift,
        c5_sandwich,
        c6_borell,
        c7_optimizer,
        c8_rate,
        c9_exponents,
        c10_example,
        c11_structure,
        c12_determinism,
    ];
    let mut failed = 0;
    for check in checks {
        let line = check();
        failed += usize::from(!line.passed);
        println!("acceptance {:>2}: {} {}", line.id, if line.passed { "PASS" } else { "FAIL" }, line.text);
    }
    println!("acceptance: {} passed, {failed} failed", 12 - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
