//! `gprkhs`: plot-data front end for the Gaussian-prior RKHS toolkit.

mod inputs;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Args, Parser, Subcommand};
use gprkhs::concentration::{ellipsoid_entropy, MAX_ENTROPY_DIM, RATE_TOL};
use gprkhs::smallball::{check_borell, check_sandwich, check_shift_inequality, check_tail};
use gprkhs::verify_structure::{check_direct_sum, check_isometry_integration, check_shared_basis_counterexample};
use gprkhs::{
    analytic_norm, approx_term, concentration_fn, eig_basis, exponent_translate, gram, kernel_section, make_grid,
    rkhs_norm_series, sample_kl, smallball_curve, solve_rate, sup_variance, CheckReport, Error, GridFunction64,
    KernelSpec64, NormKind, RateKind, RateSolution, RkhsElement64, SpectralBasis64, TabulatedCurve,
};
use nalgebra::DMatrix;
use serde::Serialize;

use inputs::FlagError;
use output::{num, text_cell, Document, JsonObject};

#[derive(Parser)]
#[command(name = "gprkhs", version, about = "RKHS, small-ball and contraction-rate computations for Gaussian priors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Karhunen-Loeve sample paths, one CSV row per draw.
    Sample(SampleArgs),
    /// Kernel matrix on the grid.
    Gram(GramArgs),
    /// Eigenvalues and eigenfunctions of the covariance operator.
    Eig(GramArgs),
    /// RKHS norm of a function, spectral and closed form.
    RkhsNorm(RkhsNormArgs),
    /// Monte Carlo small-ball probabilities, one JSON line per radius.
    Smallball(SmallballArgs),
    /// Concentration function at a list of radii.
    Concentration(ConcentrationArgs),
    /// Contraction rate from the rate equations.
    Rate(RateArgs),
    /// Metric entropy of an ellipsoid and exponent translation.
    Entropy(EntropyArgs),
    /// Statistical and structural checks as a pass/fail table.
    Verify(VerifyArgs),
}

#[derive(Args, Serialize)]
struct KernelArgs {
    /// Kernel, e.g. bm, released-bm, ibm:k=2, rl:alpha=0.8, poly:k=1+ibm:k=1.
    #[arg(long, default_value = "bm")]
    kernel: String,
    /// Number of grid points on [0, 1].
    #[arg(long, default_value_t = 201)]
    n: usize,
    /// Relative eigenvalue truncation threshold.
    #[arg(long, default_value_t = gprkhs::DEFAULT_TRUNCATION_TOL)]
    tol: f64,
}

#[derive(Args, Serialize)]
struct McArgs {
    /// sup or l2.
    #[arg(long, default_value = "sup")]
    norm: String,
    #[arg(long, default_value_t = 100_000)]
    trials: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args, Serialize)]
struct OutArgs {
    /// Output file; stdout when absent.
    #[arg(long)]
    #[serde(skip)]
    out: Option<PathBuf>,
}

#[derive(Args, Serialize)]
struct SampleArgs {
    #[command(flatten)]
    #[serde(flatten)]
    kernel: KernelArgs,
    #[arg(long, default_value_t = 10)]
    count: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Args, Serialize)]
struct GramArgs {
    #[command(flatten)]
    #[serde(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Args, Serialize)]
struct RkhsNormArgs {
    #[command(flatten)]
    #[serde(flatten)]
    kernel: KernelArgs,
    /// builtin:id, builtin:sq, builtin:sin or a one-column CSV.
    #[arg(long = "fn")]
    function: String,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Args, Serialize)]
struct SmallballArgs {
    #[command(flatten)]
    #[serde(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McArgs,
    /// Comma-separated radii.
    #[arg(long)]
    eps: String,
    /// Ball center; centered at zero when absent.
    #[arg(long)]
    center: Option<String>,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Args, Serialize)]
struct ConcentrationArgs {
    #[command(flatten)]
    #[serde(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McArgs,
    /// Comma-separated radii, strictly decreasing.
    #[arg(long)]
    eps: String,
    /// Center of the concentration function.
    #[arg(long, alias = "fn")]
    w0: String,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Args, Serialize)]
struct RateArgs {
    /// Sample size.
    #[arg(long)]
    n: f64,
    /// Closed-form concentration function eps^-alpha.
    #[arg(long)]
    phi_alpha: Option<f64>,
    #[arg(long, default_value = "bm")]
    kernel: String,
    #[arg(long, default_value_t = 201)]
    grid_n: usize,
    #[arg(long, default_value_t = gprkhs::DEFAULT_TRUNCATION_TOL)]
    tol: f64,
    /// True function; without it only the prior-mass equation is solved.
    #[arg(long)]
    w0: Option<String>,
    /// Radii at which the curves are tabulated, strictly decreasing.
    #[arg(long, default_value = "1,0.7,0.5,0.35,0.25,0.18,0.13,0.1,0.08,0.065,0.05")]
    eps: String,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McArgs,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Args, Serialize)]
struct EntropyArgs {
    /// Comma-separated ellipsoid semiaxes.
    #[arg(long)]
    semiaxes: Option<String>,
    #[arg(long)]
    eps: Option<f64>,
    /// Small-ball exponent to translate into an entropy exponent.
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long, default_value_t = 0.0)]
    beta: f64,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

#[derive(Args, Serialize)]
struct VerifyArgs {
    #[command(flatten)]
    #[serde(flatten)]
    kernel: KernelArgs,
    #[command(flatten)]
    #[serde(flatten)]
    mc: McArgs,
    #[command(flatten)]
    #[serde(flatten)]
    out: OutArgs,
}

enum Failure {
    Flag(FlagError),
    Core(Error),
    Io(std::io::Error),
    Checks(usize),
}

impl From<FlagError> for Failure {
    fn from(e: FlagError) -> Self {
        Failure::Flag(e)
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Core(e)
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Io(e)
    }
}

type Run<T = ()> = Result<T, Failure>;

fn ensure(ok: bool, flag: &'static str, msg: impl Into<String>) -> Result<(), FlagError> {
    if ok {
        Ok(())
    } else {
        Err(FlagError::new(flag, msg))
    }
}

struct Setup {
    spec: KernelSpec64,
    grid: Arc<gprkhs::Grid64>,
}

impl KernelArgs {
    fn setup(&self) -> Result<Setup, FlagError> {
        let spec = inputs::kernel("--kernel", &self.kernel)?;
        ensure(self.n >= 2, "--n", format!("grid needs at least 2 points, got {}", self.n))?;
        ensure(self.tol >= 0.0 && self.tol < 1.0, "--tol", format!("must be in [0, 1), got {}", self.tol))?;
        let grid = make_grid(self.n).map_err(|e| FlagError::new("--n", e.to_string()))?;
        Ok(Setup { spec, grid })
    }
}

impl Setup {
    fn basis(&self, tol: f64) -> Run<Arc<SpectralBasis64>> {
        Ok(Arc::new(eig_basis(&self.spec, &self.grid, tol)?))
    }
}

impl McArgs {
    fn validate(&self) -> Result<NormKind, FlagError> {
        let norm = self.norm.parse().map_err(|e: Error| FlagError::new("--norm", e.to_string()))?;
        ensure(
            self.trials >= gprkhs::smallball::MIN_TRIALS,
            "--trials",
            format!("must be at least {}, got {}", gprkhs::smallball::MIN_TRIALS, self.trials),
        )?;
        Ok(norm)
    }
}

fn cmd_sample(a: &SampleArgs) -> Run {
    let s = a.kernel.setup()?;
    ensure(a.count >= 1, "--count", "must be at least 1")?;
    let basis = s.basis(a.kernel.tol)?;
    let draws = sample_kl(&basis, a.count, a.seed)?;
    let mut doc = Document::new("sample", a);
    doc.csv_row(std::iter::once("draw".to_string()).chain(s.grid.points().iter().map(|&t| num(t))));
    for d in &draws {
        doc.csv_row(std::iter::once(d.index().to_string()).chain(d.path().values().iter().map(|&v| num(v))));
    }
    Ok(doc.write(a.out.out.as_deref())?)
}

fn cmd_gram(a: &GramArgs) -> Run {
    let s = a.kernel.setup()?;
    let g = gram(&s.spec, &s.grid)?;
    let mut doc = Document::new("gram", a);
    doc.csv_row(std::iter::once("t".to_string()).chain(s.grid.points().iter().map(|&t| num(t))));
    for (i, &t) in s.grid.points().iter().enumerate() {
        doc.csv_row(std::iter::once(num(t)).chain(g.row(i).iter().map(|&v| num(v))));
    }
    Ok(doc.write(a.out.out.as_deref())?)
}

fn cmd_eig(a: &GramArgs) -> Run {
    let s = a.kernel.setup()?;
    let basis = s.basis(a.kernel.tol)?;
    let mut doc = Document::new("eig", a);
    doc.csv_row(["index".to_string(), "lambda".to_string()].into_iter().chain(s.grid.points().iter().map(|&t| num(t))));
    let phi = basis.eigenfunction_matrix();
    for (j, &l) in basis.eigenvalues().iter().enumerate() {
        doc.csv_row([(j + 1).to_string(), num(l)].into_iter().chain(phi.column(j).iter().map(|&v| num(v))));
    }
    Ok(doc.write(a.out.out.as_deref())?)
}

fn cmd_rkhs_norm(a: &RkhsNormArgs) -> Run {
    let s = a.kernel.setup()?;
    let f = inputs::function("--fn", &a.function, &s.grid)?;
    let basis = s.basis(a.kernel.tol)?;
    let spectral = rkhs_norm_series(&RkhsElement64::from_function(&f, basis)?);
    let mut obj = JsonObject::new().num("norm_spectral", spectral);
    let in_rkhs = match analytic_norm(&s.spec, &f) {
        Some(Ok(v)) => {
            obj = obj.num("norm_analytic", v);
            true
        }
        Some(Err(Error::NotInRkhs(reason))) => {
            obj = obj.str("reason", &reason);
            false
        }
        Some(Err(e)) => return Err(e.into()),
        None => spectral.is_finite(),
    };
    let mut doc = Document::new("rkhs-norm", a);
    doc.line(obj.bool("in_rkhs", in_rkhs).render());
    Ok(doc.write(a.out.out.as_deref())?)
}

fn cmd_smallball(a: &SmallballArgs) -> Run {
    let s = a.kernel.setup()?;
    let norm = a.mc.validate()?;
    let eps = inputs::eps_list("--eps", &a.eps)?;
    let center = a.center.as_deref().map(|c| inputs::function("--center", c, &s.grid)).transpose()?;
    let basis = s.basis(a.kernel.tol)?;
    let est = smallball_curve(&basis, &eps, norm, center.as_ref(), a.mc.trials, a.mc.seed)?;
    let mut doc = Document::new("smallball", a);
    for e in est {
        doc.line(
            JsonObject::new()
                .num("eps", e.eps)
                .str("norm", &e.norm.to_string())
                .num("p_hat", e.p_hat)
                .num("ci_low", e.ci_low)
                .num("ci_high", e.ci_high)
                .num("neg_log_p", e.neg_log_p)
                .int("hits", e.hits)
                .int("trials", e.trials)
                .int("seed", a.mc.seed)
                .render(),
        );
    }
    Ok(doc.write(a.out.out.as_deref())?)
}

fn decreasing(flag: &'static str, eps: &[f64]) -> Result<(), FlagError> {
    ensure(eps.windows(2).all(|p| p[1] < p[0]), flag, "values must be strictly decreasing")
}

fn cmd_concentration(a: &ConcentrationArgs) -> Run {
    let s = a.kernel.setup()?;
    let norm = a.mc.validate()?;
    let eps = inputs::eps_list("--eps", &a.eps)?;
    decreasing("--eps", &eps)?;
    let w = inputs::function("--w0", &a.w0, &s.grid)?;
    let basis = s.basis(a.kernel.tol)?;
    let curve = concentration_fn(&w, &basis, &eps, norm, a.mc.trials, a.mc.seed)?;
    let mut doc = Document::new("concentration", a);
    doc.line("eps,approx_term,neg_log_smallball,phi,gap");
    for p in &curve.points {
        doc.csv_row([num(p.eps), num(p.approx_term), num(p.neg_log_smallball), num(p.phi), num(p.optimizer_gap)]);
    }
    if let Some(w) = curve.warning() {
        eprintln!("warning: {w}");
    }
    Ok(doc.write(a.out.out.as_deref())?)
}

fn rate_json(r: &RateSolution) -> JsonObject {
    JsonObject::new().num("n", r.n).num("eps_n", r.eps_n).str("which", &r.which.to_string()).num("residual", r.residual)
}

/// Running maximum from large to small radii, so optimizer round-off cannot
/// break monotonicity of a tabulated curve.
fn monotone(mut points: Vec<(f64, f64)>) -> Vec<(f64, f64)> {
    let mut m = 0.0f64;
    for p in points.iter_mut() {
        m = m.max(p.1);
        p.1 = m;
    }
    points
}

fn tabulated_rate(points: Vec<(f64, f64)>, n: f64, which: RateKind) -> Run<RateSolution> {
    match TabulatedCurve::new(monotone(points))?.solve_rate(n, which) {
        Err(Error::NoCrossing { lo, hi }) => Err(FlagError::new(
            "--eps",
            format!("{which} equation has no crossing inside the tabulated range [{lo}, {hi}]; widen --eps or raise --trials"),
        )
        .into()),
        r => Ok(r?),
    }
}

fn cmd_rate(a: &RateArgs) -> Run {
    ensure(a.n > 0.0 && a.n.is_finite(), "--n", format!("sample size must be > 0, got {}", a.n))?;
    let mut doc = Document::new("rate", a);
    if let Some(alpha) = a.phi_alpha {
        ensure(alpha > 0.0 && alpha.is_finite(), "--phi-alpha", format!("must be > 0, got {alpha}"))?;
        let sol = solve_rate(|e| e.powf(-alpha), a.n, (1e-12, 1e12), RateKind::PriorMass, RATE_TOL)?;
        doc.line(rate_json(&sol).num("phi_alpha", alpha).render());
        return Ok(doc.write(a.out.out.as_deref())?);
    }
    let kernel = KernelArgs { kernel: a.kernel.clone(), n: a.grid_n, tol: a.tol };
    let s = kernel.setup().map_err(|e| if e.flag == "--n" { FlagError::new("--grid-n", e.message) } else { e })?;
    let norm = a.mc.validate()?;
    let eps = inputs::eps_list("--eps", &a.eps)?;
    decreasing("--eps", &eps)?;
    ensure(eps.len() >= 2, "--eps", "needs at least 2 radii to tabulate")?;
    let basis = s.basis(a.tol)?;
    let balls = smallball_curve(&basis, &eps, norm, None, a.mc.trials, a.mc.seed)?;
    let prior_pts: Vec<(f64, f64)> = balls.iter().filter(|b| !b.is_sentinel()).map(|b| (b.eps, b.neg_log_p)).collect();
    if prior_pts.len() < 2 {
        return Err(FlagError::new("--eps", "fewer than 2 radii had small-ball hits; use larger radii or more --trials").into());
    }
    let prior = tabulated_rate(prior_pts, a.n, RateKind::PriorMass)?;
    let mut obj = JsonObject::new();
    let sol = match &a.w0 {
        None => prior.clone(),
        Some(w0) => {
            let w = inputs::function("--w0", w0, &s.grid)?;
            let pts = eps
                .iter()
                .map(|&e| Ok((e, 2.0 * approx_term(&w, &basis, e, norm)?.value)))
                .collect::<Result<Vec<_>, Error>>()?;
            let smallest = eps[eps.len() - 1];
            let satisfied_at_smallest = pts[pts.len() - 1].1 <= a.n * smallest * smallest;
            obj = obj.num("eps_prior_mass", prior.eps_n);
            if satisfied_at_smallest && prior.eps_n >= smallest {
                obj = obj.num("eps_approximation_at_most", smallest);
                RateSolution { which: RateKind::Combined, ..prior.clone() }
            } else {
                let approx = tabulated_rate(pts, a.n, RateKind::Approximation)?;
                obj = obj.num("eps_approximation", approx.eps_n);
                gprkhs::concentration::combined_rate(&prior, &approx)
            }
        }
    };
    let mut out = rate_json(&sol);
    out.extend(obj);
    doc.line(out.render());
    Ok(doc.write(a.out.out.as_deref())?)
}

fn cmd_entropy(a: &EntropyArgs) -> Run {
    ensure(a.semiaxes.is_some() || a.alpha.is_some(), "--semiaxes", "give --semiaxes with --eps, or --alpha")?;
    let mut obj = JsonObject::new();
    if let Some(sa) = &a.semiaxes {
        let axes = inputs::float_list("--semiaxes", sa)?;
        ensure(!axes.is_empty(), "--semiaxes", "needs at least one value")?;
        ensure(axes.iter().all(|&v| v > 0.0 && v.is_finite()), "--semiaxes", "values must be finite and > 0")?;
        ensure(axes.len() <= MAX_ENTROPY_DIM, "--semiaxes", format!("at most {MAX_ENTROPY_DIM} semiaxes"))?;
        let eps = a.eps.ok_or_else(|| FlagError::new("--eps", "required with --semiaxes"))?;
        ensure(eps > 0.0 && eps.is_finite(), "--eps", format!("must be > 0, got {eps}"))?;
        let e = ellipsoid_entropy(&axes, eps)?;
        obj = obj.num("eps", eps).int("packing", e.packing as u64).num("log_packing", e.log_packing);
    }
    if let Some(alpha) = a.alpha {
        ensure(alpha > 0.0 && alpha.is_finite(), "--alpha", format!("must be > 0, got {alpha}"))?;
        ensure(a.beta.is_finite(), "--beta", "must be finite")?;
        let (ea, eb) = exponent_translate(alpha, a.beta)?;
        obj = obj.num("alpha", alpha).num("beta", a.beta).num("entropy_alpha", ea).num("entropy_beta", eb);
    }
    let mut doc = Document::new("entropy", a);
    doc.line(obj.render());
    Ok(doc.write(a.out.out.as_deref())?)
}

fn renamed(mut r: CheckReport, name: &str) -> CheckReport {
    r.name = name.to_string();
    r
}

/// Deterministic 5-term element of the Brownian-motion RKHS.
fn five_term(basis: &Arc<SpectralBasis64>) -> Run<RkhsElement64> {
    let mut c = vec![0.0; basis.len()];
    for (j, v) in [(0, 0.8), (1, -0.5), (2, 0.3), (4, 0.2), (6, -0.1)] {
        if j < c.len() {
            c[j] = v * basis.eigenvalues()[j].sqrt();
        }
    }
    Ok(RkhsElement64::new(basis.clone(), c)?)
}

fn verify_rows(a: &VerifyArgs, s: &Setup, norm: NormKind) -> Run<Vec<CheckReport>> {
    let (trials, seed) = (a.mc.trials, a.mc.seed);
    let basis = s.basis(a.kernel.tol)?;
    let sigma = sup_variance(&s.spec, &s.grid)?.sqrt();
    let section = kernel_section(&s.spec, 1.0, &s.grid)?;
    let h = RkhsElement64::from_function(&section, basis.clone())?;

    let mut rows = vec![
        renamed(check_shift_inequality(&basis, &h, 0.5 * sigma, norm, trials, seed)?, "shift"),
        renamed(check_sandwich(&basis, &section, 0.4 * sigma, norm, trials, seed)?, "sandwich"),
        renamed(check_borell(&DMatrix::from_element(1, 1, 1.0), 0.1, 1.0, trials, seed)?, "borell-scalar"),
    ];
    let k = |u: f64, v: f64| s.spec.eval(u, v);
    let cov = DMatrix::from_row_slice(2, 2, &[k(0.5, 0.5)?, k(0.5, 1.0)?, k(1.0, 0.5)?, k(1.0, 1.0)?]);
    rows.push(renamed(check_borell(&cov, 0.5 * sigma, 1.0, trials, seed)?, "borell-kernel"));
    rows.push(renamed(check_tail(&basis, sigma, trials, seed)?, "tail"));

    let bm = Arc::new(eig_basis(&KernelSpec64::BrownianMotion, &s.grid, a.kernel.tol)?);
    let id = GridFunction64::from_fn(s.grid.clone(), |t| t);
    let elems = vec![RkhsElement64::zero(bm.clone()), RkhsElement64::from_function(&id, bm.clone())?, five_term(&bm)?];
    for (i, r) in check_isometry_integration(&bm, 1, &elems, 1e-8)?.into_iter().enumerate() {
        rows.push(renamed(r, &format!("isometry-{}", ["zero", "identity", "five-term"][i])));
    }
    rows.push(check_direct_sum(&GridFunction64::from_fn(s.grid.clone(), |t| 0.3 + t.sin()))?);
    rows.extend(check_shared_basis_counterexample(&[3.0], &[4.0], &bm)?);
    Ok(rows)
}

fn cmd_verify(a: &VerifyArgs) -> Run {
    let s = a.kernel.setup()?;
    let norm = a.mc.validate()?;
    let rows = verify_rows(a, &s, norm)?;
    let mut doc = Document::new("verify", a);
    doc.line("check,result,lhs,rhs,slack,detail");
    for r in &rows {
        doc.csv_row([
            r.name.clone(),
            if r.passed { "pass" } else { "FAIL" }.to_string(),
            num(r.lhs),
            num(r.rhs),
            num(r.slack),
            text_cell(&r.detail),
        ]);
    }
    doc.write(a.out.out.as_deref())?;
    match rows.iter().filter(|r| !r.passed).count() {
        0 => Ok(()),
        n => Err(Failure::Checks(n)),
    }
}

fn run(cli: &Cli) -> Run {
    match &cli.command {
        Command::Sample(a) => cmd_sample(a),
        Command::Gram(a) => cmd_gram(a),
        Command::Eig(a) => cmd_eig(a),
        Command::RkhsNorm(a) => cmd_rkhs_norm(a),
        Command::Smallball(a) => cmd_smallball(a),
        Command::Concentration(a) => cmd_concentration(a),
        Command::Rate(a) => cmd_rate(a),
        Command::Entropy(a) => cmd_entropy(a),
        Command::Verify(a) => cmd_verify(a),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Flag(e)) => {
            eprintln!("error: {}: {}", e.flag, e.message);
            ExitCode::from(1)
        }
        Err(Failure::Core(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("error: writing output: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Checks(n)) => {
            eprintln!("verify: {n} check(s) failed");
            ExitCode::from(2)
        }
    }
}
