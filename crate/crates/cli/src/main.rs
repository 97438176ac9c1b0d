//! `structsolve` command-line front end.
//!
//! Exit codes: 0 success, 2 input error, 3 numerical failure or, with
//! `--strict`, any numerical flag raised by the solver.

mod input;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::Instant;

use clap::{Args, Parser, Subcommand, ValueEnum};
use nalgebra::{DMatrix, DVector};
use structsolve::kernel_ar::{self, Kernel, KernelARProblem, PointSeries, TargetAccess};
use structsolve::linalg::{self, DenseMatrix};
use structsolve::ops::{pad_origin_zero, DenseOperator, LinearOperator};
use structsolve::{lowrank, lp, oracle, regression, rng, SolverConfig};

use report::{BenchReport, BenchRow, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Input(String),
    #[error("{0}")]
    Numerical(String),
}

impl From<structsolve::Error> for CliError {
    fn from(e: structsolve::Error) -> Self {
        use structsolve::Error as E;
        match e {
            E::Numerical(_) | E::ZeroScores => CliError::Numerical(e.to_string()),
            other => CliError::Input(other.to_string()),
        }
    }
}

#[derive(Parser)]
#[command(name = "structsolve", version, about = "Sampling-based regression and kernel autoregression")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// Approximation parameter in (0, 1).
    #[arg(long, default_value_t = 0.5)]
    eps: f64,
    /// Failure probability in (0, 1) for the boosted least-squares solvers.
    #[arg(long, default_value_t = 0.1)]
    delta: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Also solve densely and report the oracle value and ratio.
    #[arg(long)]
    exact: bool,
    /// key=value overrides of the solver constants.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Print the report as one JSON object.
    #[arg(long)]
    json: bool,
    /// Exit with code 3 when the solver raises a numerical flag.
    #[arg(long)]
    strict: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Least squares on a dense CSV whose last column is b.
    L2 {
        #[arg(long)]
        input: PathBuf,
        #[command(flatten)]
        common: Common,
    },
    /// Autoregression on a scalar series.
    Ar {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        d: usize,
        /// Prepend b_1 = 0 before building the design.
        #[arg(long)]
        pad_origin_zero: bool,
        #[command(flatten)]
        common: Common,
    },
    /// Discretized linear dynamical system with step h.
    Dyn {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        d: usize,
        #[arg(long)]
        h: f64,
        #[arg(long)]
        pad_origin_zero: bool,
        #[command(flatten)]
        common: Common,
    },
    /// l_p regression on a dense CSV whose last column is b.
    Lp {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        p_norm: f64,
        #[command(flatten)]
        common: Common,
    },
    /// Rank-k column-sampling approximation of a dense CSV matrix.
    Lowrank {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        rank: usize,
        #[command(flatten)]
        common: Common,
    },
    /// Exact kernel autoregression on a point series (one point per line).
    KernelAr {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        d: usize,
        /// linear, poly<k> or poly<k>+<offset>
        #[arg(long, default_value = "poly2")]
        kernel: String,
        #[command(flatten)]
        common: Common,
    },
    /// Sampled degree-2 kernel regression.
    Poly2 {
        #[arg(long)]
        input: PathBuf,
        #[arg(long)]
        d: usize,
        /// Explicit target, one value per line in (block, a, c) order;
        /// defaults to the lifted next point.
        #[arg(long)]
        target: Option<PathBuf>,
        #[command(flatten)]
        common: Common,
    },
    /// Sweep a solver over synthetic instances of growing size.
    Bench {
        #[arg(long, value_enum)]
        solver: BenchSolver,
        #[arg(long, value_delimiter = ',', required = true)]
        n: Vec<usize>,
        #[arg(long, default_value_t = 8)]
        d: usize,
        #[arg(long, default_value_t = 1.5)]
        p_norm: f64,
        #[arg(long, default_value_t = 5)]
        rank: usize,
        /// Point dimension for the kernel solvers.
        #[arg(long, default_value_t = 4)]
        p: usize,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
enum BenchSolver {
    Ar,
    L2,
    Lp,
    Lowrank,
    KernelAr,
    Poly2,
}

struct Settings {
    eps: f64,
    delta: f64,
    seed: u64,
    exact: bool,
    cfg: SolverConfig,
}

impl Settings {
    fn new(common: &Common) -> Result<Self, CliError> {
        Ok(Self {
            eps: common.eps,
            delta: common.delta,
            seed: common.seed,
            exact: common.exact,
            cfg: input::read_config(common.config.as_deref())?,
        })
    }
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

fn split_system(path: &Path) -> Result<(DenseMatrix, Vec<f64>), CliError> {
    let rows = input::read_rows(path)?;
    let w = rows[0].len();
    if w < 2 {
        return Err(CliError::Input(format!(
            "{}: need at least one column of A and the b column",
            path.display()
        )));
    }
    let a = DMatrix::from_fn(rows.len(), w - 1, |i, j| rows[i][j]);
    let b = rows.iter().map(|r| r[w - 1]).collect();
    Ok((a, b))
}

fn dense_of(op: &dyn LinearOperator, cfg: &SolverConfig) -> Result<DenseMatrix, CliError> {
    oracle::materialize(op, cfg.materialize_cap).map_err(CliError::from)
}

fn run_l2(name: &str, op: Arc<dyn LinearOperator>, b: &[f64], s: &Settings) -> Result<RunReport, CliError> {
    let (n, d) = (op.nrows(), op.ncols());
    let mut rng = rng::seeded(s.seed);
    let start = Instant::now();
    let sol = regression::solve_l2(op.clone(), b, s.eps, s.delta, &s.cfg, &mut rng)?;
    let mut rep = RunReport::new(name, n, d, s.eps, s.seed);
    rep.wall_time_ms = elapsed_ms(start);
    rep.delta = Some(s.delta);
    rep.residual = Some(sol.residual);
    rep.matvec_count = Some(sol.matvecs_used);
    rep.flag(sol.rank_deficient, "rank_deficient");
    rep.flag(sol.exact, "exact_fallback");
    if s.exact {
        let dense = dense_of(op.as_ref(), &s.cfg)?;
        let opt = oracle::exact_l2(&dense, &DVector::from_column_slice(b))?.residual;
        rep.set_oracle(sol.residual, opt, linalg::norm2(b));
    }
    rep.x = Some(sol.x);
    Ok(rep)
}

fn read_series(path: &Path, pad: bool) -> Result<Vec<f64>, CliError> {
    let series = input::read_column(path)?;
    Ok(if pad { pad_origin_zero(&series) } else { series })
}

fn run_ar(series: &[f64], d: usize, s: &Settings) -> Result<RunReport, CliError> {
    let (op, b) = regression::ar_system(series, d, &s.cfg)?;
    run_l2("ar", op, &b, s)
}

fn run_dyn(series: &[f64], d: usize, h: f64, s: &Settings) -> Result<RunReport, CliError> {
    let (op, b) = regression::dynamical_system(series, d, h, &s.cfg)?;
    run_l2("dyn", op, &b, s)
}

fn run_lp(op: Arc<dyn LinearOperator>, b: &[f64], p: f64, s: &Settings) -> Result<RunReport, CliError> {
    let (n, d) = (op.nrows(), op.ncols());
    let mut rng = rng::seeded(s.seed);
    let start = Instant::now();
    let sol = lp::solve_lp(op.clone(), b, p, s.eps, &s.cfg, &mut rng)?;
    let mut rep = RunReport::new("lp", n, d, s.eps, s.seed);
    rep.wall_time_ms = elapsed_ms(start);
    rep.p_norm = Some(p);
    rep.residual = Some(sol.cost);
    rep.matvec_count = Some(sol.matvecs_used);
    rep.flag(!sol.irls_converged, "irls_not_converged");
    rep.flag(!sol.lewis_converged, "lewis_not_converged");
    rep.flag(sol.theta_reduced, "sample_rate_capped");
    rep.flag(sol.exact, "exact_fallback");
    if s.exact {
        let dense = dense_of(op.as_ref(), &s.cfg)?;
        let opt = oracle::exact_lp(&dense, &DVector::from_column_slice(b), p)?.cost;
        rep.set_oracle(sol.cost, opt, linalg::norm_p(b, p));
    }
    rep.x = Some(sol.x);
    Ok(rep)
}

fn run_lowrank(a: &dyn LinearOperator, k: usize, s: &Settings) -> Result<RunReport, CliError> {
    let mut rng = rng::seeded(s.seed);
    let start = Instant::now();
    let res = lowrank::lowrank_approx(a, k, s.eps, &s.cfg, &mut rng)?;
    let mut rep = RunReport::new("lowrank", a.nrows(), a.ncols(), s.eps, s.seed);
    rep.wall_time_ms = elapsed_ms(start);
    rep.rank = Some(k);
    rep.fit = Some(res.fit);
    rep.matvec_count = Some(res.matvecs_used);
    rep.flag(res.lambda_floored, "lambda_floored");
    rep.flag(res.exact, "exact_fallback");
    if s.exact {
        let dense = dense_of(a, &s.cfg)?;
        let tail = oracle::svd_tail_sq(&dense, k)?.sqrt();
        rep.set_oracle(res.fit, tail, dense.norm());
    }
    rep.sampled = Some(res.sampled_columns.row_indices());
    Ok(rep)
}

fn parse_kernel(spec: &str) -> Result<Kernel, CliError> {
    let bad = || CliError::Input(format!("unknown kernel {spec:?}; use linear, poly<k> or poly<k>+<offset>"));
    if spec == "linear" {
        return Ok(Kernel::Linear);
    }
    let rest = spec.strip_prefix("poly").ok_or_else(bad)?;
    let (deg, offset) = match rest.split_once('+') {
        Some((d, o)) => (d, o.parse::<f64>().map_err(|_| bad())?),
        None => (rest, 0.0),
    };
    let degree: u32 = deg.parse().map_err(|_| bad())?;
    if degree == 0 || !offset.is_finite() {
        return Err(bad());
    }
    Ok(Kernel::Polynomial { degree, offset })
}

fn read_points(path: &Path) -> Result<PointSeries, CliError> {
    let rows = input::read_rows(path)?;
    let p = rows[0].len();
    Ok(PointSeries::new(p, rows.into_iter().flatten().collect())?)
}

fn run_kernel(prob: &KernelARProblem, s: &Settings) -> Result<RunReport, CliError> {
    let start = Instant::now();
    let sol = kernel_ar::general_kernel_solve(prob, s.cfg.pinv_rel_tol)?;
    let mut rep = RunReport::new("kernel-ar", prob.n(), prob.d(), s.eps, s.seed);
    rep.wall_time_ms = elapsed_ms(start);
    rep.p = Some(prob.p());
    rep.kernel = Some(prob.kernel().name());
    rep.residual = Some(sol.residual);
    rep.kernel_eval_count = Some(sol.kernel_evaluations);
    rep.flag(sol.rank_deficient, "rank_deficient");
    if s.exact {
        // every kernel entry evaluated block by block
        let gram = oracle::naive_kernel_gram(prob);
        let rhs = oracle::naive_kernel_rhs(prob).expect("lifted-series target");
        let x = linalg::lstsq(&gram, &rhs, s.cfg.pinv_rel_tol)?.x;
        let b_sq: f64 = (0..prob.n())
            .map(|i| {
                let c = prob.target_point(i).expect("lifted-series target");
                prob.kernel().eval(linalg::dot(c, c))
            })
            .sum();
        let opt = (b_sq - 2.0 * x.dot(&rhs) + x.dot(&(&gram * &x))).max(0.0).sqrt();
        rep.set_oracle(sol.residual, opt, b_sq.sqrt());
    }
    rep.x = Some(sol.x);
    Ok(rep)
}

fn run_poly2(prob: &KernelARProblem, s: &Settings) -> Result<RunReport, CliError> {
    let mut rng = rng::seeded(s.seed);
    let start = Instant::now();
    let sol = kernel_ar::solve_poly2(prob, s.eps, &s.cfg, &mut rng)?;
    let mut rep = RunReport::new("poly2", prob.n(), prob.d(), s.eps, s.seed);
    rep.wall_time_ms = elapsed_ms(start);
    rep.p = Some(prob.p());
    rep.kernel = Some(prob.kernel().name());
    rep.b_read_count = Some(sol.target_reads);
    rep.flag(sol.rank_deficient, "rank_deficient");
    rep.flag(sol.basis_rank_deficient, "basis_rank_deficient");
    rep.flag(sol.degenerate_draws > 0, "degenerate_draws");
    if s.exact {
        let rows = prob.n() * prob.p() * prob.p();
        if rows.saturating_mul(prob.d()) > s.cfg.materialize_cap {
            return Err(CliError::Input(format!(
                "explicit lift has {rows} rows, above materialize_cap"
            )));
        }
        // uncounted reads: the oracle sees all of b
        let (phi, b) = oracle::exact_poly2_lift(prob)?;
        let opt = oracle::exact_l2(&phi, &b)?.residual;
        let res = (&phi * DVector::from_column_slice(&sol.x) - &b).norm();
        rep.residual = Some(res);
        rep.set_oracle(res, opt, b.norm());
    }
    rep.sampled = Some(sol.sampled_rows);
    rep.x = Some(sol.x);
    Ok(rep)
}

fn bench_row(rep: &RunReport, bound: Option<u64>) -> BenchRow {
    BenchRow {
        n: rep.n,
        d: rep.d,
        wall_time_ms: rep.wall_time_ms,
        matvec_count: rep.matvec_count,
        matvec_bound: bound,
        kernel_eval_count: rep.kernel_eval_count,
        b_read_count: rep.b_read_count,
        flags: rep.flags.clone(),
    }
}

fn run_bench(
    solver: BenchSolver,
    sizes: &[usize],
    d: usize,
    p_norm: f64,
    rank: usize,
    p: usize,
    s: &Settings,
) -> Result<BenchReport, CliError> {
    use structsolve_bench as gen;
    let mut runs = Vec::new();
    for (idx, &n) in sizes.iter().enumerate() {
        let seed = s.seed.wrapping_add(idx as u64);
        let (rep, bound) = match solver {
            BenchSolver::Ar => {
                let series = gen::ar_series(n + d, seed);
                (run_ar(&series, d, s)?, Some(s.cfg.matvec_bound(n)))
            }
            BenchSolver::L2 => {
                let (op, b) = gen::toeplitz_problem(n, d, seed);
                (run_l2("l2", Arc::new(op), &b, s)?, Some(s.cfg.matvec_bound(n)))
            }
            BenchSolver::Lp => {
                let (op, b) = gen::heavy_tailed_problem(n, d, seed);
                (run_lp(Arc::new(op), &b, p_norm, s)?, None)
            }
            BenchSolver::Lowrank => {
                let op = DenseOperator::new(gen::power_law_matrix(n, d, seed));
                (run_lowrank(&op, rank.min(n.min(d)), s)?, None)
            }
            BenchSolver::KernelAr => {
                let prob = gen::kernel_problem(n, p, d, Kernel::quadratic(), seed);
                (run_kernel(&prob, s)?, None)
            }
            BenchSolver::Poly2 => {
                let prob = gen::poly2_problem(n, p, d, seed);
                (run_poly2(&prob, s)?, None)
            }
        };
        runs.push(bench_row(&rep, bound));
    }
    let name = format!("{solver:?}").to_lowercase();
    Ok(BenchReport {
        schema: report::SCHEMA,
        solver: name,
        runs,
    })
}

enum Output {
    Run(RunReport),
    Bench(BenchReport),
}

fn execute(command: Command) -> Result<(Output, Common), CliError> {
    let out = match command {
        Command::L2 { input, common } => {
            let s = Settings::new(&common)?;
            let (a, b) = split_system(&input)?;
            (Output::Run(run_l2("l2", Arc::new(DenseOperator::new(a)), &b, &s)?), common)
        }
        Command::Ar { input, d, pad_origin_zero, common } => {
            let s = Settings::new(&common)?;
            let series = read_series(&input, pad_origin_zero)?;
            (Output::Run(run_ar(&series, d, &s)?), common)
        }
        Command::Dyn { input, d, h, pad_origin_zero, common } => {
            let s = Settings::new(&common)?;
            let series = read_series(&input, pad_origin_zero)?;
            (Output::Run(run_dyn(&series, d, h, &s)?), common)
        }
        Command::Lp { input, p_norm, common } => {
            let s = Settings::new(&common)?;
            let (a, b) = split_system(&input)?;
            (Output::Run(run_lp(Arc::new(DenseOperator::new(a)), &b, p_norm, &s)?), common)
        }
        Command::Lowrank { input, rank, common } => {
            let s = Settings::new(&common)?;
            let rows = input::read_rows(&input)?;
            let a = DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j]);
            (Output::Run(run_lowrank(&DenseOperator::new(a), rank, &s)?), common)
        }
        Command::KernelAr { input, d, kernel, common } => {
            let s = Settings::new(&common)?;
            let prob = KernelARProblem::autoregressive(read_points(&input)?, d, parse_kernel(&kernel)?)?;
            (Output::Run(run_kernel(&prob, &s)?), common)
        }
        Command::Poly2 { input, d, target, common } => {
            let s = Settings::new(&common)?;
            let series = read_points(&input)?;
            let prob = match target {
                Some(path) => {
                    let t: Arc<dyn TargetAccess> = Arc::new(input::read_column(&path)?);
                    KernelARProblem::with_target(series, d, Kernel::quadratic(), t)?
                }
                None => KernelARProblem::autoregressive(series, d, Kernel::quadratic())?,
            };
            (Output::Run(run_poly2(&prob, &s)?), common)
        }
        Command::Bench { solver, n, d, p_norm, rank, p, common } => {
            let s = Settings::new(&common)?;
            (Output::Bench(run_bench(solver, &n, d, p_norm, rank, p, &s)?), common)
        }
    };
    Ok(out)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (output, common) = match execute(cli.command) {
        Ok(v) => v,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(match e {
                CliError::Input(_) => 2,
                CliError::Numerical(_) => 3,
            });
        }
    };
    let flagged = match &output {
        Output::Run(r) => !r.flags.iter().all(|f| f == "exact_fallback"),
        Output::Bench(b) => b.runs.iter().any(|r| r.flags.iter().any(|f| f != "exact_fallback")),
    };
    match (&output, common.json) {
        (Output::Run(r), true) => println!("{}", serde_json::to_string(r).expect("serializable report")),
        (Output::Bench(b), true) => println!("{}", serde_json::to_string(b).expect("serializable report")),
        (Output::Run(r), false) => r.print_text(),
        (Output::Bench(b), false) => b.print_text(),
    }
    if common.strict && flagged {
        eprintln!("error: numerical flags raised under --strict");
        return ExitCode::from(3);
    }
    ExitCode::SUCCESS
}
