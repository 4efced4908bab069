//! Command-line driver: single adaptive solves, wall-gradient table sweeps
//! and standalone shooting runs. Defaults reproduce the reference setup
//! (domain truncated at 8, coarse mesh of 8 elements, 20 adaptive cycles,
//! estimator tolerance 1e-6, nonlinear tolerance 1e-12).

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use skanfem::adapt::{run_adaptive, AdaptiveRunReport, AmrConfig};
use skanfem::assembly::Linearization;
use skanfem::linsolve::KrylovConfig;
use skanfem::model::{BcVariant, FlowParams};
use skanfem::oracle::solve_shooting;
use skanfem::picard::PicardConfig;
use skanfem::postproc::{export_indicators, export_profile, RunSummary};

#[derive(Parser)]
#[command(
    name = "skanfem",
    about = "Adaptive finite element solver for the Falkner-Skan boundary layer",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// One adaptive run; writes profile.csv, per-cycle indicator tables and
    /// summary.json into the output directory.
    Solve(SolveArgs),
    /// One adaptive run per entry of --m-list; writes table.csv with the
    /// wall gradients next to the shooting reference.
    Sweep(SweepArgs),
    /// Standalone shooting-method solve; prints the wall curvature.
    Oracle(OracleArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum BcArg {
    Wedge,
    Stretching,
}

impl From<BcArg> for BcVariant {
    fn from(v: BcArg) -> Self {
        match v {
            BcArg::Wedge => BcVariant::Wedge,
            BcArg::Stretching => BcVariant::Stretching,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum LinearizationArg {
    Newton,
    Picard,
}

impl From<LinearizationArg> for Linearization {
    fn from(v: LinearizationArg) -> Self {
        match v {
            LinearizationArg::Newton => Linearization::NewtonTerm,
            LinearizationArg::Picard => Linearization::PicardProduct,
        }
    }
}

#[derive(Args)]
struct ParamArgs {
    /// Wedge exponent m (exactly one of --m / --beta).
    #[arg(long, allow_hyphen_values = true, conflicts_with = "beta")]
    m: Option<f64>,
    /// Pressure-gradient parameter beta; m is back-solved as beta/(2-beta).
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
    /// Domain truncation length.
    #[arg(long = "eta-inf", default_value = "8")]
    eta_inf: f64,
    /// Boundary-condition variant.
    #[arg(long, value_enum, default_value = "wedge")]
    bc: BcArg,
}

impl ParamArgs {
    fn params(&self) -> anyhow::Result<FlowParams> {
        let p = match (self.m, self.beta) {
            (Some(m), None) => FlowParams::from_m(m, self.eta_inf, self.bc.into())?,
            (None, Some(beta)) => FlowParams::from_beta(beta, self.eta_inf, self.bc.into())?,
            _ => bail!("provide exactly one of --m / --beta"),
        };
        Ok(p)
    }
}

#[derive(Args)]
struct SolverArgs {
    /// Elements of the initial uniform mesh.
    #[arg(long, default_value = "8")]
    n0: usize,
    /// Adaptive cycle budget.
    #[arg(long = "max-cycles", default_value = "20")]
    max_cycles: usize,
    /// Global estimator target.
    #[arg(long = "tol-error", default_value = "1e-6")]
    tol_error: f64,
    /// Relative update tolerance of the nonlinear iteration.
    #[arg(long = "tol-picard", default_value = "1e-12")]
    tol_picard: f64,
    /// Marking fraction on squared indicators.
    #[arg(long, default_value = "0.5")]
    theta: f64,
    /// Residual-term estimator constant.
    #[arg(long, default_value = "1.0")]
    c1: f64,
    /// Jump-term estimator constant.
    #[arg(long, default_value = "0.5")]
    c2: f64,
    /// How the u^2 term is frozen between iterations.
    #[arg(long, value_enum, default_value = "newton")]
    linearization: LinearizationArg,
    /// Solve the velocity block with the preconditioned Krylov iteration
    /// (the default).
    #[arg(long, conflicts_with = "direct_only")]
    krylov: bool,
    /// Use the direct tridiagonal solver everywhere.
    #[arg(long = "direct-only")]
    direct_only: bool,
    /// Merge low-indicator element pairs after each refinement.
    #[arg(long)]
    coarsen: bool,
}

impl SolverArgs {
    fn amr_config(&self) -> AmrConfig {
        AmrConfig {
            max_cycles: self.max_cycles,
            tol_error: self.tol_error,
            theta: self.theta,
            coarsening: self.coarsen,
            c1: self.c1,
            c2: self.c2,
            initial_elements: self.n0,
            picard: PicardConfig {
                tol: self.tol_picard,
                linearization: self.linearization.into(),
                use_krylov: !self.direct_only,
                krylov: KrylovConfig::default(),
                ..PicardConfig::default()
            },
        }
    }
}

#[derive(Args)]
struct OutputArgs {
    /// Output directory (created if missing).
    #[arg(long = "out-dir", default_value = "out")]
    out_dir: PathBuf,
    /// Skip writing profile.csv.
    #[arg(long = "no-profile")]
    no_profile: bool,
    /// Skip writing the per-cycle indicator tables.
    #[arg(long = "no-indicators")]
    no_indicators: bool,
    /// Skip writing summary.json.
    #[arg(long = "no-summary")]
    no_summary: bool,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    solver: SolverArgs,
    #[command(flatten)]
    output: OutputArgs,
}

#[derive(Args)]
struct SweepArgs {
    /// Comma-separated wedge exponents, one adaptive run each.
    #[arg(long = "m-list", value_delimiter = ',', required = true, allow_hyphen_values = true)]
    m_list: Vec<f64>,
    #[arg(long = "eta-inf", default_value = "8")]
    eta_inf: f64,
    #[command(flatten)]
    solver: SolverArgs,
    /// Output directory (created if missing).
    #[arg(long = "out-dir", default_value = "out")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Terminal boundary-condition tolerance.
    #[arg(long, default_value = "1e-10")]
    tol: f64,
    /// When given, the converged profile is written here as
    /// oracle_profile.csv.
    #[arg(long = "out-dir")]
    out_dir: Option<PathBuf>,
}

fn main() {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Solve(args) => run_solve(args),
        Command::Sweep(args) => run_sweep(args),
        Command::Oracle(args) => run_oracle(args),
    };
    if let Err(err) = result {
        eprintln!("error: {err:#}");
        std::process::exit(1);
    }
}

fn ensure_dir(dir: &Path) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))
}

fn adaptive_with_oracle(
    params: &FlowParams,
    cfg: &AmrConfig,
) -> anyhow::Result<(AdaptiveRunReport, Option<f64>)> {
    let report = run_adaptive(params, cfg)?;
    let alpha = match solve_shooting(params, 1e-10) {
        Ok(shot) => Some(shot.alpha),
        Err(err) => {
            eprintln!("warning: shooting reference failed: {err}");
            None
        }
    };
    Ok((report, alpha))
}

fn run_solve(args: SolveArgs) -> anyhow::Result<()> {
    let params = args.params.params()?;
    let cfg = args.solver.amr_config();
    let out = &args.output.out_dir;
    ensure_dir(out)?;

    let (report, alpha) = adaptive_with_oracle(&params, &cfg)?;

    if !args.output.no_profile {
        export_profile(&report.final_field, &out.join("profile.csv"))?;
    }
    if !args.output.no_indicators {
        for (rec, est) in report.cycles.iter().zip(&report.estimates) {
            let path = out.join(format!("indicators_cycle_{}.csv", rec.cycle));
            export_indicators(&est.kelly, &est.mesh, rec.cycle, &path)?;
        }
    }
    let summary = RunSummary::new(&params, &report, alpha);
    if !args.output.no_summary {
        summary.write_json(&out.join("summary.json"))?;
    }

    println!(
        "m = {}, beta = {}: f''(0) = {:.6} after {} cycles ({} dofs, terminated by {:?})",
        params.m(),
        params.beta(),
        report.fpp0_final(),
        report.cycles.len(),
        report.final_mesh().node_count(),
        report.terminated_by,
    );
    if let Some(a) = alpha {
        println!(
            "shooting reference alpha = {a:.6}, |difference| = {:.3e}",
            (report.fpp0_final() - a).abs()
        );
    }
    Ok(())
}

fn float_cell(v: f64) -> String {
    if v.is_nan() {
        "nan".to_string()
    } else {
        format!("{v:?}")
    }
}

fn run_sweep(args: SweepArgs) -> anyhow::Result<()> {
    if args.m_list.is_empty() {
        bail!("--m-list must contain at least one value");
    }
    ensure_dir(&args.out_dir)?;
    let cfg = args.solver.amr_config();

    let pool = build_pool()?;
    let rows: Vec<(f64, Result<(f64, f64, Option<f64>), String>)> = pool.install(|| {
        use rayon::prelude::*;
        args.m_list
            .par_iter()
            .map(|&m| {
                let row = (|| -> anyhow::Result<(f64, f64, Option<f64>)> {
                    let params = FlowParams::from_m(m, args.eta_inf, BcVariant::Wedge)?;
                    let report = run_adaptive(&params, &cfg)?;
                    let alpha = solve_shooting(&params, 1e-10).ok().map(|s| s.alpha);
                    Ok((params.beta(), report.fpp0_final(), alpha))
                })()
                .map_err(|e| format!("{e:#}"));
                (m, row)
            })
            .collect()
    });

    let table_path = args.out_dir.join("table.csv");
    let mut table = String::from("m,beta,fpp0,oracle_alpha,abs_diff\n");
    for (m, row) in &rows {
        match row {
            Ok((beta, fpp0, alpha)) => {
                let (a, d) = match alpha {
                    Some(a) => (*a, (fpp0 - a).abs()),
                    None => (f64::NAN, f64::NAN),
                };
                table.push_str(&format!(
                    "{},{},{},{},{}\n",
                    float_cell(*m),
                    float_cell(*beta),
                    float_cell(*fpp0),
                    float_cell(a),
                    float_cell(d)
                ));
            }
            Err(msg) => {
                eprintln!("warning: m = {m} failed: {msg}");
                table.push_str(&format!("{},nan,nan,nan,nan\n", float_cell(*m)));
            }
        }
    }
    fs::write(&table_path, table).with_context(|| format!("writing {}", table_path.display()))?;

    println!("wrote {} ({} rows)", table_path.display(), rows.len());
    Ok(())
}

fn build_pool() -> anyhow::Result<rayon::ThreadPool> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Ok(raw) = std::env::var("SKANFEM_THREADS") {
        let n: usize = raw
            .parse()
            .with_context(|| format!("SKANFEM_THREADS = {raw:?} is not a thread count"))?;
        builder = builder.num_threads(n.max(1));
    }
    builder.build().context("building the sweep worker pool")
}

fn run_oracle(args: OracleArgs) -> anyhow::Result<()> {
    let params = args.params.params()?;
    let shot = solve_shooting(&params, args.tol)?;
    println!(
        "alpha = {:.8}, residual = {:.3e}, iterations = {}",
        shot.alpha, shot.residual, shot.iterations
    );
    if let Some(dir) = args.out_dir {
        ensure_dir(&dir)?;
        let path = dir.join("oracle_profile.csv");
        let mut text = String::from("eta,f,u,w\n");
        for p in &shot.profile {
            text.push_str(&format!("{:?},{:?},{:?},{:?}\n", p.eta, p.f, p.u, p.w));
        }
        fs::write(&path, text).with_context(|| format!("writing {}", path.display()))?;
        println!("wrote {}", path.display());
    }
    Ok(())
}
