//! `hasym`: generators, solvers and verification studies for
//! `h^3 (h'' + h') = 1` from the command line.
//!
//! Exit codes: 0 success, 1 verification or solver failure, 2 usage error,
//! 3 accuracy-gating error.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use hasym_core::asympt::{
    fit_c_for_data, lambert_compare, remainder_study, AsymptoticModel, FitReport, SyntheticSolution,
    DEFAULT_GROWTH_LIMIT,
};
use hasym_core::numerics::{integrate_h_with_stops, GProblem, InitialData, SolverConfig};
use hasym_core::{Dd, Error};

mod render;

#[derive(Parser, Debug)]
#[command(name = "hasym", version, about = "Asymptotic expansion toolkit for h^3 (h'' + h') = 1")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Exact coefficients and polynomial families.
    Series(SeriesArgs),
    /// Integrate h and write the trajectory.
    Integrate(IntegrateArgs),
    /// Compute the constant c by quadrature, by fitting, or both.
    Constant(ConstantArgs),
    /// Remainder study of the expansion against a numerical solution.
    Verify(VerifyArgs),
    /// Compare the larger root of y - ln y = x with its series.
    Lambert(LambertArgs),
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Kind {
    Alpha,
    Beta,
    P,
    Q,
    Lambert,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    /// Human-readable table; for `series` the display order of the
    /// polynomials.
    PaperTable,
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, ValueEnum)]
enum Method {
    Quadrature,
    Fit,
    Both,
}

#[derive(Args, Debug)]
struct Output {
    /// Output format [default depends on the subcommand].
    #[arg(long, value_enum)]
    format: Option<Format>,
    /// Write to this file instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct Data {
    #[arg(long, default_value = "0", allow_hyphen_values = true, value_parser = parse_dd)]
    t0: Dd,
    #[arg(long, default_value = "1", allow_hyphen_values = true, value_parser = parse_dd)]
    h0: Dd,
    #[arg(long, default_value = "1", allow_hyphen_values = true, value_parser = parse_dd)]
    h1: Dd,
}

#[derive(Args, Debug)]
struct Tolerance {
    /// Relative tolerance [default: 1e-10 for integrate, 1e-26 otherwise].
    #[arg(long)]
    rel_tol: Option<f64>,
    /// Absolute tolerance [default: 1e-12 for integrate, 1e-28 otherwise].
    #[arg(long)]
    abs_tol: Option<f64>,
}

#[derive(Args, Debug)]
struct SeriesArgs {
    #[arg(value_enum)]
    kind: Kind,
    /// Highest index generated (at least 1 for q).
    #[arg(long, default_value_t = 4)]
    order: usize,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct IntegrateArgs {
    #[command(flatten)]
    data: Data,
    #[arg(long, default_value = "1e3", value_parser = parse_dd)]
    t_max: Dd,
    #[command(flatten)]
    tol: Tolerance,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct ConstantArgs {
    #[command(flatten)]
    data: Data,
    #[arg(long, value_enum, default_value_t = Method::Both)]
    method: Method,
    /// Largest accepted discrepancy between the two methods.
    #[arg(long, default_value_t = 1e-6)]
    agree_tol: f64,
    #[command(flatten)]
    tol: Tolerance,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct VerifyArgs {
    #[command(flatten)]
    data: Data,
    /// Largest expansion order n studied.
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Comma-separated times, strictly increasing and above 1.
    #[arg(long, default_value = "1e2,1e3,1e4,1e5,1e6", value_parser = parse_grid)]
    grid: Grid,
    /// Largest accepted ratio R_n(last) / R_n(first).
    #[arg(long, default_value_t = DEFAULT_GROWTH_LIMIT)]
    growth_limit: f64,
    /// Replace the numerical solution by A_N(c; t) with this N.
    #[arg(long)]
    synthetic: Option<usize>,
    /// Constant for the synthetic solution; otherwise computed by quadrature.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_dd)]
    c: Option<Dd>,
    #[command(flatten)]
    tol: Tolerance,
    #[command(flatten)]
    output: Output,
}

#[derive(Args, Debug)]
struct LambertArgs {
    #[arg(long, default_value_t = 3)]
    order: usize,
    /// Comma-separated points, strictly increasing and above 1.
    #[arg(long, default_value = "10,1e2,1e3,1e4,1e5", value_parser = parse_grid)]
    grid: Grid,
    #[arg(long, default_value_t = DEFAULT_GROWTH_LIMIT)]
    growth_limit: f64,
    #[command(flatten)]
    output: Output,
}

#[derive(Clone, Debug)]
struct Grid(Vec<Dd>);

fn parse_dd(s: &str) -> Result<Dd, String> {
    s.trim().parse::<Dd>().map_err(|e| e.to_string())
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    s.split(',')
        .filter(|p| !p.trim().is_empty())
        .map(parse_dd)
        .collect::<Result<Vec<_>, _>>()
        .map(Grid)
}

/// Failure of a subcommand, carrying its exit code.
#[derive(Debug)]
enum Failure {
    Usage(String),
    Verification(String),
    Gate(String),
    Io(io::Error),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Domain(_) | Error::Config(_) | Error::Parse(_) => Failure::Usage(e.to_string()),
            Error::Accuracy(_) | Error::AccuracyGate { .. } => Failure::Gate(e.to_string()),
            Error::IntegrationFailure { .. } | Error::Range { .. } | Error::Convergence { .. } => {
                Failure::Verification(e.to_string())
            }
        }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::Io(e)
    }
}

type CmdResult = Result<(), Failure>;

fn open_output(out: &Option<PathBuf>) -> io::Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(File::create(path)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn verification_config(tol: &Tolerance) -> SolverConfig {
    let mut cfg = SolverConfig::verification();
    if let Some(r) = tol.rel_tol {
        cfg.rel_tol = r;
    }
    if let Some(a) = tol.abs_tol {
        cfg.abs_tol = a;
    }
    cfg
}

fn initial_data(d: &Data) -> Result<InitialData, Failure> {
    Ok(InitialData::from_dd(d.t0, d.h0, d.h1)?)
}

fn cmd_series(args: &SeriesArgs) -> CmdResult {
    if args.kind == Kind::Q && args.order == 0 {
        return Err(Failure::Usage("q is indexed from 1; use --order 1 or more".into()));
    }
    let format = args.output.format.unwrap_or(Format::PaperTable);
    let text = render::series(args.kind, args.order, format);
    let mut out = open_output(&args.output.out)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    Ok(())
}

fn cmd_integrate(args: &IntegrateArgs) -> CmdResult {
    let data = initial_data(&args.data)?;
    let mut cfg = SolverConfig::default();
    if let Some(r) = args.tol.rel_tol {
        cfg.rel_tol = r;
    }
    if let Some(a) = args.tol.abs_tol {
        cfg.abs_tol = a;
    }
    let traj = integrate_h_with_stops(&data, args.t_max, &[], &cfg)?;
    let mut out = open_output(&args.output.out)?;
    match args.output.format.unwrap_or(Format::Csv) {
        Format::Csv => traj.write_csv(&mut out)?,
        Format::Json => {
            let doc = render::trajectory_json(&traj);
            writeln!(out, "{}", serde_json::to_string_pretty(&doc).expect("serializable"))?;
        }
        Format::PaperTable => out.write_all(render::trajectory_table(&traj).as_bytes())?,
    }
    out.flush()?;
    let s = traj.summary();
    eprintln!(
        "final t = {:.16e}, h = {:.16e}, h' = {:.16e} ({} steps)",
        s.t_end, s.h_end, s.hprime_end, s.steps
    );
    Ok(())
}

fn cmd_constant(args: &ConstantArgs) -> CmdResult {
    let data = initial_data(&args.data)?;
    let cfg = verification_config(&args.tol);
    let quad = match args.method {
        Method::Quadrature | Method::Both => Some(GProblem::from_initial_data(&data, &cfg)?),
        Method::Fit => None,
    };
    let fit: Option<(Dd, FitReport)> = match args.method {
        Method::Fit | Method::Both => Some(fit_c_for_data(&data, &cfg)?),
        Method::Quadrature => None,
    };
    let discrepancy = match (&quad, &fit) {
        (Some(q), Some((f, _))) => Some((q.c() - *f).abs().to_f64()),
        _ => None,
    };
    let agree = discrepancy.is_none_or(|d| d <= args.agree_tol);
    let text = render::constant(
        args.output.format.unwrap_or(Format::Json),
        quad.as_ref(),
        fit.as_ref(),
        discrepancy,
        args.agree_tol,
    );
    let mut out = open_output(&args.output.out)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    if agree {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "quadrature and fit disagree by {:e} (allowed {:e})",
            discrepancy.unwrap_or(f64::NAN),
            args.agree_tol
        )))
    }
}

fn cmd_verify(args: &VerifyArgs) -> CmdResult {
    let grid = &args.grid.0;
    let report = match args.synthetic {
        Some(n_syn) => {
            let c = args.c.unwrap_or(Dd::ZERO);
            let model = AsymptoticModel::new(c, n_syn.max(args.order))?;
            let syn = SyntheticSolution::new(model.clone(), n_syn)?;
            remainder_study(&model, &syn, args.order, grid, args.growth_limit)?
        }
        None => {
            let data = initial_data(&args.data)?;
            let cfg = verification_config(&args.tol);
            let c = match args.c {
                Some(c) => c,
                None => GProblem::from_initial_data(&data, &cfg)?.c(),
            };
            let last = *grid
                .last()
                .ok_or_else(|| Failure::Usage("empty grid".into()))?;
            let model = AsymptoticModel::new(c, args.order)?;
            if last <= data.t0 {
                return Err(Failure::Usage("grid must extend beyond t0".into()));
            }
            let traj = integrate_h_with_stops(&data, last, grid, &cfg)?;
            remainder_study(&model, &traj, args.order, grid, args.growth_limit)?
        }
    };
    let text = match args.output.format.unwrap_or(Format::Json) {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
        Format::PaperTable => render::remainder_table(&report),
    };
    let mut out = open_output(&args.output.out)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    for s in &report.summary {
        eprintln!(
            "n = {}: max ratio {:.3e}, growth {:.3} -> {}",
            s.n,
            s.max_ratio,
            s.growth,
            if s.passed { "PASS" } else { "FAIL" }
        );
    }
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification("remainder growth exceeds the limit".into()))
    }
}

fn cmd_lambert(args: &LambertArgs) -> CmdResult {
    let report = lambert_compare(args.order, &args.grid.0, args.growth_limit)?;
    let text = match args.output.format.unwrap_or(Format::Csv) {
        Format::Json => report.to_json() + "\n",
        Format::Csv => report.to_csv(),
        Format::PaperTable => render::lambert_table(&report),
    };
    let mut out = open_output(&args.output.out)?;
    out.write_all(text.as_bytes())?;
    out.flush()?;
    if report.passed {
        Ok(())
    } else {
        Err(Failure::Verification(format!(
            "Lambert comparison failed (max residual {:e})",
            report.max_residual
        )))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Series(a) => cmd_series(a),
        Command::Integrate(a) => cmd_integrate(a),
        Command::Constant(a) => cmd_constant(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Lambert(a) => cmd_lambert(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Verification(msg)) => {
            eprintln!("hasym: {msg}");
            ExitCode::from(1)
        }
        Err(Failure::Io(e)) => {
            eprintln!("hasym: {e}");
            ExitCode::from(1)
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("hasym: {msg}");
            ExitCode::from(2)
        }
        Err(Failure::Gate(msg)) => {
            eprintln!("hasym: {msg}");
            ExitCode::from(3)
        }
    }
}
