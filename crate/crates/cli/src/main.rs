//! `qgs`: spectra, traces and trace asymptotics of Schrödinger operators on
//! metric graphs.
//!
//! Exit status is 0 on success, 1 when a numerical check fails or a
//! computation does not converge, and 2 when the input is invalid.

mod commands;
mod grid;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use grid::Grid;
use report::Format;

#[derive(Parser, Debug)]
#[command(name = "qgs", version, about = "Quantum graph spectra, resolvent traces and heat-trace asymptotics")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    common: Common,
}

#[derive(Args, Debug, Clone)]
pub struct Common {
    /// Graph description (JSON).
    #[arg(long, global = true)]
    graph: Option<PathBuf>,
    /// Split tadpoles and move external potentials onto inserted edges.
    #[arg(long, global = true)]
    normalize: bool,
    #[arg(long, global = true, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Write the output here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
pub enum Reg {
    /// Dirichlet half-lines.
    D,
    /// Neumann half-lines.
    N,
}

impl From<Reg> for qgs::Regularization {
    fn from(r: Reg) -> Self {
        match r {
            Reg::D => qgs::Regularization::Dirichlet,
            Reg::N => qgs::Regularization::Neumann,
        }
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the graph, its vertex conditions and potentials.
    Validate,
    /// Eigenvalues up to a bound.
    Spectrum {
        #[arg(long, default_value_t = 100.0)]
        lambda_max: f64,
        /// Only the negative eigenvalues (required on non-compact graphs).
        #[arg(long)]
        negative_only: bool,
        /// Reference eigenvalues, one per line (first comma-separated field).
        #[arg(long)]
        oracle: Option<PathBuf>,
        /// Relative tolerance of the comparison with the reference.
        #[arg(long, default_value_t = 1e-6)]
        oracle_tol: f64,
    },
    /// The 𝔖-matrix at one k next to its large-k expansion.
    Smatrix {
        /// `re` or `re,im`.
        #[arg(long, allow_hyphen_values = true)]
        k: String,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
    /// Regularised resolvent trace at k = iκ.
    ResolventTrace {
        /// `a:b:n`, n geometrically spaced points.
        #[arg(long, default_value = "1:64:7")]
        kappa_grid: Grid,
        #[arg(long, value_enum, default_value_t = Reg::N)]
        regularization: Reg,
        #[arg(long, default_value_t = 5)]
        order: usize,
    },
    /// Heat trace from the spectrum, next to its small-t expansion.
    HeatTrace {
        /// `a:b:n`, n geometrically spaced points.
        #[arg(long, default_value = "0.01:1:7")]
        t_grid: Grid,
        #[arg(long, default_value_t = 5)]
        order: usize,
        /// Absolute accuracy of every trace value.
        #[arg(long, default_value_t = 1e-10)]
        tol: f64,
    },
    /// The coefficients b₁…b₅ and a₁…a₅.
    Coefficients,
    /// Heat-trace residuals and the fitted small-t slope.
    HeatResiduals {
        #[arg(long, default_value = "0.001953125:0.0625:6")]
        t_grid: Grid,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
        /// Replace a coefficient, `n=value` (repeatable).
        #[arg(long = "set-a", value_parser = commands::parse_override)]
        set_a: Vec<(usize, f64)>,
    },
    /// Resolvent-trace residuals and the fitted large-κ slope.
    ResolventResiduals {
        #[arg(long, default_value = "8:64:4")]
        kappa_grid: Grid,
        #[arg(long, default_value_t = 2)]
        order: usize,
        #[arg(long, value_enum, default_value_t = Reg::N)]
        regularization: Reg,
    },
    /// Numerical u⁺ against the truncated WKB series on every edge.
    WkbCheck {
        #[arg(long, default_value = "20:160:4")]
        k_grid: Grid,
        #[arg(long, default_value_t = 3)]
        order: usize,
    },
}

fn init_threads() -> Result<(), commands::Failure> {
    let Ok(raw) = std::env::var("QGS_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| commands::Failure::input(format!("QGS_THREADS must be a positive integer, got {raw:?}")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| commands::Failure::input(format!("cannot size the thread pool: {e}")))
}

fn run(cli: Cli) -> Result<commands::Outcome, commands::Failure> {
    init_threads()?;
    let c = &cli.common;
    match cli.command {
        Command::Validate => commands::validate(c),
        Command::Spectrum { lambda_max, negative_only, oracle, oracle_tol } => {
            commands::spectrum(c, lambda_max, negative_only, oracle.as_deref(), oracle_tol)
        }
        Command::Smatrix { k, order } => commands::smatrix(c, &k, order),
        Command::ResolventTrace { kappa_grid, regularization, order } => {
            commands::resolvent_trace(c, &kappa_grid, regularization.into(), order)
        }
        Command::HeatTrace { t_grid, order, tol } => commands::heat_trace(c, &t_grid, order, tol),
        Command::Coefficients => commands::coefficients(c),
        Command::HeatResiduals { t_grid, order, tol, set_a } => commands::heat_residuals(c, &t_grid, order, tol, &set_a),
        Command::ResolventResiduals { kappa_grid, order, regularization } => {
            commands::resolvent_residuals(c, &kappa_grid, order, regularization.into())
        }
        Command::WkbCheck { k_grid, order } => commands::wkb_check(c, &k_grid, order),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let format = cli.common.format;
    let out = cli.common.out.clone();
    match run(cli) {
        Ok(outcome) => {
            let text = outcome.report.render(format);
            let written = match &out {
                Some(path) => std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display())),
                None => {
                    print!("{text}");
                    Ok(())
                }
            };
            if let Err(e) = written {
                eprintln!("error: {e}");
                return ExitCode::from(2);
            }
            for w in &outcome.warnings {
                eprintln!("warning: {w}");
            }
            if outcome.passed {
                ExitCode::SUCCESS
            } else {
                eprintln!("check failed");
                ExitCode::from(1)
            }
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
