//! `pointfrac`: constants, resolvents, the E_τ curve and verification suites.
//! Exit codes: 0 success, 1 verification failure, 2 bad input, 3 resolvent pole.

mod constants;
mod figure1;
mod output;
mod resolvent;
mod verify;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pointfrac::operators::Family;
use pointfrac::radial::GridSpec;

use output::{emit, Failure, Format};

/// Grid override read when --grid is absent.
const GRID_ENV: &str = "POINTFRAC_GRID";

#[derive(Parser)]
#[command(name = "pointfrac", version, about = "Point perturbations of fractional Laplacians")]
struct Cli {
    /// Radial grid "r_min,r_max,count" [default: $POINTFRAC_GRID, else 1e-6,1e6,4096]
    #[arg(long, global = true)]
    grid: Option<String>,
    /// Output file; stdout when absent
    #[arg(long, short, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Closed-form constants with quadrature oracles
    Constants {
        #[arg(long)]
        d: u32,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Resolvent of a rank-one extension applied to a profile CSV
    Resolvent {
        /// homogeneous-k, classic-h or inhomogeneous-d
        #[arg(long)]
        family: Family,
        #[arg(long)]
        d: u32,
        #[arg(long, allow_negative_numbers = true)]
        s: f64,
        /// Shift of the resolvent
        #[arg(long, allow_negative_numbers = true)]
        lambda: f64,
        /// Which extension parameter is given
        #[arg(long, value_enum)]
        param: resolvent::Param,
        /// λ-independent label; "inf" allowed
        #[arg(long, allow_negative_numbers = true)]
        alpha: Option<String>,
        /// Label at --tau-lambda; "inf" allowed
        #[arg(long, allow_negative_numbers = true)]
        tau: Option<String>,
        /// Shift at which --tau is given [default: --lambda]
        #[arg(long, allow_negative_numbers = true)]
        tau_lambda: Option<f64>,
        /// Input profile "r,re,im" (JSON sidecar optional)
        #[arg(long)]
        input: PathBuf,
        /// Apply the operator to the written output and check it returns the input
        #[arg(long)]
        verify: bool,
        #[arg(long, default_value_t = 1e-8)]
        verify_tol: f64,
    },
    /// Negative eigenvalue E_τ of the inhomogeneous family over a τ range
    Figure1 {
        #[arg(long, default_value_t = 1.0, allow_negative_numbers = true)]
        lambda: f64,
        #[arg(long, default_value_t = 1.8, allow_negative_numbers = true)]
        s: f64,
        #[arg(long, default_value_t = -3.0, allow_negative_numbers = true)]
        tau_min: f64,
        #[arg(long, default_value_t = -0.05, allow_negative_numbers = true)]
        tau_max: f64,
        #[arg(long, default_value_t = 50)]
        points: usize,
        #[arg(long, value_enum, default_value_t = Format::Csv)]
        format: Format,
    },
    /// Run invariant suites; JSON report, exit 1 on any failure
    Verify {
        #[arg(value_enum, default_value_t = verify::Suite::All)]
        suite: verify::Suite,
        /// Multiplies every positive upper tolerance
        #[arg(long, default_value_t = 1.0)]
        tol_scale: f64,
    },
}

fn grid_spec(flag: Option<&str>) -> Result<Option<GridSpec>, Failure> {
    let text = match flag {
        Some(t) => Some(t.to_string()),
        None => std::env::var(GRID_ENV).ok().filter(|t| !t.trim().is_empty()),
    };
    text.map(|t| GridSpec::parse(&t).map_err(Failure::from)).transpose()
}

fn run(cli: Cli) -> Result<ExitCode, Failure> {
    let grid = grid_spec(cli.grid.as_deref())?;
    let out = cli.out.as_deref();
    match cli.command {
        Command::Constants { d, s, lambda, format } => {
            emit(out, &constants::render(d, s, lambda, format)?)?;
            Ok(ExitCode::SUCCESS)
        }
        Command::Resolvent { family, d, s, lambda, param, alpha, tau, tau_lambda, input, verify, verify_tol } => {
            let out = out.ok_or_else(|| Failure::input("resolvent needs --out for the output profile"))?.to_path_buf();
            if grid.is_some() {
                // the input file fixes the grid
                eprintln!("note: --grid/{GRID_ENV} is ignored by resolvent");
            }
            let args = resolvent::ResolventArgs { family, d, s, lambda, param, alpha, tau, tau_lambda, input, out, verify, verify_tol };
            print!("{}", resolvent::run(&args)?);
            Ok(ExitCode::SUCCESS)
        }
        Command::Figure1 { lambda, s, tau_min, tau_max, points, format } => {
            let args = figure1::Figure1Args { lambda, s, tau_min, tau_max, points, grid };
            let (text, ok) = figure1::run(&args, format)?;
            emit(out, &text)?;
            if ok {
                Ok(ExitCode::SUCCESS)
            } else {
                Err(Failure::verify("fewer than 90% of the rows produced E_τ"))
            }
        }
        Command::Verify { suite, tol_scale } => {
            let (text, ok) = verify::run(suite, tol_scale, grid.unwrap_or_default())?;
            emit(out, &text)?;
            if ok {
                Ok(ExitCode::SUCCESS)
            } else {
                Err(Failure::verify("verification failed"))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
