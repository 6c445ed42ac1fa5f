use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, CommandFactory, Parser, Subcommand};

use pcf_core::api::{evaluate_with, Config, EvalRequest, DEFAULT_TOL, TOL_RANGE};
use pcf_core::contours::{sample_contour, Regime};
use pcf_core::PcfError;
use pcf_cli::render::{g17, scaled_fields};
use pcf_cli::selftest::{self, ALL_CRITERIA};
use pcf_cli::table::{self, Format, Range, TableSpec, Target};
use pcf_cli::CliError;

/// Real parabolic cylinder functions U(a,x), V(a,x), W(a,x) by quadrature.
///
/// Exit status: 0 success, 1 usage error, 2 domain error or overflow,
/// 3 convergence or contour-trace failure, 4 self-test failure.
#[derive(Parser, Debug)]
#[command(name = "pcf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Evaluate one function at one point.
    Eval(EvalArgs),
    /// Evaluate a function over a grid of orders and arguments.
    Table(TableArgs),
    /// Dump a steepest-descent contour as CSV.
    Contour(ContourArgs),
    /// Run the acceptance grid.
    Selftest(SelftestArgs),
}

#[derive(Args, Debug)]
struct Tolerance {
    /// Relative tolerance; overrides PCF_TOL.
    #[arg(long, allow_negative_numbers = true)]
    tol: Option<f64>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    /// U, V or W, with a `p` suffix for the derivative.
    #[arg(long)]
    func: Target,
    #[arg(long, allow_negative_numbers = true)]
    a: f64,
    #[arg(long, allow_negative_numbers = true)]
    x: f64,
    /// Print the value as `significand,log_scale`.
    #[arg(long)]
    scaled: bool,
    #[command(flatten)]
    tol: Tolerance,
}

#[derive(Args, Debug)]
struct TableArgs {
    #[arg(long)]
    func: Target,
    /// Orders as `lo:hi:step` or a single value.
    #[arg(long, allow_hyphen_values = true)]
    a: Range,
    /// Arguments as `lo:hi:step` or a single value.
    #[arg(long, allow_hyphen_values = true)]
    x: Range,
    #[arg(long, default_value = "csv")]
    format: Format,
    #[arg(long)]
    scaled: bool,
    /// Write to this file instead of stdout.
    #[arg(long, short)]
    output: Option<PathBuf>,
    #[command(flatten)]
    tol: Tolerance,
}

#[derive(Args, Debug)]
struct ContourArgs {
    /// U_POS, U_NEG_MID, U_NEG_NEAR1, U_NEG_RIGHT, U_NEG_LEFT, W_NEG, W_POS_RIGHT or W_POS_MID.
    #[arg(long)]
    regime: String,
    #[arg(long, allow_negative_numbers = true)]
    t: f64,
    #[arg(long, default_value_t = 64)]
    samples: usize,
}

#[derive(Args, Debug)]
struct SelftestArgs {
    /// Comma-separated criterion numbers, 1 to 8.
    #[arg(long, value_delimiter = ',')]
    criteria: Option<Vec<u8>>,
    /// Relative error injected into the gamma-function factor.
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    gamma_perturbation: f64,
}

fn config(tol: &Tolerance) -> Result<Config, CliError> {
    let tol = match (tol.tol, std::env::var("PCF_TOL")) {
        (Some(t), _) => t,
        (None, Ok(env)) => env
            .trim()
            .parse()
            .map_err(|_| CliError::Usage(format!("PCF_TOL={env:?} is not a number")))?,
        (None, Err(_)) => DEFAULT_TOL,
    };
    if !(TOL_RANGE.0..=TOL_RANGE.1).contains(&tol) {
        return Err(CliError::Domain(format!(
            "tolerance {tol} outside [{}, {}]",
            g17(TOL_RANGE.0),
            g17(TOL_RANGE.1)
        )));
    }
    Ok(Config::with_tol(tol))
}

fn eval(args: &EvalArgs) -> Result<String, CliError> {
    let cfg = config(&args.tol)?;
    let req = EvalRequest {
        want_scaled: true,
        tol: cfg.tol,
        ..EvalRequest::new(args.func.func, args.a, args.x)
    };
    let out = evaluate_with(&req, &cfg)?;
    let value = if args.func.derivative {
        out.derivative.ok_or_else(|| CliError::Convergence("derivative unavailable".into()))?
    } else {
        out.value
    };
    let (v, log_scale) = scaled_fields(&value, args.scaled)?;
    let residual = g17(out.diagnostics.wronskian_residual);
    Ok(if args.scaled {
        format!("{v},{log_scale},{},{residual}\n", out.regime)
    } else {
        format!("{v},{},{residual}\n", out.regime)
    })
}

fn table_cmd(args: &TableArgs) -> Result<(), CliError> {
    let cfg = config(&args.tol)?;
    let spec = TableSpec {
        target: args.func,
        a: args.a,
        x: args.x,
        format: args.format,
        scaled: args.scaled,
    };
    let text = table::render(&spec, &cfg)?;
    match &args.output {
        Some(path) => fs::write(path, text)
            .map_err(|e| CliError::Usage(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn contour(args: &ContourArgs) -> Result<String, CliError> {
    let regime: Regime = args.regime.parse()?;
    let points = sample_contour(regime, args.t, args.samples)?;
    let worst = points.iter().map(|p| p.on_path_residual).fold(0.0, f64::max);
    if !(worst <= 1e-10) {
        return Err(PcfError::Trace { worst_residual: worst }.into());
    }
    let mut out = String::from("param,u,v,r,residual\n");
    for p in points {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            g17(p.param),
            g17(p.u),
            g17(p.v),
            g17(p.r),
            g17(p.on_path_residual)
        ));
    }
    Ok(out)
}

fn selftest_cmd(args: &SelftestArgs) -> Result<String, CliError> {
    let criteria = args.criteria.clone().unwrap_or_else(|| ALL_CRITERIA.to_vec());
    if let Some(bad) = criteria.iter().find(|c| !ALL_CRITERIA.contains(c)) {
        return Err(CliError::Usage(format!("unknown criterion {bad}")));
    }
    let cfg = Config {
        gamma_perturbation: args.gamma_perturbation,
        ..Config::default()
    };
    let report = selftest::run(&criteria, &cfg);
    let text = report.render();
    if report.passed() {
        Ok(text)
    } else {
        Err(CliError::SelftestFailed(text))
    }
}

fn run(cli: &Cli) -> Result<(), CliError> {
    let text = match &cli.command {
        Command::Eval(a) => eval(a)?,
        Command::Table(a) => return table_cmd(a),
        Command::Contour(a) => contour(a)?,
        Command::Selftest(a) => selftest_cmd(a)?,
    };
    print!("{text}");
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            if !e.use_stderr() {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let text = e.render().to_string();
            eprint!("{text}");
            if !text.contains("Usage:") {
                eprintln!("\n{}", Cli::command().render_usage());
            }
            return ExitCode::from(1);
        }
    };
    match run(&cli) {
        Ok(()) => {
            let _ = std::io::stdout().flush();
            ExitCode::SUCCESS
        }
        Err(e) => {
            match &e {
                CliError::SelftestFailed(report) => {
                    print!("{report}");
                    eprintln!("pcf: self-test failed");
                }
                other => eprintln!("pcf: {other}"),
            }
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
