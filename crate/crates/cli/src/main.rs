use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use glm_cli::{
    cmd_dividend, cmd_fx_check, cmd_price_option, cmd_simulate, cmd_verify, load_model, load_spec,
    option_csv, parse_grid, path_csv, premium_csv, PriceMethod, SpecError, DEFAULT_PATHS, DEFAULT_SEED,
};
use glm_core::verify::VerifyReport;

#[derive(Parser)]
#[command(name = "glm", version, about = "Premiums, paths and option prices for Levy-driven pricing models")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// JSON spec file.
    #[arg(long)]
    spec: PathBuf,
    /// Output file (or directory for `simulate`); stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct Mc {
    #[arg(long, default_value_t = DEFAULT_SEED)]
    seed: u64,
    /// Number of Monte Carlo paths.
    #[arg(long, default_value_t = DEFAULT_PATHS)]
    n: usize,
}

#[derive(Clone, Copy, ValueEnum)]
enum Method {
    Mc,
    Exact,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate R and R~ over a (lambda, sigma) grid.
    Premium {
        #[command(flatten)]
        io: Common,
        /// Grid `a:b:step` used for both lambda and sigma.
        #[arg(long, default_value = "0.1:1.0:0.1")]
        grid: String,
        #[arg(long)]
        lambda_grid: Option<String>,
        #[arg(long)]
        sigma_grid: Option<String>,
    },
    /// Write sample driver paths and check that `pi_T S_T` averages to `S_0`.
    Simulate {
        #[command(flatten)]
        io: Common,
        #[command(flatten)]
        mc: Mc,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
        #[arg(long, default_value_t = 100)]
        steps: usize,
        /// Number of paths written to disk.
        #[arg(long, default_value_t = 5)]
        paths: usize,
    },
    /// Price European calls.
    PriceOption {
        #[command(flatten)]
        io: Common,
        #[command(flatten)]
        mc: Mc,
        #[arg(long, value_delimiter = ',', required = true)]
        strike: Vec<f64>,
        #[arg(long, value_delimiter = ',', required = true)]
        expiry: Vec<f64>,
        #[arg(long, value_enum, default_value_t = Method::Mc)]
        method: Method,
    },
    /// Exchange-rate premiums in both directions.
    FxCheck {
        #[command(flatten)]
        io: Common,
        #[command(flatten)]
        mc: Mc,
        #[arg(long, default_value_t = 1.0)]
        horizon: f64,
    },
    /// Gordon valuation and a simulated dividend stream.
    Dividend {
        #[command(flatten)]
        io: Common,
        #[command(flatten)]
        mc: Mc,
        /// Time cells per simulated path.
        #[arg(long, default_value_t = 64)]
        cells: usize,
    },
    /// Run the full invariant suite and emit a JSON verdict.
    Verify {
        #[command(flatten)]
        io: Common,
        #[command(flatten)]
        mc: Mc,
    },
}

/// Exit status for a finished run.
enum Outcome {
    Pass,
    Fail,
}

fn write_out(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn write_json<T: Serialize>(out: Option<&Path>, value: &T) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    write_out(out, &text)
}

fn verdict(passed: bool) -> Outcome {
    if passed {
        Outcome::Pass
    } else {
        Outcome::Fail
    }
}

fn run(cli: Cli) -> Result<Outcome> {
    match cli.command {
        Command::Premium {
            io,
            grid,
            lambda_grid,
            sigma_grid,
        } => {
            let model = load_model(&io.spec)?;
            let lambdas = parse_grid(lambda_grid.as_deref().unwrap_or(&grid))?;
            let sigmas = parse_grid(sigma_grid.as_deref().unwrap_or(&grid))?;
            write_out(io.out.as_deref(), &premium_csv(&model, &lambdas, &sigmas))?;
            Ok(Outcome::Pass)
        }
        Command::Simulate {
            io,
            mc,
            horizon,
            steps,
            paths,
        } => {
            let spec = load_spec(&io.spec)?;
            eprintln!("seed: {}", mc.seed);
            let result = cmd_simulate(&spec, horizon, steps, mc.n, paths, mc.seed)?;
            match io.out.as_deref() {
                Some(dir) => {
                    std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                    for (i, p) in result.paths.iter().enumerate() {
                        write_out(Some(&dir.join(format!("path_{i}.csv"))), &path_csv(p))?;
                    }
                    write_json(Some(&dir.join("summary.json")), &result.summary)?;
                }
                None => write_json(None, &result.summary)?,
            }
            if !result.passed {
                eprintln!(
                    "E[pi_T S_T] = {} +- {} is not consistent with S_0 = {}",
                    result.summary.estimate, result.summary.stderr, result.target
                );
            }
            Ok(verdict(result.passed))
        }
        Command::PriceOption {
            io,
            mc,
            strike,
            expiry,
            method,
        } => {
            let spec = load_spec(&io.spec)?;
            let method = match method {
                Method::Mc => {
                    eprintln!("seed: {}", mc.seed);
                    PriceMethod::Mc
                }
                Method::Exact => PriceMethod::Exact,
            };
            let rows = cmd_price_option(&spec, &strike, &expiry, method, mc.n, mc.seed)?;
            write_out(io.out.as_deref(), &option_csv(&rows))?;
            Ok(Outcome::Pass)
        }
        Command::FxCheck { io, mc, horizon } => {
            let spec = load_spec(&io.spec)?;
            eprintln!("seed: {}", mc.seed);
            let report = cmd_fx_check(&spec, horizon, mc.n, mc.seed)?;
            write_json(io.out.as_deref(), &report)?;
            Ok(verdict(report.passed))
        }
        Command::Dividend { io, mc, cells } => {
            let spec = load_spec(&io.spec)?;
            eprintln!("seed: {}", mc.seed);
            let report = cmd_dividend(&spec, cells, mc.n, mc.seed)?;
            write_json(io.out.as_deref(), &report)?;
            Ok(verdict(report.passed))
        }
        Command::Verify { io, mc } => {
            eprintln!("seed: {}", mc.seed);
            let report = match load_spec(&io.spec) {
                Ok(spec) => cmd_verify(&spec, mc.n, mc.seed)?,
                Err(SpecError::Invalid(e)) => VerifyReport::rejected(&e),
                Err(e) => return Err(e.into()),
            };
            write_json(io.out.as_deref(), &report)?;
            Ok(verdict(report.passed))
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(Outcome::Pass) => ExitCode::SUCCESS,
        Ok(Outcome::Fail) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
