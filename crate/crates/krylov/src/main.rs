use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use krylov::config::RunConfig;
use krylov::report::to_json;
use krylov::{run_cone_check, run_solve, run_verify, thread_count, CliError, VerifyOverrides};

#[derive(Parser)]
#[command(name = "krylov", version, about = "Krylov-type Hessian quotient equations on the flat torus")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the seeded property suites and print a JSON report.
    Verify {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[arg(long)]
        trials: Option<u64>,
    },
    /// Check the cone condition of χ_0 against the coefficients.
    ConeCheck {
        #[arg(long)]
        config: PathBuf,
    },
    /// Solve by continuation and write report.json and CSV fields to `--out`.
    Solve {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn run(cli: Cli) -> Result<i32, CliError> {
    let threads = thread_count()?;
    if threads > 1 {
        eprintln!("note: {threads} threads requested; computation runs on one thread");
    }
    match cli.command {
        Command::Verify { config, seed, trials } => {
            let outcome = run_verify(&RunConfig::from_path(&config)?, VerifyOverrides { seed, trials })?;
            print!("{}", to_json(&outcome.report));
            Ok(outcome.exit_code)
        }
        Command::ConeCheck { config } => {
            let outcome = run_cone_check(&RunConfig::from_path(&config)?)?;
            print!("{}", to_json(&outcome.report));
            Ok(outcome.exit_code)
        }
        Command::Solve { config, out } => {
            let outcome = run_solve(&RunConfig::from_path(&config)?, &out)?;
            let r = &outcome.report;
            let show = |x: Option<f64>| x.map_or("n/a".to_string(), |v| format!("{v:e}"));
            println!("converged: {}", r.converged);
            if let Some(e) = &r.error {
                println!("error: {e}");
            }
            println!("a: {:e}", r.a);
            println!("residual_linf: {}", show(r.residual_linf));
            println!("residual_l2: {}", show(r.residual_l2));
            println!("min_cone_margin: {}", show(r.min_cone_margin));
            println!("report: {}", out.join(krylov::REPORT_FILE).display());
            Ok(outcome.exit_code)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
