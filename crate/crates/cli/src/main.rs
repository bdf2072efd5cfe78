use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use padic_limits_cli::report::{self, Report};
use padic_limits_cli::scenario::Scenario;

#[derive(Parser)]
#[command(
    name = "padic-limits",
    version,
    about = "Level-wise checks of p-adic projective limits"
)]
struct Cli {
    /// Scenario file (TOML); defaults to p = 2, M = Z_2, depth 3.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Overrides the scenario seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Writes the report here instead of standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    format: Format,
    /// Prints per-check wall time to standard error.
    #[arg(long, global = true)]
    timings: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum Format {
    Json,
    Csv,
}

#[derive(Subcommand)]
enum Command {
    /// Runs every invariant check; exits 1 on a violation.
    Verify,
    /// Group orders, divisibility and weak distances of permutation towers.
    DiffTower,
    /// Loop classes of bounded support and their wedge table.
    LoopTable,
    /// Completion of the geometric partial-sum fixture.
    Complete,
    /// Rank and divisibility comparisons.
    Report,
}

fn emit(report: &Report, cli: &Cli) -> Result<(), String> {
    let text = match cli.format {
        Format::Json => report.to_json(),
        Format::Csv => report::to_csv(report),
    };
    match &cli.out {
        Some(path) => {
            std::fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let scenario = match &cli.config {
        Some(path) => Scenario::load(path),
        None => Ok(Scenario::default()),
    };
    let setup = scenario.and_then(|mut s| {
        if let Some(seed) = cli.seed {
            s.seed = seed;
        }
        s.setup()
    });
    let setup = match setup {
        Ok(s) => s,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    let result = match cli.command {
        Command::Verify => {
            let (report, timings) = report::run_verify(&setup);
            if cli.timings {
                for (name, d) in &timings {
                    eprintln!("{name}: {:.3}s", d.as_secs_f64());
                }
            }
            Ok(report)
        }
        Command::DiffTower => report::diff_tower(&setup),
        Command::LoopTable => report::loop_table(&setup),
        Command::Complete => report::complete_demo(&setup),
        Command::Report => report::summary(&setup),
    };
    let report = match result {
        Ok(r) => r,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(2);
        }
    };
    if let Err(e) = emit(&report, &cli) {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    if report::report_passed(&report) {
        ExitCode::SUCCESS
    } else {
        for check in report.body["checks"].as_array().into_iter().flatten() {
            if check["status"] == "fail" {
                eprintln!(
                    "violation in {}: {}",
                    check["name"].as_str().unwrap_or("?"),
                    check["violation"]["law"].as_str().unwrap_or("?")
                );
            }
        }
        ExitCode::from(1)
    }
}
