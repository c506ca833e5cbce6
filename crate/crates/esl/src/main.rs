//! Entry point: argument parsing, config loading, report rendering, and the
//! exit-code contract (0 success, 1 negative finding, 2 config error, 3
//! compute error).

use clap::{Args, Parser, Subcommand};
use esl::commands::{self, RunOutput};
use esl::config::RunConfig;
use esl::report::{canonical_json, envelope, render_csv};
use esl::{CliError, Outcome};
use std::path::PathBuf;
use std::time::Instant;

#[derive(Parser)]
#[command(
    name = "esl",
    version,
    about = "Numerical laboratory for an entropy functional equation: defect \
             measurement, family fitting, stability-bound verification, and \
             constructive reconstruction"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Measure symmetry, additivity and homogeneity defects of a candidate
    Defects(RunArgs),
    /// Fit one solution family to a candidate and report the residuals
    Fit(RunArgs),
    /// Measure defects, fit the declared family, and compare the fit residual
    /// against the stability bound
    Verify(RunArgs),
    /// Run the constructive steps: homogenize, skew, reconstruct, average,
    /// and the randomized property suite
    Proofchain(RunArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Defects(_) => "defects",
            Command::Fit(_) => "fit",
            Command::Verify(_) => "verify",
            Command::Proofchain(_) => "proofchain",
        }
    }

    fn args(&self) -> &RunArgs {
        match self {
            Command::Defects(a) | Command::Fit(a) | Command::Verify(a) | Command::Proofchain(a) => {
                a
            }
        }
    }
}

#[derive(Args)]
struct RunArgs {
    /// TOML configuration file
    #[arg(long)]
    config: PathBuf,

    /// Write the JSON report to this file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,

    /// Write per-sample residuals to this CSV file (defects and verify only)
    #[arg(long)]
    csv: Option<PathBuf>,

    /// Suppress the human-readable summary lines on stderr
    #[arg(long)]
    quiet: bool,
}

fn main() {
    let cli = Cli::parse();
    let code = match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("esl: {e}");
            e.exit_code()
        }
    };
    std::process::exit(code);
}

fn run(cli: &Cli) -> Result<i32, CliError> {
    let name = cli.command.name();
    let args = cli.command.args();
    let cfg = RunConfig::load(&args.config)?;
    let want_csv = args.csv.is_some();
    if want_csv && !matches!(name, "defects" | "verify") {
        return Err(CliError::Config(
            "--csv applies to the defects and verify commands only".to_owned(),
        ));
    }

    let started = Instant::now();
    let out: RunOutput = match name {
        "defects" => commands::cmd_defects(&cfg, want_csv)?,
        "fit" => commands::cmd_fit(&cfg)?,
        "verify" => commands::cmd_verify(&cfg, want_csv)?,
        _ => commands::cmd_proofchain(&cfg)?,
    };
    // Reports are byte-reproducible by default; wall time is echoed only on
    // request because it breaks reproducibility.
    let timing_ms = if cfg.report.include_timing {
        started.elapsed().as_millis().min(u128::from(u64::MAX)) as u64
    } else {
        0
    };

    let config_echo = serde_json::to_value(&cfg).map_err(CliError::compute)?;
    let text = canonical_json(&envelope(name, config_echo, out.results, timing_ms))?;
    match &args.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| {
            CliError::Compute(format!("cannot write report {}: {e}", path.display()))
        })?,
        None => print!("{text}"),
    }
    if let (Some(path), Some(rows)) = (&args.csv, &out.csv_rows) {
        std::fs::write(path, render_csv(rows)).map_err(|e| {
            CliError::Compute(format!("cannot write csv {}: {e}", path.display()))
        })?;
    }
    if !args.quiet {
        for line in &out.human {
            eprintln!("{line}");
        }
    }
    Ok(match out.outcome {
        Outcome::Success => 0,
        Outcome::Finding => 1,
    })
}
