use std::io::{self, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use krlab_cli::{config::output_dir, export_snapshot, list_fields, load_config, run, validate, CliError, Verdict};

/// Stability experiments for the continuity equation.
#[derive(Parser)]
#[command(name = "krlab", version)]
struct Cli {
    /// Print fits, constants and written files as well.
    #[arg(short, long, global = true)]
    verbose: bool,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the study described by a configuration file.
    Run {
        config: PathBuf,
        /// Output directory, overriding `[output] dir`.
        #[arg(short, long)]
        output: Option<PathBuf>,
        /// Override a configuration key, e.g. `--set k=4,8`.
        #[arg(long = "set", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Run the invariant suite.
    Validate {
        /// Smaller sample counts.
        #[arg(long)]
        quick: bool,
    },
    /// List the velocity catalog.
    ListFields,
    /// Write the closed-form oscillating density as `x,value` CSV.
    ExportSnapshot {
        #[arg(long)]
        field: String,
        #[arg(long)]
        k: u32,
        #[arg(long)]
        t: f64,
        #[arg(long)]
        cells: usize,
        /// Write to a file instead of standard output.
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

fn dispatch(cli: Cli) -> Result<Verdict, CliError> {
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match cli.command {
        Command::Run { config, output, overrides } => {
            let config = load_config(&config, &overrides)?;
            let dir = output_dir(&config, output);
            run(&config, &dir, cli.verbose, &mut out)
        }
        Command::Validate { quick } => validate(quick, &mut out),
        Command::ListFields => list_fields(&mut out).map(|_| Verdict::Pass),
        Command::ExportSnapshot { field, k, t, cells, output } => {
            match output {
                Some(path) => {
                    let mut buf = Vec::new();
                    export_snapshot(&field, k, t, cells, &mut buf)?;
                    std::fs::write(&path, buf).map_err(|source| CliError::Io { path, source })?;
                }
                None => export_snapshot(&field, k, t, cells, &mut out)?,
            }
            out.flush()?;
            Ok(Verdict::Pass)
        }
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(v) => ExitCode::from(v.exit_code() as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(1)
        }
    }
}
