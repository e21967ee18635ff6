use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use coiso_cli::{run_file, Format, RunOptions, EXIT_RUNTIME};

#[derive(Parser)]
#[command(name = "coiso-kit", version, about = "Run coisotropic-deformation scenario files")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse and run a scenario, then print or write the report.
    Run {
        file: PathBuf,
        /// Jet truncation order for inverses and convergence tables.
        #[arg(long, default_value_t = 6)]
        truncation: u32,
        /// Grid points per base axis for numeric checks.
        #[arg(long, default_value_t = 32, value_parser = clap::value_parser!(u64).range(1..))]
        samples: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, value_enum, default_value_t = Format::Text)]
        format: Format,
        /// Write the report here instead of stdout.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Treat inconclusive checks as failures.
        #[arg(long)]
        strict: bool,
        /// Include per-check wall-clock times (makes reports non-reproducible).
        #[arg(long)]
        timing: bool,
    },
}

fn main() -> ExitCode {
    let Command::Run {
        file,
        truncation,
        samples,
        seed,
        format,
        out,
        strict,
        timing,
    } = Cli::parse().command;
    let opts = RunOptions {
        truncation,
        samples: samples as usize,
        seed,
        strict,
        timing,
        ..RunOptions::default()
    };
    let report = match run_file(&file, &opts) {
        Ok(r) => r,
        Err(d) => {
            eprintln!("error: {}", d.message);
            return ExitCode::from(d.exit_code as u8);
        }
    };
    let text = report.render(format);
    let mut code = report.summary.exit_code;
    match &out {
        Some(path) => {
            if let Err(e) = std::fs::write(path, &text) {
                eprintln!("error: cannot write {}: {e}", path.display());
                code = EXIT_RUNTIME;
            }
        }
        None => {
            let _ = std::io::stdout().write_all(text.as_bytes());
        }
    }
    ExitCode::from(code as u8)
}
