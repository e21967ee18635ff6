//! Scenario files for `coiso-kit`: parsing, evaluation, checks and reports.

pub mod ast;
pub mod error;
pub mod eval;
pub mod lexer;
pub mod parser;
pub mod report;
pub mod runner;

use std::path::Path;

pub use ast::{ChartDecl, Check, Expr, Scenario, Statement};
pub use error::{EvalError, ParseError};
pub use parser::parse_scenario;
pub use report::{CheckReport, Format, RunReport, Status};
pub use runner::{run, RunOptions};

/// Exit code for a scenario that does not parse.
pub const EXIT_PARSE: i32 = 2;
/// Exit code for runtime errors, including unreadable inputs and outputs.
pub const EXIT_RUNTIME: i32 = 3;

/// A scenario that could not be run at all.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Diagnostic {
    pub message: String,
    pub exit_code: i32,
}

/// Reads, parses and runs a scenario file. Relative pencil paths resolve
/// against the file's directory.
pub fn run_file(path: &Path, opts: &RunOptions) -> Result<RunReport, Diagnostic> {
    let text = std::fs::read_to_string(path).map_err(|e| Diagnostic {
        message: format!("cannot read {}: {e}", path.display()),
        exit_code: EXIT_RUNTIME,
    })?;
    let scenario = parse_scenario(&text).map_err(|e| Diagnostic {
        message: format!("{}: {e}", path.display()),
        exit_code: EXIT_PARSE,
    })?;
    let mut opts = opts.clone();
    opts.base_dir = path.parent().map(Path::to_path_buf).unwrap_or_default();
    opts.scenario_name = path
        .file_name()
        .map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned());
    Ok(run(&scenario, &opts))
}
