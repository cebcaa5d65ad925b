//! `relevance`: command-line front end. Every run prints one JSON report
//! and exits with 0 (yes / success), 1 (no), 2 (indeterminate or outside
//! the promise), 64 (usage error), 65 (cap refusal) or 70 (internal check
//! failure).

mod args;
mod commands;
mod query;

use std::io::Write;
use std::process::ExitCode;

use clap::Parser;
use serde_json::{json, Map, Value};

use args::Cli;
use relevance_core::Error;

pub const EXIT_YES: u8 = 0;
pub const EXIT_NO: u8 = 1;
pub const EXIT_UNDECIDED: u8 = 2;
pub const EXIT_USAGE: u8 = 64;
pub const EXIT_CAP: u8 = 65;
pub const EXIT_INTERNAL: u8 = 70;

/// Failure of a command.
pub struct Failure {
    pub code: u8,
    pub reason: &'static str,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match &e {
            Error::CapExceeded { .. } | Error::Intractable(_) => EXIT_CAP,
            Error::Construction(_) => EXIT_INTERNAL,
            _ => EXIT_USAGE,
        };
        Failure {
            code,
            reason: e.reason(),
            message: e.to_string(),
        }
    }
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            code: EXIT_USAGE,
            reason: "usage",
            message: message.into(),
        }
    }
}

/// What a command hands back: echoed parameters, result and exit code.
pub struct Outcome {
    pub code: u8,
    pub result: Value,
}

fn emit(cli_output: Option<&std::path::Path>, report: &Value) -> std::io::Result<()> {
    let mut text = serde_json::to_string_pretty(report).expect("reports serialise");
    text.push('\n');
    match cli_output {
        Some(path) => std::fs::write(path, text),
        None => std::io::stdout().lock().write_all(text.as_bytes()),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                let _ = e.print();
                return ExitCode::SUCCESS;
            }
            let _ = e.print();
            let report = json!({
                "command": Value::Null,
                "error": { "reason": "usage", "message": e.kind().to_string() },
                "exit_code": EXIT_USAGE,
            });
            let _ = emit(None, &report);
            return ExitCode::from(EXIT_USAGE);
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("--threads must be positive");
            return ExitCode::from(EXIT_USAGE);
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
            eprintln!("cannot configure the thread pool: {e}");
        }
    }
    let name = commands::name(&cli.command);
    let mut params = Map::new();
    let (code, body) = match commands::run(&cli, &mut params) {
        Ok(outcome) => (outcome.code, ("result", outcome.result)),
        Err(f) => {
            eprintln!("error: {}", f.message);
            (f.code, ("error", json!({ "reason": f.reason, "message": f.message })))
        }
    };
    let mut report = Map::new();
    report.insert("command".into(), json!(name));
    report.insert("params".into(), Value::Object(params));
    report.insert(body.0.into(), body.1);
    report.insert("exit_code".into(), json!(code));
    if let Err(e) = emit(cli.output.as_deref(), &Value::Object(report)) {
        eprintln!("cannot write the report: {e}");
        return ExitCode::from(EXIT_USAGE);
    }
    ExitCode::from(code)
}
