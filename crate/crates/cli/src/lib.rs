//! The `roundtrip` command-line client.
//!
//! Every subcommand maps to one [`Api`] call, run either against a server
//! ([`HttpClient`]) or in process on a locally opened store
//! ([`roundtrip_service::Service`]). Exit codes:
//!
//! | code | meaning |
//! |------|---------|
//! | 0 | success |
//! | 1 | usage error or local I/O failure |
//! | 2 | input file unreadable |
//! | 3 | API error (code printed) |
//! | 4 | commit message required: the label matched an existing sketch |
//! | 5 | malformed rectangle |

mod args;
mod client;
mod commands;
pub mod refs;

use std::io::Write;
use std::path::PathBuf;

use roundtrip_core::Sketchbook;
use roundtrip_service::{Api, ApiError, Service};

pub use args::{Cli, Command, MetadataArgs, OutputFormat};
pub use client::HttpClient;
pub use commands::execute;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("cannot read {}: {reason}", path.display())]
    Unreadable { path: PathBuf, reason: String },

    #[error("{}: {}", .0.code, .0.message)]
    Api(ApiError),

    #[error("malformed rectangle {0:?}: expected x0,y0,x1,y1 with 0 <= x0 < x1 <= 1 and 0 <= y0 < y1 <= 1")]
    MalformedRect(String),

    #[error("{0}")]
    InvalidArgument(String),

    #[error("cannot write output: {0}")]
    Output(std::io::Error),
}

impl From<ApiError> for CliError {
    fn from(e: ApiError) -> Self {
        CliError::Api(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Output(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Unreadable { .. } => 2,
            CliError::Api(e) if e.code == "commit-message-required" => 4,
            CliError::Api(_) | CliError::InvalidArgument(_) => 3,
            CliError::MalformedRect(_) => 5,
            CliError::Output(_) => 1,
        }
    }

    pub fn code(&self) -> &str {
        match self {
            CliError::Unreadable { .. } => "file-unreadable",
            CliError::Api(e) => &e.code,
            CliError::MalformedRect(_) => "malformed-rect",
            CliError::InvalidArgument(_) => "invalid-argument",
            CliError::Output(_) => "output-failure",
        }
    }
}

/// Reports `error` on `err` in the chosen format and returns the exit code.
pub fn report(error: &CliError, format: OutputFormat, err: &mut dyn Write) -> i32 {
    let _ = match format {
        OutputFormat::Human => match error {
            CliError::Api(e) => writeln!(err, "error: {}: {}", e.code, e.message),
            other => writeln!(err, "error: {}: {other}", other.code()),
        },
        OutputFormat::Json => {
            let body = match error {
                CliError::Api(e) => serde_json::to_value(e).expect("serializable"),
                other => serde_json::json!({"code": other.code(), "message": other.to_string()}),
            };
            writeln!(err, "{}", serde_json::json!({ "error": body }))
        }
    };
    error.exit_code()
}

/// Runs a parsed command line against `api` and returns the exit code.
pub fn run_with(cli: &Cli, api: &dyn Api, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    match execute(&cli.command, cli.output_format, api, out) {
        Ok(()) => 0,
        Err(e) => report(&e, cli.output_format, err),
    }
}

/// Full entry point: chooses the backend from `--server`/`--store`.
pub fn run(cli: &Cli, out: &mut dyn Write, err: &mut dyn Write) -> i32 {
    if let Command::Serve { addr, ui_dir } = &cli.command {
        return commands::serve(cli, addr.as_deref(), ui_dir.clone(), out, err);
    }
    match cli.server_url() {
        Some(url) => run_with(cli, &HttpClient::new(url), out, err),
        None => match Sketchbook::open(&cli.store) {
            Ok(book) => run_with(cli, &Service::new(book), out, err),
            Err(e) => report(&CliError::Api(e.into()), cli.output_format, err),
        },
    }
}
