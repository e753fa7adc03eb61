//! IO, file formats, and orchestration for the sequential discovery
//! toolkit; the numerics live in `seqlab-core`.

pub mod artifact;
pub mod cli;
pub mod error;
pub mod ingest;
pub mod report;
pub mod runner;

pub use error::{CliError, CliResult};

/// Parses arguments, dispatches, and maps errors to exit codes
/// (0 success, 2 configuration, 3 nonconvergence).
pub fn main_entry() -> i32 {
    let parsed = <cli::Cli as clap::Parser>::parse();
    let json_errors = parsed.json_errors;
    match cli::run(parsed) {
        Ok(()) => 0,
        Err(err) => {
            if json_errors {
                eprintln!(
                    "{}",
                    serde_json::json!({"error": err.kind(), "message": err.message()})
                );
            } else {
                eprintln!("error: {}", err.message());
            }
            err.exit_code()
        }
    }
}
