//! Command-line front end: CSV ingestion, command dispatch and report
//! rendering for the `geoinar` library.

pub mod commands;
pub mod error;
pub mod input;
pub mod render;
pub mod report;

pub use commands::{execute, run, Cli, Command, Outcome};
pub use error::{CliError, Result};
pub use input::parse_count_csv;
pub use render::{render_report, sig6, Format};
pub use report::{AnalysisReport, ModelDiagnostics, RunConfig, SCHEMA_VERSION};
