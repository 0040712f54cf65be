//! Command-line front end for the `specdens` library.
//!
//! Series are written as CSV with a header row; structured results as JSON
//! carrying `schema_version`. Output files are written to a temporary file
//! and renamed into place.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod args;
pub mod commands;
pub mod error;
pub mod io;

pub use error::{Category, CliError, CliResult};
pub use io::{ingest_csv, parse_response};

/// Version of the JSON documents written by the CLI.
pub const SCHEMA_VERSION: u32 = 1;
