//! Batch command-line front end: subcommands over CSV inputs with JSON
//! reports, and JSON-configured pipelines.

pub mod cli;
pub mod error;
pub mod json;
pub mod ops;
pub mod pipeline;
