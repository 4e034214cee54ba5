//! Command-line front end for botlint: single-project checks, corpus
//! tables, metrics export and two-corpus comparison.

pub mod commands;
pub mod compare;
pub mod corpus;
pub mod stats;

pub use commands::{run, Cli};
