//! Library side of the `lcmanifold` command-line tool: configuration,
//! the five commands, and CSV/JSON emission.

// Negated comparisons are used so that NaN fails validation.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod commands;
pub mod config;
mod error;
pub mod output;
pub mod verify;

pub use error::CliError;
