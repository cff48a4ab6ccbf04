//! File formats and the `fermiflow` command-line front end.

pub mod cli;
mod commands;
pub mod error;
pub mod format;

pub use cli::run;
