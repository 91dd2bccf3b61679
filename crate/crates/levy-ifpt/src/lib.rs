//! Command-line front end, file formats and parallel Monte Carlo drivers for
//! [`levy_ifpt_core`].

pub mod cli;
pub mod config;
pub mod error;
pub mod output;
pub mod parallel;

pub use error::CliError;
pub use levy_ifpt_core as core;
