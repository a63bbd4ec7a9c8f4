//! Command-line front end for `qmix-core`: run configurations, file formats,
//! images and the reproduction recipes.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
pub mod render;
pub mod repro;

pub use error::{CliError, Result};
