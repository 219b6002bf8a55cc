//! Command-line front end: configuration files, commands and table output.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
