//! Experiment harness: subcommands, result records and the acceptance suites.

pub mod acceptance;
pub mod commands;
pub mod config;
pub mod output;
