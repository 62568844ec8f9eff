//! Library surface of the CLI: the run-configuration schema and the
//! subcommand implementations, shared by the binary and the test suites.

pub mod commands;
pub mod config;
