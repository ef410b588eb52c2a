//! Library surface of the command-line harness; the binary is a thin
//! argument-parsing wrapper so that tests can drive the commands
//! directly.

pub mod commands;
pub mod config;
pub mod gen;
