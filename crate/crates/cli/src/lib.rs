//! Library side of the `frontsys` command: config parsing, commands, artifacts.

pub mod commands;
pub mod config;
pub mod output;
