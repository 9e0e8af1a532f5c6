//! Sweeps, file formats and the command-line front end built on
//! `coop-oam-core`.

pub mod cli;
pub mod config;
pub mod output;
pub mod sweep;
