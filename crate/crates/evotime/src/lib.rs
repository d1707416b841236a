//! File formats, experiment matrix and command-line interface for
//! `evotime-core`.

pub mod cli;
pub mod experiment;
pub mod output;
pub mod problem;
