//! Batch front end for the Muskat interface simulator: configuration
//! parsing, run orchestration, structured output and plot emission.

pub mod battery;
pub mod config;
pub mod output;
pub mod plot;
