//! Command-line front end for `standbyrel-core`: distribution literals,
//! empirical samples on disk, CSV and JSON output, and parallel simulation.

pub mod cli;
pub mod literal;
pub mod output;
pub mod parallel;

pub use standbyrel_core as core;
