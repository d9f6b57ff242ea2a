//! Command-line surface of `fwlink`: file formats, the experiment pipeline
//! and report rendering.

pub mod commands;
pub mod io;
pub mod pipeline;
pub mod report;

pub use commands::{run, Cli};
