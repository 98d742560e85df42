//! Evaluation harness behind the `chainwatch` command.

pub mod cli;
pub mod detect;
pub mod error;
pub mod grid;
pub mod pipeline;

pub use error::{HarnessError, Result};
