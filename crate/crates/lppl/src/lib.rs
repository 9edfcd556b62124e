//! File formats and the `lppl` command-line driver on top of `lppl-core`.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod commands;
pub mod config;
pub mod error;
pub mod formats;
pub mod report;

pub use error::{Error, Result};
