//! Library half of the `ordsym` command-line tool: CSV ingestion,
//! transforms, block-wise testing, experiment reproduction and report
//! assembly.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod blocks;
pub mod commands;
pub mod config;
pub mod error;
pub mod ingest;
pub mod plotdata;
pub mod reproduce;

pub use blocks::{block_test, BlockSummary};
pub use config::{PartitionSelector, RunConfig, SeriesSource};
pub use error::{CliError, Result};
pub use ingest::{diff, ingest_csv, log_returns, parse_csv, ColumnSelector, Transform};
pub use reproduce::{run_experiment, Experiment, ReproduceOptions};
