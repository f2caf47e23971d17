//! Testing consecutive non-overlapping blocks of one long series.

use ordsym::rng::derive_seed;
use ordsym::{run_test, Partition, TestConfig, TestReport};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockOutcome {
    pub index: usize,
    pub start: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub report: Option<TestReport>,
    /// Set when the block could not be tested (e.g. an unobserved group).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BlockSummary {
    pub block_size: usize,
    pub blocks: usize,
    pub dropped: usize,
    pub tested: usize,
    pub rejection_rate: f64,
    pub mean_p_value: f64,
    pub outcomes: Vec<BlockOutcome>,
}

/// Splits `series` into `⌊len / B⌋` blocks, drops the remainder and tests
/// each block. Block `k` uses null seed `derive_seed(seed, k, 0)`.
pub fn block_test(
    series: &[f64],
    block_size: usize,
    d: usize,
    partition: &Partition,
    config: &TestConfig,
) -> Result<BlockSummary> {
    if block_size < d + 1 {
        return Err(CliError::InvalidArgument(format!(
            "block size {block_size} must be at least d + 1 = {}",
            d + 1
        )));
    }
    if series.len() < block_size {
        return Err(ordsym::Error::SeriesTooShort {
            len: series.len(),
            needed: block_size,
        }
        .into());
    }
    let blocks = series.len() / block_size;
    let outcomes: Vec<BlockOutcome> = (0..blocks)
        .into_par_iter()
        .map(|k| {
            let start = k * block_size;
            let cfg = TestConfig {
                seed: derive_seed(config.seed, k as u64, 0),
                ..config.clone()
            };
            let res = run_test(&series[start..start + block_size], d, partition, &cfg);
            let (report, error) = match res {
                Ok(r) => (Some(r), None),
                Err(e) => (None, Some(e.to_string())),
            };
            BlockOutcome {
                index: k,
                start,
                report,
                error,
            }
        })
        .collect();
    let tested: Vec<&TestReport> = outcomes.iter().filter_map(|o| o.report.as_ref()).collect();
    let (rate, mean_p) = if tested.is_empty() {
        (f64::NAN, f64::NAN)
    } else {
        let m = tested.len() as f64;
        (
            tested.iter().filter(|r| r.reject).count() as f64 / m,
            tested.iter().map(|r| r.p_value).sum::<f64>() / m,
        )
    };
    Ok(BlockSummary {
        block_size,
        blocks,
        dropped: series.len() - blocks * block_size,
        tested: tested.len(),
        rejection_rate: rate,
        mean_p_value: mean_p,
        outcomes,
    })
}
