//! Command implementations shared by the binary and the tests.

use std::io::Write;
use std::path::Path;

use ordsym::generators::{generate, power_experiment, PowerResult, ProcessSpec};
use ordsym::patterns::all_patterns;
use ordsym::{count_patterns, grouped_frequencies, run_test_detailed, TestReport};
use serde::Serialize;

use crate::blocks::{block_test, BlockSummary};
use crate::config::{RunConfig, SeriesSource};
use crate::error::{CliError, Result};
use crate::plotdata::write_column_csv;
use crate::reproduce::{run_experiment, Experiment, ExperimentReport, ReproduceOptions};

/// Report wrapper: the resolved settings next to the result.
#[derive(Debug, Serialize)]
pub struct Envelope<C: Serialize, R: Serialize> {
    pub tool: &'static str,
    pub version: &'static str,
    pub config: C,
    pub result: R,
}

impl<C: Serialize, R: Serialize> Envelope<C, R> {
    pub fn new(config: C, result: R) -> Self {
        Envelope {
            tool: "ordsym",
            version: env!("CARGO_PKG_VERSION"),
            config,
            result,
        }
    }

    pub fn to_json(&self) -> Result<String> {
        let mut s = serde_json::to_string_pretty(self)?;
        s.push('\n');
        Ok(s)
    }
}

/// Writes `text` to `out`, or stdout when unset.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, text).map_err(CliError::io(p.display().to_string())),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(text.as_bytes())
                .and_then(|_| stdout.flush())
                .map_err(CliError::io("<stdout>"))
        }
    }
}

pub fn test(cfg: &mut RunConfig, source: &SeriesSource, verbose: bool) -> Result<String> {
    cfg.validate()?;
    let series = cfg.load(source)?;
    let partition = cfg.partition.build(cfg.d)?;
    let mut tc = cfg.test_config()?;
    tc.include_eigenvectors = verbose;
    let run = run_test_detailed(&series, cfg.d, &partition, &tc)?;
    Envelope::new(&*cfg, run.report).to_json()
}

#[derive(Debug, Serialize)]
pub struct NullResult {
    pub report: TestReport,
    pub quantiles: Vec<(f64, f64)>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub draws_file: Option<String>,
}

/// Runs the pipeline and exposes the simulated null law; draws go to
/// `draws_out` as CSV when given.
pub fn simulate_null(
    cfg: &mut RunConfig,
    source: &SeriesSource,
    draws_out: Option<&Path>,
) -> Result<String> {
    cfg.validate()?;
    let series = cfg.load(source)?;
    let partition = cfg.partition.build(cfg.d)?;
    let run = run_test_detailed(&series, cfg.d, &partition, &cfg.test_config()?)?;
    let quantiles = [0.01, 0.05, 0.1, 0.25, 0.5, 0.75, 0.9, 0.95, 0.99]
        .into_iter()
        .map(|q| Ok((q, ordsym::quantile(&run.null, q)?)))
        .collect::<Result<Vec<_>>>()?;
    if let Some(p) = draws_out {
        let file = std::fs::File::create(p).map_err(CliError::io(p.display().to_string()))?;
        write_column_csv(file, "draw", &run.null.draws)?;
    }
    let result = NullResult {
        report: run.report,
        quantiles,
        draws_file: draws_out
            .and_then(|p| p.file_name())
            .map(|f| f.to_string_lossy().into_owned()),
    };
    Envelope::new(&*cfg, result).to_json()
}

pub fn block(cfg: &mut RunConfig, source: &SeriesSource) -> Result<String> {
    cfg.validate()?;
    let block_size = cfg
        .block_size
        .ok_or_else(|| CliError::InvalidArgument("--block-size is required".into()))?;
    let series = cfg.load(source)?;
    let partition = cfg.partition.build(cfg.d)?;
    let summary: BlockSummary =
        block_test(&series, block_size, cfg.d, &partition, &cfg.test_config()?)?;
    Envelope::new(&*cfg, summary).to_json()
}

pub fn power(
    cfg: &mut RunConfig,
    spec: &ProcessSpec,
    n: usize,
    replicates: usize,
) -> Result<String> {
    cfg.validate()?;
    cfg.process = Some(spec.to_string());
    cfg.n = Some(n);
    cfg.replicates = Some(replicates);
    let partition = cfg.partition.build(cfg.d)?;
    let res: PowerResult = power_experiment(spec, &partition, n, replicates, &cfg.test_config()?)?;
    Envelope::new(&*cfg, res).to_json()
}

/// CSV with a `value` column.
pub fn generate_csv(spec: &ProcessSpec, n: usize, seed: u64) -> Result<String> {
    let x = generate(spec, n, seed)?;
    let mut buf = Vec::new();
    write_column_csv(&mut buf, "value", &x)?;
    Ok(String::from_utf8(buf).expect("CSV output is UTF-8"))
}

#[derive(Debug, Serialize)]
pub struct PatternEntry {
    pub pattern: String,
    pub id: usize,
    pub count: u64,
    pub frequency: f64,
    pub group: usize,
    pub symmetrized: f64,
}

#[derive(Debug, Serialize)]
pub struct PatternTable {
    pub n_windows: u64,
    pub patterns: Vec<PatternEntry>,
    pub group_probabilities: Vec<f64>,
}

pub fn patterns(cfg: &mut RunConfig, source: &SeriesSource) -> Result<String> {
    let series = cfg.load(source)?;
    let partition = cfg.partition.build(cfg.d)?;
    let counts = count_patterns(&series, cfg.d)?;
    let grouped = grouped_frequencies(&counts, &partition)?;
    let freqs = counts.frequencies();
    let entries = all_patterns(cfg.d)?
        .iter()
        .enumerate()
        .map(|(id, p)| PatternEntry {
            pattern: p.to_string(),
            id,
            count: counts.counts()[id],
            frequency: freqs[id],
            group: partition.group_of(id as u32),
            symmetrized: grouped.per_pattern_symmetrized[id],
        })
        .collect();
    let table = PatternTable {
        n_windows: counts.n(),
        patterns: entries,
        group_probabilities: grouped.group_probs,
    };
    Envelope::new(&*cfg, table).to_json()
}

#[derive(Debug, Serialize)]
pub struct ReproduceConfig {
    pub command: &'static str,
    pub experiment: Experiment,
    pub seed: u64,
    pub replicates: usize,
    pub alpha: f64,
    pub mc_samples: usize,
    pub kernel: ordsym::HacKernel,
    pub bandwidth: ordsym::Bandwidth,
    pub demean: bool,
}

pub fn reproduce(experiment: Experiment, opts: &ReproduceOptions) -> Result<String> {
    let report: ExperimentReport = run_experiment(experiment, opts)?;
    let cfg = ReproduceConfig {
        command: "reproduce",
        experiment,
        seed: opts.test.seed,
        replicates: opts.replicates,
        alpha: opts.test.alpha,
        mc_samples: opts.test.mc_samples,
        kernel: opts.test.kernel,
        bandwidth: opts.test.bandwidth,
        demean: opts.test.demean,
    };
    Envelope::new(cfg, report).to_json()
}
