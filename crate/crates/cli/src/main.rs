use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ordsym::generators::ProcessSpec;
use ordsym::{Bandwidth, HacKernel};
use ordsym_cli::commands::{self, emit};
use ordsym_cli::{
    CliError, ColumnSelector, Experiment, PartitionSelector, ReproduceOptions, RunConfig,
    SeriesSource, Transform,
};

/// Ordinal-pattern symmetry tests for stationary time series.
#[derive(Parser)]
#[command(name = "ordsym", version)]
struct Cli {
    /// Worker threads (results do not depend on this)
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Test one series
    Test {
        #[command(flatten)]
        common: CommonArgs,
        /// Include eigenvectors in the report
        #[arg(long)]
        verbose: bool,
    },
    /// Test consecutive non-overlapping blocks
    BlockTest {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long)]
        block_size: usize,
    },
    /// Simulate the null law for a series
    SimulateNull {
        #[command(flatten)]
        common: CommonArgs,
        /// CSV file for the raw draws
        #[arg(long)]
        draws: Option<PathBuf>,
    },
    /// Rejection rate over replicated synthetic series
    Power {
        #[command(flatten)]
        common: CommonArgs,
        #[arg(long, default_value_t = 1000)]
        replicates: usize,
    },
    /// Write a synthetic series as CSV
    Generate {
        #[arg(long)]
        process: ProcessSpec,
        #[arg(long, default_value_t = 1000)]
        n: usize,
        #[arg(long, env = "ORDSYM_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pattern counts and frequencies
    Patterns {
        #[command(flatten)]
        common: CommonArgs,
    },
    /// Rerun a simulation study
    Reproduce {
        /// settingA, settingB, settingC, settingD or powerTable
        experiment: String,
        #[arg(long, env = "ORDSYM_SEED", default_value_t = 42)]
        seed: u64,
        #[arg(long)]
        replicates: Option<usize>,
        #[arg(long, default_value_t = 2000)]
        mc_samples: usize,
        #[arg(long, default_value_t = 0.05)]
        alpha: f64,
        #[arg(long, default_value = "bartlett")]
        kernel: HacKernel,
        #[arg(long, default_value = "auto")]
        bandwidth: Bandwidth,
        /// Use raw rather than demeaned indicators for the long-run covariance
        #[arg(long)]
        raw_indicators: bool,
        /// Directory for histogram and density CSV files
        #[arg(long)]
        data_dir: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CommonArgs {
    /// CSV file, or - for stdin
    #[arg(long, conflicts_with = "process", required_unless_present = "process")]
    input: Option<String>,
    /// Synthetic process, e.g. "ma1(theta=0.5,innov=gaussian)"
    #[arg(long)]
    process: Option<ProcessSpec>,
    /// Series length for --process
    #[arg(long, default_value_t = 1000)]
    n: usize,
    /// Column name or 0-based index
    #[arg(long)]
    column: Option<ColumnSelector>,
    #[arg(long, default_value_t = 3)]
    d: usize,
    /// reversal, reflection, gaussian or file:<path>
    #[arg(long, default_value = "reversal")]
    partition: PartitionSelector,
    /// Turn patterns missing from a partition file into singleton groups
    #[arg(long)]
    complete_singletons: bool,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    #[arg(long, default_value_t = 20000)]
    mc_samples: usize,
    #[arg(long, default_value = "bartlett")]
    kernel: HacKernel,
    /// Lag-window bandwidth, or auto for ceil(n^(1/3))
    #[arg(long, default_value = "auto")]
    bandwidth: String,
    /// Use raw rather than demeaned indicators for the long-run covariance
    #[arg(long)]
    raw_indicators: bool,
    #[arg(long, default_value = "none")]
    transform: Transform,
    #[arg(long, env = "ORDSYM_SEED", default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

impl CommonArgs {
    fn resolve(&self, command: &str) -> (RunConfig, SeriesSource) {
        let mut cfg = RunConfig::new(command);
        cfg.d = self.d;
        cfg.partition = self
            .partition
            .clone()
            .with_completion(self.complete_singletons);
        cfg.alpha = self.alpha;
        cfg.mc_samples = self.mc_samples;
        cfg.kernel = self.kernel;
        cfg.bandwidth = self.bandwidth.clone();
        cfg.demean = !self.raw_indicators;
        cfg.transform = self.transform;
        cfg.seed = self.seed;
        let source = match (&self.input, &self.process) {
            (Some(path), _) => SeriesSource::File {
                path: path.clone(),
                column: self.column.clone(),
            },
            (None, Some(spec)) => SeriesSource::Process {
                spec: spec.clone(),
                n: self.n,
            },
            (None, None) => unreachable!("clap requires --input or --process"),
        };
        (cfg, source)
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    if let Some(t) = cli.threads {
        if t == 0 {
            return Err(CliError::InvalidArgument("--threads must be >= 1".into()));
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .map_err(|e| CliError::InvalidArgument(e.to_string()))?;
    }
    match cli.command {
        Command::Test { common, verbose } => {
            let (mut cfg, src) = common.resolve("test");
            emit(
                common.out.as_deref(),
                &commands::test(&mut cfg, &src, verbose)?,
            )
        }
        Command::BlockTest { common, block_size } => {
            let (mut cfg, src) = common.resolve("block-test");
            cfg.block_size = Some(block_size);
            emit(common.out.as_deref(), &commands::block(&mut cfg, &src)?)
        }
        Command::SimulateNull { common, draws } => {
            let (mut cfg, src) = common.resolve("simulate-null");
            let text = commands::simulate_null(&mut cfg, &src, draws.as_deref())?;
            emit(common.out.as_deref(), &text)
        }
        Command::Power { common, replicates } => {
            let (mut cfg, _) = common.resolve("power");
            let spec = common
                .process
                .as_ref()
                .ok_or_else(|| CliError::InvalidArgument("power needs --process".into()))?;
            let text = commands::power(&mut cfg, spec, common.n, replicates)?;
            emit(common.out.as_deref(), &text)
        }
        Command::Generate {
            process,
            n,
            seed,
            out,
        } => emit(out.as_deref(), &commands::generate_csv(&process, n, seed)?),
        Command::Patterns { common } => {
            let (mut cfg, src) = common.resolve("patterns");
            emit(common.out.as_deref(), &commands::patterns(&mut cfg, &src)?)
        }
        Command::Reproduce {
            experiment,
            seed,
            replicates,
            mc_samples,
            alpha,
            kernel,
            bandwidth,
            raw_indicators,
            data_dir,
            out,
        } => {
            let exp: Experiment = experiment.parse()?;
            let mut opts = ReproduceOptions::new(exp, seed);
            if let Some(r) = replicates {
                opts.replicates = r;
            }
            opts.test.mc_samples = mc_samples;
            opts.test.alpha = alpha;
            opts.test.kernel = kernel;
            opts.test.bandwidth = bandwidth;
            opts.test.demean = !raw_indicators;
            opts.data_dir = data_dir;
            emit(out.as_deref(), &commands::reproduce(exp, &opts)?)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
