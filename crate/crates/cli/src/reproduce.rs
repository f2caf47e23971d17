//! Desk-scale versions of the simulation studies: null-law illustrations
//! and rejection-rate tables.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use ordsym::generators::{generate, power_experiment, Family, Innovation, Marginal, ProcessSpec};
use ordsym::patterns::all_patterns;
use ordsym::rng::derive_seed;
use ordsym::{
    count_patterns, custom_partition, d2_statistic, gaussian_partition, run_test_detailed,
    Partition, TestConfig,
};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::plotdata::{histogram, kde, write_histogram_csv, write_kde_csv};

const HIST_BINS: usize = 50;
const KDE_POINTS: usize = 512;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Experiment {
    #[serde(rename = "settingA")]
    SettingA,
    #[serde(rename = "settingB")]
    SettingB,
    #[serde(rename = "settingC")]
    SettingC,
    #[serde(rename = "settingD")]
    SettingD,
    #[serde(rename = "powerTable")]
    PowerTable,
}

impl Experiment {
    pub fn name(self) -> &'static str {
        match self {
            Experiment::SettingA => "settingA",
            Experiment::SettingB => "settingB",
            Experiment::SettingC => "settingC",
            Experiment::SettingD => "settingD",
            Experiment::PowerTable => "powerTable",
        }
    }

    pub fn default_replicates(self) -> usize {
        match self {
            Experiment::SettingA | Experiment::SettingB => 200,
            _ => 100,
        }
    }
}

impl FromStr for Experiment {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        let key: String = s
            .chars()
            .filter(|c| c.is_ascii_alphanumeric())
            .collect::<String>()
            .to_ascii_lowercase();
        match key.as_str() {
            "settinga" => Ok(Experiment::SettingA),
            "settingb" => Ok(Experiment::SettingB),
            "settingc" => Ok(Experiment::SettingC),
            "settingd" => Ok(Experiment::SettingD),
            "powertable" => Ok(Experiment::PowerTable),
            _ => Err(CliError::UnknownExperiment(s.to_string())),
        }
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Debug, Clone)]
pub struct ReproduceOptions {
    /// Base test settings; `seed` is the experiment seed.
    pub test: TestConfig,
    pub replicates: usize,
    /// Directory for histogram/KDE CSV files; none are written if unset.
    pub data_dir: Option<PathBuf>,
}

impl ReproduceOptions {
    pub fn new(experiment: Experiment, seed: u64) -> Self {
        ReproduceOptions {
            test: TestConfig {
                mc_samples: 2000,
                seed,
                ..TestConfig::default()
            },
            replicates: experiment.default_replicates(),
            data_dir: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampleSummary {
    pub count: usize,
    pub mean: f64,
    pub variance: f64,
}

impl SampleSummary {
    fn of(values: &[f64]) -> Self {
        let n = values.len() as f64;
        let mean = values.iter().sum::<f64>() / n;
        let variance = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0).max(1.0);
        SampleSummary {
            count: values.len(),
            mean,
            variance,
        }
    }
}

/// One simulated null law next to replicated values of the statistic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullIllustration {
    pub process: String,
    pub partition: String,
    pub n: usize,
    pub statistic: f64,
    pub p_value: f64,
    pub c_hat: f64,
    pub eigenvalues: Vec<f64>,
    pub null: SampleSummary,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_null_mean: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference_null_variance: Option<f64>,
    /// `n D̂₂` over independent replicates.
    pub replicate_statistics: SampleSummary,
    /// `√n D̂₂` over the same replicates.
    pub replicate_root_scaled: SampleSummary,
    pub files: Vec<String>,
    #[serde(skip)]
    pub null_draws: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateCell {
    pub family: Family,
    pub label: String,
    pub theta: f64,
    pub n: usize,
    pub replicates: usize,
    pub rejection_rate: f64,
    pub mean_p_value: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PatternProfile {
    pub label: String,
    pub n: usize,
    pub frequencies: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentReport {
    pub experiment: Experiment,
    pub description: String,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub illustrations: Vec<NullIllustration>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub cells: Vec<RateCell>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub pattern_profiles: Vec<PatternProfile>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub files: Vec<String>,
}

/// Partition whose second group pairs (2,3,1) with (3,2,1), which differ
/// in probability for Gaussian processes.
pub fn mismatched_partition() -> Partition {
    custom_partition(
        3,
        "(1,2,3) (1,3,2) (3,1,2) (2,1,3)\n(2,3,1) (3,2,1)",
        false,
        "mismatched",
    )
    .expect("static partition literal")
}

pub fn run_experiment(experiment: Experiment, opts: &ReproduceOptions) -> Result<ExperimentReport> {
    opts.test.validate()?;
    if opts.replicates == 0 {
        return Err(CliError::InvalidArgument("replicates must be >= 1".into()));
    }
    if let Some(dir) = &opts.data_dir {
        std::fs::create_dir_all(dir).map_err(CliError::io(dir.display().to_string()))?;
    }
    match experiment {
        Experiment::SettingA => setting_a(opts),
        Experiment::SettingB => setting_b(opts),
        Experiment::SettingC => setting_c(opts),
        Experiment::SettingD => setting_d(opts),
        Experiment::PowerTable => power_table(opts),
    }
}

#[allow(clippy::too_many_arguments)]
fn illustrate(
    tag: &str,
    spec: &ProcessSpec,
    partition: &Partition,
    n: usize,
    series_seed: u64,
    null_seed: u64,
    opts: &ReproduceOptions,
    reference: Option<(f64, f64)>,
) -> Result<NullIllustration> {
    let series = generate(spec, n, series_seed)?;
    let cfg = TestConfig {
        seed: null_seed,
        ..opts.test.clone()
    };
    let run = run_test_detailed(&series, 3, partition, &cfg)?;
    let stats: Vec<f64> = (0..opts.replicates)
        .into_par_iter()
        .map(|r| -> Result<f64> {
            let x = generate(spec, n, derive_seed(series_seed, r as u64, 0))?;
            let counts = count_patterns(&x, 3)?;
            Ok(counts.n() as f64 * d2_statistic(&counts, partition)?)
        })
        .collect::<Result<_>>()?;
    let root: Vec<f64> = stats.iter().map(|s| s / (n as f64 - 2.0).sqrt()).collect();
    let mut files = Vec::new();
    if let Some(dir) = &opts.data_dir {
        for (label, values) in [("null", &run.null.draws), ("statistic", &stats)] {
            let hist = format!("{tag}_{label}_hist.csv");
            let dens = format!("{tag}_{label}_kde.csv");
            write_histogram_csv(&dir.join(&hist), &histogram(values, HIST_BINS))?;
            write_kde_csv(&dir.join(&dens), &kde(values, KDE_POINTS))?;
            files.push(hist);
            files.push(dens);
        }
    }
    Ok(NullIllustration {
        process: spec.to_string(),
        partition: partition.name().to_string(),
        n,
        statistic: run.report.statistic,
        p_value: run.report.p_value,
        c_hat: run.report.c_hat,
        eigenvalues: run.report.eigenvalues.clone(),
        null: SampleSummary::of(&run.null.draws),
        reference_null_mean: reference.map(|r| r.0),
        reference_null_variance: reference.map(|r| r.1),
        replicate_statistics: SampleSummary::of(&stats),
        replicate_root_scaled: SampleSummary::of(&root),
        files,
        null_draws: run.null.draws,
    })
}

fn rate_cell(
    index: u64,
    spec: &ProcessSpec,
    label: &str,
    partition: &Partition,
    n: usize,
    reference: Option<f64>,
    opts: &ReproduceOptions,
) -> Result<RateCell> {
    let cfg = TestConfig {
        seed: derive_seed(opts.test.seed, index, 2),
        ..opts.test.clone()
    };
    let res = power_experiment(spec, partition, n, opts.replicates, &cfg)?;
    Ok(RateCell {
        family: spec.family,
        label: label.to_string(),
        theta: spec.theta,
        n,
        replicates: opts.replicates,
        rejection_rate: res.rejection_rate,
        mean_p_value: res.mean_p_value,
        reference,
    })
}

fn setting_a(opts: &ReproduceOptions) -> Result<ExperimentReport> {
    let seed = opts.test.seed;
    let ill = illustrate(
        "settingA",
        &ProcessSpec::ma1(0.5, Innovation::Gaussian),
        &gaussian_partition(3)?,
        1000,
        seed,
        seed,
        opts,
        Some((0.3510, 0.2321)),
    )?;
    Ok(ExperimentReport {
        experiment: Experiment::SettingA,
        description: "Gaussian MA(1), theta = 0.5, n = 1000, Gaussian-symmetry partition: \
                      simulated null law versus replicated statistics"
            .into(),
        illustrations: vec![ill],
        cells: Vec::new(),
        pattern_profiles: Vec::new(),
        files: Vec::new(),
    })
}

fn setting_b(opts: &ReproduceOptions) -> Result<ExperimentReport> {
    let seed = opts.test.seed;
    let part = mismatched_partition();
    let ill = illustrate(
        "settingB",
        &ProcessSpec::ma1(0.5, Innovation::Gaussian),
        &part,
        1000,
        seed,
        seed,
        opts,
        None,
    )?;
    let cells = vec![
        rate_cell(
            0,
            &ProcessSpec::ar1(0.5, Innovation::Gaussian),
            "gaussian",
            &part,
            500,
            Some(0.972),
            opts,
        )?,
        rate_cell(
            1,
            &ProcessSpec::ma1(0.5, Innovation::Gaussian),
            "gaussian",
            &part,
            500,
            Some(1.0),
            opts,
        )?,
    ];
    Ok(ExperimentReport {
        experiment: Experiment::SettingB,
        description: "Gaussian MA(1), theta = 0.5, n = 1000, partition violated by Gaussian data; \
                      power at n = 500"
            .into(),
        illustrations: vec![ill],
        cells,
        pattern_profiles: Vec::new(),
        files: Vec::new(),
    })
}

fn setting_c(opts: &ReproduceOptions) -> Result<ExperimentReport> {
    let seed = opts.test.seed;
    let part = gaussian_partition(3)?;
    let pareto = Marginal::Pareto {
        scale: 1.0,
        shape: 2.0,
    };
    let ill_spec = ProcessSpec::ma1(0.5, Innovation::Gaussian).subordinated(pareto);
    let ill = illustrate("settingC", &ill_spec, &part, 1000, seed, seed, opts, None)?;
    let mut files = Vec::new();
    if let Some(dir) = &opts.data_dir {
        let name = "settingC_series.csv".to_string();
        let x = generate(&ill_spec, 1000, seed)?;
        let file = std::fs::File::create(dir.join(&name))
            .map_err(CliError::io(dir.join(&name).display().to_string()))?;
        crate::plotdata::write_column_csv(file, "value", &x)?;
        files.push(name);
    }
    let marginals: [(&str, Marginal); 4] = [
        ("laplace", Marginal::Laplace { mu: 1.0, b: 4.0 }),
        ("pareto", pareto),
        ("logistic", Marginal::Logistic { mu: 100.0, s: 1.0 }),
        (
            "cauchy",
            Marginal::Cauchy {
                mu: 1.0,
                gamma: 12.0,
            },
        ),
    ];
    // rows n = 1000, 2000; AR(1) block then MA(1) block
    let reference = [
        [[0.023, 0.022, 0.023, 0.023], [0.048, 0.048, 0.048, 0.099]],
        [[0.048, 0.047, 0.047, 0.048], [0.05, 0.05, 0.05, 0.049]],
    ];
    let mut cells = Vec::new();
    let mut index = 0;
    for (fi, family) in [Family::Ar1, Family::Ma1].into_iter().enumerate() {
        for (ni, n) in [1000usize, 2000].into_iter().enumerate() {
            for (mi, (label, m)) in marginals.iter().enumerate() {
                let spec = ProcessSpec::new(family, 0.5, Innovation::Gaussian).subordinated(*m);
                cells.push(rate_cell(
                    index,
                    &spec,
                    label,
                    &part,
                    n,
                    Some(reference[fi][ni][mi]),
                    opts,
                )?);
                index += 1;
            }
        }
    }
    Ok(ExperimentReport {
        experiment: Experiment::SettingC,
        description: "subordinated Gaussian AR(1)/MA(1), theta = 0.5: empirical size at alpha"
            .into(),
        illustrations: vec![ill],
        cells,
        pattern_profiles: Vec::new(),
        files,
    })
}

fn setting_d(opts: &ReproduceOptions) -> Result<ExperimentReport> {
    let part = gaussian_partition(3)?;
    let innovations: [(&str, Innovation); 4] = [
        ("lognormal", Innovation::LognormalCentered),
        ("chi2", Innovation::Chi2One),
        ("exp", Innovation::ExpOne),
        ("t1", Innovation::StudentT(1.0)),
    ];
    // [family][n row][innovation]
    let reference = [
        [
            [0.976, 0.997, 0.788, 0.083],
            [1.0, 1.0, 0.996, 0.207],
            [1.0, 1.0, 1.0, 0.532],
        ],
        [
            [0.765, 0.857, 0.777, 0.334],
            [0.996, 0.998, 0.916, 0.529],
            [1.0, 1.0, 0.998, 0.842],
        ],
    ];
    let mut cells = Vec::new();
    let mut index = 0;
    for (fi, family) in [Family::Ar1, Family::Ma1].into_iter().enumerate() {
        for (ni, n) in [250usize, 500, 1000].into_iter().enumerate() {
            for (ii, (label, inn)) in innovations.iter().enumerate() {
                let spec = ProcessSpec::new(family, 0.5, *inn);
                cells.push(rate_cell(
                    index,
                    &spec,
                    label,
                    &part,
                    n,
                    Some(reference[fi][ni][ii]),
                    opts,
                )?);
                index += 1;
            }
        }
    }
    let labels: Vec<String> = all_patterns(3)?.iter().map(|p| p.to_string()).collect();
    let profile_n = 100_000;
    let mut profiles = Vec::new();
    for (i, (label, inn)) in [("gaussian", Innovation::Gaussian)]
        .iter()
        .chain(innovations.iter())
        .enumerate()
    {
        let x = generate(
            &ProcessSpec::ma1(0.5, *inn),
            profile_n,
            derive_seed(opts.test.seed, i as u64, 4),
        )?;
        let freqs = count_patterns(&x, 3)?.frequencies();
        profiles.push(PatternProfile {
            label: label.to_string(),
            n: profile_n,
            frequencies: labels.iter().cloned().zip(freqs).collect(),
        });
    }
    let mut files = Vec::new();
    if let Some(dir) = &opts.data_dir {
        let name = "settingD_patterns.csv".to_string();
        write_profiles(&dir.join(&name), &profiles)?;
        files.push(name);
    }
    Ok(ExperimentReport {
        experiment: Experiment::SettingD,
        description: "linear AR(1)/MA(1), theta = 0.5, non-Gaussian innovations: \
                      rejection rates of the Gaussian-symmetry hypothesis"
            .into(),
        illustrations: Vec::new(),
        cells,
        pattern_profiles: profiles,
        files,
    })
}

fn write_profiles(path: &Path, profiles: &[PatternProfile]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["innovation", "pattern", "frequency"])?;
    for p in profiles {
        for (pat, f) in &p.frequencies {
            w.serialize((&p.label, pat, f))?;
        }
    }
    w.flush().map_err(CliError::io(path.display().to_string()))
}

fn power_table(opts: &ReproduceOptions) -> Result<ExperimentReport> {
    let part = mismatched_partition();
    // [family][theta row][n]
    let reference = [
        [
            [0.082, 0.082, 0.161, 0.207],
            [0.024, 0.237, 0.903, 0.994],
            [0.972, 0.999, 1.0, 1.0],
        ],
        [
            [0.092, 0.085, 0.186, 0.244],
            [0.089, 0.624, 0.988, 0.999],
            [1.0, 1.0, 1.0, 1.0],
        ],
    ];
    let mut cells = Vec::new();
    let mut index = 0;
    for (fi, family) in [Family::Ar1, Family::Ma1].into_iter().enumerate() {
        for (ti, theta) in [0.1, 0.3, 0.5].into_iter().enumerate() {
            for (ni, n) in [500usize, 1000, 1500, 2000].into_iter().enumerate() {
                let spec = ProcessSpec::new(family, theta, Innovation::Gaussian);
                cells.push(rate_cell(
                    index,
                    &spec,
                    "gaussian",
                    &part,
                    n,
                    Some(reference[fi][ti][ni]),
                    opts,
                )?);
                index += 1;
            }
        }
    }
    Ok(ExperimentReport {
        experiment: Experiment::PowerTable,
        description: "Gaussian AR(1)/MA(1) power against the mismatched partition".into(),
        illustrations: Vec::new(),
        cells,
        pattern_profiles: Vec::new(),
        files: Vec::new(),
    })
}
