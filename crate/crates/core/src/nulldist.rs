//! Monte Carlo null law, p-values and the full test pipeline.
//!
//! Under the null hypothesis `n D̂₂(𝒢)` converges to `Σ λ_i (W_i² - 1) + c`
//! with `W ~ N(0, Σ)`. The law is simulated with plug-in `λ̂`, `ĉ` and `Σ̂`,
//! and the test rejects in the left tail: asymmetry pulls the statistic
//! down.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{d2_statistic, symbolic_correlation, u_statistic, PatternCounts};
use crate::longrun::{estimate_omega_from_codes, w_covariance, Bandwidth, HacKernel, WCovariance};
use crate::partitions::Partition;
use crate::patterns::pattern_codes;
use crate::rng::substream;
use crate::spectral::{build_spectral_model, SpectralModel};

/// Draws per RNG stream; fixed so output is independent of thread count.
const CHUNK: usize = 1024;

/// Simulated values of `S_t + ĉ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NullSample {
    pub draws: Vec<f64>,
    pub seed: u64,
}

impl NullSample {
    pub fn len(&self) -> usize {
        self.draws.len()
    }

    pub fn is_empty(&self) -> bool {
        self.draws.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.draws.iter().sum::<f64>() / self.draws.len() as f64
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        let n = self.draws.len();
        if n < 2 {
            return 0.0;
        }
        let m = self.mean();
        self.draws.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1) as f64
    }
}

/// Symmetric square root of a PSD matrix.
fn psd_sqrt(sigma: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let eig = SymmetricEigen::new(sigma.clone());
    let min = eig.eigenvalues.min();
    let scale = eig.eigenvalues.amax().max(1.0);
    if min < -1e-10 * scale {
        return Err(Error::NotPsd(min));
    }
    let roots = eig.eigenvalues.map(|v| v.max(0.0).sqrt());
    Ok(&eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.transpose())
}

/// Draws `N` values of `Σ λ_i (W_i² - 1) + ĉ` with `W = Σ̂^{1/2} Z`.
pub fn sample_null(
    model: &SpectralModel,
    sigma: &WCovariance,
    draws: usize,
    seed: u64,
) -> Result<NullSample> {
    let t = model.t;
    if t == 0 {
        return Err(Error::DegenerateModel);
    }
    if draws == 0 {
        return Err(Error::InvalidArgument(
            "need at least one Monte Carlo draw".into(),
        ));
    }
    if sigma.sigma.nrows() != t || sigma.sigma.ncols() != t {
        return Err(Error::DimensionMismatch(format!(
            "sigma is {}×{} but the model has t = {t}",
            sigma.sigma.nrows(),
            sigma.sigma.ncols()
        )));
    }
    let root = psd_sqrt(&sigma.sigma)?;
    let lambda = DVector::from_column_slice(&model.eigenvalues);
    let trace: f64 = model.eigenvalues.iter().sum();
    let offset = model.c_hat - trace;

    let chunks = draws.div_ceil(CHUNK);
    let parts: Vec<Vec<f64>> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let mut rng = substream(seed, c as u64);
            let len = CHUNK.min(draws - c * CHUNK);
            let mut z = DVector::<f64>::zeros(t);
            let mut w = DVector::<f64>::zeros(t);
            (0..len)
                .map(|_| {
                    for zi in z.iter_mut() {
                        *zi = StandardNormal.sample(&mut rng);
                    }
                    w.gemv(1.0, &root, &z, 0.0);
                    let quad: f64 = w.iter().zip(lambda.iter()).map(|(wi, l)| l * wi * wi).sum();
                    quad + offset
                })
                .collect()
        })
        .collect();
    Ok(NullSample {
        draws: parts.concat(),
        seed,
    })
}

/// Left-tail Monte Carlo p-value `(1 + #{draws <= s}) / (N + 1)`.
pub fn p_value(statistic: f64, sample: &NullSample) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    let below = sample.draws.iter().filter(|&&x| x <= statistic).count();
    Ok((1 + below) as f64 / (sample.len() + 1) as f64)
}

/// Lower empirical quantile: the `⌈qN⌉`-th order statistic.
pub fn quantile(sample: &NullSample, q: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::EmptySample);
    }
    if !(q > 0.0 && q < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "quantile level {q} outside (0, 1)"
        )));
    }
    let mut sorted = sample.draws.clone();
    sorted.sort_by(f64::total_cmp);
    let rank = ((q * sorted.len() as f64) - 1e-9).ceil().max(1.0) as usize;
    Ok(sorted[rank.min(sorted.len()) - 1])
}

/// Settings of a single test run.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestConfig {
    pub alpha: f64,
    pub mc_samples: usize,
    pub kernel: HacKernel,
    pub bandwidth: Bandwidth,
    pub demean: bool,
    pub seed: u64,
    /// Smallest Monte Carlo sample accepted for a reported p-value.
    pub min_mc_samples: usize,
    #[serde(skip)]
    pub include_eigenvectors: bool,
}

impl Default for TestConfig {
    fn default() -> Self {
        TestConfig {
            alpha: 0.05,
            mc_samples: 20_000,
            kernel: HacKernel::Bartlett,
            bandwidth: Bandwidth::Auto,
            demean: true,
            seed: 42,
            min_mc_samples: 1000,
            include_eigenvectors: false,
        }
    }
}

impl TestConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "alpha {} outside (0, 1)",
                self.alpha
            )));
        }
        if self.mc_samples < self.min_mc_samples {
            return Err(Error::InvalidArgument(format!(
                "{} Monte Carlo samples is below the floor of {}",
                self.mc_samples, self.min_mc_samples
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PartitionSummary {
    pub name: String,
    pub groups: Vec<Vec<String>>,
}

impl From<&Partition> for PartitionSummary {
    fn from(p: &Partition) -> Self {
        PartitionSummary {
            name: p.name().to_string(),
            groups: p.describe(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Diagnostics {
    pub series_len: usize,
    pub n_windows: u64,
    pub d: usize,
    pub kernel: HacKernel,
    pub bandwidth: f64,
    pub max_lag: usize,
    pub demeaned: bool,
    pub min_eig_raw: f64,
    pub seed: u64,
    pub mc_samples: usize,
}

/// Outcome of one test.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    /// `n · D̂₂(𝒢)`.
    pub statistic: f64,
    pub d2_hat: f64,
    pub u_statistic: f64,
    pub s_n: f64,
    pub p_value: f64,
    pub alpha: f64,
    /// Lower `α`-quantile of the simulated null law.
    pub critical_value: f64,
    pub reject: bool,
    pub c_hat: f64,
    pub eigenvalues: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub null_mean: f64,
    pub null_var: f64,
    pub frequencies: Vec<f64>,
    pub sigma: Vec<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub eigenvectors: Option<Vec<Vec<f64>>>,
    pub partition: PartitionSummary,
    pub diagnostics: Diagnostics,
}

/// Intermediate products of a pipeline run, kept for callers that need
/// the null draws themselves.
#[derive(Debug, Clone)]
pub struct TestRun {
    pub report: TestReport,
    pub model: SpectralModel,
    pub sigma: WCovariance,
    pub null: NullSample,
}

/// Runs the full pipeline and returns the report with its null sample.
pub fn run_test_detailed(
    series: &[f64],
    d: usize,
    partition: &Partition,
    config: &TestConfig,
) -> Result<TestRun> {
    config.validate().map_err(Error::at("config"))?;
    if partition.d() != d {
        return Err(Error::DimensionMismatch(format!(
            "partition is for d = {} but d = {d} was requested",
            partition.d()
        )))
        .map_err(Error::at("config"));
    }
    if series.len() < d + 1 {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            needed: d + 1,
        })
        .map_err(Error::at("patterns"));
    }
    let codes = pattern_codes(series, d).map_err(Error::at("patterns"))?;
    let counts = PatternCounts::from_codes(d, &codes).map_err(Error::at("patterns"))?;
    let n = counts.n() as f64;
    let d2_hat = d2_statistic(&counts, partition).map_err(Error::at("statistic"))?;
    let u = u_statistic(&counts, partition).map_err(Error::at("statistic"))?;
    let s_n = symbolic_correlation(&counts).map_err(Error::at("statistic"))?;
    let model = build_spectral_model(partition, &counts).map_err(Error::at("spectral"))?;
    let omega =
        estimate_omega_from_codes(&codes, d, config.kernel, config.bandwidth, config.demean)
            .map_err(Error::at("long-run covariance"))?;
    let sigma = w_covariance(&omega, &model).map_err(Error::at("long-run covariance"))?;
    let null = sample_null(&model, &sigma, config.mc_samples, config.seed)
        .map_err(Error::at("null simulation"))?;
    let statistic = n * d2_hat;
    let p_value = p_value(statistic, &null).map_err(Error::at("decision"))?;
    let critical_value = quantile(&null, config.alpha).map_err(Error::at("decision"))?;
    let report = TestReport {
        statistic,
        d2_hat,
        u_statistic: u,
        s_n,
        p_value,
        alpha: config.alpha,
        critical_value,
        reject: statistic < critical_value,
        c_hat: model.c_hat,
        eigenvalues: model.eigenvalues.clone(),
        p_hat: model.p_hat.clone(),
        null_mean: null.mean(),
        null_var: null.variance(),
        frequencies: counts.frequencies(),
        sigma: sigma
            .sigma
            .row_iter()
            .map(|r| r.iter().copied().collect())
            .collect(),
        eigenvectors: config
            .include_eigenvectors
            .then(|| model.eigenvector_columns()),
        partition: partition.into(),
        diagnostics: Diagnostics {
            series_len: series.len(),
            n_windows: counts.n(),
            d,
            kernel: omega.kernel,
            bandwidth: omega.bandwidth,
            max_lag: omega.max_lag,
            demeaned: omega.demeaned,
            min_eig_raw: sigma.min_eig_raw,
            seed: config.seed,
            mc_samples: config.mc_samples,
        },
    };
    Ok(TestRun {
        report,
        model,
        sigma,
        null,
    })
}

/// Tests the symmetry hypothesis encoded by `partition` on `series`.
pub fn run_test(
    series: &[f64],
    d: usize,
    partition: &Partition,
    config: &TestConfig,
) -> Result<TestReport> {
    run_test_detailed(series, d, partition, config).map(|r| r.report)
}
