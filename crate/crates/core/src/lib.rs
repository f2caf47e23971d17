//! Ordinal-pattern symmetry testing for stationary time series.
//!
//! A symmetry hypothesis is a partition of the `d!` ordinal patterns into
//! groups whose members should be equally likely. The test statistic is a
//! degenerate U-statistic whose null law is a weighted sum of centred
//! chi-squares, approximated here by Monte Carlo with a HAC estimate of the
//! long-run covariance of pattern indicators.
//!
//! ```
//! use ordsym::{gaussian_partition, run_test, TestConfig};
//! use ordsym::generators::{generate, ProcessSpec, Innovation};
//!
//! let x = generate(&ProcessSpec::ma1(0.5, Innovation::Gaussian), 500, 1).unwrap();
//! let part = gaussian_partition(3).unwrap();
//! let cfg = TestConfig { mc_samples: 2000, ..TestConfig::default() };
//! let report = run_test(&x, 3, &part, &cfg).unwrap();
//! assert!(report.p_value > 0.0 && report.p_value <= 1.0);
//! ```

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod error;
pub mod estimators;
pub mod generators;
pub mod longrun;
pub mod nulldist;
pub mod partitions;
pub mod patterns;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use estimators::{
    count_patterns, d2_statistic, grouped_frequencies, kernel_h, symbolic_correlation, theta,
    u_statistic, PatternCounts,
};
pub use longrun::{estimate_omega, estimate_omega_from_codes, w_covariance, Bandwidth, HacKernel};
pub use nulldist::{
    p_value, quantile, run_test, run_test_detailed, sample_null, TestConfig, TestReport,
};
pub use partitions::{
    custom_partition, gaussian_partition, reflection_partition, reversal_partition,
    singleton_partition, Partition,
};
pub use patterns::{extract_pattern, pattern_codes, pattern_sequence, OrdinalPattern, PatternId};
pub use spectral::{build_spectral_model, eigenpairs, SpectralModel};
