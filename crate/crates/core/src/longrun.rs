//! Kernel (HAC) estimation of the long-run covariance of the
//! pattern-indicator process, and its projection onto the eigenfunctions.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, SymmetricEigen};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::patterns::factorial;
use crate::spectral::SpectralModel;

/// Lag-window kernels satisfying `k(0) = 1`, `k(x) = k(-x)`, `|k| <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HacKernel {
    Bartlett,
    Parzen,
    QuadraticSpectral,
}

impl HacKernel {
    pub fn weight(self, x: f64) -> f64 {
        let a = x.abs();
        match self {
            HacKernel::Bartlett => (1.0 - a).max(0.0),
            HacKernel::Parzen => {
                if a <= 0.5 {
                    1.0 - 6.0 * a * a + 6.0 * a * a * a
                } else if a <= 1.0 {
                    2.0 * (1.0 - a).powi(3)
                } else {
                    0.0
                }
            }
            HacKernel::QuadraticSpectral => {
                if a < 1e-4 {
                    // Taylor expansion around 0: 1 - (6π/5)² x² / 10
                    let z = 6.0 * std::f64::consts::PI * a / 5.0;
                    1.0 - z * z / 10.0
                } else {
                    let z = 6.0 * std::f64::consts::PI * a / 5.0;
                    25.0 / (12.0 * std::f64::consts::PI.powi(2) * a * a) * (z.sin() / z - z.cos())
                }
            }
        }
    }

    /// Largest lag that can carry weight above 1e-12 for bandwidth `gamma`.
    fn max_lag(self, gamma: f64, n: usize) -> usize {
        let cap = n.saturating_sub(1);
        let lag = match self {
            HacKernel::Bartlett | HacKernel::Parzen => gamma.floor() as usize,
            HacKernel::QuadraticSpectral => {
                // |k(x)| <= 25/(12π²x²)·(1 + 5/(6πx)); solve the envelope for 1e-12
                let c = 25.0 / (12.0 * std::f64::consts::PI.powi(2));
                let x = (2.0 * c / 1e-12).sqrt();
                (x * gamma).ceil().min(cap as f64) as usize
            }
        };
        lag.min(cap)
    }

    pub fn name(self) -> &'static str {
        match self {
            HacKernel::Bartlett => "bartlett",
            HacKernel::Parzen => "parzen",
            HacKernel::QuadraticSpectral => "qs",
        }
    }
}

impl fmt::Display for HacKernel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for HacKernel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bartlett" => Ok(HacKernel::Bartlett),
            "parzen" => Ok(HacKernel::Parzen),
            "qs" | "quadratic-spectral" | "quadratic_spectral" => Ok(HacKernel::QuadraticSpectral),
            _ => Err(Error::UnknownKernel(s.to_string())),
        }
    }
}

/// Kernel value by name.
pub fn hac_kernel(name: &str, x: f64) -> Result<f64> {
    Ok(name.parse::<HacKernel>()?.weight(x))
}

/// Bandwidth rule for the lag window.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Bandwidth {
    /// `⌈n^{1/3}⌉`, which grows without bound while `γ_n / n → 0`.
    Auto,
    Fixed(f64),
}

impl Bandwidth {
    pub fn resolve(self, n: usize) -> Result<f64> {
        match self {
            Bandwidth::Auto => Ok(cube_root_ceil(n) as f64),
            Bandwidth::Fixed(g) if g >= 1.0 && g.is_finite() => Ok(g),
            Bandwidth::Fixed(g) => Err(Error::BandwidthTooSmall(g)),
        }
    }
}

impl FromStr for Bandwidth {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Bandwidth::Auto);
        }
        let g: f64 = s
            .parse()
            .map_err(|_| Error::InvalidArgument(format!("bad bandwidth '{s}'")))?;
        if g < 1.0 || !g.is_finite() {
            return Err(Error::BandwidthTooSmall(g));
        }
        Ok(Bandwidth::Fixed(g))
    }
}

fn cube_root_ceil(n: usize) -> usize {
    let mut g = (n as f64).cbrt().round() as usize;
    while g * g * g < n {
        g += 1;
    }
    while g > 1 && (g - 1).pow(3) >= n {
        g -= 1;
    }
    g.max(1)
}

/// Kernel-weighted long-run covariance of pattern indicators.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LongRunCovariance {
    #[serde(skip)]
    pub omega: DMatrix<f64>,
    pub kernel: HacKernel,
    pub bandwidth: f64,
    pub max_lag: usize,
    pub demeaned: bool,
    pub n: usize,
}

/// Lag-`l` cross-product `Σ_s (I_s - μ)(I_{s+l} - μ)ᵀ`, from codes.
fn lag_cross(codes: &[u32], k: usize, mean: &[f64], lag: usize) -> DMatrix<f64> {
    let len = codes.len() - lag;
    let mut cross = DMatrix::<f64>::zeros(k, k);
    let mut lead = vec![0.0; k];
    let mut trail = vec![0.0; k];
    for s in 0..len {
        let a = codes[s] as usize;
        let b = codes[s + lag] as usize;
        cross[(a, b)] += 1.0;
        lead[a] += 1.0;
        trail[b] += 1.0;
    }
    if mean.iter().any(|&m| m != 0.0) {
        let len = len as f64;
        for i in 0..k {
            for j in 0..k {
                cross[(i, j)] += -lead[i] * mean[j] - mean[i] * trail[j] + len * mean[i] * mean[j];
            }
        }
    }
    cross
}

/// `Ω̂ = n⁻¹ Σ_{s,ℓ} (I_s - μ)(I_ℓ - μ)ᵀ k((ℓ - s)/γ)` from pattern codes.
///
/// With `demean`, `μ` is the empirical pattern-frequency vector; otherwise
/// `μ = 0` and the raw indicators are used.
pub fn estimate_omega_from_codes(
    codes: &[u32],
    d: usize,
    kernel: HacKernel,
    bandwidth: Bandwidth,
    demean: bool,
) -> Result<LongRunCovariance> {
    let n = codes.len();
    if n < 2 {
        return Err(Error::TooFewWindows(n));
    }
    let gamma = bandwidth.resolve(n)?;
    let k = factorial(d);
    let mean = if demean {
        let mut m = vec![0.0; k];
        for &c in codes {
            m[c as usize] += 1.0;
        }
        m.iter_mut().for_each(|v| *v /= n as f64);
        m
    } else {
        vec![0.0; k]
    };
    let max_lag = kernel.max_lag(gamma, n);
    // per-lag terms in parallel, reduced in lag order
    let terms: Vec<DMatrix<f64>> = (1..=max_lag)
        .into_par_iter()
        .filter_map(|lag| {
            let w = kernel.weight(lag as f64 / gamma);
            if w.abs() < 1e-12 {
                return None;
            }
            let g = lag_cross(codes, k, &mean, lag);
            Some((&g + g.transpose()) * w)
        })
        .collect();
    let mut omega = lag_cross(codes, k, &mean, 0);
    for term in &terms {
        omega += term;
    }
    omega /= n as f64;
    let omega = (&omega + omega.transpose()) * 0.5;
    Ok(LongRunCovariance {
        omega,
        kernel,
        bandwidth: gamma,
        max_lag,
        demeaned: demean,
        n,
    })
}

/// Same as [`estimate_omega_from_codes`], starting from the raw series.
pub fn estimate_omega(
    series: &[f64],
    d: usize,
    kernel: HacKernel,
    bandwidth: Bandwidth,
    demean: bool,
) -> Result<LongRunCovariance> {
    let codes = crate::patterns::pattern_codes(series, d)?;
    estimate_omega_from_codes(&codes, d, kernel, bandwidth, demean)
}

/// Covariance of the limiting Gaussian vector `W`, projected onto the PSD
/// cone.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WCovariance {
    #[serde(skip)]
    pub sigma: DMatrix<f64>,
    /// Smallest eigenvalue before clipping.
    pub min_eig_raw: f64,
}

/// Symmetric eigendecomposition with negative eigenvalues clipped to zero.
pub(crate) fn clip_psd(m: &DMatrix<f64>) -> (DMatrix<f64>, f64) {
    if m.nrows() == 0 {
        return (m.clone(), 0.0);
    }
    let eig = SymmetricEigen::new(m.clone());
    let min_eig = eig.eigenvalues.min();
    let clipped = eig.eigenvalues.map(|v| v.max(0.0));
    let rebuilt =
        &eig.eigenvectors * DMatrix::from_diagonal(&clipped) * eig.eigenvectors.transpose();
    ((&rebuilt + rebuilt.transpose()) * 0.5, min_eig)
}

/// `Σ̂_ij = g⁽ⁱ⁾ᵀ Ω̂ g⁽ʲ⁾`, with negative eigenvalues clipped.
pub fn w_covariance(omega: &LongRunCovariance, model: &SpectralModel) -> Result<WCovariance> {
    let g = &model.eigenvectors;
    if omega.omega.nrows() != g.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "omega is {0}×{0} but eigenvectors have {1} rows",
            omega.omega.nrows(),
            g.nrows()
        )));
    }
    let raw = g.transpose() * &omega.omega * g;
    let raw = (&raw + raw.transpose()) * 0.5;
    let (sigma, min_eig_raw) = clip_psd(&raw);
    Ok(WCovariance { sigma, min_eig_raw })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::estimators::PatternCounts;
    use crate::partitions::gaussian_partition;
    use crate::spectral::build_spectral_model;

    #[test]
    fn kernel_values() {
        assert_eq!(hac_kernel("bartlett", 0.0).unwrap(), 1.0);
        assert_eq!(hac_kernel("bartlett", 1.5).unwrap(), 0.0);
        assert_eq!(hac_kernel("bartlett", -1.5).unwrap(), 0.0);
        assert_eq!(hac_kernel("parzen", 0.5).unwrap(), 0.25);
        assert_eq!(hac_kernel("parzen", 0.0).unwrap(), 1.0);
        assert_eq!(hac_kernel("qs", 0.0).unwrap(), 1.0);
        assert!(matches!(
            hac_kernel("epanechnikov", 0.0),
            Err(Error::UnknownKernel(_))
        ));
        for kern in [
            HacKernel::Bartlett,
            HacKernel::Parzen,
            HacKernel::QuadraticSpectral,
        ] {
            for i in 0..400 {
                let x = i as f64 * 0.013;
                let w = kern.weight(x);
                assert_eq!(w, kern.weight(-x));
                assert!(w.abs() <= 1.0 + 1e-12);
            }
        }
        // QS is continuous across the series/closed-form switch
        let q = HacKernel::QuadraticSpectral;
        assert!((q.weight(0.99e-4) - q.weight(1.01e-4)).abs() < 1e-8);
    }

    #[test]
    fn auto_bandwidth() {
        assert_eq!(Bandwidth::Auto.resolve(1000).unwrap(), 10.0);
        assert_eq!(Bandwidth::Auto.resolve(1001).unwrap(), 11.0);
        assert_eq!(Bandwidth::Auto.resolve(2).unwrap(), 2.0);
        assert_eq!(Bandwidth::Auto.resolve(1).unwrap(), 1.0);
        assert!(matches!(
            Bandwidth::Fixed(0.5).resolve(10),
            Err(Error::BandwidthTooSmall(_))
        ));
        // grows without bound, but slower than n
        let ratios: Vec<f64> = [1e3, 1e5, 1e7]
            .iter()
            .map(|&n| Bandwidth::Auto.resolve(n as usize).unwrap() / n)
            .collect();
        assert!(ratios.windows(2).all(|w| w[1] < w[0]));
        assert!(Bandwidth::Auto.resolve(10_000_000).unwrap() >= 200.0);
    }

    #[test]
    fn constant_pattern_series() {
        let codes = vec![2u32; 50];
        let raw =
            estimate_omega_from_codes(&codes, 3, HacKernel::Bartlett, Bandwidth::Fixed(4.0), false)
                .unwrap();
        // all mass on (2,2): n⁻¹ Σ_{s,ℓ} k((ℓ-s)/γ) over lags 0..3
        let mut expected = 50.0;
        for lag in 1..4 {
            expected += 2.0 * (1.0 - lag as f64 / 4.0) * (50 - lag) as f64;
        }
        expected /= 50.0;
        assert!((raw.omega[(2, 2)] - expected).abs() < 1e-12);
        assert_eq!(raw.omega.iter().filter(|v| **v != 0.0).count(), 1);

        let demeaned =
            estimate_omega_from_codes(&codes, 3, HacKernel::Bartlett, Bandwidth::Fixed(4.0), true)
                .unwrap();
        assert!(demeaned.omega.amax() < 1e-12);
    }

    #[test]
    fn matches_pairwise_definition() {
        let codes: Vec<u32> = (0..60u32).map(|i| (i * 7 + i / 5) % 6).collect();
        for demean in [false, true] {
            for kern in [
                HacKernel::Bartlett,
                HacKernel::Parzen,
                HacKernel::QuadraticSpectral,
            ] {
                let est = estimate_omega_from_codes(&codes, 3, kern, Bandwidth::Fixed(3.5), demean)
                    .unwrap();
                let n = codes.len();
                let mut mean = [0.0; 6];
                if demean {
                    for &c in &codes {
                        mean[c as usize] += 1.0 / n as f64;
                    }
                }
                let mut brute = DMatrix::<f64>::zeros(6, 6);
                for s in 0..n {
                    for l in 0..n {
                        let w = kern.weight((l as f64 - s as f64) / 3.5);
                        for i in 0..6 {
                            for j in 0..6 {
                                let a = (codes[s] as usize == i) as u8 as f64 - mean[i];
                                let b = (codes[l] as usize == j) as u8 as f64 - mean[j];
                                brute[(i, j)] += a * b * w / n as f64;
                            }
                        }
                    }
                }
                assert!(
                    (&brute - &est.omega).amax() < 1e-9,
                    "{kern} demean={demean}"
                );
                assert_eq!(est.omega, est.omega.transpose());
            }
        }
    }

    #[test]
    fn w_covariance_identity_and_zero() {
        let part = gaussian_partition(3).unwrap();
        let counts = PatternCounts::new(3, vec![100; 6]).unwrap();
        let model = build_spectral_model(&part, &counts).unwrap();
        let diag = LongRunCovariance {
            omega: DMatrix::from_diagonal_element(6, 6, 1.0 / 6.0),
            kernel: HacKernel::Bartlett,
            bandwidth: 1.0,
            max_lag: 0,
            demeaned: false,
            n: 600,
        };
        let w = w_covariance(&diag, &model).unwrap();
        assert!((&w.sigma - DMatrix::identity(4, 4)).amax() < 1e-12);

        let zero = LongRunCovariance {
            omega: DMatrix::zeros(6, 6),
            ..diag.clone()
        };
        let w = w_covariance(&zero, &model).unwrap();
        assert_eq!(w.sigma, DMatrix::zeros(4, 4));

        let wrong = LongRunCovariance {
            omega: DMatrix::zeros(2, 2),
            ..diag
        };
        assert!(matches!(
            w_covariance(&wrong, &model),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn psd_clipping_is_minimal() {
        let m = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        let (clipped, min_eig) = clip_psd(&m);
        assert!((min_eig + 1.0).abs() < 1e-12);
        let eig = SymmetricEigen::new(clipped.clone());
        assert!(eig.eigenvalues.min() > -1e-12);
        let shift = SymmetricEigen::new(&m - &clipped).eigenvalues.amax();
        assert!(shift <= min_eig.abs() + 1e-12);
    }
}
