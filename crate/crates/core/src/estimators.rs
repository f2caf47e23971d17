//! Empirical pattern statistics.
//!
//! Every estimator here depends on the windows only through their patterns,
//! so all of them are computed from per-pattern counts in `O(n + d!)`.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::partitions::Partition;
use crate::patterns::{factorial, pattern_codes};

/// Per-pattern window counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct PatternCounts {
    d: usize,
    counts: Vec<u64>,
    n: u64,
}

impl PatternCounts {
    /// Builds counts directly, checking `n >= 1` and the table size.
    pub fn new(d: usize, counts: Vec<u64>) -> Result<Self> {
        if counts.len() != factorial(d) {
            return Err(Error::DimensionMismatch(format!(
                "{} counts for d = {d} (expected {})",
                counts.len(),
                factorial(d)
            )));
        }
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::TooFewWindows(0));
        }
        Ok(PatternCounts { d, counts, n })
    }

    pub fn from_codes(d: usize, codes: &[u32]) -> Result<Self> {
        let mut counts = vec![0u64; factorial(d)];
        for &c in codes {
            counts[c as usize] += 1;
        }
        PatternCounts::new(d, counts)
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    pub fn n(&self) -> u64 {
        self.n
    }

    /// Relative frequencies `N_π / n`.
    pub fn frequencies(&self) -> Vec<f64> {
        let n = self.n as f64;
        self.counts.iter().map(|&c| c as f64 / n).collect()
    }

    fn require_pairs(&self) -> Result<f64> {
        if self.n < 2 {
            return Err(Error::TooFewWindows(self.n as usize));
        }
        Ok(self.n as f64)
    }
}

/// Group masses and the within-group averaged pattern frequencies.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupedFrequencies {
    /// `p̂(G_i)`, the total frequency of each group.
    pub group_probs: Vec<f64>,
    /// `p̂(G_i) / |G_i|`, the common value of the symmetrized frequency.
    pub group_means: Vec<f64>,
    /// Symmetrized frequency of every pattern.
    pub per_pattern_symmetrized: Vec<f64>,
}

fn check_dims(counts: &PatternCounts, partition: &Partition) -> Result<()> {
    if counts.d != partition.d() {
        return Err(Error::DimensionMismatch(format!(
            "counts use d = {} but the partition uses d = {}",
            counts.d,
            partition.d()
        )));
    }
    Ok(())
}

/// Counts the patterns of all overlapping windows of length `d`.
pub fn count_patterns(series: &[f64], d: usize) -> Result<PatternCounts> {
    PatternCounts::from_codes(d, &pattern_codes(series, d)?)
}

pub fn grouped_frequencies(
    counts: &PatternCounts,
    partition: &Partition,
) -> Result<GroupedFrequencies> {
    check_dims(counts, partition)?;
    let n = counts.n as f64;
    let group_counts: Vec<u64> = partition
        .groups()
        .iter()
        .map(|g| g.iter().map(|&id| counts.counts[id as usize]).sum())
        .collect();
    let group_probs: Vec<f64> = group_counts.iter().map(|&c| c as f64 / n).collect();
    let group_means: Vec<f64> = group_probs
        .iter()
        .zip(partition.groups())
        .map(|(p, g)| p / g.len() as f64)
        .collect();
    let per_pattern_symmetrized = (0..partition.num_patterns() as u32)
        .map(|id| group_means[partition.group_of(id)])
        .collect();
    Ok(GroupedFrequencies {
        group_probs,
        group_means,
        per_pattern_symmetrized,
    })
}

/// Symbolic correlation integral `S_n^d = Σ N_π(N_π - 1) / (n(n - 1))`:
/// the fraction of window pairs sharing a pattern.
pub fn symbolic_correlation(counts: &PatternCounts) -> Result<f64> {
    let n = counts.require_pairs()?;
    let matches: f64 = counts
        .counts
        .iter()
        .map(|&c| c as f64 * (c as f64 - 1.0))
        .sum();
    Ok(matches / (n * (n - 1.0)))
}

/// `D̂₂(𝒢) = Σ_π p̂_𝒢(π)² - S_n^d`.
pub fn d2_statistic(counts: &PatternCounts, partition: &Partition) -> Result<f64> {
    check_dims(counts, partition)?;
    counts.require_pairs()?;
    let grouped = grouped_frequencies(counts, partition)?;
    let symmetrized: f64 = grouped
        .group_means
        .iter()
        .zip(partition.groups())
        .map(|(m, g)| g.len() as f64 * m * m)
        .sum();
    Ok(symmetrized - symbolic_correlation(counts)?)
}

/// Kernel `h(x, y) = Σ_G 𝟙{x, y ∈ G} / |G| - 𝟙{x = y}` on pattern ids.
pub fn kernel_h(x: u32, y: u32, partition: &Partition) -> f64 {
    let gx = partition.group_of(x);
    let shared = if gx == partition.group_of(y) {
        1.0 / partition.groups()[gx].len() as f64
    } else {
        0.0
    };
    shared - if x == y { 1.0 } else { 0.0 }
}

/// `U_n^d = n⁻² Σ_{k₁ ≠ k₂} h(Π(X_{k₁}), Π(X_{k₂}))` over ordered pairs.
pub fn u_statistic(counts: &PatternCounts, partition: &Partition) -> Result<f64> {
    check_dims(counts, partition)?;
    let n = counts.require_pairs()?;
    let within: f64 = partition
        .groups()
        .iter()
        .map(|g| {
            let ng: f64 = g.iter().map(|&id| counts.counts[id as usize] as f64).sum();
            (ng * ng - ng) / g.len() as f64
        })
        .sum();
    let matches: f64 = counts
        .counts
        .iter()
        .map(|&c| c as f64 * (c as f64 - 1.0))
        .sum();
    Ok((within - matches) / (n * n))
}

pub(crate) fn check_probability_vector(p: &[f64], expected_len: usize, tol: f64) -> Result<()> {
    if p.len() != expected_len {
        return Err(Error::NotAProbabilityVector(format!(
            "length {} (expected {expected_len})",
            p.len()
        )));
    }
    if let Some(v) = p.iter().find(|v| !v.is_finite() || **v < 0.0) {
        return Err(Error::NotAProbabilityVector(format!("entry {v}")));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > tol {
        return Err(Error::NotAProbabilityVector(format!("sums to {total}")));
    }
    Ok(())
}

/// Population asymmetry `θ = Σ_G P(G)² / |G| - Σ_π p(π)²`; non-positive,
/// zero exactly when `p` is constant within every group.
pub fn theta(probabilities: &[f64], partition: &Partition) -> Result<f64> {
    check_probability_vector(probabilities, partition.num_patterns(), 1e-9)?;
    let grouped: f64 = partition
        .groups()
        .iter()
        .map(|g| {
            let mass: f64 = g.iter().map(|&id| probabilities[id as usize]).sum();
            mass * mass / g.len() as f64
        })
        .sum();
    let squares: f64 = probabilities.iter().map(|p| p * p).sum();
    Ok(grouped - squares)
}
