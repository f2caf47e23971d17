//! Closed-form eigenpairs of the integral operator induced by the kernel
//! `h`, and the centering constant of the limiting law.
//!
//! Restricted to step functions on patterns the operator is the matrix
//! `M[u, v] = h(u, v) p(v)`. Its non-zero spectrum is `-p_i` with
//! multiplicity `|G_i| - 1` for each group `G_i`, where `p_i` is the common
//! (symmetrized) pattern probability inside the group. For a group with
//! members `m_1, ..., m_k` (canonical order) the eigenvectors are
//!
//! ```text
//! g_j = (e_{m_1} + ... + e_{m_j} - j e_{m_{j+1}}) / sqrt(p_i j (j + 1)),   j = 1..k-1
//! ```
//!
//! which are orthonormal under `<u, v> = Σ_π u_π v_π p(π)` and have
//! weighted mean zero.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::estimators::{
    check_probability_vector, grouped_frequencies, kernel_h, symbolic_correlation, PatternCounts,
};
use crate::partitions::Partition;

/// Ingredients of the limiting null law `Σ λ_i (W_i² - 1) + c`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralModel {
    pub t: usize,
    pub eigenvalues: Vec<f64>,
    /// `d! × t`; column `i` holds the coefficients of `g⁽ⁱ⁾` on pattern
    /// indicators.
    #[serde(skip)]
    pub eigenvectors: DMatrix<f64>,
    /// Group owning each eigenvector.
    pub eigen_groups: Vec<usize>,
    pub c_hat: f64,
    /// Within-group mean probabilities `p̂_i = p̂(G_i) / |G_i|`.
    pub p_hat: Vec<f64>,
}

impl SpectralModel {
    /// Eigenvector columns as nested vectors (for verbose reports).
    pub fn eigenvector_columns(&self) -> Vec<Vec<f64>> {
        self.eigenvectors
            .column_iter()
            .map(|c| c.iter().copied().collect())
            .collect()
    }
}

/// Eigenvalues, eigenvector matrix and owning group, given the
/// within-group mean probabilities.
pub fn eigenpairs(
    partition: &Partition,
    group_means: &[f64],
) -> Result<(Vec<f64>, DMatrix<f64>, Vec<usize>)> {
    if group_means.len() != partition.num_groups() {
        return Err(Error::DimensionMismatch(format!(
            "{} group probabilities for {} groups",
            group_means.len(),
            partition.num_groups()
        )));
    }
    let t = partition.degrees();
    let mut values = Vec::with_capacity(t);
    let mut owners = Vec::with_capacity(t);
    let mut vectors = DMatrix::zeros(partition.num_patterns(), t);
    let mut col = 0;
    for (gi, (members, &p)) in partition.groups().iter().zip(group_means).enumerate() {
        if members.len() < 2 {
            continue;
        }
        if !(p > 0.0) {
            return Err(Error::ZeroGroupProbability {
                group: gi,
                size: members.len(),
            });
        }
        for j in 1..members.len() {
            let scale = 1.0 / (p * (j * (j + 1)) as f64).sqrt();
            for &m in &members[..j] {
                vectors[(m as usize, col)] = scale;
            }
            vectors[(members[j] as usize, col)] = -(j as f64) * scale;
            values.push(-p);
            owners.push(gi);
            col += 1;
        }
    }
    Ok((values, vectors, owners))
}

/// Spectral model with plug-in estimates from observed pattern counts.
pub fn build_spectral_model(
    partition: &Partition,
    counts: &PatternCounts,
) -> Result<SpectralModel> {
    let grouped = grouped_frequencies(counts, partition)?;
    let s_n = symbolic_correlation(counts)?;
    let (eigenvalues, eigenvectors, eigen_groups) = eigenpairs(partition, &grouped.group_means)?;
    let c_hat = grouped.group_means.iter().sum::<f64>() - s_n;
    Ok(SpectralModel {
        t: eigenvalues.len(),
        eigenvalues,
        eigenvectors,
        eigen_groups,
        c_hat,
        p_hat: grouped.group_means,
    })
}

/// Matrix `M[u, v] = h(u, v) p(v)` representing the integral operator on
/// pattern step functions.
pub fn operator_matrix(partition: &Partition, probabilities: &[f64]) -> Result<DMatrix<f64>> {
    let k = partition.num_patterns();
    check_probability_vector(probabilities, k, 1e-9)?;
    Ok(DMatrix::from_fn(k, k, |u, v| {
        kernel_h(u as u32, v as u32, partition) * probabilities[v]
    }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::partitions::{
        gaussian_partition, reflection_partition, reversal_partition, singleton_partition,
    };

    fn symmetric_probs(partition: &Partition, weights: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let total: f64 = weights
            .iter()
            .zip(partition.groups())
            .map(|(w, g)| w * g.len() as f64)
            .sum();
        let means: Vec<f64> = weights.iter().map(|w| w / total).collect();
        let per: Vec<f64> = (0..partition.num_patterns() as u32)
            .map(|id| means[partition.group_of(id)])
            .collect();
        (means, per)
    }

    #[test]
    fn setting_a_vectors() {
        let p = gaussian_partition(3).unwrap();
        let (values, vectors, owners) = eigenpairs(&p, &[1.0 / 6.0, 1.0 / 6.0]).unwrap();
        assert_eq!(values, vec![-1.0 / 6.0; 4]);
        // size-2 group {(1,2,3),(3,2,1)} = ids {0,5} comes first canonically
        assert_eq!(owners, vec![0, 1, 1, 1]);
        let s = 1.0 / (2.0f64 / 6.0).sqrt();
        let g1: Vec<f64> = vectors.column(0).iter().copied().collect();
        assert_eq!(g1, vec![s, 0.0, 0.0, 0.0, 0.0, -s]);
        let g3: Vec<f64> = vectors.column(2).iter().copied().collect();
        let s3 = 1.0 / (6.0f64 / 6.0).sqrt();
        assert_eq!(g3, vec![0.0, s3, s3, -2.0 * s3, 0.0, 0.0]);
    }

    #[test]
    fn c_hat_for_uniform_counts() {
        let p = gaussian_partition(3).unwrap();
        let counts = PatternCounts::new(3, vec![1000; 6]).unwrap();
        let m = build_spectral_model(&p, &counts).unwrap();
        let s_n = (6.0 * 1000.0 * 999.0) / (6000.0 * 5999.0);
        assert!((m.c_hat - (2.0 / 6.0 - s_n)).abs() < 1e-15);
        assert!((m.c_hat - 1.0 / 6.0).abs() < 2e-4);
        assert_eq!(m.t, 4);
    }

    #[test]
    fn singleton_partition_is_degenerate() {
        let p = singleton_partition(3).unwrap();
        let counts = PatternCounts::new(3, vec![3; 6]).unwrap();
        let m = build_spectral_model(&p, &counts).unwrap();
        assert_eq!(m.t, 0);
        assert_eq!(m.eigenvectors.ncols(), 0);
    }

    #[test]
    fn unobserved_group_is_rejected() {
        let p = reversal_partition(3).unwrap();
        let counts = PatternCounts::new(3, vec![4, 0, 0, 0, 0, 4]).unwrap();
        assert!(matches!(
            build_spectral_model(&p, &counts),
            Err(Error::ZeroGroupProbability { size: 2, .. })
        ));
    }

    #[test]
    fn eigen_equation_and_orthonormality() {
        let weights = [0.7, 1.3, 0.4, 2.1, 0.9, 1.6, 1.1, 0.5, 1.9, 0.8, 1.2, 0.6];
        for d in 2..=4 {
            for part in [
                reversal_partition(d).unwrap(),
                reflection_partition(d).unwrap(),
                gaussian_partition(d).unwrap(),
            ] {
                let w: Vec<f64> = (0..part.num_groups()).map(|i| weights[i % 12]).collect();
                let (means, per) = symmetric_probs(&part, &w);
                let (values, vectors, _) = eigenpairs(&part, &means).unwrap();
                let op = operator_matrix(&part, &per).unwrap();
                for (i, &lambda) in values.iter().enumerate() {
                    let g = vectors.column(i);
                    let diff = &op * g - g * lambda;
                    assert!(diff.amax() < 1e-10);
                    let mean: f64 = g.iter().zip(&per).map(|(a, b)| a * b).sum();
                    assert!(mean.abs() < 1e-12);
                    for j in 0..values.len() {
                        let h = vectors.column(j);
                        let ip: f64 = (0..per.len()).map(|k| g[k] * h[k] * per[k]).sum();
                        let want = if i == j { 1.0 } else { 0.0 };
                        assert!((ip - want).abs() < 1e-10);
                    }
                }
                let trace: f64 = values.iter().sum();
                assert!((trace - (means.iter().sum::<f64>() - 1.0)).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn operator_rows_vanish_under_symmetry() {
        let part = gaussian_partition(3).unwrap();
        let (_, per) = symmetric_probs(&part, &[2.0, 1.0]);
        let op = operator_matrix(&part, &per).unwrap();
        for r in 0..6 {
            assert!(op.row(r).sum().abs() < 1e-15);
        }
        assert!(operator_matrix(&part, &[0.5; 6]).is_err());
    }
}
