use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::hdbscan::{check_matrix, euclidean};
use crate::error::{Error, Result};

/// Silhouette scores over non-noise rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Silhouette {
    /// Mean score of each cluster, indexed by label.
    pub per_cluster: Vec<f64>,
    pub overall: f64,
    /// Per-row score; `None` for noise rows.
    #[serde(skip)]
    pub samples: Vec<Option<f64>>,
}

/// Computes `s(i) = (b - a) / max(a, b)` for every row with a non-negative
/// label. Members of singleton clusters score 0.
pub fn silhouette(matrix: &[Vec<f64>], labels: &[i32]) -> Result<Silhouette> {
    if matrix.len() != labels.len() {
        return Err(Error::InvalidConfig(format!(
            "{} rows but {} labels",
            matrix.len(),
            labels.len()
        )));
    }
    check_matrix(matrix)?;
    let k = labels
        .iter()
        .filter(|&&l| l >= 0)
        .map(|&l| l as usize + 1)
        .max()
        .unwrap_or(0);
    let mut sizes = vec![0usize; k];
    for &l in labels.iter().filter(|&&l| l >= 0) {
        sizes[l as usize] += 1;
    }
    let present = sizes.iter().filter(|&&s| s > 0).count();
    if present < 2 {
        return Err(Error::FewerThanTwoClusters(present));
    }

    let score = |i: usize| -> Option<f64> {
        let own = usize::try_from(labels[i]).ok()?;
        if sizes[own] == 1 {
            return Some(0.0);
        }
        let mut sums = vec![0.0f64; k];
        for (j, row) in matrix.iter().enumerate() {
            if let Ok(l) = usize::try_from(labels[j]) {
                if j != i {
                    sums[l] += euclidean(&matrix[i], row);
                }
            }
        }
        let a = sums[own] / (sizes[own] - 1) as f64;
        let b = (0..k)
            .filter(|&c| c != own && sizes[c] > 0)
            .map(|c| sums[c] / sizes[c] as f64)
            .fold(f64::INFINITY, f64::min);
        let denom = a.max(b);
        Some(if denom > 0.0 { (b - a) / denom } else { 0.0 })
    };
    let samples: Vec<Option<f64>> = (0..matrix.len()).into_par_iter().map(score).collect();

    let mut totals = vec![0.0f64; k];
    for (i, s) in samples.iter().enumerate() {
        if let Some(s) = s {
            totals[labels[i] as usize] += s;
        }
    }
    let per_cluster = totals
        .iter()
        .zip(&sizes)
        .map(|(t, &s)| if s == 0 { 0.0 } else { t / s as f64 })
        .collect();
    let n_scored = sizes.iter().sum::<usize>() as f64;
    let overall = samples.iter().flatten().sum::<f64>() / n_scored;
    Ok(Silhouette {
        per_cluster,
        overall,
        samples,
    })
}
