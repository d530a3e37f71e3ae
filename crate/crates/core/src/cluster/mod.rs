//! Density-based clustering of scaled feature matrices.

mod dendrogram;
pub mod hdbscan;
mod silhouette;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use dendrogram::{export_dendrogram, Dendrogram, DendrogramEdge, DendrogramNode};
pub use hdbscan::hdbscan;
pub use silhouette::{silhouette, Silhouette};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterParams {
    pub min_cluster_size: usize,
    /// Defaults to `min_cluster_size` when unset.
    pub min_samples: Option<usize>,
}

impl Default for ClusterParams {
    fn default() -> Self {
        ClusterParams {
            min_cluster_size: 250,
            min_samples: None,
        }
    }
}

impl ClusterParams {
    pub fn new(min_cluster_size: usize) -> Self {
        ClusterParams {
            min_cluster_size,
            min_samples: None,
        }
    }

    pub fn min_samples(&self) -> usize {
        self.min_samples.unwrap_or(self.min_cluster_size)
    }

    pub fn check(&self) -> Result<()> {
        if self.min_cluster_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "min_cluster_size must be at least 2, got {}",
                self.min_cluster_size
            )));
        }
        if self.min_samples() < 1 {
            return Err(Error::InvalidConfig("min_samples must be at least 1".into()));
        }
        Ok(())
    }
}

/// One row of the condensed tree. Ids below `n_points` are points; the
/// root cluster is `n_points`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CondensedEdge {
    pub parent: usize,
    pub child: usize,
    #[serde(with = "lambda_serde")]
    pub lambda: f64,
    pub child_size: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ClusterResult {
    pub n_points: usize,
    /// Per row: -1 for noise, otherwise 0..K-1.
    pub labels: Vec<i32>,
    /// Stability of each selected cluster, in label order.
    pub stabilities: Vec<f64>,
    /// Condensed-tree id of each selected cluster, in label order.
    pub cluster_nodes: Vec<usize>,
    /// Stability of every condensed cluster, indexed by `id - n_points`.
    pub all_stabilities: Vec<f64>,
    pub condensed_tree: Vec<CondensedEdge>,
    pub mst_weight: f64,
}

impl ClusterResult {
    pub fn n_clusters(&self) -> usize {
        self.cluster_nodes.len()
    }

    pub fn n_noise(&self) -> usize {
        self.labels.iter().filter(|&&l| l < 0).count()
    }

    pub fn cluster_sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.n_clusters()];
        for &l in self.labels.iter().filter(|&&l| l >= 0) {
            sizes[l as usize] += 1;
        }
        sizes
    }

    /// Stability of the cluster a row belongs to, or 0 for noise.
    pub fn row_stability(&self, row: usize) -> f64 {
        match self.labels[row] {
            l if l >= 0 => self.stabilities[l as usize],
            _ => 0.0,
        }
    }
}

/// Cluster count and coverage for one `min_cluster_size` setting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub min_cluster_size: usize,
    pub n_clusters: usize,
    pub n_noise: usize,
    pub coverage: f64,
}

/// Runs the clusterer once per `min_cluster_size` value. Settings larger
/// than the matrix are reported as zero clusters with zero coverage.
pub fn sweep(matrix: &[Vec<f64>], sizes: &[usize], min_samples: Option<usize>) -> Result<Vec<SweepRow>> {
    hdbscan::check_matrix(matrix)?;
    let n = matrix.len();
    sizes
        .iter()
        .map(|&mcs| {
            let params = ClusterParams {
                min_cluster_size: mcs,
                min_samples,
            };
            params.check()?;
            if n < mcs.max(params.min_samples()) {
                return Ok(SweepRow {
                    min_cluster_size: mcs,
                    n_clusters: 0,
                    n_noise: n,
                    coverage: 0.0,
                });
            }
            let r = hdbscan(matrix, &params)?;
            Ok(SweepRow {
                min_cluster_size: mcs,
                n_clusters: r.n_clusters(),
                n_noise: r.n_noise(),
                coverage: if n == 0 {
                    0.0
                } else {
                    (n - r.n_noise()) as f64 / n as f64
                },
            })
        })
        .collect()
}

/// Parses `a..b:step` (inclusive bounds, step defaults to 1).
pub fn parse_range(spec: &str) -> Result<Vec<usize>> {
    let bad = || Error::InvalidConfig(format!("expected a..b[:step], got {spec:?}"));
    let (range, step) = match spec.split_once(':') {
        Some((r, s)) => (r, s.trim().parse::<usize>().map_err(|_| bad())?),
        None => (spec, 1),
    };
    let (a, b) = range.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if step == 0 || a > b {
        return Err(bad());
    }
    Ok((a..=b).step_by(step).collect())
}

/// Infinite lambdas are written as the string `"inf"`.
pub(crate) mod lambda_serde {
    use serde::{de, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_finite() {
            s.serialize_f64(*v)
        } else {
            s.serialize_str("inf")
        }
    }

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Str(String),
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Str(s) if s == "inf" => Ok(f64::INFINITY),
            Repr::Str(s) => Err(de::Error::custom(format!("invalid lambda {s:?}"))),
        }
    }
}
