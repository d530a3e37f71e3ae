//! Per-dashboard feature vectors and corpus-level standard scaling.

use std::collections::{BTreeMap, BTreeSet};
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::analysis::analyze;
use crate::error::{Error, Result};
use crate::model::{BlockType, DashboardGraphs, EdgeClass};

/// Whether a feature is standard-scaled or passed through.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    /// Counts, degrees, path lengths and clique statistics.
    Measure,
    /// 0/1 presence indicators.
    Flag,
}

const REGISTRY: &[(&str, FeatureKind)] = &[
    ("n_blocks", FeatureKind::Measure),
    ("has_chart", FeatureKind::Flag),
    ("has_text", FeatureKind::Flag),
    ("has_filter", FeatureKind::Flag),
    ("has_legend", FeatureKind::Flag),
    ("has_multimedia", FeatureKind::Flag),
    ("adj_n_edges", FeatureKind::Measure),
    ("adj_mean_degree", FeatureKind::Measure),
    ("int_n_edges", FeatureKind::Measure),
    ("int_mean_degree", FeatureKind::Measure),
    ("int_mean_in_degree", FeatureKind::Measure),
    ("int_mean_out_degree", FeatureKind::Measure),
    ("has_filter_chart_edge", FeatureKind::Flag),
    ("has_legend_chart_edge", FeatureKind::Flag),
    ("has_chart_chart_edge", FeatureKind::Flag),
    ("adj_mean_shortest_path", FeatureKind::Measure),
    ("adj_has_cliques", FeatureKind::Flag),
    ("adj_n_maximal_cliques", FeatureKind::Measure),
    ("adj_mean_clique_size", FeatureKind::Measure),
    // Alternatives for other manifests.
    ("lacks_chart", FeatureKind::Flag),
    ("lacks_text", FeatureKind::Flag),
    ("lacks_filter", FeatureKind::Flag),
    ("lacks_legend", FeatureKind::Flag),
    ("lacks_multimedia", FeatureKind::Flag),
    ("lacks_filter_chart_edge", FeatureKind::Flag),
    ("lacks_legend_chart_edge", FeatureKind::Flag),
    ("lacks_chart_chart_edge", FeatureKind::Flag),
    ("adj_n_components", FeatureKind::Measure),
    ("adj_n_maximal_cliques_all", FeatureKind::Measure),
    ("adj_mean_clique_size_all", FeatureKind::Measure),
];

const DEFAULT_LEN: usize = 19;

pub fn feature_kind(name: &str) -> Option<FeatureKind> {
    REGISTRY.iter().find(|(n, _)| *n == name).map(|(_, k)| *k)
}

/// Names every feature the extractor can produce.
pub fn registered_features() -> impl Iterator<Item = &'static str> {
    REGISTRY.iter().map(|(n, _)| *n)
}

/// Ordered list of feature columns.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeatureManifest {
    pub version: String,
    pub features: Vec<String>,
}

impl Default for FeatureManifest {
    fn default() -> Self {
        FeatureManifest {
            version: "default-19".into(),
            features: REGISTRY[..DEFAULT_LEN].iter().map(|(n, _)| n.to_string()).collect(),
        }
    }
}

impl FeatureManifest {
    pub fn new(version: impl Into<String>, features: Vec<String>) -> Result<Self> {
        let m = FeatureManifest {
            version: version.into(),
            features,
        };
        m.check()?;
        Ok(m)
    }

    pub fn check(&self) -> Result<()> {
        let mut seen = BTreeSet::new();
        for f in &self.features {
            if feature_kind(f).is_none() {
                return Err(Error::UnknownFeature(f.clone()));
            }
            if !seen.insert(f.as_str()) {
                return Err(Error::InvalidConfig(format!("duplicate feature in manifest: {f}")));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.features.len()
    }

    pub fn is_empty(&self) -> bool {
        self.features.is_empty()
    }

    pub fn kinds(&self) -> Vec<FeatureKind> {
        self.features
            .iter()
            .map(|f| feature_kind(f).unwrap_or(FeatureKind::Measure))
            .collect()
    }

    pub fn same_columns(&self, other: &FeatureManifest) -> bool {
        self.features == other.features
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector {
    pub dashboard_id: String,
    pub values: Vec<f64>,
    pub scaled: bool,
}

fn flag(b: bool) -> f64 {
    if b {
        1.0
    } else {
        0.0
    }
}

/// Every registered feature value for one dashboard.
pub fn all_features(graphs: &DashboardGraphs) -> BTreeMap<&'static str, f64> {
    let analysis = analyze(graphs);
    let adj = &analysis.stats.adjacency;
    let int = &analysis.stats.interaction;
    let mut v = BTreeMap::new();
    v.insert("n_blocks", graphs.nodes.len() as f64);
    for (ty, has, lacks) in [
        (BlockType::Chart, "has_chart", "lacks_chart"),
        (BlockType::Text, "has_text", "lacks_text"),
        (BlockType::Filter, "has_filter", "lacks_filter"),
        (BlockType::Legend, "has_legend", "lacks_legend"),
        (BlockType::Multimedia, "has_multimedia", "lacks_multimedia"),
    ] {
        let present = graphs.count(ty) > 0;
        v.insert(has, flag(present));
        v.insert(lacks, flag(!present));
    }
    for (class, has, lacks) in [
        (
            EdgeClass::FilterToChart,
            "has_filter_chart_edge",
            "lacks_filter_chart_edge",
        ),
        (
            EdgeClass::LegendToChart,
            "has_legend_chart_edge",
            "lacks_legend_chart_edge",
        ),
        (
            EdgeClass::ChartToChart,
            "has_chart_chart_edge",
            "lacks_chart_chart_edge",
        ),
    ] {
        let present = graphs.interaction_edges.iter().any(|e| e.edge_class == class);
        v.insert(has, flag(present));
        v.insert(lacks, flag(!present));
    }
    v.insert("adj_n_edges", adj.n_edges as f64);
    v.insert("adj_mean_degree", adj.mean_degree);
    v.insert("int_n_edges", int.n_edges as f64);
    v.insert("int_mean_degree", int.mean_degree);
    v.insert("int_mean_in_degree", int.mean_in_degree);
    v.insert("int_mean_out_degree", int.mean_out_degree);
    v.insert("adj_mean_shortest_path", adj.mean_shortest_path);
    v.insert("adj_has_cliques", flag(adj.n_maximal_cliques_nontrivial > 0));
    v.insert("adj_n_maximal_cliques", adj.n_maximal_cliques_nontrivial as f64);
    v.insert("adj_mean_clique_size", adj.mean_clique_size_nontrivial);
    v.insert("adj_n_components", adj.n_components as f64);
    v.insert("adj_n_maximal_cliques_all", adj.n_maximal_cliques as f64);
    v.insert("adj_mean_clique_size_all", adj.mean_clique_size);
    v
}

/// Raw (unscaled) feature vector in manifest column order.
pub fn extract_features(graphs: &DashboardGraphs, manifest: &FeatureManifest) -> Result<FeatureVector> {
    let all = all_features(graphs);
    let values = manifest
        .features
        .iter()
        .map(|f| {
            all.get(f.as_str())
                .copied()
                .ok_or_else(|| Error::UnknownFeature(f.clone()))
        })
        .collect::<Result<_>>()?;
    Ok(FeatureVector {
        dashboard_id: graphs.dashboard_id.clone(),
        values,
        scaled: false,
    })
}

/// Feature rows sharing one manifest.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub manifest: FeatureManifest,
    pub rows: Vec<FeatureVector>,
}

impl FeatureMatrix {
    pub fn values(&self) -> Vec<Vec<f64>> {
        self.rows.iter().map(|r| r.values.clone()).collect()
    }

    /// Writes the CSV form: `dashboard_id` then one column per feature.
    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let mut header = vec!["dashboard_id".to_string()];
        header.extend(self.manifest.features.iter().cloned());
        w.write_record(&header)?;
        for row in &self.rows {
            let mut record = vec![row.dashboard_id.clone()];
            record.extend(row.values.iter().map(|v| v.to_string()));
            w.write_record(&record)?;
        }
        w.flush().map_err(|e| Error::io("<csv>", e))?;
        Ok(())
    }

    /// Reads the CSV form. Column names must all be registered features.
    pub fn read_csv<R: Read>(input: R, scaled: bool) -> Result<Self> {
        let mut r = csv::Reader::from_reader(input);
        let header = r.headers()?.clone();
        if header.get(0) != Some("dashboard_id") {
            return Err(Error::schema("csv header", "first column must be dashboard_id"));
        }
        let manifest = FeatureManifest::new("csv", header.iter().skip(1).map(str::to_string).collect())?;
        let mut rows = Vec::new();
        for (i, rec) in r.records().enumerate() {
            let rec = rec?;
            let values = rec
                .iter()
                .skip(1)
                .enumerate()
                .map(|(j, s)| {
                    s.parse::<f64>().map_err(|_| {
                        Error::schema(
                            format!("csv row {}, column {}", i + 2, j + 2),
                            format!("not a number: {s}"),
                        )
                    })
                })
                .collect::<Result<Vec<f64>>>()?;
            rows.push(FeatureVector {
                dashboard_id: rec.get(0).unwrap_or_default().to_string(),
                values,
                scaled,
            });
        }
        Ok(FeatureMatrix { manifest, rows })
    }
}

/// Per-column standard scaler. Flag columns pass through untouched.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scaler {
    pub manifest: Vec<String>,
    pub mean: Vec<f64>,
    pub std: Vec<f64>,
    pub constant: Vec<bool>,
    pub scaled: Vec<bool>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
}

/// Fits population mean and standard deviation for each measure column.
///
/// A column whose spread is negligible relative to its magnitude is marked
/// constant; its standard deviation is recorded as 1 and it scales to zero.
pub fn fit_scaler(rows: &[FeatureVector], manifest: &FeatureManifest) -> Result<Scaler> {
    if rows.len() < 2 {
        return Err(Error::EmptyCorpus(format!(
            "fitting a scaler needs at least 2 rows, got {}",
            rows.len()
        )));
    }
    let width = manifest.len();
    if let Some(bad) = rows.iter().find(|r| r.values.len() != width) {
        return Err(mismatch(manifest, bad.values.len()));
    }
    let n = rows.len() as f64;
    let kinds = manifest.kinds();
    let mut scaler = Scaler {
        manifest: manifest.features.clone(),
        mean: vec![0.0; width],
        std: vec![1.0; width],
        constant: vec![false; width],
        scaled: kinds.iter().map(|k| *k == FeatureKind::Measure).collect(),
        fingerprint: None,
    };
    for j in 0..width {
        if !scaler.scaled[j] {
            continue;
        }
        let mean = rows.iter().map(|r| r.values[j]).sum::<f64>() / n;
        let var = rows.iter().map(|r| (r.values[j] - mean).powi(2)).sum::<f64>() / n;
        let std = var.sqrt();
        scaler.mean[j] = mean;
        if std <= 1e-12 * mean.abs().max(1.0) {
            scaler.constant[j] = true;
        } else {
            scaler.std[j] = std;
        }
    }
    Ok(scaler)
}

fn mismatch(manifest: &FeatureManifest, found_len: usize) -> Error {
    Error::ManifestMismatch {
        expected: manifest.features.join(","),
        found: format!("{found_len} columns"),
    }
}

impl Scaler {
    fn check_len(&self, len: usize) -> Result<()> {
        if len == self.manifest.len() {
            Ok(())
        } else {
            Err(Error::ManifestMismatch {
                expected: self.manifest.join(","),
                found: format!("{len} columns"),
            })
        }
    }

    pub fn apply(&self, v: &FeatureVector) -> Result<FeatureVector> {
        self.check_len(v.values.len())?;
        let values = v
            .values
            .iter()
            .enumerate()
            .map(|(j, &x)| {
                if !self.scaled[j] {
                    x
                } else if self.constant[j] {
                    0.0
                } else {
                    (x - self.mean[j]) / self.std[j]
                }
            })
            .collect();
        Ok(FeatureVector {
            dashboard_id: v.dashboard_id.clone(),
            values,
            scaled: true,
        })
    }

    /// Maps scaled values back to raw ones. Constant columns recover their mean.
    pub fn invert(&self, v: &FeatureVector) -> Result<FeatureVector> {
        self.check_len(v.values.len())?;
        let values = v
            .values
            .iter()
            .enumerate()
            .map(|(j, &y)| {
                if self.scaled[j] {
                    y * self.std[j] + self.mean[j]
                } else {
                    y
                }
            })
            .collect();
        Ok(FeatureVector {
            dashboard_id: v.dashboard_id.clone(),
            values,
            scaled: false,
        })
    }

    pub fn transform(&self, matrix: &FeatureMatrix) -> Result<FeatureMatrix> {
        if matrix.manifest.features != self.manifest {
            return Err(Error::ManifestMismatch {
                expected: self.manifest.join(","),
                found: matrix.manifest.features.join(","),
            });
        }
        Ok(FeatureMatrix {
            manifest: matrix.manifest.clone(),
            rows: matrix.rows.iter().map(|r| self.apply(r)).collect::<Result<_>>()?,
        })
    }
}

pub fn apply_scaler(scaler: &Scaler, v: &FeatureVector) -> Result<FeatureVector> {
    scaler.apply(v)
}
