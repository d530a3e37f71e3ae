//! File-based pipeline stages.
//!
//! Every stage reads input files, writes its artifacts into an output
//! directory and embeds a configuration fingerprint: a SHA-256 over the
//! stage name, the settings that influence the stage and the content of
//! every input file. Fixed-schema outputs (CSV and canonical NDJSON) carry
//! the fingerprint in a `<stage>.manifest.json` sidecar instead. When a
//! stage fails, every file it wrote is removed again.

use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use sha2::{Digest, Sha256};
use walkdir::WalkDir;

use crate::analysis::analyze;
use crate::cluster::{export_dendrogram, hdbscan, silhouette, sweep, ClusterParams};
use crate::error::{Error, Result};
use crate::features::{extract_features, fit_scaler, FeatureManifest, FeatureMatrix, Scaler};
use crate::geometry::Tolerance;
use crate::graph::{build_graphs, GraphDocument};
use crate::ingest::{filter_corpus, json, parse_workbook, DocumentFormat, ParseMode};
use crate::model::{Dashboard, DashboardGraphs};
use crate::report::{lint_corpus, tally, LintFinding};

pub const DASHBOARDS_FILE: &str = "dashboards.ndjson";
pub const GRAPHS_DIR: &str = "graphs";
pub const ANALYSIS_FILE: &str = "analysis.ndjson";
pub const FEATURES_FILE: &str = "features.csv";
pub const SCALER_FILE: &str = "scaler.json";
pub const SCALED_FILE: &str = "features_scaled.csv";
pub const CLUSTERS_FILE: &str = "clusters.csv";
pub const TREE_FILE: &str = "tree.json";
pub const SILHOUETTE_FILE: &str = "silhouette.json";
pub const SWEEP_FILE: &str = "sweep.csv";
pub const SUMMARY_FILE: &str = "summary.json";
pub const LINT_FILE: &str = "lint.ndjson";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum InputFormat {
    #[default]
    Auto,
    Xml,
    Json,
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub format: InputFormat,
    pub tolerance: Tolerance,
    pub min_charts: usize,
    pub mode: ParseMode,
    pub manifest: FeatureManifest,
    pub cluster: ClusterParams,
    /// `min_cluster_size` grid; replaces the single clustering run when set.
    pub sweep: Option<Vec<usize>>,
    /// Also write CSV tables next to the report summary.
    pub tables: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            format: InputFormat::Auto,
            tolerance: Tolerance::default(),
            min_charts: 2,
            mode: ParseMode::Strict,
            manifest: FeatureManifest::default(),
            cluster: ClusterParams::default(),
            sweep: None,
            tables: false,
        }
    }
}

impl PipelineConfig {
    fn ingest_settings(&self) -> Value {
        json!({
            "format": self.format,
            "lenient": self.mode == ParseMode::Lenient,
            "tolerance": self.tolerance.0,
        })
    }
}

/// An input file and its bytes.
#[derive(Debug, Clone)]
pub struct Source {
    pub path: PathBuf,
    pub bytes: Vec<u8>,
}

fn is_input_file(path: &Path) -> bool {
    let name = path.file_name().and_then(|n| n.to_str()).unwrap_or_default();
    if name.ends_with(".manifest.json") || name.starts_with('.') {
        return false;
    }
    matches!(
        path.extension().and_then(|e| e.to_str()),
        Some("xml" | "twb" | "json" | "ndjson")
    )
}

fn walk(dir: &Path, out: &mut Vec<PathBuf>) -> Result<()> {
    for entry in WalkDir::new(dir).sort_by_file_name() {
        let entry = entry.map_err(|e| {
            let path = e.path().unwrap_or(dir).to_path_buf();
            Error::io(path, e.into())
        })?;
        if entry.file_type().is_file() && is_input_file(entry.path()) {
            out.push(entry.into_path());
        }
    }
    Ok(())
}

/// Reads the given files, and every input file below the given
/// directories in sorted path order.
pub fn read_sources(inputs: &[PathBuf]) -> Result<Vec<Source>> {
    let mut paths = Vec::new();
    for input in inputs {
        if input.is_dir() {
            walk(input, &mut paths)?;
        } else {
            paths.push(input.clone());
        }
    }
    if paths.is_empty() {
        return Err(Error::InvalidConfig("no input files".into()));
    }
    paths
        .into_iter()
        .map(|path| {
            let bytes = fs::read(&path).map_err(|e| Error::io(&path, e))?;
            Ok(Source { path, bytes })
        })
        .collect()
}

/// Hash of a stage name, its settings and the content of its inputs.
pub fn fingerprint(stage: &str, settings: &Value, sources: &[Source]) -> String {
    let mut h = Sha256::new();
    h.update(stage.as_bytes());
    h.update([0]);
    h.update(settings.to_string().as_bytes());
    for s in sources {
        h.update([0]);
        h.update(Sha256::digest(&s.bytes));
    }
    hex::encode(h.finalize())
}

/// Files written by a stage. Unless committed, they are deleted on drop.
pub struct Artifacts {
    root: PathBuf,
    written: Vec<PathBuf>,
    committed: bool,
}

impl Artifacts {
    pub fn new(root: impl Into<PathBuf>) -> Result<Self> {
        let root = root.into();
        fs::create_dir_all(&root).map_err(|e| Error::io(&root, e))?;
        Ok(Artifacts {
            root,
            written: Vec::new(),
            committed: false,
        })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn path(&self, rel: impl AsRef<Path>) -> PathBuf {
        self.root.join(rel)
    }

    pub fn write(&mut self, rel: impl AsRef<Path>, bytes: &[u8]) -> Result<PathBuf> {
        let path = self.root.join(rel);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| Error::io(parent, e))?;
        }
        self.written.push(path.clone());
        fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    fn write_json<T: Serialize>(&mut self, rel: impl AsRef<Path>, value: &T) -> Result<PathBuf> {
        let mut text = serde_json::to_string_pretty(value)?;
        text.push('\n');
        self.write(rel, text.as_bytes())
    }

    fn write_sidecar(&mut self, stage: &str, fingerprint: &str, extra: Value) -> Result<PathBuf> {
        let mut doc = json!({ "stage": stage, "fingerprint": fingerprint });
        if let (Some(d), Value::Object(e)) = (doc.as_object_mut(), extra) {
            d.extend(e);
        }
        self.write_json(format!("{stage}.manifest.json"), &doc)
    }

    pub fn written(&self) -> &[PathBuf] {
        &self.written
    }

    pub fn commit(mut self) -> Vec<PathBuf> {
        self.committed = true;
        std::mem::take(&mut self.written)
    }
}

impl Drop for Artifacts {
    fn drop(&mut self) {
        if !self.committed {
            for p in &self.written {
                let _ = fs::remove_file(p);
            }
        }
    }
}

enum Parsed {
    Dashboards(Vec<Dashboard>),
    Graphs(Box<DashboardGraphs>),
}

fn parse_source(src: &Source, cfg: &PipelineConfig) -> Result<Parsed> {
    let ext = src.path.extension().and_then(|e| e.to_str()).unwrap_or_default();
    let format = match cfg.format {
        InputFormat::Xml => DocumentFormat::Xml,
        InputFormat::Json => DocumentFormat::Json,
        InputFormat::Auto if ext == "ndjson" => DocumentFormat::Json,
        InputFormat::Auto => DocumentFormat::from_path(&src.path)
            .ok_or_else(|| Error::InvalidConfig(format!("cannot infer document format of {}", src.path.display())))?,
    };
    if format == DocumentFormat::Xml {
        return Ok(Parsed::Dashboards(
            parse_workbook(&src.bytes, format, cfg.mode)?.dashboards,
        ));
    }
    let text = std::str::from_utf8(&src.bytes).map_err(|_| Error::schema("document", "input is not valid UTF-8"))?;
    if ext == "ndjson" {
        let dashboards = json::parse_ndjson(text)?;
        for d in &dashboards {
            check_dashboard(d)?;
        }
        return Ok(Parsed::Dashboards(dashboards));
    }
    let value: Value = serde_json::from_str(text).map_err(|e| json::map_json_error(e, 0))?;
    if value.get("dashboard_id").is_some() && value.get("nodes").is_some() {
        let doc: GraphDocument = serde_json::from_value(value)?;
        return Ok(Parsed::Graphs(Box::new(doc.into_graphs()?)));
    }
    Ok(Parsed::Dashboards(
        parse_workbook(&src.bytes, format, cfg.mode)?.dashboards,
    ))
}

fn check_dashboard(d: &Dashboard) -> Result<()> {
    let violations = crate::model::validate(d);
    if violations.is_empty() {
        Ok(())
    } else {
        Err(Error::schema(format!("dashboard[{}]", d.id), violations.join("; ")))
    }
}

fn parse_all(sources: &[Source], cfg: &PipelineConfig) -> Result<Vec<Parsed>> {
    let parsed: Vec<Result<Parsed>> = sources
        .par_iter()
        .map(|s| parse_source(s, cfg).map_err(|e| e.in_file(&s.path)))
        .collect();
    parsed.into_iter().collect()
}

fn check_unique<'a>(ids: impl IntoIterator<Item = &'a str>) -> Result<()> {
    let mut seen = BTreeSet::new();
    for id in ids {
        if !seen.insert(id) {
            return Err(Error::schema(
                format!("dashboard[{id}]"),
                "duplicate dashboard id across inputs",
            ));
        }
    }
    Ok(())
}

/// Loads dashboards from workbook, canonical JSON and NDJSON inputs.
pub fn load_dashboards(sources: &[Source], cfg: &PipelineConfig) -> Result<Vec<Dashboard>> {
    let mut out = Vec::new();
    for (src, p) in sources.iter().zip(parse_all(sources, cfg)?) {
        match p {
            Parsed::Dashboards(ds) => out.extend(ds),
            Parsed::Graphs(_) => {
                return Err(Error::InvalidConfig(format!(
                    "{} is a graph document; expected dashboards",
                    src.path.display()
                )))
            }
        }
    }
    check_unique(out.iter().map(|d| d.id.as_str()))?;
    Ok(out)
}

/// Loads graph documents, building graphs for any dashboard inputs.
pub fn load_graphs(sources: &[Source], cfg: &PipelineConfig) -> Result<Vec<DashboardGraphs>> {
    let mut pending: Vec<(usize, Dashboard)> = Vec::new();
    let mut slots: Vec<Option<DashboardGraphs>> = Vec::new();
    for p in parse_all(sources, cfg)? {
        match p {
            Parsed::Graphs(g) => slots.push(Some(*g)),
            Parsed::Dashboards(ds) => {
                for d in ds {
                    pending.push((slots.len(), d));
                    slots.push(None);
                }
            }
        }
    }
    let built: Vec<(usize, Result<DashboardGraphs>)> = pending
        .par_iter()
        .map(|(i, d)| (*i, build_graphs(d, cfg.tolerance)))
        .collect();
    for (i, g) in built {
        slots[i] = Some(g?);
    }
    let graphs: Vec<DashboardGraphs> = slots.into_iter().flatten().collect();
    check_unique(graphs.iter().map(|g| g.dashboard_id.as_str()))?;
    Ok(graphs)
}

fn load_matrix(sources: &[Source], what: &str) -> Result<FeatureMatrix> {
    match sources {
        [src] => FeatureMatrix::read_csv(src.bytes.as_slice(), false).map_err(|e| e.in_file(&src.path)),
        _ => Err(Error::InvalidConfig(format!("{what} takes exactly one feature CSV"))),
    }
}

/// File name for a dashboard's graph document.
pub fn graph_file_name(dashboard_id: &str) -> String {
    let stem: String = dashboard_id
        .chars()
        .map(|c| {
            if c.is_ascii_alphanumeric() || "-_.".contains(c) {
                c
            } else {
                '_'
            }
        })
        .collect();
    format!("{stem}.json")
}

fn ndjson<T: Serialize>(items: &[T]) -> Result<Vec<u8>> {
    let mut out = Vec::new();
    for item in items {
        serde_json::to_writer(&mut out, item)?;
        out.push(b'\n');
    }
    Ok(out)
}

pub fn parse_stage(cfg: &PipelineConfig, inputs: &[PathBuf], art: &mut Artifacts) -> Result<()> {
    let sources = read_sources(inputs)?;
    let settings = json!({
        "format": cfg.format,
        "lenient": cfg.mode == ParseMode::Lenient,
        "min_charts": cfg.min_charts,
    });
    let fp = fingerprint("parse", &settings, &sources);
    let all = load_dashboards(&sources, cfg)?;
    let n_input = all.len();
    let kept = filter_corpus(all, cfg.min_charts);
    let mut out = Vec::new();
    for d in &kept {
        out.extend(json::to_json(d).as_bytes());
        out.push(b'\n');
    }
    art.write(DASHBOARDS_FILE, &out)?;
    art.write_sidecar(
        "parse",
        &fp,
        json!({ "min_charts": cfg.min_charts, "dashboards_read": n_input, "dashboards_kept": kept.len() }),
    )?;
    Ok(())
}

pub fn graph_stage(cfg: &PipelineConfig, inputs: &[PathBuf], art: &mut Artifacts) -> Result<()> {
    let sources = read_sources(inputs)?;
    let fp = fingerprint("graph", &cfg.ingest_settings(), &sources);
    let graphs = load_graphs(&sources, cfg)?;
    let mut names = BTreeSet::new();
    for g in &graphs {
        if !names.insert(graph_file_name(&g.dashboard_id)) {
            return Err(Error::schema(
                format!("dashboard[{}]", g.dashboard_id),
                "dashboard ids collide after file-name sanitizing",
            ));
        }
    }
    let dir = art.path(GRAPHS_DIR);
    if dir.is_dir() {
        for entry in fs::read_dir(&dir).map_err(|e| Error::io(&dir, e))? {
            let p = entry.map_err(|e| Error::io(&dir, e))?.path();
            if p.extension().is_some_and(|e| e == "json") {
                fs::remove_file(&p).map_err(|e| Error::io(&p, e))?;
            }
        }
    }
    for g in &graphs {
        let mut doc = GraphDocument::from(g);
        doc.fingerprint = Some(fp.clone());
        art.write_json(Path::new(GRAPHS_DIR).join(graph_file_name(&g.dashboard_id)), &doc)?;
    }
    Ok(())
}

pub fn analyze_stage(cfg: &PipelineConfig, inputs: &[PathBuf], art: &mut Artifacts) -> Result<()> {
    let sources = read_sources(inputs)?;
    let fp = fingerprint("analyze", &cfg.ingest_settings(), &sources);
    let graphs = load_graphs(&sources, cfg)?;
    let analyses: Vec<_> = graphs
        .par_iter()
        .map(|g| {
            let mut a = analyze(g);
            a.fingerprint = Some(fp.clone());
            a
        })
        .collect();
    art.write(ANALYSIS_FILE, &ndjson(&analyses)?)?;
    Ok(())
}

pub fn features_stage(cfg: &PipelineConfig, inputs: &[PathBuf], art: &mut Artifacts) -> Result<()> {
    cfg.manifest.check()?;
    let sources = read_sources(inputs)?;
    let mut settings = cfg.ingest_settings();
    settings["manifest"] = json!(cfg.manifest);
    let fp = fingerprint("features", &settings, &sources);
    let graphs = load_graphs(&sources, cfg)?;
    let rows = graphs
        .par_iter()
        .map(|g| extract_features(g, &cfg.manifest))
        .collect::<Vec<_>>()
        .into_iter()
        .collect::<Result<Vec<_>>>()?;
    let matrix = FeatureMatrix {
        manifest: cfg.manifest.clone(),
        rows,
    };
    let mut csv = Vec::new();
    matrix.write_csv(&mut csv)?;
    art.write(FEATURES_FILE, &csv)?;
    art.write_sidecar(
        "features",
        &fp,
        json!({ "manifest": cfg.manifest, "rows": matrix.rows.len() }),
    )?;
    Ok(())
}

pub fn fit_scaler_stage(inputs: &[PathBuf], art: &mut Artifacts) -> Result<()> {
    let sources = read_sources(inputs)?;
    let fp = fingerprint("fit-scaler", &json!({}), &sources);
    let matrix = load_matrix(&sources, "fit-scaler")?;
    let mut scaler = fit_scaler(&matrix.rows, &matrix.manifest)?;
    scaler.fingerprint = Some(fp);
    art.write_json(SCALER_FILE, &scaler)?;
    Ok(())
}

pub fn scale_stage(inputs: &[PathBuf], scaler_path: &Path, art: &mut Artifacts) -> Result<()> {
    let mut sources = read_sources(inputs)?;
    let matrix = load_matrix(&sources, "scale")?;
    let scaler_bytes = fs::read(scaler_path).map_err(|e| Error::io(scaler_path, e))?;
    let scaler: Scaler = serde_json::from_slice(&scaler_bytes).map_err(|e| Error::from(e).in_file(scaler_path))?;
    sources.push(Source {
        path: scaler_path.to_path_buf(),
        bytes: scaler_bytes,
    });
    let fp = fingerprint("scale", &json!({}), &sources);
    let scaled = scaler.transform(&matrix)?;
    let mut csv = Vec::new();
    scaled.write_csv(&mut csv)?;
    art.write(SCALED_FILE, &csv)?;
    art.write_sidecar("scale", &fp, json!({ "rows": scaled.rows.len() }))?;
    Ok(())
}

#[derive(Debug, Serialize)]
struct SilhouetteDoc {
    n_clusters: usize,
    n_noise: usize,
    overall: Option<f64>,
    per_cluster: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    note: Option<String>,
    fingerprint: String,
}

pub fn cluster_stage(cfg: &PipelineConfig, inputs: &[PathBuf], art: &mut Artifacts) -> Result<()> {
    cfg.cluster.check()?;
    let sources = read_sources(inputs)?;
    let settings = json!({
        "min_cluster_size": cfg.cluster.min_cluster_size,
        "min_samples": cfg.cluster.min_samples(),
        "sweep": cfg.sweep,
    });
    let fp = fingerprint("cluster", &settings, &sources);
    let matrix = load_matrix(&sources, "cluster")?;
    let values = matrix.values();

    if let Some(sizes) = &cfg.sweep {
        let rows = sweep(&values, sizes, cfg.cluster.min_samples)?;
        let mut w = csv::Writer::from_writer(Vec::new());
        for r in &rows {
            w.serialize(r)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::io(SWEEP_FILE, e.into_error()))?;
        art.write(SWEEP_FILE, &bytes)?;
        art.write_sidecar(
            "sweep",
            &fp,
            json!({ "min_samples": cfg.cluster.min_samples, "settings": sizes }),
        )?;
        return Ok(());
    }

    let result = hdbscan(&values, &cfg.cluster)?;
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["dashboard_id", "label", "stability"])?;
    for (i, row) in matrix.rows.iter().enumerate() {
        w.write_record([
            row.dashboard_id.as_str(),
            &result.labels[i].to_string(),
            &result.row_stability(i).to_string(),
        ])?;
    }
    let bytes = w.into_inner().map_err(|e| Error::io(CLUSTERS_FILE, e.into_error()))?;
    art.write(CLUSTERS_FILE, &bytes)?;

    let mut tree = export_dendrogram(&result);
    tree.fingerprint = Some(fp.clone());
    art.write_json(TREE_FILE, &tree)?;

    let sil = match silhouette(&values, &result.labels) {
        Ok(s) => SilhouetteDoc {
            n_clusters: result.n_clusters(),
            n_noise: result.n_noise(),
            overall: Some(s.overall),
            per_cluster: s.per_cluster,
            note: None,
            fingerprint: fp.clone(),
        },
        Err(e @ Error::FewerThanTwoClusters(_)) => SilhouetteDoc {
            n_clusters: result.n_clusters(),
            n_noise: result.n_noise(),
            overall: None,
            per_cluster: Vec::new(),
            note: Some(e.to_string()),
            fingerprint: fp.clone(),
        },
        Err(e) => return Err(e),
    };
    art.write_json(SILHOUETTE_FILE, &sil)?;
    art.write_sidecar(
        "cluster",
        &fp,
        json!({
            "min_cluster_size": cfg.cluster.min_cluster_size,
            "min_samples": cfg.cluster.min_samples(),
            "n_clusters": result.n_clusters(),
            "n_noise": result.n_noise(),
            "cluster_sizes": result.cluster_sizes(),
        }),
    )?;
    Ok(())
}

pub fn report_stage(cfg: &PipelineConfig, inputs: &[PathBuf], art: &mut Artifacts) -> Result<()> {
    let sources = read_sources(inputs)?;
    let mut settings = cfg.ingest_settings();
    settings["tables"] = json!(cfg.tables);
    let fp = fingerprint("report", &settings, &sources);
    let graphs = load_graphs(&sources, cfg)?;
    let tallies: Vec<_> = graphs.par_chunks(64).map(tally).collect();
    let mut total = crate::report::CorpusTally::default();
    for t in &tallies {
        total.merge(t);
    }
    let mut summary = total.summarize()?;
    summary.fingerprint = Some(fp.clone());
    art.write_json(SUMMARY_FILE, &summary)?;
    if cfg.tables {
        let mut buf = Vec::new();
        summary.write_block_table(&mut buf)?;
        art.write("block_distribution.csv", &buf)?;
        let mut buf = Vec::new();
        summary.write_pattern_table(&mut buf)?;
        art.write("clique_patterns.csv", &buf)?;
        let mut buf = Vec::new();
        summary.write_edge_class_table(&mut buf)?;
        art.write("edge_classes.csv", &buf)?;
        art.write_sidecar("report", &fp, json!({ "dashboards": summary.n_dashboards }))?;
    }
    Ok(())
}

pub fn lint_stage(cfg: &PipelineConfig, inputs: &[PathBuf], art: &mut Artifacts) -> Result<Vec<LintFinding>> {
    let sources = read_sources(inputs)?;
    let fp = fingerprint("lint", &cfg.ingest_settings(), &sources);
    let graphs = load_graphs(&sources, cfg)?;
    let findings = lint_corpus(&graphs);
    art.write(LINT_FILE, &ndjson(&findings)?)?;
    art.write_sidecar(
        "lint",
        &fp,
        json!({ "dashboards": graphs.len(), "findings": findings.len() }),
    )?;
    Ok(findings)
}

/// Runs every stage in order, each reading the previous stage's files.
pub fn run_all(cfg: &PipelineConfig, inputs: &[PathBuf], art: &mut Artifacts) -> Result<Vec<LintFinding>> {
    let at = |rel: &str| vec![art.path(rel)];
    let (dashboards, graphs, features, scaled) =
        (at(DASHBOARDS_FILE), at(GRAPHS_DIR), at(FEATURES_FILE), at(SCALED_FILE));
    let scaler = art.path(SCALER_FILE);
    parse_stage(cfg, inputs, art)?;
    graph_stage(cfg, &dashboards, art)?;
    analyze_stage(cfg, &graphs, art)?;
    features_stage(cfg, &graphs, art)?;
    fit_scaler_stage(&features, art)?;
    scale_stage(&features, &scaler, art)?;
    cluster_stage(cfg, &scaled, art)?;
    report_stage(cfg, &graphs, art)?;
    lint_stage(cfg, &graphs, art)
}
