use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use dashgraph::cluster::{parse_range, ClusterParams};
use dashgraph::features::FeatureManifest;
use dashgraph::geometry::Tolerance;
use dashgraph::ingest::ParseMode;
use dashgraph::pipeline::{self, Artifacts, InputFormat, PipelineConfig};
use dashgraph::report::{LintFinding, Severity};
use dashgraph::{Error, Result};

/// Dashboard block/connection graphs: parse, build graphs, analyze,
/// extract features, cluster, report and lint.
#[derive(Debug, Parser)]
#[command(name = "dashgraph", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse workbook XML or dashboard JSON into canonical NDJSON.
    Parse(Common),
    /// Build adjacency and interaction graphs, one JSON file per dashboard.
    Graph(Common),
    /// Degree, clique and shortest-path statistics per dashboard.
    Analyze(Common),
    /// Write the raw feature matrix CSV.
    Features(FeatureArgs),
    /// Fit a standard scaler on a feature CSV.
    FitScaler(Common),
    /// Apply a fitted scaler to a feature CSV.
    Scale(ScaleArgs),
    /// Cluster a (scaled) feature CSV with HDBSCAN.
    Cluster(ClusterArgs),
    /// Corpus summary statistics.
    Report(ReportArgs),
    /// Report graph-structure findings; exit 1 when warnings are present.
    Lint(Common),
    /// Run every stage in order into one output directory.
    Run(RunArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum FormatArg {
    Auto,
    Xml,
    Json,
}

#[derive(Debug, Args)]
struct Common {
    /// Input files or directories (directories are read recursively).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    /// Output directory.
    #[arg(short, long, env = "DASHGRAPH_OUT", default_value = "out")]
    out: PathBuf,
    /// Document format; `auto` picks by file extension.
    #[arg(long, env = "DASHGRAPH_FORMAT", value_enum, default_value = "auto")]
    format: FormatArg,
    /// Adjacency tolerance in pixels.
    #[arg(long, env = "DASHGRAPH_TOLERANCE", default_value_t = 10)]
    tolerance: u32,
    /// Keep dashboards with at least this many charts (parse stage).
    #[arg(long, env = "DASHGRAPH_MIN_CHARTS", default_value_t = 2)]
    min_charts: usize,
    /// Map unknown zone kinds to multimedia blocks instead of failing.
    #[arg(long, env = "DASHGRAPH_LENIENT")]
    lenient: bool,
    /// Worker threads; defaults to the number of available cores.
    #[arg(short, long, env = "DASHGRAPH_JOBS")]
    jobs: Option<usize>,
}

#[derive(Debug, Args)]
struct ManifestArgs {
    /// Feature manifest JSON (`{"version", "features": [...]}`); defaults to
    /// the built-in 19-feature manifest.
    #[arg(long, env = "DASHGRAPH_MANIFEST")]
    manifest: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct FeatureArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    manifest: ManifestArgs,
}

#[derive(Debug, Args)]
struct ScaleArgs {
    #[command(flatten)]
    common: Common,
    /// Scaler JSON written by `fit-scaler`.
    #[arg(long, env = "DASHGRAPH_SCALER")]
    scaler: PathBuf,
}

#[derive(Debug, Args)]
struct ClusterOpts {
    /// Smallest cluster size.
    #[arg(long, env = "DASHGRAPH_MIN_CLUSTER_SIZE", default_value_t = 250)]
    min_cluster_size: usize,
    /// Neighbour count for core distances; defaults to the minimum cluster size.
    #[arg(long, env = "DASHGRAPH_MIN_SAMPLES")]
    min_samples: Option<usize>,
}

#[derive(Debug, Args)]
struct ClusterArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    cluster: ClusterOpts,
    /// Sensitivity sweep, e.g. `min_cluster_size=50..400:50`; writes sweep.csv.
    #[arg(long)]
    sweep: Option<String>,
}

#[derive(Debug, Args)]
struct ReportArgs {
    #[command(flatten)]
    common: Common,
    /// Also write block, clique-pattern and edge-class CSV tables.
    #[arg(long)]
    tables: bool,
}

#[derive(Debug, Args)]
struct RunArgs {
    #[command(flatten)]
    common: Common,
    #[command(flatten)]
    manifest: ManifestArgs,
    #[command(flatten)]
    cluster: ClusterOpts,
    /// Also write report CSV tables.
    #[arg(long)]
    tables: bool,
}

fn config(common: &Common) -> PipelineConfig {
    PipelineConfig {
        format: match common.format {
            FormatArg::Auto => InputFormat::Auto,
            FormatArg::Xml => InputFormat::Xml,
            FormatArg::Json => InputFormat::Json,
        },
        tolerance: Tolerance(common.tolerance),
        min_charts: common.min_charts,
        mode: if common.lenient {
            ParseMode::Lenient
        } else {
            ParseMode::Strict
        },
        ..PipelineConfig::default()
    }
}

fn load_manifest(args: &ManifestArgs) -> Result<FeatureManifest> {
    let Some(path) = &args.manifest else {
        return Ok(FeatureManifest::default());
    };
    let bytes = std::fs::read(path).map_err(|e| Error::Io {
        path: path.clone(),
        source: e,
    })?;
    let manifest: FeatureManifest = serde_json::from_slice(&bytes)?;
    manifest.check()?;
    Ok(manifest)
}

fn cluster_params(opts: &ClusterOpts) -> ClusterParams {
    ClusterParams {
        min_cluster_size: opts.min_cluster_size,
        min_samples: opts.min_samples,
    }
}

fn parse_sweep(spec: &str) -> Result<Vec<usize>> {
    match spec.split_once('=') {
        Some(("min_cluster_size", range)) => parse_range(range),
        _ => Err(Error::InvalidConfig(format!(
            "sweep must look like min_cluster_size=a..b:step, got {spec:?}"
        ))),
    }
}

fn common(cmd: &Command) -> &Common {
    match cmd {
        Command::Parse(c) | Command::Graph(c) | Command::Analyze(c) | Command::FitScaler(c) | Command::Lint(c) => c,
        Command::Features(a) => &a.common,
        Command::Scale(a) => &a.common,
        Command::Cluster(a) => &a.common,
        Command::Report(a) => &a.common,
        Command::Run(a) => &a.common,
    }
}

/// Runs the command and returns lint findings, if the command produced any.
fn execute(cmd: &Command) -> Result<Option<Vec<LintFinding>>> {
    let c = common(cmd);
    let mut cfg = config(c);
    let mut art = Artifacts::new(&c.out)?;
    let findings = match cmd {
        Command::Parse(_) => pipeline::parse_stage(&cfg, &c.inputs, &mut art).map(|_| None),
        Command::Graph(_) => pipeline::graph_stage(&cfg, &c.inputs, &mut art).map(|_| None),
        Command::Analyze(_) => pipeline::analyze_stage(&cfg, &c.inputs, &mut art).map(|_| None),
        Command::Features(a) => {
            cfg.manifest = load_manifest(&a.manifest)?;
            pipeline::features_stage(&cfg, &c.inputs, &mut art).map(|_| None)
        }
        Command::FitScaler(_) => pipeline::fit_scaler_stage(&c.inputs, &mut art).map(|_| None),
        Command::Scale(a) => pipeline::scale_stage(&c.inputs, &a.scaler, &mut art).map(|_| None),
        Command::Cluster(a) => {
            cfg.cluster = cluster_params(&a.cluster);
            cfg.sweep = a.sweep.as_deref().map(parse_sweep).transpose()?;
            pipeline::cluster_stage(&cfg, &c.inputs, &mut art).map(|_| None)
        }
        Command::Report(a) => {
            cfg.tables = a.tables;
            pipeline::report_stage(&cfg, &c.inputs, &mut art).map(|_| None)
        }
        Command::Lint(_) => pipeline::lint_stage(&cfg, &c.inputs, &mut art).map(Some),
        Command::Run(a) => {
            cfg.manifest = load_manifest(&a.manifest)?;
            cfg.cluster = cluster_params(&a.cluster);
            cfg.tables = a.tables;
            pipeline::run_all(&cfg, &c.inputs, &mut art).map(Some)
        }
    }?;
    art.commit();
    Ok(findings)
}

fn report_error(e: &Error) {
    let doc = serde_json::json!({ "error": { "kind": e.kind(), "message": e.to_string() } });
    eprintln!("{doc}");
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let jobs = common(&cli.command).jobs;
    let pool = match rayon::ThreadPoolBuilder::new().num_threads(jobs.unwrap_or(0)).build() {
        Ok(p) => p,
        Err(e) => {
            report_error(&Error::InvalidConfig(e.to_string()));
            return ExitCode::from(2);
        }
    };
    match pool.install(|| execute(&cli.command)) {
        Ok(Some(findings)) => {
            let mut out = std::io::stdout().lock();
            for f in &findings {
                let _ = writeln!(out, "{}", serde_json::to_string(f).expect("finding serializes"));
            }
            if findings.iter().any(|f| f.severity == Severity::Warning) {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            }
        }
        Ok(None) => ExitCode::SUCCESS,
        Err(e) => {
            report_error(&e);
            ExitCode::from(2)
        }
    }
}
