//! Corpus-level descriptive statistics and graph linting.
//!
//! Statistics are accumulated in a [`CorpusTally`] made only of integer
//! counts, so tallies over any partition of a corpus merge into exactly the
//! tally of the whole, and the derived [`CorpusSummary`] is identical.

mod lint;

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet};
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::analysis::{clique_pattern, maximal_cliques, SimpleGraph};
use crate::error::{Error, Result};
use crate::graph::max_possible_interactions;
use crate::model::{BlockType, DashboardGraphs, EdgeClass};

pub use lint::{lint, lint_corpus, LintFinding, Rule, Severity};

/// Interaction edges whose endpoints are also spatially adjacent.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Overlap {
    pub count: usize,
    pub by_class: BTreeMap<EdgeClass, usize>,
}

pub fn interaction_adjacency_overlap(graphs: &DashboardGraphs) -> Overlap {
    let adjacent: BTreeSet<(&str, &str)> = graphs
        .adjacency_edges
        .iter()
        .map(|e| (e.source.as_str(), e.target.as_str()))
        .collect();
    let mut out = Overlap::default();
    for e in &graphs.interaction_edges {
        let key = if e.source <= e.target {
            (e.source.as_str(), e.target.as_str())
        } else {
            (e.target.as_str(), e.source.as_str())
        };
        if adjacent.contains(&key) {
            out.count += 1;
            *out.by_class.entry(e.edge_class).or_insert(0) += 1;
        }
    }
    out
}

/// Exact non-negative fraction, ordered by value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Fraction {
    pub num: u64,
    pub den: u64,
}

fn gcd(mut a: u64, mut b: u64) -> u64 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

impl Fraction {
    pub fn new(num: u64, den: u64) -> Self {
        let g = gcd(num, den).max(1);
        Fraction {
            num: num / g,
            den: den / g,
        }
    }

    pub fn value(self) -> f64 {
        if self.den == 0 {
            0.0
        } else {
            self.num as f64 / self.den as f64
        }
    }
}

impl Ord for Fraction {
    fn cmp(&self, other: &Self) -> Ordering {
        (u128::from(self.num) * u128::from(other.den))
            .cmp(&(u128::from(other.num) * u128::from(self.den)))
            .then(self.den.cmp(&other.den))
    }
}

impl PartialOrd for Fraction {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Min, max, median, mode and mean of a value histogram. The mode is the
/// smallest of the most frequent values; an even-sized median averages the
/// two middle values.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Distribution {
    pub count: u64,
    pub min: f64,
    pub max: f64,
    pub median: f64,
    pub mode: f64,
    pub mean: f64,
}

fn distribution<K: Ord + Copy>(hist: &BTreeMap<K, u64>, value: impl Fn(K) -> f64) -> Option<Distribution> {
    let count: u64 = hist.values().sum();
    if count == 0 {
        return None;
    }
    let nth = |mut i: u64| {
        for (&k, &c) in hist {
            if i < c {
                return value(k);
            }
            i -= c;
        }
        unreachable!("index within histogram")
    };
    let median = if count % 2 == 1 {
        nth(count / 2)
    } else {
        (nth(count / 2 - 1) + nth(count / 2)) / 2.0
    };
    let top = hist.values().copied().max().unwrap_or(0);
    let mode = hist
        .iter()
        .find(|(_, &c)| c == top)
        .map(|(&k, _)| value(k))
        .unwrap_or(0.0);
    let sum: f64 = hist.iter().map(|(&k, &c)| value(k) * c as f64).sum();
    Some(Distribution {
        count,
        min: value(*hist.keys().next()?),
        max: value(*hist.keys().next_back()?),
        median,
        mode,
        mean: sum / count as f64,
    })
}

fn bump<K: Ord>(map: &mut BTreeMap<K, u64>, key: K, by: u64) {
    *map.entry(key).or_insert(0) += by;
}

fn merge_into<K: Ord + Clone>(into: &mut BTreeMap<K, u64>, from: &BTreeMap<K, u64>) {
    for (k, &v) in from {
        bump(into, k.clone(), v);
    }
}

/// Mergeable integer counts over a set of dashboards.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct CorpusTally {
    pub n_dashboards: u64,
    pub block_counts: BTreeMap<BlockType, u64>,
    pub blocks_per_dashboard: BTreeMap<u64, u64>,
    pub chart_type_dashboards: BTreeMap<String, u64>,
    pub n_interactive: u64,
    /// Interaction-edge histogram over interactive dashboards.
    pub interaction_edges: BTreeMap<u64, u64>,
    /// Saturation histogram over interactive dashboards.
    pub saturations: BTreeMap<Fraction, u64>,
    pub realized_interactions: u64,
    /// Sum of the interaction bound over interactive dashboards.
    pub possible_interactions: u64,
    pub edge_class_dashboards: BTreeMap<EdgeClass, u64>,
    pub edge_class_edges: BTreeMap<EdgeClass, u64>,
    pub adjacency_edges: BTreeMap<u64, u64>,
    pub clique_patterns: BTreeMap<String, u64>,
    pub clique_sizes: BTreeMap<u64, u64>,
    pub overlap: u64,
    pub overlap_by_class: BTreeMap<EdgeClass, u64>,
    pub itype_counts: BTreeMap<String, u64>,
    pub declared_actions: u64,
    pub unsupported_actions: u64,
    pub self_loops: u64,
    pub duplicate_actions: u64,
}

impl CorpusTally {
    pub fn add(&mut self, g: &DashboardGraphs) {
        self.n_dashboards += 1;
        for b in &g.nodes {
            bump(&mut self.block_counts, b.block_type(), 1);
        }
        bump(&mut self.blocks_per_dashboard, g.nodes.len() as u64, 1);
        let chart_types: BTreeSet<&str> = g
            .nodes
            .iter()
            .filter_map(|b| b.props.chart_type())
            .map(|t| t.as_str())
            .collect();
        for t in chart_types {
            bump(&mut self.chart_type_dashboards, t.to_string(), 1);
        }

        let realized = g.interaction_edges.len() as u64;
        if realized > 0 {
            let bound = max_possible_interactions(&g.nodes);
            self.n_interactive += 1;
            bump(&mut self.interaction_edges, realized, 1);
            bump(&mut self.saturations, Fraction::new(realized, bound), 1);
            self.realized_interactions += realized;
            self.possible_interactions += bound;
        }
        let classes: BTreeSet<EdgeClass> = g.interaction_edges.iter().map(|e| e.edge_class).collect();
        for c in classes {
            bump(&mut self.edge_class_dashboards, c, 1);
        }
        for e in &g.interaction_edges {
            bump(&mut self.edge_class_edges, e.edge_class, 1);
        }
        bump(&mut self.adjacency_edges, g.adjacency_edges.len() as u64, 1);

        let types = g.block_types();
        for clique in maximal_cliques(&SimpleGraph::adjacency(g)) {
            bump(&mut self.clique_sizes, clique.len() as u64, 1);
            bump(&mut self.clique_patterns, clique_pattern(&clique, &types), 1);
        }

        let overlap = interaction_adjacency_overlap(g);
        self.overlap += overlap.count as u64;
        for (c, n) in overlap.by_class {
            bump(&mut self.overlap_by_class, c, n as u64);
        }
        for (t, &n) in &g.actions.itype_counts {
            bump(&mut self.itype_counts, t.clone(), n as u64);
        }
        self.declared_actions += g.actions.declared as u64;
        self.unsupported_actions += g.actions.unsupported as u64;
        self.self_loops += g.actions.self_loops as u64;
        self.duplicate_actions += g.actions.duplicates as u64;
    }

    pub fn merge(&mut self, other: &CorpusTally) {
        self.n_dashboards += other.n_dashboards;
        merge_into(&mut self.block_counts, &other.block_counts);
        merge_into(&mut self.blocks_per_dashboard, &other.blocks_per_dashboard);
        merge_into(&mut self.chart_type_dashboards, &other.chart_type_dashboards);
        self.n_interactive += other.n_interactive;
        merge_into(&mut self.interaction_edges, &other.interaction_edges);
        merge_into(&mut self.saturations, &other.saturations);
        self.realized_interactions += other.realized_interactions;
        self.possible_interactions += other.possible_interactions;
        merge_into(&mut self.edge_class_dashboards, &other.edge_class_dashboards);
        merge_into(&mut self.edge_class_edges, &other.edge_class_edges);
        merge_into(&mut self.adjacency_edges, &other.adjacency_edges);
        merge_into(&mut self.clique_patterns, &other.clique_patterns);
        merge_into(&mut self.clique_sizes, &other.clique_sizes);
        self.overlap += other.overlap;
        merge_into(&mut self.overlap_by_class, &other.overlap_by_class);
        merge_into(&mut self.itype_counts, &other.itype_counts);
        self.declared_actions += other.declared_actions;
        self.unsupported_actions += other.unsupported_actions;
        self.self_loops += other.self_loops;
        self.duplicate_actions += other.duplicate_actions;
    }

    pub fn summarize(&self) -> Result<CorpusSummary> {
        if self.n_dashboards == 0 {
            return Err(Error::EmptyCorpus("no dashboards to summarize".into()));
        }
        let n = self.n_dashboards as f64;
        let share = |num: u64, den: u64| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let n_blocks: u64 = self.block_counts.values().sum();
        let blocks = BlockType::ALL
            .iter()
            .map(|&t| {
                let count = self.block_counts.get(&t).copied().unwrap_or(0);
                let s = TypeShare {
                    count,
                    share: share(count, n_blocks),
                };
                (t, s)
            })
            .collect();
        let edge_classes = EdgeClass::ALL
            .iter()
            .map(|&c| {
                let get = |m: &BTreeMap<EdgeClass, u64>| m.get(&c).copied().unwrap_or(0);
                let edges = get(&self.edge_class_edges);
                let overlap = get(&self.overlap_by_class);
                let s = ClassSummary {
                    dashboards: get(&self.edge_class_dashboards),
                    dashboard_share: share(get(&self.edge_class_dashboards), self.n_interactive),
                    edges,
                    overlap,
                    overlap_share_of_class: share(overlap, edges),
                    share_of_overlap: share(overlap, self.overlap),
                };
                (c, s)
            })
            .collect();
        let patterns = |min_size: usize| {
            let mut rows: Vec<PatternCount> = self
                .clique_patterns
                .iter()
                .map(|(p, &count)| PatternCount {
                    size: p.split('|').count(),
                    pattern: p.clone(),
                    count,
                })
                .filter(|r| r.size >= min_size)
                .collect();
            rows.sort_by(|a, b| b.count.cmp(&a.count).then_with(|| a.pattern.cmp(&b.pattern)));
            rows
        };
        let all_patterns = patterns(1);
        let nontrivial_patterns = patterns(2);
        let nontrivial_sizes: BTreeMap<u64, u64> = self
            .clique_sizes
            .iter()
            .filter(|(&s, _)| s >= 2)
            .map(|(&s, &c)| (s, c))
            .collect();
        let n_interactions: u64 = self.edge_class_edges.values().sum();
        let saturation = distribution(&self.saturations, Fraction::value);

        Ok(CorpusSummary {
            n_dashboards: self.n_dashboards,
            n_blocks,
            blocks,
            blocks_per_dashboard: distribution(&self.blocks_per_dashboard, |k| k as f64),
            chart_type_presence: self
                .chart_type_dashboards
                .iter()
                .map(|(t, &c)| (t.clone(), c as f64 / n))
                .collect(),
            n_interactive: self.n_interactive,
            interactive_share: self.n_interactive as f64 / n,
            n_interactions,
            interactions_per_interactive_dashboard: distribution(&self.interaction_edges, |k| k as f64),
            saturation_mean_per_dashboard: saturation.as_ref().map_or(0.0, |d| d.mean),
            saturation_median: saturation.as_ref().map_or(0.0, |d| d.median),
            saturation_mode: saturation.as_ref().map_or(0.0, |d| d.mode),
            saturation_pooled: share(self.realized_interactions, self.possible_interactions),
            edge_classes,
            adjacency_edges_per_dashboard: distribution(&self.adjacency_edges, |k| k as f64),
            n_unique_patterns: all_patterns.len(),
            n_unique_patterns_nontrivial: nontrivial_patterns.len(),
            clique_sizes: distribution(&self.clique_sizes, |k| k as f64),
            clique_sizes_nontrivial: distribution(&nontrivial_sizes, |k| k as f64),
            clique_patterns: all_patterns,
            overlap_count: self.overlap,
            overlap_fraction: share(self.overlap, n_interactions),
            itype_counts: self.itype_counts.clone(),
            actions: ActionSummary {
                declared: self.declared_actions,
                unsupported: self.unsupported_actions,
                self_loops: self.self_loops,
                duplicates: self.duplicate_actions,
            },
            fingerprint: None,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TypeShare {
    pub count: u64,
    pub share: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    /// Interactive dashboards with at least one edge of this class.
    pub dashboards: u64,
    pub dashboard_share: f64,
    pub edges: u64,
    /// Edges of this class whose endpoints are adjacent.
    pub overlap: u64,
    pub overlap_share_of_class: f64,
    pub share_of_overlap: f64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PatternCount {
    pub pattern: String,
    pub size: usize,
    pub count: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ActionSummary {
    pub declared: u64,
    pub unsupported: u64,
    pub self_loops: u64,
    pub duplicates: u64,
}

/// Descriptive statistics of a corpus. Interaction distributions,
/// saturation and edge-class shares are taken over interactive dashboards.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusSummary {
    pub n_dashboards: u64,
    pub n_blocks: u64,
    pub blocks: BTreeMap<BlockType, TypeShare>,
    pub blocks_per_dashboard: Option<Distribution>,
    /// Fraction of dashboards containing at least one chart of each type.
    pub chart_type_presence: BTreeMap<String, f64>,
    pub n_interactive: u64,
    pub interactive_share: f64,
    pub n_interactions: u64,
    pub interactions_per_interactive_dashboard: Option<Distribution>,
    pub saturation_mean_per_dashboard: f64,
    pub saturation_median: f64,
    pub saturation_mode: f64,
    /// Realized edges over the summed bound.
    pub saturation_pooled: f64,
    pub edge_classes: BTreeMap<EdgeClass, ClassSummary>,
    pub adjacency_edges_per_dashboard: Option<Distribution>,
    pub n_unique_patterns: usize,
    pub n_unique_patterns_nontrivial: usize,
    pub clique_sizes: Option<Distribution>,
    pub clique_sizes_nontrivial: Option<Distribution>,
    /// Most frequent first, singletons included.
    pub clique_patterns: Vec<PatternCount>,
    pub overlap_count: u64,
    /// Share of interaction edges whose endpoints are adjacent.
    pub overlap_fraction: f64,
    pub itype_counts: BTreeMap<String, u64>,
    pub actions: ActionSummary,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
}

pub fn tally<'a>(graphs: impl IntoIterator<Item = &'a DashboardGraphs>) -> CorpusTally {
    let mut t = CorpusTally::default();
    for g in graphs {
        t.add(g);
    }
    t
}

pub fn summarize_corpus<'a>(graphs: impl IntoIterator<Item = &'a DashboardGraphs>) -> Result<CorpusSummary> {
    tally(graphs).summarize()
}

impl CorpusSummary {
    pub fn write_block_table<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["block_type", "count", "share"])?;
        for (t, s) in &self.blocks {
            w.write_record([t.as_str(), &s.count.to_string(), &s.share.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("block table", e))
    }

    pub fn write_pattern_table<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record(["pattern", "size", "count"])?;
        for p in &self.clique_patterns {
            w.write_record([p.pattern.as_str(), &p.size.to_string(), &p.count.to_string()])?;
        }
        w.flush().map_err(|e| Error::io("pattern table", e))
    }

    pub fn write_edge_class_table<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        w.write_record([
            "edge_class",
            "dashboards",
            "dashboard_share",
            "edges",
            "overlap",
            "share_of_overlap",
        ])?;
        for (c, s) in &self.edge_classes {
            w.write_record([
                c.as_str(),
                &s.dashboards.to_string(),
                &s.dashboard_share.to_string(),
                &s.edges.to_string(),
                &s.overlap.to_string(),
                &s.share_of_overlap.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("edge class table", e))
    }
}
