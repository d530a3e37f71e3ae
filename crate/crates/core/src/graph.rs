//! Construction of the adjacency and interaction graphs of a dashboard.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{detect_adjacency, Tolerance};
use crate::ingest::extract_actions;
use crate::model::{
    ActionTally, AdjacencyConfig, AdjacencyEdge, Block, BlockType, Dashboard, DashboardGraphs, EdgeClass,
    InteractionEdge, InteractionType,
};

/// One canonical undirected edge per adjacent unordered pair, sorted by
/// `(source, target)`.
pub fn build_adjacency_graph(blocks: &[Block], tol: Tolerance) -> Vec<AdjacencyEdge> {
    let mut edges = Vec::new();
    for (i, a) in blocks.iter().enumerate() {
        for b in &blocks[i + 1..] {
            if a.id == b.id {
                continue;
            }
            if let Some(config) = detect_adjacency(a, b, tol) {
                edges.push(AdjacencyEdge::canonical(&a.id, &b.id, config));
            }
        }
    }
    edges.sort();
    edges.dedup_by(|x, y| x.source == y.source && x.target == y.target);
    edges
}

/// Prunes declared interaction connections into the directed graph.
///
/// Self-loops are removed and duplicates collapse on `(source, target,
/// edge_class)`; when several interaction types share a key the smallest
/// one is kept so the result does not depend on declaration order.
pub fn build_interaction_graph(blocks: &[Block], declared: &[InteractionEdge]) -> Vec<InteractionEdge> {
    let known: std::collections::BTreeSet<&str> = blocks.iter().map(|b| b.id.as_str()).collect();
    let mut edges: Vec<InteractionEdge> = declared
        .iter()
        .filter(|e| e.source != e.target)
        .filter(|e| known.contains(e.source.as_str()) && known.contains(e.target.as_str()))
        .cloned()
        .collect();
    edges.sort_by(|a, b| {
        (&a.source, &a.target, a.edge_class, &a.itype).cmp(&(&b.source, &b.target, b.edge_class, &b.itype))
    });
    edges.dedup_by(|later, first| {
        later.source == first.source && later.target == first.target && later.edge_class == first.edge_class
    });
    edges
}

/// Upper bound on interaction edges: every filter and legend to every chart,
/// plus every ordered pair of distinct charts.
pub fn max_possible_interactions(blocks: &[Block]) -> u64 {
    let count = |t| blocks.iter().filter(|b| b.is(t)).count() as u64;
    let charts = count(BlockType::Chart);
    if charts == 0 {
        return 0;
    }
    (charts - 1 + count(BlockType::Legend) + count(BlockType::Filter)) * charts
}

/// Builds both graphs for a dashboard.
pub fn build_graphs(dashboard: &Dashboard, tol: Tolerance) -> Result<DashboardGraphs> {
    let violations = crate::model::validate(dashboard);
    if !violations.is_empty() {
        return Err(Error::schema(
            format!("dashboard[{}]", dashboard.id),
            violations.join("; "),
        ));
    }
    let mut nodes = dashboard.blocks.clone();
    nodes.sort_by(|a, b| a.id.cmp(&b.id));

    let extracted = extract_actions(dashboard)?;
    let adjacency_edges = build_adjacency_graph(&nodes, tol);
    let interaction_edges = build_interaction_graph(&nodes, &extracted.edges);

    let self_loops = extracted.edges.iter().filter(|e| e.source == e.target).count();
    let mut itype_counts = BTreeMap::new();
    for e in &extracted.edges {
        *itype_counts.entry(e.itype.to_string()).or_insert(0) += 1;
    }
    let actions = ActionTally {
        declared: dashboard.declared_interactions.len(),
        unsupported: extracted.dropped,
        self_loops,
        duplicates: extracted.edges.len() - self_loops - interaction_edges.len(),
        itype_counts,
    };
    Ok(DashboardGraphs {
        dashboard_id: dashboard.id.clone(),
        nodes,
        adjacency_edges,
        interaction_edges,
        actions,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct AdjacencyEdgeDoc {
    source: String,
    target: String,
    config: AdjacencyConfig,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
struct InteractionEdgeDoc {
    source: String,
    target: String,
    class: EdgeClass,
    #[serde(rename = "type", default = "default_itype")]
    itype: InteractionType,
}

fn default_itype() -> InteractionType {
    InteractionType::Filter
}

/// On-disk form of [`DashboardGraphs`]. Nodes are full canonical blocks, so
/// downstream stages can work from graph files alone.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphDocument {
    pub dashboard_id: String,
    nodes: Vec<Block>,
    adjacency: Vec<AdjacencyEdgeDoc>,
    interaction: Vec<InteractionEdgeDoc>,
    #[serde(default)]
    actions: ActionTally,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
}

impl From<&DashboardGraphs> for GraphDocument {
    fn from(g: &DashboardGraphs) -> Self {
        GraphDocument {
            dashboard_id: g.dashboard_id.clone(),
            nodes: g.nodes.clone(),
            adjacency: g
                .adjacency_edges
                .iter()
                .map(|e| AdjacencyEdgeDoc {
                    source: e.source.clone(),
                    target: e.target.clone(),
                    config: e.config,
                })
                .collect(),
            interaction: g
                .interaction_edges
                .iter()
                .map(|e| InteractionEdgeDoc {
                    source: e.source.clone(),
                    target: e.target.clone(),
                    class: e.edge_class,
                    itype: e.itype.clone(),
                })
                .collect(),
            actions: g.actions.clone(),
            fingerprint: None,
        }
    }
}

impl GraphDocument {
    pub fn into_graphs(self) -> Result<DashboardGraphs> {
        let graphs = DashboardGraphs {
            dashboard_id: self.dashboard_id,
            nodes: self.nodes,
            adjacency_edges: self
                .adjacency
                .into_iter()
                .map(|e| AdjacencyEdge::canonical(&e.source, &e.target, e.config))
                .collect(),
            interaction_edges: self
                .interaction
                .into_iter()
                .map(|e| InteractionEdge {
                    source: e.source,
                    target: e.target,
                    itype: e.itype,
                    edge_class: e.class,
                })
                .collect(),
            actions: self.actions,
        };
        let problems = graphs.check();
        if problems.is_empty() {
            Ok(graphs)
        } else {
            Err(Error::schema(
                format!("graph[{}]", graphs.dashboard_id),
                problems.join("; "),
            ))
        }
    }
}
