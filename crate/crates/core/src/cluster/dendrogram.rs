use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{lambda_serde, ClusterResult, CondensedEdge};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendrogramNode {
    pub id: usize,
    pub parent: Option<usize>,
    #[serde(with = "lambda_serde")]
    pub birth_lambda: f64,
    pub size: usize,
    pub stability: f64,
    pub selected: bool,
    /// Cluster label for selected nodes.
    pub label: Option<i32>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DendrogramEdge {
    pub parent: usize,
    pub child: usize,
    #[serde(with = "lambda_serde")]
    pub lambda: f64,
    pub child_size: usize,
}

/// Cluster tree restricted to the selected clusters and their ancestors.
/// Nodes are listed parents first; the leaves are the selected clusters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_points: usize,
    pub root: usize,
    pub nodes: Vec<DendrogramNode>,
    pub edges: Vec<DendrogramEdge>,
    /// Full condensed tree, points included.
    pub condensed_tree: Vec<CondensedEdge>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
}

impl Dendrogram {
    pub fn leaves(&self) -> Vec<usize> {
        let parents: BTreeSet<usize> = self.edges.iter().map(|e| e.parent).collect();
        self.nodes
            .iter()
            .map(|n| n.id)
            .filter(|id| !parents.contains(id))
            .collect()
    }
}

pub fn export_dendrogram(result: &ClusterResult) -> Dendrogram {
    let n = result.n_points;
    let cluster_edges: Vec<&CondensedEdge> = result.condensed_tree.iter().filter(|e| e.child >= n).collect();
    let parent_of = |id: usize| cluster_edges.iter().find(|e| e.child == id).copied();

    let mut keep = BTreeSet::from([n]);
    for &c in &result.cluster_nodes {
        let mut id = c;
        while keep.insert(id) {
            match parent_of(id) {
                Some(e) => id = e.parent,
                None => break,
            }
        }
    }

    let nodes = keep
        .iter()
        .map(|&id| {
            let edge = parent_of(id);
            let label = result.cluster_nodes.iter().position(|&c| c == id).map(|p| p as i32);
            DendrogramNode {
                id,
                parent: edge.map(|e| e.parent),
                birth_lambda: edge.map_or(0.0, |e| e.lambda),
                size: edge.map_or(n, |e| e.child_size),
                stability: result.all_stabilities.get(id - n).copied().unwrap_or(0.0),
                selected: label.is_some(),
                label,
            }
        })
        .collect();
    let edges = cluster_edges
        .iter()
        .filter(|e| keep.contains(&e.child))
        .map(|e| DendrogramEdge {
            parent: e.parent,
            child: e.child,
            lambda: e.lambda,
            child_size: e.child_size,
        })
        .collect();
    Dendrogram {
        n_points: n,
        root: n,
        nodes,
        edges,
        condensed_tree: result.condensed_tree.clone(),
        fingerprint: None,
    }
}
