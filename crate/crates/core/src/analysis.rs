//! Structural statistics over the two dashboard graphs: degrees, maximal
//! cliques and their block-type patterns, and shortest paths.

use std::collections::{BTreeMap, VecDeque};

use serde::{Deserialize, Serialize};

use crate::model::{BlockType, DashboardGraphs};

/// Simple undirected graph over string ids, indexed by position.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimpleGraph {
    ids: Vec<String>,
    adj: Vec<Vec<usize>>,
}

impl SimpleGraph {
    /// Builds a graph from node ids and undirected id pairs. Self-loops,
    /// repeated pairs and pairs naming unknown ids are ignored.
    pub fn new<S: AsRef<str>>(ids: &[S], edges: impl IntoIterator<Item = (S, S)>) -> Self {
        let mut ids: Vec<String> = ids.iter().map(|s| s.as_ref().to_string()).collect();
        ids.sort();
        ids.dedup();
        let mut adj = vec![Vec::new(); ids.len()];
        for (a, b) in edges {
            let (Ok(i), Ok(j)) = (
                ids.binary_search_by(|x| x.as_str().cmp(a.as_ref())),
                ids.binary_search_by(|x| x.as_str().cmp(b.as_ref())),
            ) else {
                continue;
            };
            if i != j {
                adj[i].push(j);
                adj[j].push(i);
            }
        }
        for list in &mut adj {
            list.sort_unstable();
            list.dedup();
        }
        SimpleGraph { ids, adj }
    }

    pub fn adjacency(graphs: &DashboardGraphs) -> Self {
        let ids: Vec<&str> = graphs.nodes.iter().map(|b| b.id.as_str()).collect();
        SimpleGraph::new(
            &ids,
            graphs
                .adjacency_edges
                .iter()
                .map(|e| (e.source.as_str(), e.target.as_str())),
        )
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn neighbors(&self, i: usize) -> &[usize] {
        &self.adj[i]
    }

    pub fn n_edges(&self) -> usize {
        self.adj.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn has_edge(&self, i: usize, j: usize) -> bool {
        self.adj[i].binary_search(&j).is_ok()
    }

    /// Number of connected components; isolated nodes count individually.
    pub fn components(&self) -> usize {
        let mut seen = vec![false; self.len()];
        let mut count = 0;
        for start in 0..self.len() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(u) = stack.pop() {
                for &v in &self.adj[u] {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    }
}

#[derive(Clone, PartialEq, Eq)]
struct BitSet(Vec<u64>);

impl BitSet {
    fn empty(n: usize) -> Self {
        BitSet(vec![0; n.div_ceil(64)])
    }

    fn from_iter(n: usize, items: impl IntoIterator<Item = usize>) -> Self {
        let mut s = BitSet::empty(n);
        for i in items {
            s.insert(i);
        }
        s
    }

    fn insert(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    fn remove(&mut self, i: usize) {
        self.0[i / 64] &= !(1 << (i % 64));
    }

    fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    fn and(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & b).collect())
    }

    fn or(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a | b).collect())
    }

    fn and_not(&self, other: &BitSet) -> BitSet {
        BitSet(self.0.iter().zip(&other.0).map(|(a, b)| a & !b).collect())
    }

    fn and_count(&self, other: &BitSet) -> u32 {
        self.0.iter().zip(&other.0).map(|(a, b)| (a & b).count_ones()).sum()
    }

    fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut word = w;
            std::iter::from_fn(move || {
                if word == 0 {
                    return None;
                }
                let bit = word.trailing_zeros() as usize;
                word &= word - 1;
                Some(wi * 64 + bit)
            })
        })
    }
}

/// Vertex order from repeatedly removing a minimum-degree vertex; ties go to
/// the lowest index.
fn degeneracy_order(g: &SimpleGraph) -> Vec<usize> {
    let n = g.len();
    let mut degree: Vec<usize> = (0..n).map(|i| g.adj[i].len()).collect();
    let mut removed = vec![false; n];
    let mut order = Vec::with_capacity(n);
    for _ in 0..n {
        let v = (0..n)
            .filter(|&i| !removed[i])
            .min_by_key(|&i| (degree[i], i))
            .expect("vertices remain");
        removed[v] = true;
        order.push(v);
        for &u in &g.adj[v] {
            if !removed[u] {
                degree[u] -= 1;
            }
        }
    }
    order
}

fn expand(
    neighbors: &[BitSet],
    clique: &mut Vec<usize>,
    mut candidates: BitSet,
    mut excluded: BitSet,
    out: &mut Vec<Vec<usize>>,
) {
    if candidates.is_empty() {
        if excluded.is_empty() {
            out.push(clique.clone());
        }
        return;
    }
    let pivot = candidates
        .or(&excluded)
        .iter()
        .max_by_key(|&u| (candidates.and_count(&neighbors[u]), std::cmp::Reverse(u)))
        .expect("non-empty");
    let branch: Vec<usize> = candidates.and_not(&neighbors[pivot]).iter().collect();
    for v in branch {
        clique.push(v);
        expand(
            neighbors,
            clique,
            candidates.and(&neighbors[v]),
            excluded.and(&neighbors[v]),
            out,
        );
        clique.pop();
        candidates.remove(v);
        excluded.insert(v);
    }
}

/// Index sets of all maximal cliques, each sorted ascending, ordered by size
/// descending and then lexicographically. Isolated nodes yield singletons.
pub fn maximal_clique_indices(g: &SimpleGraph) -> Vec<Vec<usize>> {
    let n = g.len();
    let neighbors: Vec<BitSet> = (0..n).map(|i| BitSet::from_iter(n, g.adj[i].iter().copied())).collect();
    let order = degeneracy_order(g);
    let mut position = vec![0; n];
    for (p, &v) in order.iter().enumerate() {
        position[v] = p;
    }
    let mut out = Vec::new();
    for &v in &order {
        let later = g.adj[v].iter().copied().filter(|&u| position[u] > position[v]);
        let earlier = g.adj[v].iter().copied().filter(|&u| position[u] < position[v]);
        let mut clique = vec![v];
        expand(
            &neighbors,
            &mut clique,
            BitSet::from_iter(n, later),
            BitSet::from_iter(n, earlier),
            &mut out,
        );
    }
    for c in &mut out {
        c.sort_unstable();
    }
    out.sort_by(|a, b| b.len().cmp(&a.len()).then_with(|| a.cmp(b)));
    out
}

/// Maximal cliques as sorted id lists, ordered by size descending and then
/// lexicographically by member ids.
pub fn maximal_cliques(g: &SimpleGraph) -> Vec<Vec<String>> {
    // Ids are sorted, so index order and id order agree.
    maximal_clique_indices(g)
        .into_iter()
        .map(|c| c.into_iter().map(|i| g.ids[i].clone()).collect())
        .collect()
}

/// Canonical block-type pattern of a clique, e.g. `chart|chart|filter`.
pub fn clique_pattern<S: AsRef<str>>(clique: &[S], types: &BTreeMap<&str, BlockType>) -> String {
    let mut names: Vec<&str> = clique
        .iter()
        .map(|id| types.get(id.as_ref()).map(|t| t.as_str()).unwrap_or("unknown"))
        .collect();
    names.sort_unstable();
    names.join("|")
}

/// Sum of shortest-path lengths over reachable ordered pairs, and the number
/// of such pairs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PathTotals {
    pub total_length: u64,
    pub pairs: u64,
}

impl PathTotals {
    pub fn mean(&self) -> f64 {
        if self.pairs == 0 {
            0.0
        } else {
            self.total_length as f64 / self.pairs as f64
        }
    }
}

pub fn shortest_path_totals(g: &SimpleGraph) -> PathTotals {
    let n = g.len();
    let mut totals = PathTotals {
        total_length: 0,
        pairs: 0,
    };
    let mut dist = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for source in 0..n {
        dist.fill(usize::MAX);
        dist[source] = 0;
        queue.push_back(source);
        while let Some(u) = queue.pop_front() {
            for &v in &g.adj[u] {
                if dist[v] == usize::MAX {
                    dist[v] = dist[u] + 1;
                    totals.total_length += dist[v] as u64;
                    totals.pairs += 1;
                    queue.push_back(v);
                }
            }
        }
    }
    totals
}

/// Mean unweighted shortest-path length over reachable ordered pairs; zero
/// when no pair is reachable.
pub fn average_shortest_path(g: &SimpleGraph) -> f64 {
    shortest_path_totals(g).mean()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InteractionStats {
    pub n_nodes: usize,
    pub n_edges: usize,
    /// In-degree plus out-degree, averaged over all nodes.
    pub mean_degree: f64,
    pub mean_in_degree: f64,
    pub mean_out_degree: f64,
}

/// Degree means over every node of the interaction graph, isolated ones
/// included.
pub fn interaction_degree_stats(graphs: &DashboardGraphs) -> InteractionStats {
    let n_nodes = graphs.nodes.len();
    let n_edges = graphs.interaction_edges.len();
    let ratio = |num: usize| if n_nodes == 0 { 0.0 } else { num as f64 / n_nodes as f64 };
    // Directed handshake: total in-degree and total out-degree both equal n_edges.
    InteractionStats {
        n_nodes,
        n_edges,
        mean_degree: ratio(2 * n_edges),
        mean_in_degree: ratio(n_edges),
        mean_out_degree: ratio(n_edges),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdjacencyStats {
    pub n_nodes: usize,
    pub n_edges: usize,
    pub mean_degree: f64,
    pub mean_shortest_path: f64,
    pub n_components: usize,
    /// All maximal cliques, singletons included.
    pub n_maximal_cliques: usize,
    pub mean_clique_size: f64,
    /// Maximal cliques with at least two members.
    pub n_maximal_cliques_nontrivial: usize,
    pub mean_clique_size_nontrivial: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GraphStats {
    pub adjacency: AdjacencyStats,
    pub interaction: InteractionStats,
}

/// Per-dashboard analysis record.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Analysis {
    pub dashboard_id: String,
    pub stats: GraphStats,
    pub cliques: Vec<Vec<String>>,
    /// Clique-pattern multiset, singletons included.
    pub patterns: BTreeMap<String, usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fingerprint: Option<String>,
}

fn mean_size(cliques: &[&Vec<String>]) -> f64 {
    if cliques.is_empty() {
        0.0
    } else {
        cliques.iter().map(|c| c.len()).sum::<usize>() as f64 / cliques.len() as f64
    }
}

pub fn analyze(graphs: &DashboardGraphs) -> Analysis {
    let g = SimpleGraph::adjacency(graphs);
    let cliques = maximal_cliques(&g);
    let types = graphs.block_types();
    let mut patterns = BTreeMap::new();
    for c in &cliques {
        *patterns.entry(clique_pattern(c, &types)).or_insert(0) += 1;
    }
    let all: Vec<&Vec<String>> = cliques.iter().collect();
    let nontrivial: Vec<&Vec<String>> = cliques.iter().filter(|c| c.len() >= 2).collect();
    let n = g.len();
    let adjacency = AdjacencyStats {
        n_nodes: n,
        n_edges: g.n_edges(),
        mean_degree: if n == 0 {
            0.0
        } else {
            2.0 * g.n_edges() as f64 / n as f64
        },
        mean_shortest_path: average_shortest_path(&g),
        n_components: g.components(),
        n_maximal_cliques: all.len(),
        mean_clique_size: mean_size(&all),
        n_maximal_cliques_nontrivial: nontrivial.len(),
        mean_clique_size_nontrivial: mean_size(&nontrivial),
    };
    Analysis {
        dashboard_id: graphs.dashboard_id.clone(),
        stats: GraphStats {
            adjacency,
            interaction: interaction_degree_stats(graphs),
        },
        cliques,
        patterns,
        fingerprint: None,
    }
}
