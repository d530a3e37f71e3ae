//! Exact HDBSCAN: core distances, mutual-reachability minimum spanning tree,
//! single-linkage hierarchy, condensed tree and excess-of-mass selection.
//!
//! Distances are computed on the fly in O(n²) time and O(n) memory. Every
//! tie is broken by ascending point index, so results do not depend on the
//! number of worker threads.

use std::collections::VecDeque;

use rayon::prelude::*;

use super::{ClusterParams, ClusterResult, CondensedEdge};
use crate::error::{Error, Result};

/// Rows above which distance loops are split across the rayon pool.
const PARALLEL_ROWS: usize = 1024;

pub(crate) fn euclidean(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

pub(crate) fn check_matrix(matrix: &[Vec<f64>]) -> Result<()> {
    let width = matrix.first().map_or(0, Vec::len);
    for (i, row) in matrix.iter().enumerate() {
        if row.len() != width {
            return Err(Error::schema(
                format!("matrix row {i}"),
                format!("expected {width} columns, found {}", row.len()),
            ));
        }
        if let Some(j) = row.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFiniteInput { row: i, column: j });
        }
    }
    Ok(())
}

/// Distance from each point to its `k`-th nearest neighbour, the point
/// itself counting as the first.
pub fn core_distances(matrix: &[Vec<f64>], k: usize) -> Vec<f64> {
    let n = matrix.len();
    let kth = |i: usize| {
        let mut d: Vec<f64> = matrix.iter().map(|other| euclidean(&matrix[i], other)).collect();
        let idx = k.clamp(1, n) - 1;
        let (_, v, _) = d.select_nth_unstable_by(idx, f64::total_cmp);
        *v
    };
    if n >= PARALLEL_ROWS {
        (0..n).into_par_iter().map(kth).collect()
    } else {
        (0..n).map(kth).collect()
    }
}

/// Edge of the mutual-reachability minimum spanning tree.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MstEdge {
    pub a: usize,
    pub b: usize,
    pub weight: f64,
}

/// Prim's algorithm over the dense mutual-reachability graph, starting from
/// point 0.
pub fn mutual_reachability_mst(matrix: &[Vec<f64>], core: &[f64]) -> Vec<MstEdge> {
    let n = matrix.len();
    if n < 2 {
        return Vec::new();
    }
    let mut in_tree = vec![false; n];
    let mut best = vec![f64::INFINITY; n];
    let mut parent = vec![0usize; n];
    let mut edges = Vec::with_capacity(n - 1);
    let mut current = 0;
    in_tree[0] = true;
    for _ in 1..n {
        let from = &matrix[current];
        let core_from = core[current];
        let relax = |(v, (best_v, parent_v)): (usize, (&mut f64, &mut usize))| {
            if in_tree[v] {
                return;
            }
            let d = euclidean(from, &matrix[v]).max(core_from).max(core[v]);
            if d < *best_v {
                *best_v = d;
                *parent_v = current;
            }
        };
        if n >= PARALLEL_ROWS {
            best.par_iter_mut()
                .zip(parent.par_iter_mut())
                .enumerate()
                .for_each(relax);
        } else {
            best.iter_mut().zip(parent.iter_mut()).enumerate().for_each(relax);
        }
        let next = (0..n)
            .filter(|&v| !in_tree[v])
            .min_by(|&x, &y| best[x].total_cmp(&best[y]).then(x.cmp(&y)))
            .expect("vertices remain");
        in_tree[next] = true;
        edges.push(MstEdge {
            a: parent[next],
            b: next,
            weight: best[next],
        });
        current = next;
    }
    edges
}

/// Internal node `n + i` of the single-linkage dendrogram.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    pub distance: f64,
    pub size: usize,
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind {
            parent: (0..n).collect(),
        }
    }

    fn find(&mut self, mut x: usize) -> usize {
        while self.parent[x] != x {
            self.parent[x] = self.parent[self.parent[x]];
            x = self.parent[x];
        }
        x
    }
}

/// Single-linkage merges from MST edges sorted by weight, then by endpoints.
pub fn single_linkage(n: usize, mst: &[MstEdge]) -> Vec<Merge> {
    let mut edges: Vec<(f64, usize, usize)> = mst.iter().map(|e| (e.weight, e.a.min(e.b), e.a.max(e.b))).collect();
    edges.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)).then(x.2.cmp(&y.2)));

    // Union-find over points; each component root remembers its dendrogram node.
    let mut uf = UnionFind::new(n);
    let mut node_of: Vec<usize> = (0..n).collect();
    let mut size_of = vec![1usize; n];
    let mut merges = Vec::with_capacity(n.saturating_sub(1));
    for (distance, a, b) in edges {
        let (ra, rb) = (uf.find(a), uf.find(b));
        if ra == rb {
            continue;
        }
        let size = size_of[ra] + size_of[rb];
        merges.push(Merge {
            left: node_of[ra],
            right: node_of[rb],
            distance,
            size,
        });
        uf.parent[rb] = ra;
        size_of[ra] = size;
        node_of[ra] = n + merges.len() - 1;
    }
    merges
}

fn lambda_of(distance: f64) -> f64 {
    if distance > 0.0 {
        1.0 / distance
    } else {
        f64::INFINITY
    }
}

fn node_size(n: usize, merges: &[Merge], node: usize) -> usize {
    if node < n {
        1
    } else {
        merges[node - n].size
    }
}

fn leaves(n: usize, merges: &[Merge], node: usize) -> Vec<usize> {
    let mut out = Vec::new();
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x < n {
            out.push(x);
        } else {
            let m = &merges[x - n];
            stack.push(m.right);
            stack.push(m.left);
        }
    }
    out.sort_unstable();
    out
}

/// Children of a dendrogram node after collapsing descendant merges at the
/// same distance, so simultaneous merges form one multi-way split whatever
/// order they were recorded in.
fn split_parts(n: usize, merges: &[Merge], node: usize) -> Vec<usize> {
    let distance = merges[node - n].distance;
    let mut parts = Vec::new();
    let mut stack = vec![node];
    while let Some(x) = stack.pop() {
        if x >= n && merges[x - n].distance == distance {
            let m = &merges[x - n];
            stack.push(m.right);
            stack.push(m.left);
        } else {
            parts.push(x);
        }
    }
    parts
}

/// Condenses the dendrogram: a split only creates clusters when at least two
/// parts hold `min_cluster_size` points or more; points of smaller parts fall
/// out of the parent. A single large part carries on as the parent. Splits at
/// distance zero never create clusters. The root cluster is id `n`; points
/// keep their row index.
pub fn condense(n: usize, merges: &[Merge], min_cluster_size: usize) -> Vec<CondensedEdge> {
    let mut tree = Vec::new();
    if merges.is_empty() {
        return (0..n)
            .map(|p| CondensedEdge {
                parent: n,
                child: p,
                lambda: f64::INFINITY,
                child_size: 1,
            })
            .collect();
    }
    let root = n + merges.len() - 1;
    let mut relabel = vec![0usize; root + 1];
    relabel[root] = n;
    let mut next_label = n + 1;
    let mut queue = VecDeque::from([root]);
    while let Some(node) = queue.pop_front() {
        if node < n {
            continue;
        }
        let distance = merges[node - n].distance;
        let lambda = lambda_of(distance);
        let parent = relabel[node];
        let parts = split_parts(n, merges, node);
        let (big, small): (Vec<usize>, Vec<usize>) = parts
            .into_iter()
            .partition(|&c| distance > 0.0 && node_size(n, merges, c) >= min_cluster_size);
        for child in small {
            for p in leaves(n, merges, child) {
                tree.push(CondensedEdge {
                    parent,
                    child: p,
                    lambda,
                    child_size: 1,
                });
            }
        }
        if let [only] = big[..] {
            relabel[only] = parent;
            queue.push_back(only);
        } else {
            for child in big {
                relabel[child] = next_label;
                tree.push(CondensedEdge {
                    parent,
                    child: next_label,
                    lambda,
                    child_size: node_size(n, merges, child),
                });
                next_label += 1;
                queue.push_back(child);
            }
        }
    }
    tree
}

/// Stability of every condensed cluster, indexed by `cluster_id - n`.
pub fn stabilities(n: usize, tree: &[CondensedEdge]) -> Vec<f64> {
    let n_clusters = tree
        .iter()
        .map(|e| e.parent.max(e.child))
        .max()
        .map_or(1, |m| m.max(n) - n + 1);
    let mut birth = vec![0.0f64; n_clusters];
    for e in tree.iter().filter(|e| e.child >= n) {
        birth[e.child - n] = e.lambda;
    }
    let mut stability = vec![0.0f64; n_clusters];
    for e in tree {
        let b = birth[e.parent - n];
        if e.lambda != b {
            stability[e.parent - n] += (e.lambda - b) * e.child_size as f64;
        }
    }
    stability
}

/// Excess-of-mass selection. The root is only selected when it has no child
/// clusters at all. Returns selected cluster ids, ascending.
pub fn select_clusters(n: usize, tree: &[CondensedEdge], stability: &[f64]) -> Vec<usize> {
    let n_clusters = stability.len();
    let mut children: Vec<Vec<usize>> = vec![Vec::new(); n_clusters];
    for e in tree.iter().filter(|e| e.child >= n) {
        children[e.parent - n].push(e.child - n);
    }
    if children[0].is_empty() {
        return vec![n];
    }
    let mut selected = vec![true; n_clusters];
    selected[0] = false;
    let mut subtree = stability.to_vec();
    // Children always carry larger ids than their parent.
    for c in (1..n_clusters).rev() {
        let below: f64 = children[c].iter().map(|&k| subtree[k]).sum();
        if below > stability[c] {
            selected[c] = false;
            subtree[c] = below;
        } else {
            let mut stack = children[c].clone();
            while let Some(k) = stack.pop() {
                selected[k] = false;
                stack.extend(children[k].iter().copied());
            }
        }
    }
    (1..n_clusters).filter(|&c| selected[c]).map(|c| c + n).collect()
}

/// Labels each point by its nearest selected ancestor cluster, or -1.
pub fn label_points(n: usize, tree: &[CondensedEdge], selected: &[usize]) -> Vec<i32> {
    let n_nodes = tree
        .iter()
        .map(|e| e.child.max(e.parent))
        .max()
        .map_or(n + 1, |m| m + 1);
    let mut parent_of = vec![usize::MAX; n_nodes.max(n + 1)];
    for e in tree {
        parent_of[e.child] = e.parent;
    }
    let mut label_of = vec![-1i32; parent_of.len()];
    for (label, &c) in selected.iter().enumerate() {
        label_of[c] = label as i32;
    }
    (0..n)
        .map(|p| {
            let mut node = parent_of[p];
            while node != usize::MAX {
                if label_of[node] >= 0 {
                    return label_of[node];
                }
                node = parent_of[node];
            }
            -1
        })
        .collect()
}

pub fn hdbscan(matrix: &[Vec<f64>], params: &ClusterParams) -> Result<ClusterResult> {
    params.check()?;
    let n = matrix.len();
    let min_samples = params.min_samples();
    let required = params.min_cluster_size.max(min_samples);
    if n < required {
        return Err(Error::TooFewRows { rows: n, required });
    }
    check_matrix(matrix)?;

    let core = core_distances(matrix, min_samples);
    let mst = mutual_reachability_mst(matrix, &core);
    let merges = single_linkage(n, &mst);
    let tree = condense(n, &merges, params.min_cluster_size);
    let stability = stabilities(n, &tree);
    let selected = select_clusters(n, &tree, &stability);
    let labels = label_points(n, &tree, &selected);

    let mut tree = tree;
    tree.sort_by(|a, b| {
        a.parent
            .cmp(&b.parent)
            .then(a.lambda.total_cmp(&b.lambda))
            .then(a.child.cmp(&b.child))
    });
    Ok(ClusterResult {
        n_points: n,
        labels,
        stabilities: selected.iter().map(|&c| stability[c - n]).collect(),
        cluster_nodes: selected,
        all_stabilities: stability,
        condensed_tree: tree,
        mst_weight: mst.iter().map(|e| e.weight).sum(),
    })
}
