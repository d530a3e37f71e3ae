//! Generators and brute-force oracles shared by the integration tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};

use dashgraph::geometry::{Rect, Tolerance};
use dashgraph::model::{
    AdjacencyConfig, Block, BlockType, ChartType, Dashboard, DeclaredAction, DescriptiveProps, InteractionType,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn fixture(rel: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(rel)
}

pub fn load_fixture(name: &str) -> Dashboard {
    let text = std::fs::read_to_string(fixture(&format!("corpus/{name}.json"))).unwrap();
    dashgraph::ingest::json::parse_dashboards(&text).unwrap().remove(0)
}

// ---------------------------------------------------------------- geometry

/// Small rectangle so the pixel oracle stays cheap.
pub fn random_rect(rng: &mut impl Rng) -> (i64, i64, i64, i64) {
    (
        rng.random_range(0..60),
        rng.random_range(0..60),
        rng.random_range(1..30),
        rng.random_range(1..30),
    )
}

fn lattice(r: &Rect) -> BTreeSet<(i64, i64)> {
    (r.x0..=r.x1).flat_map(|x| (r.y0..=r.y1).map(move |y| (x, y))).collect()
}

fn cells(r: &Rect) -> BTreeSet<(i64, i64)> {
    (r.x0..r.x1).flat_map(|x| (r.y0..r.y1).map(move |y| (x, y))).collect()
}

fn span_cells(lo: i64, hi: i64) -> BTreeSet<i64> {
    (lo..hi).collect()
}

/// Classification by explicit pixel enumeration: containment as subset of
/// lattice points, overlap as shared unit cells, adjoining as contact with
/// the `t`-dilated rectangle plus a shared cell column or row.
pub fn pixel_oracle(a: &Rect, b: &Rect, tol: Tolerance) -> Option<AdjacencyConfig> {
    let (la, lb) = (lattice(a), lattice(b));
    if la.is_subset(&lb) || lb.is_subset(&la) {
        return Some(AdjacencyConfig::Containment);
    }
    if !cells(a).is_disjoint(&cells(b)) {
        return Some(AdjacencyConfig::PartialOverlap);
    }
    let t = i64::from(tol.0);
    let dilated = Rect {
        x0: a.x0 - t,
        y0: a.y0 - t,
        x1: a.x1 + t,
        y1: a.y1 + t,
    };
    let touches = !lattice(&dilated).is_disjoint(&lb);
    let shares_column = !span_cells(a.x0, a.x1).is_disjoint(&span_cells(b.x0, b.x1));
    let shares_row = !span_cells(a.y0, a.y1).is_disjoint(&span_cells(b.y0, b.y1));
    (touches && (shares_column || shares_row)).then_some(AdjacencyConfig::Adjoining)
}

// ---------------------------------------------------------------- dashboards

fn chart_props(rng: &mut impl Rng) -> DescriptiveProps {
    let vis = ["bar", "line", "map", "pie", "scatter", "area", "sankey"][rng.random_range(0..7)];
    DescriptiveProps::Chart {
        vis_type: ChartType::from(vis),
        worksheet: None,
        marks: vec![],
        encodings: vec![],
    }
}

pub fn props_for(ty: BlockType, rng: &mut impl Rng) -> DescriptiveProps {
    match ty {
        BlockType::Chart => chart_props(rng),
        BlockType::Text => DescriptiveProps::Text {
            content: format!("note {}", rng.random_range(0..100)),
            formatting: BTreeMap::new(),
        },
        BlockType::Filter => DescriptiveProps::Filter {
            widget: ["dropdown", "slider", "list"][rng.random_range(0..3)].into(),
            field: "field".into(),
        },
        BlockType::Legend => DescriptiveProps::Legend {
            channel: ["color", "size"][rng.random_range(0..2)].into(),
        },
        BlockType::Multimedia => DescriptiveProps::Multimedia {
            kind: ["image", "webpage"][rng.random_range(0..2)].into(),
        },
    }
}

/// Random dashboard on a coarse grid so adjacency of every kind occurs,
/// with declared actions that include unsupported pairs, duplicates and
/// self-loops.
pub fn random_dashboard(rng: &mut impl Rng, id: &str) -> Dashboard {
    let n = rng.random_range(1..14);
    let blocks: Vec<Block> = (0..n)
        .map(|i| {
            let ty = BlockType::ALL[rng.random_range(0..5)];
            let ty = if i == 0 { BlockType::Chart } else { ty };
            let rect = (
                rng.random_range(0..12) * 50,
                rng.random_range(0..12) * 50,
                rng.random_range(1..6) * 50 + rng.random_range(-5..=5),
                rng.random_range(1..6) * 50 + rng.random_range(-5..=5),
            );
            Block::new(format!("b{i:02}"), rect, props_for(ty, rng))
        })
        .collect();
    let n_actions = rng.random_range(0..(3 * n));
    let mut actions = Vec::new();
    for _ in 0..n_actions {
        let s = &blocks[rng.random_range(0..n)];
        let t = &blocks[rng.random_range(0..n)];
        let itype = if rng.random_bool(0.7) {
            InteractionType::Filter
        } else {
            InteractionType::Highlight
        };
        actions.push(DeclaredAction::new(s.id.clone(), t.id.clone(), itype));
    }
    if let Some(a) = actions.first().cloned() {
        actions.push(a);
    }
    let mut d = Dashboard::new(id, blocks);
    d.width = Some(900);
    d.height = Some(900);
    d.declared_interactions = actions;
    d
}

/// Same dashboard with blocks and actions shuffled and every id renamed.
pub fn relabel(d: &Dashboard, rng: &mut impl Rng) -> (Dashboard, BTreeMap<String, String>) {
    let mut fresh: Vec<usize> = (0..d.blocks.len()).collect();
    fresh.shuffle(rng);
    let names: BTreeMap<String, String> = d
        .blocks
        .iter()
        .zip(&fresh)
        .map(|(b, k)| (b.id.clone(), format!("n{k:03}")))
        .collect();
    let mut out = d.clone();
    for b in &mut out.blocks {
        b.id = names[&b.id].clone();
    }
    for a in &mut out.declared_interactions {
        a.source = names[&a.source].clone();
        a.target = names[&a.target].clone();
    }
    out.blocks.shuffle(rng);
    out.declared_interactions.shuffle(rng);
    (out, names)
}

// ---------------------------------------------------------------- graphs

/// Random undirected graph as node ids and edge pairs.
pub fn random_graph(rng: &mut impl Rng, n: usize, p: f64) -> (Vec<String>, Vec<(String, String)>) {
    let ids: Vec<String> = (0..n).map(|i| format!("v{i:02}")).collect();
    let mut edges = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            if rng.random_bool(p) {
                edges.push((ids[i].clone(), ids[j].clone()));
            }
        }
    }
    (ids, edges)
}

fn adjacency_matrix(ids: &[String], edges: &[(String, String)]) -> Vec<Vec<bool>> {
    let idx: BTreeMap<&str, usize> = ids.iter().enumerate().map(|(i, s)| (s.as_str(), i)).collect();
    let mut m = vec![vec![false; ids.len()]; ids.len()];
    for (a, b) in edges {
        let (i, j) = (idx[a.as_str()], idx[b.as_str()]);
        m[i][j] = true;
        m[j][i] = true;
    }
    m
}

/// Maximal cliques by checking all 2^n vertex subsets.
pub fn brute_force_cliques(ids: &[String], edges: &[(String, String)]) -> BTreeSet<BTreeSet<String>> {
    let n = ids.len();
    let m = adjacency_matrix(ids, edges);
    let is_clique =
        |mask: u32| (0..n).all(|i| mask & (1 << i) == 0 || (i + 1..n).all(|j| mask & (1 << j) == 0 || m[i][j]));
    let cliques: Vec<u32> = (1u32..(1 << n)).filter(|&s| is_clique(s)).collect();
    let all: BTreeSet<u32> = cliques.iter().copied().collect();
    cliques
        .iter()
        .filter(|&&s| (0..n).all(|v| s & (1 << v) != 0 || !all.contains(&(s | (1 << v)))))
        .map(|&s| (0..n).filter(|i| s & (1 << i) != 0).map(|i| ids[i].clone()).collect())
        .collect()
}

/// All-pairs shortest paths by Floyd–Warshall: (sum of finite distances
/// over ordered pairs, number of such pairs).
#[allow(clippy::needless_range_loop)]
pub fn floyd_warshall_totals(ids: &[String], edges: &[(String, String)]) -> (u64, u64) {
    let n = ids.len();
    let m = adjacency_matrix(ids, edges);
    const INF: u64 = u64::MAX / 4;
    let mut d = vec![vec![INF; n]; n];
    for i in 0..n {
        d[i][i] = 0;
        for j in 0..n {
            if m[i][j] {
                d[i][j] = 1;
            }
        }
    }
    for k in 0..n {
        for i in 0..n {
            for j in 0..n {
                if d[i][k] + d[k][j] < d[i][j] {
                    d[i][j] = d[i][k] + d[k][j];
                }
            }
        }
    }
    let mut total = 0;
    let mut pairs = 0;
    for i in 0..n {
        for j in 0..n {
            if i != j && d[i][j] < INF {
                total += d[i][j];
                pairs += 1;
            }
        }
    }
    (total, pairs)
}

// ---------------------------------------------------------------- clustering

/// Isotropic Gaussian blobs with the given centres; returns points and the
/// generating blob index of each.
pub fn blobs(rng: &mut impl Rng, centres: &[[f64; 2]], per_blob: usize, sigma: f64) -> (Vec<Vec<f64>>, Vec<i32>) {
    let noise = Normal::new(0.0, sigma).unwrap();
    let mut points = Vec::new();
    let mut truth = Vec::new();
    for (k, c) in centres.iter().enumerate() {
        for _ in 0..per_blob {
            points.push(vec![c[0] + noise.sample(rng), c[1] + noise.sample(rng)]);
            truth.push(k as i32);
        }
    }
    (points, truth)
}

pub fn euclid(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

/// Fraction of rows whose label matches the truth under the best one-to-one
/// relabeling (greedy over the contingency table, exact for clean splits).
pub fn agreement(labels: &[i32], truth: &[i32]) -> f64 {
    let mut table: BTreeMap<(i32, i32), usize> = BTreeMap::new();
    for (&l, &t) in labels.iter().zip(truth) {
        *table.entry((l, t)).or_insert(0) += 1;
    }
    let mut cells: Vec<((i32, i32), usize)> = table.into_iter().collect();
    cells.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(&b.0)));
    let (mut used_l, mut used_t) = (BTreeSet::new(), BTreeSet::new());
    let mut matched = 0;
    for ((l, t), c) in cells {
        if l >= 0 && !used_l.contains(&l) && !used_t.contains(&t) {
            used_l.insert(l);
            used_t.insert(t);
            matched += c;
        }
    }
    matched as f64 / labels.len() as f64
}

/// True when the two labelings are identical up to renaming clusters, with
/// noise fixed as noise.
pub fn same_up_to_permutation(a: &[i32], b: &[i32]) -> bool {
    let (mut fwd, mut back) = (BTreeMap::new(), BTreeMap::new());
    a.len() == b.len()
        && a.iter().zip(b).all(|(&x, &y)| {
            if (x < 0) != (y < 0) {
                return false;
            }
            *fwd.entry(x).or_insert(y) == y && *back.entry(y).or_insert(x) == x
        })
}

/// Silhouette scores computed directly from the definition.
pub fn brute_silhouette(points: &[Vec<f64>], labels: &[i32]) -> (Vec<f64>, f64) {
    let clusters: BTreeSet<i32> = labels.iter().copied().filter(|&l| l >= 0).collect();
    let members = |c: i32| -> Vec<usize> { (0..points.len()).filter(|&i| labels[i] == c).collect() };
    let mut per_point = vec![None; points.len()];
    for i in 0..points.len() {
        if labels[i] < 0 {
            continue;
        }
        let own: Vec<usize> = members(labels[i]).into_iter().filter(|&j| j != i).collect();
        if own.is_empty() {
            per_point[i] = Some(0.0);
            continue;
        }
        let a = own.iter().map(|&j| euclid(&points[i], &points[j])).sum::<f64>() / own.len() as f64;
        let b = clusters
            .iter()
            .filter(|&&c| c != labels[i])
            .map(|&c| {
                let m = members(c);
                m.iter().map(|&j| euclid(&points[i], &points[j])).sum::<f64>() / m.len() as f64
            })
            .fold(f64::INFINITY, f64::min);
        per_point[i] = Some(if a.max(b) > 0.0 { (b - a) / a.max(b) } else { 0.0 });
    }
    let k = clusters.iter().max().map_or(0, |&m| m as usize + 1);
    let per_cluster = (0..k as i32)
        .map(|c| {
            let m = members(c);
            if m.is_empty() {
                0.0
            } else {
                m.iter().map(|&i| per_point[i].unwrap()).sum::<f64>() / m.len() as f64
            }
        })
        .collect();
    let scored: Vec<f64> = per_point.into_iter().flatten().collect();
    (per_cluster, scored.iter().sum::<f64>() / scored.len() as f64)
}

/// Sorted MST edge weights of the mutual-reachability graph by textbook
/// Prim on an explicit distance matrix.
pub fn brute_mst_weights(points: &[Vec<f64>], min_samples: usize) -> Vec<f64> {
    let n = points.len();
    let d: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| euclid(&points[i], &points[j])).collect())
        .collect();
    let core: Vec<f64> = d
        .iter()
        .map(|row| {
            let mut r = row.clone();
            r.sort_by(f64::total_cmp);
            r[min_samples - 1]
        })
        .collect();
    let mr = |i: usize, j: usize| d[i][j].max(core[i]).max(core[j]);
    let mut in_tree = vec![false; n];
    in_tree[0] = true;
    let mut weights = Vec::new();
    for _ in 1..n {
        let mut best = (f64::INFINITY, 0);
        for i in (0..n).filter(|&i| in_tree[i]) {
            for j in (0..n).filter(|&j| !in_tree[j]) {
                if mr(i, j) < best.0 {
                    best = (mr(i, j), j);
                }
            }
        }
        in_tree[best.1] = true;
        weights.push(best.0);
    }
    weights.sort_by(f64::total_cmp);
    weights
}

// ---------------------------------------------------------------- corpora

fn chart_block(id: String, rect: (i64, i64, i64, i64)) -> Block {
    Block::new(
        id,
        rect,
        DescriptiveProps::Chart {
            vis_type: ChartType::Bar,
            worksheet: None,
            marks: vec![],
            encodings: vec![],
        },
    )
}

/// Corpus of three dashboard archetypes whose feature vectors form three
/// separated groups: linked chart grids, static text-and-image stories, and
/// control panels driving a row of charts. Sizes vary within each archetype.
pub fn archetype_corpus(rng: &mut impl Rng, per_archetype: usize) -> Vec<Dashboard> {
    let mut out = Vec::new();
    for i in 0..per_archetype {
        // Linked grid: k charts tiled edge to edge, fully cross-filtered.
        let k = rng.random_range(4..=6);
        let blocks: Vec<Block> = (0..k)
            .map(|j| chart_block(format!("c{j}"), ((j as i64 % 3) * 300, (j as i64 / 3) * 300, 300, 300)))
            .collect();
        let mut d = Dashboard::new(format!("grid_{i:03}"), blocks);
        for s in 0..k {
            for t in 0..k {
                if s != t {
                    d.declared_interactions.push(DeclaredAction::new(
                        format!("c{s}"),
                        format!("c{t}"),
                        InteractionType::Filter,
                    ));
                }
            }
        }
        out.push(d);

        // Static story: two charts separated by whitespace, many texts and images.
        let n_text = rng.random_range(4..=6);
        let mut blocks = vec![
            chart_block("c0".into(), (0, 0, 400, 300)),
            chart_block("c1".into(), (0, 600, 400, 300)),
        ];
        for j in 0..n_text {
            blocks.push(Block::new(
                format!("t{j}"),
                (600, j as i64 * 150, 300, 100),
                props_for(BlockType::Text, rng),
            ));
        }
        blocks.push(Block::new(
            "img".to_string(),
            (1000, 0, 200, 200),
            props_for(BlockType::Multimedia, rng),
        ));
        out.push(Dashboard::new(format!("story_{i:03}"), blocks));

        // Control panel: filters and a legend above a row of charts.
        let n_charts = rng.random_range(2..=3);
        let n_filters = rng.random_range(2..=3);
        let mut blocks: Vec<Block> = (0..n_charts)
            .map(|j| chart_block(format!("c{j}"), (j as i64 * 400, 100, 400, 400)))
            .collect();
        for j in 0..n_filters {
            blocks.push(Block::new(
                format!("f{j}"),
                (j as i64 * 200, 0, 200, 100),
                props_for(BlockType::Filter, rng),
            ));
        }
        blocks.push(Block::new(
            "lg".to_string(),
            (1200, 100, 100, 200),
            props_for(BlockType::Legend, rng),
        ));
        let mut d = Dashboard::new(format!("panel_{i:03}"), blocks);
        for s in (0..n_filters).map(|j| format!("f{j}")).chain(["lg".to_string()]) {
            for t in 0..n_charts {
                d.declared_interactions
                    .push(DeclaredAction::new(s.clone(), format!("c{t}"), InteractionType::Filter));
            }
        }
        out.push(d);
    }
    out
}

/// One dataset labeled by an independent HDBSCAN implementation.
#[derive(serde::Deserialize)]
pub struct ReferenceDataset {
    pub seed: u64,
    pub min_cluster_size: usize,
    pub points: Vec<Vec<f64>>,
    pub truth: Vec<i32>,
    pub labels: Vec<i32>,
}

pub fn reference_datasets() -> Vec<ReferenceDataset> {
    #[derive(serde::Deserialize)]
    struct File {
        datasets: Vec<ReferenceDataset>,
    }
    let text = std::fs::read_to_string(fixture("reference/hdbscan_reference.json")).unwrap();
    serde_json::from_str::<File>(&text).unwrap().datasets
}

/// Three blobs with centres 40 units apart and unit spread.
pub fn three_blobs(rng: &mut impl Rng) -> (Vec<Vec<f64>>, Vec<i32>) {
    blobs(rng, &[[0.0, 0.0], [40.0, 0.0], [20.0, 35.0]], 100, 1.0)
}
