//! Girvan–Newman community detection on the undirected projection.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{project_undirected, Labelled, ProjectionConfig, UndirectedGraph};
use crate::rdf::{Term, TripleSet};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum CommunityError {
    #[error("graph has no edges")]
    EmptyGraph,
    #[error("partition does not cover the graph's nodes exactly once")]
    NotAPartition,
}

/// Disjoint node sets, ordered by smallest member.
pub type Partition = Vec<BTreeSet<usize>>;

/// Exact shortest-path edge betweenness, keyed by `(u, v)` with `u < v`.
/// Each unordered pair of endpoints contributes once.
pub fn edge_betweenness(g: &UndirectedGraph) -> BTreeMap<(usize, usize), f64> {
    let sources: Vec<usize> = (0..g.node_count()).collect();
    let mut scores = accumulate(g, &sources);
    for v in scores.values_mut() {
        *v /= 2.0;
    }
    scores
}

/// Sum of per-source Brandes dependencies over `sources`. Every edge
/// reachable from a source gets an entry, even if zero.
fn accumulate(g: &UndirectedGraph, sources: &[usize]) -> BTreeMap<(usize, usize), f64> {
    const CHUNK: usize = 32;
    // Fixed chunks summed in order keep the result bit-identical across runs.
    let partials: Vec<BTreeMap<(usize, usize), f64>> = sources
        .par_chunks(CHUNK)
        .map(|chunk| {
            let mut acc = BTreeMap::new();
            for &s in chunk {
                single_source(g, s, &mut acc);
            }
            acc
        })
        .collect();
    let mut total = BTreeMap::new();
    for part in partials {
        for (e, v) in part {
            *total.entry(e).or_insert(0.0) += v;
        }
    }
    total
}

fn single_source(g: &UndirectedGraph, s: usize, acc: &mut BTreeMap<(usize, usize), f64>) {
    let n = g.node_count();
    let mut order = Vec::new();
    let mut preds: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut sigma = vec![0.0_f64; n];
    let mut dist = vec![usize::MAX; n];
    sigma[s] = 1.0;
    dist[s] = 0;
    let mut queue = VecDeque::from([s]);
    while let Some(v) = queue.pop_front() {
        order.push(v);
        for w in g.neighbors(v) {
            if dist[w] == usize::MAX {
                dist[w] = dist[v] + 1;
                queue.push_back(w);
            }
            if dist[w] == dist[v] + 1 {
                sigma[w] += sigma[v];
                preds[w].push(v);
            }
        }
    }
    let mut delta = vec![0.0_f64; n];
    while let Some(w) = order.pop() {
        for &v in &preds[w] {
            let c = sigma[v] / sigma[w] * (1.0 + delta[w]);
            *acc.entry((v.min(w), v.max(w))).or_insert(0.0) += c;
            delta[v] += c;
        }
    }
}

/// Newman modularity `Σ_c (e_c/m − (d_c/2m)²)`.
pub fn modularity(g: &UndirectedGraph, partition: &[BTreeSet<usize>]) -> Result<f64, CommunityError> {
    let n = g.node_count();
    let mut membership = vec![usize::MAX; n];
    for (c, nodes) in partition.iter().enumerate() {
        for &u in nodes {
            if u >= n || membership[u] != usize::MAX {
                return Err(CommunityError::NotAPartition);
            }
            membership[u] = c;
        }
    }
    if membership.contains(&usize::MAX) {
        return Err(CommunityError::NotAPartition);
    }
    let m = g.edge_count();
    if m == 0 {
        return Err(CommunityError::EmptyGraph);
    }
    let mut internal = vec![0usize; partition.len()];
    let mut degree = vec![0usize; partition.len()];
    for (u, v) in g.edges() {
        if membership[u] == membership[v] {
            internal[membership[u]] += 1;
        }
    }
    for u in 0..n {
        degree[membership[u]] += g.degree(u);
    }
    let m = m as f64;
    Ok(internal
        .iter()
        .zip(&degree)
        .map(|(&e, &d)| e as f64 / m - (d as f64 / (2.0 * m)).powi(2))
        .sum())
}

#[derive(Debug, Clone, PartialEq)]
pub struct DendrogramLevel {
    /// Edges removed when this split appeared.
    pub removed_edges: usize,
    pub partition: Partition,
    /// Modularity of the partition against the original graph.
    pub modularity: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Detection {
    pub partition: Partition,
    pub dendrogram: Vec<DendrogramLevel>,
}

fn to_partition(components: Vec<Vec<usize>>) -> Partition {
    components.into_iter().map(|c| c.into_iter().collect()).collect()
}

/// Girvan–Newman: repeatedly delete the edge of highest betweenness (ties go
/// to the smallest `(u, v)`), record the partition each time the number of
/// components grows, and return the recorded partition of highest
/// modularity (the earliest one on ties).
pub fn detect_communities(g: &UndirectedGraph) -> Detection {
    if g.node_count() == 0 {
        return Detection {
            partition: Vec::new(),
            dendrogram: Vec::new(),
        };
    }
    let score = |p: &Partition| modularity(g, p).unwrap_or(0.0);
    let mut work = g.clone();
    let first = to_partition(work.components());
    let mut components = first.len();
    let mut dendrogram = vec![DendrogramLevel {
        removed_edges: 0,
        modularity: score(&first),
        partition: first,
    }];

    let all: Vec<usize> = (0..work.node_count()).collect();
    let mut betweenness = accumulate(&work, &all);
    let mut removed = 0;
    while let Some((u, v)) = pick_max(&betweenness) {
        work.remove_edge(u, v);
        betweenness.remove(&(u, v));
        removed += 1;

        // Only the component(s) that held the removed edge change.
        let mut seen = vec![false; work.node_count()];
        let mut affected = work.component_from(u, &mut seen);
        let split = !seen[v];
        if split {
            affected.extend(work.component_from(v, &mut seen));
        }
        affected.sort_unstable();
        betweenness.retain(|&(a, _), _| !seen[a]);
        betweenness.extend(accumulate(&work, &affected));

        if split {
            let partition = to_partition(work.components());
            debug_assert_eq!(partition.len(), components + 1);
            components = partition.len();
            dendrogram.push(DendrogramLevel {
                removed_edges: removed,
                modularity: score(&partition),
                partition,
            });
        }
    }

    let mut best = 0;
    for (i, level) in dendrogram.iter().enumerate() {
        if level.modularity > dendrogram[best].modularity + 1e-12 {
            best = i;
        }
    }
    Detection {
        partition: dendrogram[best].partition.clone(),
        dendrogram,
    }
}

/// Highest score; near-equal scores (floating-point noise) count as ties and
/// go to the smallest edge.
fn pick_max(scores: &BTreeMap<(usize, usize), f64>) -> Option<(usize, usize)> {
    let max = scores.values().copied().fold(f64::NEG_INFINITY, f64::max);
    let tol = 1e-9 * max.abs().max(1.0);
    scores.iter().find(|(_, &v)| v >= max - tol).map(|(&e, _)| e)
}

/// A detected community together with its induced triples.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Community {
    pub id: usize,
    pub nodes: BTreeSet<Term>,
    /// Snapshot triples whose subject and object both lie in `nodes`.
    pub triples: TripleSet,
}

impl Community {
    pub fn induced(id: usize, nodes: BTreeSet<Term>, snapshot: &TripleSet) -> Self {
        let triples = snapshot
            .iter()
            .filter(|t| nodes.contains(t.subject()) && nodes.contains(t.object()))
            .cloned()
            .collect();
        Community { id, nodes, triples }
    }
}

/// Labels a partition of `projection` and attaches induced triples.
pub fn label_partition(
    projection: &Labelled<UndirectedGraph>,
    partition: &Partition,
    snapshot: &TripleSet,
) -> Vec<Community> {
    partition
        .iter()
        .enumerate()
        .map(|(id, members)| {
            let nodes = members.iter().map(|&i| projection.label(i).clone()).collect();
            Community::induced(id, nodes, snapshot)
        })
        .collect()
}

/// Projects `snapshot`, runs Girvan–Newman and returns labelled communities.
pub fn detect_snapshot_communities(snapshot: &TripleSet, cfg: &ProjectionConfig) -> Vec<Community> {
    let projection = project_undirected(snapshot, cfg);
    let detection = detect_communities(&projection.graph);
    label_partition(&projection, &detection.partition, snapshot)
}

#[derive(Serialize)]
struct PartitionEntry<'a> {
    community: usize,
    nodes: Vec<&'a str>,
}

/// `[{"community": k, "nodes": [...]}]`
pub fn partition_json(communities: &[Community]) -> serde_json::Value {
    let labels: Vec<Vec<String>> = communities
        .iter()
        .map(|c| c.nodes.iter().map(Term::label).collect())
        .collect();
    let entries: Vec<PartitionEntry> = communities
        .iter()
        .zip(&labels)
        .map(|(c, l)| PartitionEntry {
            community: c.id,
            nodes: l.iter().map(String::as_str).collect(),
        })
        .collect();
    serde_json::to_value(entries).expect("plain data")
}
