//! Structural measures: inclusion, degrees, distances and centrality.

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::Serialize;

use crate::graph::{DirectedGraph, Labelled, UndirectedGraph};
use crate::rdf::TripleSet;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum MetricsError {
    #[error("graph has no nodes")]
    EmptyGraph,
    #[error("node index {0} out of range")]
    UnknownNode(usize),
    #[error("damping must lie in (0, 1), got {0}")]
    InvalidDamping(f64),
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NotConverged { iterations: usize, residual: f64 },
}

/// Every triple of `kg1` is in `kg2` (which implies node and edge inclusion).
pub fn subgraph_included(kg1: &TripleSet, kg2: &TripleSet) -> bool {
    kg1.is_subset(kg2)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NodeDegree {
    pub n_in: usize,
    pub n_out: usize,
    /// `n_in / (n_out + 1)`
    pub ratio: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DegreeStats {
    pub nodes: Vec<NodeDegree>,
    /// Total degree → number of nodes, ascending by degree.
    pub histogram: BTreeMap<usize, usize>,
}

pub fn degree_stats(g: &DirectedGraph) -> DegreeStats {
    let mut histogram = BTreeMap::new();
    let nodes = (0..g.node_count())
        .map(|v| {
            let (n_in, n_out) = (g.in_degree(v), g.out_degree(v));
            *histogram.entry(n_in + n_out).or_insert(0) += 1;
            NodeDegree {
                n_in,
                n_out,
                ratio: n_in as f64 / (n_out as f64 + 1.0),
            }
        })
        .collect();
    DegreeStats { nodes, histogram }
}

/// `degree,count` rows for log–log plotting.
pub fn histogram_csv(histogram: &BTreeMap<usize, usize>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["degree", "count"]).expect("in-memory write");
    for (k, c) in histogram {
        w.serialize((k, c)).expect("in-memory write");
    }
    crate::csv_string(w)
}

/// Largest distance from `v` to any node of its own component.
pub fn eccentricity(g: &UndirectedGraph, v: usize) -> Result<usize, MetricsError> {
    if v >= g.node_count() {
        return Err(MetricsError::UnknownNode(v));
    }
    Ok(g.bfs_distances(v).into_iter().flatten().max().unwrap_or(0))
}

/// Eccentricity over the whole graph; `None` when some node is unreachable.
pub fn eccentricity_strict(g: &UndirectedGraph, v: usize) -> Result<Option<usize>, MetricsError> {
    if v >= g.node_count() {
        return Err(MetricsError::UnknownNode(v));
    }
    let dist = g.bfs_distances(v);
    Ok(dist
        .iter()
        .all(Option::is_some)
        .then(|| dist.into_iter().flatten().max().unwrap_or(0)))
}

/// The largest connected component (the earliest on ties).
pub fn largest_component(g: &UndirectedGraph) -> Vec<usize> {
    let mut best: Vec<usize> = Vec::new();
    for c in g.components() {
        if c.len() > best.len() {
            best = c;
        }
    }
    best
}

fn component_eccentricities(g: &UndirectedGraph) -> Result<Vec<usize>, MetricsError> {
    if g.node_count() == 0 {
        return Err(MetricsError::EmptyGraph);
    }
    let comp = largest_component(g);
    Ok(comp
        .par_iter()
        .map(|&v| g.bfs_distances(v).into_iter().flatten().max().unwrap_or(0))
        .collect())
}

/// Minimum eccentricity over the largest component.
pub fn radius(g: &UndirectedGraph) -> Result<usize, MetricsError> {
    Ok(component_eccentricities(g)?.into_iter().min().unwrap_or(0))
}

/// Maximum eccentricity over the largest component.
pub fn diameter(g: &UndirectedGraph) -> Result<usize, MetricsError> {
    Ok(component_eccentricities(g)?.into_iter().max().unwrap_or(0))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IterationConfig {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for IterationConfig {
    fn default() -> Self {
        IterationConfig {
            tol: 1e-10,
            max_iter: 200,
        }
    }
}

pub const DEFAULT_DAMPING: f64 = 0.85;

fn l1(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum()
}

/// Power-iteration PageRank. Nodes without out-links spread their mass
/// uniformly. Stops once the L1 change drops below `iter.tol`.
pub fn pagerank(g: &DirectedGraph, damping: f64, iter: IterationConfig) -> Result<Vec<f64>, MetricsError> {
    if !(damping > 0.0 && damping < 1.0) {
        return Err(MetricsError::InvalidDamping(damping));
    }
    let n = g.node_count();
    if n == 0 {
        return Ok(Vec::new());
    }
    let nf = n as f64;
    let mut x = vec![1.0 / nf; n];
    let mut residual = f64::INFINITY;
    for _ in 0..iter.max_iter {
        let dangling: f64 = (0..n).filter(|&u| g.out_degree(u) == 0).map(|u| x[u]).sum();
        let base = (1.0 - damping) / nf + damping * dangling / nf;
        let mut next = vec![base; n];
        for (u, &xu) in x.iter().enumerate() {
            let out = g.out_degree(u);
            if out > 0 {
                let share = damping * xu / out as f64;
                for v in g.successors(u) {
                    next[v] += share;
                }
            }
        }
        // renormalize away rounding drift
        let total: f64 = next.iter().sum();
        next.iter_mut().for_each(|v| *v /= total);
        residual = l1(&next, &x);
        x = next;
        if residual < iter.tol {
            return Ok(x);
        }
    }
    Err(MetricsError::NotConverged {
        iterations: iter.max_iter,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct Hits {
    pub hub: Vec<f64>,
    pub authority: Vec<f64>,
}

fn normalize(v: &mut [f64]) -> bool {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm == 0.0 {
        return false;
    }
    v.iter_mut().for_each(|x| *x /= norm);
    true
}

/// HITS: `a = Eᵀh`, `h = E a`, each L2-normalized, from a uniform hub
/// vector. A graph without edges yields all-zero vectors.
pub fn hits(g: &DirectedGraph, iter: IterationConfig) -> Result<Hits, MetricsError> {
    let n = g.node_count();
    let mut hub = vec![1.0 / (n as f64).sqrt(); n];
    let mut authority = vec![0.0; n];
    if g.edge_count() == 0 {
        return Ok(Hits {
            hub: vec![0.0; n],
            authority,
        });
    }
    let mut residual = f64::INFINITY;
    for _ in 0..iter.max_iter {
        let mut a = vec![0.0; n];
        for (u, v) in g.edges() {
            a[v] += hub[u];
        }
        normalize(&mut a);
        let mut h = vec![0.0; n];
        for (u, v) in g.edges() {
            h[u] += a[v];
        }
        normalize(&mut h);
        residual = l1(&a, &authority).max(l1(&h, &hub));
        authority = a;
        hub = h;
        if residual < iter.tol {
            return Ok(Hits { hub, authority });
        }
    }
    Err(MetricsError::NotConverged {
        iterations: iter.max_iter,
        residual,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HitsReport {
    pub hub: BTreeMap<String, f64>,
    pub authority: BTreeMap<String, f64>,
}

/// `{"radius","diameter","pagerank":{node:score},"hits":{"hub","authority"},"degree_histogram":[[k,count]]}`
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricsReport {
    pub radius: Option<usize>,
    pub diameter: Option<usize>,
    pub pagerank: BTreeMap<String, f64>,
    pub hits: HitsReport,
    pub degree_histogram: Vec<(usize, usize)>,
}

/// All metrics of a directed projection. Radius and diameter are `None` for
/// a graph without nodes.
pub fn metrics_report(
    g: &Labelled<DirectedGraph>,
    damping: f64,
    iter: IterationConfig,
) -> Result<MetricsReport, MetricsError> {
    let undirected = g.graph.to_undirected();
    let named = |xs: Vec<f64>| -> BTreeMap<String, f64> {
        xs.into_iter()
            .enumerate()
            .map(|(i, x)| (g.label(i).label(), x))
            .collect()
    };
    let h = hits(&g.graph, iter)?;
    Ok(MetricsReport {
        radius: radius(&undirected).ok(),
        diameter: diameter(&undirected).ok(),
        pagerank: named(pagerank(&g.graph, damping, iter)?),
        hits: HitsReport {
            hub: named(h.hub),
            authority: named(h.authority),
        },
        degree_histogram: degree_stats(&g.graph).histogram.into_iter().collect(),
    })
}

/// Per-node score change `new − old`; a node missing on one side counts as 0.
pub fn score_deltas(old: &BTreeMap<String, f64>, new: &BTreeMap<String, f64>) -> BTreeMap<String, f64> {
    old.keys()
        .chain(new.keys())
        .map(|k| {
            let d = new.get(k).copied().unwrap_or(0.0) - old.get(k).copied().unwrap_or(0.0);
            (k.clone(), d)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Triple;

    #[test]
    fn inclusion() {
        let t = Triple::iris("urn:a", "urn:p", "urn:b").unwrap();
        let s: TripleSet = TripleSet::new();
        let big: TripleSet = [t].into();
        assert!(subgraph_included(&s, &big));
        assert!(subgraph_included(&big, &big));
        assert!(!subgraph_included(&big, &s));
    }

    #[test]
    fn degree_ratio() {
        let g = DirectedGraph::from_edges(5, &[(1, 0), (2, 0), (3, 0)]);
        let d = degree_stats(&g);
        assert_eq!(d.nodes[0].ratio, 3.0);
        assert_eq!(d.nodes[4].ratio, 0.0);
        assert_eq!(d.histogram, [(0, 1), (1, 3), (3, 1)].into());
        assert_eq!(histogram_csv(&d.histogram), "degree,count\n0,1\n1,3\n3,1\n");
    }

    #[test]
    fn distances() {
        let single = UndirectedGraph::new(1);
        assert_eq!(
            (eccentricity(&single, 0), radius(&single), diameter(&single)),
            (Ok(0), Ok(0), Ok(0))
        );
        let path = UndirectedGraph::from_edges(4, &[(0, 1), (1, 2), (2, 3)]);
        assert_eq!((radius(&path), diameter(&path)), (Ok(2), Ok(3)));
        assert_eq!(radius(&UndirectedGraph::new(0)), Err(MetricsError::EmptyGraph));
        let split = UndirectedGraph::from_edges(3, &[(0, 1)]);
        assert_eq!(eccentricity(&split, 0), Ok(1));
        assert_eq!(eccentricity_strict(&split, 0), Ok(None));
    }

    #[test]
    fn pagerank_cycle_and_sink() {
        let cycle = DirectedGraph::from_edges(3, &[(0, 1), (1, 2), (2, 0)]);
        let pr = pagerank(&cycle, DEFAULT_DAMPING, IterationConfig::default()).unwrap();
        assert!(pr.iter().all(|x| (x - 1.0 / 3.0).abs() < 1e-12));
        let pair = DirectedGraph::from_edges(2, &[(0, 1)]);
        let pr = pagerank(&pair, DEFAULT_DAMPING, IterationConfig::default()).unwrap();
        assert!(pr[1] > pr[0]);
        assert!((pr.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(pagerank(&pair, 1.0, IterationConfig::default()).is_err());
    }

    #[test]
    fn hits_star() {
        let star = DirectedGraph::from_edges(4, &[(0, 1), (0, 2), (0, 3)]);
        let h = hits(&star, IterationConfig::default()).unwrap();
        assert!((h.hub[0] - 1.0).abs() < 1e-12);
        assert_eq!(h.authority[0], 0.0);
        assert!((h.authority[1] - h.authority[3]).abs() < 1e-12);
        let empty = hits(&DirectedGraph::new(3), IterationConfig::default()).unwrap();
        assert!(empty.hub.iter().chain(&empty.authority).all(|&x| x == 0.0));
    }
}
