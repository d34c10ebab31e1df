//! Plain graph views of a snapshot.
//!
//! Nodes are dense indices assigned in canonical term order, so "smallest
//! index" and "lexicographically smallest node" coincide.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use crate::rdf::{vocab, Iri, Term, Triple, TripleSet};

/// Which triples become edges.
#[derive(Debug, Clone)]
pub struct ProjectionConfig {
    /// Keep `rdf:type` links as edges. Off by default so class nodes do not
    /// become hubs joining every instance.
    pub include_type_edges: bool,
    /// When set, only triples with one of these predicates are projected.
    pub predicates: Option<BTreeSet<Iri>>,
    pub type_predicate: Iri,
}

impl Default for ProjectionConfig {
    fn default() -> Self {
        ProjectionConfig {
            include_type_edges: false,
            predicates: None,
            type_predicate: Iri::new(vocab::RDF_TYPE).expect("valid IRI"),
        }
    }
}

impl ProjectionConfig {
    pub fn with_predicates(mut self, predicates: BTreeSet<Iri>) -> Self {
        self.predicates = Some(predicates);
        self
    }

    pub fn keeps(&self, t: &Triple) -> bool {
        self.predicates
            .as_ref()
            .is_none_or(|allowed| allowed.contains(t.predicate_iri()))
    }

    /// Whether a kept triple contributes an edge (object must be a node).
    pub fn is_edge(&self, t: &Triple) -> bool {
        !t.object().is_literal() && (self.include_type_edges || *t.predicate_iri() != self.type_predicate)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct UndirectedGraph {
    adj: Vec<BTreeSet<usize>>,
}

impl UndirectedGraph {
    pub fn new(node_count: usize) -> Self {
        UndirectedGraph {
            adj: vec![BTreeSet::new(); node_count],
        }
    }

    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(node_count);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    /// Adds `{u, v}`; self-loops are ignored.
    pub fn add_edge(&mut self, u: usize, v: usize) {
        if u != v {
            self.adj[u].insert(v);
            self.adj[v].insert(u);
        }
    }

    pub fn remove_edge(&mut self, u: usize, v: usize) -> bool {
        let removed = self.adj[u].remove(&v);
        self.adj[v].remove(&u);
        removed
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adj.get(u).is_some_and(|n| n.contains(&v))
    }

    pub fn node_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    pub fn degree(&self, u: usize) -> usize {
        self.adj[u].len()
    }

    pub fn neighbors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.adj[u].iter().copied()
    }

    /// Edges as `(u, v)` with `u < v`, in ascending order.
    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.adj
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.range(u + 1..).map(move |&v| (u, v)))
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let mut seen = vec![false; self.node_count()];
        let mut out = Vec::new();
        for start in 0..self.node_count() {
            if seen[start] {
                continue;
            }
            let mut comp = self.component_from(start, &mut seen);
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    pub(crate) fn component_from(&self, start: usize, seen: &mut [bool]) -> Vec<usize> {
        let mut comp = vec![start];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(u) = queue.pop_front() {
            for v in self.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                    queue.push_back(v);
                }
            }
        }
        comp
    }

    /// Hop distances from `source`; `None` for unreachable nodes.
    pub fn bfs_distances(&self, source: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.node_count()];
        dist[source] = Some(0);
        let mut queue = VecDeque::from([source]);
        while let Some(u) = queue.pop_front() {
            let d = dist[u].expect("queued nodes have a distance");
            for v in self.neighbors(u) {
                if dist[v].is_none() {
                    dist[v] = Some(d + 1);
                    queue.push_back(v);
                }
            }
        }
        dist
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DirectedGraph {
    out: Vec<BTreeSet<usize>>,
    inc: Vec<BTreeSet<usize>>,
}

impl DirectedGraph {
    pub fn new(node_count: usize) -> Self {
        DirectedGraph {
            out: vec![BTreeSet::new(); node_count],
            inc: vec![BTreeSet::new(); node_count],
        }
    }

    pub fn from_edges(node_count: usize, edges: &[(usize, usize)]) -> Self {
        let mut g = Self::new(node_count);
        for &(u, v) in edges {
            g.add_edge(u, v);
        }
        g
    }

    pub fn add_edge(&mut self, from: usize, to: usize) {
        self.out[from].insert(to);
        self.inc[to].insert(from);
    }

    pub fn node_count(&self) -> usize {
        self.out.len()
    }

    pub fn edge_count(&self) -> usize {
        self.out.iter().map(BTreeSet::len).sum()
    }

    pub fn successors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.out[u].iter().copied()
    }

    pub fn predecessors(&self, u: usize) -> impl Iterator<Item = usize> + '_ {
        self.inc[u].iter().copied()
    }

    pub fn out_degree(&self, u: usize) -> usize {
        self.out[u].len()
    }

    pub fn in_degree(&self, u: usize) -> usize {
        self.inc[u].len()
    }

    pub fn edges(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.out
            .iter()
            .enumerate()
            .flat_map(|(u, vs)| vs.iter().map(move |&v| (u, v)))
    }

    /// Forgets direction; self-loops disappear.
    pub fn to_undirected(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::new(self.node_count());
        for (u, v) in self.edges() {
            g.add_edge(u, v);
        }
        g
    }
}

/// A graph whose node `i` stands for `labels[i]`.
#[derive(Debug, Clone)]
pub struct Labelled<G> {
    pub graph: G,
    labels: Vec<Term>,
    index: HashMap<Term, usize>,
}

impl<G> Labelled<G> {
    pub fn labels(&self) -> &[Term] {
        &self.labels
    }

    pub fn label(&self, i: usize) -> &Term {
        &self.labels[i]
    }

    pub fn index_of(&self, term: &Term) -> Option<usize> {
        self.index.get(term).copied()
    }
}

type Collected = (Vec<Term>, HashMap<Term, usize>, Vec<(usize, usize)>);

/// Node terms and edge pairs of a snapshot under `cfg`. Every subject of a
/// kept triple is a node, and so is every non-literal object of an edge.
fn collect(triples: &TripleSet, cfg: &ProjectionConfig) -> Collected {
    let mut nodes = BTreeSet::new();
    for t in triples.iter().filter(|t| cfg.keeps(t)) {
        nodes.insert(t.subject());
        if cfg.is_edge(t) {
            nodes.insert(t.object());
        }
    }
    let labels: Vec<Term> = nodes.into_iter().cloned().collect();
    let index: HashMap<Term, usize> = labels.iter().enumerate().map(|(i, t)| (t.clone(), i)).collect();
    let edges = triples
        .iter()
        .filter(|t| cfg.keeps(t) && cfg.is_edge(t))
        .map(|t| (index[t.subject()], index[t.object()]))
        .collect();
    (labels, index, edges)
}

/// Undirected simple projection: direction and predicate identity dropped,
/// parallel links collapsed, literals ignored.
pub fn project_undirected(triples: &TripleSet, cfg: &ProjectionConfig) -> Labelled<UndirectedGraph> {
    let (labels, index, edges) = collect(triples, cfg);
    Labelled {
        graph: UndirectedGraph::from_edges(labels.len(), &edges),
        labels,
        index,
    }
}

/// Directed projection, subject → object.
pub fn project_directed(triples: &TripleSet, cfg: &ProjectionConfig) -> Labelled<DirectedGraph> {
    let (labels, index, edges) = collect(triples, cfg);
    Labelled {
        graph: DirectedGraph::from_edges(labels.len(), &edges),
        labels,
        index,
    }
}

/// Undirected neighbourhoods over all non-literal triples (every predicate),
/// excluding the node itself.
pub fn neighbourhoods(triples: &TripleSet) -> BTreeMap<Term, BTreeSet<Term>> {
    let mut out: BTreeMap<Term, BTreeSet<Term>> = BTreeMap::new();
    for t in triples.iter().filter(|t| !t.object().is_literal()) {
        let (s, o) = (t.subject(), t.object());
        out.entry(s.clone()).or_default();
        out.entry(o.clone()).or_default();
        if s != o {
            out.get_mut(s).expect("inserted").insert(o.clone());
            out.get_mut(o).expect("inserted").insert(s.clone());
        }
    }
    out
}
