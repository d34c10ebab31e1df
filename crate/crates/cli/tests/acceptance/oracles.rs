//! Brute-force reference computations the library is checked against.

use std::collections::{BTreeMap, VecDeque};

use kgevo_core::graph::{DirectedGraph, UndirectedGraph};

fn bfs_counts(g: &UndirectedGraph, s: usize) -> (Vec<Option<usize>>, Vec<f64>) {
    let n = g.node_count();
    let mut dist = vec![None; n];
    let mut sigma = vec![0.0; n];
    dist[s] = Some(0);
    sigma[s] = 1.0;
    let mut q = VecDeque::from([s]);
    while let Some(u) = q.pop_front() {
        for w in g.neighbors(u) {
            if dist[w].is_none() {
                dist[w] = Some(dist[u].unwrap() + 1);
                q.push_back(w);
            }
            if dist[w] == Some(dist[u].unwrap() + 1) {
                sigma[w] += sigma[u];
            }
        }
    }
    (dist, sigma)
}

/// All-pairs edge betweenness: over unordered pairs {s, t}, edge {u, v}
/// carries σ_s(u)·σ_t(v)/σ_s(t) of the s–t paths when it lies on one.
pub fn edge_betweenness(g: &UndirectedGraph) -> BTreeMap<(usize, usize), f64> {
    let n = g.node_count();
    let all: Vec<_> = (0..n).map(|s| bfs_counts(g, s)).collect();
    let mut out = BTreeMap::new();
    for (a, b) in g.edges() {
        let mut total = 0.0;
        for s in 0..n {
            for t in s + 1..n {
                let (ds, ss) = &all[s];
                let (dt, st) = &all[t];
                let Some(dst) = ds[t] else { continue };
                for (u, v) in [(a, b), (b, a)] {
                    if let (Some(x), Some(y)) = (ds[u], dt[v]) {
                        if x + 1 + y == dst {
                            total += ss[u] * st[v] / ss[t];
                        }
                    }
                }
            }
        }
        out.insert((a.min(b), a.max(b)), total);
    }
    out
}

fn adjacency(g: &DirectedGraph) -> Vec<Vec<f64>> {
    let n = g.node_count();
    let mut a = vec![vec![0.0; n]; n];
    for (u, v) in g.edges() {
        a[u][v] = 1.0;
    }
    a
}

/// Power iteration on the dense Google matrix; dangling rows jump uniformly.
pub fn pagerank(g: &DirectedGraph, d: f64) -> Vec<f64> {
    let n = g.node_count();
    let nf = n as f64;
    let a = adjacency(g);
    let mut m = vec![vec![0.0; n]; n];
    for u in 0..n {
        let out: f64 = a[u].iter().sum();
        for v in 0..n {
            let walk = if out == 0.0 { 1.0 / nf } else { a[u][v] / out };
            m[v][u] = d * walk + (1.0 - d) / nf;
        }
    }
    let mut x = vec![1.0 / nf; n];
    for _ in 0..5000 {
        x = (0..n).map(|v| (0..n).map(|u| m[v][u] * x[u]).sum()).collect();
    }
    x
}

fn unit(v: Vec<f64>) -> Vec<f64> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

/// Dense `a ← Aᵀh`, `h ← A a`, both scaled to unit length. Returns (hub, authority).
pub fn hits(g: &DirectedGraph) -> (Vec<f64>, Vec<f64>) {
    let n = g.node_count();
    let a = adjacency(g);
    let mut hub = vec![1.0; n];
    let mut auth = vec![0.0; n];
    for _ in 0..20_000 {
        auth = unit((0..n).map(|v| (0..n).map(|u| a[u][v] * hub[u]).sum()).collect());
        hub = unit((0..n).map(|u| (0..n).map(|v| a[u][v] * auth[v]).sum()).collect());
    }
    (hub, auth)
}
