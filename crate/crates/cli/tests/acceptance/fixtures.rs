//! Constructed inputs shared by the criteria.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kgevo_core::graph::{DirectedGraph, UndirectedGraph};
use kgevo_core::rdf::vocab::RDF_TYPE;
use kgevo_core::rdf::{parse_set, Term, Triple, TripleSet};

pub const DBO: &str = "http://dbpedia.org/ontology/";

pub fn node(i: usize) -> Term {
    Term::iri(format!("urn:n{i}")).unwrap()
}

pub fn edge(u: usize, p: &str, v: usize) -> Triple {
    Triple::iris(&format!("urn:n{u}"), &format!("urn:{p}"), &format!("urn:n{v}")).unwrap()
}

pub fn lit(s: &str, p: &str, o: &str) -> Triple {
    Triple::new(Term::iri(s).unwrap(), Term::iri(p).unwrap(), Term::literal(o)).unwrap()
}

pub fn res(s: &str, p: &str, o: &str) -> Triple {
    Triple::iris(s, p, o).unwrap()
}

pub fn random_undirected(rng: &mut ChaCha8Rng, n: usize, p: f64) -> UndirectedGraph {
    let mut g = UndirectedGraph::new(n);
    for u in 0..n {
        for v in u + 1..n {
            if rng.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

pub fn random_digraph(rng: &mut ChaCha8Rng, n: usize, p: f64) -> DirectedGraph {
    let mut g = DirectedGraph::new(n);
    for u in 0..n {
        for v in 0..n {
            if u != v && rng.gen_bool(p) {
                g.add_edge(u, v);
            }
        }
    }
    g
}

/// Random spanning tree plus `extra` chords.
pub fn connected(rng: &mut ChaCha8Rng, n: usize, extra: usize) -> UndirectedGraph {
    let mut g = UndirectedGraph::new(n);
    for v in 1..n {
        g.add_edge(v, rng.gen_range(0..v));
    }
    for _ in 0..extra {
        let (u, v) = (rng.gen_range(0..n), rng.gen_range(0..n));
        if u != v {
            g.add_edge(u, v);
        }
    }
    g
}

/// Two 6-cliques joined by the bridge 5–6.
pub fn two_cliques() -> UndirectedGraph {
    let mut g = UndirectedGraph::new(12);
    for base in [0, 6] {
        for u in base..base + 6 {
            for v in u + 1..base + 6 {
                g.add_edge(u, v);
            }
        }
    }
    g.add_edge(5, 6);
    g
}

/// Path, star, cycle, grid, complete graph, two cliques, edgeless, then
/// 60 random graphs of up to 30 nodes.
pub fn betweenness_suite() -> Vec<UndirectedGraph> {
    let mut grid = UndirectedGraph::new(25);
    for r in 0..5 {
        for c in 0..5 {
            if c < 4 {
                grid.add_edge(r * 5 + c, r * 5 + c + 1);
            }
            if r < 4 {
                grid.add_edge(r * 5 + c, (r + 1) * 5 + c);
            }
        }
    }
    let mut complete = UndirectedGraph::new(8);
    for u in 0..8 {
        for v in u + 1..8 {
            complete.add_edge(u, v);
        }
    }
    let mut out = vec![
        UndirectedGraph::from_edges(10, &(0..9).map(|i| (i, i + 1)).collect::<Vec<_>>()),
        UndirectedGraph::from_edges(9, &(1..9).map(|i| (0, i)).collect::<Vec<_>>()),
        UndirectedGraph::from_edges(11, &(0..11).map(|i| (i, (i + 1) % 11)).collect::<Vec<_>>()),
        grid,
        complete,
        two_cliques(),
        UndirectedGraph::new(4),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    for i in 0..60 {
        let n = rng.gen_range(1..=30);
        out.push(random_undirected(&mut rng, n, [0.05, 0.1, 0.2, 0.5][i % 4]));
    }
    out
}

pub fn eight_node_digraphs() -> Vec<DirectedGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut out: Vec<DirectedGraph> = (0..30)
        .map(|i| random_digraph(&mut rng, 8, [0.15, 0.3, 0.5][i % 3]))
        .collect();
    out.push(DirectedGraph::from_edges(
        8,
        &(0..8).map(|i| (i, (i + 1) % 8)).collect::<Vec<_>>(),
    ));
    out.push(DirectedGraph::from_edges(
        8,
        &(1..8).map(|i| (i, 0)).collect::<Vec<_>>(),
    ));
    out.push(DirectedGraph::from_edges(
        8,
        &(0..7).map(|i| (i, i + 1)).collect::<Vec<_>>(),
    ));
    out
}

/// A snapshot of `n` triples over `n / 5` subjects, a quarter with literal objects.
pub fn random_snapshot(rng: &mut ChaCha8Rng, n: usize) -> TripleSet {
    let subjects = (n / 5).max(2);
    let mut out = TripleSet::new();
    while out.len() < n {
        let s = format!("http://ex.org/r{}", rng.gen_range(0..subjects));
        let p = format!("http://ex.org/p{}", rng.gen_range(0..8));
        let t = if rng.gen_bool(0.25) {
            lit(&s, &p, &format!("v{}", rng.gen_range(0..1000)))
        } else {
            res(&s, &p, &format!("http://ex.org/r{}", rng.gen_range(0..subjects * 2)))
        };
        out.insert(t);
    }
    out
}

/// (occurrences in old, additions, removals) for properties `urn:p0`..`urn:p9`.
pub const TEN: [(usize, usize, usize); 10] = [
    (10, 3, 2),
    (4, 0, 3),
    (2, 5, 2),
    (8, 1, 0),
    (5, 2, 5),
    (1, 1, 1),
    (20, 0, 1),
    (0, 3, 0),
    (16, 4, 4),
    (3, 0, 3),
];

pub fn ten_properties() -> (TripleSet, TripleSet) {
    let mut old = TripleSet::new();
    let mut new = TripleSet::new();
    for (i, &(occ, add, rem)) in TEN.iter().enumerate() {
        let p = format!("urn:p{i}");
        for k in 0..occ {
            let t = lit(&format!("urn:s{k}"), &p, "old");
            old.insert(t.clone());
            if k >= rem {
                new.insert(t);
            }
        }
        for k in 0..add {
            new.insert(lit(&format!("urn:s{k}"), &p, "new"));
        }
    }
    (old, new)
}

/// Persons linked to places by dbo:nationality; Place0..2 are retyped from
/// Country to EthnicGroup, Place4 (only a birthPlace) to City, and Place5
/// loses its only link while being retyped.
pub fn nationality() -> (TripleSet, TripleSet) {
    let nat = format!("{DBO}nationality");
    let birth = format!("{DBO}birthPlace");
    let country = format!("{DBO}Country");
    let ethnic = format!("{DBO}EthnicGroup");
    let place = |k: usize| format!("http://dbpedia.org/resource/Place{k}");
    let person = |k: usize| format!("http://dbpedia.org/resource/Person{k}");
    let mut shared = TripleSet::new();
    for k in 0..8 {
        shared.insert(res(&person(k), &nat, &place(k % 4)));
    }
    shared.insert(res(&person(9), &birth, &place(4)));
    shared.insert(res(&person(9), &nat, &place(3)));
    let mut old = shared.clone();
    let mut new = shared;
    for k in 0..5 {
        old.insert(res(&place(k), RDF_TYPE, &country));
    }
    for k in 0..3 {
        new.insert(res(&place(k), RDF_TYPE, &ethnic));
    }
    new.insert(res(&place(3), RDF_TYPE, &country));
    new.insert(res(&place(4), RDF_TYPE, &format!("{DBO}City")));
    old.insert(res(&person(10), &nat, &place(5)));
    old.insert(res(&place(5), RDF_TYPE, &country));
    new.insert(res(&place(5), RDF_TYPE, &ethnic));
    (old, new)
}

/// 30 triples: 7 classes (Employee only as a type object), 4 subclass
/// axioms, 12 properties (declared or used as predicates).
const MINI_ONTOLOGY: &str = "\
O:Agent RDF:type OWL:Class .
O:Person RDF:type OWL:Class .
O:Organisation RDF:type OWL:Class .
O:Place RDF:type RDFS:Class .
O:Person RDFS:subClassOf O:Agent .
O:Organisation RDFS:subClassOf O:Agent .
O:City RDFS:subClassOf O:Place .
O:Company RDFS:subClassOf O:Organisation .
O:name RDF:type OWL:DatatypeProperty .
O:worksFor RDF:type OWL:ObjectProperty .
O:locatedIn RDF:type OWL:ObjectProperty .
O:locatedIn RDF:type OWL:TransitiveProperty .
O:founded RDF:type RDF:Property .
O:label RDF:type OWL:AnnotationProperty .
O:worksFor RDFS:domain O:Person .
O:worksFor RDFS:range O:Organisation .
O:name RDFS:domain O:Agent .
O:locatedIn RDFS:range O:Place .
O:Agent RDFS:label \"Agent\"@en .
O:Person RDFS:label \"Person\"@en .
O:Place RDFS:comment \"A location\" .
O:alice RDF:type O:Person .
O:acme RDF:type O:Company .
O:rome RDF:type O:City .
O:bob RDF:type O:Employee .
O:alice O:worksFor O:acme .
O:acme O:locatedIn O:rome .
O:alice O:name \"Alice\" .
O:onto RDF:type OWL:Ontology .
O:onto DCT:modified \"2020-01-01\"^^<http://www.w3.org/2001/XMLSchema#date> .
";

pub fn mini_ontology() -> TripleSet {
    let prefixes = [
        ("RDFS:", "http://www.w3.org/2000/01/rdf-schema#"),
        ("RDF:", "http://www.w3.org/1999/02/22-rdf-syntax-ns#"),
        ("OWL:", "http://www.w3.org/2002/07/owl#"),
        ("DCT:", "http://purl.org/dc/terms/"),
        ("O:", "http://ex.org/o#"),
    ];
    let doc: String = MINI_ONTOLOGY
        .lines()
        .map(|line| {
            let mut parts: Vec<String> = Vec::new();
            let (terms, tail) = line.split_at(line.rfind(" .").unwrap());
            for word in terms.splitn(3, ' ') {
                let expanded = prefixes
                    .iter()
                    .find_map(|(p, ns)| word.strip_prefix(p).map(|local| format!("<{ns}{local}>")));
                parts.push(expanded.unwrap_or_else(|| word.to_owned()));
            }
            format!("{}{tail}\n", parts.join(" "))
        })
        .collect();
    parse_set(&doc).unwrap()
}

/// People 0..4 work at 10 and live in 11; people 5..9 work at 12 and live in 13.
pub fn two_cluster_kg() -> TripleSet {
    let mut kg = TripleSet::new();
    for (people, company, city) in [(0..5, 10, 11), (5..10, 12, 13)] {
        for p in people {
            kg.insert(edge(p, "worksAt", company));
            kg.insert(edge(p, "livesIn", city));
        }
    }
    kg
}

/// 500 triples: five loosely bridged groups of 20 typed resources with
/// dense internal links and a few literals.
pub fn pipeline_kg() -> TripleSet {
    let mut rng = ChaCha8Rng::seed_from_u64(500);
    let r = |i: usize| format!("http://ex.org/kg/r{i}");
    let mut kg = TripleSet::new();
    for i in 0..100 {
        kg.insert(res(&r(i), RDF_TYPE, &format!("http://ex.org/kg/Class{}", i / 20)));
        kg.insert(lit(&r(i), "http://ex.org/kg/name", &format!("resource {i}")));
    }
    for g in 0..5 {
        kg.insert(res(&r(g * 20), "http://ex.org/kg/bridge", &r(((g + 1) % 5) * 20)));
    }
    while kg.len() < 500 {
        let g = rng.gen_range(0..5) * 20;
        let (u, v) = (g + rng.gen_range(0..20), g + rng.gen_range(0..20));
        if u != v {
            kg.insert(res(
                &r(u),
                &format!("http://ex.org/kg/link{}", rng.gen_range(0..3)),
                &r(v),
            ));
        }
    }
    kg
}
