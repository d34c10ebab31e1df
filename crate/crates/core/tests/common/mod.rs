#![allow(dead_code)]

use proptest::prelude::*;

use kgevo_core::rdf::{Iri, Literal, Term, Triple, TripleSet};

pub fn iri_term() -> impl Strategy<Value = Term> {
    "[a-z0-9]{1,4}".prop_map(|s| Term::iri(format!("http://ex.org/{s}")).unwrap())
}

pub fn node_term() -> impl Strategy<Value = Term> {
    prop_oneof![
        4 => iri_term(),
        1 => "[a-z][a-z0-9_-]{0,3}[a-z0-9]?".prop_map(|s| Term::blank(s).unwrap()),
    ]
}

pub fn literal_term() -> impl Strategy<Value = Term> {
    let lexical = "[a-zA-Z0-9 \"\\\\\n\r\t\u{7}\u{7f}é😀<>]{0,8}";
    prop_oneof![
        lexical.prop_map(Term::literal),
        (lexical, "[a-z]{2}(-[A-Z]{2})?").prop_map(|(l, tag)| Term::Literal(Literal::lang(l, tag).unwrap())),
        lexical.prop_map(|l| {
            Term::Literal(Literal::typed(
                l,
                Iri::new("http://www.w3.org/2001/XMLSchema#integer").unwrap(),
            ))
        }),
    ]
}

pub fn predicate() -> impl Strategy<Value = Term> {
    "[a-e]".prop_map(|s| Term::iri(format!("http://ex.org/p/{s}")).unwrap())
}

pub fn triple() -> impl Strategy<Value = Triple> {
    let object = prop_oneof![3 => node_term(), 1 => literal_term()];
    (node_term(), predicate(), object).prop_map(|(s, p, o)| Triple::new(s, p, o).unwrap())
}

pub fn triple_set(max: usize) -> impl Strategy<Value = TripleSet> {
    prop::collection::btree_set(triple(), 0..max)
}

/// Triple between two `urn:n{i}` nodes.
pub fn edge(u: usize, p: &str, v: usize) -> Triple {
    Triple::iris(&format!("urn:n{u}"), &format!("urn:{p}"), &format!("urn:n{v}")).unwrap()
}

pub fn node(i: usize) -> Term {
    Term::iri(format!("urn:n{i}")).unwrap()
}
