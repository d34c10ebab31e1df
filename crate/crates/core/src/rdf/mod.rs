//! RDF terms, N-Triples I/O and dictionary encoding.

mod dictionary;
mod ntriples;
mod term;
pub mod vocab;

use std::collections::BTreeSet;

pub use dictionary::{Dictionary, EncodedTriple};
pub use ntriples::{
    canonical_serialize, parse_line_str, parse_ntriples, parse_ntriples_str, read_ntriples_file, ParseError,
    ParseErrorKind, ParseMode, ParseOutput,
};
pub use term::{BlankNode, Iri, Literal, Term, TermError, Triple};

/// A set of triples in canonical order.
pub type TripleSet = BTreeSet<Triple>;

#[derive(Debug, thiserror::Error)]
pub enum RdfError {
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("unknown dictionary id {0}")]
    UnknownId(u64),
    #[error(transparent)]
    InvalidTerm(#[from] TermError),
}

/// Parses a whole document strictly into a set.
pub fn parse_set(input: &str) -> Result<TripleSet, RdfError> {
    Ok(parse_ntriples_str(input, ParseMode::Strict)?
        .triples
        .into_iter()
        .collect())
}
