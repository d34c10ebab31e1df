//! Versioned storage of RDF snapshots and analytics over how a knowledge
//! graph evolves between them.

pub mod changeset;
pub mod community;
pub mod embeddings;
pub mod events;
pub mod evolution;
pub mod graph;
pub mod metrics;
pub mod ontology;
pub mod perturb;
pub mod property_stats;
pub mod rdf;
pub mod store;

pub(crate) fn csv_string(w: csv::Writer<Vec<u8>>) -> String {
    let bytes = w.into_inner().expect("in-memory flush");
    String::from_utf8(bytes).expect("csv of UTF-8 fields")
}
