//! Co-evolution of ontologies that reuse each other's terms, and schema
//! size over versions.

use std::collections::BTreeSet;

use chrono::{DateTime, Duration, NaiveDate, Utc};
use serde::Serialize;

use crate::changeset::ChangeSet;
use crate::rdf::vocab::{self, DCT_MODIFIED, RDFS_SUBCLASS_OF, RDF_TYPE};
use crate::rdf::{Iri, Term, TripleSet};

/// Default synchronization window.
pub const DEFAULT_THRESHOLD_DAYS: i64 = 7;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum OntologyError {
    #[error("dependency undefined: no ontology-specific changes ({externally_induced} induced)")]
    UndefinedDependency { externally_induced: usize },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OntologyChange {
    pub ontology: String,
    pub timestamp: DateTime<Utc>,
    /// Subjects, predicates and non-literal objects of every changed triple.
    pub touched_terms: BTreeSet<Iri>,
}

impl OntologyChange {
    pub fn from_changeset(ontology: impl Into<String>, timestamp: DateTime<Utc>, cs: &ChangeSet) -> Self {
        let mut touched_terms = BTreeSet::new();
        for (t, _) in cs.updates() {
            for term in [t.subject(), t.predicate(), t.object()] {
                if let Some(iri) = term.as_iri() {
                    touched_terms.insert(iri.clone());
                }
            }
        }
        OntologyChange {
            ontology: ontology.into(),
            timestamp,
            touched_terms,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SyncResult {
    #[serde(rename = "es")]
    pub es_seconds: f64,
    #[serde(skip)]
    pub threshold_seconds: f64,
    pub synchronized: bool,
    #[serde(rename = "aligned")]
    pub aligned_terms: BTreeSet<Iri>,
}

fn seconds(d: Duration) -> f64 {
    d.num_milliseconds() as f64 / 1000.0
}

/// IRIs touched by both changes.
pub fn change_alignment(c1: &OntologyChange, c2: &OntologyChange) -> BTreeSet<Iri> {
    c1.touched_terms.intersection(&c2.touched_terms).cloned().collect()
}

/// Time gap between two changes, compared with `threshold`.
pub fn evolutionary_sync(c1: &OntologyChange, c2: &OntologyChange, threshold: Duration) -> SyncResult {
    let es_seconds = seconds(c1.timestamp - c2.timestamp).abs();
    let threshold_seconds = seconds(threshold);
    SyncResult {
        es_seconds,
        threshold_seconds,
        synchronized: es_seconds <= threshold_seconds,
        aligned_terms: change_alignment(c1, c2),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DependencyResult {
    #[serde(rename = "ec")]
    pub externally_induced: usize,
    #[serde(rename = "sc")]
    pub ontology_specific: usize,
    pub ed: f64,
}

/// A change is externally induced when some change of the dependency is
/// both within `threshold` of it and shares a touched term; every other
/// change is ontology-specific.
pub fn evolutionary_dependency(
    changes: &[OntologyChange],
    external: &[OntologyChange],
    threshold: Duration,
) -> Result<DependencyResult, OntologyError> {
    let induced = changes
        .iter()
        .filter(|c| {
            external.iter().any(|e| {
                let s = evolutionary_sync(c, e, threshold);
                s.synchronized && !s.aligned_terms.is_empty()
            })
        })
        .count();
    let specific = changes.len() - induced;
    if specific == 0 {
        return Err(OntologyError::UndefinedDependency {
            externally_induced: induced,
        });
    }
    Ok(DependencyResult {
        externally_induced: induced,
        ontology_specific: specific,
        ed: induced as f64 / specific as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct SchemaCounts {
    pub class_count: usize,
    pub subclass_axiom_count: usize,
    pub property_count: usize,
}

/// Classes: IRIs typed `owl:Class`/`rdfs:Class`, objects of `rdf:type`
/// from non-class subjects (outside the RDF/RDFS/OWL/XSD namespaces), and
/// both ends of `rdfs:subClassOf`. Properties: distinct predicates plus
/// IRIs declared as properties.
pub fn schema_counts(snapshot: &TripleSet) -> SchemaCounts {
    let is_type = |t: &&crate::rdf::Triple| t.predicate_iri().as_str() == RDF_TYPE;
    let mut classes: BTreeSet<&Iri> = BTreeSet::new();
    let mut properties: BTreeSet<&Iri> = BTreeSet::new();
    let mut subclass_axiom_count = 0;
    for t in snapshot {
        properties.insert(t.predicate_iri());
        if t.predicate_iri().as_str() == RDFS_SUBCLASS_OF {
            subclass_axiom_count += 1;
            classes.extend(t.subject().as_iri());
            classes.extend(t.object().as_iri());
        }
    }
    for t in snapshot.iter().filter(is_type) {
        match t.object().as_iri().map(Iri::as_str) {
            Some(vocab::OWL_CLASS | vocab::RDFS_CLASS) => classes.extend(t.subject().as_iri()),
            Some(c) if vocab::PROPERTY_CLASSES.contains(&c) => properties.extend(t.subject().as_iri()),
            _ => {}
        }
    }
    let declared: BTreeSet<&Iri> = classes.clone();
    for t in snapshot.iter().filter(is_type) {
        let subject_is_class = t.subject().as_iri().is_some_and(|s| declared.contains(s));
        if let Some(c) = t.object().as_iri() {
            if !subject_is_class && !vocab::is_builtin(c.as_str()) {
                classes.insert(c);
            }
        }
    }
    SchemaCounts {
        class_count: classes.len(),
        subclass_axiom_count,
        property_count: properties.len(),
    }
}

/// Latest `dct:modified` value in the snapshot (`xsd:dateTime` or
/// `xsd:date`), if any parses.
pub fn modified_timestamp(snapshot: &TripleSet) -> Option<DateTime<Utc>> {
    snapshot
        .iter()
        .filter(|t| t.predicate_iri().as_str() == DCT_MODIFIED)
        .filter_map(|t| match t.object() {
            Term::Literal(l) => parse_timestamp(l.lexical()),
            _ => None,
        })
        .max()
}

fn parse_timestamp(s: &str) -> Option<DateTime<Utc>> {
    let s = s.trim();
    DateTime::parse_from_rfc3339(s)
        .map(|d| d.with_timezone(&Utc))
        .ok()
        .or_else(|| {
            let date = NaiveDate::parse_from_str(s, "%Y-%m-%d").ok()?;
            Some(date.and_hms_opt(0, 0, 0)?.and_utc())
        })
}

/// In-data `dct:modified` when present, otherwise `fallback` (typically the
/// commit timestamp).
pub fn ontology_timestamp(snapshot: &TripleSet, fallback: DateTime<Utc>) -> DateTime<Utc> {
    modified_timestamp(snapshot).unwrap_or(fallback)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SchemaPoint {
    pub version: String,
    pub timestamp: DateTime<Utc>,
    pub counts: SchemaCounts,
}

/// `version,timestamp,class_count,subclass_count,property_count,class_delta,subclass_delta`,
/// deltas relative to the first row.
pub fn schema_series_csv(points: &[SchemaPoint]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record([
        "version",
        "timestamp",
        "class_count",
        "subclass_count",
        "property_count",
        "class_delta",
        "subclass_delta",
    ])
    .expect("in-memory write");
    let first = points.first().map(|p| p.counts).unwrap_or_default();
    for p in points {
        let c = p.counts;
        w.write_record([
            p.version.clone(),
            p.timestamp.to_rfc3339(),
            c.class_count.to_string(),
            c.subclass_axiom_count.to_string(),
            c.property_count.to_string(),
            (c.class_count as i64 - first.class_count as i64).to_string(),
            (c.subclass_axiom_count as i64 - first.subclass_axiom_count as i64).to_string(),
        ])
        .expect("in-memory write");
    }
    crate::csv_string(w)
}
