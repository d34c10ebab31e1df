//! How often each property changes, relative to its prior use, and how the
//! types of referenced objects drift.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;

use crate::changeset::ChangeSet;
use crate::rdf::vocab::RDF_TYPE;
use crate::rdf::{Iri, Term, TripleSet};

/// Edit counts up to this value are tallied in the low-frequency histogram.
pub const LOW_FREQUENCY_MAX: u64 = 20;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Ratio {
    Value(f64),
    /// The property did not occur in the older snapshot.
    NewProperty,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyChangeRecord {
    pub property: Iri,
    pub added: u64,
    pub removed: u64,
    pub edited: u64,
    pub occurrence_old: u64,
    pub ratio: Ratio,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PropertyRanking {
    /// Descending by `edited`, ties by property IRI.
    pub records: Vec<PropertyChangeRecord>,
    /// Edit count (1..=20) → number of properties edited that often.
    pub low_frequency: BTreeMap<u64, usize>,
}

/// Counts additions and removals per predicate, irrespective of subject and
/// object, and fills in rates against `old`. `top_k` truncates the records
/// but not the histogram.
pub fn rank_properties(cs: &ChangeSet, old: &TripleSet, top_k: Option<usize>) -> PropertyRanking {
    let mut counts: BTreeMap<&Iri, (u64, u64)> = BTreeMap::new();
    for (t, added) in cs.updates() {
        let c = counts.entry(t.predicate_iri()).or_default();
        if added {
            c.0 += 1;
        } else {
            c.1 += 1;
        }
    }
    let mut records: Vec<PropertyChangeRecord> = counts
        .into_iter()
        .map(|(p, (added, removed))| PropertyChangeRecord {
            property: p.clone(),
            added,
            removed,
            edited: added + removed,
            occurrence_old: 0,
            ratio: Ratio::NewProperty,
        })
        .collect();
    records.sort_by(|a, b| b.edited.cmp(&a.edited).then_with(|| a.property.cmp(&b.property)));
    let mut low_frequency = BTreeMap::new();
    for r in records.iter().filter(|r| r.edited <= LOW_FREQUENCY_MAX) {
        *low_frequency.entry(r.edited).or_insert(0) += 1;
    }
    if let Some(k) = top_k {
        records.truncate(k);
    }
    PropertyRanking {
        records: relative_rates(records, old),
        low_frequency,
    }
}

/// Sets `occurrence_old` and `ratio = edited / occurrence_old`.
pub fn relative_rates(mut records: Vec<PropertyChangeRecord>, old: &TripleSet) -> Vec<PropertyChangeRecord> {
    let wanted: BTreeSet<&Iri> = records.iter().map(|r| &r.property).collect();
    let mut occurrence: BTreeMap<&Iri, u64> = BTreeMap::new();
    for t in old {
        if wanted.contains(t.predicate_iri()) {
            *occurrence.entry(t.predicate_iri()).or_insert(0) += 1;
        }
    }
    let occurrence: BTreeMap<Iri, u64> = occurrence.into_iter().map(|(p, n)| (p.clone(), n)).collect();
    for r in &mut records {
        r.occurrence_old = occurrence.get(&r.property).copied().unwrap_or(0);
        r.ratio = match r.occurrence_old {
            0 => Ratio::NewProperty,
            n => Ratio::Value(r.edited as f64 / n as f64),
        };
    }
    records
}

/// Records with a defined ratio, highest ratio first (ties by property).
pub fn rank_by_ratio(records: &[PropertyChangeRecord]) -> Vec<&PropertyChangeRecord> {
    let mut out: Vec<(&PropertyChangeRecord, f64)> = records
        .iter()
        .filter_map(|r| match r.ratio {
            Ratio::Value(v) => Some((r, v)),
            Ratio::NewProperty => None,
        })
        .collect();
    out.sort_by(|a, b| b.1.total_cmp(&a.1).then_with(|| a.0.property.cmp(&b.0.property)));
    out.into_iter().map(|(r, _)| r).collect()
}

/// `property,added,removed,edited,occurrence_old,ratio`; ratio is `new` for
/// properties absent from the older snapshot.
pub fn records_csv(records: &[PropertyChangeRecord]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["property", "added", "removed", "edited", "occurrence_old", "ratio"])
        .expect("in-memory write");
    for r in records {
        let ratio = match r.ratio {
            Ratio::Value(v) => v.to_string(),
            Ratio::NewProperty => "new".to_owned(),
        };
        w.write_record([
            r.property.as_str(),
            &r.added.to_string(),
            &r.removed.to_string(),
            &r.edited.to_string(),
            &r.occurrence_old.to_string(),
            &ratio,
        ])
        .expect("in-memory write");
    }
    crate::csv_string(w)
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct TypeMigration {
    pub property: Iri,
    pub from_class: Iri,
    pub to_class: Iri,
    pub object_count: usize,
}

#[derive(Debug, Clone)]
pub struct MigrationConfig {
    pub type_predicate: Iri,
    /// Only these properties, when set.
    pub properties: Option<BTreeSet<Iri>>,
    /// Drop migrations seen on fewer objects.
    pub min_count: usize,
}

impl Default for MigrationConfig {
    fn default() -> Self {
        MigrationConfig {
            type_predicate: Iri::new(RDF_TYPE).expect("valid IRI"),
            properties: None,
            min_count: 1,
        }
    }
}

fn types_of<'a>(snapshot: &'a TripleSet, type_predicate: &Iri) -> BTreeMap<&'a Term, BTreeSet<&'a Iri>> {
    let mut out: BTreeMap<&Term, BTreeSet<&Iri>> = BTreeMap::new();
    for t in snapshot.iter().filter(|t| t.predicate_iri() == type_predicate) {
        if let Some(c) = t.object().as_iri() {
            out.entry(t.subject()).or_default().insert(c);
        }
    }
    out
}

/// For every non-literal object linked by the same triple in both versions,
/// each (lost type, gained type) pair counts the object once per property.
/// Sorted by descending count, then by (property, from, to).
pub fn type_migrations(old: &TripleSet, new: &TripleSet, cfg: &MigrationConfig) -> Vec<TypeMigration> {
    let old_types = types_of(old, &cfg.type_predicate);
    let new_types = types_of(new, &cfg.type_predicate);
    let none = BTreeSet::new();
    let mut objects: BTreeMap<(&Iri, &Iri, &Iri), BTreeSet<&Term>> = BTreeMap::new();
    for t in old.intersection(new) {
        let p = t.predicate_iri();
        if t.object().is_literal() || cfg.properties.as_ref().is_some_and(|ps| !ps.contains(p)) {
            continue;
        }
        let o = t.object();
        let before = old_types.get(o).unwrap_or(&none);
        let after = new_types.get(o).unwrap_or(&none);
        for from in before.difference(after) {
            for to in after.difference(before) {
                objects.entry((p, *from, *to)).or_default().insert(o);
            }
        }
    }
    let mut out: Vec<TypeMigration> = objects
        .into_iter()
        .filter(|(_, os)| os.len() >= cfg.min_count.max(1))
        .map(|((p, from, to), os)| TypeMigration {
            property: p.clone(),
            from_class: from.clone(),
            to_class: to.clone(),
            object_count: os.len(),
        })
        .collect();
    out.sort_by(|a, b| b.object_count.cmp(&a.object_count).then_with(|| a.cmp(b)));
    out
}

#[derive(Serialize)]
struct MigrationEdge<'a> {
    property: &'a str,
    from: &'a str,
    to: &'a str,
    count: usize,
}

#[derive(Serialize)]
struct MigrationGraph<'a> {
    nodes: BTreeSet<&'a str>,
    edges: Vec<MigrationEdge<'a>>,
}

/// `{"nodes":[classes],"edges":[{"property","from","to","count"}]}`
pub fn migrations_json(migrations: &[TypeMigration]) -> serde_json::Value {
    let graph = MigrationGraph {
        nodes: migrations
            .iter()
            .flat_map(|m| [m.from_class.as_str(), m.to_class.as_str()])
            .collect(),
        edges: migrations
            .iter()
            .map(|m| MigrationEdge {
                property: m.property.as_str(),
                from: m.from_class.as_str(),
                to: m.to_class.as_str(),
                count: m.object_count,
            })
            .collect(),
    };
    serde_json::to_value(graph).expect("plain data")
}
