//! Additions and deletions between two snapshots.

use serde::{Deserialize, Serialize};

use crate::rdf::{parse_line_str, ParseError, Triple, TripleSet};

#[derive(Debug, thiserror::Error)]
pub enum ChangeSetError {
    #[error("triple both added and deleted: {0}")]
    Overlap(Box<Triple>),
    #[error("deleted triple not present in base: {0}")]
    MissingDeletion(Box<Triple>),
    #[error("added triple already present in base: {0}")]
    DuplicateAddition(Box<Triple>),
    #[error("invalid delta JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid triple in delta: {0}")]
    Triple(#[from] ParseError),
    #[error("delta line is empty or a comment")]
    EmptyLine,
}

/// `added` = triples of the newer snapshot missing from the older one,
/// `deleted` = the reverse. The two sets are disjoint; a modification shows
/// up as one deletion plus one addition.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ChangeSet {
    added: TripleSet,
    deleted: TripleSet,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DeltaDoc {
    added: Vec<String>,
    deleted: Vec<String>,
}

impl ChangeSet {
    pub fn new(added: TripleSet, deleted: TripleSet) -> Result<Self, ChangeSetError> {
        if let Some(t) = added.intersection(&deleted).next() {
            return Err(ChangeSetError::Overlap(Box::new(t.clone())));
        }
        Ok(ChangeSet { added, deleted })
    }

    /// Diff from `old` to `new`.
    pub fn between(old: &TripleSet, new: &TripleSet) -> Self {
        ChangeSet {
            added: new.difference(old).cloned().collect(),
            deleted: old.difference(new).cloned().collect(),
        }
    }

    pub fn added(&self) -> &TripleSet {
        &self.added
    }

    pub fn deleted(&self) -> &TripleSet {
        &self.deleted
    }

    /// All changed triples (added ∪ deleted), each tagged with whether it was added.
    pub fn updates(&self) -> impl Iterator<Item = (&Triple, bool)> {
        self.added
            .iter()
            .map(|t| (t, true))
            .chain(self.deleted.iter().map(|t| (t, false)))
    }

    pub fn len(&self) -> usize {
        self.added.len() + self.deleted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.added.is_empty() && self.deleted.is_empty()
    }

    pub fn inverse(&self) -> ChangeSet {
        ChangeSet {
            added: self.deleted.clone(),
            deleted: self.added.clone(),
        }
    }

    /// Applies the change to `base`. Every deletion must be present and no
    /// addition may already exist.
    pub fn apply(&self, base: &TripleSet) -> Result<TripleSet, ChangeSetError> {
        let mut out = base.clone();
        for t in &self.deleted {
            if !out.remove(t) {
                return Err(ChangeSetError::MissingDeletion(Box::new(t.clone())));
            }
        }
        for t in &self.added {
            if !out.insert(t.clone()) {
                return Err(ChangeSetError::DuplicateAddition(Box::new(t.clone())));
            }
        }
        Ok(out)
    }

    /// `{"added":[...],"deleted":[...]}` with canonical N-Triples lines,
    /// each array sorted.
    pub fn to_delta_json(&self) -> Vec<u8> {
        let doc = DeltaDoc {
            added: self.added.iter().map(Triple::to_ntriples).collect(),
            deleted: self.deleted.iter().map(Triple::to_ntriples).collect(),
        };
        serde_json::to_vec(&doc).expect("string arrays always serialize")
    }

    pub fn from_delta_json(bytes: &[u8]) -> Result<Self, ChangeSetError> {
        let doc: DeltaDoc = serde_json::from_slice(bytes)?;
        let parse = |lines: Vec<String>| -> Result<TripleSet, ChangeSetError> {
            lines
                .iter()
                .map(|l| parse_line_str(l)?.ok_or(ChangeSetError::EmptyLine))
                .collect()
        };
        ChangeSet::new(parse(doc.added)?, parse(doc.deleted)?)
    }
}
