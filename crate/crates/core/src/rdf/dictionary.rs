use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use super::term::{Term, Triple};
use super::RdfError;

/// A triple with every term replaced by its dictionary id.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EncodedTriple {
    pub s: u64,
    pub p: u64,
    pub o: u64,
}

/// Dense, first-seen term ids. Ids are never reassigned.
#[derive(Debug, Clone, Default)]
pub struct Dictionary {
    forward: HashMap<Term, u64>,
    reverse: Vec<Term>,
}

impl Dictionary {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.reverse.len()
    }

    pub fn is_empty(&self) -> bool {
        self.reverse.is_empty()
    }

    /// Id of `term`, assigning the next free id if unseen.
    pub fn intern(&mut self, term: &Term) -> u64 {
        if let Some(&id) = self.forward.get(term) {
            return id;
        }
        let id = self.reverse.len() as u64;
        self.forward.insert(term.clone(), id);
        self.reverse.push(term.clone());
        id
    }

    pub fn id_of(&self, term: &Term) -> Option<u64> {
        self.forward.get(term).copied()
    }

    pub fn term(&self, id: u64) -> Result<&Term, RdfError> {
        usize::try_from(id)
            .ok()
            .and_then(|i| self.reverse.get(i))
            .ok_or(RdfError::UnknownId(id))
    }

    pub fn encode(&mut self, t: &Triple) -> EncodedTriple {
        EncodedTriple {
            s: self.intern(t.subject()),
            p: self.intern(t.predicate()),
            o: self.intern(t.object()),
        }
    }

    /// Encodes without extending the dictionary; `None` if any term is unseen.
    pub fn lookup(&self, t: &Triple) -> Option<EncodedTriple> {
        Some(EncodedTriple {
            s: self.id_of(t.subject())?,
            p: self.id_of(t.predicate())?,
            o: self.id_of(t.object())?,
        })
    }

    pub fn decode(&self, e: &EncodedTriple) -> Result<Triple, RdfError> {
        let s = self.term(e.s)?.clone();
        let p = self.term(e.p)?.clone();
        let o = self.term(e.o)?.clone();
        Triple::new(s, p, o).map_err(RdfError::InvalidTerm)
    }
}
