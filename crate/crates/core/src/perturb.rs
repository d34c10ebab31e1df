//! Synthetic evolution with known ground truth.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::changeset::ChangeSet;
use crate::rdf::{Iri, Term, Triple, TripleSet};

/// Namespace of generated objects.
pub const SYNTH_PREFIX: &str = "urn:kgevo:synth:";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum PerturbError {
    #[error("need {needed} subjects, snapshot has {available}")]
    TooFewEntities { needed: usize, available: usize },
    #[error("alpha must lie in (0, 1), got {0}")]
    InvalidAlpha(f64),
    #[error("number of target entities must be at least 1")]
    NoTargets,
    #[error("step {step}: planned triple not present: {triple}")]
    PlannedTripleMissing { step: usize, triple: Box<Triple> },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PerturbMode {
    Add,
    Delete,
    Update,
    /// Selected subjects take add, delete and update in turn.
    #[default]
    All,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PerturbConfig {
    m: usize,
    alpha: f64,
    pub mode: PerturbMode,
    pub seed: u64,
}

impl PerturbConfig {
    pub fn new(m: usize, alpha: f64, mode: PerturbMode, seed: u64) -> Result<Self, PerturbError> {
        if m == 0 {
            return Err(PerturbError::NoTargets);
        }
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(PerturbError::InvalidAlpha(alpha));
        }
        Ok(PerturbConfig { m, alpha, mode, seed })
    }

    pub fn m(&self) -> usize {
        self.m
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Perturbation {
    pub snapshot: TripleSet,
    pub truth: ChangeSet,
    /// Subjects that were modified, ascending.
    pub targets: Vec<Term>,
}

struct FreshNames {
    prefix: String,
    next: u64,
    taken: BTreeSet<String>,
}

impl FreshNames {
    fn new(seed: u64, snapshot: &TripleSet) -> Self {
        let taken = snapshot
            .iter()
            .flat_map(|t| [t.subject(), t.object()])
            .filter_map(|term| match term {
                Term::Iri(i) if i.as_str().starts_with(SYNTH_PREFIX) => Some(i.as_str().to_owned()),
                Term::Literal(l) if l.lexical().starts_with(SYNTH_PREFIX) => Some(l.lexical().to_owned()),
                _ => None,
            })
            .collect();
        FreshNames {
            prefix: format!("{SYNTH_PREFIX}{seed}-"),
            next: 0,
            taken,
        }
    }

    fn next(&mut self) -> String {
        loop {
            let name = format!("{}{}", self.prefix, self.next);
            self.next += 1;
            if !self.taken.contains(&name) {
                return name;
            }
        }
    }

    fn iri(&mut self) -> Term {
        Term::Iri(Iri::new(self.next()).expect("synth IRIs are valid"))
    }

    /// A fresh object of the same kind: literals keep their annotation.
    fn replacing(&mut self, object: &Term) -> Term {
        match object {
            Term::Literal(l) => Term::Literal(l.with_lexical(self.next())),
            _ => self.iri(),
        }
    }
}

/// Modifies `⌈α·k⌉` of the `k` triples of each of `m` randomly chosen
/// subjects. Deletions drop existing triples, additions attach fresh objects
/// under predicates the subject already uses, updates swap an object for a
/// fresh one. The returned truth is exactly the applied change.
pub fn perturb(snapshot: &TripleSet, cfg: &PerturbConfig) -> Result<Perturbation, PerturbError> {
    let mut by_subject: BTreeMap<&Term, Vec<&Triple>> = BTreeMap::new();
    for t in snapshot {
        by_subject.entry(t.subject()).or_default().push(t);
    }
    if by_subject.len() < cfg.m {
        return Err(PerturbError::TooFewEntities {
            needed: cfg.m,
            available: by_subject.len(),
        });
    }
    let subjects: Vec<&Term> = by_subject.keys().copied().collect();
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut targets: Vec<&Term> = subjects.choose_multiple(&mut rng, cfg.m).copied().collect();
    targets.sort();

    let mut fresh = FreshNames::new(cfg.seed, snapshot);
    let mut added = TripleSet::new();
    let mut deleted = TripleSet::new();
    for (i, subject) in targets.iter().enumerate() {
        let own = &by_subject[subject];
        let n = ((cfg.alpha * own.len() as f64).ceil() as usize).clamp(1, own.len());
        let mode = match cfg.mode {
            PerturbMode::All => [PerturbMode::Add, PerturbMode::Delete, PerturbMode::Update][i % 3],
            m => m,
        };
        match mode {
            PerturbMode::Delete => {
                deleted.extend(own.choose_multiple(&mut rng, n).map(|t| (*t).clone()));
            }
            PerturbMode::Add => {
                for _ in 0..n {
                    let base = own.choose(&mut rng).expect("subject has triples");
                    let t = Triple::new((*subject).clone(), base.predicate().clone(), fresh.iri()).expect("IRI parts");
                    added.insert(t);
                }
            }
            PerturbMode::Update => {
                for old in own.choose_multiple(&mut rng, n) {
                    let object = fresh.replacing(old.object());
                    let t = Triple::new((*subject).clone(), old.predicate().clone(), object).expect("same kinds");
                    deleted.insert((*old).clone());
                    added.insert(t);
                }
            }
            PerturbMode::All => unreachable!("resolved above"),
        }
    }
    let truth = ChangeSet::new(added, deleted).expect("fresh triples never collide with deletions");
    let snapshot = truth.apply(snapshot).expect("deletions exist and additions are fresh");
    Ok(Perturbation {
        snapshot,
        truth,
        targets: targets.into_iter().cloned().collect(),
    })
}

#[derive(Debug, Clone, PartialEq)]
pub struct ControlledSeries {
    /// The original snapshot followed by one snapshot per step.
    pub snapshots: Vec<TripleSet>,
    /// Deletions applied at each step.
    pub truths: Vec<ChangeSet>,
}

/// Removes the listed triples step by step.
pub fn controlled_series(snapshot: &TripleSet, plan: &[TripleSet]) -> Result<ControlledSeries, PerturbError> {
    let mut snapshots = vec![snapshot.clone()];
    let mut truths = Vec::with_capacity(plan.len());
    for (step, removal) in plan.iter().enumerate() {
        let current = snapshots.last().expect("starts non-empty");
        if let Some(t) = removal.iter().find(|t| !current.contains(t)) {
            return Err(PerturbError::PlannedTripleMissing {
                step,
                triple: Box::new(t.clone()),
            });
        }
        let truth = ChangeSet::new(TripleSet::new(), removal.clone()).expect("no additions");
        snapshots.push(truth.apply(current).expect("checked above"));
        truths.push(truth);
    }
    Ok(ControlledSeries { snapshots, truths })
}
