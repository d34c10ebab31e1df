//! TransE embeddings and the drift measures built on them.

use std::collections::{BTreeMap, BTreeSet};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::graph::neighbourhoods;
use crate::rdf::{Iri, Term, TermError, TripleSet};

#[derive(Debug, thiserror::Error)]
pub enum EmbeddingError {
    #[error("no triple with a non-literal object to train on")]
    NoTrainableTriples,
    #[error("dimension must be at least 2, got {0}")]
    InvalidDimension(usize),
    #[error("snapshot has no nodes")]
    EmptySnapshot,
    #[error("entity not in the model: {0}")]
    UnknownEntity(String),
    #[error("invalid model file: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid model file: {0}")]
    Term(#[from] TermError),
    #[error("invalid model file: vector of {entry} has length {len}, expected {dim}")]
    BadVector { entry: String, len: usize, dim: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransEConfig {
    pub dim: usize,
    pub margin: f64,
    pub learning_rate: f64,
    pub epochs: usize,
    pub seed: u64,
}

impl Default for TransEConfig {
    fn default() -> Self {
        TransEConfig {
            dim: 32,
            margin: 1.0,
            learning_rate: 0.01,
            epochs: 200,
            seed: 42,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingModel {
    pub dim: usize,
    pub seed: u64,
    pub entities: BTreeMap<Term, Vec<f64>>,
    pub relations: BTreeMap<Iri, Vec<f64>>,
}

#[derive(Serialize, Deserialize)]
struct ModelDoc {
    dim: usize,
    seed: u64,
    entities: BTreeMap<String, Vec<f64>>,
    relations: BTreeMap<String, Vec<f64>>,
}

fn norm(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

fn normalize(v: &mut [f64]) {
    let n = norm(v);
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt()
}

impl EmbeddingModel {
    pub fn entity(&self, term: &Term) -> Option<&[f64]> {
        self.entities.get(term).map(Vec::as_slice)
    }

    /// `{"dim","seed","entities":{label:[..]},"relations":{iri:[..]}}`
    pub fn to_json(&self) -> String {
        let doc = ModelDoc {
            dim: self.dim,
            seed: self.seed,
            entities: self.entities.iter().map(|(t, v)| (t.label(), v.clone())).collect(),
            relations: self
                .relations
                .iter()
                .map(|(r, v)| (r.as_str().to_owned(), v.clone()))
                .collect(),
        };
        serde_json::to_string(&doc).expect("finite floats")
    }

    pub fn from_json(s: &str) -> Result<Self, EmbeddingError> {
        let doc: ModelDoc = serde_json::from_str(s)?;
        let check = |entry: &str, v: &Vec<f64>| {
            if v.len() == doc.dim {
                Ok(())
            } else {
                Err(EmbeddingError::BadVector {
                    entry: entry.to_owned(),
                    len: v.len(),
                    dim: doc.dim,
                })
            }
        };
        let mut entities = BTreeMap::new();
        for (label, v) in &doc.entities {
            check(label, v)?;
            entities.insert(Term::from_label(label)?, v.clone());
        }
        let mut relations = BTreeMap::new();
        for (iri, v) in &doc.relations {
            check(iri, v)?;
            relations.insert(Iri::new(iri.clone())?, v.clone());
        }
        Ok(EmbeddingModel {
            dim: doc.dim,
            seed: doc.seed,
            entities,
            relations,
        })
    }
}

/// Trained model plus mean margin loss per epoch.
#[derive(Debug, Clone, PartialEq)]
pub struct Training {
    pub model: EmbeddingModel,
    pub losses: Vec<f64>,
}

/// `epoch,loss`, epochs counted from 1.
pub fn loss_csv(losses: &[f64]) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["epoch", "loss"]).expect("in-memory write");
    for (i, l) in losses.iter().enumerate() {
        w.serialize((i + 1, l)).expect("in-memory write");
    }
    crate::csv_string(w)
}

/// Margin-ranking TransE with SGD, one corrupted head or tail per positive
/// per epoch, L2 distance. Vectors start uniform in ±6/√dim; entity vectors
/// are unit-normalized at the start and after every epoch. Fully determined
/// by `cfg.seed`.
pub fn train_transe(triples: &TripleSet, cfg: &TransEConfig) -> Result<Training, EmbeddingError> {
    if cfg.dim < 2 {
        return Err(EmbeddingError::InvalidDimension(cfg.dim));
    }
    let trainable: Vec<_> = triples.iter().filter(|t| !t.object().is_literal()).collect();
    if trainable.is_empty() {
        return Err(EmbeddingError::NoTrainableTriples);
    }
    let entity_terms: Vec<&Term> = trainable
        .iter()
        .flat_map(|t| [t.subject(), t.object()])
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let relation_iris: Vec<&Iri> = trainable
        .iter()
        .map(|t| t.predicate_iri())
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    let entity_index: BTreeMap<&Term, usize> = entity_terms.iter().enumerate().map(|(i, t)| (*t, i)).collect();
    let relation_index: BTreeMap<&Iri, usize> = relation_iris.iter().enumerate().map(|(i, r)| (*r, i)).collect();
    let mut facts: Vec<(usize, usize, usize)> = trainable
        .iter()
        .map(|t| {
            (
                entity_index[t.subject()],
                relation_index[t.predicate_iri()],
                entity_index[t.object()],
            )
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let bound = 6.0 / (cfg.dim as f64).sqrt();
    let init = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..cfg.dim).map(|_| rng.gen_range(-bound..=bound)).collect() };
    let mut ent: Vec<Vec<f64>> = entity_terms.iter().map(|_| init(&mut rng)).collect();
    let mut rel: Vec<Vec<f64>> = relation_iris.iter().map(|_| init(&mut rng)).collect();
    ent.iter_mut().for_each(|v| normalize(v));
    rel.iter_mut().for_each(|v| normalize(v));

    let n_ent = ent.len();
    let mut losses = Vec::with_capacity(cfg.epochs);
    for _ in 0..cfg.epochs {
        facts.shuffle(&mut rng);
        let mut total = 0.0;
        for &(h, r, t) in &facts {
            let corrupt_head = rng.gen_bool(0.5);
            let mut e = rng.gen_range(0..n_ent);
            let original = if corrupt_head { h } else { t };
            while n_ent > 1 && e == original {
                e = rng.gen_range(0..n_ent);
            }
            let (nh, nt) = if corrupt_head { (e, t) } else { (h, e) };

            let d_pos = translation_distance(&ent[h], &rel[r], &ent[t]);
            let d_neg = translation_distance(&ent[nh], &rel[r], &ent[nt]);
            let loss = cfg.margin + d_pos - d_neg;
            if loss <= 0.0 {
                continue;
            }
            total += loss;
            // Gradients of both distances w.r.t. (h + r − t), taken before
            // any update.
            let g_pos = unit_residual(&ent[h], &rel[r], &ent[t], d_pos);
            let g_neg = unit_residual(&ent[nh], &rel[r], &ent[nt], d_neg);
            let lr = cfg.learning_rate;
            for k in 0..cfg.dim {
                ent[h][k] -= lr * g_pos[k];
                ent[t][k] += lr * g_pos[k];
                rel[r][k] -= lr * (g_pos[k] - g_neg[k]);
                ent[nh][k] += lr * g_neg[k];
                ent[nt][k] -= lr * g_neg[k];
            }
        }
        ent.iter_mut().for_each(|v| normalize(v));
        losses.push(total / facts.len() as f64);
    }

    Ok(Training {
        model: EmbeddingModel {
            dim: cfg.dim,
            seed: cfg.seed,
            entities: entity_terms.into_iter().cloned().zip(ent).collect(),
            relations: relation_iris.into_iter().cloned().zip(rel).collect(),
        },
        losses,
    })
}

fn translation_distance(h: &[f64], r: &[f64], t: &[f64]) -> f64 {
    h.iter()
        .zip(r)
        .zip(t)
        .map(|((h, r), t)| (h + r - t).powi(2))
        .sum::<f64>()
        .sqrt()
}

/// `(h + r − t) / ‖h + r − t‖`, or zero at distance 0.
fn unit_residual(h: &[f64], r: &[f64], t: &[f64], dist: f64) -> Vec<f64> {
    (0..h.len())
        .map(|k| if dist > 0.0 { (h[k] + r[k] - t[k]) / dist } else { 0.0 })
        .collect()
}

/// Mean vector of the embedded members; `None` when no member is embedded.
fn aggregate(members: &BTreeSet<Term>, model: &EmbeddingModel) -> Option<Vec<f64>> {
    let mut sum = vec![0.0; model.dim];
    let mut count = 0usize;
    for v in members.iter().filter_map(|m| model.entity(m)) {
        sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        count += 1;
    }
    (count > 0).then(|| sum.into_iter().map(|s| s / count as f64).collect())
}

/// Cosine similarity of the mean embeddings of two neighbourhoods. Members
/// missing from the model are skipped; 0 when either side has no embedded
/// member or a zero mean.
pub fn node_sim(neigh_v1: &BTreeSet<Term>, neigh_v2: &BTreeSet<Term>, model: &EmbeddingModel) -> f64 {
    let effective =
        |n: &BTreeSet<Term>| -> BTreeSet<Term> { n.iter().filter(|m| model.entity(m).is_some()).cloned().collect() };
    let (e1, e2) = (effective(neigh_v1), effective(neigh_v2));
    if e1.is_empty() || e2.is_empty() {
        return 0.0;
    }
    let (a, b) = match (aggregate(&e1, model), aggregate(&e2, model)) {
        (Some(a), Some(b)) => (a, b),
        _ => return 0.0,
    };
    let (na, nb) = (norm(&a), norm(&b));
    if na == 0.0 || nb == 0.0 {
        return 0.0;
    }
    if e1 == e2 {
        return 1.0;
    }
    let dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
    (dot / (na * nb)).clamp(-1.0, 1.0)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SemanticSimReport {
    pub per_node: BTreeMap<String, f64>,
    pub aggregate: f64,
}

/// Average `node_sim` over every node of `v1`, comparing its neighbourhood
/// in `v1` with the one in `v2` (empty if the node is gone).
pub fn semantic_sim(
    v1: &TripleSet,
    v2: &TripleSet,
    model: &EmbeddingModel,
) -> Result<SemanticSimReport, EmbeddingError> {
    let n1 = neighbourhoods(v1);
    if n1.is_empty() {
        return Err(EmbeddingError::EmptySnapshot);
    }
    let n2 = neighbourhoods(v2);
    let empty = BTreeSet::new();
    let per_node: BTreeMap<String, f64> = n1
        .iter()
        .map(|(node, neigh)| (node.label(), node_sim(neigh, n2.get(node).unwrap_or(&empty), model)))
        .collect();
    let aggregate = per_node.values().sum::<f64>() / per_node.len() as f64;
    Ok(SemanticSimReport { per_node, aggregate })
}

/// `1 / (1 + ‖a − b‖)`.
pub fn matetee_sim(a: &Term, b: &Term, model: &EmbeddingModel) -> Result<f64, EmbeddingError> {
    let lookup = |t: &Term| model.entity(t).ok_or_else(|| EmbeddingError::UnknownEntity(t.label()));
    Ok(1.0 / (1.0 + distance(lookup(a)?, lookup(b)?)))
}
