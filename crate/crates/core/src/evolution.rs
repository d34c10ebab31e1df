//! Per-resource change features, their expected distribution, and outlier
//! flagging (globally or within communities).

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::Serialize;
use statrs::function::erf::erfc;

use crate::changeset::ChangeSet;
use crate::community::Community;
use crate::graph::ProjectionConfig;
use crate::rdf::vocab::RDF_TYPE;
use crate::rdf::{Iri, Term, TripleSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EvolutionError {
    #[error("no feature vectors to describe")]
    EmptyInput,
    #[error("theta must lie in (0, 1), got {0}")]
    InvalidTheta(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Sign {
    Added,
    Deleted,
}

impl Sign {
    fn of(added: bool) -> Self {
        if added {
            Sign::Added
        } else {
            Sign::Deleted
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Sign::Added => "added",
            Sign::Deleted => "deleted",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum FeatureKey {
    TypeCount(Iri, Sign),
    PropCount(Iri, Sign),
    TypePropCount(Iri, Iri, Sign),
}

/// `type(<class>,added)`, `prop(<p>,deleted)`, `typeprop(<class>,<p>,added)`.
impl fmt::Display for FeatureKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            FeatureKey::TypeCount(c, s) => write!(f, "type({c},{})", s.as_str()),
            FeatureKey::PropCount(p, s) => write!(f, "prop({p},{})", s.as_str()),
            FeatureKey::TypePropCount(c, p, s) => write!(f, "typeprop({c},{p},{})", s.as_str()),
        }
    }
}

/// Which key families `extract_features` emits. All on by default.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct FeatureFamilies {
    pub types: bool,
    pub properties: bool,
    pub type_properties: bool,
}

impl Default for FeatureFamilies {
    fn default() -> Self {
        FeatureFamilies {
            types: true,
            properties: true,
            type_properties: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FeatureVector {
    pub resource: Term,
    pub counts: BTreeMap<FeatureKey, u64>,
}

impl FeatureVector {
    pub fn get(&self, key: &FeatureKey) -> u64 {
        self.counts.get(key).copied().unwrap_or(0)
    }
}

pub type TypeIndex = BTreeMap<Term, BTreeSet<Iri>>;

/// Classes of each subject according to the snapshot's `rdf:type` triples.
pub fn type_index(snapshot: &TripleSet) -> TypeIndex {
    let mut index = TypeIndex::new();
    for t in snapshot {
        if t.predicate_iri().as_str() == RDF_TYPE {
            if let Some(class) = t.object().as_iri() {
                index.entry(t.subject().clone()).or_default().insert(class.clone());
            }
        }
    }
    index
}

/// One vector per subject of a changed triple, ordered by resource.
pub fn extract_features(cs: &ChangeSet, types: &TypeIndex, families: FeatureFamilies) -> Vec<FeatureVector> {
    let none = BTreeSet::new();
    let mut out: BTreeMap<&Term, BTreeMap<FeatureKey, u64>> = BTreeMap::new();
    for (t, added) in cs.updates() {
        let sign = Sign::of(added);
        let p = t.predicate_iri();
        let counts = out.entry(t.subject()).or_default();
        let mut bump = |k: FeatureKey| *counts.entry(k).or_insert(0) += 1;
        if families.properties {
            bump(FeatureKey::PropCount(p.clone(), sign));
        }
        if families.types && p.as_str() == RDF_TYPE {
            if let Some(class) = t.object().as_iri() {
                bump(FeatureKey::TypeCount(class.clone(), sign));
            }
        }
        if families.type_properties {
            for class in types.get(t.subject()).unwrap_or(&none) {
                bump(FeatureKey::TypePropCount(class.clone(), p.clone(), sign));
            }
        }
    }
    out.into_iter()
        .map(|(r, counts)| FeatureVector {
            resource: r.clone(),
            counts,
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KeyStats {
    pub mean: f64,
    /// Population variance.
    pub variance: f64,
    /// Resources with a nonzero count for the key.
    pub support: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvolutionDescription {
    pub stats: BTreeMap<FeatureKey, KeyStats>,
    /// Number of resources the statistics were computed over.
    pub population: usize,
}

/// Mean and population variance of every key over all vectors; a vector
/// without a key counts as 0.
pub fn describe_evolution(vectors: &[FeatureVector]) -> Result<EvolutionDescription, EvolutionError> {
    if vectors.is_empty() {
        return Err(EvolutionError::EmptyInput);
    }
    let keys: BTreeSet<&FeatureKey> = vectors.iter().flat_map(|v| v.counts.keys()).collect();
    let n = vectors.len() as f64;
    let stats = keys
        .into_iter()
        .map(|k| {
            let values: Vec<f64> = vectors.iter().map(|v| v.get(k) as f64).collect();
            let mean = values.iter().sum::<f64>() / n;
            let variance = values.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
            let support = values.iter().filter(|&&x| x != 0.0).count();
            (
                k.clone(),
                KeyStats {
                    mean,
                    variance,
                    support,
                },
            )
        })
        .collect();
    Ok(EvolutionDescription {
        stats,
        population: vectors.len(),
    })
}

/// Two-sided Gaussian tail `P(|Z| ≥ |z|)` of `delta` under the key's
/// statistics. With zero variance any deviation has probability 0.
pub fn tail_probability(delta: f64, stats: &KeyStats) -> f64 {
    if stats.variance == 0.0 {
        return if delta == stats.mean { 1.0 } else { 0.0 };
    }
    let z = (delta - stats.mean) / stats.variance.sqrt();
    erfc(z.abs() / std::f64::consts::SQRT_2)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trigger {
    pub key: FeatureKey,
    pub delta: u64,
    pub mean: f64,
    pub variance: f64,
    pub p: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct NoteworthyReport {
    pub resource: Term,
    pub triggers: Vec<Trigger>,
    pub theta: f64,
}

#[derive(Serialize)]
struct TriggerLine<'a> {
    resource: String,
    key: String,
    delta: u64,
    mu: f64,
    sigma2: f64,
    p: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    community: Option<&'a usize>,
}

impl NoteworthyReport {
    /// One JSON line per trigger.
    pub fn to_json_lines(&self) -> Vec<String> {
        self.json_lines(None)
    }

    pub(crate) fn json_lines(&self, community: Option<&usize>) -> Vec<String> {
        self.triggers
            .iter()
            .map(|t| {
                serde_json::to_string(&TriggerLine {
                    resource: self.resource.label(),
                    key: t.key.to_string(),
                    delta: t.delta,
                    mu: t.mean,
                    sigma2: t.variance,
                    p: t.p,
                    community,
                })
                .expect("plain data")
            })
            .collect()
    }
}

fn check_theta(theta: f64) -> Result<(), EvolutionError> {
    if theta > 0.0 && theta < 1.0 {
        Ok(())
    } else {
        Err(EvolutionError::InvalidTheta(theta))
    }
}

/// Resources with at least one key whose tail probability is below `theta`.
pub fn flag_noteworthy(
    vectors: &[FeatureVector],
    desc: &EvolutionDescription,
    theta: f64,
) -> Result<Vec<NoteworthyReport>, EvolutionError> {
    check_theta(theta)?;
    let mut reports = Vec::new();
    for v in vectors {
        let triggers: Vec<Trigger> = desc
            .stats
            .iter()
            .filter_map(|(key, stats)| {
                let delta = v.get(key);
                let p = tail_probability(delta as f64, stats);
                (p < theta).then(|| Trigger {
                    key: key.clone(),
                    delta,
                    mean: stats.mean,
                    variance: stats.variance,
                    p,
                })
            })
            .collect();
        if !triggers.is_empty() {
            reports.push(NoteworthyReport {
                resource: v.resource.clone(),
                triggers,
                theta,
            });
        }
    }
    Ok(reports)
}

/// Flagging against each community's own statistics. Resources outside
/// every community are skipped; a resource listed in several communities
/// belongs to the first.
pub fn local_noteworthy(
    vectors: &[FeatureVector],
    communities: &[BTreeSet<Term>],
    theta: f64,
) -> Result<BTreeMap<usize, Vec<NoteworthyReport>>, EvolutionError> {
    check_theta(theta)?;
    let mut owner: BTreeMap<&Term, usize> = BTreeMap::new();
    for (c, members) in communities.iter().enumerate() {
        for r in members {
            owner.entry(r).or_insert(c);
        }
    }
    let mut groups: Vec<Vec<FeatureVector>> = vec![Vec::new(); communities.len()];
    for v in vectors {
        if let Some(&c) = owner.get(&v.resource) {
            groups[c].push(v.clone());
        }
    }
    let mut out = BTreeMap::new();
    for (c, group) in groups.iter().enumerate() {
        let reports = match describe_evolution(group) {
            Ok(desc) => flag_noteworthy(group, &desc, theta)?,
            Err(EvolutionError::EmptyInput) => Vec::new(),
            Err(e) => return Err(e),
        };
        out.insert(c, reports);
    }
    Ok(out)
}

/// JSON lines for `local_noteworthy` output, each tagged with its community.
pub fn local_json_lines(reports: &BTreeMap<usize, Vec<NoteworthyReport>>) -> Vec<String> {
    reports
        .iter()
        .flat_map(|(c, rs)| rs.iter().flat_map(move |r| r.json_lines(Some(c))))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CommunityFeatures {
    pub density: f64,
    pub node_count: usize,
    pub edge_count: usize,
    pub internal_triple_count: usize,
}

/// Density of the undirected projection restricted to the community's nodes.
pub fn community_features(c: &Community, snapshot: &TripleSet) -> CommunityFeatures {
    let cfg = ProjectionConfig::default();
    let inside = |t: &crate::rdf::Triple| c.nodes.contains(t.subject()) && c.nodes.contains(t.object());
    let mut edges: BTreeSet<(&Term, &Term)> = BTreeSet::new();
    let mut internal = 0;
    for t in snapshot.iter().filter(|t| inside(t)) {
        internal += 1;
        let (s, o) = (t.subject(), t.object());
        if s != o && cfg.is_edge(t) {
            edges.insert((s.min(o), s.max(o)));
        }
    }
    let n = c.nodes.len();
    let density = if n < 2 {
        0.0
    } else {
        edges.len() as f64 / (n * (n - 1) / 2) as f64
    };
    CommunityFeatures {
        density,
        node_count: n,
        edge_count: edges.len(),
        internal_triple_count: internal,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rdf::Triple;

    fn iri(s: &str) -> Iri {
        Iri::new(format!("http://ex.org/{s}")).unwrap()
    }

    fn vector(r: &str, key: &FeatureKey, count: u64) -> FeatureVector {
        FeatureVector {
            resource: Term::iri(format!("http://ex.org/{r}")).unwrap(),
            counts: [(key.clone(), count)].into(),
        }
    }

    #[test]
    fn untyped_addition() {
        let t = Triple::iris("http://ex.org/r", "http://ex.org/p", "http://ex.org/o").unwrap();
        let cs = ChangeSet::new([t].into(), TripleSet::new()).unwrap();
        let v = extract_features(&cs, &TypeIndex::new(), FeatureFamilies::default());
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].counts, [(FeatureKey::PropCount(iri("p"), Sign::Added), 1)].into());
        assert!(extract_features(&ChangeSet::default(), &TypeIndex::new(), FeatureFamilies::default()).is_empty());
    }

    #[test]
    fn typed_resource_crosses_classes() {
        let r = "http://ex.org/r";
        let old: TripleSet = [Triple::iris(r, RDF_TYPE, "http://ex.org/C").unwrap()].into();
        let new: TripleSet = [
            Triple::iris(r, RDF_TYPE, "http://ex.org/D").unwrap(),
            Triple::iris(r, "http://ex.org/p", "http://ex.org/o").unwrap(),
        ]
        .into();
        let cs = ChangeSet::between(&old, &new);
        let v = extract_features(&cs, &type_index(&old), FeatureFamilies::default());
        let c = &v[0].counts;
        assert_eq!(c[&FeatureKey::TypeCount(iri("C"), Sign::Deleted)], 1);
        assert_eq!(c[&FeatureKey::TypeCount(iri("D"), Sign::Added)], 1);
        assert_eq!(c[&FeatureKey::TypePropCount(iri("C"), iri("p"), Sign::Added)], 1);
        let only_props = FeatureFamilies {
            types: false,
            type_properties: false,
            ..Default::default()
        };
        let v = extract_features(&cs, &type_index(&old), only_props);
        assert!(v[0].counts.keys().all(|k| matches!(k, FeatureKey::PropCount(..))));
    }

    #[test]
    fn describe_examples() {
        let k = FeatureKey::PropCount(iri("p"), Sign::Added);
        let d = describe_evolution(&[vector("a", &k, 3)]).unwrap();
        assert_eq!(
            d.stats[&k],
            KeyStats {
                mean: 3.0,
                variance: 0.0,
                support: 1
            }
        );
        let d = describe_evolution(&[vector("a", &k, 0), vector("b", &k, 2)]).unwrap();
        assert_eq!((d.stats[&k].mean, d.stats[&k].variance), (1.0, 1.0));
        assert_eq!(describe_evolution(&[]), Err(EvolutionError::EmptyInput));
    }

    #[test]
    fn outlier_flagged() {
        let k = FeatureKey::PropCount(iri("p"), Sign::Added);
        let vs: Vec<_> = ["a", "b", "c", "d", "e"]
            .iter()
            .zip([1, 1, 1, 1, 21])
            .map(|(r, c)| vector(r, &k, c))
            .collect();
        let d = describe_evolution(&vs).unwrap();
        let flags = flag_noteworthy(&vs, &d, 0.05).unwrap();
        assert_eq!(flags.len(), 1);
        assert_eq!(flags[0].resource, vs[4].resource);
        // z = 2, two-sided tail 0.0455 from a standard normal table
        assert!((flags[0].triggers[0].p - 0.0455).abs() < 1e-4);
        assert!(flag_noteworthy(&vs, &d, 1.0).is_err());
    }

    #[test]
    fn zero_variance_key() {
        let k = FeatureKey::PropCount(iri("p"), Sign::Added);
        let stats = KeyStats {
            mean: 2.0,
            variance: 0.0,
            support: 1,
        };
        assert_eq!(tail_probability(2.0, &stats), 1.0);
        assert_eq!(tail_probability(3.0, &stats), 0.0);
        let vs = vec![vector("a", &k, 2), vector("b", &k, 2)];
        let d = describe_evolution(&vs).unwrap();
        assert!(flag_noteworthy(&vs, &d, 0.999).unwrap().is_empty());
    }

    #[test]
    fn json_line_shape() {
        let k = FeatureKey::PropCount(iri("p"), Sign::Added);
        let report = NoteworthyReport {
            resource: Term::iri("http://ex.org/a").unwrap(),
            triggers: vec![Trigger {
                key: k,
                delta: 21,
                mean: 5.0,
                variance: 64.0,
                p: 0.25,
            }],
            theta: 0.5,
        };
        assert_eq!(
            report.to_json_lines(),
            vec![
                r#"{"resource":"http://ex.org/a","key":"prop(<http://ex.org/p>,added)","delta":21,"mu":5.0,"sigma2":64.0,"p":0.25}"#
            ]
        );
    }

    #[test]
    fn features_of_pair_and_singleton() {
        let t = Triple::iris("http://ex.org/a", "http://ex.org/p", "http://ex.org/b").unwrap();
        let snapshot: TripleSet = [t].into();
        let nodes: BTreeSet<Term> = [
            Term::iri("http://ex.org/a").unwrap(),
            Term::iri("http://ex.org/b").unwrap(),
        ]
        .into();
        let f = community_features(&Community::induced(0, nodes, &snapshot), &snapshot);
        assert_eq!((f.density, f.edge_count, f.internal_triple_count), (1.0, 1, 1));
        let single: BTreeSet<Term> = [Term::iri("http://ex.org/a").unwrap()].into();
        assert_eq!(
            community_features(&Community::induced(1, single, &snapshot), &snapshot).density,
            0.0
        );
    }
}
