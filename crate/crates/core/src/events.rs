//! Community-level evolution between two snapshots.
//!
//! A pair of communities persists when their overlap (intersection over
//! union) exceeds `omega`. A newer community that overlaps the union of
//! several older ones in the same way is a merge; the mirror image is a
//! split. Whatever remains unmatched emerged (newer side) or disappeared
//! (older side).

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::hash::Hash;

use serde::Serialize;

use crate::community::Community;

/// Largest number of communities combined into one merge or split.
pub const MAX_GROUP: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum EventError {
    #[error("omega must lie in (0, 1], got {0}")]
    InvalidOmega(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum OverlapBasis {
    #[default]
    Triples,
    Nodes,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EventConfig {
    omega: f64,
    pub basis: OverlapBasis,
}

impl EventConfig {
    pub fn new(omega: f64, basis: OverlapBasis) -> Result<Self, EventError> {
        if omega > 0.0 && omega <= 1.0 {
            Ok(EventConfig { omega, basis })
        } else {
            Err(EventError::InvalidOmega(omega))
        }
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    /// Persistence test. `iou == 1` always passes so that `omega = 1`
    /// keeps identical communities.
    pub fn persists(&self, iou: f64) -> bool {
        iou > self.omega || iou >= 1.0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum EvolutionEvent {
    Persist { old: usize, new: usize, iou: f64 },
    Emerge { new: usize },
    Disappear { old: usize },
    Merge { old: BTreeSet<usize>, new: usize, iou: f64 },
    Split { old: usize, new: BTreeSet<usize>, iou: f64 },
}

#[derive(Serialize)]
struct EventLine {
    event: &'static str,
    old: Vec<usize>,
    new: Vec<usize>,
    iou: Option<f64>,
}

impl EvolutionEvent {
    pub fn name(&self) -> &'static str {
        match self {
            EvolutionEvent::Persist { .. } => "persist",
            EvolutionEvent::Emerge { .. } => "emerge",
            EvolutionEvent::Disappear { .. } => "disappear",
            EvolutionEvent::Merge { .. } => "merge",
            EvolutionEvent::Split { .. } => "split",
        }
    }

    pub fn old_ids(&self) -> Vec<usize> {
        match self {
            EvolutionEvent::Persist { old, .. }
            | EvolutionEvent::Disappear { old }
            | EvolutionEvent::Split { old, .. } => {
                vec![*old]
            }
            EvolutionEvent::Merge { old, .. } => old.iter().copied().collect(),
            EvolutionEvent::Emerge { .. } => Vec::new(),
        }
    }

    pub fn new_ids(&self) -> Vec<usize> {
        match self {
            EvolutionEvent::Persist { new, .. }
            | EvolutionEvent::Emerge { new }
            | EvolutionEvent::Merge { new, .. } => {
                vec![*new]
            }
            EvolutionEvent::Split { new, .. } => new.iter().copied().collect(),
            EvolutionEvent::Disappear { .. } => Vec::new(),
        }
    }

    pub fn iou(&self) -> Option<f64> {
        match self {
            EvolutionEvent::Persist { iou, .. }
            | EvolutionEvent::Merge { iou, .. }
            | EvolutionEvent::Split { iou, .. } => Some(*iou),
            _ => None,
        }
    }

    /// The same event seen with the two snapshots swapped.
    pub fn mirrored(&self) -> EvolutionEvent {
        match self.clone() {
            EvolutionEvent::Persist { old, new, iou } => EvolutionEvent::Persist {
                old: new,
                new: old,
                iou,
            },
            EvolutionEvent::Emerge { new } => EvolutionEvent::Disappear { old: new },
            EvolutionEvent::Disappear { old } => EvolutionEvent::Emerge { new: old },
            EvolutionEvent::Merge { old, new, iou } => EvolutionEvent::Split {
                old: new,
                new: old,
                iou,
            },
            EvolutionEvent::Split { old, new, iou } => EvolutionEvent::Merge {
                old: new,
                new: old,
                iou,
            },
        }
    }

    /// One JSON line: `{"event","old","new","iou"}`; `iou` is null for
    /// emerge/disappear.
    pub fn to_json_line(&self) -> String {
        serde_json::to_string(&EventLine {
            event: self.name(),
            old: self.old_ids(),
            new: self.new_ids(),
            iou: self.iou(),
        })
        .expect("plain data")
    }
}

fn iou_sets<T: Ord>(x: &BTreeSet<T>, y: &BTreeSet<T>) -> f64 {
    let inter = x.intersection(y).count();
    let union = x.len() + y.len() - inter;
    if union == 0 {
        0.0
    } else {
        inter as f64 / union as f64
    }
}

fn union_iou<T: Ord + Clone + Hash>(group: &[&BTreeSet<T>], target: &BTreeSet<T>) -> f64 {
    let mut union: BTreeSet<&T> = BTreeSet::new();
    for g in group {
        union.extend(g.iter());
    }
    let target: BTreeSet<&T> = target.iter().collect();
    iou_sets(&union, &target)
}

/// Intersection over union of two communities on the chosen basis; 0 when
/// both are empty.
pub fn iou(a: &Community, b: &Community, basis: OverlapBasis) -> f64 {
    match basis {
        OverlapBasis::Triples => iou_sets(&a.triples, &b.triples),
        OverlapBasis::Nodes => iou_sets(&a.nodes, &b.nodes),
    }
}

fn group_iou(group: &[&Community], target: &Community, basis: OverlapBasis) -> f64 {
    match basis {
        OverlapBasis::Triples => union_iou(&group.iter().map(|c| &c.triples).collect::<Vec<_>>(), &target.triples),
        OverlapBasis::Nodes => union_iou(&group.iter().map(|c| &c.nodes).collect::<Vec<_>>(), &target.nodes),
    }
}

/// A candidate group event seen from the single community's side.
struct GroupCandidate {
    /// true: one newer community absorbs several older ones
    merge: bool,
    single: usize,
    group: BTreeSet<usize>,
    iou: f64,
}

/// For `target`, grow a group of `pool` members by descending overlap with
/// it (up to [`MAX_GROUP`]) and keep the best prefix of size ≥ 2.
fn best_group(target: &Community, pool: &[&Community], cfg: &EventConfig) -> Option<(BTreeSet<usize>, f64)> {
    let mut ranked: Vec<(f64, &Community)> = pool
        .iter()
        .map(|c| (iou(c, target, cfg.basis), *c))
        .filter(|(v, c)| *v > 0.0 || overlaps(c, target, cfg.basis))
        .collect();
    ranked.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then(a.1.id.cmp(&b.1.id))
    });
    ranked.truncate(MAX_GROUP);
    let mut best: Option<(usize, f64)> = None;
    for k in 2..=ranked.len() {
        let members: Vec<&Community> = ranked[..k].iter().map(|(_, c)| *c).collect();
        let v = group_iou(&members, target, cfg.basis);
        if best.is_none_or(|(_, b)| v > b) {
            best = Some((k, v));
        }
    }
    let (k, v) = best?;
    cfg.persists(v)
        .then(|| (ranked[..k].iter().map(|(_, c)| c.id).collect(), v))
}

fn overlaps(a: &Community, b: &Community, basis: OverlapBasis) -> bool {
    match basis {
        OverlapBasis::Triples => a.triples.intersection(&b.triples).next().is_some(),
        OverlapBasis::Nodes => a.nodes.intersection(&b.nodes).next().is_some(),
    }
}

/// Classifies how communities of the older snapshot (`older`) relate to
/// those of the newer one (`newer`). Every community appears in exactly one
/// event.
pub fn classify_events(older: &[Community], newer: &[Community], cfg: &EventConfig) -> Vec<EvolutionEvent> {
    let mut old_used: BTreeSet<usize> = BTreeSet::new();
    let mut new_used: BTreeSet<usize> = BTreeSet::new();
    let mut events = Vec::new();

    // Persist: greedy best-IoU one-to-one matching.
    let mut pairs: Vec<(f64, usize, usize)> = Vec::new();
    for o in older {
        for n in newer {
            let v = iou(o, n, cfg.basis);
            if cfg.persists(v) {
                pairs.push((v, o.id, n.id));
            }
        }
    }
    pairs.sort_by(|a, b| {
        b.0.partial_cmp(&a.0)
            .unwrap_or(Ordering::Equal)
            .then((a.1, a.2).cmp(&(b.1, b.2)))
    });
    for (v, o, n) in pairs {
        if !old_used.contains(&o) && !new_used.contains(&n) {
            old_used.insert(o);
            new_used.insert(n);
            events.push(EvolutionEvent::Persist { old: o, new: n, iou: v });
        }
    }

    // Merge / split candidates over what is left, then accepted greedily so
    // each community is consumed at most once.
    let free_old: Vec<&Community> = older.iter().filter(|c| !old_used.contains(&c.id)).collect();
    let free_new: Vec<&Community> = newer.iter().filter(|c| !new_used.contains(&c.id)).collect();
    let mut candidates = Vec::new();
    for n in &free_new {
        if let Some((group, v)) = best_group(n, &free_old, cfg) {
            candidates.push(GroupCandidate {
                merge: true,
                single: n.id,
                group,
                iou: v,
            });
        }
    }
    for o in &free_old {
        if let Some((group, v)) = best_group(o, &free_new, cfg) {
            candidates.push(GroupCandidate {
                merge: false,
                single: o.id,
                group,
                iou: v,
            });
        }
    }
    candidates.sort_by(|a, b| {
        b.iou
            .partial_cmp(&a.iou)
            .unwrap_or(Ordering::Equal)
            .then(a.group.len().cmp(&b.group.len()))
            .then(a.single.cmp(&b.single))
            .then(a.group.cmp(&b.group))
            .then(b.merge.cmp(&a.merge))
    });
    for c in candidates {
        let (singles, groups) = if c.merge {
            (&mut new_used, &mut old_used)
        } else {
            (&mut old_used, &mut new_used)
        };
        if singles.contains(&c.single) || c.group.iter().any(|g| groups.contains(g)) {
            continue;
        }
        singles.insert(c.single);
        groups.extend(c.group.iter().copied());
        events.push(if c.merge {
            EvolutionEvent::Merge {
                old: c.group,
                new: c.single,
                iou: c.iou,
            }
        } else {
            EvolutionEvent::Split {
                old: c.single,
                new: c.group,
                iou: c.iou,
            }
        });
    }

    for n in newer.iter().filter(|c| !new_used.contains(&c.id)) {
        events.push(EvolutionEvent::Emerge { new: n.id });
    }
    for o in older.iter().filter(|c| !old_used.contains(&c.id)) {
        events.push(EvolutionEvent::Disappear { old: o.id });
    }
    events
}
