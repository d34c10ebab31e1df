//! Content-addressed snapshot store: full materializations followed by
//! chains of deltas.
//!
//! Layout on disk:
//!
//! ```text
//! <root>/manifest.json              ordered version records
//! <root>/objects/<id>.nt            full snapshot, canonical N-Triples
//! <root>/objects/<id>.delta.json    delta against the record's base
//! ```

use std::collections::{HashMap, HashSet};
use std::fmt;
use std::fs::{self, OpenOptions};
use std::io;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use base64::engine::general_purpose::URL_SAFE_NO_PAD;
use base64::Engine;
use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::changeset::{ChangeSet, ChangeSetError};
use crate::rdf::{canonical_serialize, parse_ntriples, Dictionary, EncodedTriple, ParseMode, RdfError, TripleSet};

const MANIFEST: &str = "manifest.json";
const OBJECTS: &str = "objects";
const LOCK: &str = ".lock";
const MODULE_PREFIX: &str = "RA";

#[derive(Debug, thiserror::Error)]
pub enum StoreError {
    #[error("timestamp {given} precedes latest committed timestamp {latest}")]
    NonMonotoneTimestamp {
        latest: DateTime<Utc>,
        given: DateTime<Utc>,
    },
    #[error("unknown version {0}")]
    UnknownVersion(String),
    #[error("corrupt delta chain: {0}")]
    CorruptChain(String),
    #[error("invalid version id {0:?}")]
    InvalidVersionId(String),
    #[error("invalid snapshot metadata: {0}")]
    InvalidMeta(String),
    #[error("store is locked by another writer ({0})")]
    Locked(PathBuf),
    #[error("store not found at {0}")]
    NotFound(PathBuf),
    #[error("I/O failure: {0}")]
    Io(#[from] io::Error),
    #[error("malformed manifest: {0}")]
    Manifest(#[from] serde_json::Error),
}

/// `RA` followed by the unpadded base64url SHA-256 of the canonical
/// serialization: 45 characters in total.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct VersionId(String);

impl VersionId {
    pub const LEN: usize = 45;

    pub fn from_content(canonical: &[u8]) -> Self {
        let digest = Sha256::digest(canonical);
        VersionId(format!("{MODULE_PREFIX}{}", URL_SAFE_NO_PAD.encode(digest)))
    }

    pub fn of_triples(triples: &TripleSet) -> Self {
        Self::from_content(&canonical_serialize(triples))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// True iff `canonical` hashes to this id.
    pub fn matches(&self, canonical: &[u8]) -> bool {
        *self == Self::from_content(canonical)
    }
}

impl FromStr for VersionId {
    type Err = StoreError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let ok = s.len() == Self::LEN
            && s.starts_with(MODULE_PREFIX)
            && s[2..]
                .bytes()
                .all(|b| b.is_ascii_alphanumeric() || b == b'_' || b == b'-');
        if ok {
            Ok(VersionId(s.to_owned()))
        } else {
            Err(StoreError::InvalidVersionId(s.to_owned()))
        }
    }
}

impl TryFrom<String> for VersionId {
    type Error = StoreError;

    fn try_from(s: String) -> Result<Self, Self::Error> {
        s.parse()
    }
}

impl From<VersionId> for String {
    fn from(v: VersionId) -> String {
        v.0
    }
}

impl fmt::Display for VersionId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SnapshotMeta {
    pub timestamp: DateTime<Utc>,
    pub label: String,
    pub source: Option<String>,
}

impl SnapshotMeta {
    pub fn new(timestamp: DateTime<Utc>, label: impl Into<String>) -> Result<Self, StoreError> {
        let label = label.into();
        if label.trim().is_empty() {
            return Err(StoreError::InvalidMeta("label must be non-empty".into()));
        }
        Ok(SnapshotMeta {
            timestamp,
            label,
            source: None,
        })
    }

    pub fn with_source(mut self, source: impl Into<String>) -> Self {
        self.source = Some(source.into());
        self
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum StorageKind {
    Full,
    Delta,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Storage {
    FullSnapshot,
    Delta { base: VersionId },
}

impl Storage {
    pub fn kind(&self) -> StorageKind {
        match self {
            Storage::FullSnapshot => StorageKind::Full,
            Storage::Delta { .. } => StorageKind::Delta,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VersionRecord {
    pub id: VersionId,
    pub meta: SnapshotMeta,
    pub storage: Storage,
}

/// One manifest entry as written to `manifest.json`.
#[derive(Serialize, Deserialize)]
struct ManifestEntry {
    id: VersionId,
    timestamp: DateTime<Utc>,
    label: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    source: Option<String>,
    kind: StorageKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    base: Option<VersionId>,
}

impl From<&VersionRecord> for ManifestEntry {
    fn from(r: &VersionRecord) -> Self {
        ManifestEntry {
            id: r.id.clone(),
            timestamp: r.meta.timestamp,
            label: r.meta.label.clone(),
            source: r.meta.source.clone(),
            kind: r.storage.kind(),
            base: match &r.storage {
                Storage::Delta { base } => Some(base.clone()),
                Storage::FullSnapshot => None,
            },
        }
    }
}

impl TryFrom<ManifestEntry> for VersionRecord {
    type Error = StoreError;

    fn try_from(e: ManifestEntry) -> Result<Self, StoreError> {
        let storage = match (e.kind, e.base) {
            (StorageKind::Full, None) => Storage::FullSnapshot,
            (StorageKind::Delta, Some(base)) => Storage::Delta { base },
            (kind, base) => {
                return Err(StoreError::CorruptChain(format!(
                    "record {} has kind {kind:?} with base {base:?}",
                    e.id
                )))
            }
        };
        Ok(VersionRecord {
            id: e.id,
            meta: SnapshotMeta {
                timestamp: e.timestamp,
                label: e.label,
                source: e.source,
            },
            storage,
        })
    }
}

/// When a commit starts a new full snapshot instead of extending the chain.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainPolicy {
    /// Versions per chain, counting the full snapshot.
    pub max_chain_len: usize,
    /// A delta larger than this fraction of the new snapshot is stored in full.
    pub max_delta_ratio: f64,
}

impl Default for ChainPolicy {
    fn default() -> Self {
        ChainPolicy {
            max_chain_len: 10,
            max_delta_ratio: 0.5,
        }
    }
}

/// A dictionary-encoded snapshot.
#[derive(Debug, Clone, Default)]
pub struct Snapshot {
    dict: Dictionary,
    triples: HashSet<EncodedTriple>,
}

impl Snapshot {
    pub fn from_triples(triples: &TripleSet) -> Self {
        let mut s = Snapshot::default();
        for t in triples {
            let e = s.dict.encode(t);
            s.triples.insert(e);
        }
        s
    }

    pub fn len(&self) -> usize {
        self.triples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.triples.is_empty()
    }

    pub fn dictionary(&self) -> &Dictionary {
        &self.dict
    }

    pub fn encoded(&self) -> &HashSet<EncodedTriple> {
        &self.triples
    }

    /// Applies a delta in place. Deleting an absent triple or adding a present
    /// one means the chain does not describe this state.
    fn apply(&mut self, cs: &ChangeSet) -> Result<(), String> {
        for t in cs.deleted() {
            let present = self.dict.lookup(t).is_some_and(|e| self.triples.remove(&e));
            if !present {
                return Err(format!("deletion of absent triple {t}"));
            }
        }
        for t in cs.added() {
            let e = self.dict.encode(t);
            if !self.triples.insert(e) {
                return Err(format!("addition of present triple {t}"));
            }
        }
        Ok(())
    }

    pub fn to_triples(&self) -> TripleSet {
        self.triples
            .iter()
            .map(|e| self.dict.decode(e).expect("snapshot ids always resolve"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LogEntry {
    pub id: VersionId,
    pub meta: SnapshotMeta,
    pub kind: StorageKind,
}

#[derive(Debug)]
pub struct VersionStore {
    root: PathBuf,
    records: Vec<VersionRecord>,
    index: HashMap<VersionId, usize>,
    policy: ChainPolicy,
    // materialized content of the last record, reused by the next commit
    head: Option<(VersionId, TripleSet)>,
}

impl VersionStore {
    /// Opens the store at `root`, creating an empty one if needed.
    pub fn open(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = root.as_ref();
        fs::create_dir_all(root.join(OBJECTS))?;
        Self::load(root)
    }

    /// Opens an existing store; fails if there is no manifest or objects dir.
    pub fn open_existing(root: impl AsRef<Path>) -> Result<Self, StoreError> {
        let root = root.as_ref();
        if !root.join(OBJECTS).is_dir() {
            return Err(StoreError::NotFound(root.to_path_buf()));
        }
        Self::load(root)
    }

    fn load(root: &Path) -> Result<Self, StoreError> {
        let manifest = root.join(MANIFEST);
        let records: Vec<VersionRecord> = if manifest.exists() {
            let entries: Vec<ManifestEntry> = serde_json::from_slice(&fs::read(&manifest)?)?;
            entries
                .into_iter()
                .map(VersionRecord::try_from)
                .collect::<Result<_, _>>()?
        } else {
            Vec::new()
        };
        let index = records.iter().enumerate().map(|(i, r)| (r.id.clone(), i)).collect();
        Ok(VersionStore {
            root: root.to_path_buf(),
            records,
            index,
            policy: ChainPolicy::default(),
            head: None,
        })
    }

    pub fn with_policy(mut self, policy: ChainPolicy) -> Self {
        self.policy = policy;
        self
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub fn records(&self) -> &[VersionRecord] {
        &self.records
    }

    pub fn record(&self, id: &VersionId) -> Result<&VersionRecord, StoreError> {
        self.index
            .get(id)
            .map(|&i| &self.records[i])
            .ok_or_else(|| StoreError::UnknownVersion(id.to_string()))
    }

    pub fn contains(&self, id: &VersionId) -> bool {
        self.index.contains_key(id)
    }

    /// Resolves a full id, or a unique prefix / label.
    pub fn resolve(&self, query: &str) -> Result<VersionId, StoreError> {
        if let Ok(id) = query.parse::<VersionId>() {
            if self.contains(&id) {
                return Ok(id);
            }
        }
        let matches: Vec<&VersionRecord> = self
            .records
            .iter()
            .filter(|r| r.meta.label == query || (query.len() >= 4 && r.id.as_str().starts_with(query)))
            .collect();
        match matches.as_slice() {
            [one] => Ok(one.id.clone()),
            _ => Err(StoreError::UnknownVersion(query.to_owned())),
        }
    }

    pub fn object_path(&self, id: &VersionId, kind: StorageKind) -> PathBuf {
        let name = match kind {
            StorageKind::Full => format!("{id}.nt"),
            StorageKind::Delta => format!("{id}.delta.json"),
        };
        self.root.join(OBJECTS).join(name)
    }

    /// Stores `triples` and returns their content id. Recommitting content
    /// that is already stored returns the existing id without a new record.
    pub fn commit(&mut self, triples: &TripleSet, meta: SnapshotMeta) -> Result<VersionId, StoreError> {
        if meta.label.trim().is_empty() {
            return Err(StoreError::InvalidMeta("label must be non-empty".into()));
        }
        if let Some(last) = self.records.last() {
            if meta.timestamp < last.meta.timestamp {
                return Err(StoreError::NonMonotoneTimestamp {
                    latest: last.meta.timestamp,
                    given: meta.timestamp,
                });
            }
        }
        let canonical = canonical_serialize(triples);
        let id = VersionId::from_content(&canonical);
        if self.contains(&id) {
            return Ok(id);
        }

        let _lock = StoreLock::acquire(&self.root)?;
        let storage = self.choose_storage(triples)?;
        match &storage {
            Storage::FullSnapshot => {
                write_atomic(&self.object_path(&id, StorageKind::Full), &canonical)?;
            }
            Storage::Delta { .. } => {
                let (_, head) = self.head.as_ref().expect("delta implies a materialized head");
                let cs = ChangeSet::between(head, triples);
                write_atomic(&self.object_path(&id, StorageKind::Delta), &cs.to_delta_json())?;
            }
        }
        self.records.push(VersionRecord {
            id: id.clone(),
            meta,
            storage,
        });
        self.index.insert(id.clone(), self.records.len() - 1);
        if let Err(e) = self.write_manifest() {
            let r = self.records.pop().expect("just pushed");
            self.index.remove(&r.id);
            return Err(e);
        }
        self.head = Some((id.clone(), triples.clone()));
        Ok(id)
    }

    fn choose_storage(&mut self, triples: &TripleSet) -> Result<Storage, StoreError> {
        let Some(last) = self.records.last() else {
            return Ok(Storage::FullSnapshot);
        };
        let last_id = last.id.clone();
        if self.chain_len(&last_id)? >= self.policy.max_chain_len {
            return Ok(Storage::FullSnapshot);
        }
        if self.head.as_ref().is_none_or(|(id, _)| *id != last_id) {
            let content = self.materialize(&last_id)?;
            self.head = Some((last_id.clone(), content));
        }
        let (_, head) = self.head.as_ref().expect("set above");
        let delta = head.symmetric_difference(triples).count();
        if delta as f64 > self.policy.max_delta_ratio * triples.len() as f64 {
            Ok(Storage::FullSnapshot)
        } else {
            Ok(Storage::Delta { base: last_id })
        }
    }

    /// Records from the chain's full snapshot up to and including `id`.
    fn chain(&self, id: &VersionId) -> Result<Vec<&VersionRecord>, StoreError> {
        let mut chain = vec![self.record(id)?];
        let mut seen = HashSet::from([id.clone()]);
        while let Storage::Delta { base } = &chain.last().expect("non-empty").storage {
            if !seen.insert(base.clone()) {
                return Err(StoreError::CorruptChain(format!("cycle through {base}")));
            }
            let rec = self
                .record(base)
                .map_err(|_| StoreError::CorruptChain(format!("missing base {base}")))?;
            chain.push(rec);
        }
        chain.reverse();
        Ok(chain)
    }

    fn chain_len(&self, id: &VersionId) -> Result<usize, StoreError> {
        Ok(self.chain(id)?.len())
    }

    fn read_full(&self, id: &VersionId) -> Result<(Vec<u8>, TripleSet), StoreError> {
        let bytes = fs::read(self.object_path(id, StorageKind::Full))?;
        let parsed = parse_ntriples(bytes.as_slice(), ParseMode::Strict).map_err(|e| match e {
            RdfError::Io(io) => StoreError::Io(io),
            other => StoreError::CorruptChain(format!("snapshot {id}: {other}")),
        })?;
        Ok((bytes, parsed.triples.into_iter().collect()))
    }

    fn read_delta(&self, id: &VersionId) -> Result<(Vec<u8>, ChangeSet), StoreError> {
        let bytes = fs::read(self.object_path(id, StorageKind::Delta))?;
        let cs = ChangeSet::from_delta_json(&bytes)
            .map_err(|e: ChangeSetError| StoreError::CorruptChain(format!("delta {id}: {e}")))?;
        Ok((bytes, cs))
    }

    pub fn materialize(&self, id: &VersionId) -> Result<TripleSet, StoreError> {
        Ok(self.materialize_encoded(id)?.to_triples())
    }

    /// Replays the chain ending at `id` into a dictionary-encoded snapshot.
    pub fn materialize_encoded(&self, id: &VersionId) -> Result<Snapshot, StoreError> {
        let chain = self.chain(id)?;
        let mut snapshot = Snapshot::default();
        for rec in chain {
            match rec.storage {
                Storage::FullSnapshot => {
                    let (_, set) = self.read_full(&rec.id)?;
                    snapshot = Snapshot::from_triples(&set);
                }
                Storage::Delta { .. } => {
                    let (_, cs) = self.read_delta(&rec.id)?;
                    snapshot
                        .apply(&cs)
                        .map_err(|e| StoreError::CorruptChain(format!("applying {}: {e}", rec.id)))?;
                }
            }
        }
        Ok(snapshot)
    }

    /// Changes from `from` to `to` (direction follows argument order).
    pub fn changeset(&self, from: &VersionId, to: &VersionId) -> Result<ChangeSet, StoreError> {
        if from == to {
            self.record(from)?;
            return Ok(ChangeSet::default());
        }
        let a = self.materialize(from)?;
        let b = self.materialize(to)?;
        Ok(ChangeSet::between(&a, &b))
    }

    /// Re-derives the id from stored objects. Any stored object that is not
    /// byte-identical to its canonical encoding, or a chain that fails to
    /// replay, counts as a failed verification.
    pub fn verify(&self, id: &VersionId) -> Result<bool, StoreError> {
        self.record(id)?;
        match self.verify_inner(id) {
            Ok(ok) => Ok(ok),
            Err(StoreError::UnknownVersion(v)) => Err(StoreError::UnknownVersion(v)),
            Err(_) => Ok(false),
        }
    }

    fn verify_inner(&self, id: &VersionId) -> Result<bool, StoreError> {
        let chain = self.chain(id)?;
        let mut snapshot = Snapshot::default();
        for rec in chain {
            match rec.storage {
                Storage::FullSnapshot => {
                    let (bytes, set) = self.read_full(&rec.id)?;
                    if !rec.id.matches(&bytes) || canonical_serialize(&set) != bytes {
                        return Ok(false);
                    }
                    snapshot = Snapshot::from_triples(&set);
                }
                Storage::Delta { .. } => {
                    let (bytes, cs) = self.read_delta(&rec.id)?;
                    if cs.to_delta_json() != bytes {
                        return Ok(false);
                    }
                    if snapshot.apply(&cs).is_err() {
                        return Ok(false);
                    }
                }
            }
        }
        Ok(id.matches(&canonical_serialize(&snapshot.to_triples())))
    }

    /// All versions in commit (= timestamp) order.
    pub fn log(&self) -> Vec<LogEntry> {
        self.records
            .iter()
            .map(|r| LogEntry {
                id: r.id.clone(),
                meta: r.meta.clone(),
                kind: r.storage.kind(),
            })
            .collect()
    }

    fn write_manifest(&self) -> Result<(), StoreError> {
        let entries: Vec<ManifestEntry> = self.records.iter().map(ManifestEntry::from).collect();
        let mut json = serde_json::to_vec_pretty(&entries)?;
        json.push(b'\n');
        write_atomic(&self.root.join(MANIFEST), &json)?;
        Ok(())
    }
}

fn write_atomic(path: &Path, bytes: &[u8]) -> io::Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, bytes)?;
    fs::rename(tmp, path)
}

/// Exclusive commit lock held as a `.lock` file in the store root.
struct StoreLock {
    path: PathBuf,
}

impl StoreLock {
    fn acquire(root: &Path) -> Result<Self, StoreError> {
        let path = root.join(LOCK);
        match OpenOptions::new().write(true).create_new(true).open(&path) {
            Ok(_) => Ok(StoreLock { path }),
            Err(e) if e.kind() == io::ErrorKind::AlreadyExists => Err(StoreError::Locked(path)),
            Err(e) => Err(e.into()),
        }
    }
}

impl Drop for StoreLock {
    fn drop(&mut self) {
        let _ = fs::remove_file(&self.path);
    }
}
