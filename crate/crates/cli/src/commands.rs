use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use chrono::{DateTime, Duration, Utc};
use serde::Serialize;
use serde_json::json;

use kgevo_core::changeset::ChangeSet;
use kgevo_core::community::{detect_snapshot_communities, partition_json};
use kgevo_core::embeddings::{loss_csv, matetee_sim, semantic_sim, train_transe, EmbeddingModel, TransEConfig};
use kgevo_core::events::{classify_events, EventConfig, OverlapBasis};
use kgevo_core::evolution::{
    describe_evolution, extract_features, flag_noteworthy, local_json_lines, local_noteworthy, type_index,
    FeatureFamilies,
};
use kgevo_core::graph::{project_directed, ProjectionConfig};
use kgevo_core::metrics::{histogram_csv, metrics_report, score_deltas, IterationConfig};
use kgevo_core::ontology::{
    evolutionary_dependency, evolutionary_sync, ontology_timestamp, schema_counts, schema_series_csv, OntologyChange,
    SchemaPoint,
};
use kgevo_core::perturb::{perturb, PerturbConfig, PerturbMode};
use kgevo_core::property_stats::{
    migrations_json, rank_by_ratio, rank_properties, records_csv, type_migrations, MigrationConfig, Ratio,
};
use kgevo_core::rdf::{canonical_serialize, read_ntriples_file, Iri, ParseMode, Term, TripleSet};
use kgevo_core::store::{SnapshotMeta, StorageKind, VersionId, VersionStore};

use crate::args::{Basis, Cli, Command, Family, Format, Mode, ProjectionArgs, ThresholdArgs, TrainingArgs};

/// Bad invocation detected after argument parsing (exit code 1).
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct UsageError(pub String);

/// A check that ran and failed (exit code 2, no further message).
#[derive(Debug, thiserror::Error)]
#[error("verification failed")]
pub struct CheckFailed;

struct Ctx {
    store: Option<PathBuf>,
    output: Option<PathBuf>,
    format: Format,
}

impl Ctx {
    fn store(&self) -> Result<VersionStore> {
        let root = self.store_root()?;
        VersionStore::open_existing(root).with_context(|| format!("opening store {}", root.display()))
    }

    fn store_root(&self) -> Result<&Path> {
        self.store
            .as_deref()
            .ok_or_else(|| UsageError("no store given (use --store or KGEVO_STORE)".into()).into())
    }

    fn emit(&self, bytes: &[u8]) -> Result<()> {
        match &self.output {
            Some(path) => fs::write(path, bytes).with_context(|| format!("writing {}", path.display())),
            None => {
                let mut out = io::stdout().lock();
                out.write_all(bytes)?;
                out.flush()?;
                Ok(())
            }
        }
    }

    fn emit_json(&self, value: &impl Serialize) -> Result<()> {
        let mut s = serde_json::to_string_pretty(value)?;
        s.push('\n');
        self.emit(s.as_bytes())
    }

    fn emit_lines(&self, lines: &[String]) -> Result<()> {
        let mut s = String::new();
        for l in lines {
            s.push_str(l);
            s.push('\n');
        }
        self.emit(s.as_bytes())
    }

    fn csv_only(&self, what: &str) -> Result<()> {
        if self.format == Format::Csv {
            bail!(UsageError(format!("{what} has no CSV form")));
        }
        Ok(())
    }
}

fn load(store: &VersionStore, query: &str) -> Result<(VersionId, TripleSet)> {
    let id = store.resolve(query)?;
    let triples = store.materialize(&id)?;
    Ok((id, triples))
}

fn read_file(path: &Path, strict: bool) -> Result<TripleSet> {
    let mode = if strict { ParseMode::Strict } else { ParseMode::Lenient };
    let out = read_ntriples_file(path, mode).with_context(|| format!("reading {}", path.display()))?;
    for e in &out.errors {
        eprintln!("warning: {}: {e}", path.display());
    }
    Ok(out.triples.into_iter().collect())
}

fn read_iri_list(path: &Path) -> Result<BTreeSet<Iri>> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    text.lines()
        .map(str::trim)
        .filter(|l| !l.is_empty() && !l.starts_with('#'))
        .map(|l| {
            let bare = l.strip_prefix('<').and_then(|s| s.strip_suffix('>')).unwrap_or(l);
            Iri::new(bare).with_context(|| format!("{}: invalid IRI {l:?}", path.display()))
        })
        .collect()
}

fn projection(args: &ProjectionArgs) -> Result<ProjectionConfig> {
    let mut cfg = ProjectionConfig {
        include_type_edges: args.type_edges,
        ..Default::default()
    };
    if let Some(path) = &args.predicates {
        cfg = cfg.with_predicates(read_iri_list(path)?);
    }
    Ok(cfg)
}

fn threshold(args: &ThresholdArgs) -> Result<Duration> {
    if !(args.threshold_days >= 0.0 && args.threshold_days.is_finite()) {
        bail!(UsageError(format!(
            "--threshold-days must be non-negative, got {}",
            args.threshold_days
        )));
    }
    Ok(Duration::milliseconds(
        (args.threshold_days * 86_400_000.0).round() as i64
    ))
}

fn training(args: &TrainingArgs) -> TransEConfig {
    TransEConfig {
        dim: args.dim as usize,
        margin: args.margin,
        learning_rate: args.learning_rate,
        epochs: args.epochs,
        seed: args.seed,
    }
}

fn families(selected: &[Family]) -> FeatureFamilies {
    if selected.is_empty() {
        return FeatureFamilies::default();
    }
    FeatureFamilies {
        types: selected.contains(&Family::Type),
        properties: selected.contains(&Family::Prop),
        type_properties: selected.contains(&Family::Typeprop),
    }
}

/// An ontology change between two stored versions, timestamped by the newer
/// version's `dct:modified` or else its commit time.
fn ontology_change(store: &VersionStore, name: &str, from: &str, to: &str) -> Result<OntologyChange> {
    let (_, old) = load(store, from)?;
    let (to_id, new) = load(store, to)?;
    let committed = store.record(&to_id)?.meta.timestamp;
    Ok(OntologyChange::from_changeset(
        name,
        ontology_timestamp(&new, committed),
        &ChangeSet::between(&old, &new),
    ))
}

fn history(store: &VersionStore, name: &str, versions: &[String]) -> Result<Vec<OntologyChange>> {
    versions
        .windows(2)
        .map(|w| ontology_change(store, name, &w[0], &w[1]))
        .collect()
}

pub fn run(cli: Cli) -> Result<()> {
    let ctx = Ctx {
        store: cli.store,
        output: cli.output,
        format: cli.format,
    };
    match cli.command {
        Command::Parse { file, strict } => {
            let triples = read_file(&file, strict)?;
            eprintln!("{} triples", triples.len());
            ctx.emit(&canonical_serialize(&triples))
        }
        Command::Commit {
            file,
            label,
            timestamp,
            strict,
        } => {
            let timestamp = match timestamp {
                Some(s) => DateTime::parse_from_rfc3339(&s)
                    .map_err(|e| UsageError(format!("invalid --timestamp {s:?}: {e}")))?
                    .with_timezone(&Utc),
                None => Utc::now(),
            };
            let triples = read_file(&file, strict)?;
            let meta = SnapshotMeta::new(timestamp, label)?.with_source(file.display().to_string());
            let mut store = VersionStore::open(ctx.store_root()?)?;
            let id = store.commit(&triples, meta)?;
            ctx.emit(format!("{id}\n").as_bytes())
        }
        Command::Log => {
            let store = ctx.store()?;
            let entries: Vec<_> = store
                .log()
                .into_iter()
                .map(|e| {
                    json!({
                        "id": e.id.as_str(),
                        "timestamp": e.meta.timestamp.to_rfc3339(),
                        "label": e.meta.label,
                        "source": e.meta.source,
                        "kind": match e.kind { StorageKind::Full => "full", StorageKind::Delta => "delta" },
                    })
                })
                .collect();
            ctx.emit_json(&entries)
        }
        Command::Materialize { version } => {
            let (_, triples) = load(&ctx.store()?, &version)?;
            ctx.emit(&canonical_serialize(&triples))
        }
        Command::Diff { from, to } => {
            let store = ctx.store()?;
            let cs = store.changeset(&store.resolve(&from)?, &store.resolve(&to)?)?;
            let mut bytes = cs.to_delta_json();
            bytes.push(b'\n');
            ctx.emit(&bytes)
        }
        Command::Verify { version } => {
            let store = ctx.store()?;
            if store.verify(&store.resolve(&version)?)? {
                ctx.emit(b"OK\n")
            } else {
                ctx.emit(b"FAILED\n")?;
                Err(CheckFailed.into())
            }
        }
        Command::Noteworthy {
            from,
            to,
            theta,
            local,
            families: selected,
            projection: proj,
        } => {
            ctx.csv_only("noteworthy")?;
            let store = ctx.store()?;
            let (_, old) = load(&store, &from)?;
            let (_, new) = load(&store, &to)?;
            let cs = ChangeSet::between(&old, &new);
            let vectors = extract_features(&cs, &type_index(&old), families(&selected));
            if vectors.is_empty() {
                return ctx.emit(b"");
            }
            let lines = if local {
                let communities: Vec<BTreeSet<Term>> = detect_snapshot_communities(&old, &projection(&proj)?)
                    .into_iter()
                    .map(|c| c.nodes)
                    .collect();
                local_json_lines(&local_noteworthy(&vectors, &communities, theta)?)
            } else {
                let desc = describe_evolution(&vectors)?;
                flag_noteworthy(&vectors, &desc, theta)?
                    .iter()
                    .flat_map(|r| r.to_json_lines())
                    .collect()
            };
            ctx.emit_lines(&lines)
        }
        Command::Communities {
            version,
            projection: proj,
        } => {
            ctx.csv_only("communities")?;
            let (_, triples) = load(&ctx.store()?, &version)?;
            let communities = detect_snapshot_communities(&triples, &projection(&proj)?);
            ctx.emit_json(&partition_json(&communities))
        }
        Command::Events {
            from,
            to,
            omega,
            basis,
            projection: proj,
        } => {
            ctx.csv_only("events")?;
            let store = ctx.store()?;
            let cfg = projection(&proj)?;
            let (_, old) = load(&store, &from)?;
            let (_, new) = load(&store, &to)?;
            let basis = match basis {
                Basis::Triples => OverlapBasis::Triples,
                Basis::Nodes => OverlapBasis::Nodes,
            };
            let events = classify_events(
                &detect_snapshot_communities(&old, &cfg),
                &detect_snapshot_communities(&new, &cfg),
                &EventConfig::new(omega, basis)?,
            );
            ctx.emit_lines(&events.iter().map(|e| e.to_json_line()).collect::<Vec<_>>())
        }
        Command::Metrics {
            version,
            compare,
            damping,
            tol,
            max_iter,
            projection: proj,
        } => {
            let store = ctx.store()?;
            let cfg = projection(&proj)?;
            let iter = IterationConfig { tol, max_iter };
            let report_of = |query: &str| -> Result<_> {
                let (_, triples) = load(&store, query)?;
                let graph = project_directed(&triples, &cfg);
                Ok(metrics_report(&graph, damping, iter)?)
            };
            let report = report_of(&version)?;
            if ctx.format == Format::Csv {
                let histogram: BTreeMap<usize, usize> = report.degree_histogram.iter().copied().collect();
                return ctx.emit(histogram_csv(&histogram).as_bytes());
            }
            match compare {
                None => ctx.emit_json(&report),
                Some(other) => {
                    let other_report = report_of(&other)?;
                    ctx.emit_json(&json!({
                        "pagerank_delta": score_deltas(&report.pagerank, &other_report.pagerank),
                        "hub_delta": score_deltas(&report.hits.hub, &other_report.hits.hub),
                        "authority_delta": score_deltas(&report.hits.authority, &other_report.hits.authority),
                        "from": report,
                        "to": other_report,
                    }))
                }
            }
        }
        Command::RankProperties { from, to, top } => {
            let store = ctx.store()?;
            let (_, old) = load(&store, &from)?;
            let (_, new) = load(&store, &to)?;
            let ranking = rank_properties(&ChangeSet::between(&old, &new), &old, top.map(|k| k as usize));
            if ctx.format == Format::Csv {
                return ctx.emit(records_csv(&ranking.records).as_bytes());
            }
            let records: Vec<_> = ranking
                .records
                .iter()
                .map(|r| {
                    json!({
                        "property": r.property.as_str(),
                        "added": r.added,
                        "removed": r.removed,
                        "edited": r.edited,
                        "occurrence_old": r.occurrence_old,
                        "ratio": match r.ratio { Ratio::Value(v) => json!(v), Ratio::NewProperty => json!("new") },
                    })
                })
                .collect();
            ctx.emit_json(&json!({
                "records": records,
                "by_ratio": rank_by_ratio(&ranking.records).iter().map(|r| r.property.as_str()).collect::<Vec<_>>(),
                "low_frequency": ranking.low_frequency.into_iter().collect::<Vec<_>>(),
            }))
        }
        Command::TypeDynamics {
            from,
            to,
            min_count,
            predicates,
        } => {
            ctx.csv_only("type-dynamics")?;
            let store = ctx.store()?;
            let (_, old) = load(&store, &from)?;
            let (_, new) = load(&store, &to)?;
            let cfg = MigrationConfig {
                properties: predicates.as_deref().map(read_iri_list).transpose()?,
                min_count,
                ..Default::default()
            };
            ctx.emit_json(&migrations_json(&type_migrations(&old, &new, &cfg)))
        }
        Command::OntoSync {
            first,
            first_next,
            second,
            second_next,
            threshold: t,
        } => {
            ctx.csv_only("onto-sync")?;
            let store = ctx.store()?;
            let t = threshold(&t)?;
            let c1 = ontology_change(&store, "first", &first, &first_next)?;
            let c2 = ontology_change(&store, "second", &second, &second_next)?;
            ctx.emit_json(&evolutionary_sync(&c1, &c2, t))
        }
        Command::OntoEd {
            ontology,
            external,
            threshold: t,
        } => {
            ctx.csv_only("onto-ed")?;
            let store = ctx.store()?;
            let t = threshold(&t)?;
            let ours = history(&store, "ontology", &ontology)?;
            let theirs = history(&store, "external", &external)?;
            ctx.emit_json(&evolutionary_dependency(&ours, &theirs, t)?)
        }
        Command::SchemaSeries { versions } => {
            let store = ctx.store()?;
            let ids: Vec<VersionId> = if versions.is_empty() {
                store.log().into_iter().map(|e| e.id).collect()
            } else {
                versions.iter().map(|v| store.resolve(v)).collect::<Result<_, _>>()?
            };
            let mut points = Vec::with_capacity(ids.len());
            for id in ids {
                let triples = store.materialize(&id)?;
                let record = store.record(&id)?;
                points.push(SchemaPoint {
                    version: record.meta.label.clone(),
                    timestamp: ontology_timestamp(&triples, record.meta.timestamp),
                    counts: schema_counts(&triples),
                });
            }
            ctx.emit(schema_series_csv(&points).as_bytes())
        }
        Command::Embed {
            version,
            training: args,
            loss_csv: loss_path,
        } => {
            ctx.csv_only("embed")?;
            let (_, triples) = load(&ctx.store()?, &version)?;
            let trained = train_transe(&triples, &training(&args))?;
            if let Some(path) = loss_path {
                fs::write(&path, loss_csv(&trained.losses)).with_context(|| format!("writing {}", path.display()))?;
            }
            let mut json = trained.model.to_json();
            json.push('\n');
            ctx.emit(json.as_bytes())
        }
        Command::Simsem {
            from,
            to,
            model,
            training: args,
        } => {
            ctx.csv_only("simsem")?;
            let store = ctx.store()?;
            let (_, v1) = load(&store, &from)?;
            let (_, v2) = load(&store, &to)?;
            let model = match model {
                Some(path) => read_model(&path)?,
                None => train_transe(&v1, &training(&args))?.model,
            };
            ctx.emit_json(&semantic_sim(&v1, &v2, &model)?)
        }
        Command::Matetee { a, b, model } => {
            ctx.csv_only("matetee")?;
            let model = read_model(&model)?;
            let (ta, tb) = (entity(&a)?, entity(&b)?);
            let similarity = matetee_sim(&ta, &tb, &model)?;
            ctx.emit_json(&json!({ "a": ta.label(), "b": tb.label(), "similarity": similarity }))
        }
        Command::Perturb {
            file,
            m,
            alpha,
            mode,
            seed,
            truth,
        } => {
            let mode = match mode {
                Mode::Add => PerturbMode::Add,
                Mode::Delete => PerturbMode::Delete,
                Mode::Update => PerturbMode::Update,
                Mode::All => PerturbMode::All,
            };
            let cfg = PerturbConfig::new(m, alpha, mode, seed).map_err(|e| UsageError(e.to_string()))?;
            let snapshot = read_file(&file, false)?;
            let result = perturb(&snapshot, &cfg)?;
            if let Some(path) = truth {
                fs::write(&path, result.truth.to_delta_json())
                    .with_context(|| format!("writing {}", path.display()))?;
            }
            ctx.emit(&canonical_serialize(&result.snapshot))
        }
    }
}

fn read_model(path: &Path) -> Result<EmbeddingModel> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    EmbeddingModel::from_json(&text).with_context(|| format!("loading model {}", path.display()))
}

fn entity(label: &str) -> Result<Term> {
    Term::from_label(label).map_err(|e| UsageError(format!("invalid entity {label:?}: {e}")).into())
}
