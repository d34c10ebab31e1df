use std::collections::BTreeSet;

use chrono::{DateTime, Duration, TimeZone, Utc};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use kgevo_core::changeset::ChangeSet;
use kgevo_core::ontology::{
    change_alignment, evolutionary_dependency, evolutionary_sync, schema_counts, schema_series_csv, OntologyChange,
    OntologyError, SchemaCounts, SchemaPoint,
};
use kgevo_core::rdf::{parse_set, Iri};

fn at(y: i32, mo: u32, d: u32, h: u32, mi: u32, s: u32) -> DateTime<Utc> {
    Utc.with_ymd_and_hms(y, mo, d, h, mi, s).unwrap()
}

fn change(ontology: &str, timestamp: DateTime<Utc>, terms: &[String]) -> OntologyChange {
    OntologyChange {
        ontology: ontology.into(),
        timestamp,
        touched_terms: terms.iter().map(|t| Iri::new(t.as_str()).unwrap()).collect(),
    }
}

fn random_history(rng: &mut ChaCha8Rng, name: &str, n: usize) -> Vec<OntologyChange> {
    let origin = at(2019, 1, 1, 0, 0, 0);
    (0..n)
        .map(|_| {
            let t = origin + Duration::seconds(rng.gen_range(0..120 * 86_400));
            let terms: Vec<String> = (0..rng.gen_range(1..4))
                .map(|_| format!("urn:t{}", rng.gen_range(0..12)))
                .collect();
            change(name, t, &terms)
        })
        .collect()
}

/// Brute-force pairwise check with timestamps compared as raw seconds.
fn induced_by_brute_force(changes: &[OntologyChange], external: &[OntologyChange], window_secs: i64) -> usize {
    let mut induced = 0;
    for c in changes {
        let mut hit = false;
        for e in external {
            let gap = (c.timestamp.timestamp() - e.timestamp.timestamp()).abs();
            let shared = c.touched_terms.iter().any(|t| e.touched_terms.contains(t));
            if gap <= window_secs && shared {
                hit = true;
            }
        }
        induced += hit as usize;
    }
    induced
}

#[test]
fn sync_matches_hand_subtraction() {
    let week = Duration::days(7);
    let terms = vec!["urn:x".to_owned()];
    let pairs = [
        (at(2020, 1, 1, 0, 0, 0), at(2020, 1, 1, 0, 0, 0), 0.0),
        (at(2020, 1, 1, 0, 0, 0), at(2020, 1, 11, 0, 0, 0), 864_000.0),
        (at(2020, 2, 28, 12, 0, 0), at(2020, 3, 1, 12, 0, 0), 172_800.0), // leap year
        (at(2020, 12, 31, 23, 59, 59), at(2021, 1, 1, 0, 0, 1), 2.0),
        (at(2021, 6, 1, 8, 30, 0), at(2021, 6, 8, 8, 30, 0), 604_800.0),
    ];
    let synced = [true, false, true, true, true];
    for ((a, b, es), want_sync) in pairs.into_iter().zip(synced) {
        let r = evolutionary_sync(&change("o1", a, &terms), &change("o2", b, &terms), week);
        assert_eq!(r.es_seconds, es);
        assert_eq!(r.synchronized, want_sync);
        assert_eq!(r.synchronized, r.es_seconds <= r.threshold_seconds);
    }
}

#[test]
fn sync_symmetric_and_dependency_monotone() {
    let mut rng = ChaCha8Rng::seed_from_u64(200);
    for trial in 0..200 {
        let (n_own, n_ext) = (rng.gen_range(1..12), rng.gen_range(0..12));
        let own = random_history(&mut rng, "o1", n_own);
        let ext = random_history(&mut rng, "o2", n_ext);
        let t = Duration::seconds(rng.gen_range(0..30 * 86_400));
        for (a, b) in own.iter().zip(&ext) {
            assert_eq!(evolutionary_sync(a, b, t), evolutionary_sync(b, a, t), "trial {trial}");
            assert_eq!(change_alignment(a, b), change_alignment(b, a));
        }
        let mut last_ec = 0;
        for days in [0, 1, 3, 7, 14, 30, 60, 365] {
            let ec = match evolutionary_dependency(&own, &ext, Duration::days(days)) {
                Ok(r) => r.externally_induced,
                Err(OntologyError::UndefinedDependency { externally_induced }) => externally_induced,
            };
            assert!(
                ec >= last_ec,
                "trial {trial}: EC fell from {last_ec} to {ec} at T = {days}d"
            );
            last_ec = ec;
        }
    }
}

#[test]
fn dependency_matches_pairwise_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let window = Duration::days(3);
    for _ in 0..50 {
        let own = random_history(&mut rng, "o1", 15);
        let ext = random_history(&mut rng, "o2", 15);
        let ec = induced_by_brute_force(&own, &ext, 3 * 86_400);
        match evolutionary_dependency(&own, &ext, window) {
            Ok(r) => {
                assert_eq!(r.externally_induced, ec);
                assert_eq!(r.ontology_specific, own.len() - ec);
                assert_eq!(r.ed, ec as f64 / (own.len() - ec) as f64);
            }
            Err(OntologyError::UndefinedDependency { externally_induced }) => {
                assert_eq!(externally_induced, own.len());
                assert_eq!(ec, own.len());
            }
        }
    }
}

#[test]
fn all_induced_is_undefined() {
    let terms = vec!["urn:shared".to_owned()];
    let t0 = at(2020, 5, 1, 0, 0, 0);
    let own = vec![change("o1", t0, &terms)];
    let ext = vec![change("o2", t0 + Duration::hours(5), &terms)];
    assert_eq!(
        evolutionary_dependency(&own, &ext, Duration::days(1)),
        Err(OntologyError::UndefinedDependency { externally_induced: 1 })
    );
    let r = evolutionary_dependency(&own, &[], Duration::days(1)).unwrap();
    assert_eq!((r.externally_induced, r.ed), (0, 0.0));
}

#[test]
fn renamed_upstream_class_is_aligned() {
    let upstream_old = parse_set(
        "<https://w3id.org/italia/onto/CLV/Address> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .\n",
    )
    .unwrap();
    let upstream_new = parse_set(
        "<https://w3id.org/italia/onto/CLV/PostalAddress> <http://www.w3.org/1999/02/22-rdf-syntax-ns#type> <http://www.w3.org/2002/07/owl#Class> .\n\
         <https://w3id.org/italia/onto/CLV/Address> <http://www.w3.org/2002/07/owl#deprecated> \"true\" .\n",
    )
    .unwrap();
    let reuse_old = parse_set(
        "<https://w3id.org/arco/Site> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <https://w3id.org/italia/onto/CLV/Address> .\n",
    )
    .unwrap();
    let reuse_new = parse_set(
        "<https://w3id.org/arco/Site> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <https://w3id.org/italia/onto/CLV/PostalAddress> .\n",
    )
    .unwrap();
    let up = OntologyChange::from_changeset(
        "daf",
        at(2019, 3, 1, 0, 0, 0),
        &ChangeSet::between(&upstream_old, &upstream_new),
    );
    let down = OntologyChange::from_changeset(
        "arco",
        at(2019, 3, 4, 0, 0, 0),
        &ChangeSet::between(&reuse_old, &reuse_new),
    );
    let aligned = change_alignment(&up, &down);
    let aligned: BTreeSet<&str> = aligned.iter().map(Iri::as_str).collect();
    assert!(aligned.contains("https://w3id.org/italia/onto/CLV/Address"));
    assert!(aligned.contains("https://w3id.org/italia/onto/CLV/PostalAddress"));
    let r = evolutionary_dependency(&[down.clone(), down], &[up], Duration::days(7));
    assert!(matches!(
        r,
        Err(OntologyError::UndefinedDependency { externally_induced: 2 })
    ));
}

const MINI_ONTOLOGY: &str = r#"
@@Agent @@type <http://www.w3.org/2002/07/owl#Class> .
@@Person @@type <http://www.w3.org/2002/07/owl#Class> .
@@Organisation @@type <http://www.w3.org/2002/07/owl#Class> .
@@Place @@type <http://www.w3.org/2000/01/rdf-schema#Class> .
@@Person @@sub @@Agent .
@@Organisation @@sub @@Agent .
@@City @@sub @@Place .
@@Company @@sub @@Organisation .
@@name @@type <http://www.w3.org/2002/07/owl#DatatypeProperty> .
@@worksFor @@type <http://www.w3.org/2002/07/owl#ObjectProperty> .
@@locatedIn @@type <http://www.w3.org/2002/07/owl#ObjectProperty> .
@@locatedIn @@type <http://www.w3.org/2002/07/owl#TransitiveProperty> .
@@founded @@type <http://www.w3.org/1999/02/22-rdf-syntax-ns#Property> .
@@label @@type <http://www.w3.org/2002/07/owl#AnnotationProperty> .
@@worksFor <http://www.w3.org/2000/01/rdf-schema#domain> @@Person .
@@worksFor <http://www.w3.org/2000/01/rdf-schema#range> @@Organisation .
@@name <http://www.w3.org/2000/01/rdf-schema#domain> @@Agent .
@@locatedIn <http://www.w3.org/2000/01/rdf-schema#range> @@Place .
@@Agent <http://www.w3.org/2000/01/rdf-schema#label> "Agent"@en .
@@Person <http://www.w3.org/2000/01/rdf-schema#label> "Person"@en .
@@Place <http://www.w3.org/2000/01/rdf-schema#comment> "A location" .
@@alice @@type @@Person .
@@acme @@type @@Company .
@@rome @@type @@City .
@@bob @@type @@Employee .
@@alice @@worksFor @@acme .
@@acme @@locatedIn @@rome .
@@alice @@name "Alice" .
@@onto @@type <http://www.w3.org/2002/07/owl#Ontology> .
@@onto <http://purl.org/dc/terms/modified> "2020-01-01"^^<http://www.w3.org/2001/XMLSchema#date> .
"#;

fn mini_ontology() -> kgevo_core::rdf::TripleSet {
    let doc = MINI_ONTOLOGY
        .replace("@@type", "<http://www.w3.org/1999/02/22-rdf-syntax-ns#type>")
        .replace("@@sub", "<http://www.w3.org/2000/01/rdf-schema#subClassOf>");
    let doc = expand_names(&doc);
    parse_set(&doc).unwrap()
}

/// Expands `@@Name` to `<http://ex.org/o#Name>`.
fn expand_names(doc: &str) -> String {
    let mut out = String::new();
    let mut rest = doc;
    while let Some(i) = rest.find("@@") {
        out.push_str(&rest[..i]);
        let tail = &rest[i + 2..];
        let end = tail.find(|c: char| !c.is_ascii_alphanumeric()).unwrap_or(tail.len());
        out.push_str(&format!("<http://ex.org/o#{}>", &tail[..end]));
        rest = &tail[end..];
    }
    out.push_str(rest);
    out
}

#[test]
fn mini_ontology_census() {
    let onto = mini_ontology();
    assert_eq!(onto.len(), 30);
    // classes: Agent Person Organisation Place City Company Employee
    // predicates: type subClassOf domain range label comment worksFor locatedIn name modified
    // declared but unused as predicates: founded, label
    assert_eq!(
        schema_counts(&onto),
        SchemaCounts {
            class_count: 7,
            subclass_axiom_count: 4,
            property_count: 12,
        }
    );
}

#[test]
fn schema_series_starts_at_zero() {
    let v1 = mini_ontology();
    let mut v2 = v1.clone();
    v2.extend(
        parse_set(
            "<http://ex.org/o#Town> <http://www.w3.org/2000/01/rdf-schema#subClassOf> <http://ex.org/o#City> .\n",
        )
        .unwrap(),
    );
    let points: Vec<SchemaPoint> = [v1, v2]
        .iter()
        .enumerate()
        .map(|(i, s)| SchemaPoint {
            version: format!("v{i}"),
            timestamp: at(2020, 1 + i as u32, 1, 0, 0, 0),
            counts: schema_counts(s),
        })
        .collect();
    let csv = schema_series_csv(&points);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(
        rows[0],
        "version,timestamp,class_count,subclass_count,property_count,class_delta,subclass_delta"
    );
    assert!(rows[1].ends_with(",7,4,12,0,0"));
    assert!(rows[2].ends_with(",8,5,12,1,1"));
}
