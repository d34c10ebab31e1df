use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use kgevo_core::changeset::ChangeSet;
use kgevo_core::store::{StorageKind, VersionId, VersionStore};

const KG: &str = "\
<urn:a> <urn:knows> <urn:b> .
<urn:b> <urn:knows> <urn:c> .
<urn:c> <urn:knows> <urn:a> .
<urn:a> <urn:name> \"A\" .
";

fn kgevo(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_kgevo"))
        .env_remove("KGEVO_STORE")
        .args(args)
        .output()
        .unwrap()
}

fn stdout(out: &Output) -> &str {
    std::str::from_utf8(&out.stdout).unwrap()
}

/// A store holding one commit of `KG`; returns its id.
fn seeded(dir: &Path) -> String {
    let file = dir.join("kg.nt");
    fs::write(&file, KG).unwrap();
    let store = dir.join("store");
    let out = kgevo(&[
        "--store",
        store.to_str().unwrap(),
        "commit",
        file.to_str().unwrap(),
        "--label",
        "v1",
        "--timestamp",
        "2022-03-01T00:00:00Z",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    stdout(&out).trim().to_owned()
}

#[test]
fn help_and_version_exit_zero() {
    assert_eq!(kgevo(&["--help"]).status.code(), Some(0));
    assert_eq!(kgevo(&["--version"]).status.code(), Some(0));
    assert!(stdout(&kgevo(&["--help"])).contains("noteworthy"));
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let id = seeded(dir.path());
    let store = dir.path().join("store");
    let store = store.to_str().unwrap();
    for args in [
        vec!["frobnicate"],
        vec!["--store", store, "noteworthy", &id, &id, "--theta", "1.5"],
        vec!["--store", store, "events", &id, &id, "--omega", "0"],
        vec!["--store", store, "communities", &id, "--format", "csv"],
        vec!["log"],
    ] {
        let out = kgevo(&args);
        assert_eq!(out.status.code(), Some(1), "{args:?}");
        assert!(!out.stderr.is_empty());
    }
}

#[test]
fn data_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    seeded(dir.path());
    let store = dir.path().join("store");
    let store = store.to_str().unwrap();
    let bad = dir.path().join("bad.nt");
    fs::write(&bad, "<urn:a> <urn:p> .\n").unwrap();
    for args in [
        vec!["--store", store, "materialize", "RAnope"],
        vec![
            "--store",
            store,
            "commit",
            bad.to_str().unwrap(),
            "--label",
            "x",
            "--strict",
        ],
        vec!["parse", "/definitely/not/here.nt"],
    ] {
        let out = kgevo(&args);
        assert_eq!(
            out.status.code(),
            Some(2),
            "{args:?}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        assert!(String::from_utf8_lossy(&out.stderr).starts_with("error:"));
    }
}

#[test]
fn diff_of_a_version_with_itself_is_empty() {
    let dir = tempfile::tempdir().unwrap();
    let id = seeded(dir.path());
    let out = kgevo(&["--store", dir.path().join("store").to_str().unwrap(), "diff", &id, &id]);
    assert_eq!(out.status.code(), Some(0));
    assert!(ChangeSet::from_delta_json(&out.stdout).unwrap().is_empty());
}

#[test]
fn verify_reports_ok_then_failed() {
    let dir = tempfile::tempdir().unwrap();
    let id = seeded(dir.path());
    let store = dir.path().join("store");
    let out = kgevo(&["--store", store.to_str().unwrap(), "verify", &id]);
    assert_eq!((out.status.code(), stdout(&out)), (Some(0), "OK\n"));

    let object = VersionStore::open_existing(&store).unwrap().object_path(
        &VersionId::of_triples(&kgevo_core::rdf::parse_set(KG).unwrap()),
        StorageKind::Full,
    );
    let mut bytes = fs::read(&object).unwrap();
    bytes[0] ^= 0x01;
    fs::write(&object, bytes).unwrap();
    let out = kgevo(&["--store", store.to_str().unwrap(), "verify", &id]);
    assert_eq!((out.status.code(), stdout(&out)), (Some(2), "FAILED\n"));
}

#[test]
fn reads_are_byte_identical_and_honour_output_flag() {
    let dir = tempfile::tempdir().unwrap();
    let id = seeded(dir.path());
    let store = dir.path().join("store");
    let store = store.to_str().unwrap();
    for args in [
        vec!["--store", store, "materialize", &id],
        vec!["--store", store, "metrics", &id],
        vec!["--store", store, "communities", &id],
        vec!["--store", store, "log"],
    ] {
        let a = kgevo(&args);
        let b = kgevo(&args);
        assert_eq!(a.status.code(), Some(0), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
    let report = dir.path().join("metrics.csv");
    let out = kgevo(&[
        "--store",
        store,
        "metrics",
        &id,
        "--format",
        "csv",
        "-o",
        report.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    assert!(fs::read_to_string(&report).unwrap().starts_with("degree,count\n"));
}

#[test]
fn store_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let id = seeded(dir.path());
    let out = Command::new(env!("CARGO_BIN_EXE_kgevo"))
        .env("KGEVO_STORE", dir.path().join("store"))
        .args(["materialize", &id[..12]])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    assert_eq!(stdout(&out).lines().count(), 4);
}
