//! Drives the `featforge` binary end to end on the bundled toy data.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn toy_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("examples/data/toy")
}

/// Copies the toy data into a fresh directory so runs never touch the
/// source tree.
fn toy_copy() -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    for entry in fs::read_dir(toy_dir()).unwrap() {
        let path = entry.unwrap().path();
        if path.is_file() {
            fs::copy(&path, dir.path().join(path.file_name().unwrap())).unwrap();
        }
    }
    dir
}

fn featforge(args: &[&str], threads: Option<&str>) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_featforge"));
    cmd.args(args).env_remove("FEATFORGE_THREADS");
    if let Some(t) = threads {
        cmd.env("FEATFORGE_THREADS", t);
    }
    cmd.output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn toy_run_writes_exports_and_report() {
    let dir = toy_copy();
    let config = dir.path().join("config.ini");
    let out = featforge(&["run", config.to_str().unwrap()], None);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    for name in [
        "surface",
        "hashed-ngram",
        "supervised-embedding",
        "svm",
        "logreg",
        "mlp",
    ] {
        assert!(text.contains(name), "report lacks {name}");
    }
    let out_dir = dir.path().join("out");
    for file in [
        "train.csv",
        "test.csv",
        "train.svm",
        "test.svm",
        "labels.txt",
        "train.arff",
        "test.arff",
        "report.json",
        "report.txt",
    ] {
        assert!(out_dir.join(file).is_file(), "missing {file}");
    }
    assert_eq!(
        fs::read_to_string(out_dir.join("labels.txt")).unwrap(),
        "1\tnegative\n2\tpositive\n"
    );
    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out_dir.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["threads"], 2);
    let svm = report["classifiers"]
        .as_array()
        .unwrap()
        .iter()
        .find(|c| c["classifier"] == "svm")
        .unwrap();
    assert!(svm["test_accuracy"].as_f64().unwrap() >= 0.9);
}

#[test]
fn thread_override_changes_report_not_features() {
    let dir = toy_copy();
    let config = dir.path().join("config.ini");
    let run = |threads| {
        let out = featforge(&["run", config.to_str().unwrap()], Some(threads));
        assert!(out.status.success());
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join("out/report.json")).unwrap())
                .unwrap();
        let train = fs::read(dir.path().join("out/train.svm")).unwrap();
        (report["threads"].clone(), train)
    };
    let (t1, a) = run("1");
    let (t3, b) = run("3");
    assert_eq!((t1, t3), (1.into(), 3.into()));
    assert_eq!(a, b);
}

#[test]
fn bad_thread_override_is_a_config_error() {
    let dir = toy_copy();
    let config = dir.path().join("config.ini");
    let out = featforge(&["run", config.to_str().unwrap()], Some("zero"));
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("FEATFORGE_THREADS"));
}

#[test]
fn exit_codes_distinguish_failures() {
    let dir = toy_copy();
    let config = dir.path().join("config.ini");
    let original = fs::read_to_string(&config).unwrap();

    fs::write(&config, original.replace("[features]", "[feature]")).unwrap();
    assert_eq!(
        featforge(&["run", config.to_str().unwrap()], None)
            .status
            .code(),
        Some(2)
    );

    fs::write(&config, &original).unwrap();
    fs::remove_file(dir.path().join("tagged.txt")).unwrap();
    assert_eq!(
        featforge(&["run", config.to_str().unwrap()], None)
            .status
            .code(),
        Some(3)
    );

    let missing = dir.path().join("nope.ini");
    assert_eq!(
        featforge(&["run", missing.to_str().unwrap()], None)
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn listings_name_every_plugin() {
    let features = stdout(&featforge(&["list-features"], None));
    for (id, name) in [
        (1, "surface"),
        (2, "ngram"),
        (3, "hashed-ngram"),
        (4, "lm"),
        (5, "quantile"),
        (6, "avg-embedding"),
        (7, "supervised-embedding"),
    ] {
        assert!(
            features
                .lines()
                .any(|l| l.trim_start().starts_with(&format!("{id}  {name}"))),
            "{features}"
        );
    }
    let classifiers = stdout(&featforge(&["list-classifiers"], None));
    for name in ["logreg", "mlp", "supervised-embedding", "svm"] {
        assert!(
            classifiers.lines().any(|l| l.starts_with(name)),
            "{classifiers}"
        );
    }
}
