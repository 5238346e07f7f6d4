use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

const BIN: &str = env!("CARGO_BIN_EXE_effhmm");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn iris_csv() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../core/data/iris.csv")
}

/// A scratch directory with the named fixtures copied in, so commands can use
/// relative paths.
fn workdir(fixtures: &[&str]) -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    for name in fixtures {
        fs::copy(fixture(name), dir.path().join(name)).unwrap();
    }
    fs::copy(iris_csv(), dir.path().join("iris.csv")).unwrap();
    dir
}

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(out: &Output) -> i32 {
    out.status.code().unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

#[test]
fn iris_prep_emits_150_sequences() {
    let dir = workdir(&[]);
    let stdout = ok(
        dir.path(),
        &["iris-prep", "--input", "iris.csv", "--output", "seqs.csv"],
    );
    assert!(
        stdout.contains("petal_length: min 1 max 6.9 bins 10"),
        "{stdout}"
    );
    let seqs = read(dir.path(), "seqs.csv");
    assert_eq!(seqs.lines().count(), 150);
    for species in ["setosa", "versicolour", "virginica"] {
        assert_eq!(
            seqs.lines()
                .filter(|l| l.starts_with(&format!("{species},")))
                .count(),
            50
        );
    }
    assert!(seqs
        .lines()
        .all(|l| l.split(',').nth(1).unwrap().split(' ').count() == 3));
    let manifest: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "seqs.csv.manifest.json")).unwrap();
    assert_eq!(manifest["command"], "iris-prep");
    assert_eq!(
        manifest["inputs"]["input"]["sha256"]
            .as_str()
            .unwrap()
            .len(),
        64
    );
}

#[test]
fn iris_prep_train_only_bins_changes_the_spec_not_the_count() {
    let dir = workdir(&[]);
    let all = ok(
        dir.path(),
        &["iris-prep", "--input", "iris.csv", "--output", "a.csv"],
    );
    let train = ok(
        dir.path(),
        &[
            "iris-prep",
            "--input",
            "iris.csv",
            "--output",
            "b.csv",
            "--train-only-bins",
            "--seed",
            "4",
        ],
    );
    assert_ne!(all, train);
    assert_eq!(read(dir.path(), "b.csv").lines().count(), 150);
}

#[test]
fn iris_prep_errors() {
    let dir = workdir(&["one_row_iris.csv", "bad_iris.csv"]);
    let out = run(
        dir.path(),
        &[
            "iris-prep",
            "--input",
            "one_row_iris.csv",
            "--output",
            "x.csv",
        ],
    );
    assert_eq!(code(&out), 3);
    assert!(
        stderr(&out).contains("degenerate range"),
        "{}",
        stderr(&out)
    );
    let out = run(
        dir.path(),
        &["iris-prep", "--input", "bad_iris.csv", "--output", "x.csv"],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("line 2"), "{}", stderr(&out));
}

#[test]
fn track_prep_ratios_and_points() {
    let dir = workdir(&["ratios.csv", "box_track.csv"]);
    ok(
        dir.path(),
        &[
            "track-prep",
            "--input",
            "ratios.csv",
            "--mode",
            "ratios",
            "--output",
            "r.csv",
        ],
    );
    assert_eq!(read(dir.path(), "r.csv"), "a,1 3 2\nb,3 3\na,1 1 1\n");
    ok(
        dir.path(),
        &[
            "track-prep",
            "--input",
            "box_track.csv",
            "--mode",
            "points",
            "--output",
            "p.csv",
        ],
    );
    assert_eq!(read(dir.path(), "p.csv"), "still,3 3 3\n");
}

#[test]
fn track_prep_errors_name_the_activity() {
    let dir = workdir(&["short_activity.csv", "flat_track.csv"]);
    let out = run(
        dir.path(),
        &[
            "track-prep",
            "--input",
            "short_activity.csv",
            "--mode",
            "ratios",
            "--output",
            "x.csv",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("activity 2 (jump)"),
        "{}",
        stderr(&out)
    );
    let out = run(
        dir.path(),
        &[
            "track-prep",
            "--input",
            "flat_track.csv",
            "--mode",
            "points",
            "--output",
            "x.csv",
        ],
    );
    assert_eq!(code(&out), 3);
    assert!(stderr(&out).contains("lie, frame 1"), "{}", stderr(&out));
    assert!(stderr(&out).contains("degenerate box"), "{}", stderr(&out));
}

#[test]
fn train_then_eval_on_iris() {
    let dir = workdir(&[]);
    ok(
        dir.path(),
        &["iris-prep", "--input", "iris.csv", "--output", "seqs.csv"],
    );
    ok(
        dir.path(),
        &["train", "--data", "seqs.csv", "--out", "eff", "--seed", "2"],
    );
    for f in [
        "models/setosa.json",
        "models/versicolour.json",
        "models/virginica.json",
        "split.json",
        "train_report.json",
        "manifest.json",
    ] {
        assert!(dir.path().join("eff").join(f).is_file(), "{f}");
    }
    let split: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "eff/split.json")).unwrap();
    assert_eq!(split["train"].as_array().unwrap().len(), 30);
    assert_eq!(split["test"].as_array().unwrap().len(), 120);

    let table = ok(
        dir.path(),
        &[
            "eval",
            "--models",
            "eff/models",
            "--data",
            "seqs.csv",
            "--split",
            "eff/split.json",
        ],
    );
    assert!(table.contains("overall"), "{table}");
    let report: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "eff/eval_report.json")).unwrap();
    let confusion = report["confusion"].as_array().unwrap();
    let total: u64 = confusion
        .iter()
        .flat_map(|r| r.as_array().unwrap())
        .map(|v| v.as_u64().unwrap())
        .sum();
    assert_eq!(total, 120);

    ok(
        dir.path(),
        &[
            "eval",
            "--models",
            "eff",
            "--data",
            "seqs.csv",
            "--split",
            "eff/split.json",
            "--normalized",
        ],
    );
    let norm: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "eff/eval_report_normalized.json")).unwrap();
    let keys = |v: &serde_json::Value| v.as_object().unwrap().keys().cloned().collect::<Vec<_>>();
    assert_eq!(keys(&report), keys(&norm));
    assert_eq!(norm["score_mode"], "length_normalized");
}

#[test]
fn standard_variant_writes_baseline_models() {
    let dir = workdir(&["two_class.csv"]);
    ok(
        dir.path(),
        &[
            "train",
            "--data",
            "two_class.csv",
            "--variant",
            "standard",
            "--states",
            "1",
            "--train-per-class",
            "2",
            "--out",
            "std",
        ],
    );
    let model: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "std/models/a.json")).unwrap();
    assert_eq!(model["variant"], "standard");
    let c = model["c"].as_array().unwrap();
    assert!(c
        .iter()
        .flat_map(|x| x.as_array().unwrap())
        .flat_map(|x| x.as_array().unwrap())
        .all(|v| v.as_f64() == Some(1.0)));
    let inspect = ok(dir.path(), &["inspect", "--model", "std/models/a.json"]);
    assert!(inspect.contains("C degenerate (baseline mode)"));
}

#[test]
fn perfect_two_class_fixture_scores_100() {
    let dir = workdir(&["two_class.csv"]);
    ok(
        dir.path(),
        &[
            "train",
            "--data",
            "two_class.csv",
            "--states",
            "1",
            "--epsilon",
            "0",
            "--train-per-class",
            "2",
            "--out",
            "run",
        ],
    );
    let table = ok(
        dir.path(),
        &[
            "eval",
            "--models",
            "run",
            "--data",
            "two_class.csv",
            "--split",
            "run/split.json",
        ],
    );
    let overall = table.lines().find(|l| l.starts_with("overall")).unwrap();
    assert!(overall.ends_with(" 100.00"), "{table}");
}

#[test]
fn shortfall_warns_and_trains_on_everything() {
    let dir = workdir(&["two_class.csv"]);
    let out = run(
        dir.path(),
        &[
            "train",
            "--data",
            "two_class.csv",
            "--train-per-class",
            "5",
            "--out",
            "run",
        ],
    );
    assert!(out.status.success());
    assert!(
        stderr(&out).contains("warning: class a has 4 item(s)"),
        "{}",
        stderr(&out)
    );
    let split: serde_json::Value =
        serde_json::from_str(&read(dir.path(), "run/split.json")).unwrap();
    assert_eq!(split["train"].as_array().unwrap().len(), 8);
    assert_eq!(split["shortfalls"].as_array().unwrap().len(), 2);
}

#[test]
fn eval_rejects_tampered_data_and_foreign_alphabets() {
    let dir = workdir(&["two_class.csv", "big_symbol.csv"]);
    ok(
        dir.path(),
        &[
            "train",
            "--data",
            "two_class.csv",
            "--train-per-class",
            "2",
            "--out",
            "small",
        ],
    );
    ok(
        dir.path(),
        &[
            "train",
            "--data",
            "big_symbol.csv",
            "--train-per-class",
            "2",
            "--out",
            "big",
        ],
    );

    let out = run(
        dir.path(),
        &[
            "eval",
            "--models",
            "small",
            "--data",
            "big_symbol.csv",
            "--split",
            "small/split.json",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(stderr(&out).contains("digest"), "{}", stderr(&out));

    let out = run(
        dir.path(),
        &[
            "eval",
            "--models",
            "small",
            "--data",
            "big_symbol.csv",
            "--split",
            "big/split.json",
        ],
    );
    assert_eq!(code(&out), 2);
    assert!(
        stderr(&out).contains("outside the alphabet"),
        "{}",
        stderr(&out)
    );
}

#[test]
fn sample_forced_sequences() {
    let dir = workdir(&["cycle.json"]);
    ok(
        dir.path(),
        &[
            "sample",
            "--model",
            "cycle.json",
            "--length",
            "5",
            "--count",
            "3",
            "--seed",
            "9",
            "--out",
            "s.csv",
        ],
    );
    assert_eq!(
        read(dir.path(), "s.csv"),
        "cycle,1 2 1 2 1\ncycle,1 2 1 2 1\ncycle,1 2 1 2 1\n"
    );
}

#[test]
fn inspect_reports_validation() {
    let dir = workdir(&["baseline.json", "bad_pi.json", "cycle.json"]);
    let text = ok(dir.path(), &["inspect", "--model", "cycle.json"]);
    assert!(text.contains("variant: eff"));
    assert!(text.contains("C state 2:"));
    assert!(text.ends_with("validation: ok\n"), "{text}");

    let text = ok(dir.path(), &["inspect", "--model", "baseline.json"]);
    assert!(text.contains("C degenerate (baseline mode)"));
    assert!(text.contains("min entry: 0.000000"));
    assert!(text.contains("max entry: 0.875000"));

    let out = run(dir.path(), &["inspect", "--model", "bad_pi.json"]);
    assert_eq!(code(&out), 2);
    let stdout = String::from_utf8_lossy(&out.stdout);
    assert!(stdout.contains("initial sums to 1.4"), "{stdout}");
}

#[test]
fn usage_errors_exit_with_one() {
    let dir = workdir(&[]);
    assert_eq!(code(&run(dir.path(), &["train"])), 1);
    assert_eq!(code(&run(dir.path(), &["nonsense"])), 1);
    assert_eq!(
        code(&run(
            dir.path(),
            &[
                "train",
                "--data",
                "iris.csv",
                "--out",
                "x",
                "--variant",
                "hmm"
            ]
        )),
        1
    );
    let out = run(
        dir.path(),
        &[
            "train",
            "--data",
            "iris.csv",
            "--out",
            "x",
            "--epsilon",
            "0.5",
        ],
    );
    assert_eq!(code(&out), 1, "{}", stderr(&out));
    assert_eq!(code(&run(dir.path(), &["--help"])), 0);
}
