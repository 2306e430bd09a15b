use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn ptlp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_ptlp"))
        .args(args)
        .output()
        .expect("failed to spawn ptlp")
}

fn arg(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn synth(dir: &Path, name: &str, n: usize, seed: u64) -> std::path::PathBuf {
    let path = dir.join(name);
    let out = ptlp(&[
        "synth",
        "--n",
        &n.to_string(),
        "--seed",
        &seed.to_string(),
        "--grid-len",
        "32",
        "--output",
        arg(&path),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    path
}

fn read_matrix(path: &Path) -> Vec<Vec<f64>> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect()
}

#[test]
fn help_exits_zero() {
    assert_eq!(ptlp(&["--help"]).status.code(), Some(0));
}

#[test]
fn missing_input_is_usage_error() {
    let out = ptlp(&["dist", "--method", "ptlp", "--output", "x.csv"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("--input"));
}

#[test]
fn synth_writes_two_classes() {
    let dir = tempfile::tempdir().unwrap();
    let path = synth(dir.path(), "s.tsv", 5, 1);
    let text = fs::read_to_string(&path).unwrap();
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(rows.len(), 10);
    assert!(rows[..5].iter().all(|r| r.starts_with("0\t")));
    assert!(rows[5..].iter().all(|r| r.starts_with("1\t")));
    assert!(rows.iter().all(|r| r.split('\t').count() == 33));
}

#[test]
fn synth_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let a = fs::read(synth(dir.path(), "a.tsv", 4, 9)).unwrap();
    let b = fs::read(synth(dir.path(), "b.tsv", 4, 9)).unwrap();
    let c = fs::read(synth(dir.path(), "c.tsv", 4, 10)).unwrap();
    assert_eq!(a, b);
    assert_ne!(a, c);
}

#[test]
fn synth_rejects_empty_class() {
    let dir = tempfile::tempdir().unwrap();
    let out = ptlp(&[
        "synth",
        "--n",
        "0",
        "--output",
        arg(&dir.path().join("s.tsv")),
    ]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn identical_signals_give_zero_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("same.tsv");
    fs::write(&input, "a\t0.5\t1\t-2\na\t0.5\t1\t-2\nb\t0.5\t1\t-2\n").unwrap();
    let output = dir.path().join("d.csv");
    for method in ["lp", "dtw", "tlp", "ptlp", "sptlp", "ptlp_beta0"] {
        let out = ptlp(&[
            "dist",
            "--input",
            arg(&input),
            "--method",
            method,
            "--output",
            arg(&output),
        ]);
        assert!(
            out.status.success(),
            "{method}: {}",
            String::from_utf8_lossy(&out.stderr)
        );
        let m = read_matrix(&output);
        assert_eq!(m.len(), 3);
        assert!(m.iter().flatten().all(|&v| v == 0.0), "{method}: {m:?}");
    }
}

#[test]
fn dist_writes_symmetric_matrix_and_sidecar() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "s.tsv", 3, 2);
    let output = dir.path().join("d.csv");
    let out = ptlp(&[
        "dist",
        "--input",
        arg(&input),
        "--method",
        "ptlp",
        "--beta",
        "0.5",
        "--lambda",
        "0.3",
        "--output",
        arg(&output),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let m = read_matrix(&output);
    assert_eq!(m.len(), 6);
    for i in 0..6 {
        assert_eq!(m[i][i], 0.0);
        for j in 0..6 {
            assert_eq!(m[i][j], m[j][i]);
        }
    }
    let meta: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("d.csv.meta.json")).unwrap())
            .unwrap();
    assert_eq!(meta["method"], "ptlp");
    assert_eq!(meta["beta"], "0.5");
    assert_eq!(meta["lambda"], 0.3);
    assert_eq!(meta["size"], 6);
}

#[test]
fn beta_infinity_ignores_positions() {
    // same values at shifted positions: identical under beta = inf only
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("shift.tsv");
    fs::write(&input, "a\t0\t0\t1\t0\na\t0\t1\t0\t0\n").unwrap();
    let output = dir.path().join("d.csv");
    let run = |beta: &str| {
        let out = ptlp(&[
            "dist",
            "--input",
            arg(&input),
            "--method",
            "ptlp",
            "--beta",
            beta,
            "--lambda",
            "5",
            "--output",
            arg(&output),
        ]);
        assert!(
            out.status.success(),
            "{}",
            String::from_utf8_lossy(&out.stderr)
        );
        read_matrix(&output)[0][1]
    };
    assert_eq!(run("inf"), 0.0);
    assert!(run("1") > 0.0);
    let meta = fs::read_to_string(dir.path().join("d.csv.meta.json")).unwrap();
    assert!(meta.contains("\"beta\": \"1\""));
}

#[test]
fn unequal_lengths_are_method_errors() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("ragged.tsv");
    fs::write(&input, "a\t1\t2\t3\nb\t1\t2\n").unwrap();
    let output = dir.path().join("d.csv");
    let out = ptlp(&[
        "dist",
        "--input",
        arg(&input),
        "--method",
        "lp",
        "--output",
        arg(&output),
    ]);
    assert_eq!(out.status.code(), Some(2));
    let out = ptlp(&[
        "dist",
        "--input",
        arg(&input),
        "--method",
        "ptlp",
        "--output",
        arg(&output),
    ]);
    assert!(out.status.success());
}

#[test]
fn bad_parameters_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    let input = synth(dir.path(), "s.tsv", 3, 2);
    let output = dir.path().join("d.csv");
    for extra in [
        ["--method", "nope"],
        ["--beta", "-1"],
        ["--lambda", "0"],
        ["--p", "0.5"],
    ] {
        let mut args = vec!["dist", "--input", arg(&input), "--output", arg(&output)];
        if extra[0] != "--method" {
            args.extend(["--method", "ptlp"]);
        }
        args.extend(extra);
        assert_eq!(ptlp(&args).status.code(), Some(1), "{extra:?}");
    }
}

#[test]
fn knn_on_training_set_is_perfect() {
    let dir = tempfile::tempdir().unwrap();
    let train = synth(dir.path(), "s.tsv", 4, 5);
    let out = ptlp(&[
        "knn",
        "--train",
        arg(&train),
        "--test",
        arg(&train),
        "--method",
        "tlp",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["accuracy"], 1.0);
    assert_eq!(v["predictions"].as_array().unwrap().len(), 8);
    assert!(v["grid_search"].is_null());
}

#[test]
fn knn_grid_search_reports_choice() {
    let dir = tempfile::tempdir().unwrap();
    let train = synth(dir.path(), "train.tsv", 5, 6);
    let test = synth(dir.path(), "test.tsv", 2, 7);
    let out = ptlp(&[
        "knn",
        "--train",
        arg(&train),
        "--test",
        arg(&test),
        "--method",
        "ptlp",
        "--grid-search",
        "--beta-grid",
        "0.1,1",
        "--lambda-grid",
        "0.2,0.5",
        "--threads",
        "2",
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let report = &v["grid_search"];
    assert_eq!(report["cv_scores"].as_array().unwrap().len(), 2);
    assert_eq!(v["lambda"], report["best_lambda"]);
    assert!(v["accuracy"].as_f64().unwrap() >= 0.0);
}

#[test]
fn knn_matches_classes_by_name() {
    // the test file lists classes in the opposite order
    let dir = tempfile::tempdir().unwrap();
    let train = dir.path().join("train.tsv");
    let test = dir.path().join("test.tsv");
    fs::write(&train, "x\t0\t0\t0\ny\t5\t5\t5\n").unwrap();
    fs::write(&test, "y\t5\t5\t4\nx\t0\t1\t0\n").unwrap();
    let out = ptlp(&[
        "knn",
        "--train",
        arg(&train),
        "--test",
        arg(&test),
        "--method",
        "lp",
    ]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["predictions"][0]["predicted"], "y");
    assert_eq!(v["predictions"][1]["predicted"], "x");
    assert_eq!(v["accuracy"], 1.0);
}

#[test]
fn one_fold_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let train = synth(dir.path(), "s.tsv", 3, 2);
    let out = ptlp(&[
        "knn",
        "--train",
        arg(&train),
        "--test",
        arg(&train),
        "--method",
        "ptlp",
        "--grid-search",
        "--folds",
        "1",
    ]);
    assert_eq!(out.status.code(), Some(1));
}
