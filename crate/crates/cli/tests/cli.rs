use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;
use sha2::{Digest, Sha256};
use tempfile::TempDir;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_carnot-gap"))
        .args(args)
        .current_dir(dir)
        .env("CARNOT_GAP_THREADS", "1")
        .output()
        .expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn catalog_lists_the_families() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["catalog", "list", "--out", "cat.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&t.path().join("cat.json"));
    let names: Vec<&str> = v.as_array().unwrap().iter().map(|e| e["name"].as_str().unwrap()).collect();
    for want in [
        "euclidean-1d",
        "euclidean-2d",
        "heisenberg-h1",
        "htype-generic",
        "aniso-heisenberg-2n",
        "engel",
        "kolmogorov-type",
    ] {
        assert!(names.contains(&want), "{want} missing from {names:?}");
    }
    assert!(!names.contains(&"cartan"));
}

#[test]
fn catalog_export_validates() {
    let t = TempDir::new().unwrap();
    let o = run(t.path(), &["catalog", "show", "engel", "--out", "engel.json", "--export", "engel-group.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert_eq!(json(&t.path().join("engel.json"))["pureGeneratorIndex"], 1);
    let o = run(t.path(), &["validate", "--group-file", "engel-group.json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
}

#[test]
fn check_condition_on_heisenberg() {
    let t = TempDir::new().unwrap();
    let o = run(
        t.path(),
        &[
            "check-condition",
            "--group",
            "heisenberg-h1",
            "--norm",
            "kaplan",
            "--j0",
            "1",
            "--gamma",
            "4",
            "--seed",
            "7",
            "--out",
            "report.json",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&t.path().join("report.json"));
    let inf = v["result"]["infimumEstimate"].as_f64().unwrap();
    assert!((inf - 1.0).abs() < 1e-3, "{inf}");
    assert_eq!(v["result"]["verdict"], "holds");
    assert_eq!(v["result"]["j0"], 1);
}

#[test]
fn symmetric_matrix_is_a_usage_error() {
    let t = TempDir::new().unwrap();
    fs::write(
        t.path().join("bad.json"),
        r#"{
  "name": "bad",
  "stratumDims": [2, 1],
  "step2Matrices": [
    [["0", "1"],
     ["1", "0"]]
  ]
}"#,
    )
    .unwrap();
    let o = run(t.path(), &["validate", "--group-file", "bad.json"]);
    assert_eq!(code(&o), 2);
    let e = stderr(&o);
    assert!(e.contains("entry (1,2)") && e.contains("line 5"), "{e}");
}

#[test]
fn usage_errors_exit_two() {
    let t = TempDir::new().unwrap();
    assert_eq!(code(&run(t.path(), &[])), 2);
    assert_eq!(code(&run(t.path(), &["estimate-gap", "--bogus"])), 2);
    let o = run(t.path(), &["catalog", "show", "heisenberg"]);
    assert_eq!(code(&o), 2);
    assert!(stderr(&o).contains("heisenberg-h1"));
    assert_eq!(code(&run(t.path(), &["check-condition", "--group", "engel", "--j0", "3"])), 2);
    assert_eq!(code(&run(t.path(), &["validate", "--spec", "missing.json"])), 2);
    let o = run(t.path(), &["poincare-ratio", "--group", "euclidean-1d", "--a", "1", "--p", "2", "--q", "3"]);
    assert_eq!(code(&o), 2, "theorem mode needs conjugate q");
}

#[test]
fn failed_holdout_exits_one() {
    let t = TempDir::new().unwrap();
    let o = run(
        t.path(),
        &[
            "ubound-fit", "--group", "euclidean-1d", "--a", "1", "--p", "4", "--gamma", "2", "--train", "1",
            "--holdout", "50", "--count", "5000", "--out", "fit.json",
        ],
    );
    assert_eq!(code(&o), 1, "{}", stderr(&o));
    assert_eq!(json(&t.path().join("fit.json"))["result"]["verdict"], "fails");
}

#[test]
fn numeric_failures_exit_three() {
    let t = TempDir::new().unwrap();
    let o = run(
        t.path(),
        &["estimate-gap", "--group", "euclidean-1d", "--a", "1e-300", "--p", "2", "--method", "ritz", "--count", "2000"],
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
    let o = run(
        t.path(),
        &["estimate-gap", "--group", "euclidean-1d", "--a", "1e300", "--p", "2", "--method", "grid", "--grid-points", "101"],
    );
    assert_eq!(code(&o), 3, "{}", stderr(&o));
}

#[test]
fn gaussian_gap_both_methods() {
    let t = TempDir::new().unwrap();
    let o = run(
        t.path(),
        &[
            "estimate-gap", "--group", "euclidean-1d", "--a", "0.5", "--p", "2", "--method", "both", "--out", "gap.json",
            "--emit-plot", "plot.csv",
        ],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let v = json(&t.path().join("gap.json"));
    for m in ["ritz", "grid"] {
        let l = v["result"][m]["lambda1"].as_f64().unwrap();
        assert!((l - 1.0).abs() < 0.05, "{m}: {l}");
    }
    let plot = fs::read_to_string(t.path().join("plot.csv")).unwrap();
    assert!(plot.starts_with("method,sizeKind,size,lambda1\n"));
    assert!(plot.contains("ritz,dictionarySize,6,") && plot.contains("grid,gridSpacing,"));
}

#[test]
fn reruns_are_byte_identical_and_manifests_match() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("spec.json"), r#"{"group": "heisenberg-h1", "norm": "kaplan", "a": 1, "p": 8}"#).unwrap();
    let mut bytes = Vec::new();
    for name in ["a.json", "b.json"] {
        let o = run(
            t.path(),
            &["estimate-gap", "--spec", "spec.json", "--method", "ritz", "--count", "5000", "--seed", "11", "--out", name],
        );
        assert_eq!(code(&o), 0, "{}", stderr(&o));
        bytes.push(fs::read(t.path().join(name)).unwrap());
        let m = json(&t.path().join(format!("{name}.manifest.json")));
        assert_eq!(m["command"], "estimate-gap");
        assert_eq!(m["seed"], 11);
        assert_eq!(m["outputs"][0]["sha256"], hex::encode(Sha256::digest(&bytes[bytes.len() - 1])));
    }
    assert_eq!(bytes[0], bytes[1]);
}

#[test]
fn sample_and_grad_check_write_csv() {
    let t = TempDir::new().unwrap();
    let o = run(
        t.path(),
        &["sample", "--group", "engel", "--a", "1", "--p", "24", "--count", "300", "--chains", "2", "--out", "s.csv"],
    );
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(t.path().join("s.csv")).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert!(lines[0].starts_with("# {"));
    assert_eq!(lines[1], "x1,x2,x3,x4");
    assert_eq!(lines.len(), 2 + 300);

    let o = run(t.path(), &["grad-check", "--group", "heisenberg-h1", "--norm", "kaplan", "--count", "7", "--out", "g.csv"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let text = fs::read_to_string(t.path().join("g.csv")).unwrap();
    let mut rows = text.lines().skip(1);
    assert_eq!(rows.next().unwrap(), "x1,x2,x3,gradNorm,subLaplacian,ratio");
    assert_eq!(rows.count(), 7);
}

#[test]
fn report_groups_by_triple() {
    let t = TempDir::new().unwrap();
    fs::write(t.path().join("spec.json"), r#"{"group": "euclidean-1d", "a": 1, "p": 4}"#).unwrap();
    let runs: [&[&str]; 2] = [
        &["poincare-ratio", "--spec", "spec.json", "--q", "1.3333333333333333", "--count", "3000", "--out", "r.json"],
        &["estimate-gap", "--spec", "spec.json", "--method", "grid", "--out", "g.json"],
    ];
    for args in runs {
        let o = run(t.path(), args);
        assert_eq!(code(&o), 0, "{}", stderr(&o));
    }
    let o = run(t.path(), &["report", "--inputs", "r.json", "g.json", "--out-dir", "rep"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let md = fs::read_to_string(t.path().join("rep/report.md")).unwrap();
    assert_eq!(md.matches("\n## ").count(), 1, "{md}");
    assert!(md.contains("euclidean-1d / powersum-default / p = 4"));
    let csv = fs::read_to_string(t.path().join("rep/summary.csv")).unwrap();
    assert!(csv.contains("poincare-ratio,ratio,") && csv.contains("estimate-gap,grid.lambda1,"));
}
