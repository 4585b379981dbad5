use std::fs;
use std::path::{Path, PathBuf};
use std::process::Command;

use qre_core::solver::SolveReport;
use tempfile::TempDir;

const SAMPLE: &str = r#"{"points": [[0, 0], [1, 0], [0, 1], [1, 1], [2, 1]],
                         "values": [0, 1, 1, 2, 1.5], "lipschitz": 1.0}"#;
const POINTS: &str = "x1,x2\n0.5,0.5\n1,1\n2,2\n";
const PROBLEM: &str = r#"{"T": 2, "A": [[1, 1]], "b": [2], "lo": [0, 0], "hi": [3, 3]}"#;

fn workspace() -> TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("s.json"), SAMPLE).unwrap();
    fs::write(dir.path().join("p.csv"), POINTS).unwrap();
    fs::write(dir.path().join("prob.json"), PROBLEM).unwrap();
    dir
}

fn qre(dir: &Path) -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_qre"));
    c.current_dir(dir).env_remove("QRE_THREADS");
    c
}

fn stdout(c: &mut Command) -> String {
    let out = c.output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(dir: &TempDir, name: &str) -> PathBuf {
    dir.path().join(name)
}

#[test]
fn eval_writes_a_csv_row_per_point() {
    let dir = workspace();
    let text = stdout(qre(dir.path()).args([
        "eval", "--sample", "s.json", "--points", "p.csv", "--oracle",
    ]));
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(
        rdr.headers().unwrap().iter().collect::<Vec<_>>(),
        ["x_1", "x_2", "psi", "level_index", "lp_solves", "psi_milp"]
    );
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    assert_eq!(rows.len(), 3);
    for row in &rows {
        let psi: f64 = row[2].parse().unwrap();
        let milp: f64 = row[5].parse().unwrap();
        assert!((psi - milp).abs() <= 1e-6, "{row:?}");
    }
    assert_eq!(&rows[1][2], "2");
}

#[test]
fn eval_json_and_csv_samples_agree() {
    let dir = workspace();
    fs::write(
        path(&dir, "s.csv"),
        "a,b,value\n0,0,0\n1,0,1\n0,1,1\n1,1,2\n2,1,1.5\n",
    )
    .unwrap();
    let from_json =
        stdout(qre(dir.path()).args(["eval", "--sample", "s.json", "--points", "p.csv"]));
    let from_csv = stdout(qre(dir.path()).args([
        "eval",
        "--sample",
        "s.csv",
        "--lipschitz",
        "1",
        "--points",
        "p.csv",
    ]));
    assert_eq!(from_json, from_csv);
    let status = qre(dir.path())
        .args(["eval", "--sample", "s.csv", "--points", "p.csv"])
        .output()
        .unwrap()
        .status;
    assert_eq!(
        status.code(),
        Some(2),
        "a CSV sample without a Lipschitz constant is a usage error"
    );
}

#[test]
fn config_supplies_defaults_and_flags_win() {
    let dir = workspace();
    fs::write(
        path(&dir, "s.csv"),
        "a,b,value\n0,0,0\n1,0,1\n0,1,1\n1,1,2\n2,1,1.5\n",
    )
    .unwrap();
    fs::write(path(&dir, "cfg.json"), r#"{"lipschitz": 1.0}"#).unwrap();
    let with_cfg = stdout(qre(dir.path()).args([
        "--config", "cfg.json", "eval", "--sample", "s.csv", "--points", "p.csv",
    ]));
    let with_flag = stdout(qre(dir.path()).args([
        "eval",
        "--sample",
        "s.csv",
        "--lipschitz",
        "1",
        "--points",
        "p.csv",
    ]));
    assert_eq!(with_cfg, with_flag);
    fs::write(path(&dir, "typo.json"), r#"{"lipshitz": 1.0}"#).unwrap();
    let out = qre(dir.path())
        .args([
            "--config",
            "typo.json",
            "eval",
            "--sample",
            "s.json",
            "--points",
            "p.csv",
        ])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn solve_report_round_trips() {
    let dir = workspace();
    let text = stdout(qre(dir.path()).args([
        "solve",
        "--sample",
        "s.json",
        "--problem",
        "prob.json",
        "--trace",
        "t.csv",
    ]));
    let report: SolveReport = serde_json::from_str(&text).unwrap();
    assert_eq!(report.method, "binary");
    assert!((report.value - 2.0).abs() <= 1e-9);
    assert_eq!(report.check_value, Some(report.value));
    let again: SolveReport =
        serde_json::from_str(&serde_json::to_string(&report).unwrap()).unwrap();
    assert_eq!(again, report);
    let trace = fs::read_to_string(path(&dir, "t.csv")).unwrap();
    assert!(trace.starts_with("probe,j,value\n"));
    assert_eq!(trace.lines().count(), report.probes.len() + 1);
}

#[test]
fn level_function_matches_binary_search() {
    let dir = workspace();
    let lf = stdout(qre(dir.path()).args([
        "solve",
        "--sample",
        "s.json",
        "--problem",
        "prob.json",
        "--method",
        "level-function",
        "--eps",
        "1e-7",
    ]));
    let report: SolveReport = serde_json::from_str(&lf).unwrap();
    assert!(report.converged);
    assert!((report.value - 2.0).abs() <= 1e-5, "{report:?}");
}

#[test]
fn exit_codes() {
    let dir = workspace();
    fs::write(
        path(&dir, "empty.json"),
        r#"{"T": 2, "A": [[1, 1]], "b": [-1], "lo": [0, 0], "hi": [3, 3]}"#,
    )
    .unwrap();
    let code = |args: &[&str]| qre(dir.path()).args(args).output().unwrap().status.code();
    assert_eq!(
        code(&["solve", "--sample", "s.json", "--problem", "empty.json"]),
        Some(3)
    );
    assert_eq!(
        code(&[
            "solve",
            "--sample",
            "missing.json",
            "--problem",
            "prob.json"
        ]),
        Some(2)
    );
    assert_eq!(code(&["solve", "--no-such-flag"]), Some(2));
    assert_eq!(code(&["--help"]), Some(0));
    assert_eq!(
        code(&["eval", "--sample", "s.json", "--points", "p.csv", "--groups", "2"]),
        Some(2)
    );
}

#[test]
fn levelset_writes_json_and_polylines() {
    let dir = workspace();
    let text = stdout(qre(dir.path()).args([
        "levelset",
        "--sample",
        "s.json",
        "--level",
        "1",
        "--level",
        "-0.5,1.5",
        "--polyline",
        "poly.csv",
    ]));
    let sets: serde_json::Value = serde_json::from_str(&text).unwrap();
    assert_eq!(sets.as_array().unwrap().len(), 3);
    assert_eq!(sets[2]["level"], 1.5);
    let poly = fs::read_to_string(path(&dir, "poly.csv")).unwrap();
    assert!(poly.starts_with("level,vertex,x1,x2\n"));
    assert!(poly.lines().any(|l| l == "1.5,1,0.5,0.5"), "{poly}");
}

#[test]
fn aspirational_writes_constants_and_residuals() {
    let dir = workspace();
    let listed = stdout(qre(dir.path()).args([
        "aspirational",
        "--sample",
        "s.json",
        "--points",
        "p.csv",
        "--out",
        "asp",
    ]));
    assert_eq!(listed.lines().count(), 2);
    let constants = fs::read_to_string(path(&dir, "asp/constants.csv")).unwrap();
    assert_eq!(constants.lines().count(), 6);
    let mut rdr = csv::Reader::from_path(path(&dir, "asp/residuals.csv")).unwrap();
    for row in rdr.records() {
        let residual: f64 = row.unwrap()[4].parse().unwrap();
        assert!(residual.abs() <= 1e-6);
    }
}

#[test]
fn tiny_bench_run_writes_its_tables() {
    let dir = workspace();
    let listed = stdout(qre(dir.path()).args([
        "bench",
        "cobb-douglas",
        "--J",
        "8",
        "--reps",
        "1",
        "--l1-sizes",
        "8",
        "--l1-density",
        "10",
        "--runtime-sizes",
        "8",
        "--threads",
        "1",
        "--out",
        "study",
    ]));
    for name in ["gaps.csv", "l1.csv", "runtime.csv", "meta.json"] {
        assert!(listed.lines().any(|l| l.ends_with(name)), "{listed}");
        assert!(path(&dir, "study").join(name).exists());
    }
    let meta: serde_json::Value =
        serde_json::from_slice(&fs::read(path(&dir, "study/meta.json")).unwrap()).unwrap();
    assert_eq!(meta["config"]["threads"], 1);
}
