use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use strata_morse::ProblemFile;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_strata-morse"))
}

fn problems_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../problems")
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn write_problem(dir: &Path, name: &str, json: &str) -> String {
    let path = dir.join(name);
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

#[test]
fn golden_reports_match() {
    let mut seen = 0;
    for entry in fs::read_dir(problems_dir()).unwrap() {
        let path = entry.unwrap().path();
        let name = path.file_name().unwrap().to_str().unwrap().to_string();
        let Some(stem) = name.strip_suffix(".expected.txt") else {
            continue;
        };
        let json = problems_dir().join(format!("{stem}.json"));
        let kind = ProblemFile::parse(&fs::read_to_string(&json).unwrap())
            .unwrap()
            .problem
            .kind();
        let out = run(&[kind, json.to_str().unwrap()]);
        assert_eq!(out.status.code(), Some(0), "{stem}");
        assert_eq!(stdout(&out), fs::read_to_string(&path).unwrap(), "{stem}");
        seen += 1;
    }
    assert_eq!(seen, 9);
}

#[test]
fn examples_regenerate_shipped_files() {
    let tmp = tempfile::tempdir().unwrap();
    let out = run(&["examples", "--out", tmp.path().to_str().unwrap()]);
    assert!(out.status.success());
    let mut names: Vec<_> = fs::read_dir(tmp.path())
        .unwrap()
        .map(|e| e.unwrap().file_name())
        .collect();
    names.sort();
    assert_eq!(names.len(), 20);
    for name in names {
        let fresh = fs::read_to_string(tmp.path().join(&name)).unwrap();
        let shipped = fs::read_to_string(problems_dir().join(&name)).unwrap();
        assert_eq!(fresh, shipped, "{name:?}");
    }
}

#[test]
fn example_verdicts() {
    let dir = problems_dir();
    let torus = run(&["morse", dir.join("torus_six_points.json").to_str().unwrap()]);
    let text = stdout(&torus);
    assert!(text.contains("strong inequality: holds, Q = b\n"));
    assert!(text.contains("error = b\n"));
    let double = run(&[
        "morse",
        dir.join("double_suspension.json").to_str().unwrap(),
    ]);
    let text = stdout(&double);
    assert!(text.contains("Q = 0\n") && text.contains("(perfect)"));
    let t2 = run(&["cohomology", dir.join("torus2.json").to_str().unwrap()]);
    assert!(stdout(&t2).contains("P = 1 + 2b + b^2\n"));
}

#[test]
fn failed_check_exits_one() {
    let tmp = tempfile::tempdir().unwrap();
    let file = write_problem(
        tmp.path(),
        "under.json",
        r#"{"version":1,"morse":{"space":{"torus":2},"components":[
            {"name":"min","base":"point","stable":[{"disc":2}]},
            {"name":"max","base":"point","unstable":[{"disc":2}]}]}}"#,
    );
    let out = run(&["morse", &file]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("verdict: FAIL"));
}

#[test]
fn input_errors_exit_two() {
    let tmp = tempfile::tempdir().unwrap();
    let bad_w = write_problem(
        tmp.path(),
        "w.json",
        "{\"version\":1,\n\"cohomology\":{\"space\":{\"suspension\":{\"link\":{\"torus\":2},\"w\":{\"span\":[[1,0,0]]}}}}}",
    );
    let out = run(&["cohomology", &bad_w]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("line 2"));

    let dims = write_problem(
        tmp.path(),
        "dims.json",
        r#"{"version":1,"morse":{"space":{"torus":2},"components":[
            {"name":"min","base":"point","stable":[{"disc":3}]}]}}"#,
    );
    let out = run(&["morse", &dims]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("dimension"));

    assert_eq!(run(&["morse", "/nonexistent.json"]).status.code(), Some(2));
    let unknown = write_problem(
        tmp.path(),
        "u.json",
        r#"{"version":1,"cohomology":{"space":"point","x":1}}"#,
    );
    assert_eq!(run(&["cohomology", &unknown]).status.code(), Some(2));
}

fn small_spectral(tmp: &Path, model: &str, cutoff: usize) -> String {
    write_problem(
        tmp,
        "s.json",
        &format!(
            r#"{{"version":1,"spectral":{{"model":{model},"grid_points":60,"mode_cutoff":{cutoff},"epsilons":[0,5,10]}}}}"#
        ),
    )
}

#[test]
fn spectral_counts_and_agreement() {
    let tmp = tempfile::tempdir().unwrap();
    let spindle = small_spectral(tmp.path(), "\"spindle_circle\"", 0);
    let out = run(&["spectral", &spindle]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains("epsilon 10: counts (1,0,1)"), "{text}");
    assert!(text.contains("agreement: yes"));

    let torus = small_spectral(
        tmp.path(),
        r#"{"suspension_torus2":{"w":{"span":[[1,0]]}}}"#,
        1,
    );
    let out = run(&["spectral", &torus, "--format", "json", "--epsilon", "0,20"]);
    assert_eq!(out.status.code(), Some(0));
    let json: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(
        json["agreement"]["large_epsilon_counts"],
        serde_json::json!([1, 1, 1, 1])
    );
    assert_eq!(
        json["agreement"]["zero_epsilon_counts"],
        serde_json::json!([1, 1, 1, 1])
    );
}

#[test]
fn spectral_outputs_and_determinism() {
    let tmp = tempfile::tempdir().unwrap();
    let file = small_spectral(tmp.path(), "\"spindle_circle\"", 1);
    let outdir = tmp.path().join("out");
    let a = run(&[
        "spectral",
        &file,
        "--threads",
        "1",
        "--out",
        outdir.to_str().unwrap(),
    ]);
    let b = run(&["spectral", &file, "--threads", "3"]);
    assert_eq!(a.stdout, b.stdout);
    let csv = fs::read_to_string(outdir.join("eigenvalues.csv")).unwrap();
    assert!(csv.starts_with("epsilon,degree,index,eigenvalue\n0,0,0,"));
    let summary: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(outdir.join("summary.json")).unwrap()).unwrap();
    assert_eq!(summary["stable"], serde_json::json!(true));

    let fixed = run(&["spectral", &file, "--threshold", "1/1000"]);
    assert!(stdout(&fixed).contains("threshold 1.000e-3"));
    let single = run(&["spectral", &file, "--epsilon", "5", "--grid", "50"]);
    assert_eq!(single.status.code(), Some(0));
    assert!(!stdout(&single).contains("sweep:"));
    assert_eq!(
        run(&["spectral", &file, "--grid", "10"]).status.code(),
        Some(2)
    );
}
