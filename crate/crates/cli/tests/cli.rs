//! End-to-end tests of the binary: exit codes, artifact formats, and
//! determinism of the emitted files.

use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cc-pareto"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn list_names_every_registered_problem() {
    let out = run(&["list"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    for id in ["schaffer", "jahn", "binh", "maxabs", "random-quadratic"] {
        assert!(text.contains(id), "missing {id} in:\n{text}");
    }
}

#[test]
fn certify_exit_codes_follow_the_contract() {
    let ok = run(&[
        "certify",
        "--problem",
        "schaffer",
        "--point",
        "1",
        "--mode",
        "strong-kkt",
    ]);
    assert_eq!(ok.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&ok)).unwrap();
    assert_eq!(doc["certified"], serde_json::Value::Bool(true));
    assert_eq!(doc["report"]["verdict"], "certified");

    let no = run(&[
        "certify",
        "--problem",
        "schaffer",
        "--point",
        "0",
        "--mode",
        "strong-kkt",
    ]);
    assert_eq!(no.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&no)).unwrap();
    assert_eq!(doc["certified"], serde_json::Value::Bool(false));

    // An infeasible point is an input error, not a negative verdict.
    let bad = run(&[
        "certify",
        "--problem",
        "schaffer",
        "--point",
        "50",
        "--mode",
        "strong-kkt",
    ]);
    assert_eq!(bad.status.code(), Some(1));
    assert!(stderr(&bad).contains("infeasible"));
}

#[test]
fn certify_covers_regularity_and_tradeoff_modes() {
    let fails = run(&[
        "certify",
        "--problem",
        "schaffer",
        "--point",
        "0",
        "--mode",
        "abadie",
    ]);
    assert_eq!(fails.status.code(), Some(2));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&fails)).unwrap();
    assert_eq!(doc["report"]["verdict"], "fails-with-witness");

    let holds = run(&[
        "certify",
        "--problem",
        "schaffer",
        "--point",
        "1",
        "--mode",
        "abadie",
    ]);
    assert_eq!(holds.status.code(), Some(0));

    let proper = run(&[
        "certify",
        "--problem",
        "schaffer",
        "--point",
        "1",
        "--mode",
        "geoffrion",
    ]);
    assert_eq!(proper.status.code(), Some(0));
    let improper = run(&[
        "certify",
        "--problem",
        "schaffer",
        "--point",
        "0",
        "--mode",
        "geoffrion",
    ]);
    assert_eq!(improper.status.code(), Some(2));
}

#[test]
fn usage_errors_exit_one_and_help_exits_zero() {
    for args in [
        &["frontier", "--problem", "schaffer", "--wat"][..],
        &["frontier", "--starts", "3"][..],
        &["frontier", "--problem", "schaffer", "--starts", "0"][..],
        &[
            "certify",
            "--problem",
            "schaffer",
            "--point",
            "1",
            "--mode",
            "zzz",
        ][..],
        &["solve", "--problem", "schaffer", "--start", "one"][..],
        &["solve", "--problem", "schaffer", "--start", "1", "--tol", "0"][..],
        &["solve", "--problem", "no-such-problem", "--start", "1"][..],
        &[
            "frontier",
            "--problem",
            "schaffer",
            "--starts",
            "2",
            "--backend",
            "zzz",
        ][..],
    ] {
        let out = run(args);
        assert_eq!(
            out.status.code(),
            Some(1),
            "args {args:?}:\n{}",
            stderr(&out)
        );
    }
    let help = run(&["--help"]);
    assert_eq!(help.status.code(), Some(0));
    assert!(stdout(&help).contains("frontier"));
}

#[test]
fn frontier_artifacts_are_deterministic_and_well_formed() {
    let dir = tempfile::tempdir().unwrap();
    let csv_a = dir.path().join("a.csv");
    let csv_b = dir.path().join("b.csv");
    let svg = dir.path().join("a.svg");

    let out = run(&[
        "frontier",
        "--problem",
        "schaffer",
        "--starts",
        "25",
        "--seed",
        "9",
        "--out",
        csv_a.to_str().unwrap(),
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let out = run(&[
        "frontier",
        "--problem",
        "schaffer",
        "--starts",
        "25",
        "--seed",
        "9",
        "--out",
        csv_b.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));

    let a = std::fs::read_to_string(&csv_a).unwrap();
    let b = std::fs::read_to_string(&csv_b).unwrap();
    assert_eq!(a, b, "same flags, same bytes");
    let mut lines = a.lines();
    assert_eq!(
        lines.next().unwrap(),
        "start_x_1,start_f_1,start_f_2,x_1,f_1,f_2,iters,status"
    );
    assert_eq!(lines.count(), 25);

    let doc = std::fs::read_to_string(&svg).unwrap();
    assert!(doc.starts_with("<?xml"));
    assert!(doc.trim_end().ends_with("</svg>"));
    assert_eq!(doc.matches("<path class=\"start\"").count(), 25);
    assert_eq!(doc.matches("<circle class=\"final\"").count(), 25);
}

#[test]
fn svg_rejects_problems_without_two_objectives() {
    let dir = tempfile::tempdir().unwrap();
    let svg = dir.path().join("x.svg");
    let out = run(&[
        "frontier",
        "--problem",
        "random-quadratic(0,2,3)",
        "--starts",
        "2",
        "--svg",
        svg.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("2 objectives"));
}

#[test]
fn solve_emits_parseable_json() {
    let out = run(&[
        "solve",
        "--problem",
        "maxabs",
        "--start",
        "2,2",
        "--backend",
        "lp",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["problem"], "maxabs");
    assert_eq!(doc["config"]["max_outer"], 50);
    let final_x = doc["trace"]["final_x"].as_array().unwrap();
    assert_eq!(final_x.len(), 2);
    assert!(final_x[0].as_f64().unwrap().abs() <= 1e-9);
    assert!(doc["trace"]["termination"].as_str().unwrap().contains("-"));
}

#[test]
fn oracle_streams_csv_and_reads_problem_files() {
    let out = run(&["oracle", "--problem", "schaffer", "--grid", "101"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("x_1,f_1,f_2\n"));
    assert_eq!(text.lines().count(), 12, "11 survivors on the coarse grid");

    // The same problem through the JSON schema gives the same frontier.
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("two-parabolas.json");
    std::fs::write(
        &path,
        r#"{
            "objectives": [
                {"kind": "quadratic", "q": [[1.0]], "linear": [0.0], "offset": 0.0},
                {"kind": "quadratic", "q": [[1.0]], "linear": [-4.0], "offset": 4.0}
            ],
            "bounds": {"lo": [-10.0], "hi": [10.0]}
        }"#,
    )
    .unwrap();
    let from_file = run(&[
        "oracle",
        "--problem-file",
        path.to_str().unwrap(),
        "--grid",
        "101",
    ]);
    assert_eq!(from_file.status.code(), Some(0));
    assert_eq!(stdout(&from_file), text);

    let broken = dir.path().join("broken.json");
    std::fs::write(
        &broken,
        r#"{"objectives": [], "bounds": {"lo": [0.0], "hi": [1.0]}}"#,
    )
    .unwrap();
    let out = run(&["oracle", "--problem-file", broken.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn compare_reports_both_methods() {
    let out = run(&[
        "compare",
        "--problem",
        "schaffer",
        "--starts",
        "5",
        "--seed",
        "1",
        "--tau-grid",
        "5",
        "--grid",
        "201",
        "--json",
    ]);
    assert_eq!(out.status.code(), Some(0), "{}", stderr(&out));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(doc["cc1"]["converged"], 5);
    assert!(doc["cc1"]["distance_to_oracle"].as_f64().unwrap() < 0.5);
    assert!(doc["weighted_sum"]["distance_to_oracle"].as_f64().unwrap() < 0.5);
}

#[test]
fn thread_cap_env_var_keeps_output_identical() {
    let base = run(&[
        "frontier",
        "--problem",
        "jahn",
        "--starts",
        "8",
        "--seed",
        "3",
    ]);
    assert_eq!(base.status.code(), Some(0));
    let capped = Command::new(env!("CARGO_BIN_EXE_cc-pareto"))
        .args([
            "frontier",
            "--problem",
            "jahn",
            "--starts",
            "8",
            "--seed",
            "3",
        ])
        .env("CC_PARETO_THREADS", "1")
        .output()
        .expect("binary runs");
    assert_eq!(capped.status.code(), Some(0));
    assert_eq!(stdout(&base), stdout(&capped));

    let garbage = Command::new(env!("CARGO_BIN_EXE_cc-pareto"))
        .args(["list"])
        .env("CC_PARETO_THREADS", "lots")
        .output()
        .expect("binary runs");
    assert_eq!(garbage.status.code(), Some(0));
    assert!(stderr(&garbage).contains("CC_PARETO_THREADS"));
}
