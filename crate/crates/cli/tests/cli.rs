use std::path::{Path, PathBuf};

use qmsdf_cli::{run, Io, EXIT_ANALYSIS_ERROR, EXIT_PASS, EXIT_USAGE, EXIT_VERDICT_FAIL};
use serde_json::Value;

fn fixture(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name)
}

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn invoke_with_env(args: &[&str], env: &[(&str, &str)]) -> Outcome {
    let mut stdout = Vec::new();
    let mut stderr = Vec::new();
    let mut io = Io {
        stdout: &mut stdout,
        stderr: &mut stderr,
        env: env.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
    };
    let mut argv = vec!["qmsdf"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut io);
    Outcome {
        code,
        stdout: String::from_utf8(stdout).unwrap(),
        stderr: String::from_utf8(stderr).unwrap(),
    }
}

fn invoke(args: &[&str]) -> Outcome {
    invoke_with_env(args, &[])
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn analyze_json(model: &str, extra: &[&str]) -> (i32, Value) {
    let f = fixture(model);
    let mut args = vec!["analyze", "--model", path(&f)];
    args.extend_from_slice(extra);
    let out = invoke(&args);
    (out.code, serde_json::from_str(&out.stdout).expect("report is JSON"))
}

#[test]
fn report_skeleton_on_dephasing() {
    let (code, r) = analyze_json("dephasing.json", &["--seed", "3"]);
    assert_eq!(code, EXIT_PASS);
    for key in [
        "tool",
        "seed",
        "input",
        "notes",
        "decoherence_free",
        "fixed_points",
        "invariant_states",
        "spectrum",
        "reversible",
        "verdicts",
        "residuals",
        "summary",
    ] {
        assert!(r.get(key).is_some(), "missing {key}");
    }
    assert_eq!(r["tool"]["name"], "qmsdf");
    assert_eq!(r["seed"], 3);
    assert_eq!(r["decoherence_free"]["dimension"], 2);
    assert_eq!(r["decoherence_free"]["blocks"], serde_json::json!([[1, 1], [1, 1]]));
    assert_eq!(r["invariant_states"]["faithful"], true);
    assert_eq!(r["reversible"]["equals_nt"], true);
    let notes = r["notes"].as_array().unwrap();
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("atomic")));
    assert!(notes.iter().any(|n| n.as_str().unwrap().contains("II_1")));
    let verdicts = r["verdicts"].as_array().unwrap();
    assert!(verdicts.iter().all(|v| v["verdict"] == "pass"), "{verdicts:?}");
    assert_eq!(r["summary"]["fail"], 0);
    assert_eq!(r["summary"]["error"], 0);
}

#[test]
fn conditional_rows_skip_without_faithful_state() {
    let (code, r) = analyze_json("amplitude_damping.json", &[]);
    assert_eq!(code, EXIT_PASS);
    assert_eq!(r["invariant_states"]["faithful"], false);
    let row = r["verdicts"]
        .as_array()
        .unwrap()
        .iter()
        .find(|v| v["name"] == "nt_equals_reversible")
        .unwrap()
        .clone();
    assert_eq!(row["verdict"], "skipped");
    assert!(row["reason"].as_str().unwrap().contains("faithful"));
}

#[test]
fn analyze_is_byte_identical_across_runs() {
    for name in ["dephasing.json", "block.json"] {
        let f = fixture(name);
        let args = ["analyze", "--model", path(&f), "--seed", "11"];
        assert_eq!(invoke(&args).stdout, invoke(&args).stdout, "{name}");
    }
}

#[test]
fn json_out_writes_report_and_prints_table() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("report.json");
    let f = fixture("dephasing.json");
    let o = invoke(&["analyze", "--model", path(&f), "--json-out", path(&out)]);
    assert_eq!(o.code, EXIT_PASS);
    assert!(o.stdout.contains("nt_equals_reversible"));
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(written["decoherence_free"]["dimension"], 2);
}

#[test]
fn verify_prints_one_line_per_verdict() {
    let f = fixture("block.json");
    let o = invoke(&["verify", "--model", path(&f)]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stdout);
    assert!(o.stdout.lines().any(|l| l.contains("nt_block_decomposition")));
    assert!(!o.stdout.trim_start().starts_with('{'));
}

#[test]
fn usage_errors_exit_1() {
    assert_eq!(invoke(&["analyze"]).code, EXIT_USAGE);
    assert_eq!(invoke(&["frobnicate"]).code, EXIT_USAGE);
    let missing = invoke(&["analyze", "--model", "/nonexistent/model.json"]);
    assert_eq!(missing.code, EXIT_USAGE);
    assert!(missing.stderr.contains("/nonexistent/model.json"));
    let f = fixture("dephasing.json");
    assert_eq!(invoke(&["analyze", "--model", path(&f), "--tol", "residual"]).code, EXIT_USAGE);
    assert_eq!(invoke(&["analyze", "--model", path(&f), "--tol", "bogus=1e-9"]).code, EXIT_USAGE);
    assert_eq!(invoke(&["analyze", "--model", path(&f), "--tol", "residual=-1"]).code, EXIT_USAGE);
    assert_eq!(invoke(&["random-suite", "--count", "1", "--dims", "9"]).code, EXIT_USAGE);
}

#[test]
fn help_documents_exit_codes() {
    let o = invoke(&["--help"]);
    assert_eq!(o.code, EXIT_PASS);
    for needle in ["Exit codes", "0 ", "1 ", "2 ", "3 ", "LINDBLAD_TOL_"] {
        assert!(o.stdout.contains(needle), "{needle}");
    }
}

#[test]
fn malformed_model_names_the_field() {
    let dir = tempfile::tempdir().unwrap();
    let p = dir.path().join("bad.json");
    std::fs::write(&p, r#"{"dim": 2, "H": [[[0,0],[0,0]],[[0,0]]], "L": []}"#).unwrap();
    let o = invoke(&["analyze", "--model", path(&p)]);
    assert_eq!(o.code, EXIT_USAGE);
    assert!(o.stderr.contains("H"), "{}", o.stderr);

    std::fs::write(&p, r#"{"dim": 2, "H": [[[0,0],[1,0]],[[0,0],[0,0]]], "L": []}"#).unwrap();
    let o = invoke(&["analyze", "--model", path(&p)]);
    assert_eq!(o.code, EXIT_USAGE, "non-Hermitian H is rejected: {}", o.stderr);

    std::fs::write(&p, "not json").unwrap();
    assert_eq!(invoke(&["analyze", "--model", path(&p)]).code, EXIT_USAGE);
}

#[test]
fn environment_tolerances_apply_and_cli_wins() {
    let f = fixture("dephasing.json");
    let args = ["analyze", "--model", path(&f)];
    let o = invoke_with_env(&args, &[("LINDBLAD_TOL_RESIDUAL", "1e-7")]);
    let r: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(r["input"]["tolerance"]["residual"], 1e-7);

    let args = ["analyze", "--model", path(&f), "--tol", "residual=1e-6"];
    let o = invoke_with_env(&args, &[("LINDBLAD_TOL_RESIDUAL", "1e-7")]);
    let r: Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!(r["input"]["tolerance"]["residual"], 1e-6);

    let o = invoke_with_env(&args, &[("LINDBLAD_TOL_RESIDUAL", "oops")]);
    assert_eq!(o.code, EXIT_USAGE);
}

#[test]
fn impossible_tolerance_turns_verdicts_red() {
    // A residual bound below roundoff cannot be met by the dissipative checks.
    let f = fixture("dephasing_plus_damping.json");
    let o = invoke(&["verify", "--model", path(&f), "--tol", "residual=1e-300"]);
    assert!(o.code == EXIT_VERDICT_FAIL || o.code == EXIT_ANALYSIS_ERROR, "code {} {}", o.code, o.stdout);
}

#[test]
fn evolve_dephasing_coherence_decays() {
    let m = fixture("dephasing.json");
    let x = fixture("coherence_01.json");
    let o = invoke(&["evolve", "--model", path(&m), "--input", path(&x), "--times", "0,1,10", "--picture", "heisenberg"]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    let rows: Vec<&str> = o.stdout.lines().collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("t,"));
    let norm = |row: &str| row.rsplit(',').next().unwrap().parse::<f64>().unwrap();
    assert!((norm(rows[1]) - 1.0).abs() < 1e-12);
    assert!((norm(rows[2]) - (-2.0f64).exp()).abs() < 1e-12);
    let n10 = norm(rows[3]);
    assert!((n10 - (-20.0f64).exp()).abs() / (-20.0f64).exp() < 1e-6);
}

#[test]
fn evolve_schrodinger_writes_csv_file() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("traj.csv");
    let m = fixture("amplitude_damping.json");
    let rho = fixture("excited_state.json");
    let o = invoke(&[
        "evolve",
        "--model",
        path(&m),
        "--input",
        path(&rho),
        "--times",
        "0,2",
        "--picture",
        "schrodinger",
        "--csv-out",
        path(&csv),
    ]);
    assert_eq!(o.code, EXIT_PASS, "{}", o.stderr);
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn evolve_rejects_bad_times_and_non_states() {
    let m = fixture("dephasing.json");
    let x = fixture("coherence_01.json");
    let base = ["evolve", "--model", path(&m), "--input", path(&x), "--picture"];
    let mut a = base.to_vec();
    a.extend(["heisenberg", "--times", "0,-1"]);
    assert_eq!(invoke(&a).code, EXIT_USAGE);
    let mut b = base.to_vec();
    b.extend(["schrodinger", "--times", "0,1"]);
    // e₀₁ is not a density matrix.
    assert_eq!(invoke(&b).code, EXIT_USAGE);
}

#[test]
fn random_suite_is_reproducible() {
    let args = ["random-suite", "--count", "6", "--dims", "2,3", "--seed", "9", "--require-faithful"];
    let a = invoke(&args);
    let b = invoke(&args);
    assert_eq!(a.code, EXIT_PASS, "{}", a.stderr);
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_str(&a.stdout).unwrap();
    assert_eq!(r["count"], 6);
    assert_eq!(r["nt_equals_reversible_pass"], 6);
    assert!(a.stderr.contains("6/6"));
}
