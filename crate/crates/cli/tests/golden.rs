//! Reports on the fixtures against checked-in golden files.
//!
//! Keys, array lengths, strings and booleans must match exactly; numbers
//! within 1e-9 (absolute plus relative). `UPDATE_GOLDEN=1` rewrites the files.

use std::path::PathBuf;

use qmsdf_cli::analyze_file;
use serde_json::Value;

const NUMERIC: f64 = 1e-9;

fn dir(sub: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join(sub)
}

fn compare(path: &str, want: &Value, got: &Value, diffs: &mut Vec<String>) {
    match (want, got) {
        (Value::Object(a), Value::Object(b)) => {
            let ka: Vec<_> = a.keys().collect();
            let kb: Vec<_> = b.keys().collect();
            if ka != kb {
                diffs.push(format!("{path}: keys {ka:?} vs {kb:?}"));
                return;
            }
            for (k, v) in a {
                compare(&format!("{path}.{k}"), v, &b[k], diffs);
            }
        }
        (Value::Array(a), Value::Array(b)) => {
            if a.len() != b.len() {
                diffs.push(format!("{path}: length {} vs {}", a.len(), b.len()));
                return;
            }
            for (i, (x, y)) in a.iter().zip(b).enumerate() {
                compare(&format!("{path}[{i}]"), x, y, diffs);
            }
        }
        (Value::Number(a), Value::Number(b)) => {
            let (x, y) = (a.as_f64().unwrap(), b.as_f64().unwrap());
            if (x - y).abs() > NUMERIC * (1.0 + x.abs()) {
                diffs.push(format!("{path}: {x} vs {y}"));
            }
        }
        _ if want == got => {}
        _ => diffs.push(format!("{path}: {want} vs {got}")),
    }
}

fn check(fixture: &str) {
    let report = analyze_file(&dir("fixtures").join(fixture), &[], 0, &[]).unwrap();
    let got: Value = serde_json::from_str(&report.to_json()).unwrap();
    let golden = dir("tests/golden").join(fixture);
    if std::env::var_os("UPDATE_GOLDEN").is_some() {
        std::fs::create_dir_all(golden.parent().unwrap()).unwrap();
        std::fs::write(&golden, report.to_json()).unwrap();
        return;
    }
    let want: Value = serde_json::from_str(&std::fs::read_to_string(&golden).unwrap()).unwrap();
    let mut diffs = Vec::new();
    compare("$", &want, &got, &mut diffs);
    assert!(diffs.is_empty(), "{fixture} differs from its golden report:\n{}", diffs.join("\n"));
}

#[test]
fn dephasing_report_matches_golden() {
    check("dephasing.json");
}

#[test]
fn amplitude_damping_report_matches_golden() {
    check("amplitude_damping.json");
}

#[test]
fn block_report_matches_golden() {
    check("block.json");
}

#[test]
fn mixed_report_matches_golden() {
    check("dephasing_plus_damping.json");
}
