//! End-to-end tests of the installed binary against the problem corpus:
//! exit codes, diagnostics, report shapes, and the certificate verify
//! round trip.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn problems() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("problems")
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_polyembed"))
        .args(args)
        .output()
        .expect("driver runs")
}

fn run_on(file: &str, extra: &[&str]) -> Output {
    let path = problems().join(file);
    let mut args = vec!["--input".to_string(), path.display().to_string()];
    args.extend(extra.iter().map(|s| s.to_string()));
    Command::new(env!("CARGO_BIN_EXE_polyembed"))
        .args(&args)
        .output()
        .expect("driver runs")
}

fn stdout_json(out: &Output) -> serde_json::Value {
    serde_json::from_slice(&out.stdout).expect("stdout is a JSON document")
}

#[test]
fn embed_task_reports_the_algebraic_case() {
    let out = run_on("embed_quadratic.prob", &["--json"]);
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let doc = stdout_json(&out);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["verified"], true);
    assert_eq!(doc["payload"]["case"], "AlgebraicCoefficients");
    assert_eq!(doc["payload"]["d"], 1);
    assert_eq!(doc["options"]["bound"], 10);
    assert_eq!(doc["options"]["seed"], 1);
    assert!(doc["input_hash"].as_str().unwrap().starts_with("sha256:"));
    assert!(doc.get("timing_ms").is_none(), "timing never enters the report");
}

#[test]
fn hidden_coefficient_task_keeps_the_parameter() {
    let out = run_on("hidden_coefficient.prob", &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["payload"]["case"], "AlgebraicCoefficients");
    let rejected = doc["payload"]["rejected_points"]
        .as_array()
        .expect("rejected specializations are recorded");
    assert_eq!(rejected.len(), 1);
    assert_eq!(rejected[0], serde_json::json!([0, 6]), "point 0 rejected at degree 6");
    let tower = serde_json::to_string(&doc["payload"]["field_tower"]).unwrap();
    assert!(tower.contains('u'), "the tower keeps the coefficient parameter");
}

#[test]
fn trace_mode_renders_a_readable_transcript() {
    let out = run_on("embed_quadratic.prob", &["--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).expect("utf-8 trace");
    assert!(text.starts_with("task: embed R\n"), "got: {text}");
    assert!(text.contains("case: AlgebraicCoefficients"));
    assert!(text.ends_with("result: verified\n"));
    {
        let run2 = run_on("embed_quadratic.prob", &["--trace"]);
        assert_eq!(run2.stdout, text.as_bytes(), "traces are deterministic");
    }
}

#[test]
fn parse_error_exits_with_code_two() {
    let out = run_on("parse_error.prob", &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).expect("utf-8 diagnostic");
    let diagnostic: Vec<&str> = err.lines().filter(|l| l.starts_with("error:")).collect();
    assert_eq!(diagnostic.len(), 1, "one-line diagnostic: {err}");
    assert!(diagnostic[0].contains("line"), "position is reported: {err}");

    let json_out = run_on("parse_error.prob", &["--json"]);
    assert_eq!(json_out.status.code(), Some(2));
    let doc = stdout_json(&json_out);
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["error"]["exit_code"], 2);
    assert_eq!(doc["error"]["kind"], "parse");
}

#[test]
fn unsupported_input_exits_with_code_three() {
    let out = run_on("unsupported_tower.prob", &["--json"]);
    assert_eq!(out.status.code(), Some(3));
    let doc = stdout_json(&out);
    assert_eq!(doc["error"]["exit_code"], 3);
    assert_eq!(doc["error"]["kind"], "unsupported");
}

#[test]
fn missing_input_file_exits_with_code_two() {
    let out = run(&["--input", "/nonexistent/nowhere.prob"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bound_override_wins_over_the_problem_file() {
    let out = run_on("embed_quadratic.prob", &["--json", "--bound", "14"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    assert_eq!(doc["options"]["bound"], 14);
}

#[test]
fn whole_corpus_has_the_documented_exit_codes() {
    let expected = [
        ("conductor_cusp.prob", 0),
        ("cusp_cancellation.prob", 0),
        ("eigen_lnd.prob", 0),
        ("embed_quadratic.prob", 0),
        ("hidden_coefficient.prob", 0),
        ("line_cancellation.prob", 0),
        ("normalize_composed.prob", 0),
        ("parse_error.prob", 2),
        ("sagbi_cusp.prob", 0),
        ("triangular_lnd.prob", 0),
        ("unsupported_tower.prob", 3),
    ];
    let mut seen: Vec<String> = std::fs::read_dir(problems())
        .expect("problems directory")
        .map(|e| e.expect("entry").file_name().to_string_lossy().into_owned())
        .filter(|n| n.ends_with(".prob"))
        .collect();
    seen.sort();
    assert_eq!(
        seen,
        expected.iter().map(|(n, _)| n.to_string()).collect::<Vec<_>>(),
        "every corpus file is pinned here"
    );
    for (name, code) in expected {
        let out = run_on(name, &["--json"]);
        assert_eq!(out.status.code(), Some(code), "{name}");
    }
}

#[test]
fn verify_task_round_trips_and_detects_tampering() {
    let tmp = std::env::temp_dir().join(format!("polyembed-golden-{}", std::process::id()));
    std::fs::create_dir_all(&tmp).expect("temp dir");

    // Produce a certificate, store its payload, and re-verify it.
    let out = run_on("embed_quadratic.prob", &["--json"]);
    assert_eq!(out.status.code(), Some(0));
    let doc = stdout_json(&out);
    let cert_path = tmp.join("cert.json");
    std::fs::write(&cert_path, serde_json::to_string_pretty(&doc["payload"]).unwrap())
        .expect("write certificate");

    let problem = format!(
        r#"field k = Q
extend K = k adjoin a minpoly a^2 - 2
ring B = K[s]
gens R in B = {{ a*s^2, a*s^3 }}
task verify R bound=10 seed=1 cert="{}"
"#,
        cert_path.display()
    );
    let prob_path = tmp.join("verify.prob");
    std::fs::write(&prob_path, &problem).expect("write problem");

    let ok = run(&["--input", prob_path.to_str().unwrap(), "--json"]);
    assert_eq!(
        ok.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&ok.stderr)
    );
    let doc = stdout_json(&ok);
    assert_eq!(doc["payload"]["match"], true);
    assert_eq!(doc["verified"], true);

    // Tamper with the stored certificate: the degree drops out of
    // agreement and verification fails with exit code 1.
    let text = std::fs::read_to_string(&cert_path).unwrap();
    assert!(text.contains("\"d\": 1"));
    std::fs::write(&cert_path, text.replace("\"d\": 1", "\"d\": 2")).unwrap();
    let bad = run(&["--input", prob_path.to_str().unwrap(), "--json"]);
    assert_eq!(bad.status.code(), Some(1));
    let doc = stdout_json(&bad);
    assert_eq!(doc["payload"]["match"], false);

    std::fs::remove_dir_all(&tmp).ok();
}

#[test]
fn cancellation_trace_derives_the_kernel_equation() {
    let out = run_on("cusp_cancellation.prob", &["--trace"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).expect("utf-8 trace");
    assert!(text.contains("[ok] kernel-equation"), "got: {text}");
    assert!(text.contains("verdict: D kills R"));
    assert!(text.ends_with("result: verified\n"));
}
