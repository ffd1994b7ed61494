// Licensed under the Apache License, Version 2.0 (the "License"); you may
// not use this file except in compliance with the License. You may obtain
// a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS, WITHOUT
// WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied. See the
// License for the specific language governing permissions and limitations
// under the License.

//! Command-line behaviour: outputs, determinism and exit codes.

use std::fs;
use std::path::Path;

use qbos::cli::{run, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_IO, EXIT_OK, EXIT_SCHEMA};
use qbos::gcm::{verify_separation, MappingPlan};
use tempfile::tempdir;

struct Outcome {
    code: i32,
    stdout: String,
    stderr: String,
}

fn qbos(args: &[&str]) -> Outcome {
    let mut out = Vec::new();
    let mut err = Vec::new();
    let mut argv = vec!["qbos"];
    argv.extend_from_slice(args);
    let code = run(argv, &mut out, &mut err);
    Outcome {
        code,
        stdout: String::from_utf8(out).unwrap(),
        stderr: String::from_utf8(err).unwrap(),
    }
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

#[test]
fn equilibrium_default_and_identity() {
    let o = qbos(&["equilibrium", "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert!((v["p_alice"].as_f64().unwrap() - 0.6).abs() < 1e-12);
    assert!((v["q_bob"].as_f64().unwrap() - 0.4).abs() < 1e-12);
    assert!((v["e_a"].as_f64().unwrap() - 1.2).abs() < 1e-12);
    assert!((v["coordination_prob"].as_f64().unwrap() - 0.48).abs() < 1e-12);
    assert!((v["advantage_percent_a"].as_f64().unwrap() - 108.33).abs() < 0.01);

    let o = qbos(&["equilibrium"]);
    assert!(o.stdout.contains("108.33%"), "{}", o.stdout);

    let o = qbos(&["equilibrium", "--matrix", "identity-coordination", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    assert_eq!((v["p_alice"].as_f64(), v["q_bob"].as_f64()), (Some(0.5), Some(0.5)));
}

#[test]
fn malformed_matrix_names_the_cell() {
    let dir = tempdir().unwrap();
    let path = dir.path().join("m.json");
    fs::write(&path, r#"[[[3,2],[0,0]],[[0,"x"],[2,3]]]"#).unwrap();
    let o = qbos(&["equilibrium", "--matrix", p(&path)]);
    assert_eq!(o.code, EXIT_CONFIG);
    assert!(o.stderr.contains("[1][0]"), "{}", o.stderr);

    fs::write(&path, "[[[3,2],[0,0]],").unwrap();
    assert_eq!(qbos(&["equilibrium", "--matrix", p(&path)]).code, EXIT_CONFIG);
    // Dominant strategies leave no interior mix.
    fs::write(&path, r#"{"cells": [[[3,3],[3,0]],[[0,3],[0,0]]]}"#).unwrap();
    assert_eq!(qbos(&["equilibrium", "--matrix", p(&path)]).code, EXIT_CONFIG);
}

#[test]
fn sweep_is_byte_identical_across_invocations() {
    let dir = tempdir().unwrap();
    let a = dir.path().join("a.csv");
    let b = dir.path().join("b.csv");
    let args = |out: &Path| {
        vec!["sweep", "--seed", "42", "--runs", "3", "--shots", "512", "--gamma-steps", "7", "--out"]
            .into_iter()
            .map(String::from)
            .chain([p(out).to_string()])
            .collect::<Vec<_>>()
    };
    let run_args = |out: &Path| {
        let v = args(out);
        let refs: Vec<&str> = v.iter().map(String::as_str).collect();
        qbos(&refs)
    };
    assert_eq!(run_args(&a).code, EXIT_OK);
    assert_eq!(run_args(&b).code, EXIT_OK);
    let (ta, tb) = (fs::read(&a).unwrap(), fs::read(&b).unwrap());
    assert_eq!(ta, tb);
    let text = String::from_utf8(ta).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "strategy,gamma,run,p00,p01,p10,p11,ea,eb,ea_analytic,eb_analytic"
    );
    assert_eq!(lines.count(), 4 * 7 * 3);
}

#[test]
fn two_step_grid_has_only_endpoints() {
    let o = qbos(&["sweep", "--gamma-steps", "2", "--runs", "2", "--shots", "64", "--strategies", "I,H"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let gammas: std::collections::BTreeSet<String> = o
        .stdout
        .lines()
        .skip(1)
        .map(|l| l.split(',').nth(1).unwrap().to_string())
        .collect();
    let expect: std::collections::BTreeSet<String> =
        ["0.0".to_string(), format!("{:?}", std::f64::consts::PI)].into();
    assert_eq!(gammas, expect);
    assert_eq!(o.stdout.lines().count(), 1 + 2 * 2 * 2);
}

#[test]
fn noiseless_sweep_validates_near_zero_and_round_trips() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("ideal.csv");
    let svg = dir.path().join("ideal.svg");
    let o = qbos(&["sweep", "--noise-scale", "0", "--seed", "1", "--out", p(&csv), "--svg", p(&svg)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(fs::read_to_string(&svg).unwrap().starts_with("<svg"));

    let o = qbos(&["validate", p(&csv), "--json"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let v: serde_json::Value = serde_json::from_str(&o.stdout).unwrap();
    for s in v["strategies"].as_array().unwrap() {
        assert!(s["rmse_a"].as_f64().unwrap() < 0.03, "{s}");
        assert!(s["rmse_b"].as_f64().unwrap() < 0.03, "{s}");
    }
    let table = qbos(&["validate", p(&csv)]);
    assert!(table.stdout.contains("RMSE(E_A)") && table.stdout.contains("RY(pi/4)"));

    // Rows survive parse and rewrite unchanged.
    let text = fs::read_to_string(&csv).unwrap();
    let rows = qbos::cli::parse_sweep_csv(&text).unwrap();
    assert_eq!(qbos::cli::rows_to_csv(&rows), text);
}

#[test]
fn validate_reports_schema_problems() {
    let dir = tempdir().unwrap();
    let csv = dir.path().join("r.csv");
    assert_eq!(qbos(&["sweep", "--gamma-steps", "4", "--runs", "2", "--shots", "32", "--out", p(&csv)]).code, EXIT_OK);
    let text = fs::read_to_string(&csv).unwrap();

    let truncated = dir.path().join("t.csv");
    fs::write(&truncated, &text[..text.len() / 2]).unwrap();
    assert_eq!(qbos(&["validate", p(&truncated)]).code, EXIT_SCHEMA);

    let bad = dir.path().join("b.csv");
    fs::write(&bad, text.replacen("ea_analytic", "ea_model", 1)).unwrap();
    let o = qbos(&["validate", p(&bad)]);
    assert_eq!(o.code, EXIT_SCHEMA);
    assert!(o.stderr.contains("ea_analytic") && o.stderr.contains("ea_model"), "{}", o.stderr);

    let missing_row = dir.path().join("m.csv");
    let mut lines: Vec<&str> = text.lines().collect();
    lines.remove(3);
    fs::write(&missing_row, lines.join("\n") + "\n").unwrap();
    let o = qbos(&["validate", p(&missing_row)]);
    assert_eq!(o.code, EXIT_SCHEMA);
    assert!(o.stderr.contains("missing"), "{}", o.stderr);

    assert_eq!(qbos(&["validate", p(&dir.path().join("absent.csv"))]).code, EXIT_IO);
}

#[test]
fn map_reports_plan_and_infeasibility() {
    let dir = tempdir().unwrap();
    let out = dir.path().join("plan.json");
    let o = qbos(&["map", "--synth", "--pairs", "31", "--out", p(&out)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("separation check (min 2): OK"), "{}", o.stdout);
    assert!(o.stdout.contains("qubits: 62"));
    let plan = MappingPlan::from_json(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(plan.len(), 31);
    let graph = qbos::device::heavy_hex_graph(7).unwrap();
    assert!(verify_separation(&plan, &graph).ok);

    let o = qbos(&["map", "--synth", "--pairs", "31", "--min-separation", "1"]);
    assert_eq!(o.code, EXIT_OK);
    assert!(o.stderr.contains("OK"));

    let o = qbos(&["map", "--synth", "--pairs", "200"]);
    assert_eq!(o.code, EXIT_INFEASIBLE);
    assert!(o.stderr.contains("at most"), "{}", o.stderr);

    // Refinement from feedback keeps a valid plan.
    let fb = dir.path().join("fb.json");
    let mut feedback = vec![0.1; 31];
    feedback[5] = 2.0;
    fs::write(&fb, serde_json::to_string(&feedback).unwrap()).unwrap();
    let refined = dir.path().join("refined.json");
    let o = qbos(&["map", "--plan", p(&out), "--feedback", p(&fb), "--out", p(&refined)]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert!(o.stdout.contains("OK"));
}

#[test]
fn device_files_are_used_when_given() {
    let dir = tempdir().unwrap();
    let map = dir.path().join("map.json");
    let cal = dir.path().join("cal.json");
    let g = qbos::device::CouplingGraph::new(6, (0..5).map(|i| (i, i + 1))).unwrap();
    qbos::device::save_coupling_map(&g, &map).unwrap();
    let c = qbos::device::synth_calibration(&g, 4, qbos::device::CalibrationProfile::Uniform);
    qbos::device::save_calibration(&c, &cal).unwrap();
    let o = qbos(&["map", "--coupling-map", p(&map), "--calibration", p(&cal), "--pairs", "2"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    let o = qbos(&["map", "--coupling-map", p(&map), "--calibration", p(&cal), "--pairs", "3"]);
    assert_eq!(o.code, EXIT_INFEASIBLE);

    fs::write(&map, r#"{"num_qubits": 2, "edges": [[0, 0]]}"#).unwrap();
    assert_eq!(qbos(&["map", "--coupling-map", p(&map), "--pairs", "1"]).code, EXIT_CONFIG);
}

#[test]
fn config_file_and_flag_precedence() {
    let dir = tempdir().unwrap();
    let cfg = dir.path().join("cfg.json");
    fs::write(&cfg, r#"{"gamma_steps": 3, "runs": 2, "shots": 16, "strategies": ["H"]}"#).unwrap();
    let o = qbos(&["--config", p(&cfg), "sweep"]);
    assert_eq!(o.code, EXIT_OK, "{}", o.stderr);
    assert_eq!(o.stdout.lines().count(), 1 + 3 * 2);
    let o = qbos(&["sweep", "--config", p(&cfg), "--runs", "3"]);
    assert_eq!(o.stdout.lines().count(), 1 + 3 * 3);

    fs::write(&cfg, r#"{"gamma_stepz": 3}"#).unwrap();
    assert_eq!(qbos(&["--config", p(&cfg), "sweep"]).code, EXIT_CONFIG);
}

#[test]
fn bad_flags_and_unwritable_outputs() {
    assert_eq!(qbos(&["sweep", "--gamma-steps", "1"]).code, EXIT_CONFIG);
    assert_eq!(qbos(&["sweep", "--shots", "0"]).code, EXIT_CONFIG);
    assert_eq!(qbos(&["sweep", "--strategies", "X"]).code, EXIT_CONFIG);
    assert_eq!(qbos(&["sweep", "--formula-variant", "other"]).code, EXIT_CONFIG);
    assert_eq!(qbos(&["frobnicate"]).code, EXIT_CONFIG);
    let o = qbos(&["sweep", "--gamma-steps", "2", "--runs", "1", "--shots", "8", "--out", "/nonexistent/dir/x.csv"]);
    assert_eq!(o.code, EXIT_IO);
    assert_eq!(qbos(&["--help"]).code, EXIT_OK);
}
