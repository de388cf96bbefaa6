//! End-to-end tests driving the compiled binary through temp files.

use std::fs;
use std::process::{Command, Output};

use purelax::measure::{Cell, DensityFamily, DiscreteSpace};
use purelax::purify::{DecisionInstance, InstanceFile};
use serde_json::Value;
use tempfile::TempDir;

fn purelax(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_purelax"))
        .args(args)
        .output()
        .expect("binary should run")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn path_str(dir: &TempDir, name: &str) -> String {
    dir.path().join(name).to_str().unwrap().to_owned()
}

fn read_value(path: &str) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

/// Two uniform cells in one block, two actions each: action 0 pays
/// objective 1 at cost 2, action 1 pays nothing. Budget 1 forces an even
/// split, so the best worst-case objective is exactly one half.
fn showcase_instance() -> InstanceFile {
    let space = DiscreteSpace::new(vec![
        Cell {
            weight: 0.5,
            block: 0,
        },
        Cell {
            weight: 0.5,
            block: 0,
        },
    ]);
    let instance = DecisionInstance::new(
        space,
        vec![vec![0, 1], vec![0, 1]],
        vec![
            vec![vec![1.0, 2.0], vec![0.0, 0.0]],
            vec![vec![1.0, 2.0], vec![0.0, 0.0]],
        ],
        2,
    )
    .unwrap();
    let mut file = InstanceFile::from(&instance);
    file.budgets = Some(vec![1.0]);
    file.densities =
        Some(DensityFamily::new(vec!["1".into()], vec![vec![1.0], vec![1.0]]).unwrap());
    file
}

fn write_showcase(dir: &TempDir, budgets: Vec<f64>) -> String {
    let mut file = showcase_instance();
    file.budgets = Some(budgets);
    let path = path_str(dir, "instance.json");
    fs::write(&path, serde_json::to_string(&file).unwrap()).unwrap();
    path
}

const RANDOM_SPEC: &str = r#"{
    "kind": "random",
    "cells": 8, "actions": 2, "m": 1, "params": 2, "groups": 2,
    "seed": 5
}"#;

#[test]
fn generate_same_spec_is_byte_identical() {
    let dir = TempDir::new().unwrap();
    let spec = path_str(&dir, "spec.json");
    fs::write(&spec, RANDOM_SPEC).unwrap();
    let (out_a, out_b) = (path_str(&dir, "a.json"), path_str(&dir, "b.json"));
    let (phi_a, phi_b) = (path_str(&dir, "pa.json"), path_str(&dir, "pb.json"));
    for (out, phi) in [(&out_a, &phi_a), (&out_b, &phi_b)] {
        let run = purelax(&[
            "generate", "--input", &spec, "--output", out, "--phi-out", phi,
        ]);
        assert_eq!(code(&run), 0, "{}", stderr(&run));
    }
    assert_eq!(fs::read(&out_a).unwrap(), fs::read(&out_b).unwrap());
    assert_eq!(fs::read(&phi_a).unwrap(), fs::read(&phi_b).unwrap());

    let reseeded = path_str(&dir, "c.json");
    let run = purelax(&[
        "generate", "--input", &spec, "--output", &reseeded, "--seed", "123",
    ]);
    assert_eq!(code(&run), 0);
    assert_ne!(fs::read(&out_a).unwrap(), fs::read(&reseeded).unwrap());
}

#[test]
fn generate_writes_the_threshold_grid_shape() {
    let dir = TempDir::new().unwrap();
    let spec = path_str(&dir, "spec.json");
    fs::write(
        &spec,
        r#"{"kind": "example1", "n1": 4, "n2": 4, "p_grid": [0.25, 0.5, 0.75, 1.0], "seed": 2}"#,
    )
    .unwrap();
    let out = path_str(&dir, "instance.json");
    let run = purelax(&["generate", "--input", &spec, "--output", &out]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let value = read_value(&out);
    assert_eq!(value["space"]["cells"].as_array().unwrap().len(), 16);
    assert_eq!(value["densities"]["params"].as_array().unwrap().len(), 4);
}

#[test]
fn generate_rejects_malformed_specs_with_position() {
    let dir = TempDir::new().unwrap();
    let spec = path_str(&dir, "spec.json");
    fs::write(&spec, "{ \"kind\": \"random\",\n  nope }").unwrap();
    let out = path_str(&dir, "instance.json");
    let run = purelax(&["generate", "--input", &spec, "--output", &out]);
    assert_eq!(code(&run), 3);
    assert!(stderr(&run).contains("line"), "{}", stderr(&run));
}

#[test]
fn purify_keeps_pure_inputs_and_reports_zero_residuals() {
    let dir = TempDir::new().unwrap();
    let instance = write_showcase(&dir, vec![1.0]);
    let phi = path_str(&dir, "phi.json");
    fs::write(&phi, r#"{"f": [0, 1]}"#).unwrap();
    let out = path_str(&dir, "purified.json");
    let run = purelax(&[
        "purify", "--input", &instance, "--phi", &phi, "--output", &out,
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let value = read_value(&out);
    assert_eq!(value["f"], serde_json::json!([0, 1]));
    for block in value["report"]["blocks"].as_array().unwrap() {
        assert_eq!(block["residual_norm"].as_f64().unwrap(), 0.0);
    }
    assert!(value.get("certificate").is_none());
}

#[test]
fn purify_can_embed_the_decomposition() {
    let dir = TempDir::new().unwrap();
    let instance = write_showcase(&dir, vec![1.0]);
    let phi = path_str(&dir, "phi.json");
    fs::write(&phi, r#"{"phi": [[0.5, 0.5], [0.5, 0.5]]}"#).unwrap();
    let out = path_str(&dir, "purified.json");
    let run = purelax(&[
        "purify",
        "--input",
        &instance,
        "--phi",
        &phi,
        "--output",
        &out,
        "--dump-certificate",
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let value = read_value(&out);
    assert!(value.get("certificate").is_some());
}

#[test]
fn purify_rejects_mismatched_decisions() {
    let dir = TempDir::new().unwrap();
    let instance = write_showcase(&dir, vec![1.0]);
    let phi = path_str(&dir, "phi.json");
    fs::write(&phi, r#"{"phi": [[0.5, 0.5]]}"#).unwrap();
    let out = path_str(&dir, "purified.json");
    let run = purelax(&[
        "purify", "--input", &instance, "--phi", &phi, "--output", &out,
    ]);
    assert_eq!(code(&run), 3, "{}", stderr(&run));
}

#[test]
fn solve_finds_the_even_split_optimum() {
    let dir = TempDir::new().unwrap();
    let instance = write_showcase(&dir, vec![1.0]);
    let out = path_str(&dir, "solution.json");
    let run = purelax(&["solve", "--input", &instance, "--output", &out]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let value = read_value(&out);
    assert!((value["relaxed_value"].as_f64().unwrap() - 0.5).abs() <= 1e-9);
    assert_eq!(value["pure_value"].as_f64().unwrap(), 0.5);
    assert_eq!(value["constraint_values"][0].as_f64().unwrap(), 1.0);
    assert!(value["audit"]["within_epsilon"].as_bool().unwrap());
}

#[test]
fn solve_signals_infeasible_budgets() {
    let dir = TempDir::new().unwrap();
    let instance = write_showcase(&dir, vec![-1.0]);
    let out = path_str(&dir, "solution.json");
    let run = purelax(&["solve", "--input", &instance, "--output", &out]);
    assert_eq!(code(&run), 2, "{}", stderr(&run));
    assert!(stderr(&run).contains("no decision"), "{}", stderr(&run));
}

#[test]
fn verify_accepts_purify_output_and_catches_tampering() {
    let dir = TempDir::new().unwrap();
    let spec = path_str(&dir, "spec.json");
    fs::write(&spec, RANDOM_SPEC).unwrap();
    let instance = path_str(&dir, "instance.json");
    let phi = path_str(&dir, "phi.json");
    let run = purelax(&[
        "generate", "--input", &spec, "--output", &instance, "--phi-out", &phi,
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let purified = path_str(&dir, "purified.json");
    let run = purelax(&[
        "purify", "--input", &instance, "--phi", &phi, "--output", &purified,
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));

    let run = purelax(&[
        "verify", "--input", &instance, "--phi", &phi, "--result", &purified,
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    assert!(stdout(&run).contains("OK"), "{}", stdout(&run));

    let mut value = read_value(&purified);
    let bound = value["report"]["global_bound"].as_f64().unwrap();
    value["report"]["global_bound"] = serde_json::json!(bound + 1e-6);
    fs::write(&purified, serde_json::to_string(&value).unwrap()).unwrap();
    let run = purelax(&[
        "verify", "--input", &instance, "--phi", &phi, "--result", &purified,
    ]);
    assert_eq!(code(&run), 3, "{}", stderr(&run));
    assert!(stderr(&run).contains("global_bound"), "{}", stderr(&run));
}

#[test]
fn refine_study_halves_bounds_level_by_level() {
    let dir = TempDir::new().unwrap();
    let spec = path_str(&dir, "spec.json");
    fs::write(&spec, RANDOM_SPEC).unwrap();
    let instance = path_str(&dir, "instance.json");
    let run = purelax(&["generate", "--input", &spec, "--output", &instance]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));
    let table = path_str(&dir, "study.csv");
    let run = purelax(&[
        "refine-study", "--input", &instance, "--levels", "3", "--output", &table,
    ]);
    assert_eq!(code(&run), 0, "{}", stderr(&run));

    let text = fs::read_to_string(&table).unwrap();
    let mut lines = text.lines();
    assert_eq!(
        lines.next().unwrap(),
        "level,max_cell_weight,max_block_residual,bound,gap"
    );
    let rows: Vec<Vec<f64>> = lines
        .map(|line| {
            line.split(',')
                .map(|field| field.parse::<f64>().expect("numeric CSV field"))
                .collect()
        })
        .collect();
    assert_eq!(rows.len(), 3);
    for (level, row) in rows.iter().enumerate() {
        assert_eq!(row[0], level as f64);
    }
    for pair in rows.windows(2) {
        assert_eq!(pair[1][1] * 2.0, pair[0][1], "cell weight must halve");
        assert_eq!(pair[1][3] * 2.0, pair[0][3], "bound must halve");
        assert!(
            pair[1][2] <= pair[0][2] * 1.1,
            "residuals may not grow: {} -> {}",
            pair[0][2],
            pair[1][2]
        );
    }
}

#[test]
fn refine_study_needs_at_least_two_levels() {
    let dir = TempDir::new().unwrap();
    let instance = write_showcase(&dir, vec![1.0]);
    let table = path_str(&dir, "study.csv");
    let run = purelax(&[
        "refine-study", "--input", &instance, "--levels", "1", "--output", &table,
    ]);
    assert_eq!(code(&run), 3);
    assert!(stderr(&run).contains("at least 2"), "{}", stderr(&run));
}

#[test]
fn usage_and_help_exit_codes() {
    let run = purelax(&["--help"]);
    assert_eq!(code(&run), 0);
    let run = purelax(&["frobnicate"]);
    assert_eq!(code(&run), 3);
    let run = purelax(&["purify", "--input", "x.json", "--phi", "x.json", "--output", "y.json"]);
    assert_eq!(code(&run), 3);
    assert!(stderr(&run).contains("distinct"), "{}", stderr(&run));
}
