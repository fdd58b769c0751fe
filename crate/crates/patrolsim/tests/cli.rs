//! Black-box tests of the `patrolsim` binary and its file formats.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use patrolsim::checkpoint;
use patrolsim::ingest::sha256_hex;
use patrolsim_core::gan::{sample_patrol, train_gan, TrainConfig};
use patrolsim_core::geodata::BoundingBox;
use patrolsim_core::seed::rng_from;
use serde_json::{json, Value};
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_patrolsim"));
    c.env_remove("PATROLSIM_DATA_DIR").env("RUST_LOG", "warn");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn write_plan(dir: &Path, plan: &Value) -> PathBuf {
    let p = dir.join("plan.json");
    fs::write(&p, serde_json::to_string_pretty(plan).unwrap()).unwrap();
    p
}

fn synth(dir: &Path, city: &str, year: i32, ipm: usize) {
    let out = run(&[
        "synth",
        "--out",
        dir.to_str().unwrap(),
        "--city",
        city,
        "--year",
        &year.to_string(),
        "--incidents-per-month",
        &ipm.to_string(),
    ]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
}

fn files_source(sub: &str) -> Value {
    json!({"files": {
        "crimes": format!("{sub}/crimes.csv"),
        "boundaries": format!("{sub}/boundaries.geojson"),
        "demographics": format!("{sub}/demographics.csv"),
        "preset": "generic"
    }})
}

fn csv_rows(path: &Path) -> usize {
    csv::Reader::from_path(path).unwrap().records().count()
}

#[test]
fn empty_plan_succeeds_without_output() {
    let tmp = TempDir::new().unwrap();
    let plan = write_plan(tmp.path(), &json!({}));
    let out_dir = tmp.path().join("out");
    for sub in ["grid", "sensitivity", "debias", "all"] {
        let out = run(&[sub, "--config", plan.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{sub}");
    }
    assert!(!out_dir.exists());
}

#[test]
fn config_errors_exit_with_1() {
    let tmp = TempDir::new().unwrap();
    let cases = [
        json!({"unknown_key": 1}),
        json!({"replicates": 0}),
        json!({"months": [1, 2]}),
        json!({"cells": [{"city": "Baltimore", "year": 2019, "mode": "detected"}]}),
        json!({"sim": {"radius_ft": -1.0}}),
    ];
    for plan in cases {
        let p = write_plan(tmp.path(), &plan);
        let out = run(&["grid", "--config", p.to_str().unwrap()]);
        assert_eq!(code(&out), 1, "{plan}: {}", String::from_utf8_lossy(&out.stderr));
    }
    let out = run(&["grid", "--config", tmp.path().join("absent.json").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
    fs::write(tmp.path().join("broken.json"), "{ not json").unwrap();
    let out = run(&["grid", "--config", tmp.path().join("broken.json").to_str().unwrap()]);
    assert_eq!(code(&out), 1);
}

#[test]
fn data_errors_exit_with_2() {
    let tmp = TempDir::new().unwrap();
    synth(&tmp.path().join("city"), "Baltimore", 2019, 10);
    let plan = json!({
        "datasets": [{"city": "Baltimore", "year": 2019, "source": files_source("city")}],
        "cells": [{"city": "Baltimore", "year": 2019, "mode": "reported"}]
    });
    let p = write_plan(tmp.path(), &plan);

    fs::rename(tmp.path().join("city/crimes.csv"), tmp.path().join("city/crimes.bak")).unwrap();
    assert_eq!(code(&run(&["ingest", "--config", p.to_str().unwrap()])), 2);
    fs::rename(tmp.path().join("city/crimes.bak"), tmp.path().join("city/crimes.csv")).unwrap();

    // shares far from summing to one
    let demo = tmp.path().join("city/demographics.csv");
    let text = fs::read_to_string(&demo).unwrap();
    let mut lines: Vec<String> = text.lines().map(String::from).collect();
    let mut cols: Vec<&str> = lines[1].split(',').collect();
    cols[1] = "0.9";
    cols[2] = "0.9";
    lines[1] = cols.join(",");
    fs::write(&demo, lines.join("\n")).unwrap();
    let out = run(&["ingest", "--config", p.to_str().unwrap(), "--out", tmp.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&out), 2, "{}", String::from_utf8_lossy(&out.stderr));

    // stats and plots without a prior grid run
    let empty = TempDir::new().unwrap();
    let plan = write_plan(empty.path(), &json!({}));
    assert_eq!(code(&run(&["plots", "--config", plan.to_str().unwrap()])), 2);
}

#[test]
fn synthetic_files_ingest_through_the_data_dir() {
    let tmp = TempDir::new().unwrap();
    let data = tmp.path().join("data");
    synth(&data.join("bal"), "Baltimore", 2019, 40);
    let plans = tmp.path().join("plans");
    fs::create_dir_all(&plans).unwrap();
    let p = write_plan(&plans, &json!({"datasets": [{"city": "Baltimore", "year": 2019, "source": files_source("bal")}]}));
    let out_dir = tmp.path().join("out");

    // relative paths resolve against the plan directory by default, so this fails
    let out = run(&["ingest", "--config", p.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 2);

    let out = bin()
        .args(["ingest", "--config", p.to_str().unwrap(), "--out", out_dir.to_str().unwrap()])
        .env("PATROLSIM_DATA_DIR", &data)
        .output()
        .unwrap();
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let mut r = csv::Reader::from_path(out_dir.join("ingest.csv")).unwrap();
    let headers = r.headers().unwrap().clone();
    let row = r.records().next().unwrap().unwrap();
    let get = |name: &str| row.get(headers.iter().position(|h| h == name).unwrap()).unwrap().to_string();
    assert_eq!(get("city"), "Baltimore");
    assert_eq!(get("kept"), "440");
    assert_eq!(csv_rows(&out_dir.join("ingest_months.csv")), 11);
}

#[test]
fn grid_writes_reports_checkpoints_plots_and_manifest() {
    let tmp = TempDir::new().unwrap();
    synth(&tmp.path().join("bal"), "Baltimore", 2019, 30);
    let plan = json!({
        "seed": 3,
        "months": [2, 3, 4],
        "train": {"epochs": 2},
        "artifacts": {"checkpoints": true, "outcomes": true, "losses": true},
        "datasets": [{"city": "Baltimore", "year": 2019, "source": files_source("bal")}],
        "cells": [
            {"city": "Baltimore", "year": 2019, "mode": "detected"},
            {"city": "Baltimore", "year": 2019, "mode": "reported"}
        ]
    });
    let p = write_plan(tmp.path(), &plan);
    let out_dir = tmp.path().join("out");
    let out = run(&["all", "--config", p.to_str().unwrap(), "--out", out_dir.to_str().unwrap(), "--jobs", "2"]);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));

    assert_eq!(csv_rows(&out_dir.join("monthly.csv")), 6);
    assert_eq!(csv_rows(&out_dir.join("annual.csv")), 2);
    assert_eq!(csv_rows(&out_dir.join("regression.csv")), 4);
    assert_eq!(csv_rows(&out_dir.join("correlations.csv")), 4);

    let runs = out_dir.join("runs");
    assert_eq!(csv_rows(&runs.join("baltimore-2019-detected/m02-r0-losses.csv")), 2);
    assert!(runs.join("baltimore-2019-reported/m04-r0-outcomes.json").is_file());
    assert!(!runs.join("baltimore-2019-reported/m02-r0-gan.json").exists());
    let ckpt = runs.join("baltimore-2019-detected/m03-r0-gan.json");
    let model = checkpoint::load(&ckpt).unwrap();
    assert_eq!(checkpoint::to_json(&model), fs::read_to_string(&ckpt).unwrap());

    for name in ["dir", "parity_gap", "gini", "scatter_pct_black", "scatter_pct_white"] {
        let text = fs::read_to_string(out_dir.join("plots").join(format!("{name}.svg"))).unwrap();
        let doc = roxmltree::Document::parse(&text).unwrap_or_else(|e| panic!("{name}.svg: {e}"));
        assert_eq!(doc.root_element().tag_name().name(), "svg");
    }

    let manifest: Value = serde_json::from_slice(&fs::read(out_dir.join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["seed"], 3);
    assert_eq!(manifest["runs"].as_array().unwrap().len(), 6);
    assert_eq!(manifest["plan_sha256"], sha256_hex(&fs::read(&p).unwrap()));
    let outputs = manifest["outputs"].as_array().unwrap();
    let monthly = outputs.iter().find(|o| o["file"] == "monthly.csv").expect("monthly.csv listed");
    assert_eq!(monthly["sha256"], sha256_hex(&fs::read(out_dir.join("monthly.csv")).unwrap()));
    assert!(manifest["failures"].as_array().unwrap().is_empty());

    // stats and plots on their own reuse the grid outputs
    fs::remove_dir_all(out_dir.join("plots")).unwrap();
    let regression = fs::read(out_dir.join("regression.csv")).unwrap();
    for sub in ["stats", "plots"] {
        let out = run(&[sub, "--config", p.to_str().unwrap(), "--out", out_dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "{sub}: {}", String::from_utf8_lossy(&out.stderr));
    }
    assert_eq!(fs::read(out_dir.join("regression.csv")).unwrap(), regression);
    assert!(out_dir.join("plots/scatter_pct_white.svg").is_file());

    // a different seed changes the draws
    let other = tmp.path().join("other");
    let out = run(&["grid", "--config", p.to_str().unwrap(), "--out", other.to_str().unwrap(), "--seed", "4"]);
    assert_eq!(code(&out), 0);
    assert_ne!(fs::read(other.join("monthly.csv")).unwrap(), fs::read(out_dir.join("monthly.csv")).unwrap());
}

#[test]
fn checkpoint_round_trip_samples_identically() {
    let bbox = BoundingBox::BALTIMORE;
    let points: Vec<_> = (0..80).map(|i| bbox.center().offset_feet((i % 9) as f64 * 300.0, (i % 7) as f64 * -250.0)).collect();
    let (model, _) = train_gan(&points, &TrainConfig { epochs: 3, seed: 6, ..TrainConfig::default() }, &bbox).unwrap();
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("gan.json");
    checkpoint::save(&model, &path).unwrap();
    let loaded = checkpoint::load(&path).unwrap();
    assert_eq!(sample_patrol(&model, 60, &mut rng_from(2)).unwrap(), sample_patrol(&loaded, 60, &mut rng_from(2)).unwrap());

    let mut doc: Value = serde_json::from_str(&fs::read_to_string(&path).unwrap()).unwrap();
    doc["version"] = json!(99);
    assert!(checkpoint::from_json(&doc.to_string()).is_err());
}
