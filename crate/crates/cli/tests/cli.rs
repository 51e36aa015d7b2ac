use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn drp(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_drp")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

fn manifest(dir: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(dir.join("manifest.json")).unwrap()).unwrap()
}

/// Replays `dir/manifest.json` into a fresh directory and compares every output byte for byte.
fn assert_replays(dir: &Path) {
    let m = manifest(dir);
    let again = dir.with_extension("replay");
    let o = drp(&["replay", dir.join("manifest.json").to_str().unwrap(), "--out-dir", again.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let outputs = m["outputs"].as_array().unwrap();
    assert!(!outputs.is_empty());
    for name in outputs {
        let name = name.as_str().unwrap();
        assert_eq!(fs::read(dir.join(name)).unwrap(), fs::read(again.join(name)).unwrap(), "{name}");
    }
    assert_eq!(manifest(&again)["parameters"], m["parameters"]);
}

#[test]
fn optimize_prints_the_optimum() {
    let o = drp(&["optimize", "--derivative", "second", "--extent", "3", "--order", "4"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.contains("offset,coefficient"));
    let rows: Vec<&str> = text.lines().filter(|l| !l.starts_with('#')).skip(1).collect();
    assert_eq!(rows.len(), 7);
    let centre: f64 = rows[3].split(',').nth(1).unwrap().parse().unwrap();
    assert!((centre + 2.8147288822139425).abs() < 1e-12);
}

#[test]
fn optimize_json_and_staggered() {
    let o = drp(&["optimize", "--derivative", "first", "--kind", "a", "--extent", "3", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v: Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["grid_kind"], "staggered_forward");
    assert_eq!(v["offsets"], serde_json::json!([-2, -1, 0, 1, 2, 3]));
}

#[test]
fn dispersion_emits_four_columns() {
    let o = drp(&["dispersion", "--method", "conventional", "--extent", "1", "--samples", "9"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let header = text.lines().find(|l| !l.starts_with('#')).unwrap();
    assert_eq!(header, "kappa,symbol,ideal,misfit");
    assert_eq!(text.lines().filter(|l| !l.starts_with('#')).count(), 10);
}

#[test]
fn resolution_is_one_json_line() {
    let o = drp(&["resolution", "--method", "conventional", "--extent", "3"]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert_eq!(text.lines().count(), 1);
    let v: Value = serde_json::from_str(&text).unwrap();
    assert_eq!(v["stencil"], "conventional6");
    assert!((v["lambda_min_in_dx"].as_f64().unwrap() - 4.48).abs() < 0.01);
}

#[test]
fn usage_errors_exit_with_one() {
    assert_eq!(drp(&["bogus"]).status.code(), Some(1));
    assert_eq!(drp(&["optimize", "--nonsense"]).status.code(), Some(1));
    assert_eq!(drp(&["figure", "fig99"]).status.code(), Some(1));
    assert_eq!(drp(&["optimize", "--extent", "1", "--order", "2"]).status.code(), Some(1));

    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    fs::write(&bad, "{ \"n_cells\": 10,").unwrap();
    let o = drp(&["acoustic1d", "--config", bad.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("bad.json"));

    fs::write(&bad, "{ \"n_cels\": 10 }").unwrap();
    let o = drp(&["acoustic1d", "--config", bad.to_str().unwrap(), "--out-dir", dir.path().to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn blowup_exits_with_two() {
    let dir = tempfile::tempdir().unwrap();
    let o = drp(&[
        "acoustic1d",
        "--scheme",
        "conventional6",
        "--courant",
        "1",
        "--out-dir",
        dir.path().to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("instability"));
}

#[test]
fn flags_override_config_file_over_defaults() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("c.json");
    fs::write(&config, r#"{ "n_cells": 120, "t_end": 2.0, "scheme": "conventional4" }"#).unwrap();
    let out = dir.path().join("run");
    let o = drp(&[
        "acoustic1d",
        "--config",
        config.to_str().unwrap(),
        "--n-cells",
        "80",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let p = &manifest(&out)["parameters"]["config"];
    assert_eq!(p["n_cells"], 80);
    assert_eq!(p["scheme"], "conventional4");
    assert_eq!(p["t_end"], 2.0);
    assert_eq!(p["courant"], 0.2);
    assert_eq!(p["series_terms"], 100);
}

#[test]
fn acoustic_outputs_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("run");
    let o = drp(&[
        "acoustic1d",
        "--n-cells",
        "100",
        "--t-end",
        "2",
        "--snapshot-times",
        "0.5,2",
        "--out-dir",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", stderr(&o));
    let errors = fs::read_to_string(out.join("errors.csv")).unwrap();
    assert!(errors.contains("t,error\n"));
    assert_eq!(errors.lines().filter(|l| !l.starts_with('#')).count(), 12);
    let snap = fs::read_to_string(out.join("snapshot_t0.5.csv")).unwrap();
    assert!(snap.contains("x,u_numeric,u_analytic\n"));
    assert!(out.join("snapshot_t2.csv").exists());
    assert_replays(&out);
}

#[test]
fn sweep_and_dispersion_replay() {
    let dir = tempfile::tempdir().unwrap();
    let sweep = dir.path().join("sweep");
    let o = drp(&["sweep", "--cells", "80,100", "--t-end", "1", "--out-dir", sweep.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let text = fs::read_to_string(sweep.join("sweep.csv")).unwrap();
    assert!(text.starts_with("dx,scheme,final_error,pct_timesteps_better\n"));
    assert_eq!(text.lines().count(), 5);
    assert_replays(&sweep);

    let disp = dir.path().join("disp");
    let o = drp(&["dispersion", "--out-dir", disp.to_str().unwrap()]);
    assert!(o.status.success());
    assert_replays(&disp);
}

#[test]
fn elastic_diff_and_replay() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("model.json");
    fs::write(
        &config,
        r#"{
            "width": 400, "depth": 400,
            "layers": [
                { "thickness": 200, "vp": 1400, "vs": 0, "rho": 1000 },
                { "thickness": 200, "vp": 4000, "vs": 2400, "rho": 2600 }
            ],
            "t_end": 0.05, "snapshot_interval": 0.025,
            "source": { "z": 150 }
        }"#,
    )
    .unwrap();
    let c = config.to_str().unwrap();
    let conv = dir.path().join("conv");
    let opt = dir.path().join("opt");
    for (scheme, out) in [("conventional", &conv), ("optimized", &opt)] {
        let o = drp(&["elastic2d", "--config", c, "--scheme", scheme, "--out-dir", out.to_str().unwrap()]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let names: Vec<String> = manifest(&opt)["outputs"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_str().unwrap().to_string())
        .collect();
    assert_eq!(names.len(), 15);
    assert!(names.contains(&"txz_t50.csv".to_string()));
    let first = fs::read_to_string(opt.join("vx_t25.csv")).unwrap();
    assert!(first.starts_with("# nx=40,nz=41,dx=10,dz=10,t=0.025,field=vx\n"));
    assert_replays(&opt);

    let diff = dir.path().join("diff");
    let o = drp(&["diff", conv.to_str().unwrap(), opt.to_str().unwrap(), "--out-dir", diff.to_str().unwrap()]);
    assert!(o.status.success(), "{}", stderr(&o));
    let summary: Value = serde_json::from_str(&fs::read_to_string(diff.join("summary.json")).unwrap()).unwrap();
    for field in ["vx", "vz", "txx", "tzz", "txz"] {
        let m = summary["max_by_field"][field].as_f64().unwrap();
        assert!((0.0..=2.0).contains(&m), "{field}: {m}");
    }
    assert!(diff.join("tzz_t50.csv").exists());
    assert_replays(&diff);

    let empty = dir.path().join("empty");
    fs::create_dir(&empty).unwrap();
    let o = drp(&["diff", empty.to_str().unwrap(), opt.to_str().unwrap(), "--out-dir", diff.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn figure_one_replays() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fig1");
    let o = drp(&["figure", "fig1", "--out-dir", out.to_str().unwrap()]);
    assert!(o.status.success());
    let text = fs::read_to_string(out.join("fig1.csv")).unwrap();
    assert!(text.starts_with("kappa,ideal,optimized\n"));
    assert_eq!(manifest(&out)["parameters"]["id"], "fig1");
    assert_replays(&out);
}
