//! End-to-end runs of the `sno` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use sno_core::datagen::read_dataset;

fn sno(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sno")).args(args).env_remove("SNO_THREADS").output().expect("spawn sno")
}

fn ok(args: &[&str]) -> Output {
    let out = sno(args);
    assert!(out.status.success(), "{args:?} failed:\n{}", String::from_utf8_lossy(&out.stderr));
    out
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exit code")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

const SPEC: &str = "task = \"diffusion\"\nsamples = 10\nresolution = 32\nspace_points = 32\nseed = 3\n";

fn gen(dir: &Path, name: &str, spec: &str) -> PathBuf {
    let spec_path = dir.join(format!("{name}.toml"));
    fs::write(&spec_path, spec).unwrap();
    let data = dir.join(format!("{name}.snod"));
    ok(&["gen", "--config", s(&spec_path), "--out", s(&data)]);
    data
}

fn train(dir: &Path, data: &Path, epochs: usize) -> PathBuf {
    let cfg = dir.join("run.toml");
    fs::write(
        &cfg,
        format!("dataset = {:?}\nbatch_size = 4\n[model]\nwidth = 4\nn_layers = 2\ndegree = 4\n", s(data)),
    )
    .unwrap();
    let out = dir.join("run");
    ok(&["train", "--config", s(&cfg), "--out", s(&out), "--epochs", &epochs.to_string(), "--seed", "5"]);
    out
}

fn csv_rows(text: &str) -> Vec<Vec<f64>> {
    text.lines().skip(1).map(|l| l.split(',').map(|v| v.parse().unwrap()).collect()).collect()
}

#[test]
fn help_documents_the_exit_codes() {
    for args in [&["--help"][..], &["gen", "--help"], &["train", "--help"]] {
        let text = String::from_utf8(ok(args).stdout).unwrap();
        assert!(text.contains("Exit codes:"), "{args:?}");
        for c in ["  2  configuration", "  3  numerical", "  4  format"] {
            assert!(text.contains(c), "{args:?} lacks {c}");
        }
    }
}

#[test]
fn gen_writes_declared_shapes_deterministically() {
    let dir = tempfile::tempdir().unwrap();
    let a = gen(dir.path(), "a", SPEC);
    let b = gen(dir.path(), "b", SPEC);
    assert_eq!(fs::read(&a).unwrap(), fs::read(&b).unwrap());
    let ds = read_dataset(&a).unwrap();
    assert_eq!(ds.inputs.shape(), &[10, 33, 32]);
    assert_eq!(ds.outputs.shape(), &[10, 32, 32]);
    let manifest: toml::Table = toml::from_str(&fs::read_to_string(dir.path().join("a.snod.manifest.toml")).unwrap()).unwrap();
    assert_eq!(manifest["command"].as_str(), Some("gen"));
    assert_eq!(manifest["seed"].as_integer(), Some(3));
    assert_eq!(manifest["resolved"]["samples"].as_integer(), Some(10));
}

#[test]
fn gen_flags_override_the_spec_file() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.toml");
    fs::write(&spec, SPEC).unwrap();
    let before = fs::read(&spec).unwrap();
    let out = dir.path().join("d.snod");
    ok(&["gen", "--config", s(&spec), "--out", s(&out), "--seed", "9", "--resolution", "40"]);
    let ds = read_dataset(&out).unwrap();
    assert_eq!(ds.spec.seed, 9);
    assert_eq!(ds.grid.len(), 40);
    assert_eq!(fs::read(&spec).unwrap(), before, "inputs are never modified");
}

#[test]
fn malformed_spec_exits_2_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("bad.toml");
    let out = dir.path().join("d.snod");
    for text in ["task = \"heat\"\nsamples = 3\nresolution = 32\n", "task = \"diffusion\"\nsamples = 3\n", "not toml ["] {
        fs::write(&spec, text).unwrap();
        let r = sno(&["gen", "--config", s(&spec), "--out", s(&out)]);
        assert_eq!(code(&r), 2, "{text:?}: {}", String::from_utf8_lossy(&r.stderr));
        assert!(!out.exists());
    }
    let r = sno(&["gen", "--config", s(&dir.path().join("missing.toml")), "--out", s(&out)]);
    assert_eq!(code(&r), 2);
    assert_eq!(fs::read_dir(dir.path()).unwrap().count(), 1, "only the spec file remains");
}

#[test]
fn solver_failure_exits_3_naming_the_sample() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.toml");
    // a strong initial field makes the explicit advection step unstable
    fs::write(
        &spec,
        "task = \"burgers\"\nsamples = 4\nresolution = 32\nspace_points = 32\n[params]\namplitude = 50.0\nviscosity = 7.0\nsubsteps = 1\n",
    )
    .unwrap();
    let out = dir.path().join("d.snod");
    let r = sno(&["gen", "--config", s(&spec), "--out", s(&out)]);
    assert_eq!(code(&r), 3, "{}", String::from_utf8_lossy(&r.stderr));
    assert!(String::from_utf8_lossy(&r.stderr).contains("sample"));
    assert!(!out.exists());
}

#[test]
fn train_one_epoch_writes_checkpoint_and_curve() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d", SPEC);
    let run = train(dir.path(), &data, 1);
    assert!(run.join("model.ckpt").exists());
    assert!(run.join("model.ckpt.toml").exists());
    let csv = fs::read_to_string(run.join("train.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("epoch,train_loss,test_rel_l2,seconds"));
    assert_eq!(csv.lines().count(), 2);
    let manifest = fs::read_to_string(run.join("manifest.toml")).unwrap();
    assert!(manifest.contains("dataset"));
    assert!(manifest.contains("in_channels = 33"));
}

#[test]
fn train_rejects_bad_configs() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d", SPEC);
    let cfg = dir.path().join("run.toml");
    let out = dir.path().join("run");
    for (text, expect) in [
        (format!("dataset = {:?}\nlr = -1.0\n", s(&data)), 2),
        (format!("dataset = {:?}\nlearning_rate = 0.1\n", s(&data)), 2),
        ("dataset = \"nowhere.snod\"\n".to_string(), 4),
        (format!("dataset = {:?}\n[model]\nin_channels = 2\n", s(&data)), 4),
    ] {
        fs::write(&cfg, &text).unwrap();
        let r = sno(&["train", "--config", s(&cfg), "--out", s(&out), "--epochs", "1"]);
        assert_eq!(code(&r), expect, "{text}: {}", String::from_utf8_lossy(&r.stderr));
    }
    fs::write(&cfg, format!("dataset = {:?}\n", s(&data))).unwrap();
    let r = sno(&["train", "--config", s(&cfg), "--out", s(&out), "--lr", "0"]);
    assert_eq!(code(&r), 2);
}

#[test]
fn eval_and_superres_agree_at_the_base_resolution() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d", SPEC);
    let run = train(dir.path(), &data, 2);
    let model = run.join("model.ckpt");
    let ev = dir.path().join("eval");
    ok(&["eval", "--model", s(&model), "--data", s(&data), "--out", s(&ev)]);
    let rows = csv_rows(&fs::read_to_string(ev.join("eval.csv")).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!(rows.iter().map(|r| r[0]).collect::<Vec<_>>(), vec![8.0, 9.0]);
    let summary: toml::Table = toml::from_str(&fs::read_to_string(ev.join("summary.toml")).unwrap()).unwrap();
    let mean = summary["mean_rel_l2"].as_float().unwrap();
    assert!((mean - (rows[0][1] + rows[1][1]) / 2.0).abs() <= 1e-15 * mean);
    assert_eq!(fs::metadata(ev.join("worst_error.f64")).unwrap().len(), 8 * 32 * 32);

    let sr = dir.path().join("sr");
    ok(&["superres", "--model", s(&model), "--data", s(&data), "--resolution", "32", "--eval", "32", "--out", s(&sr)]);
    let rows = csv_rows(&fs::read_to_string(sr.join("superres.csv")).unwrap());
    assert_eq!(rows[0][0], 32.0);
    assert_eq!(rows[0][1], mean);
}

#[test]
fn eval_with_mismatched_channels_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d", SPEC);
    let run = train(dir.path(), &data, 1);
    let other = gen(dir.path(), "o", &SPEC.replace("space_points = 32", "space_points = 40"));
    let r = sno(&["eval", "--model", s(&run.join("model.ckpt")), "--data", s(&other), "--out", s(&dir.path().join("e"))]);
    assert_eq!(code(&r), 4);
    let err = String::from_utf8_lossy(&r.stderr);
    assert!(err.contains("shape mismatch") && err.contains("41"), "{err}");
}

#[test]
fn corrupt_checkpoint_exits_4() {
    let dir = tempfile::tempdir().unwrap();
    let data = gen(dir.path(), "d", SPEC);
    let run = train(dir.path(), &data, 1);
    let model = run.join("model.ckpt");
    let bytes = fs::read(&model).unwrap();
    fs::write(&model, &bytes[..bytes.len() / 2]).unwrap();
    let r = sno(&["eval", "--model", s(&model), "--data", s(&data), "--out", s(&dir.path().join("e"))]);
    assert_eq!(code(&r), 4);
}

fn transform(dir: &Path, csv: &str, degree: usize) -> (Vec<Vec<f64>>, toml::Table) {
    let input = dir.join("signal.csv");
    fs::write(&input, csv).unwrap();
    let out = dir.join("tr");
    ok(&["transform", s(&input), "--degree", &degree.to_string(), "--out", s(&out)]);
    let rows = csv_rows(&fs::read_to_string(out.join("transform.csv")).unwrap());
    let summary = toml::from_str(&fs::read_to_string(out.join("summary.toml")).unwrap()).unwrap();
    (rows, summary)
}

#[test]
fn transform_of_ones_is_the_constant_mode() {
    let dir = tempfile::tempdir().unwrap();
    let (rows, summary) = transform(dir.path(), &"1\n".repeat(20), 4);
    assert_eq!(rows.len(), 5);
    for (k, r) in rows.iter().enumerate() {
        let want = if k == 0 { 1.0 } else { 0.0 };
        assert!((r[1] - want).abs() < 1e-12 && (r[2] - want).abs() < 1e-12, "{r:?}");
    }
    assert!(summary["max_residual"].as_float().unwrap() < 1e-12);
}

#[test]
fn transform_of_a_ramp_uses_the_normalized_domain() {
    let dir = tempfile::tempdir().unwrap();
    let csv: String = (0..=10).map(|i| format!("{},{}\n", i as f64 / 10.0, i as f64 / 10.0)).collect();
    let (rows, _) = transform(dir.path(), &format!("t,f\n{csv}"), 1);
    // t = (z + 1) / 2
    for r in &rows {
        assert!((r[1] - 0.5).abs() < 1e-12 && (r[2] - 0.5).abs() < 1e-12, "{r:?}");
    }
}

#[test]
fn transform_of_a_square_doubles_the_quadratic_mode() {
    let dir = tempfile::tempdir().unwrap();
    let csv: String = (0..=16).map(|i| {
        let t = i as f64 / 16.0;
        format!("{t},{}\n", t * t)
    }).collect();
    let (rows, summary) = transform(dir.path(), &csv, 3);
    assert!((rows[2][1] - 0.25).abs() < 1e-12);
    assert!((rows[2][2] - 2.0 * rows[2][1]).abs() < 1e-12);
    assert!(rows[3][1].abs() < 1e-12);
    assert!(summary["max_residual"].as_float().unwrap() < 1e-12);
}

#[test]
fn transform_rejects_non_numeric_rows() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("bad.csv");
    fs::write(&input, "1\n2\nthree\n4\n").unwrap();
    let r = sno(&["transform", s(&input), "--degree", "1"]);
    assert_eq!(code(&r), 2);
    assert!(String::from_utf8_lossy(&r.stderr).contains("row 3"));
}

#[test]
fn thread_count_validation_and_environment_fallback() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("s.toml");
    fs::write(&spec, SPEC).unwrap();
    let out = dir.path().join("d.snod");
    let r = sno(&["gen", "--config", s(&spec), "--out", s(&out), "--threads", "0"]);
    assert_eq!(code(&r), 2);
    let r = Command::new(env!("CARGO_BIN_EXE_sno"))
        .args(["gen", "--config", s(&spec), "--out", s(&out)])
        .env("SNO_THREADS", "2")
        .output()
        .unwrap();
    assert!(r.status.success());
    let single = dir.path().join("one.snod");
    ok(&["gen", "--config", s(&spec), "--out", s(&single), "--threads", "1"]);
    assert_eq!(fs::read(&out).unwrap(), fs::read(&single).unwrap());
    let r = Command::new(env!("CARGO_BIN_EXE_sno"))
        .args(["gen", "--config", s(&spec), "--out", s(&out)])
        .env("SNO_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(code(&r), 2);
}

#[test]
fn bench_reports_every_size() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b");
    ok(&["bench", "--sizes", "4096,8192", "--degree", "4", "--methods", "poly-fit,fft", "--out", s(&out)]);
    let csv = fs::read_to_string(out.join("bench.csv")).unwrap();
    assert_eq!(csv.lines().next(), Some("method,n,median_s,p10_s,p90_s"));
    assert_eq!(csv.lines().count(), 5);
    let summary: toml::Table = toml::from_str(&fs::read_to_string(out.join("summary.toml")).unwrap()).unwrap();
    assert!(summary["fft"]["slope"].as_float().unwrap().is_finite());
    let r = sno(&["bench", "--sizes", "1000,2048", "--out", s(&out)]);
    assert_eq!(code(&r), 2);
    let r = sno(&["bench", "--methods", "svd", "--out", s(&out)]);
    assert_eq!(code(&r), 2);
}
