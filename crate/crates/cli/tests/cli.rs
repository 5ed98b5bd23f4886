use std::path::Path;
use std::process::{Command, Output};

use onespike::data::load_spikes;

fn onespike(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_onespike")).args(args).output().expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn gen_synth_writes_requested_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("s.snnt");
    let o = onespike(&["gen", "synth", "--b", "4", "--n", "10", "--t", "32", "--rate", "0..200", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ds = load_spikes(&out).unwrap();
    assert_eq!((ds.samples(), ds.meta.inputs, ds.meta.steps), (4, 10, 32));
}

#[test]
fn gen_train_eval_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let (train, test) = (dir.path().join("train.snnt"), dir.path().join("test.snnt"));
    for (path, n, seed) in [(&train, "96", "1"), (&test, "48", "2")] {
        let o = onespike(&["gen", "yinyang", "--n", n, "--seed", seed, "--out", s(path), "--t", "30"]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    }
    let ckpt_dir = dir.path().join("run");
    let cfg = serde_json::json!({
        "dataset": {"kind": "snnt", "train": train, "test": test},
        "layers": [12, 3], "T": 30, "epochs": 2, "batch": 32, "seed": 5,
        "checkpoint_dir": ckpt_dir,
    });
    let cfg_path = dir.path().join("run.json");
    std::fs::write(&cfg_path, cfg.to_string()).unwrap();
    let o = onespike(&["train", "--config", s(&cfg_path)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert_eq!(String::from_utf8_lossy(&o.stderr).matches("epoch").count(), 2);

    let ckpt = ckpt_dir.join("model.snnc");
    let o = onespike(&["eval", "--ckpt", s(&ckpt), "--data", s(&test)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let m: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(m["samples"], 48);
    let acc = m["accuracy"].as_f64().unwrap();
    assert!((0.0..=1.0).contains(&acc));
}

#[test]
fn bench_prints_csv_with_one_speedup_per_point() {
    let o = onespike(&[
        "bench", "--units", "8", "--steps", "16,32", "--batch", "4", "--layers", "1", "--models", "fast,seq-single", "--reps", "3",
        "--warmup", "1",
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = String::from_utf8(o.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "model,n,t,b,layers,fwd_ms,bwd_ms,total_ms,mad_ms,speedup_vs_seq");
    assert_eq!(lines.len(), 5);
    let with_speedup = lines[1..].iter().filter(|l| !l.ends_with(',')).count();
    assert_eq!(with_speedup, 2);
}

#[test]
fn bench_json_output_and_fixed_beta_ids() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("b.json");
    let o = onespike(&[
        "bench", "--units", "6", "--steps", "8", "--batch", "2", "--reps", "3", "--warmup", "1", "--fixed-beta", "both", "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = onespike::bench::read_report_json(&out).unwrap();
    let ids: Vec<&str> = report.records.iter().map(|r| r.model.as_str()).collect();
    assert!(ids.contains(&"fast-single+fixed-beta"), "{ids:?}");
    assert_eq!(report.records.len(), 4);
}

#[test]
fn config_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"dataset": {"kind": "yin-yang"}, "layers": [], "T": 10, "epochs": 1}"#).unwrap();
    assert_eq!(onespike(&["train", "--config", s(&bad)]).status.code(), Some(2));
    assert_eq!(onespike(&["train", "--config", s(&dir.path().join("missing.json"))]).status.code(), Some(2));
    assert_eq!(onespike(&["bench", "--reps", "1"]).status.code(), Some(2));
    assert_eq!(onespike(&["bench", "--models", "gpu"]).status.code(), Some(2));
    let out = dir.path().join("x.snnt");
    assert_eq!(
        onespike(&["gen", "synth", "--b", "1", "--n", "1", "--t", "4", "--rate", "0..5000", "--out", s(&out)]).status.code(),
        Some(2)
    );
    assert_eq!(onespike(&["gen", "synth", "--b", "1"]).status.code(), Some(2));
}

#[test]
fn data_errors_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let junk = dir.path().join("junk.snnt");
    std::fs::write(&junk, b"not a spike file").unwrap();
    let o = onespike(&["eval", "--ckpt", s(&junk), "--data", s(&junk)]);
    assert_eq!(o.status.code(), Some(3));
    let o = onespike(&[
        "encode", "ttfs", "--idx", s(&junk), "--labels", s(&junk), "--t", "10", "--out", s(&dir.path().join("o.snnt")),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn encode_ttfs_from_idx_files() {
    let dir = tempfile::tempdir().unwrap();
    // two 2x2 images
    let mut img = vec![0, 0, 8, 3, 0, 0, 0, 2, 0, 0, 0, 2, 0, 0, 0, 2];
    img.extend([255, 0, 128, 0, 0, 0, 0, 255]);
    let lab = vec![0, 0, 8, 1, 0, 0, 0, 2, 7, 3];
    let (ip, lp) = (dir.path().join("img"), dir.path().join("lab"));
    std::fs::write(&ip, img).unwrap();
    std::fs::write(&lp, lab).unwrap();
    let out = dir.path().join("m.snnt");
    let o = onespike(&["encode", "ttfs", "--idx", s(&ip), "--labels", s(&lp), "--t", "10", "--out", s(&out)]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let ds = load_spikes(&out).unwrap();
    assert_eq!((ds.samples(), ds.meta.inputs, ds.meta.steps, ds.meta.classes), (2, 4, 10, 8));
    let x = ds.spikes::<f32>();
    // full intensity fires at t=0, zero never fires
    assert_eq!(x.row(0, 0)[0], 1.0);
    assert_eq!(x.row(0, 1).iter().sum::<f32>(), 0.0);
    assert_eq!(x.row(1, 3)[0], 1.0);
}
