//! End-to-end tests of the `vocoder` binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use vocoder_cli::fmtx::{read_fmtx, FMTX_COLS};
use vocoder_core::dsp::LpcCoeffs;
use vocoder_core::features::{write_feature_dump, FrameFeatures};
use vocoder_core::FRAME_SIZE;

fn bin() -> &'static str {
    env!("CARGO_BIN_EXE_vocoder")
}

fn run(args: &[&str]) -> Output {
    Command::new(bin())
        .args(args)
        .output()
        .expect("binary runs")
}

fn assert_ok(out: &Output) {
    assert!(
        out.status.success(),
        "exit {:?}\nstdout: {}\nstderr: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr)
    );
}

fn write_test_dump(path: &Path, frames: usize) {
    let mut a = [0.0f32; 16];
    a[0] = 0.5;
    let lpc = LpcCoeffs::new(a).unwrap();
    let records: Vec<FrameFeatures<f32>> = (0..frames)
        .map(|i| {
            let decoded: Vec<f32> = (0..FRAME_SIZE)
                .map(|t| 0.3 * ((i * FRAME_SIZE + t) as f32 * 0.06).sin())
                .collect();
            FrameFeatures::new(lpc, [0.15; 5], 120.0 + i as f32, decoded).unwrap()
        })
        .collect();
    let mut buf = Vec::new();
    write_feature_dump(&records, &mut buf).unwrap();
    std::fs::write(path, &buf).unwrap();
}

fn make_model(dir: &Path, name: &str, seed: u64) -> PathBuf {
    let path = dir.join(name);
    let out = run(&[
        "make-test-model",
        path.to_str().unwrap(),
        "--seed",
        &seed.to_string(),
        "--config",
        "small",
    ]);
    assert_ok(&out);
    path
}

#[test]
fn make_test_model_is_seed_deterministic() {
    let dir = tempfile::tempdir().unwrap();
    let a = make_model(dir.path(), "a.lpnw", 3);
    let b = make_model(dir.path(), "b.lpnw", 3);
    let c = make_model(dir.path(), "c.lpnw", 4);
    assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
    assert_ne!(std::fs::read(&a).unwrap(), std::fs::read(&c).unwrap());
}

#[test]
fn make_test_model_rejects_bad_width() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.lpnw");
    for n_a in ["0", "20"] {
        let out = run(&[
            "make-test-model",
            path.to_str().unwrap(),
            "--n-a",
            n_a,
        ]);
        assert_eq!(out.status.code(), Some(2), "n_a={n_a}");
        assert!(!path.exists());
    }
}

#[test]
fn model_info_reports_shapes_and_checksum() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path(), "m.lpnw", 0);
    let out = run(&["model-info", model.to_str().unwrap()]);
    assert_ok(&out);
    let text = String::from_utf8_lossy(&out.stdout).into_owned();
    for needle in [
        "densities: W_h=0.200 W_u=0.050 W_r=0.050 (mean 0.100)",
        "sample-rate weights:",
        "checksum: 0x",
        "GRU_A W_h",
    ] {
        assert!(text.contains(needle), "missing {needle:?} in:\n{text}");
    }
}

#[test]
fn model_info_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path(), "t.lpnw", 0);
    let mut bytes = std::fs::read(&model).unwrap();
    let mid = bytes.len() / 2;
    bytes[mid] ^= 0x01;
    std::fs::write(&model, &bytes).unwrap();
    let out = run(&["model-info", model.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("checksum"));
}

#[test]
fn features_produces_54_column_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("in.opnv");
    let matrix = dir.path().join("out.fmtx");
    write_test_dump(&dump, 100);
    let out = run(&[
        "features",
        dump.to_str().unwrap(),
        matrix.to_str().unwrap(),
        "--json-summary",
    ]);
    assert_ok(&out);
    let rows = read_fmtx(&matrix).unwrap();
    assert_eq!(rows.len(), 100);
    assert!(rows.iter().all(|r| r.len() == FMTX_COLS));

    let summary: serde_json::Value =
        serde_json::from_slice(&out.stdout).expect("summary is JSON");
    assert_eq!(summary["frames"], 100);
    assert_eq!(summary["cols"], 54);
    assert_eq!(summary["mean"].as_array().unwrap().len(), 54);
}

#[test]
fn features_accepts_empty_dump() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("empty.opnv");
    let matrix = dir.path().join("empty.fmtx");
    write_test_dump(&dump, 0);
    let out = run(&["features", dump.to_str().unwrap(), matrix.to_str().unwrap()]);
    assert_ok(&out);
    assert_eq!(read_fmtx(&matrix).unwrap().len(), 0);
}

#[test]
fn features_rejects_corrupt_magic() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("bad.opnv");
    let matrix = dir.path().join("bad.fmtx");
    write_test_dump(&dump, 3);
    let mut bytes = std::fs::read(&dump).unwrap();
    bytes[0] = b'X';
    std::fs::write(&dump, &bytes).unwrap();
    let out = run(&["features", dump.to_str().unwrap(), matrix.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("OPNV"));
    assert!(!matrix.exists());
}

#[test]
fn synth_writes_deterministic_wav() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("in.opnv");
    let matrix = dir.path().join("f.fmtx");
    write_test_dump(&dump, 10);
    assert_ok(&run(&["features", dump.to_str().unwrap(), matrix.to_str().unwrap()]));
    let model = make_model(dir.path(), "m.lpnw", 1);

    let wav_a = dir.path().join("a.wav");
    let wav_b = dir.path().join("b.wav");
    let wav_c = dir.path().join("c.wav");
    for (path, seed) in [(&wav_a, "5"), (&wav_b, "5"), (&wav_c, "6")] {
        assert_ok(&run(&[
            "synth",
            matrix.to_str().unwrap(),
            model.to_str().unwrap(),
            path.to_str().unwrap(),
            "--seed",
            seed,
        ]));
    }
    let a = std::fs::read(&wav_a).unwrap();
    assert_eq!(a, std::fs::read(&wav_b).unwrap());
    assert_ne!(a, std::fs::read(&wav_c).unwrap());

    let samples = vocoder_cli::wav::read_wav(&wav_a).unwrap();
    assert_eq!(samples.len(), 10 * FRAME_SIZE);
    assert!(samples.iter().all(|s| s.is_finite() && (-1.0..=1.0).contains(s)));
}

#[test]
fn synth_missing_model_leaves_no_output() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("in.opnv");
    let matrix = dir.path().join("f.fmtx");
    write_test_dump(&dump, 2);
    assert_ok(&run(&["features", dump.to_str().unwrap(), matrix.to_str().unwrap()]));
    let wav = dir.path().join("out.wav");
    let out = run(&[
        "synth",
        matrix.to_str().unwrap(),
        dir.path().join("nonexistent.lpnw").to_str().unwrap(),
        wav.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(1));
    assert!(!wav.exists());
}

#[test]
fn bench_reports_json() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path(), "m.lpnw", 2);
    let out = run(&[
        "bench",
        model.to_str().unwrap(),
        "--seconds",
        "0.05",
        "--streams",
        "2",
        "--json",
    ]);
    assert_ok(&out);
    let report: serde_json::Value = serde_json::from_slice(&out.stdout).expect("JSON report");
    assert_eq!(report["streams"], 2);
    assert!(report["real_time_factor"].as_f64().unwrap() > 0.0);
    assert!(report["analytic_gflops"].as_f64().unwrap() > 0.0);
    assert!(report["synthesized_seconds"].as_f64().unwrap() >= 0.1);
}

#[test]
fn bench_zero_seconds_is_ok() {
    let dir = tempfile::tempdir().unwrap();
    let model = make_model(dir.path(), "m.lpnw", 2);
    let out = run(&["bench", model.to_str().unwrap(), "--seconds", "0"]);
    assert_ok(&out);
}
