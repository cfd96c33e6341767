use std::path::Path;
use std::process::{Command, Output};

use fitkit::io::{read_container, read_csv, read_image, write_csv, write_image};
use fitkit::superres::{sr_decode, DecodeOptions, Decoded};
use fitkit::{Image, Plane};
use serde_json::Value;

fn fitkit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fitkit")).args(args).output().expect("spawn fitkit")
}

fn ok(args: &[&str]) -> Value {
    let out = fitkit(args);
    assert!(out.status.success(), "{args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json record")
}

fn p(dir: &Path, name: &str) -> String {
    dir.join(name).display().to_string()
}

fn test_image(dir: &Path) -> String {
    let img = Image::gray(Plane::from_fn(64, 48, |r, c| if c > 20 { 200.0 } else { 30.0 + r as f64 })).unwrap();
    let path = p(dir, "img.pgm");
    write_image(Path::new(&path), &img).unwrap();
    path
}

#[test]
fn record_shape() {
    let dir = tempfile::tempdir().unwrap();
    let out = p(dir.path(), "s.csv");
    let v = ok(&["synth", "--kind", "sine", "--fs", "256", "--duration", "2", "-o", &out]);
    for key in ["command", "inputs", "params", "metrics", "outputs"] {
        assert!(v.get(key).is_some(), "missing {key}");
    }
    assert_eq!(v["command"], "synth");
    assert_eq!(v["metrics"]["samples"], 512);
    assert_eq!(read_csv(Path::new(&out)).unwrap().len(), 512);
}

#[test]
fn signal_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let clean = p(dir.path(), "clean.csv");
    let noisy = p(dir.path(), "noisy.csv");
    ok(&["synth", "--duration", "2", "-o", &clean]);
    ok(&["synth", "--duration", "2", "--noise", "5", "--seed", "3", "-o", &noisy]);
    let den = p(dir.path(), "den.csv");
    let v = ok(&["denoise", &noisy, "--basis", "coslet", "--reference", &clean, "-o", &den]);
    assert!(v["metrics"]["psnr"].as_f64().unwrap() > 30.0);
    let fit = p(dir.path(), "fit.csv");
    ok(&["fit1d", &clean, "--variant", "averaged", "-o", &fit]);
    assert_eq!(read_csv(Path::new(&fit)).unwrap().len(), 2048);
    ok(&["witness", &clean]);
    ok(&["phase", &clean]);
    ok(&["haar", &clean, "--levels", "3"]);
    let tone = p(dir.path(), "tone.csv");
    ok(&["synth", "--kind", "sine", "--freq", "40", "--duration", "2", "-o", &tone]);
    let psd = ok(&["psd", &tone, "--fs", "1024"]);
    assert!((psd["metrics"]["peak_frequency"].as_f64().unwrap() - 40.0).abs() < 1.0);
}

#[test]
fn image_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let img = test_image(dir.path());
    let fit = p(dir.path(), "fit.pgm");
    ok(&["fit2d", &img, "--mask", "square", "--m-size", "5", "-o", &fit]);
    assert_eq!(read_image(Path::new(&fit)).unwrap().rows(), 64);
    let dirs = p(dir.path(), "dir.f32");
    let v = ok(&["fit2d", &img, "--nonoverlap", "-o", &dirs]);
    assert_eq!(v["outputs"].as_array().unwrap().len(), 3);
    ok(&["coslet", &img, "--levels", "2", "-o", &p(dir.path(), "pyr.pgm")]);
    for op in ["roberts", "sobel", "prewitt", "canny", "fit"] {
        ok(&["edges", &img, "--op", op, "-o", &p(dir.path(), &format!("{op}.pgm"))]);
    }
    let same = ok(&["metrics", &img, &img]);
    assert_eq!(same["metrics"]["psnr"], "inf");
    let mi = ok(&["mi", &img, &img]);
    let m = &mi["metrics"];
    assert!((m["mi"].as_f64().unwrap() - m["hx"].as_f64().unwrap()).abs() < 1e-12);
}

#[test]
fn signal_container_round_trip_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    let clean = p(dir.path(), "s.csv");
    ok(&["synth", "--kind", "two-tone", "--fs", "512", "--duration", "2", "-o", &clean]);
    for version in ["1", "2", "3"] {
        let c = p(dir.path(), &format!("v{version}.fsr"));
        let out = p(dir.path(), &format!("v{version}.csv"));
        let enc = ok(&["sr-encode", &clean, "--version", version, "--f64", "-o", &c]);
        assert_eq!(enc["metrics"]["cr"], 2.0);
        ok(&["sr-decode", &c, "-o", &out]);
        let (payload, _) = read_container(Path::new(&c)).unwrap();
        let Decoded::Signal(expected) = sr_decode(&payload, &DecodeOptions::default()).unwrap() else { panic!() };
        let got = read_csv(Path::new(&out)).unwrap();
        assert_eq!(got.iter().map(|v| v.to_bits()).collect::<Vec<_>>(), expected.iter().map(|v| v.to_bits()).collect::<Vec<_>>());
    }
}

#[test]
fn image_container_keeps_shape() {
    let dir = tempfile::tempdir().unwrap();
    let img = test_image(dir.path());
    let c = p(dir.path(), "img.fsr");
    let out = p(dir.path(), "back.pgm");
    ok(&["sr-encode", &img, "--basis", "haar", "--version", "2", "-o", &c]);
    let v = ok(&["sr-decode", &c, "--deblur", "--reference", &img, "-o", &out]);
    assert_eq!((v["metrics"]["rows"].as_u64(), v["metrics"]["cols"].as_u64()), (Some(64), Some(48)));
    let back = read_image(Path::new(&out)).unwrap();
    assert_eq!((back.rows(), back.cols(), back.channels()), (64, 48, 1));
}

#[test]
fn corrupted_containers_fail() {
    let dir = tempfile::tempdir().unwrap();
    let s = p(dir.path(), "s.csv");
    write_csv(Path::new(&s), &(0..64).map(|i| i as f64).collect::<Vec<_>>()).unwrap();
    let c = p(dir.path(), "s.fsr");
    ok(&["sr-encode", &s, "-o", &c]);
    let bytes = std::fs::read(&c).unwrap();

    let mut bad = bytes.clone();
    bad[0] ^= 0xff;
    let bad_magic = p(dir.path(), "magic.fsr");
    std::fs::write(&bad_magic, &bad).unwrap();
    let truncated = p(dir.path(), "short.fsr");
    std::fs::write(&truncated, &bytes[..bytes.len() - 3]).unwrap();
    let header_only = p(dir.path(), "header.fsr");
    std::fs::write(&header_only, &bytes[..8]).unwrap();

    for f in [&bad_magic, &truncated, &header_only] {
        let out = fitkit(&["sr-decode", f, "-o", &p(dir.path(), "x.csv")]);
        assert_eq!(out.status.code(), Some(1), "{f}");
        assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
    }
}

#[test]
fn usage_errors_exit_two() {
    let dir = tempfile::tempdir().unwrap();
    let img = test_image(dir.path());
    assert_eq!(fitkit(&["fit1d", &img]).status.code(), Some(2));
    assert_eq!(fitkit(&["denoise", &img, "-o", &p(dir.path(), "x.bmp")]).status.code(), Some(2));
    assert_eq!(fitkit(&["sr-encode", &img, "--version", "4", "-o", "x"]).status.code(), Some(2));
}

#[test]
fn ga_tune_reports_a_chromosome() {
    let dir = tempfile::tempdir().unwrap();
    let img = test_image(dir.path());
    let v = ok(&["ga-tune", "--original", &img, "--population", "12", "--survivors", "4", "--generations", "5"]);
    let alpha = v["metrics"]["chromosome"]["alpha"].as_f64().unwrap();
    let beta = v["metrics"]["chromosome"]["beta"].as_f64().unwrap();
    assert!((-0.1..0.0).contains(&alpha) && beta > 1.0 && beta <= 2.0);
    let out = p(dir.path(), "sharp.pgm");
    ok(&["deblur", &img, "--alpha", &alpha.to_string(), "--beta", &beta.to_string(), "-o", &out]);
}
