mod common;

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;
use topc::field::{Dims, ScalarField};
use topc::rawio::{self, Dtype};

fn topc(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_topc"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn ok(out: &Output) -> String {
    assert!(
        out.status.success(),
        "exit {:?}: {}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn ramp_file(dir: &TempDir) -> PathBuf {
    let dims = Dims::new(12, 10, 8).unwrap();
    let values = (0..dims.len())
        .map(|v| {
            let (x, y, z) = dims.coords(v);
            x as f64 * 0.5 + y as f64 * 1.25 + z as f64 * 2.0
        })
        .collect();
    let path = dir.path().join("ramp.raw");
    rawio::write_raw(&path, &ScalarField::new(dims, values).unwrap(), Dtype::F32).unwrap();
    path
}

fn bumpy_file(dir: &TempDir) -> PathBuf {
    let mut rng = common::rng(71);
    let f = common::bumpy(Dims::new(16, 16, 8).unwrap(), 6, 0.2, &mut rng);
    let path = dir.path().join("bumpy.raw");
    // plain file, no sidecar
    std::fs::write(&path, rawio::encode_values(f.values(), Dtype::F64)).unwrap();
    path
}

fn critical_values(csv: &str) -> Vec<String> {
    let mut v: Vec<String> = csv
        .lines()
        .skip(1)
        .flat_map(|l| {
            let c: Vec<&str> = l.split(',').collect();
            [c[2].to_string(), c[3].to_string()]
        })
        .collect();
    v.sort();
    v
}

#[test]
fn ramp_round_trip_keeps_critical_values() {
    let dir = TempDir::new().unwrap();
    ramp_file(&dir);
    let d = dir.path();
    ok(&topc(&["compress", "ramp.raw", "--epsilon", "5%", "-o", "ramp.topc"], d));
    ok(&topc(&["decompress", "ramp.topc", "-o", "back.raw", "--dtype", "f32"], d));
    ok(&topc(&["diagram", "ramp.raw", "-o", "a.csv"], d));
    ok(&topc(&["diagram", "back.raw", "-o", "b.csv"], d));
    let a = std::fs::read_to_string(d.join("a.csv")).unwrap();
    let b = std::fs::read_to_string(d.join("b.csv")).unwrap();
    assert_eq!(critical_values(&a), critical_values(&b));
    // diagrams straight from the archive agree too
    let c = ok(&topc(&["diagram", "ramp.topc"], d));
    assert_eq!(critical_values(&a), critical_values(&c));
}

#[test]
fn full_range_threshold_leaves_two_critical_points() {
    let dir = TempDir::new().unwrap();
    bumpy_file(&dir);
    let d = dir.path();
    ok(&topc(
        &["compress", "bumpy.raw", "--dims", "16,16,8", "--dtype", "f64", "--epsilon", "100%", "-o", "b.topc"],
        d,
    ));
    let stats = ok(&topc(&["stats", "b.topc"], d));
    assert!(stats.lines().any(|l| l == "n_c: 2"), "{stats}");
    assert!(stats.lines().any(|l| l == "dims: 16,16,8"), "{stats}");
    assert!(stats.lines().any(|l| l.starts_with("rate: ")), "{stats}");
}

#[test]
fn comparing_a_field_with_itself() {
    let dir = TempDir::new().unwrap();
    bumpy_file(&dir);
    let d = dir.path();
    let out = ok(&topc(&["compare", "bumpy.raw", "bumpy.raw", "--dims", "16,16,8", "--diagrams"], d));
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    assert_eq!(json["bottleneck"], 0.0);
    assert_eq!(json["wasserstein"], 0.0);
    assert_eq!(json["max_norm"], 0.0);
    assert_eq!(json["l2_norm"], 0.0);
    assert_eq!(json["psnr"], "inf");
    assert!(json["compression_rate"].is_null());
}

#[test]
fn comparing_against_an_archive_reports_its_rate() {
    let dir = TempDir::new().unwrap();
    bumpy_file(&dir);
    let d = dir.path();
    ok(&topc(
        &["compress", "bumpy.raw", "--dims", "16,16,8", "--epsilon-abs", "0.05", "--pointwise", "--external", "uq8", "-o", "b.topc"],
        d,
    ));
    let out = ok(&topc(&["compare", "bumpy.raw", "b.topc", "--dims", "16,16,8", "--diagrams"], d));
    let json: serde_json::Value = serde_json::from_str(&out).unwrap();
    let rate = json["compression_rate"].as_f64().unwrap();
    let size = std::fs::metadata(d.join("b.topc")).unwrap().len() as f64;
    assert_eq!(rate, (16 * 16 * 8 * 8) as f64 / size);
    assert!(json["bottleneck"].as_f64().unwrap() <= 0.05 + 1e-12);
    assert!(json["max_norm"].as_f64().unwrap() <= 0.075 + 1e-12);
    assert!(json["psnr"].as_f64().unwrap() > 0.0);
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    bumpy_file(&dir);
    let d = dir.path();
    let code = |args: &[&str]| topc(args, d).status.code();
    // usage: missing threshold, unknown flag, no dims and no sidecar
    assert_eq!(code(&["compress", "bumpy.raw", "--dims", "16,16,8", "-o", "x"]), Some(1));
    assert_eq!(code(&["stats", "--bogus"]), Some(1));
    assert_eq!(code(&["compress", "bumpy.raw", "--epsilon", "5%", "-o", "x"]), Some(1));
    assert_eq!(code(&["compress", "bumpy.raw", "--dims", "16,16,8", "--epsilon", "x%", "-o", "x"]), Some(1));
    assert_eq!(code(&[]), Some(1));
    // I/O
    assert_eq!(code(&["stats", "missing.topc"]), Some(2));
    assert_eq!(code(&["decompress", "missing.topc", "-o", "x.raw"]), Some(2));
    // format: not an archive, wrong size for the dims, damaged archive
    assert_eq!(code(&["stats", "bumpy.raw"]), Some(3));
    assert_eq!(code(&["diagram", "bumpy.raw", "--dims", "16,16,9"]), Some(3));
    ok(&topc(&["compress", "bumpy.raw", "--dims", "16,16,8", "--epsilon", "5", "-o", "b.topc"], d));
    let mut bytes = std::fs::read(d.join("b.topc")).unwrap();
    bytes.truncate(bytes.len() - 3);
    std::fs::write(d.join("cut.topc"), bytes).unwrap();
    assert_eq!(code(&["decompress", "cut.topc", "-o", "x.raw"]), Some(3));
    assert_eq!(code(&["--help"]), Some(0));
}

#[test]
fn identical_inputs_give_identical_archives() {
    let dir = TempDir::new().unwrap();
    bumpy_file(&dir);
    let d = dir.path();
    for out in ["a.topc", "b.topc"] {
        ok(&topc(&["compress", "bumpy.raw", "--dims", "16,16,8", "--epsilon", "2%", "-o", out], d));
    }
    assert_eq!(std::fs::read(d.join("a.topc")).unwrap(), std::fs::read(d.join("b.topc")).unwrap());
}
