use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data").join(name)
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

fn isac(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_isac")).args(args).output().expect("binary runs")
}

fn run_ok(args: &[&str]) {
    let out = isac(args);
    assert!(out.status.success(), "isac {args:?} failed: {}", String::from_utf8_lossy(&out.stderr));
}

fn path_str(p: &Path) -> &str {
    p.to_str().expect("utf-8 path")
}

/// Header names and rows of a CSV file.
fn read_csv(path: &Path) -> (Vec<String>, Vec<Vec<String>>) {
    let mut r = csv::Reader::from_path(path).expect("csv opens");
    let header = r.headers().expect("header").iter().map(String::from).collect();
    let rows = r.records().map(|rec| rec.expect("row").iter().map(String::from).collect()).collect();
    (header, rows)
}

fn col(header: &[String], name: &str) -> usize {
    header.iter().position(|h| h == name).unwrap_or_else(|| panic!("no column {name}"))
}

fn f(s: &str) -> f64 {
    s.parse().unwrap_or_else(|_| panic!("not a number: {s:?}"))
}

fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).expect("json file")).expect("valid json")
}

fn h2(a: f64) -> f64 {
    -(a * a.log2() + (1.0 - a) * (1.0 - a).log2())
}

#[test]
fn binary_region_matches_equal_exponent_curve() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("binary_multiplicative.json");
    run_ok(&["region-fixed", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    let (h, rows) = read_csv(&dir.path().join("region_fixed.csv"));
    let (_, px) = read_csv(&dir.path().join("px_grid.csv"));
    let d = 0.5 * (0.5f64 / 0.2).log2() + 0.5 * (0.5f64 / 0.8).log2();
    let mut checked = 0;
    for r in rows.iter().filter(|r| r[col(&h, "u")] == "5.00000000000e-1") {
        let t = f(&px[r[0].parse::<usize>().unwrap()][2]);
        if t < 0.5 {
            continue;
        }
        let rate = h2(t * 0.9 + (1.0 - t) * 0.1) - h2(0.1);
        assert!((f(&r[col(&h, "rate_bits")]) - rate).abs() <= 1e-9);
        assert!((f(&r[col(&h, "e_fa_bits")]) - t * d).abs() <= 1e-9);
        assert!((f(&r[col(&h, "e_md_bits")]) - t * d).abs() <= 1e-9);
        checked += 1;
    }
    assert_eq!(checked, 51);
}

#[test]
fn gaussian_region_hits_axis_endpoints() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("gaussian_scalar_fixed.json");
    run_ok(&["region-fixed", "--config", path_str(&cfg), "--units", "nats", "--out", path_str(dir.path())]);
    let (h, rows) = read_csv(&dir.path().join("region_fixed.csv"));
    for (p, e) in [(1.0, 0.125), (2.0, 0.25), (4.0, 0.5)] {
        let curve: Vec<_> = rows.iter().filter(|r| f(&r[col(&h, "power")]) == p).collect();
        let first = curve.first().unwrap();
        let last = curve.last().unwrap();
        assert_eq!(f(&first[col(&h, "e_md_nats")]), e);
        assert_eq!(f(&last[col(&h, "e_fa_nats")]), e);
        assert!((f(&first[col(&h, "rate_nats")]) - 0.5 * (1.0 + p).ln()).abs() < 1e-11);
    }
}

#[test]
fn golden_region_files() {
    for (cfg, extra, file) in [
        ("binary_multiplicative.json", vec!["--grid-t", "0.1"], "binary_multiplicative_region.csv"),
        ("gaussian_scalar_fixed.json", vec!["--units", "nats"], "gaussian_region.csv"),
    ] {
        let dir = tempfile::tempdir().unwrap();
        let c = data(cfg);
        let mut args = vec!["region-fixed", "--config", path_str(&c), "--grid-u", "9", "--out", path_str(dir.path())];
        args.extend(extra);
        run_ok(&args);
        let got = std::fs::read_to_string(dir.path().join("region_fixed.csv")).unwrap();
        let want = std::fs::read_to_string(golden(file)).unwrap();
        assert_eq!(got, want, "{file} drifted");
    }
}

#[test]
fn mimo_region_reports_covariance_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("mimo.json");
    run_ok(&["region-fixed", "--config", path_str(&cfg), "--out", path_str(dir.path())]);
    let (h, rows) = read_csv(&dir.path().join("region_fixed.csv"));
    let first = &rows[0];
    let last = rows.last().unwrap();
    assert!((f(&first[col(&h, "rate_bits")]) - 6f64.log2()).abs() < 1e-9);
    assert!((f(&last[col(&h, "trace_sigma")]) - 40.0).abs() < 1e-9);
}

#[test]
fn missing_config_is_a_usage_error() {
    let out = isac(&["region-fixed", "--config", "/nonexistent/channel.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/channel.json"));
}

#[test]
fn malformed_config_names_line_and_field() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, "{\n  \"kind\": \"iid_binary\",\n  \"gamma1\": \"x\",\n  \"gamma2\": 0.2,\n  \"gamma_s\": 0.5\n}\n").unwrap();
    let out = isac(&["region-iid", "--config", path_str(&cfg), "--alpha", "0.1", "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("gamma1") && err.contains("line 3"), "{err}");
}

#[test]
fn bad_grid_is_a_usage_error() {
    let cfg = data("binary_multiplicative.json");
    let out = isac(&["region-fixed", "--config", path_str(&cfg), "--grid-t", "0.3"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn binary_iid_region_curves() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("iid_binary.json");
    run_ok(&["region-iid", "--config", path_str(&cfg), "--alpha", "0.15,0.2,0.4", "--grid-t", "0.0001", "--out", path_str(dir.path())]);
    let summary = read_json(&dir.path().join("summary.json"));
    let t_star = summary["capacity_p_x"][1].as_f64().unwrap();
    assert!((t_star - 0.4824).abs() <= 1e-3, "t* = {t_star}");
    let (h, rows) = read_csv(&dir.path().join("region_iid.csv"));
    for alpha in ["1.50000000000e-1", "2.00000000000e-1", "4.00000000000e-1"] {
        assert_eq!(rows.iter().filter(|r| r[col(&h, "alpha")] == alpha).count(), 10_001);
    }
    for r in &rows {
        let gap = f(&r[col(&h, "beta")]) - f(&r[col(&h, "beta_waterfill")]);
        assert!((-1e-12..=4e-4).contains(&gap), "waterfill gap {gap}");
    }
}

#[test]
fn unconstrained_budget_detects_almost_surely() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("iid_binary.json");
    run_ok(&["region-iid", "--config", path_str(&cfg), "--alpha", "0.999", "--out", path_str(dir.path())]);
    let (h, rows) = read_csv(&dir.path().join("region_iid.csv"));
    // The diagonal of symbol 0 caps β at α when t = 0.
    assert!(rows.iter().all(|r| f(&r[col(&h, "beta")]) >= 0.999 - 1e-12));
}

#[test]
fn gaussian_iid_boundaries_decrease_to_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("gaussian_scalar_iid.json");
    run_ok(&["region-iid", "--config", path_str(&cfg), "--alpha", "0.1,0.3,0.5", "--grid-t", "0.001", "--out", path_str(dir.path())]);
    let summary = read_json(&dir.path().join("summary.json"));
    let cap = summary["capacity_px_index"].as_u64().unwrap() as usize;
    assert!((summary["capacity_p_x"][1].as_f64().unwrap() - 0.4760).abs() <= 5e-3);
    let (h, rows) = read_csv(&dir.path().join("region_iid.csv"));
    for alpha in ["1.00000000000e-1", "3.00000000000e-1", "5.00000000000e-1"] {
        let curve: Vec<_> = rows.iter().filter(|r| r[col(&h, "alpha")] == alpha).collect();
        // Grid index grows with t; from t = 1 down to capacity the rate rises and β falls.
        let branch: Vec<_> = curve[cap..].iter().rev().collect();
        for w in branch.windows(2) {
            assert!(f(&w[1][col(&h, "rate_bits")]) > f(&w[0][col(&h, "rate_bits")]));
            assert!(f(&w[1][col(&h, "beta")]) < f(&w[0][col(&h, "beta")]));
        }
    }
}

#[test]
fn fixed_simulation_is_byte_reproducible() {
    let cfg = data("binary_multiplicative.json");
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        run_ok(&["simulate", "--config", path_str(&cfg), "--mode", "fixed", "--seed", "1", "--trials", "20000", "--n", "20,40",
            "--px", "0,1", "--out", path_str(d.path())]);
    }
    for file in ["mc.csv", "fit.json"] {
        let a = std::fs::read(dirs[0].path().join(file)).unwrap();
        let b = std::fs::read(dirs[1].path().join(file)).unwrap();
        assert_eq!(a, b, "{file} differs");
    }
    let m = read_json(&dirs[0].path().join("manifest.json"));
    assert_eq!(m["seed"], 1);
    let files: Vec<&str> = m["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap()).collect();
    assert_eq!(files, ["mc.csv", "fit.json"]);
}

#[test]
fn iid_simulation_follows_region_allocation() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("iid_binary.json");
    let region = dir.path().join("region");
    run_ok(&["region-iid", "--config", path_str(&cfg), "--alpha", "0.15", "--out", path_str(&region)]);
    let summary = read_json(&region.join("summary.json"));
    let idx = summary["capacity_px_index"].to_string();
    let sim = dir.path().join("sim");
    let alloc = region.join("allocations.json");
    run_ok(&["simulate", "--config", path_str(&cfg), "--mode", "iid", "--allocation", path_str(&alloc), "--alpha", "0.15",
        "--px-index", &idx, "--trials", "20000", "--n", "50", "--out", path_str(&sim)]);
    let (h, rows) = read_csv(&sim.join("iid.csv"));
    let tol = 4.0 / (20000.0f64 * 50.0).sqrt();
    for r in &rows {
        assert!((f(&r[col(&h, "p_fa_hat")]) - f(&r[col(&h, "expected_p_fa")])).abs() <= tol);
        assert!((f(&r[col(&h, "p_d_hat")]) - f(&r[col(&h, "expected_p_d")])).abs() <= tol);
        assert!((f(&r[col(&h, "expected_p_fa")]) - 0.15).abs() < 0.02);
    }
}

#[test]
fn invalid_mode_lists_valid_modes() {
    let cfg = data("iid_binary.json");
    let out = isac(&["simulate", "--config", path_str(&cfg), "--mode", "batch"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    assert!(err.contains("fixed") && err.contains("iid"), "{err}");
}

#[test]
fn roc_tables() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("iid_binary.json");
    run_ok(&["roc", "--config", path_str(&cfg), "--symbol", "1", "--out", path_str(dir.path())]);
    let (h, rows) = read_csv(&dir.path().join("roc.csv"));
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (f(&r[col(&h, "p_fa")]), f(&r[col(&h, "p_d")]))).collect();
    assert_eq!(pts, [(0.0, 0.0), (0.2, 0.8), (1.0, 1.0)]);
    assert_eq!(f(&rows[0][col(&h, "slope_right")]), 4.0);
    assert_eq!(f(&rows[1][col(&h, "slope_right")]), 0.25);

    run_ok(&["roc", "--config", path_str(&cfg), "--symbol", "0", "--out", path_str(dir.path())]);
    let (h, rows) = read_csv(&dir.path().join("roc.csv"));
    assert_eq!(rows.len(), 2);
    assert_eq!(f(&rows[0][col(&h, "slope_right")]), 1.0);

    let out = isac(&["roc", "--config", path_str(&cfg), "--symbol", "7", "--out", path_str(dir.path())]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("symbol"));
}

#[test]
fn gaussian_roc_passes_through_half_sigma_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("gaussian_scalar_iid.json");
    run_ok(&["roc", "--config", path_str(&cfg), "--symbol", "1", "--out", path_str(dir.path())]);
    let (h, rows) = read_csv(&dir.path().join("roc.csv"));
    let pts: Vec<(f64, f64)> = rows.iter().map(|r| (f(&r[col(&h, "p_fa")]), f(&r[col(&h, "p_d")]))).collect();
    let x = 0.308537538725987;
    let k = pts.iter().position(|p| p.0 >= x).unwrap();
    let (a, b) = (pts[k - 1], pts[k]);
    let y = a.1 + (b.1 - a.1) * (x - a.0) / (b.0 - a.0);
    assert!((y - 0.691462461274013).abs() < 1e-3, "P_D = {y}");
}

#[test]
fn replay_reproduces_every_output() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("iid_binary.json");
    let first = dir.path().join("first");
    let second = dir.path().join("second");
    run_ok(&["simulate", "--config", path_str(&cfg), "--mode", "iid", "--alpha", "0.1", "--px", "0.4,0.6", "--trials", "5000",
        "--n", "10,30", "--seed", "9", "--out", path_str(&first)]);
    let manifest = first.join("manifest.json");
    run_ok(&["replay", "--manifest", path_str(&manifest), "--out", path_str(&second)]);
    let m1 = read_json(&manifest);
    let m2 = read_json(&second.join("manifest.json"));
    assert_eq!(m1["inputs_sha256"], m2["inputs_sha256"]);
    assert_eq!(m1["outputs"], m2["outputs"]);
    for o in m1["outputs"].as_array().unwrap() {
        let name = o["file"].as_str().unwrap();
        assert_eq!(std::fs::read(first.join(name)).unwrap(), std::fs::read(second.join(name)).unwrap());
    }
}

#[test]
fn manifest_hashes_cover_outputs() {
    use sha2::{Digest, Sha256};
    let dir = tempfile::tempdir().unwrap();
    let cfg = data("iid_binary.json");
    run_ok(&["region-iid", "--config", path_str(&cfg), "--alpha", "0.2", "--out", path_str(dir.path())]);
    let m = read_json(&dir.path().join("manifest.json"));
    let listed: Vec<String> = m["outputs"].as_array().unwrap().iter().map(|o| o["file"].as_str().unwrap().to_string()).collect();
    let mut on_disk: Vec<String> = std::fs::read_dir(dir.path())
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .filter(|n| n != "manifest.json")
        .collect();
    on_disk.sort();
    let mut sorted = listed.clone();
    sorted.sort();
    assert_eq!(sorted, on_disk);
    for o in m["outputs"].as_array().unwrap() {
        let bytes = std::fs::read(dir.path().join(o["file"].as_str().unwrap())).unwrap();
        assert_eq!(o["sha256"].as_str().unwrap(), hex::encode(Sha256::digest(&bytes)));
    }
    // Changing a result-affecting parameter changes the input hash; moving the output does not.
    let other = dir.path().join("other");
    run_ok(&["region-iid", "--config", path_str(&cfg), "--alpha", "0.2", "--out", path_str(&other)]);
    assert_eq!(read_json(&other.join("manifest.json"))["inputs_sha256"], m["inputs_sha256"]);
    let third = dir.path().join("third");
    run_ok(&["region-iid", "--config", path_str(&cfg), "--alpha", "0.25", "--out", path_str(&third)]);
    assert_ne!(read_json(&third.join("manifest.json"))["inputs_sha256"], m["inputs_sha256"]);
}
