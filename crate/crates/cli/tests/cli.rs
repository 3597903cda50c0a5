use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use manifold_ess::chainfile::write_chain;
use manifold_ess::geometry::ChainMeta;
use manifold_ess::rng::stream_rng;
use manifold_ess::samplers::{iid_chain, rwmh_sphere, ChainRunConfig, Target, VmfParams};
use manifold_ess::{kernel_ess, Chain, EssReport, KernelSpec, UnitVector, WindowSpec};
use serde_json::Value;
use tempfile::TempDir;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_manifold-ess"));
    c.env_remove("MANIFOLD_ESS_THREADS");
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn stdout_json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| {
        panic!("stdout is not JSON ({e}): {}\nstderr: {}", String::from_utf8_lossy(&o.stdout), String::from_utf8_lossy(&o.stderr))
    })
}

fn north_vmf(kappa: f64) -> Target {
    VmfParams::new(UnitVector::basis(3, 2).unwrap(), kappa).unwrap().into()
}

fn rwmh_file(dir: &Path, name: &str, n: usize, seed: u64) -> (PathBuf, Chain) {
    let cfg = ChainRunConfig::random_walk(north_vmf(12.0), 35.0, n, 200, seed);
    let chain = rwmh_sphere(&cfg).unwrap().chain;
    let path = dir.join(name);
    write_chain(&path, &chain).unwrap();
    (path, chain)
}

fn write_rows(dir: &Path, name: &str, header: &str, rows: &[[f64; 3]]) -> PathBuf {
    let mut text = format!("{header}\n");
    for r in rows {
        text.push_str(&format!("{},{},{}\n", r[0], r[1], r[2]));
    }
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn ess_auto_bandwidth_matches_library() {
    let dir = TempDir::new().unwrap();
    let (path, chain) = rwmh_file(dir.path(), "path.csv", 3000, 7);
    let o = run(&["ess", "--input", s(&path), "--kernel", "sphere-poisson", "--rho", "0.75", "--bandwidth", "auto"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let report: EssReport = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(report.bandwidth, 14);
    let direct = kernel_ess(&chain, &KernelSpec::sphere_poisson(0.75).unwrap(), &WindowSpec::bartlett(14)).unwrap();
    assert_eq!(report, direct);
}

#[test]
fn ess_json_kernel_and_csv_output() {
    let dir = TempDir::new().unwrap();
    let (path, _) = rwmh_file(dir.path(), "path.csv", 200, 1);
    let out = dir.path().join("r.csv");
    let o = run(&[
        "ess",
        "--input",
        s(&path),
        "--kernel",
        r#"{"family": "sphere_poisson", "rho": 0.6}"#,
        "--bandwidth",
        "5",
        "--output",
        "csv",
        "--out",
        s(&out),
    ]);
    assert_eq!(code(&o), 0);
    assert!(o.stdout.is_empty());
    let text = std::fs::read_to_string(&out).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,gamma0,sigma2,ess,tau,bandwidth,window,status"));
    let fields: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(fields[0], "200");
    assert_eq!(fields[5], "5");
    assert_eq!(fields[7], "ok");
}

#[test]
fn constant_chain_is_a_validation_error() {
    let dir = TempDir::new().unwrap();
    let path = write_rows(dir.path(), "c.csv", "#% manifold=sphere dims=3", &[[0.0, 0.0, 1.0]; 12]);
    let o = run(&["ess", "--input", s(&path), "--rho", "0.5"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("zero feature variance"));
}

#[test]
fn negative_long_run_variance_exits_three_with_report() {
    let dir = TempDir::new().unwrap();
    let rows: Vec<[f64; 3]> = (0..20).map(|t| if t % 2 == 0 { [0.6, 0.0, 0.8] } else { [-0.6, 0.0, 0.8] }).collect();
    let path = write_rows(dir.path(), "alt.csv", "#% manifold=sphere dims=3", &rows);
    let o = run(&["ess", "--input", s(&path), "--rho", "0.5", "--window", "truncated", "--bandwidth", "1"]);
    assert_eq!(code(&o), 3);
    let v = stdout_json(&o);
    assert_eq!(v["status"], "unstable_sigma");
    assert!(v["ess"].is_null());
    assert!(v["sigma2"].as_f64().unwrap() < 0.0);
}

#[test]
fn malformed_inputs_exit_two_and_missing_files_exit_one() {
    let dir = TempDir::new().unwrap();
    let bad = write_rows(dir.path(), "bad.csv", "#% manifold=sphere dims=3", &[[0.0, 0.0, 1.0], [0.0, 0.0, 0.9]]);
    let o = run(&["ess", "--input", s(&bad), "--rho", "0.5"]);
    assert_eq!(code(&o), 2);
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 3"));

    let missing = dir.path().join("nope.csv");
    assert_eq!(code(&run(&["ess", "--input", s(&missing), "--rho", "0.5"])), 1);

    let (path, _) = rwmh_file(dir.path(), "p.csv", 50, 2);
    assert_eq!(code(&run(&["ess", "--input", s(&path), "--kernel", "no-such-kernel"])), 2);
    assert_eq!(code(&run(&["ess", "--input", s(&path), "--kernel", "sphere-poisson"])), 2);
    assert_eq!(code(&run(&["ess", "--input", s(&path), "--rho", "1.5"])), 2);
    assert_eq!(code(&run(&["ess", "--input", s(&path), "--rho", "0.5", "--bandwidth", "wide"])), 2);
    // The unsafe kernel never reaches the estimator.
    assert_eq!(code(&run(&["ess", "--input", s(&path), "--kernel", "geodesic-gauss-unsafe", "--h", "1"])), 2);
    // The SPD kernel is not defined on sphere points.
    assert_eq!(code(&run(&["ess", "--input", s(&path), "--kernel", "spd-log-euclidean-gauss", "--beta", "1"])), 2);
}

#[test]
fn mmd_of_a_sample_with_itself_is_zero() {
    let dir = TempDir::new().unwrap();
    let (path, _) = rwmh_file(dir.path(), "x.csv", 300, 3);
    let o = run(&["mmd", "--a", s(&path), "--b", s(&path), "--rho", "0.75"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert!(v["mmd2"].as_f64().unwrap().abs() <= 1e-12);
    assert_eq!(v["n"], 300);
    assert!(v.get("d_hat").is_none());
}

#[test]
fn mmd_with_reference_adds_corrected_statistic() {
    let dir = TempDir::new().unwrap();
    let (path, chain) = rwmh_file(dir.path(), "x.csv", 300, 4);
    let reference = iid_chain(&north_vmf(12.0), 500, &mut stream_rng(9, 0)).unwrap();
    let ref_path = dir.path().join("ref.csv");
    write_chain(&ref_path, &reference).unwrap();
    let o = run(&["mmd", "--a", s(&path), "--b", s(&ref_path), "--reference", s(&ref_path), "--rho", "0.75"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let spec = KernelSpec::sphere_poisson(0.75).unwrap();
    let want = manifold_ess::corrected_risk_statistic(&chain, &reference, &spec).unwrap();
    assert_eq!(v["d_hat"].as_f64().unwrap(), want);
    assert_eq!(v["reference_m"], 500);

    // A reference without the iid mark is refused.
    let (not_iid, _) = rwmh_file(dir.path(), "y.csv", 100, 5);
    let o = run(&["mmd", "--a", s(&path), "--b", s(&path), "--reference", s(&not_iid), "--rho", "0.75"]);
    assert_eq!(code(&o), 2);
}

fn report_file(dir: &Path, n: usize, gamma0: f64, sigma2: f64) -> PathBuf {
    let r = EssReport {
        n,
        gamma0,
        sigma2,
        ess: Some(n as f64 * gamma0 / sigma2),
        tau: Some(sigma2 / gamma0),
        bandwidth: 10,
        window: "bartlett".into(),
        status: manifold_ess::EssStatus::Ok,
    };
    let path = dir.join("report.json");
    std::fs::write(&path, serde_json::to_string(&r).unwrap()).unwrap();
    path
}

#[test]
fn precision_exit_codes() {
    let dir = TempDir::new().unwrap();
    // σ̂²/n = 0.01.
    let path = report_file(dir.path(), 1000, 2.0, 10.0);
    let o = run(&["precision", "--epsilon", "0.2", "--report", s(&path)]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["pass_risk"], true);
    assert_eq!(v["pass_ess"], true);
    assert!((v["risk"].as_f64().unwrap() - 0.01).abs() < 1e-15);

    let o = run(&["precision", "--epsilon", "0.05", "--report", s(&path)]);
    assert_eq!(code(&o), 4);
    assert_eq!(stdout_json(&o)["pass_ess"], false);

    assert_eq!(code(&run(&["precision", "--epsilon", "-1", "--report", s(&path)])), 2);
}

#[test]
fn precision_from_a_chain() {
    let dir = TempDir::new().unwrap();
    let (path, _) = rwmh_file(dir.path(), "x.csv", 400, 6);
    let o = run(&["precision", "--epsilon", "10", "--input", s(&path), "--rho", "0.75"]);
    assert_eq!(code(&o), 0);
    let o = run(&["precision", "--epsilon", "1e-4", "--input", s(&path), "--rho", "0.75"]);
    assert_eq!(code(&o), 4);
}

#[test]
fn geodesic_search_reports_a_negative_witness() {
    let o = run(&["pd-audit", "--kernel", "geodesic-gauss-unsafe", "--search"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let v = stdout_json(&o);
    let w = v["witness"]["min_eigenvalue"].as_f64().unwrap();
    assert!(w < -1e-6, "witness {w}");
    assert!(v["failures"].as_u64().unwrap() >= 1);
    assert_eq!(v["witness_points"].as_array().unwrap().len(), v["plan"]["points_per_set"].as_u64().unwrap() as usize);

    assert_eq!(code(&run(&["pd-audit", "--rho", "0.5", "--search"])), 2);
}

#[test]
fn poisson_audit_passes() {
    let o = run(&["pd-audit", "--kernel", "sphere-poisson", "--rho", "0.85", "--points", "150", "--seed", "3"]);
    assert_eq!(code(&o), 0);
    let v = stdout_json(&o);
    assert_eq!(v["pass"], true);
    assert_eq!(v["n"], 150);
}

#[test]
fn experiment_config_overlay_and_reproducibility() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("mix.json");
    std::fs::write(
        &cfg,
        r#"{"experiment": "mixture", "n_keep": 200, "burn_in": 50, "m_ref": 300, "rhos": [0.6]}"#,
    )
    .unwrap();
    let out1 = dir.path().join("a");
    let out2 = dir.path().join("b");
    for out in [&out1, &out2] {
        let o = run(&["experiment", "--config", s(&cfg), "--seed", "5", "--replications", "2", "--out", s(out)]);
        assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
        assert!(String::from_utf8_lossy(&o.stdout).starts_with("quantity,count,mean,sd,min,max,range_over_mean"));
    }
    for f in ["report.json", "summary.csv", "long.csv"] {
        assert_eq!(std::fs::read(out1.join(f)).unwrap(), std::fs::read(out2.join(f)).unwrap(), "{f}");
    }
    let report: Value = serde_json::from_slice(&std::fs::read(out1.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["experiment"], "mixture");
    assert_eq!(report["config"]["master_seed"], 5);
    assert_eq!(report["config"]["replications"], 2);
    // Fields left out of the file keep the preset values.
    assert_eq!(report["config"]["kappa"], 28.0);
    assert_eq!(report["rows"].as_array().unwrap().len(), 4);
    let long = std::fs::read_to_string(out1.join("long.csv")).unwrap();
    assert!(long.starts_with("replication,quantity,value\n"));
}

#[test]
fn experiment_rejects_bad_configs() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("bad.json");
    std::fs::write(&cfg, r#"{"experiment": "mixture", "n_kep": 200}"#).unwrap();
    let out = dir.path().join("o");
    assert_eq!(code(&run(&["experiment", "--config", s(&cfg), "--out", s(&out)])), 2);
    assert_eq!(code(&run(&["experiment", "--preset", "rotation", "--replications", "3", "--out", s(&out)])), 2);
    assert_eq!(code(&run(&["experiment", "--preset", "nonsense", "--out", s(&out)])), 2);
}

#[test]
fn thread_cap_is_validated_and_does_not_change_results() {
    let dir = TempDir::new().unwrap();
    let (path, _) = rwmh_file(dir.path(), "x.csv", 500, 8);
    let args = ["ess", "--input", s(&path), "--rho", "0.75"];
    let base = run(&args);
    let one = bin().env("MANIFOLD_ESS_THREADS", "1").args(args).output().unwrap();
    assert_eq!(code(&one), 0);
    assert_eq!(base.stdout, one.stdout);
    let bad = bin().env("MANIFOLD_ESS_THREADS", "zero").args(args).output().unwrap();
    assert_eq!(code(&bad), 2);
}

#[test]
fn chain_metadata_survives_the_file_format() {
    let dir = TempDir::new().unwrap();
    let pts = vec![UnitVector::basis(3, 0).unwrap(), UnitVector::basis(3, 1).unwrap(), UnitVector::basis(3, 2).unwrap()];
    let meta = ChainMeta { sampler: Some("rwmh".into()), seed: Some(3), burn_in: Some(10), iid: false };
    let chain = Chain::sphere(pts).unwrap().with_meta(meta);
    let path = dir.path().join("m.csv");
    write_chain(&path, &chain).unwrap();
    let text = std::fs::read_to_string(&path).unwrap();
    assert!(text.starts_with("#% manifold=sphere dims=3"));
    assert!(text.contains("sampler=rwmh"));
}
