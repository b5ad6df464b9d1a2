use std::path::Path;
use std::process::{Command, Output};
use tempfile::TempDir;

fn pmech(out: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pmech"))
        .arg("--out")
        .arg(out)
        .args(args)
        .env_remove("PMECH_OUTDIR")
        .output()
        .expect("spawn pmech")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn csv_column(path: &Path, name: &str) -> Vec<Option<f64>> {
    let text = std::fs::read_to_string(path).unwrap();
    let mut lines = text.lines();
    let idx = lines.next().unwrap().split(',').position(|h| h == name).unwrap();
    lines.map(|l| l.split(',').nth(idx).unwrap().parse().ok()).collect()
}

#[test]
fn verify_single_suite() {
    let dir = TempDir::new().unwrap();
    let o = pmech(dir.path(), &["verify", "--suite", "bracket"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let report = json(&dir.path().join("verify.json"));
    let names: Vec<&str> = report.as_array().unwrap().iter().map(|c| c["check"].as_str().unwrap()).collect();
    assert_eq!(
        names,
        [
            "antiderivative.left_factor",
            "antiderivative.modes_agree",
            "antiderivative.right_factor",
            "bracket.antisymmetry",
            "bracket.jacobi",
            "bracket.leibniz"
        ]
    );
    assert!(report[0].get("runtime_ms").is_none());
}

#[test]
fn tight_tolerance_fails_with_code_1() {
    let dir = TempDir::new().unwrap();
    let o = pmech(dir.path(), &["--tol", "group.associativity=1e-18", "verify", "--suite", "group"]);
    assert_eq!(o.status.code(), Some(1));
    let report = json(&dir.path().join("verify.json"));
    let assoc = &report[0];
    assert_eq!(assoc["check"], "group.associativity");
    assert_eq!(assoc["pass"], false);
}

#[test]
fn config_file_and_errors() {
    let dir = TempDir::new().unwrap();
    let cfg = dir.path().join("run.conf");
    std::fs::write(&cfg, "suites = group\ntol.group.inverse = 0.5 # loose\n").unwrap();
    let o = pmech(dir.path(), &["--config", cfg.to_str().unwrap(), "--timings", "verify"]);
    assert_eq!(o.status.code(), Some(0));
    let report = json(&dir.path().join("verify.json"));
    assert_eq!(report.as_array().unwrap().len(), 3);
    assert_eq!(report[2]["tolerance"], 0.5);
    assert!(report[2]["runtime_ms"].is_number());

    std::fs::write(&cfg, "seed = many\n").unwrap();
    let o = pmech(dir.path(), &["--config", cfg.to_str().unwrap(), "verify"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("line 1"));

    assert_eq!(pmech(dir.path(), &["--tol", "no.such=1", "verify"]).status.code(), Some(2));
    assert_eq!(pmech(dir.path(), &["verify", "--suite", "nope"]).status.code(), Some(2));
    assert_eq!(pmech(dir.path(), &["oscillator", "--dt", "0"]).status.code(), Some(2));
}

#[test]
fn quantize_routes_agree() {
    let dir = TempDir::new().unwrap();
    let o = pmech(dir.path(), &["quantize", "--signal", "gauss", "--hbar", "0.5"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("quantize_gauss.json"));
    assert!(r["residual_interior"].as_f64().unwrap() <= 1e-3);
    assert!(dir.path().join("quantize_gauss_rep.bin").exists());
    assert!(dir.path().join("quantize_gauss_weyl.bin").exists());
}

#[test]
fn quantize_identity_uses_weyl_route() {
    let dir = TempDir::new().unwrap();
    let o = pmech(dir.path(), &["quantize", "--signal", "identity"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&dir.path().join("quantize_identity.json"));
    assert!(r["rep_skipped"].is_string());
    assert!(r["identity_distance_interior"].as_f64().unwrap() < 0.1);
}

#[test]
fn quantize_rejects_bad_hbar_and_signal() {
    let dir = TempDir::new().unwrap();
    let o = pmech(dir.path(), &["quantize", "--hbar", "50"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("admissible range"));
    assert_eq!(pmech(dir.path(), &["quantize", "--hbar", "-1"]).status.code(), Some(2));
    assert_eq!(pmech(dir.path(), &["quantize", "--signal", "wobble"]).status.code(), Some(2));
}

#[test]
fn correspondence_slope_and_errors() {
    let dir = TempDir::new().unwrap();
    let o = pmech(dir.path(), &["correspondence"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let r = json(&dir.path().join("correspondence.json"));
    assert!((r["slope"].as_f64().unwrap() - 2.0).abs() <= 0.2);
    assert_eq!(csv_column(&dir.path().join("correspondence.csv"), "residual").len(), 4);

    assert_eq!(pmech(dir.path(), &["correspondence", "--hbars", "0.4"]).status.code(), Some(2));
    assert_eq!(pmech(dir.path(), &["correspondence", "--hbars", "0.1,0.2,0.3,0.4"]).status.code(), Some(2));

    let o = pmech(dir.path(), &["correspondence", "--pair", "gauss,gauss"]);
    assert_eq!(o.status.code(), Some(0));
    let r = json(&dir.path().join("correspondence.json"));
    assert!(r["slope"].is_null());
    assert!(r["residuals"].as_array().unwrap().iter().all(|v| v.as_f64() == Some(0.0)));
}

#[test]
fn oscillator_zero_time_is_one_snapshot() {
    let dir = TempDir::new().unwrap();
    let o = pmech(dir.path(), &["oscillator", "--t-end", "0"]);
    assert_eq!(o.status.code(), Some(0));
    let t = csv_column(&dir.path().join("oscillator.csv"), "t");
    assert_eq!(t, vec![Some(0.0)]);
}

#[test]
fn oscillator_error_is_fourth_order() {
    let final_error = |dt: &str| {
        let dir = TempDir::new().unwrap();
        let o = pmech(dir.path(), &["oscillator", "--t-end", "0.2", "--dt", dt, "--snapshots", "4"]);
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        let col = csv_column(&dir.path().join("oscillator.csv"), "transport");
        assert_eq!(col.len(), 5);
        col.last().unwrap().unwrap()
    };
    let ratio = final_error("0.005") / final_error("0.0025");
    assert!((ratio - 16.0).abs() < 2.0, "ratio {ratio}");
}

#[test]
fn oscillator_rejects_unstable_step() {
    let dir = TempDir::new().unwrap();
    let o = pmech(dir.path(), &["oscillator", "--t-end", "1", "--dt", "0.1"]);
    assert_eq!(o.status.code(), Some(2), "{}", String::from_utf8_lossy(&o.stderr));
}

#[test]
fn output_is_deterministic() {
    let a = TempDir::new().unwrap();
    let b = TempDir::new().unwrap();
    for d in [&a, &b] {
        assert_eq!(pmech(d.path(), &["--seed", "7", "verify", "--suite", "convolution"]).status.code(), Some(0));
    }
    let read = |d: &TempDir| std::fs::read(d.path().join("verify.json")).unwrap();
    assert_eq!(read(&a), read(&b));
}

#[test]
fn outdir_from_environment() {
    let dir = TempDir::new().unwrap();
    let o = Command::new(env!("CARGO_BIN_EXE_pmech"))
        .args(["verify", "--suite", "group"])
        .env("PMECH_OUTDIR", dir.path())
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(0));
    assert!(dir.path().join("verify.json").exists());
}
