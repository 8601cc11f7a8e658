use ising_rc::disorder::Environment;
use ising_rc::report::{csv_body, read_csv};
use serde::Deserialize;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ising-rc"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ising-rc-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(args: &[&str], out: &Path) -> Output {
    bin().args(args).arg("--out").arg(out).output().unwrap()
}

fn read(dir: &Path, file: &str) -> String {
    std::fs::read_to_string(dir.join(file)).unwrap()
}

fn error_json(o: &Output) -> serde_json::Value {
    serde_json::from_slice(&o.stderr).unwrap_or_else(|_| panic!("stderr is not JSON: {}", String::from_utf8_lossy(&o.stderr)))
}

#[derive(Deserialize)]
struct Eigen {
    k: usize,
    eigenvalue: f64,
}

#[derive(Deserialize)]
struct OracleSummary {
    n: u32,
    state: String,
    entropy: f64,
    gap: Option<f64>,
}

#[test]
fn oracle_example_is_idempotent() {
    let (a, b) = (scratch("oracle-a"), scratch("oracle-b"));
    let args = ["oracle", "--n", "4", "--theta", "0.5", "--L", "1", "--m", "1"];
    assert!(run(&args, &a).status.success());
    assert!(run(&args, &b).status.success());
    for f in ["oracle_spectrum.csv", "oracle_rdm.csv", "oracle_summary.csv"] {
        assert_eq!(csv_body(&read(&a, f)), csv_body(&read(&b, f)), "{f}");
    }
    let (header, rows) = read_csv::<Eigen>(&read(&a, "oracle_spectrum.csv")).unwrap();
    let header = header.unwrap();
    assert_eq!(header["command"], "oracle");
    assert_eq!(header["config"]["theta"], 0.5);
    assert_eq!(rows.len(), 4);
    assert!(rows.iter().enumerate().all(|(i, r)| r.k == i));
    assert!((rows.iter().map(|r| r.eigenvalue).sum::<f64>() - 1.0).abs() < 1e-12);
    let (_, s) = read_csv::<OracleSummary>(&read(&a, "oracle_summary.csv")).unwrap();
    assert_eq!((s[0].n, s[0].state.as_str()), (4, "ground"));
    assert!(s[0].entropy > 0.0 && s[0].gap.unwrap() > 0.0);
}

#[test]
fn unknown_flag_is_a_usage_error() {
    let o = bin().args(["oracle", "--no-such-flag", "1"]).output().unwrap();
    assert_eq!(o.status.code(), Some(2));
    let e = error_json(&o);
    assert_eq!(e["error"], "usage");
    assert_eq!(e["code"], 2);
}

#[test]
fn inconsistent_chain_length_is_a_config_error() {
    let dir = scratch("bad-n");
    let o = run(&["oracle", "--n", "5", "--L", "1", "--m", "1"], &dir);
    assert_eq!(o.status.code(), Some(2));
    assert_eq!(error_json(&o)["error"], "config");
}

#[test]
fn config_file_is_validated_and_overridden_by_flags() {
    let dir = scratch("config");
    let cfg = dir.join("cfg.json");
    std::fs::write(&cfg, r#"{"theta": 0.25, "L": 2, "m": 1}"#).unwrap();
    let o = run(&["oracle", "--config", cfg.to_str().unwrap(), "--theta", "0.75"], &dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (header, rows) = read_csv::<Eigen>(&read(&dir, "oracle_spectrum.csv")).unwrap();
    let header = header.unwrap();
    assert_eq!(header["config"]["theta"], 0.75);
    assert_eq!(header["config"]["L"], 2);
    assert_eq!(rows.len(), 8);

    std::fs::write(&cfg, r#"{"theta": 0.25, "typo": 1}"#).unwrap();
    let o = run(&["oracle", "--config", cfg.to_str().unwrap()], &dir);
    assert_eq!(o.status.code(), Some(2));
    assert!(error_json(&o)["message"].as_str().unwrap().contains("typo"));
}

#[test]
fn output_directory_from_environment() {
    let dir = scratch("env-out");
    let o = bin().args(["oracle", "--L", "0", "--m", "1"]).env("ISING_RC_OUT", &dir).output().unwrap();
    assert!(o.status.success());
    assert!(dir.join("oracle_summary.csv").exists());
    let printed: serde_json::Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(printed["files"].as_array().unwrap().len(), 3);
}

#[derive(Deserialize)]
struct RdmRow {
    i: usize,
    j: usize,
    rho: f64,
    se: f64,
    exact: Option<f64>,
    z: Option<f64>,
}

#[test]
fn rdm_carries_oracle_columns_and_reruns_identically() {
    let (a, b) = (scratch("rdm-a"), scratch("rdm-b"));
    let args = ["rdm", "--m", "1", "--L", "0", "--beta", "6", "--sweeps", "4000", "--seed", "7"];
    assert!(run(&args, &a).status.success());
    assert!(run(&args, &b).status.success());
    assert_eq!(csv_body(&read(&a, "rdm.csv")), csv_body(&read(&b, "rdm.csv")));
    let (_, rows) = read_csv::<RdmRow>(&read(&a, "rdm.csv")).unwrap();
    assert_eq!(rows.len(), 4);
    for r in &rows {
        let exact = r.exact.expect("exact column for a 3-site chain");
        assert!(r.i < 2 && r.j < 2 && r.se > 0.0);
        assert!((r.rho - exact).abs() < 6.0 * r.se + 1e-3, "({}, {})", r.i, r.j);
        assert!(r.z.is_some());
    }
}

#[test]
fn entropy_scan_round_trips() {
    let dir = scratch("entropy");
    assert!(run(&["entropy-scan", "--L-list", "1,2"], &dir).status.success());
    let (_, rows) = read_csv::<ising_rc::estimators::EntropyScalingRow>(&read(&dir, "entropy_scaling.csv")).unwrap();
    assert_eq!(rows.iter().map(|r| r.l).collect::<Vec<_>>(), [1, 2]);
    assert!(rows.iter().all(|r| r.s_exact.is_some() && r.s_mc.is_none()));
}

#[derive(Deserialize)]
struct Radius {
    x: i64,
    #[serde(rename = "D")]
    d: f64,
}

#[test]
fn disorder_scan_reads_an_environment_file() {
    let dir = scratch("disorder");
    let env = Environment::new(0, vec![1.0; 13], vec![0.0; 12]).unwrap();
    let path = dir.join("env.csv");
    std::fs::write(&path, env.to_csv().unwrap()).unwrap();
    let o = run(&["disorder-scan", "--environment", path.to_str().unwrap(), "--max-distance", "3", "--trials", "200"], &dir);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let (_, radii) = read_csv::<Radius>(&read(&dir, "localization_radii.csv")).unwrap();
    assert_eq!(radii.iter().map(|r| r.x).collect::<Vec<_>>(), (3..=9).collect::<Vec<_>>());
    // Without couplings a cluster stays on its line, and its death-free
    // interval rarely outlasts e^r.
    assert!(radii.iter().all(|r| r.d <= 1.0), "{:?}", radii.iter().map(|r| r.d).collect::<Vec<_>>());
}

#[test]
fn every_command_accepts_defaults_on_small_runs() {
    let dir = scratch("smoke");
    let cases: [&[&str]; 5] = [
        &["branching", "--trials", "2000"],
        &["decay-scan", "--trials", "2000", "--m-list", "1,2,3"],
        &["mixing-check", "--sweeps", "500", "--chains", "2"],
        &["norm-decay", "--sweeps", "500", "--chains", "2", "--m-list", "1,2"],
        &["disorder-scan", "--environments", "2", "--trials", "20", "--L-list", "8"],
    ];
    for args in cases {
        let o = run(args, &dir);
        assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let (_, rows) = read_csv::<ising_rc::mixing::MixingRow>(&read(&dir, "mixing.csv")).unwrap();
    assert_eq!(rows[0].check, "factorization");
    let (_, rows) = read_csv::<ising_rc::disorder::DisorderEventRow>(&read(&dir, "disorder_events.csv")).unwrap();
    assert_eq!(rows.len(), 2);
}
