use std::fs;
use std::process::{Command, Output};

fn irig(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_irig")).args(args).output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn pmf_prints_dense_geometric_law() {
    let text = stdout(&irig(&["pmf", "--regime", "dense", "--p2", "exp:1", "--r-max", "3"]));
    assert_eq!(text, "r,mass,stderr\n0,5e-1,0e0\n1,2.5e-1,0e0\n2,1.25e-1,0e0\n3,6.25e-2,0e0\ntail,6.25e-2\n");
}

#[test]
fn balanced_pmf_needs_beta() {
    let out = irig(&["pmf", "--regime", "balanced"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("--beta"));
}

#[test]
fn sample_is_seeded() {
    let args = ["sample", "--regime", "balanced", "--beta", "1", "--count", "50", "--seed", "9"];
    let a = stdout(&irig(&args));
    assert_eq!(a.lines().count(), 50);
    assert!(a.lines().all(|l| l.parse::<u64>().is_ok()));
    assert_eq!(a, stdout(&irig(&args)));
}

#[test]
fn run_applies_overrides_and_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("exp.cfg");
    fs::write(
        &config,
        "regime = balanced\nn_grid = 100, 200\np1 = exp:1\np2 = exp:1\nreplicates = 2\nmaster_seed = 1\n\n[balanced]\nbeta = 1\n",
    )
    .unwrap();
    let out_dir = dir.path().join("out");
    let text = stdout(&irig(&[
        "run",
        config.to_str().unwrap(),
        "--override",
        "balanced.beta=2",
        "--override",
        &format!("output_dir={}", out_dir.display()),
    ]));
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "n,m,replicates,tv,coincidence_rate,isolated_fraction,tail_index,runtime_ms");
    assert!(lines[1].starts_with("100,200,2,"), "{}", lines[1]);
    assert_eq!(fs::read_to_string(out_dir.join("convergence_table.csv")).unwrap(), text);
    assert!(out_dir.join("manifest.json").exists());
    assert!(out_dir.join("pmf_limit.csv").exists());
}

#[test]
fn run_reports_config_errors() {
    let dir = tempfile::tempdir().unwrap();
    let config = dir.path().join("bad.cfg");
    fs::write(&config, "regime = balanced\nn_grid = 100\n").unwrap();
    let out = irig(&["run", config.to_str().unwrap()]);
    assert!(!out.status.success());
    assert!(!String::from_utf8_lossy(&out.stderr).is_empty());
}
