use irig::runner::{run_experiment, ConvergenceRow, ExperimentConfig};
use std::fs;

const SMALL: &str = "\
regime = dense
n_grid = 100, 200
p1 = exp:1
p2 = exp:1
replicates = 4
master_seed = 11
r_max = 80
[dense]
m_rule = pow:1.2
";

#[test]
fn outputs_are_written_per_size() {
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::parse(SMALL).unwrap();
    config.output_dir = Some(dir.path().to_path_buf());
    let outcome = run_experiment(&config).unwrap();

    let table = fs::read_to_string(dir.path().join("convergence_table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines[0], ConvergenceRow::HEADER);
    assert_eq!(lines.len(), 3);
    for (line, row) in lines[1..].iter().zip(outcome.rows()) {
        assert_eq!(*line, row.csv_line());
        assert_eq!(line.split(',').count(), 8);
        assert!(line.ends_with(",0"), "runtime is not recorded by default");
    }

    for n in [100, 200] {
        let pmf = fs::read_to_string(dir.path().join(format!("pmf_empirical_n{n}.csv"))).unwrap();
        assert_eq!(pmf.lines().count(), 1 + 81 + 1);
        assert!(pmf.lines().last().unwrap().starts_with("tail,"));
        let report: serde_json::Value =
            serde_json::from_str(&fs::read_to_string(dir.path().join(format!("report_n{n}.json"))).unwrap()).unwrap();
        assert_eq!(report["seed"], 11);
        assert_eq!(report["n_samples"], (n * 4) as u64);
    }

    let manifest: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("manifest.json")).unwrap()).unwrap();
    assert_eq!(manifest["master_seed"], 11);
    assert_eq!(manifest["streams"][1]["first_stream"], 1u64 << 32);
    let echoed = ExperimentConfig::parse(manifest["config_text"].as_str().unwrap()).unwrap();
    assert_eq!(echoed.n_grid, config.n_grid);
    assert!(!dir.path().join("FAILED").exists());
}

#[test]
fn failure_keeps_partial_results_and_marks_them() {
    // n = 200 projects cheaply; at n = 2000 every attribute holds about half
    // the vertices and the pair-work guard trips.
    let text = "\
regime = balanced
beta = 1
n_grid = 200, 2000
p1 = degenerate:1000
p2 = degenerate:1
replicates = 1
master_seed = 3
r_max = 2500
";
    let dir = tempfile::tempdir().unwrap();
    let mut config = ExperimentConfig::parse(text).unwrap();
    config.output_dir = Some(dir.path().to_path_buf());
    let err = run_experiment(&config).unwrap_err();
    assert!(matches!(err, irig::Error::SizeGuard { .. }), "{err}");

    let table = fs::read_to_string(dir.path().join("convergence_table.csv")).unwrap();
    let lines: Vec<&str> = table.lines().collect();
    assert_eq!(lines.len(), 3, "{table}");
    assert!(lines[1].starts_with("200,200,1,"));
    assert_eq!(lines[2], format!("# FAILED: {err}"));
    assert!(dir.path().join("pmf_empirical_n200.csv").exists());
    assert!(!dir.path().join("pmf_empirical_n2000.csv").exists());
    assert_eq!(fs::read_to_string(dir.path().join("FAILED")).unwrap().trim_end(), err.to_string());
}

#[test]
fn rerun_into_same_directory_clears_failure_marker() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("FAILED"), "old\n").unwrap();
    let mut config = ExperimentConfig::parse(SMALL).unwrap();
    config.output_dir = Some(dir.path().to_path_buf());
    run_experiment(&config).unwrap();
    assert!(!dir.path().join("FAILED").exists());
}
