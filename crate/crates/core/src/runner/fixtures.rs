//! Built-in desk-scale fixtures for each regime and the checks run against them.

use super::config::ExperimentConfig;
use super::experiment::{run_experiment, ExperimentOutcome};
use crate::error::Result;
use crate::stats::{hill_tail_index, two_proportion_z, Z_CRIT_ONE_SIDED_001};
use std::path::Path;

/// `m = round(n^0.4)`: isolated vertices should dominate.
pub const SPARSE: &str = "\
regime = sparse
n_grid = 1000, 100000
p1 = exp:1
p2 = exp:1
replicates = 5
master_seed = 20240601
[sparse]
m_rule = pow:0.4
";

/// `m = n`, exponential weights on both sides.
pub const BALANCED: &str = "\
regime = balanced
n_grid = 1000, 30000
p1 = exp:1
p2 = exp:1
replicates = 10
master_seed = 20240602
[balanced]
beta = 1
";

/// `m = round(n^1.5)`, exponential weights on both sides.
pub const DENSE: &str = "\
regime = dense
n_grid = 500, 1000, 2000, 4000
p1 = exp:1
p2 = exp:1
replicates = 10
master_seed = 20240603
[dense]
m_rule = pow:1.5
";

/// Dense regime with Pareto(2.5) vertex weights; the degree tail should
/// inherit the vertex-weight tail index.
pub const POWER_LAW: &str = "\
regime = dense
n_grid = 2000
p1 = exp:1
p2 = pareto:2.5,1
replicates = 60
master_seed = 20240604
n_mix = 20000
[dense]
m_rule = pow:1.5
";

/// Hill cut used for the power-law check.
pub const POWER_LAW_HILL_K: usize = 1000;
pub const POWER_LAW_MIN_POSITIVE: usize = 100_000;
pub const POWER_LAW_RANGE: (f64, f64) = (2.1, 2.9);
pub const TV_TOLERANCE: f64 = 0.05;
pub const SPARSE_MIN_ISOLATED: f64 = 0.95;

pub fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::parse(text).expect("built-in fixture parses")
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl CheckOutcome {
    pub fn line(&self) -> String {
        format!("[{}] {}: {}", if self.passed { "PASS" } else { "FAIL" }, self.name, self.detail)
    }
}

/// Isolated fraction at the largest size is at least 0.95 and significantly
/// above the smallest size's.
pub fn judge_sparse(out: &ExperimentOutcome) -> CheckOutcome {
    let first = out.sizes.first().unwrap();
    let last = out.sizes.last().unwrap();
    let zeros = |s: &super::experiment::SizeResult| s.samples.iter().filter(|&&d| d == 0).count() as u64;
    let z = two_proportion_z(zeros(last), last.samples.len() as u64, zeros(first), first.samples.len() as u64);
    let frac = last.row.isolated_fraction;
    CheckOutcome {
        name: "sparse regime isolation",
        passed: frac >= SPARSE_MIN_ISOLATED && z > Z_CRIT_ONE_SIDED_001,
        detail: format!(
            "isolated fraction {frac:.4} at n={} (need >= {SPARSE_MIN_ISOLATED}), {:.4} at n={}, z={z:.2}",
            last.row.n, first.row.isolated_fraction, first.row.n
        ),
    }
}

/// Inversions allowed along a grid: one for grids of four or more sizes
/// (Monte Carlo noise), none otherwise.
pub fn allowed_inversions(grid_len: usize) -> usize {
    usize::from(grid_len >= 4)
}

/// TV at the largest size within tolerance, below the smallest size's, and
/// non-increasing along the grid up to [`allowed_inversions`].
pub fn judge_convergence(name: &'static str, out: &ExperimentOutcome) -> CheckOutcome {
    let tvs: Vec<f64> = out.sizes.iter().map(|s| s.row.tv).collect();
    let (first, last) = (tvs[0], *tvs.last().unwrap());
    let inversions = tvs.windows(2).filter(|w| w[1] > w[0]).count();
    let allowed = allowed_inversions(tvs.len());
    CheckOutcome {
        name,
        passed: last <= TV_TOLERANCE && last < first && inversions <= allowed,
        detail: format!(
            "tv by n: {} (need last <= {TV_TOLERANCE}, last < first, {inversions} inversion(s) of {allowed} allowed)",
            out.sizes.iter().map(|s| format!("{}:{:.4}", s.row.n, s.row.tv)).collect::<Vec<_>>().join(" ")
        ),
    }
}

pub fn judge_power_law(out: &ExperimentOutcome) -> CheckOutcome {
    let pooled: Vec<u64> = out.sizes.iter().flat_map(|s| s.samples.iter().copied()).collect();
    let positive = pooled.iter().filter(|&&d| d > 0).count();
    let estimate = hill_tail_index::<f64>(&pooled, POWER_LAW_HILL_K);
    let (lo, hi) = POWER_LAW_RANGE;
    match estimate {
        Ok(alpha) => CheckOutcome {
            name: "dense regime power-law tail",
            passed: positive >= POWER_LAW_MIN_POSITIVE && (lo..=hi).contains(&alpha),
            detail: format!(
                "Hill(k={POWER_LAW_HILL_K}) = {alpha:.3} over {positive} positive degrees (need [{lo}, {hi}])"
            ),
        },
        Err(e) => CheckOutcome { name: "dense regime power-law tail", passed: false, detail: e.to_string() },
    }
}

fn read_outputs(dir: &Path) -> Result<Vec<(String, Vec<u8>)>> {
    let mut files: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)?
        .map(|e| {
            let e = e?;
            Ok((e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path())?))
        })
        .collect::<Result<_>>()?;
    files.sort();
    Ok(files)
}

/// Runs `config` into two fresh directories under `scratch` and compares every output byte.
pub fn judge_determinism(config: &ExperimentConfig, scratch: &Path) -> Result<CheckOutcome> {
    let mut dirs = Vec::new();
    for run in ["run_a", "run_b"] {
        let dir = scratch.join(run);
        let _ = std::fs::remove_dir_all(&dir);
        let mut c = config.clone();
        c.output_dir = Some(dir.clone());
        run_experiment(&c)?;
        dirs.push(dir);
    }
    let (a, b) = (read_outputs(&dirs[0])?, read_outputs(&dirs[1])?);
    Ok(CheckOutcome {
        name: "run determinism",
        passed: !a.is_empty() && a == b,
        detail: format!("{} output files compared byte for byte", a.len()),
    })
}

/// Runs every built-in fixture; `scratch` receives the determinism runs.
pub fn run_builtin_checks(scratch: &Path) -> Result<Vec<CheckOutcome>> {
    let mut out = vec![
        judge_sparse(&run_experiment(&config(SPARSE))?),
        judge_convergence("balanced regime convergence", &run_experiment(&config(BALANCED))?),
        judge_convergence("dense regime convergence", &run_experiment(&config(DENSE))?),
        judge_power_law(&run_experiment(&config(POWER_LAW))?),
    ];
    out.push(judge_determinism(&config(BALANCED), scratch)?);
    Ok(out)
}
