//! Convergence experiments: generate → project → compare, per grid size.

use super::config::{DegreeEstimator, ExperimentConfig};
use crate::error::Result;
use crate::limit_laws::{limit_pmf_with, LimitSettings};
use crate::pmf::PmfVector;
use crate::projector::{
    coincidence_fails, degrees_of_subset, degrees_with_cap, GenerationParams, DEFAULT_PAIR_WORK_CAP,
};
use crate::stats::{default_hill_k, empirical_pmf, hill_tail_index, ComparisonReport};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;
use std::time::Instant;

/// Stream reserved for evaluating the limit pmf.
pub const LIMIT_STREAM: u64 = u64::MAX;

/// Stream id of replicate `replicate` at grid position `grid_index`:
/// `grid_index << 32 | replicate`.
pub fn replicate_stream(grid_index: usize, replicate: usize) -> u64 {
    ((grid_index as u64) << 32) | replicate as u64
}

/// ChaCha8 generator seeded with `master_seed`, positioned on `stream`.
pub fn substream(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// One row of `convergence_table.csv`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ConvergenceRow {
    pub n: usize,
    pub m: usize,
    pub replicates: usize,
    pub tv: f64,
    pub coincidence_rate: f64,
    pub isolated_fraction: f64,
    /// Hill estimate of the pooled degree tail; informational.
    pub tail_index: Option<f64>,
    pub runtime_ms: u64,
}

impl ConvergenceRow {
    pub const HEADER: &'static str = "n,m,replicates,tv,coincidence_rate,isolated_fraction,tail_index,runtime_ms";

    pub fn csv_line(&self) -> String {
        let tail = self.tail_index.map_or_else(|| "NA".to_string(), |t| t.to_string());
        format!(
            "{},{},{},{},{},{},{},{}",
            self.n,
            self.m,
            self.replicates,
            self.tv,
            self.coincidence_rate,
            self.isolated_fraction,
            tail,
            self.runtime_ms
        )
    }
}

/// Everything measured at one grid size.
#[derive(Clone, Debug)]
pub struct SizeResult {
    pub row: ConvergenceRow,
    pub report: ComparisonReport,
    pub empirical: PmfVector<f64>,
    /// Pooled degree samples (per the configured estimator).
    pub samples: Vec<u64>,
    /// Per-replicate `d(v_1) != L` flags.
    pub coincidence_failures: Vec<bool>,
}

#[derive(Clone, Debug)]
pub struct ExperimentOutcome {
    pub limit: PmfVector<f64>,
    pub sizes: Vec<SizeResult>,
}

impl ExperimentOutcome {
    pub fn rows(&self) -> Vec<ConvergenceRow> {
        self.sizes.iter().map(|s| s.row.clone()).collect()
    }
}

fn elapsed_ms(start: Instant, record: bool) -> u64 {
    if record {
        start.elapsed().as_millis() as u64
    } else {
        0
    }
}

/// Measurements at grid position `grid_index`.
pub fn run_size(config: &ExperimentConfig, grid_index: usize, limit: &PmfVector<f64>) -> Result<SizeResult> {
    let start = Instant::now();
    let n = config.n_grid[grid_index];
    let m = config.attributes(n);
    let params = GenerationParams { n, m, p1: config.p1.clone(), p2: config.p2.clone() };

    let per_replicate: Vec<(Vec<u32>, bool)> = (0..config.replicates)
        .into_par_iter()
        .map(|rep| -> Result<(Vec<u32>, bool)> {
            let mut rng = substream(config.master_seed, replicate_stream(grid_index, rep));
            let instance = params.generate(&mut rng)?;
            let degrees = match config.degree_estimator {
                DegreeEstimator::AllVertices => degrees_with_cap(&instance, rep as u64, DEFAULT_PAIR_WORK_CAP)?.degrees,
                DegreeEstimator::V1Only => degrees_of_subset(&instance, &[0])?,
            };
            Ok((degrees, coincidence_fails(&instance)?))
        })
        .collect::<Result<_>>()?;

    let samples: Vec<u64> = per_replicate.iter().flat_map(|(d, _)| d.iter().map(|&x| x as u64)).collect();
    let coincidence_failures: Vec<bool> = per_replicate.iter().map(|(_, f)| *f).collect();
    let empirical = empirical_pmf::<f64>(&samples, config.r_max)?;
    let mut report =
        ComparisonReport::new(&empirical, limit, samples.len() as u64, config.master_seed, &config.regime.to_string());
    let isolated = samples.iter().filter(|&&d| d == 0).count() as f64 / samples.len() as f64;
    let misses = coincidence_failures.iter().filter(|&&f| f).count();
    let tail_index = hill_tail_index::<f64>(&samples, default_hill_k(&samples)).ok();
    let runtime_ms = elapsed_ms(start, config.record_runtime);
    report.runtime_ms = runtime_ms;
    let row = ConvergenceRow {
        n,
        m,
        replicates: config.replicates,
        tv: report.tv,
        coincidence_rate: misses as f64 / config.replicates as f64,
        isolated_fraction: isolated,
        tail_index,
        runtime_ms,
    };
    Ok(SizeResult { row, report, empirical, samples, coincidence_failures })
}

/// Limit pmf for the configured regime, on the reserved stream.
pub fn config_limit_pmf(config: &ExperimentConfig) -> Result<PmfVector<f64>> {
    let settings =
        LimitSettings { r_max: config.r_max, n_mix: config.n_mix, allow_infinite_a2: config.allow_infinite_a2 };
    limit_pmf_with(&config.limit(), &settings, &mut substream(config.master_seed, LIMIT_STREAM))
}

/// Runs every grid size. When `output_dir` is set, results are written as
/// they complete; on failure the table gets a `# FAILED` marker line and a
/// `FAILED` file is left next to it.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    let writer = match &config.output_dir {
        Some(dir) => Some(OutputWriter::create(dir, config)?),
        None => None,
    };
    let result = run_inner(config, writer.as_ref());
    if let (Err(e), Some(w)) = (&result, &writer) {
        w.mark_failed(&e.to_string())?;
    }
    result
}

fn run_inner(config: &ExperimentConfig, writer: Option<&OutputWriter<'_>>) -> Result<ExperimentOutcome> {
    let limit = config_limit_pmf(config)?;
    if let Some(w) = writer {
        w.write_limit(&limit)?;
    }
    let mut sizes = Vec::with_capacity(config.n_grid.len());
    for grid_index in 0..config.n_grid.len() {
        let size = run_size(config, grid_index, &limit)?;
        if let Some(w) = writer {
            w.append(&size)?;
        }
        sizes.push(size);
    }
    Ok(ExperimentOutcome { limit, sizes })
}

#[derive(Serialize)]
struct StreamRange {
    n: usize,
    m: usize,
    grid_index: usize,
    first_stream: u64,
    last_stream: u64,
}

#[derive(Serialize)]
struct Manifest<'a> {
    regime: String,
    beta: Option<f64>,
    m_rule: Option<String>,
    n_grid: &'a [usize],
    p1: String,
    p2: String,
    replicates: usize,
    master_seed: u64,
    r_max: usize,
    n_mix: usize,
    degree_estimator: String,
    record_runtime: bool,
    allow_infinite_a2: bool,
    rng: &'static str,
    seed_scheme: &'static str,
    limit_stream: u64,
    streams: Vec<StreamRange>,
    config_text: String,
}

struct OutputWriter<'a> {
    dir: &'a Path,
}

impl<'a> OutputWriter<'a> {
    fn create(dir: &'a Path, config: &ExperimentConfig) -> Result<Self> {
        fs::create_dir_all(dir)?;
        let _ = fs::remove_file(dir.join("FAILED"));
        let streams = config
            .n_grid
            .iter()
            .enumerate()
            .map(|(g, &n)| StreamRange {
                n,
                m: config.attributes(n),
                grid_index: g,
                first_stream: replicate_stream(g, 0),
                last_stream: replicate_stream(g, config.replicates - 1),
            })
            .collect();
        let manifest = Manifest {
            regime: config.regime.to_string(),
            beta: config.beta,
            m_rule: config.m_rule.map(|r| r.to_string()),
            n_grid: &config.n_grid,
            p1: config.p1.to_string(),
            p2: config.p2.to_string(),
            replicates: config.replicates,
            master_seed: config.master_seed,
            r_max: config.r_max,
            n_mix: config.n_mix,
            degree_estimator: config.degree_estimator.to_string(),
            record_runtime: config.record_runtime,
            allow_infinite_a2: config.allow_infinite_a2,
            rng: "ChaCha8",
            seed_scheme: "seed_from_u64(master_seed), stream = grid_index << 32 | replicate",
            limit_stream: LIMIT_STREAM,
            streams,
            // the manifest sits inside output_dir, so the path itself is not echoed
            config_text: ExperimentConfig { output_dir: None, ..config.clone() }.to_text(),
        };
        fs::write(dir.join("manifest.json"), serde_json::to_string_pretty(&manifest)? + "\n")?;
        fs::write(dir.join("convergence_table.csv"), format!("{}\n", ConvergenceRow::HEADER))?;
        Ok(OutputWriter { dir })
    }

    fn write_limit(&self, limit: &PmfVector<f64>) -> Result<()> {
        limit.write_csv(fs::File::create(self.dir.join("pmf_limit.csv"))?)
    }

    fn append(&self, size: &SizeResult) -> Result<()> {
        let n = size.row.n;
        size.empirical.write_csv(fs::File::create(self.dir.join(format!("pmf_empirical_n{n}.csv")))?)?;
        fs::write(self.dir.join(format!("report_n{n}.json")), size.report.to_json()? + "\n")?;
        let mut table = fs::OpenOptions::new().append(true).open(self.dir.join("convergence_table.csv"))?;
        writeln!(table, "{}", size.row.csv_line())?;
        Ok(())
    }

    fn mark_failed(&self, message: &str) -> Result<()> {
        let mut table = fs::OpenOptions::new().append(true).open(self.dir.join("convergence_table.csv"))?;
        writeln!(table, "# FAILED: {message}")?;
        fs::write(self.dir.join("FAILED"), format!("{message}\n"))?;
        Ok(())
    }
}
