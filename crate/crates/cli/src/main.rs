use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use irig::limit_laws::{limit_pmf_with, LimitSampler, LimitSettings, DEFAULT_N_MIX, DEFAULT_R_MAX};
use irig::runner::{fixtures, run_experiment, ConvergenceRow, ExperimentConfig, Regime};
use irig::{RegimeLimit, WeightModel};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::io::{BufWriter, Write};
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "irig", version, about = "Inhomogeneous random intersection graph experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a convergence experiment described by a config file.
    Run {
        config: PathBuf,
        /// `key=value` or `section.key=value`; wins over the file.
        #[arg(long = "override", value_name = "KEY=VALUE")]
        overrides: Vec<String>,
    },
    /// Print a limit law as CSV (`r,mass,stderr`, then `tail,<mass>`).
    Pmf(LawArgs),
    /// Print draws from a limit law, one per line.
    Sample {
        #[command(flatten)]
        law: LawArgs,
        #[arg(long, default_value_t = 1000)]
        count: usize,
    },
    /// Run the built-in regime fixtures and report pass/fail per check.
    Check {
        /// Directory for the determinism runs.
        #[arg(long, default_value = "irig-check")]
        scratch: PathBuf,
    },
}

#[derive(Args)]
struct LawArgs {
    #[arg(long)]
    regime: Regime,
    #[arg(long)]
    beta: Option<f64>,
    /// Attribute weight law, e.g. `exp:1` or `pareto:2.5,1`.
    #[arg(long, default_value = "degenerate:1")]
    p1: WeightModel,
    /// Vertex weight law.
    #[arg(long, default_value = "degenerate:1")]
    p2: WeightModel,
    #[arg(long, default_value_t = DEFAULT_R_MAX)]
    r_max: usize,
    #[arg(long, default_value_t = DEFAULT_N_MIX)]
    n_mix: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    allow_infinite_a2: bool,
}

impl LawArgs {
    fn limit(&self) -> Result<RegimeLimit> {
        Ok(match self.regime {
            Regime::Sparse => RegimeLimit::Sparse,
            Regime::Balanced => RegimeLimit::Balanced {
                beta: self.beta.context("--beta is required for the balanced regime")?,
                p1: self.p1.clone(),
                p2: self.p2.clone(),
            },
            Regime::Dense => RegimeLimit::Dense { p1: self.p1.clone(), p2: self.p2.clone() },
        })
    }

    fn settings(&self) -> LimitSettings {
        LimitSettings { r_max: self.r_max, n_mix: self.n_mix, allow_infinite_a2: self.allow_infinite_a2 }
    }
}

fn main() -> Result<()> {
    let cli = Cli::parse();
    let stdout = std::io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    match cli.command {
        Command::Run { config, overrides } => {
            let text = std::fs::read_to_string(&config).with_context(|| format!("reading {}", config.display()))?;
            let mut cfg = ExperimentConfig::parse_with_overrides(&text, &overrides)?;
            if cfg.output_dir.is_none() {
                cfg.output_dir = Some(PathBuf::from("out"));
            }
            let outcome = run_experiment(&cfg)?;
            writeln!(out, "{}", ConvergenceRow::HEADER)?;
            for row in outcome.rows() {
                writeln!(out, "{}", row.csv_line())?;
            }
            eprintln!("outputs written to {}", cfg.output_dir.unwrap().display());
        }
        Command::Pmf(law) => {
            let mut rng = ChaCha8Rng::seed_from_u64(law.seed);
            let pmf = limit_pmf_with(&law.limit()?, &law.settings(), &mut rng)?;
            pmf.write_csv(&mut out)?;
        }
        Command::Sample { law, count } => {
            let mut rng = ChaCha8Rng::seed_from_u64(law.seed);
            let sampler = LimitSampler::new(&law.limit()?, &law.settings(), &mut rng)?;
            for _ in 0..count {
                writeln!(out, "{}", sampler.sample(&mut rng))?;
            }
        }
        Command::Check { scratch } => {
            let results = fixtures::run_builtin_checks(&scratch)?;
            for r in &results {
                writeln!(out, "{}", r.line())?;
            }
            out.flush()?;
            if results.iter().any(|r| !r.passed) {
                bail!("{} check(s) failed", results.iter().filter(|r| !r.passed).count());
            }
        }
    }
    out.flush()?;
    Ok(())
}
