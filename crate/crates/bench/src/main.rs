use std::path::{Path, PathBuf};
use std::process::ExitCode;

use acrcd_bench::experiment::{self, write_comparison, Prepared};
use acrcd_bench::{fit_slope, parse_seed_range, BenchError, ExperimentConfig};
use acrcd_core::problems::{InstanceFile, InstanceSpec};
use clap::{Parser, Subcommand};

#[derive(Parser)]
#[command(name = "acrcd-bench", version, about = "Seeded experiment runner for accelerated coordinate methods")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a seed sweep; writes run_<seed>.csv per seed and summary.csv.
    Run {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; overrides the config's `output`.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Half-open seed range `a..b`; overrides the config's `seeds`.
        #[arg(long)]
        seeds: Option<String>,
        /// Worker threads; 0 uses one per core.
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Oracle calls to reach gaps 1e-2, 1e-4, 1e-6 for two configs on one problem.
    Compare {
        #[arg(long, num_args = 2, required = true)]
        config: Vec<PathBuf>,
        /// CSV output file; stdout when absent.
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        seeds: Option<String>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Log-log slope of the seed-mean gap over k in [kmin, kmax].
    FitSlope {
        #[arg(required = true)]
        traces: Vec<PathBuf>,
        #[arg(long, default_value_t = 100)]
        kmin: u64,
        #[arg(long, default_value_t = 10_000)]
        kmax: u64,
    },
    /// Materialize an instance file from a generator recipe or an experiment config.
    GenInstance {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
}

fn seeds_for(cfg: &ExperimentConfig, flag: &Option<String>) -> Result<Vec<u64>, BenchError> {
    match flag {
        Some(r) => parse_seed_range(r),
        None => Ok(cfg.seeds.clone()),
    }
}

fn load_spec(path: &Path) -> Result<InstanceSpec, BenchError> {
    let text = std::fs::read_to_string(path)?;
    if let Ok(spec) = serde_json::from_str::<InstanceSpec>(&text) {
        return Ok(spec);
    }
    Ok(ExperimentConfig::parse(&text, &path.display().to_string())?.problem)
}

fn execute(cli: Cli) -> Result<(), BenchError> {
    match cli.command {
        Command::Run { config, out, seeds, workers } => {
            let cfg = ExperimentConfig::load(&config)?;
            let seeds = seeds_for(&cfg, &seeds)?;
            let out = out
                .or_else(|| cfg.output.clone())
                .ok_or_else(|| BenchError::Invalid("no output directory: pass --out or set `output`".into()))?;
            let prepared = Prepared::new(cfg)?;
            let rows = experiment::run(&prepared, &seeds, &out, workers)?;
            let failed = rows.iter().filter(|r| r.status != acrcd_bench::RunStatus::Ok).count();
            eprintln!("{} runs written to {} ({failed} not ok)", rows.len(), out.display());
        }
        Command::Compare { config, out, seeds, workers } => {
            let a = ExperimentConfig::load(&config[0])?;
            let b = ExperimentConfig::load(&config[1])?;
            let seeds = seeds_for(&a, &seeds)?;
            let rows = experiment::compare(&Prepared::new(a)?, &Prepared::new(b)?, &seeds, workers)?;
            match out {
                Some(p) => write_comparison(std::fs::File::create(p)?, &rows)?,
                None => write_comparison(std::io::stdout().lock(), &rows)?,
            }
        }
        Command::FitSlope { traces, kmin, kmax } => {
            let f = fit_slope(&traces, kmin, kmax)?;
            println!("slope,intercept,r_squared,points");
            println!("{:e},{:e},{:e},{}", f.slope, f.intercept, f.r_squared, f.points);
        }
        Command::GenInstance { config, out } => {
            let spec = load_spec(&config)?;
            let file = InstanceFile::generate(&spec)?;
            std::fs::write(out, file.to_json()?)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    match execute(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                BenchError::Config { .. } | BenchError::Invalid(_) => ExitCode::from(2),
                _ => ExitCode::FAILURE,
            }
        }
    }
}
