use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use entrywise_cli::commands::{self, Output, EXIT_INPUT};
use entrywise_cli::io::{self, SigmaSpec};
use entrywise_core::simulation::{NoiseLaw, SweepConfig};
use entrywise_core::{Entry, Mask};

#[derive(Parser)]
#[command(
    name = "entrywise",
    version,
    about = "Entrywise inference for rank-one matrix completion"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate one entry with its log-variance and confidence interval.
    Estimate {
        matrix: PathBuf,
        #[arg(long, value_parser = parse_entry)]
        entry: Entry,
        #[command(flatten)]
        sigma: SigmaArgs,
    },
    /// Predicted log-variance of every cell; needs only the mask.
    VarianceMap {
        #[command(flatten)]
        source: MaskSource,
        #[command(flatten)]
        sigma: SigmaArgs,
        #[arg(long)]
        jobs: Option<usize>,
        /// Write variance_map.csv here instead of printing it.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Fill every reconstructible cell and write completed.csv and variance.csv.
    Complete {
        matrix: PathBuf,
        #[command(flatten)]
        sigma: SigmaArgs,
        /// Keep observed cells as given instead of denoising them.
        #[arg(long, conflicts_with = "all")]
        missing_only: bool,
        /// Re-estimate observed cells too (the default).
        #[arg(long)]
        all: bool,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Noise-level sweep on random rank-one instances.
    Simulate {
        #[arg(long, default_value_t = 50)]
        m: usize,
        #[arg(long, default_value_t = 50)]
        n: usize,
        /// Observed entries per mask.
        #[arg(long, default_value_t = 200)]
        k: usize,
        #[arg(long, default_value_t = 3)]
        masks: usize,
        /// `start:step:stop` or a comma list.
        #[arg(long, default_value = "0:0.1:0.9", value_parser = parse_levels)]
        levels: Levels,
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 11)]
        bins: usize,
        #[arg(long, value_enum, default_value_t = Law::LogNormal)]
        law: Law,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Print a basis of the path space of one entry.
    Paths {
        #[command(flatten)]
        source: MaskSource,
        #[arg(long, value_parser = parse_entry)]
        entry: Entry,
    },
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct SigmaArgs {
    /// Log-variance of every observation.
    #[arg(long)]
    sigma: Option<f64>,
    /// Per-entry log-variances, aligned with the matrix.
    #[arg(long)]
    sigma_file: Option<PathBuf>,
}

impl SigmaArgs {
    fn load(&self) -> Result<SigmaSpec> {
        match (self.sigma, &self.sigma_file) {
            (Some(s), _) => Ok(SigmaSpec::Scalar(s)),
            (None, Some(path)) => SigmaSpec::from_file(path),
            (None, None) => bail!("one of --sigma or --sigma-file is required"),
        }
    }
}

#[derive(Args)]
#[group(required = true, multiple = false)]
struct MaskSource {
    /// Matrix CSV; observed cells form the mask.
    matrix: Option<PathBuf>,
    /// 0/1 mask CSV.
    #[arg(long)]
    mask: Option<PathBuf>,
}

impl MaskSource {
    fn load(&self) -> Result<Mask> {
        match (&self.matrix, &self.mask) {
            (Some(path), None) => io::read_matrix(path)?.mask(),
            (None, Some(path)) => io::read_mask(path),
            _ => bail!("give either a matrix file or --mask"),
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum Law {
    LogNormal,
    TwoPoint,
}

#[derive(Clone)]
struct Levels(Vec<f64>);

fn parse_entry(s: &str) -> Result<Entry> {
    let (i, j) = s
        .split_once(',')
        .ok_or_else(|| anyhow!("expected <row>,<col>, got '{s}'"))?;
    Ok((i.trim().parse()?, j.trim().parse()?))
}

fn parse_levels(s: &str) -> Result<Levels> {
    let levels: Vec<f64> = if s.contains(':') {
        let parts: Vec<f64> = s
            .split(':')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()?;
        let [start, step, stop] = parts[..] else {
            bail!("expected start:step:stop, got '{s}'");
        };
        if step.is_nan() || step <= 0.0 || stop < start {
            bail!("range '{s}' is empty");
        }
        let count = ((stop - start) / step + 1e-9).floor() as usize + 1;
        (0..count)
            .map(|k| ((start + k as f64 * step) * 1e12).round() / 1e12)
            .collect()
    } else {
        s.split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()?
    };
    if levels.iter().any(|l| !l.is_finite() || *l < 0.0) {
        bail!("noise levels must be finite and >= 0");
    }
    Ok(Levels(levels))
}

fn with_jobs<T: Send>(jobs: Option<usize>, f: impl FnOnce() -> Result<T> + Send) -> Result<T> {
    match jobs {
        None => f(),
        Some(0) => bail!("--jobs must be at least 1"),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .context("cannot start worker threads")?
            .install(f),
    }
}

fn write_file(dir: &Path, name: &str, text: &str) -> Result<()> {
    std::fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    let path = dir.join(name);
    std::fs::write(&path, text).with_context(|| format!("cannot write {}", path.display()))
}

fn run(command: Command) -> Result<Output> {
    let printed = |stdout: String| Output {
        stdout,
        stderr: None,
        code: 0,
    };
    match command {
        Command::Estimate {
            matrix,
            entry,
            sigma,
        } => commands::estimate(&io::read_matrix(&matrix)?, entry, &sigma.load()?),
        Command::VarianceMap {
            source,
            sigma,
            jobs,
            out,
        } => {
            let mask = source.load()?;
            let sigma = sigma.load()?;
            let csv = with_jobs(jobs, || commands::variance_map_csv(&mask, &sigma))?;
            match out {
                None => Ok(printed(csv)),
                Some(dir) => {
                    write_file(&dir, "variance_map.csv", &csv)?;
                    Ok(printed(String::new()))
                }
            }
        }
        Command::Complete {
            matrix,
            sigma,
            missing_only,
            all: _,
            jobs,
            out,
        } => {
            let matrix = io::read_matrix(&matrix)?;
            let sigma = sigma.load()?;
            let done = with_jobs(jobs, || commands::complete(&matrix, &sigma, missing_only))?;
            write_file(&out, "completed.csv", &done.values_csv())?;
            write_file(&out, "variance.csv", &done.variances_csv())?;
            Ok(printed(String::new()))
        }
        Command::Simulate {
            m,
            n,
            k,
            masks,
            levels,
            trials,
            seed,
            bins,
            law,
            jobs,
            out,
        } => {
            let config = SweepConfig {
                rows: m,
                cols: n,
                known: k,
                masks,
                levels: levels.0,
                trials,
                seed,
                law: match law {
                    Law::LogNormal => NoiseLaw::LogNormal,
                    Law::TwoPoint => NoiseLaw::TwoPoint,
                },
            };
            with_jobs(jobs, || commands::simulate(&config, bins, &out))
        }
        Command::Paths { source, entry } => commands::paths(&source.load()?, entry),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_INPUT } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli.command) {
        Ok(out) => {
            print!("{}", out.stdout);
            if let Some(msg) = out.stderr {
                eprintln!("{msg}");
            }
            ExitCode::from(out.code)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(EXIT_INPUT)
        }
    }
}
