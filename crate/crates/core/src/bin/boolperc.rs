use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use boolperc::experiment::bounds::{bound_sheets, bounds_csv, draw_sample, resolve_c1, sample_csv};
use boolperc::experiment::sweep::sweep_csv;
use boolperc::experiment::{
    run_estimate, run_sweep, run_verify, EstimateOutcome, ExperimentConfig, RunOptions,
    SweepOutcome,
};
use boolperc::sampler::write_binary;
use boolperc::Error;

#[derive(Parser)]
#[command(
    name = "boolperc",
    version,
    about = "Poisson Boolean percolation experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Draw one realization of the first (λ, law) cell.
    Sample(Common),
    /// Tail table of M(anchor) over the r grid.
    Estimate(Common),
    /// Phase table over the λ × law grid.
    Sweep(Common),
    /// Geometry and theory checks; exit code 3 on failure.
    Verify(Common),
    /// Theory bound table.
    Bounds(Common),
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the configured seed.
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    threads: Option<usize>,
    /// Output directory; overrides the configured one. Without it, results
    /// go to stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Clone, Copy, PartialEq, ValueEnum)]
enum Format {
    Csv,
    Json,
}

const EXIT_FAILURE: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;
const EXIT_TRUNCATION: u8 = 4;

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("boolperc: {e}");
            ExitCode::from(match e {
                Error::Config(_) | Error::Domain(_) | Error::Usage(_) => EXIT_CONFIG,
                Error::Truncation(_) => EXIT_TRUNCATION,
                _ => EXIT_FAILURE,
            })
        }
    }
}

fn load(c: &Common) -> boolperc::Result<(ExperimentConfig, RunOptions)> {
    let mut cfg = ExperimentConfig::load(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let out = c.out.clone().or_else(|| cfg.out.clone());
    Ok((
        cfg,
        RunOptions {
            threads: c.threads,
            out,
        },
    ))
}

/// Writes `text` to `dir/name`, or to stdout without a directory.
fn emit(dir: Option<&Path>, name: &str, text: &str) -> boolperc::Result<()> {
    match dir {
        Some(d) => {
            std::fs::create_dir_all(d)?;
            std::fs::write(d.join(name), text)?;
            eprintln!("wrote {}", d.join(name).display());
        }
        None => print!("{text}"),
    }
    Ok(())
}

fn run(cmd: Command) -> boolperc::Result<u8> {
    match cmd {
        Command::Sample(c) => {
            let (cfg, opts) = load(&c)?;
            let sample = draw_sample(&cfg)?;
            let dir = opts.out.as_deref();
            match c.format {
                Format::Json => emit(dir, "sample.json", &sample.to_json()?)?,
                Format::Csv => emit(dir, "sample.csv", &sample_csv(&sample)?)?,
            }
            if let Some(d) = dir {
                let mut w = std::io::BufWriter::new(std::fs::File::create(d.join("sample.pbm"))?);
                write_binary(&sample, &mut w)?;
                std::io::Write::flush(&mut w)?;
            }
            Ok(0)
        }
        Command::Estimate(c) => {
            let (cfg, opts) = load(&c)?;
            match run_estimate(&cfg, &opts)? {
                EstimateOutcome::Stopped => {
                    eprintln!("stopped early; rerun with the same --out to resume");
                    Ok(0)
                }
                EstimateOutcome::Complete(table) => {
                    match &opts.out {
                        Some(d) => table.write(d, c.format == Format::Json)?,
                        None if c.format == Format::Json => println!("{}", table.to_json()?),
                        None => print!("{}", table.to_csv()?),
                    }
                    Ok(0)
                }
            }
        }
        Command::Sweep(c) => {
            let (cfg, opts) = load(&c)?;
            match run_sweep(&cfg, &opts)? {
                SweepOutcome::Stopped => {
                    eprintln!("stopped early; rerun with the same --out to resume");
                    Ok(0)
                }
                SweepOutcome::Complete(rows) => {
                    let dir = opts.out.as_deref();
                    match c.format {
                        Format::Json => {
                            emit(dir, "sweep.json", &serde_json::to_string_pretty(&rows)?)?
                        }
                        Format::Csv => emit(dir, "sweep.csv", &sweep_csv(&rows)?)?,
                    }
                    Ok(0)
                }
            }
        }
        Command::Verify(c) => {
            let (cfg, opts) = load(&c)?;
            let report = run_verify(&cfg)?;
            let dir = opts.out.as_deref();
            match dir {
                Some(_) => {
                    emit(dir, "verify.json", &report.to_json()?)?;
                    emit(dir, "verify.csv", &report.to_csv()?)?;
                    emit(dir, "verify.txt", &report.to_text())?;
                }
                None => match c.format {
                    Format::Json => println!("{}", report.to_json()?),
                    Format::Csv => print!("{}", report.to_csv()?),
                },
            }
            eprint!("{}", report.to_text());
            Ok(if report.passed { 0 } else { EXIT_VERIFY })
        }
        Command::Bounds(c) => {
            let (cfg, opts) = load(&c)?;
            let c1 = resolve_c1(&cfg)?;
            let sheets = bound_sheets(&cfg, c1)?;
            let dir = opts.out.as_deref();
            match c.format {
                Format::Json => emit(dir, "bounds.json", &serde_json::to_string_pretty(&sheets)?)?,
                Format::Csv => emit(dir, "bounds.csv", &bounds_csv(&sheets)?)?,
            }
            Ok(0)
        }
    }
}
