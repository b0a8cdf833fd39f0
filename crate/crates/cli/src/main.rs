use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use semiquad::experiments::{self, Table};
use semiquad::{Error, ExperimentConfig};

#[derive(Parser)]
#[command(
    name = "semiquad",
    version,
    about = "Semigroup evaluation by contour quadrature"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Experiment config (INI). Defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Directory for CSV output; stdout otherwise.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Threads for the resolvent precompute.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand, Clone, Copy)]
enum Command {
    /// Closed-form bound sweeps.
    Bounds,
    /// Error against the exact pullback on a time grid.
    Run,
    /// Error against N for several regularization orders.
    Converge,
    /// Chebyshev size needed per contour location.
    ContourCost,
    /// Quadrature parameters for a tolerance.
    Plan,
}

/// Errors that should map to exit code 2.
#[derive(Debug)]
struct ConfigProblem;

fn load(path: Option<&Path>) -> anyhow::Result<ExperimentConfig> {
    let text = match path {
        Some(p) => std::fs::read_to_string(p)
            .with_context(|| format!("reading {}", p.display()))
            .context(ConfigProblem)?,
        None => String::new(),
    };
    Ok(ExperimentConfig::parse(&text)?)
}

fn write(tables: &[Table], out: Option<&Path>) -> anyhow::Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            for t in tables {
                let path = dir.join(format!("{}.csv", t.name));
                std::fs::write(&path, t.to_csv())
                    .with_context(|| format!("writing {}", path.display()))?;
                log::info!("wrote {}", path.display());
            }
        }
        None => {
            let mut text = String::new();
            for (i, t) in tables.iter().enumerate() {
                if i > 0 {
                    text.push('\n');
                }
                text.push_str(&format!("# table {}\n{}", t.name, t.to_csv()));
            }
            let mut stdout = std::io::stdout().lock();
            match stdout
                .write_all(text.as_bytes())
                .and_then(|()| stdout.flush())
            {
                // a closed pipe (`| head`) is not a failure
                Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => {}
                r => r.context("writing to stdout")?,
            }
        }
    }
    Ok(())
}

fn run(cli: &Cli) -> anyhow::Result<()> {
    if cli.workers == Some(0) {
        anyhow::bail!(Error::Config {
            line: 0,
            msg: "--workers must be at least 1".into()
        });
    }
    let cfg = load(cli.config.as_deref())?;
    let tables = match cli.command {
        Command::Bounds => experiments::cmd_bounds(&cfg)?,
        Command::Run => experiments::cmd_run(&cfg, cli.workers)?,
        Command::Converge => experiments::cmd_converge(&cfg, cli.workers)?,
        Command::ContourCost => experiments::cmd_contour_cost(&cfg)?,
        Command::Plan => experiments::cmd_plan(&cfg)?,
    };
    write(&tables, cli.out.as_deref())
}

fn exit_code(err: &anyhow::Error) -> u8 {
    if err.downcast_ref::<ConfigProblem>().is_some() {
        return 2;
    }
    match err.downcast_ref::<Error>() {
        Some(Error::Config { .. }) => 2,
        Some(_) => 3,
        None => 1,
    }
}

impl std::fmt::Display for ConfigProblem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("config unreadable")
    }
}

impl std::error::Error for ConfigProblem {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(exit_code(&err))
        }
    }
}
