use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use acnl::experiments::{converge_space, converge_time, doubling_ns, halving_dts, run_experiment};
use acnl::iofmt::{convergence_table, load_config, write_convergence};
use acnl::{Error, ExperimentConfig};

#[derive(Parser)]
#[command(name = "acnl", version, about = "Allen-Cahn with nonlocal volume constraints")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one simulation and write timeseries.csv plus snapshots.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
    },
    /// Temporal self-convergence at fixed grid size.
    ConvergeTime {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 0.1)]
        dt_max: f64,
        #[arg(long, default_value_t = 6)]
        levels: usize,
        /// Use n = 256 instead of the configured grid.
        #[arg(long)]
        full_resolution: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Spatial self-convergence at fixed time step.
    ConvergeSpace {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 8)]
        n_min: usize,
        #[arg(long, default_value_t = 5)]
        levels: usize,
        /// Use dt = 1e-4 and T = 1 instead of the configured values.
        #[arg(long)]
        full_resolution: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit_table(rows: &[acnl::ConvergenceRow], out: Option<PathBuf>) -> Result<(), Error> {
    print!("{}", convergence_table(rows));
    if let Some(path) = out {
        if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
            std::fs::create_dir_all(dir).map_err(|e| Error::Io {
                path: dir.to_path_buf(),
                source: e,
            })?;
        }
        write_convergence(rows, &path)?;
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Error> {
    match cli.command {
        Command::Run { config, out } => {
            let cfg = ExperimentConfig {
                out_dir: Some(out.clone()),
                ..load_config(&config)?
            };
            let res = run_experiment(&cfg)?;
            let first = res.series.first().expect("initial record");
            let last = res.series.last().expect("initial record");
            println!(
                "{} steps, t = {}, volume {} -> {}, modified energy {} -> {}",
                last.step,
                last.t,
                first.volume,
                last.volume,
                first.energy_modified,
                last.energy_modified
            );
            println!("output written to {}", out.display());
        }
        Command::ConvergeTime {
            config,
            dt_max,
            levels,
            full_resolution,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if full_resolution {
                cfg.n = 256;
            }
            let rows = converge_time(&cfg, &halving_dts(dt_max, levels))?;
            emit_table(&rows, out)?;
        }
        Command::ConvergeSpace {
            config,
            n_min,
            levels,
            full_resolution,
            out,
        } => {
            let mut cfg = load_config(&config)?;
            if full_resolution {
                cfg.dt = 1e-4;
                cfg.t_end = 1.0;
            }
            let rows = converge_space(&cfg, &doubling_ns(n_min, levels))?;
            emit_table(&rows, out)?;
        }
    }
    Ok(())
}
