//! Running from a configuration file and reading the results back.
//!
//! Loads a `key = value` file, runs it into an output directory, then reads
//! `timeseries.csv` and the last snapshot back from disk.
//!
//! ```bash
//! cargo run --release --example run_config -- crates/core/configs/drop_merge.conf out/from_config
//! ```

use std::path::PathBuf;

use acnl::experiments::{run_experiment, snapshot_path};
use acnl::iofmt::{load_config, read_field, read_timeseries};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let config = PathBuf::from(args.next().ok_or("usage: run_config <config> [out_dir]")?);
    let out_dir = PathBuf::from(args.next().unwrap_or_else(|| "out/from_config".into()));

    let mut cfg = load_config(&config)?;
    cfg.out_dir = Some(out_dir.clone());
    let out = run_experiment(&cfg)?;

    let series = read_timeseries(&out_dir.join("timeseries.csv"))?;
    println!("{} records in {}", series.len(), out_dir.join("timeseries.csv").display());
    if let (Some(first), Some(last)) = (series.first(), series.last()) {
        println!("volume   {:.12} -> {:.12}", first.volume, last.volume);
        println!("energy   {:.8} -> {:.8}", first.energy_modified, last.energy_modified);
    }

    let last_snapshot = snapshot_path(&out_dir, out.state.step);
    if last_snapshot.exists() {
        let (phi, t) = read_field(&last_snapshot)?;
        println!(
            "snapshot at t = {t}: n = {}, range [{:.4}, {:.4}]",
            phi.grid().n(),
            phi.min(),
            phi.max()
        );
    }
    Ok(())
}
