//! Temporal self-convergence of the four constrained schemes on the cosine
//! initial condition.
//!
//! ```bash
//! cargo run --release --example temporal_convergence            # n = 128
//! cargo run --release --example temporal_convergence -- 256     # full size
//! ```

use std::time::Instant;

use acnl::experiments::{converge_time, halving_dts};
use acnl::iofmt::convergence_table;
use acnl::{Constraint, ExperimentConfig, Method};

fn main() -> acnl::Result<()> {
    let n = std::env::args().nth(1).and_then(|a| a.parse().ok()).unwrap_or(128);
    let dts = halving_dts(0.1, 6);
    for method in Method::ALL {
        for constraint in [Constraint::Penalty, Constraint::Lagrange] {
            let cfg = ExperimentConfig {
                n,
                ..ExperimentConfig::refinement_study(constraint, method)
            };
            let start = Instant::now();
            let rows = converge_time(&cfg, &dts)?;
            println!("{method}-{constraint}, n = {n} ({:.1?})", start.elapsed());
            print!("{}", convergence_table(&rows));
            println!();
        }
    }
    Ok(())
}
