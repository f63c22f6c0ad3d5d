//! Spatial self-convergence of EQ-Lagrange on the cosine initial condition.
//! Fine solutions are restricted to the coarse grid by 2×2 cell averaging.
//!
//! ```bash
//! cargo run --release --example spatial_convergence
//! ```

use acnl::experiments::{converge_space, doubling_ns};
use acnl::iofmt::convergence_table;
use acnl::{Constraint, ExperimentConfig, Method};

fn main() -> acnl::Result<()> {
    let cfg = ExperimentConfig {
        dt: 1e-3,
        t_end: 0.1,
        ..ExperimentConfig::refinement_study(Constraint::Lagrange, Method::Eq)
    };
    let rows = converge_space(&cfg, &doubling_ns(8, 5))?;
    print!("{}", convergence_table(&rows));
    Ok(())
}
