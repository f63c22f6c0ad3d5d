//! Driving the time steppers by hand.
//!
//! Initializes a scheme state, advances it step by step and prints the
//! volume, both energies and the worst scheme residual of every tenth step.
//! Useful as a template when the experiment harness is too coarse.
//!
//! ```bash
//! cargo run --release --example stepping -- [eq|sav] [classic|penalty|lagrange]
//! ```

use acnl::experiments::ic_drops;
use acnl::model::{ModelParams, SchemeState};
use acnl::schemes::{advance, initial_report, StepReport};
use acnl::{Constraint, Grid, Method, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let args: Vec<String> = std::env::args().skip(1).collect();
    let method: Method = args.first().map(|s| s.parse()).transpose()?.unwrap_or(Method::Sav);
    let constraint: Constraint = args.get(1).map(|s| s.parse()).transpose()?.unwrap_or(Constraint::Penalty);

    let p = ModelParams::drop_merge(constraint, method);
    let state = SchemeState::initialize(ic_drops(Grid::new(64)?), &p)?;
    let show = |r: &StepReport| {
        println!(
            "{:>4} {:>6.3} {:>14.10} {:>12.6} {:>12.6} {:>10.2e}",
            r.step,
            r.t,
            r.volume,
            r.energy.modified,
            r.energy.original,
            r.residual_ratio()
        )
    };

    println!("{method}-{constraint}");
    println!("{:>4} {:>6} {:>14} {:>12} {:>12} {:>10}", "step", "t", "volume", "E modified", "E original", "residual");
    show(&initial_report(&state, &p));
    let end = advance(state, &p, 1e-3, 100, &SolverOptions::default(), |r| {
        if r.step % 10 == 0 {
            show(r)
        }
    })?;
    println!("finished after {} steps", end.step);
    Ok(())
}
