//! Solving a local operator plus rank-one nonlocal corrections.
//!
//! Builds `α x - β Δx + d x + c₁ 1 [1 ⋆ w x] + c₂ s [1 ⋆ s x]`, the shape
//! of a Lagrange-constrained SAV step, solves it with CG plus the
//! Woodbury correction and prints the true residual of the full system.
//!
//! ```bash
//! cargo run --release --example woodbury -- [n]
//! ```

use std::f64::consts::PI;

use acnl::grid::inner;
use acnl::linsolve::{apply_corrected, woodbury_solve, LocalOperator, RankOneTerm};
use acnl::{Field, Grid, SolverOptions};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n: usize = std::env::args().nth(1).map(|s| s.parse()).transpose()?.unwrap_or(128);
    let grid = Grid::new(n)?;
    let dt = 1e-3;
    let phi = Field::from_fn(grid, |x, y| 0.5 + 0.4 * (2.0 * PI * x).cos() * (PI * y).cos());

    let op = LocalOperator::new(grid, 1.0 / dt + 1.0, 0.5 * 0.01, Some(phi.map(|v| v * v)));
    let one = Field::constant(grid, 1.0);
    let s = phi.map(|v| v * (1.0 - v) * (1.0 - 2.0 * v));
    let terms = [
        RankOneTerm {
            direction: one,
            weight: phi.map(|v| v * v + 1.0 / dt),
            coeff: -1.0,
        },
        RankOneTerm {
            direction: s.clone(),
            weight: s,
            coeff: 0.5,
        },
    ];
    let b = phi.map(|v| v / dt);

    for (label, opts) in [
        ("plain CG", SolverOptions::default()),
        ("Jacobi", SolverOptions { jacobi: true, ..Default::default() }),
    ] {
        let sol = woodbury_solve(&op, &terms, &b, &opts)?;
        let r = b.zip_map(&apply_corrected(&op, &terms, &sol.x), |a, c| a - c);
        println!(
            "{label:>8}: {} CG iterations, residual {:.3e} (|b| = {:.3e})",
            sol.iterations,
            inner(&r, &r).sqrt(),
            inner(&b, &b).sqrt()
        );
    }
    Ok(())
}
