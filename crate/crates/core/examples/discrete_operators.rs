//! The discrete Laplacian, inner products and norms on the cell-centered grid.
//!
//! Applies the five-point Laplacian to `cos(πx)cos(πy)` on a sequence of
//! grids and prints the error against `-2π² cos(πx)cos(πy)`, then checks
//! summation by parts on a pair of smooth fields.
//!
//! ```bash
//! cargo run --release --example discrete_operators
//! ```

use std::f64::consts::PI;

use acnl::grid::{grad_inner, inner, laplacian, norm, quad};
use acnl::{Field, Grid, Norm};

fn main() -> Result<(), acnl::Error> {
    let u = |x: f64, y: f64| (PI * x).cos() * (PI * y).cos();

    println!("{:>5} {:>12} {:>6}", "n", "L2 error", "rate");
    let mut prev: Option<f64> = None;
    for n in [8, 16, 32, 64, 128, 256] {
        let grid = Grid::new(n)?;
        let lap = laplacian(&Field::from_fn(grid, u));
        let exact = Field::from_fn(grid, |x, y| -2.0 * PI * PI * u(x, y));
        let err = norm(&lap.zip_map(&exact, |a, b| a - b), Norm::L2);
        match prev {
            Some(p) => println!("{n:>5} {err:>12.4e} {:>6.3}", (p / err).log2()),
            None => println!("{n:>5} {err:>12.4e} {:>6}", "-"),
        }
        prev = Some(err);
    }

    let grid = Grid::new(32)?;
    let f = Field::from_fn(grid, |x, y| x * x * (1.0 - y) + (3.0 * y).sin());
    let g = Field::from_fn(grid, |x, y| (x - 0.3).exp() * y);
    println!();
    println!("-(lap f, g)   = {:.15}", -inner(&laplacian(&f), &g));
    println!("(grad f, grad g) = {:.15}", grad_inner(&f, &g));
    println!("quad(lap f)   = {:.3e}", quad(&laplacian(&f)));
    println!(
        "norms of f: L2 {:.6}, H1 {:.6}, max {:.6}",
        norm(&f, Norm::L2),
        norm(&f, Norm::H1),
        norm(&f, Norm::Linf)
    );
    Ok(())
}
