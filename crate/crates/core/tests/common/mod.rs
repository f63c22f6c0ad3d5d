//! Shared helpers: a dense reference solver and seeded random fields.
#![allow(dead_code)]

use acnl::linsolve::{apply_corrected, LocalOperator, RankOneTerm};
use acnl::{Field, Grid};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

pub fn rng(seed: u64) -> StdRng {
    StdRng::seed_from_u64(seed)
}

/// Interior values uniform in `[lo, hi)`, ghost ring mirrored.
pub fn random_field(grid: Grid, rng: &mut StdRng, lo: f64, hi: f64) -> Field {
    let values: Vec<f64> = (0..grid.n() * grid.n()).map(|_| rng.gen_range(lo..hi)).collect();
    Field::from_interior(grid, &values).unwrap()
}

/// Assembles the corrected operator column by column by applying it to unit
/// interior vectors.
pub fn assemble(op: &LocalOperator, terms: &[RankOneTerm], grid: Grid) -> DMatrix<f64> {
    let m = grid.n() * grid.n();
    let mut a = DMatrix::zeros(m, m);
    let mut e = vec![0.0; m];
    for col in 0..m {
        e[col] = 1.0;
        let column = apply_corrected(op, terms, &Field::from_interior(grid, &e).unwrap()).interior();
        for (row, v) in column.into_iter().enumerate() {
            a[(row, col)] = v;
        }
        e[col] = 0.0;
    }
    a
}

/// Dense LU solve of the assembled system.
pub fn dense_solve(op: &LocalOperator, terms: &[RankOneTerm], b: &Field) -> Vec<f64> {
    let a = assemble(op, terms, b.grid());
    let rhs = DVector::from_vec(b.interior());
    a.lu().solve(&rhs).expect("dense system is singular").as_slice().to_vec()
}

pub fn rel_diff(x: &[f64], y: &[f64]) -> f64 {
    let num: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
    let den: f64 = y.iter().map(|b| b * b).sum::<f64>().sqrt();
    if den == 0.0 {
        num
    } else {
        num / den
    }
}

pub fn max_abs_diff(f: &Field, c: f64) -> f64 {
    f.interior().iter().fold(0.0, |m, v| m.max((v - c).abs()))
}
