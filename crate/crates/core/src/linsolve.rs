//! Matrix-free solves of the per-step linear systems.
//!
//! Every scheme reduces to `(A + Σ cₖ uₖ [1 ⋆ vₖ ·]) x = b` where `A` is a
//! local, symmetric positive definite operator
//! `α I - β Δ_h + diag(d)` and the sum holds at most two rank-one nonlocal
//! corrections. `A` is inverted by conjugate gradients; the corrections are
//! folded in with the Sherman-Morrison-Woodbury identity, which costs one
//! extra CG solve per term plus a tiny dense capacitance system.

use crate::error::{Error, Result};
use crate::grid::{inner, quad, Field, Grid};

/// Capacitance determinants below this magnitude are treated as singular.
pub const SINGULAR_CAPACITANCE: f64 = 1e-14;

/// `α x - β Δ_h x + d ⊙ x` with homogeneous Neumann boundaries.
#[derive(Debug, Clone)]
pub struct LocalOperator {
    pub grid: Grid,
    pub alpha: f64,
    pub beta: f64,
    pub diag: Option<Field>,
}

/// One nonlocal correction `x ↦ coeff · direction · [1 ⋆ (weight ⊙ x)]`.
#[derive(Debug, Clone)]
pub struct RankOneTerm {
    pub direction: Field,
    pub weight: Field,
    pub coeff: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverOptions {
    /// Relative residual target `‖Ax - b‖₂ ≤ tol ‖b‖₂`.
    pub tol: f64,
    /// Optional absolute bound on the residual of the full corrected system;
    /// the tighter of the two targets applies.
    pub abs_tol: Option<f64>,
    /// Iteration cap; `None` means `10 n`.
    pub maxit: Option<usize>,
    /// Diagonal (Jacobi) preconditioning.
    pub jacobi: bool,
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            tol: 1e-12,
            abs_tol: None,
            maxit: None,
            jacobi: false,
        }
    }
}

impl SolverOptions {
    pub fn with_tol(tol: f64) -> Self {
        SolverOptions {
            tol,
            ..Default::default()
        }
    }

    fn maxit(&self, grid: Grid) -> usize {
        self.maxit.unwrap_or(10 * grid.n())
    }
}

#[derive(Debug, Clone)]
pub struct Solution {
    pub x: Field,
    /// CG iterations summed over all inner solves.
    pub iterations: usize,
}

impl LocalOperator {
    pub fn new(grid: Grid, alpha: f64, beta: f64, diag: Option<Field>) -> Self {
        LocalOperator {
            grid,
            alpha,
            beta,
            diag,
        }
    }

    /// Operator action on a field whose ghost ring is already consistent.
    fn apply_into(&self, x: &Field, out: &mut Field) {
        let g = self.grid;
        let n = g.n();
        let s = g.stride();
        let c = self.beta / (g.h() * g.h());
        let v = x.values();
        let d = self.diag.as_ref().map(Field::values);
        for i in 1..=n {
            for j in 1..=n {
                let k = g.idx(i, j);
                let lap = v[k + s] + v[k - s] + v[k + 1] + v[k - 1] - 4.0 * v[k];
                let mut y = self.alpha * v[k] - c * lap;
                if let Some(d) = d {
                    y += d[k] * v[k];
                }
                out.set(i, j, y);
            }
        }
        out.apply_neumann_bc();
    }

    /// Diagonal of the assembled matrix, for Jacobi preconditioning.
    fn diagonal(&self) -> Field {
        let g = self.grid;
        let n = g.n();
        let c = self.beta / (g.h() * g.h());
        let mut out = Field::zeros(g);
        for i in 1..=n {
            for j in 1..=n {
                let neighbours = [i > 1, i < n, j > 1, j < n].iter().filter(|&&b| b).count();
                let mut v = self.alpha + c * neighbours as f64;
                if let Some(d) = &self.diag {
                    v += d.get(i, j);
                }
                out.set(i, j, v);
            }
        }
        out.apply_neumann_bc();
        out
    }
}

/// Applies the local operator after re-imposing the Neumann ghost ring on `x`.
pub fn apply_local(a: &LocalOperator, x: &Field) -> Field {
    let xb = x.clone().with_neumann_bc();
    let mut out = Field::zeros(a.grid);
    a.apply_into(&xb, &mut out);
    out
}

/// Applies the local operator plus the rank-one corrections.
pub fn apply_corrected(a: &LocalOperator, terms: &[RankOneTerm], x: &Field) -> Field {
    let xb = x.clone().with_neumann_bc();
    let mut out = apply_local(a, &xb);
    for t in terms {
        let w = quad(&t.weight.zip_map(&xb, |a, b| a * b));
        out.axpy(t.coeff * w, &t.direction);
    }
    out
}

/// Conjugate gradients on the local operator, starting from zero.
pub fn cg_solve(a: &LocalOperator, b: &Field, opts: &SolverOptions) -> Result<Solution> {
    let b = b.clone().with_neumann_bc();
    let b_norm = inner(&b, &b).sqrt();
    let mut x = Field::zeros(a.grid);
    if b_norm == 0.0 {
        return Ok(Solution { x, iterations: 0 });
    }
    let target = opts.tol * b_norm;
    let inv_diag = opts.jacobi.then(|| a.diagonal().map(|d| 1.0 / d));
    let precondition = |r: &Field| match &inv_diag {
        Some(m) => r.zip_map(m, |r, m| r * m),
        None => r.clone(),
    };

    let mut r = b;
    let mut z = precondition(&r);
    let mut p = z.clone();
    let mut rz = inner(&r, &z);
    let mut ap = Field::zeros(a.grid);
    let maxit = opts.maxit(a.grid);
    let mut res = b_norm;
    for it in 1..=maxit {
        a.apply_into(&p, &mut ap);
        let pap = inner(&p, &ap);
        let step = rz / pap;
        x.axpy(step, &p);
        r.axpy(-step, &ap);
        res = inner(&r, &r).sqrt();
        if res <= target {
            return Ok(Solution { x, iterations: it });
        }
        z = precondition(&r);
        let rz_new = inner(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        p.scale(beta);
        p.axpy(1.0, &z);
    }
    Err(Error::NoConvergence {
        maxit,
        residual: res / b_norm,
    })
}

/// Refinement sweeps allowed on top of the plain Woodbury solve.
const MAX_REFINEMENTS: usize = 4;

/// Solves `(A + Σ cₖ uₖ [1 ⋆ vₖ ·]) x = b` with at most two rank-one terms.
///
/// `y₀ = A⁻¹ b` and `yₖ = A⁻¹ uₖ` come from CG; the capacitance system
/// `(I + C V Y) z = C V y₀` is solved directly and `x = y₀ - Σ yₖ zₖ`.
/// When the rank-one part dominates `A` the subtraction loses digits, so the
/// residual of the full system is corrected by the same formula until it
/// meets the target. The same refinement runs without any rank-one term
/// when only `abs_tol` is out of reach of a single CG solve.
pub fn woodbury_solve(
    a: &LocalOperator,
    terms: &[RankOneTerm],
    b: &Field,
    opts: &SolverOptions,
) -> Result<Solution> {
    let active: Vec<RankOneTerm> = terms.iter().filter(|t| t.coeff != 0.0).cloned().collect();
    if active.len() > 2 {
        return Err(Error::Config(format!(
            "at most two rank-one terms are supported, got {}",
            active.len()
        )));
    }
    let mut iterations = 0;
    let mut ys = Vec::with_capacity(active.len());
    for t in &active {
        let sol = cg_solve(a, &t.direction, opts)?;
        iterations += sol.iterations;
        ys.push(sol.x);
    }
    let weighted = |v: &Field, y: &Field| quad(&v.zip_map(y, |a, b| a * b));

    let k = active.len();
    let mut cap = [[0.0; 2]; 2];
    for (row, t) in active.iter().enumerate() {
        for (col, y) in ys.iter().enumerate() {
            cap[row][col] = t.coeff * weighted(&t.weight, y) + if row == col { 1.0 } else { 0.0 };
        }
    }
    let det = match k {
        0 => 1.0,
        1 => cap[0][0],
        _ => cap[0][0] * cap[1][1] - cap[0][1] * cap[1][0],
    };
    if det.abs() < SINGULAR_CAPACITANCE {
        return Err(Error::SingularCapacitance { det });
    }

    let mut inverse = |rhs: &Field| -> Result<Field> {
        let base = cg_solve(a, rhs, opts)?;
        iterations += base.iterations;
        let mut c = [0.0; 2];
        for (row, t) in active.iter().enumerate() {
            c[row] = t.coeff * weighted(&t.weight, &base.x);
        }
        let z = match k {
            0 => [0.0; 2],
            1 => [c[0] / det, 0.0],
            _ => [
                (c[0] * cap[1][1] - cap[0][1] * c[1]) / det,
                (cap[0][0] * c[1] - cap[1][0] * c[0]) / det,
            ],
        };
        let mut x = base.x;
        for (y, zk) in ys.iter().zip(z) {
            x.axpy(-zk, y);
        }
        Ok(x)
    };

    let b = b.clone().with_neumann_bc();
    let b_norm = inner(&b, &b).sqrt();
    let target = match opts.abs_tol {
        Some(abs) => abs.min(opts.tol * b_norm),
        None => opts.tol * b_norm,
    };
    let mut x = inverse(&b)?;
    let mut sweeps = 0;
    loop {
        let mut r = b.clone();
        r.axpy(-1.0, &apply_corrected(a, &active, &x));
        let res = inner(&r, &r).sqrt();
        if res <= target {
            break;
        }
        if sweeps == MAX_REFINEMENTS {
            return Err(Error::NoConvergence {
                maxit: MAX_REFINEMENTS,
                residual: res / b_norm,
            });
        }
        x.axpy(1.0, &inverse(&r)?);
        sweeps += 1;
    }
    drop(inverse);
    Ok(Solution { x, iterations })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::laplacian;

    fn sample(grid: Grid, seed: f64) -> Field {
        Field::from_fn(grid, |x, y| (seed * x + 1.3 * y).sin() + 0.2 * (7.0 * x * y + seed).cos())
    }

    #[test]
    fn constant_is_scaled_by_alpha() {
        let g = Grid::new(6).unwrap();
        let a = LocalOperator::new(g, 2.5, 0.7, None);
        let y = apply_local(&a, &Field::constant(g, 3.0));
        assert!(y.interior().iter().all(|&v| (v - 7.5).abs() < 1e-12));
    }

    #[test]
    fn identity_operator() {
        let g = Grid::new(5).unwrap();
        let a = LocalOperator::new(g, 1.0, 0.0, None);
        let x = sample(g, 2.0);
        assert_eq!(apply_local(&a, &x).interior(), x.interior());
    }

    #[test]
    fn matches_field_operators() {
        let g = Grid::new(9).unwrap();
        let d = sample(g, 0.3).map(|v| v * v);
        let a = LocalOperator::new(g, 1.5, 0.25, Some(d.clone()));
        let x = sample(g, 4.0);
        let mut expected = x.clone();
        expected.scale(1.5);
        expected.axpy(-0.25, &laplacian(&x));
        expected = expected.zip_map(&d.zip_map(&x, |a, b| a * b), |a, b| a + b);
        for (u, v) in apply_local(&a, &x).interior().iter().zip(expected.interior()) {
            assert!((u - v).abs() < 1e-10 * (1.0 + v.abs()));
        }
    }

    #[test]
    fn cg_recovers_known_solution() {
        let g = Grid::new(16).unwrap();
        let a = LocalOperator::new(g, 10.0, 0.1, Some(sample(g, 1.0).map(|v| v * v)));
        let xs = sample(g, 3.0);
        let b = apply_local(&a, &xs);
        for jacobi in [false, true] {
            let opts = SolverOptions {
                tol: 1e-12,
                jacobi,
                ..Default::default()
            };
            let sol = cg_solve(&a, &b, &opts).unwrap();
            let err = sol.x.zip_map(&xs, |a, b| a - b);
            assert!(crate::grid::norm(&err, crate::grid::Norm::Linf) < 1e-10);
            assert!(sol.iterations > 0);
        }
    }

    #[test]
    fn cg_zero_rhs() {
        let g = Grid::new(8).unwrap();
        let a = LocalOperator::new(g, 1.0, 1.0, None);
        let sol = cg_solve(&a, &Field::zeros(g), &SolverOptions::default()).unwrap();
        assert_eq!(sol.iterations, 0);
        assert!(sol.x.values().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn cg_reports_exhausted_budget() {
        let g = Grid::new(32).unwrap();
        let a = LocalOperator::new(g, 1e-6, 1.0, None);
        let opts = SolverOptions {
            tol: 1e-14,
            maxit: Some(3),
            ..Default::default()
        };
        match cg_solve(&a, &sample(g, 5.0), &opts) {
            Err(Error::NoConvergence { maxit, residual }) => {
                assert_eq!(maxit, 3);
                assert!(residual > 1e-14);
            }
            other => panic!("expected NoConvergence, got {other:?}"),
        }
    }

    #[test]
    fn woodbury_reduces_to_cg() {
        let g = Grid::new(8).unwrap();
        let a = LocalOperator::new(g, 3.0, 0.5, None);
        let b = sample(g, 1.7);
        let opts = SolverOptions::default();
        let plain = cg_solve(&a, &b, &opts).unwrap();
        let empty = woodbury_solve(&a, &[], &b, &opts).unwrap();
        assert_eq!(plain.x, empty.x);
        let zero = RankOneTerm {
            direction: sample(g, 2.0),
            weight: sample(g, 3.0),
            coeff: 0.0,
        };
        let with_zero = woodbury_solve(&a, &[zero], &b, &opts).unwrap();
        assert_eq!(plain.x, with_zero.x);
    }

    #[test]
    fn woodbury_residual_bound() {
        let g = Grid::new(12).unwrap();
        let a = LocalOperator::new(g, 2.0, 0.3, Some(sample(g, 0.5).map(|v| v * v)));
        let terms = [
            RankOneTerm {
                direction: Field::constant(g, 1.0),
                weight: sample(g, 2.2).map(|v| v + 1.0),
                coeff: -0.8,
            },
            RankOneTerm {
                direction: sample(g, 0.9),
                weight: sample(g, 0.9),
                coeff: 1.0,
            },
        ];
        let b = sample(g, 6.0);
        let opts = SolverOptions::default();
        let sol = woodbury_solve(&a, &terms, &b, &opts).unwrap();
        let r = apply_corrected(&a, &terms, &sol.x).zip_map(&b, |a, b| a - b);
        assert!(inner(&r, &r).sqrt() <= 10.0 * opts.tol * inner(&b, &b).sqrt());
    }

    #[test]
    fn woodbury_detects_singular_capacitance() {
        // A = I, correction -u [1 ⋆ u ·] with [1 ⋆ u²] = 1 makes I - u uᵀ singular.
        let g = Grid::new(4).unwrap();
        let a = LocalOperator::new(g, 1.0, 0.0, None);
        let u = Field::constant(g, 1.0);
        let term = RankOneTerm {
            direction: u.clone(),
            weight: u.clone(),
            coeff: -1.0,
        };
        let res = woodbury_solve(&a, &[term], &u, &SolverOptions::with_tol(1e-14));
        assert!(matches!(res, Err(Error::SingularCapacitance { .. })), "{res:?}");
    }

    #[test]
    fn woodbury_rejects_three_terms() {
        let g = Grid::new(4).unwrap();
        let a = LocalOperator::new(g, 1.0, 0.0, None);
        let t = RankOneTerm {
            direction: Field::constant(g, 1.0),
            weight: Field::constant(g, 1.0),
            coeff: 0.1,
        };
        let terms = [t.clone(), t.clone(), t];
        assert!(woodbury_solve(&a, &terms, &Field::constant(g, 1.0), &SolverOptions::default()).is_err());
    }
}
