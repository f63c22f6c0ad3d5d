//! Crank-Nicolson time steppers for the EQ and SAV reformulations, with
//! classic, penalty and Lagrange volume handling.
//!
//! Each step eliminates the auxiliary updates into one linear system for the
//! increment `δ = φⁿ⁺¹ - φⁿ`:
//!
//! ```text
//! (1/(MΔt) + γ₂) δ - (γ₁/2) Δ_h δ + ḡ² δ          (EQ)
//!                                 + s̄ [1 ⋆ s̄ δ]     (SAV)
//!       + (η/2) [1 ⋆ δ]                             (penalty)
//!       - [1 ⋆ (γ₂ + ḡ²) δ]                         (Lagrange, EQ)
//!       - [1 ⋆ (γ₂ + [1 ⋆ s̄] s̄) δ]                 (Lagrange, SAV)
//!   = -(μ* + √η ζⁿ)  or  -(μ* - [1 ⋆ μ*])  or  -μ*
//! ```
//!
//! with `μ* = -γ₁ Δ_h φⁿ + 2γ₂ φⁿ + 2qⁿ ḡ` (EQ) or `... + 2rⁿ s̄` (SAV). The
//! nonlocal parts are rank-one and go through [`woodbury_solve`]. After the
//! solve the auxiliaries are advanced algebraically and the original,
//! un-eliminated scheme equations are re-evaluated; their residuals are part
//! of every [`StepReport`].

use crate::error::{Error, Result};
use crate::grid::{inner, laplacian, quad, Field};
use crate::linsolve::{woodbury_solve, LocalOperator, RankOneTerm, SolverOptions};
use crate::model::{
    discrete_energy, eq_aux_field, sav_aux, Auxiliary, Constraint, Energy, Method, ModelParams,
    SchemeState,
};

/// Bound on every scheme-equation residual, relative to `1 + ‖φⁿ⁺¹‖₂`.
pub const RESIDUAL_TOL: f64 = 1e-9;
/// Allowed growth of the modified energy per step, relative to `1 + |Fⁿ|`.
pub const ENERGY_TOL: f64 = 1e-10;

/// Residual of one un-eliminated scheme equation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Residual {
    pub equation: &'static str,
    /// Discrete L² norm for field equations, absolute value for scalar ones.
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub t: f64,
    pub volume: f64,
    pub energy: Energy,
    pub cg_iterations: usize,
    pub residuals: Vec<Residual>,
    /// `‖φⁿ⁺¹‖₂`, the scale of the residual bound.
    pub phi_norm: f64,
}

impl StepReport {
    /// Largest residual divided by `1 + ‖φⁿ⁺¹‖₂`.
    pub fn residual_ratio(&self) -> f64 {
        let worst = self.residuals.iter().map(|r| r.value).fold(0.0, f64::max);
        worst / (1.0 + self.phi_norm)
    }
}

/// Report describing a state before any step has been taken.
pub fn initial_report(state: &SchemeState, p: &ModelParams) -> StepReport {
    StepReport {
        step: state.step,
        t: 0.0,
        volume: state.volume(),
        energy: discrete_energy(state, p),
        cg_iterations: 0,
        residuals: Vec::new(),
        phi_norm: inner(&state.phi, &state.phi).sqrt(),
    }
}

/// Second-order extrapolation to the half step, `3/2 prev - 1/2 prev2`.
pub fn extrapolate(prev: &Field, prev2: &Field) -> Field {
    // written as a + (a - b)/2 so a constant sequence is reproduced exactly
    prev.zip_map(prev2, |a, b| a + 0.5 * (a - b))
}

fn midpoint(a: &Field, b: &Field) -> Field {
    a.zip_map(b, |a, b| 0.5 * (a + b))
}

/// `-γ₁ Δ_h φ + 2γ₂ φ`
fn linear_potential(phi: &Field, p: &ModelParams) -> Field {
    let mut mu = laplacian(phi);
    mu.scale(-p.gamma1);
    mu.axpy(2.0 * p.gamma2, phi);
    mu
}

/// The explicit direction `s̄ⁿ⁺¹ᐟ² = 3/2 s(φⁿ) - 1/2 s(φⁿ⁻¹)` used by SAV
/// steps, with each `s` carrying its own `√(E₁ + C₀)` normalization.
pub fn sav_direction(phi: &Field, phi_prev: &Field, p: &ModelParams) -> Result<Field> {
    Ok(extrapolate(&sav_aux(phi, p)?.s, &sav_aux(phi_prev, p)?.s))
}

/// First step from `φ⁰`: the same Crank-Nicolson update with the explicit
/// coefficient frozen at `φ⁰` (`ḡ = g(φ⁰)` or `s̄ = s(φ⁰)`).
pub fn startup_step(
    state: &SchemeState,
    p: &ModelParams,
    dt: f64,
    opts: &SolverOptions,
) -> Result<(SchemeState, StepReport)> {
    match p.method {
        Method::Eq => {
            let (_, gbar) = eq_aux_field(&state.phi, p)?;
            eq_update(state, p, dt, gbar, opts)
        }
        Method::Sav => {
            let sbar = sav_aux(&state.phi, p)?.s;
            sav_update(state, p, dt, sbar, opts)
        }
    }
}

/// One EQ step with `ḡ = 3/2 g(φⁿ) - 1/2 g(φⁿ⁻¹)`.
pub fn step_eq(
    state: &SchemeState,
    p: &ModelParams,
    dt: f64,
    opts: &SolverOptions,
) -> Result<(SchemeState, StepReport)> {
    let (_, g_now) = eq_aux_field(&state.phi, p)?;
    let (_, g_prev) = eq_aux_field(&state.phi_prev, p)?;
    eq_update(state, p, dt, extrapolate(&g_now, &g_prev), opts)
}

/// One SAV step with `s̄` from [`sav_direction`].
pub fn step_sav(
    state: &SchemeState,
    p: &ModelParams,
    dt: f64,
    opts: &SolverOptions,
) -> Result<(SchemeState, StepReport)> {
    let sbar = sav_direction(&state.phi, &state.phi_prev, p)?;
    sav_update(state, p, dt, sbar, opts)
}

/// Dispatches to the startup or the regular step.
pub fn step(
    state: &SchemeState,
    p: &ModelParams,
    dt: f64,
    opts: &SolverOptions,
) -> Result<(SchemeState, StepReport)> {
    if state.step == 0 {
        return startup_step(state, p, dt, opts);
    }
    match p.method {
        Method::Eq => step_eq(state, p, dt, opts),
        Method::Sav => step_sav(state, p, dt, opts),
    }
}

/// Runs `n_steps` steps, handing every report to `observer` in order.
///
/// Aborts with [`Error::InvariantViolation`] when a step produces
/// non-finite values, a scheme residual above [`RESIDUAL_TOL`], or an
/// increase of the modified energy beyond [`ENERGY_TOL`].
pub fn advance(
    mut state: SchemeState,
    p: &ModelParams,
    dt: f64,
    n_steps: usize,
    opts: &SolverOptions,
    mut observer: impl FnMut(&StepReport),
) -> Result<SchemeState> {
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!("time step must be positive, got {dt}")));
    }
    let mut energy = discrete_energy(&state, p).modified;
    for _ in 0..n_steps {
        let (next, report) = step(&state, p, dt, opts)?;
        let violation = |what: String| Error::InvariantViolation {
            step: report.step,
            what,
        };
        if !next.phi.is_finite() {
            return Err(violation("non-finite phase field".into()));
        }
        if report.residual_ratio() > RESIDUAL_TOL {
            return Err(violation(format!(
                "scheme residuals {:?} exceed {RESIDUAL_TOL:e} (1 + |phi|)",
                report.residuals
            )));
        }
        let grown = report.energy.modified - energy;
        if grown > ENERGY_TOL * (1.0 + energy.abs()) {
            return Err(violation(format!(
                "modified energy increased by {grown:e} (from {energy})"
            )));
        }
        energy = report.energy.modified;
        observer(&report);
        state = next;
    }
    Ok(state)
}

/// Rank-one term and right-hand-side shift for the volume constraint.
/// `lagrange_weight` is the pointwise weight whose quadrature against `δ`
/// equals `[1 ⋆ (μ - μ*)]`.
fn constraint_terms(
    state: &SchemeState,
    p: &ModelParams,
    mu_star: &Field,
    lagrange_weight: impl FnOnce() -> Field,
) -> (Option<RankOneTerm>, Field) {
    let grid = mu_star.grid();
    let one = Field::constant(grid, 1.0);
    let mut rhs = mu_star.clone();
    let term = match p.constraint {
        Constraint::Classic => None,
        Constraint::Penalty => {
            let zeta = state.zeta.unwrap_or(0.0);
            rhs.axpy(p.eta.sqrt() * zeta, &one);
            Some(RankOneTerm {
                direction: one.clone(),
                weight: one,
                coeff: 0.5 * p.eta,
            })
        }
        Constraint::Lagrange => {
            let mean = quad(mu_star) / grid.area();
            rhs.axpy(-mean, &one);
            Some(RankOneTerm {
                direction: one,
                weight: lagrange_weight(),
                coeff: -1.0 / grid.area(),
            })
        }
    };
    rhs.scale(-1.0);
    (term, rhs)
}

/// Adds an absolute solver target that keeps the `φ` equation residual a
/// decade below [`RESIDUAL_TOL`]. The linear system is that equation divided
/// by `M Δt`, and its right-hand side can be much larger than `φ` itself.
fn scheme_solver(state: &SchemeState, p: &ModelParams, dt: f64, opts: &SolverOptions) -> SolverOptions {
    let scale = 1.0 + inner(&state.phi, &state.phi).sqrt();
    let abs = 0.1 * RESIDUAL_TOL * scale / (p.mobility * dt);
    SolverOptions {
        abs_tol: Some(opts.abs_tol.map_or(abs, |a| a.min(abs))),
        ..*opts
    }
}

fn next_zeta(state: &SchemeState, p: &ModelParams, delta: &Field) -> Option<f64> {
    state.zeta.map(|z| z + p.eta.sqrt() * quad(delta))
}

fn eq_update(
    state: &SchemeState,
    p: &ModelParams,
    dt: f64,
    gbar: Field,
    opts: &SolverOptions,
) -> Result<(SchemeState, StepReport)> {
    let Auxiliary::Eq { q } = &state.aux else {
        return Err(Error::Config("EQ step on a state without the q field".into()));
    };
    let grid = state.phi.grid();
    let g2 = gbar.map(|g| g * g);

    let mut mu_star = linear_potential(&state.phi, p);
    mu_star = mu_star.zip_map(&q.zip_map(&gbar, |q, g| 2.0 * q * g), |a, b| a + b);
    let (term, rhs) = constraint_terms(state, p, &mu_star, || g2.map(|v| v + p.gamma2));

    let op = LocalOperator::new(grid, 1.0 / (p.mobility * dt) + p.gamma2, 0.5 * p.gamma1, Some(g2));
    let terms: Vec<RankOneTerm> = term.into_iter().collect();
    let sol = woodbury_solve(&op, &terms, &rhs, &scheme_solver(state, p, dt, opts))?;
    let delta = sol.x.with_neumann_bc();

    let mut phi = state.phi.clone();
    phi.axpy(1.0, &delta);
    let q_next = q.zip_map(&gbar.zip_map(&delta, |g, d| g * d), |a, b| a + b);
    let next = SchemeState {
        phi,
        phi_prev: state.phi.clone(),
        aux: Auxiliary::Eq { q: q_next },
        zeta: next_zeta(state, p, &delta),
        v0: state.v0,
        step: state.step + 1,
    };
    let report = report(state, &next, p, dt, &gbar, sol.iterations);
    Ok((next, report))
}

fn sav_update(
    state: &SchemeState,
    p: &ModelParams,
    dt: f64,
    sbar: Field,
    opts: &SolverOptions,
) -> Result<(SchemeState, StepReport)> {
    let Auxiliary::Sav { r } = state.aux else {
        return Err(Error::Config("SAV step on a state without the r variable".into()));
    };
    let grid = state.phi.grid();

    let mut mu_star = linear_potential(&state.phi, p);
    mu_star.axpy(2.0 * r, &sbar);
    let s_mass = quad(&sbar);
    let (term, rhs) = constraint_terms(state, p, &mu_star, || sbar.map(|s| p.gamma2 + s_mass * s));

    let op = LocalOperator::new(grid, 1.0 / (p.mobility * dt) + p.gamma2, 0.5 * p.gamma1, None);
    let mut terms = vec![RankOneTerm {
        direction: sbar.clone(),
        weight: sbar.clone(),
        coeff: 1.0,
    }];
    terms.extend(term);
    let sol = woodbury_solve(&op, &terms, &rhs, &scheme_solver(state, p, dt, opts))?;
    let delta = sol.x.with_neumann_bc();

    let mut phi = state.phi.clone();
    phi.axpy(1.0, &delta);
    let r_next = r + quad(&sbar.zip_map(&delta, |s, d| s * d));
    let next = SchemeState {
        phi,
        phi_prev: state.phi.clone(),
        aux: Auxiliary::Sav { r: r_next },
        zeta: next_zeta(state, p, &delta),
        v0: state.v0,
        step: state.step + 1,
    };
    let report = report(state, &next, p, dt, &sbar, sol.iterations);
    Ok((next, report))
}

/// Substitutes the new state back into the un-eliminated scheme equations.
/// `coef` is `ḡ` for EQ and `s̄` for SAV.
fn scheme_residuals(
    prev: &SchemeState,
    next: &SchemeState,
    p: &ModelParams,
    dt: f64,
    coef: &Field,
) -> Vec<Residual> {
    let delta = next.phi.zip_map(&prev.phi, |a, b| a - b);
    let l2 = |f: &Field| inner(f, f).sqrt();
    let mut out = Vec::with_capacity(3);

    let phi_half = midpoint(&next.phi, &prev.phi);
    let mut mu = linear_potential(&phi_half, p);
    match (&prev.aux, &next.aux) {
        (Auxiliary::Eq { q: q0 }, Auxiliary::Eq { q: q1 }) => {
            let q_half = midpoint(q1, q0);
            mu = mu.zip_map(&q_half.zip_map(coef, |q, g| 2.0 * q * g), |a, b| a + b);
            let rq = q1.zip_map(q0, |a, b| a - b).zip_map(&coef.zip_map(&delta, |g, d| g * d), |a, b| a - b);
            out.push(Residual {
                equation: "q",
                value: l2(&rq),
            });
        }
        (Auxiliary::Sav { r: r0 }, Auxiliary::Sav { r: r1 }) => {
            mu.axpy(r1 + r0, coef);
            let rr = r1 - r0 - quad(&coef.zip_map(&delta, |s, d| s * d));
            out.push(Residual {
                equation: "r",
                value: rr.abs(),
            });
        }
        _ => unreachable!("auxiliary kind changed during a step"),
    }
    match p.constraint {
        Constraint::Classic => {}
        Constraint::Penalty => {
            let z0 = prev.zeta.unwrap_or(0.0);
            let z1 = next.zeta.unwrap_or(0.0);
            mu = mu.map(|m| m + p.eta.sqrt() * 0.5 * (z0 + z1));
            out.push(Residual {
                equation: "zeta",
                value: (z1 - z0 - p.eta.sqrt() * quad(&delta)).abs(),
            });
        }
        Constraint::Lagrange => {
            let l = quad(&mu) / mu.grid().area();
            mu = mu.map(|m| m - l);
        }
    }
    let rphi = delta.zip_map(&mu, |d, m| d + dt * p.mobility * m);
    out.insert(
        0,
        Residual {
            equation: "phi",
            value: l2(&rphi),
        },
    );
    out
}

fn report(
    prev: &SchemeState,
    next: &SchemeState,
    p: &ModelParams,
    dt: f64,
    coef: &Field,
    cg_iterations: usize,
) -> StepReport {
    StepReport {
        step: next.step,
        t: next.step as f64 * dt,
        volume: next.volume(),
        energy: discrete_energy(next, p),
        cg_iterations,
        residuals: scheme_residuals(prev, next, p, dt, coef),
        phi_norm: inner(&next.phi, &next.phi).sqrt(),
    }
}
