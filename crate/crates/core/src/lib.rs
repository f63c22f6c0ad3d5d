//! Linear, second-order, energy-stable finite-difference solvers for the
//! Allen-Cahn equation with nonlocal volume constraints.
//!
//! The free energy `∫ γ₁/2 |∇φ|² + γ₂ φ²(1-φ)²` is quadratized either
//! pointwise (EQ, auxiliary field `q`) or globally (SAV, scalar `r`), and the
//! volume `∫ φ` is either left free, penalized, or held fixed by a Lagrange
//! multiplier. Every combination is advanced with a Crank-Nicolson step that
//! needs one symmetric positive definite solve plus at most two rank-one
//! corrections.
//!
//! ```no_run
//! use acnl::{experiments, Constraint, ExperimentConfig, Method};
//!
//! let cfg = ExperimentConfig {
//!     n: 128,
//!     dt: 1e-3,
//!     t_end: 1.0,
//!     ..ExperimentConfig::drop_merge(Constraint::Lagrange, Method::Sav)
//! };
//! let out = experiments::simulate(&cfg)?;
//! println!("final volume {}", out.state.volume());
//! # Ok::<(), acnl::Error>(())
//! ```
//!
//! Modules, bottom up: [`grid`] (mesh, ghost cells, discrete operators),
//! [`model`] (potentials, auxiliary variables, energies), [`linsolve`] (CG and
//! Woodbury), [`schemes`] (time steppers), [`experiments`] (initial
//! conditions, drop merging, convergence studies) and [`iofmt`] (files).

pub mod error;
pub mod experiments;
pub mod grid;
pub mod iofmt;
pub mod linsolve;
pub mod model;
pub mod schemes;

pub use error::{Error, Result};
pub use experiments::{ConvergenceRow, ExperimentConfig, InitialCondition};
pub use grid::{Field, Grid, Norm};
pub use linsolve::SolverOptions;
pub use model::{Constraint, Energy, Method, ModelParams, SchemeState};
pub use schemes::StepReport;
