//! Double-well physics, the EQ/SAV auxiliary variables, the nonlocal
//! constraint quantities and the discrete energies.
//!
//! Mobility is a constant scalar and the domain is the unit square, so the
//! Lagrange multiplier reduces to the quadrature of the chemical potential.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::grid::{grad_inner, inner, quad, Field};

/// How the volume constraint is imposed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Constraint {
    /// Plain Allen-Cahn, no volume constraint.
    Classic,
    /// Quadratic penalty on the volume drift, strength `eta`.
    Penalty,
    /// Nonlocal Lagrange multiplier, exact volume conservation.
    Lagrange,
}

/// Energy quadratization flavour.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Method {
    /// Pointwise auxiliary field `q`.
    Eq,
    /// Scalar auxiliary variable `r`.
    Sav,
}

impl Constraint {
    pub const ALL: [Constraint; 3] = [Constraint::Classic, Constraint::Penalty, Constraint::Lagrange];
}

impl Method {
    pub const ALL: [Method; 2] = [Method::Eq, Method::Sav];
}

impl fmt::Display for Constraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Constraint::Classic => "classic",
            Constraint::Penalty => "penalty",
            Constraint::Lagrange => "lagrange",
        })
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Eq => "eq",
            Method::Sav => "sav",
        })
    }
}

impl FromStr for Constraint {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "classic" => Ok(Constraint::Classic),
            "penalty" => Ok(Constraint::Penalty),
            "lagrange" => Ok(Constraint::Lagrange),
            other => Err(Error::Config(format!("unknown constraint `{other}`"))),
        }
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "eq" => Ok(Method::Eq),
            "sav" => Ok(Method::Sav),
            other => Err(Error::Config(format!("unknown method `{other}`"))),
        }
    }
}

/// Physical and scheme constants.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    /// Gradient-energy (conformational entropy) coefficient.
    pub gamma1: f64,
    /// Double-well strength.
    pub gamma2: f64,
    pub mobility: f64,
    /// Penalty strength; only read when `constraint` is `Penalty`.
    pub eta: f64,
    /// Shift keeping the quadratization radicand positive.
    pub c0: f64,
    pub constraint: Constraint,
    pub method: Method,
}

impl Default for ModelParams {
    /// Drop-merging parameters.
    fn default() -> Self {
        ModelParams {
            gamma1: 0.02,
            gamma2: 100.0,
            mobility: 1.0,
            eta: 1.0e4,
            c0: 1.0e4,
            constraint: Constraint::Lagrange,
            method: Method::Eq,
        }
    }
}

impl ModelParams {
    /// Parameters of the cosine mesh-refinement study.
    pub fn refinement_study(constraint: Constraint, method: Method) -> Self {
        ModelParams {
            gamma1: 0.2,
            gamma2: 10.0,
            mobility: 1.0e-3,
            constraint,
            method,
            ..Default::default()
        }
    }

    /// Parameters of the four-drop merging experiment.
    pub fn drop_merge(constraint: Constraint, method: Method) -> Self {
        ModelParams {
            constraint,
            method,
            ..Default::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("gamma1", self.gamma1),
            ("gamma2", self.gamma2),
            ("mobility", self.mobility),
            ("c0", self.c0),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::Config(format!("{name} must be positive and finite, got {v}")));
            }
        }
        if self.constraint == Constraint::Penalty && !(self.eta > 0.0 && self.eta.is_finite()) {
            return Err(Error::Config(format!(
                "eta must be positive for the penalty constraint, got {}",
                self.eta
            )));
        }
        if !(self.eta >= 0.0) {
            return Err(Error::Config(format!("eta must be nonnegative, got {}", self.eta)));
        }
        Ok(())
    }
}

/// `f(φ) = γ₂ φ² (1 - φ)²` and its derivative.
pub fn double_well(phi: f64, gamma2: f64) -> (f64, f64) {
    let a = phi * (1.0 - phi);
    (gamma2 * a * a, 2.0 * gamma2 * a * (1.0 - 2.0 * phi))
}

/// `f(φ) - γ₂ φ²` and its derivative: the part of the bulk energy handed to
/// the auxiliary variable.
fn shifted_well(phi: f64, gamma2: f64) -> (f64, f64) {
    let (f, fp) = double_well(phi, gamma2);
    (f - gamma2 * phi * phi, fp - 2.0 * gamma2 * phi)
}

/// Pointwise EQ variables `q = sqrt(f - γ₂φ² + C₀)` and `g = dq/dφ`.
pub fn eq_aux(phi: f64, p: &ModelParams) -> Result<(f64, f64)> {
    let (w, wp) = shifted_well(phi, p.gamma2);
    let radicand = w + p.c0;
    if !(radicand > 0.0) {
        return Err(Error::NonpositiveRadicand { radicand, phi });
    }
    let q = radicand.sqrt();
    Ok((q, wp / (2.0 * q)))
}

/// [`eq_aux`] applied to every stored value (ghosts included).
pub fn eq_aux_field(phi: &Field, p: &ModelParams) -> Result<(Field, Field)> {
    let mut q = Field::zeros(phi.grid());
    let mut g = Field::zeros(phi.grid());
    let n = phi.grid().stride();
    for i in 0..n {
        for j in 0..n {
            let (qv, gv) = eq_aux(phi.get(i, j), p)?;
            q.set(i, j, qv);
            g.set(i, j, gv);
        }
    }
    Ok((q, g))
}

/// SAV quantities for a field.
#[derive(Debug, Clone)]
pub struct SavAux {
    /// `E₁(φ) = [1 ⋆ (f(φ) - γ₂φ²)]`
    pub e1: f64,
    /// `r = sqrt(E₁ + C₀)`
    pub r: f64,
    /// `s = (f'(φ) - 2γ₂φ) / (2 r)`
    pub s: Field,
}

pub fn sav_aux(phi: &Field, p: &ModelParams) -> Result<SavAux> {
    let e1 = quad(&phi.map(|v| shifted_well(v, p.gamma2).0));
    let radicand = e1 + p.c0;
    if !(radicand > 0.0) {
        return Err(Error::NonpositiveRadicand {
            radicand,
            phi: quad(phi),
        });
    }
    let r = radicand.sqrt();
    let s = phi.map(|v| shifted_well(v, p.gamma2).1 / (2.0 * r));
    Ok(SavAux { e1, r, s })
}

/// Penalty variable `ζ = √η ([1 ⋆ φ] - V₀)`.
pub fn zeta_of(phi: &Field, v0: f64, eta: f64) -> f64 {
    eta.sqrt() * (quad(phi) - v0)
}

/// Lagrange multiplier for constant mobility: the domain mean of `μ`.
pub fn lagrange_multiplier(mu: &Field) -> f64 {
    quad(mu) / mu.grid().area()
}

/// Auxiliary variable carried by a scheme.
#[derive(Debug, Clone, PartialEq)]
pub enum Auxiliary {
    Eq { q: Field },
    Sav { r: f64 },
}

/// Evolving state of a time stepper.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeState {
    /// φⁿ
    pub phi: Field,
    /// φⁿ⁻¹; equal to φⁿ before the first step.
    pub phi_prev: Field,
    pub aux: Auxiliary,
    /// Present iff the constraint is `Penalty`.
    pub zeta: Option<f64>,
    /// Initial volume.
    pub v0: f64,
    pub step: usize,
}

impl SchemeState {
    /// Initializes the auxiliaries exactly from `phi0`: `q⁰ = q(φ⁰)` or
    /// `r⁰ = sqrt(E₁(φ⁰) + C₀)`, `ζ⁰ = 0`, `V₀ = [1 ⋆ φ⁰]`.
    pub fn initialize(phi0: Field, p: &ModelParams) -> Result<Self> {
        p.validate()?;
        if !phi0.is_finite() {
            return Err(Error::Config("initial field has non-finite values".into()));
        }
        let phi0 = phi0.with_neumann_bc();
        let aux = match p.method {
            Method::Eq => Auxiliary::Eq {
                q: eq_aux_field(&phi0, p)?.0,
            },
            Method::Sav => Auxiliary::Sav {
                r: sav_aux(&phi0, p)?.r,
            },
        };
        let zeta = (p.constraint == Constraint::Penalty).then_some(0.0);
        Ok(SchemeState {
            v0: quad(&phi0),
            phi_prev: phi0.clone(),
            phi: phi0,
            aux,
            zeta,
            step: 0,
        })
    }

    pub fn volume(&self) -> f64 {
        quad(&self.phi)
    }
}

/// Discrete energies of a state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Energy {
    /// Quadratized energy expressed through the auxiliary variables; the
    /// schemes dissipate this quantity unconditionally.
    pub modified: f64,
    /// Free energy evaluated directly from φ, reported for comparison. No
    /// monotonicity is guaranteed for it.
    pub original: f64,
}

pub fn discrete_energy(state: &SchemeState, p: &ModelParams) -> Energy {
    let phi = &state.phi;
    let gradient = 0.5 * p.gamma1 * grad_inner(phi, phi);
    let sc0 = p.c0.sqrt();
    let auxiliary = match &state.aux {
        // ‖q‖² - C₀|Ω| evaluated cellwise as (q - √C₀)(q + √C₀) to avoid
        // cancelling two O(C₀) sums.
        Auxiliary::Eq { q } => quad(&q.map(|v| (v - sc0) * (v + sc0))),
        Auxiliary::Sav { r } => (r - sc0) * (r + sc0),
    };
    let mut modified = gradient + p.gamma2 * inner(phi, phi) + auxiliary;
    let mut original = gradient + quad(&phi.map(|v| double_well(v, p.gamma2).0));
    if p.constraint == Constraint::Penalty {
        let zeta = state.zeta.unwrap_or(0.0);
        modified += 0.5 * zeta * zeta;
        let drift = quad(phi) - state.v0;
        original += 0.5 * p.eta * drift * drift;
    }
    Energy { modified, original }
}
