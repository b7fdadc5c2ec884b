//! Numerical laboratory for the holonomy of short loops.
//!
//! The crate computes exact holonomy of loops in principal bundles over
//! Euclidean, Riemannian-normal-coordinate and sub-Riemannian model spaces,
//! evaluates asymptotic holonomy expansions (the Euclidean third-order
//! functional, gauge-free weighted Taylor functionals, and selector-modified
//! fifth-order functionals on step-2 models), and certifies the predicted
//! error-decay orders in loop length via dilation sweeps.
//!
//! Module map:
//!
//! * [`algebra`] — matrix Lie algebras inside gl(q, ℂ), operator norms.
//! * [`liegroup`] — exp/log, dexp-inverse series, transport ODE, Picard bound.
//! * [`jet`] / [`expr`] / [`field`] — truncated multivariate Taylor
//!   arithmetic, closed-form scalar fields, and 𝔤-valued fields built on them.
//! * [`gauge`] — connections in a gauge, curvature, gauge transformations.
//! * [`loops`] — loops, lengths, dilations, moment and radial-disk integrals.
//! * [`models`] — built-in geometries: ℝⁿ, Heisenberg, Hopf/SU(2), normal
//!   coordinates.
//! * [`holonomy`] — the transport of a connection along a loop.
//! * [`expansion`] — the approximation functionals and selector machinery.
//! * [`experiment`] — dilation sweeps, order fitting, report emission.

pub mod algebra;
pub mod expansion;
pub mod experiment;
pub mod expr;
pub mod field;
pub mod gauge;
pub mod holonomy;
pub mod jet;
pub mod liegroup;
pub mod loops;
pub mod models;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("non-finite input in {0}")]
    NonFinite(&'static str),
    #[error("outside the principal logarithm domain (‖a − I‖ = {0:.3e})")]
    LogDomain(f64),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("missing capability: {0}")]
    Capability(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("curve is not horizontal (vertical defect {0:.3e}); length is infinite")]
    NonHorizontal(f64),
    #[error("insufficient data: {0}")]
    InsufficientData(String),
    #[error("config error: {0}")]
    Config(String),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
