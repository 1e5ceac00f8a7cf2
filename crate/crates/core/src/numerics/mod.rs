//! Domains, measures, quadrature rules and integration with error estimates.

pub mod domain;
pub mod integrate;
pub mod measure;
pub mod quadrature;
pub mod recurrence;

use thiserror::Error;

use crate::funcmodel::FuncModelError;

pub use domain::{Domain, Exhaustion};
pub use integrate::{
    integrate, integrate_complex, integrate_fn, lp_norm, lp_norm_fn, probe_integrand,
    probe_log_integrand, IntegralEstimate, ProbeMode, ShellReport, ShellVerdict,
};
pub use measure::{Atom, MeasureSpec};
pub use quadrature::{
    build_quadrature, build_quadrature_with, Exactness, QuadratureKind, QuadratureRule,
    RuleOptions, TailSpec,
};
pub use recurrence::Recurrence;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum NumericsError {
    #[error("quadrature kind {kind:?} is incompatible with the domain: {reason}")]
    IncompatibleKind {
        kind: QuadratureKind,
        reason: String,
    },
    #[error("quadrature order must be at least 1, got {0}")]
    InvalidOrder(usize),
    #[error("non-finite integrand value at {point:?}")]
    NonFinite { point: Vec<f64> },
    #[error("integral diverges near {location} (shell mass ratio {ratio:.3})")]
    Divergent { location: String, ratio: f64 },
    #[error("invalid domain: {0}")]
    InvalidDomain(String),
    #[error("invalid measure: {0}")]
    InvalidMeasure(String),
    #[error("invalid exponent p = {0}")]
    InvalidExponent(f64),
    #[error(transparent)]
    Field(#[from] FuncModelError),
}
