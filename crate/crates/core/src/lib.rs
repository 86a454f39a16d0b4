// SPDX-License-Identifier: Apache-2.0

//! Full counting statistics of boson exchange through a single bosonic site
//! coupled to two squeezed thermal reservoirs whose temperatures are driven
//! periodically.
//!
//! The cumulant generating function of the net number of bosons taken from
//! the left reservoir splits, under adiabatic driving, into a dynamic part
//! (the period average of the dominant eigenvalue of the tilted generator)
//! and a geometric part (a Berry-curvature flux through the loop traced by
//! the two temperatures). This crate evaluates both, cross-checks the
//! geometric part along three independent routes, validates the adiabatic
//! decomposition against finite-time propagation and kinetic Monte Carlo,
//! and evaluates the fluctuation-theorem and uncertainty-relation
//! consequences.
//!
//! Units: rates and angular frequencies in THz, time in ps, temperatures in
//! Kelvin, entropies in units of k_B.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod cumulants;
pub mod geometry;
pub mod model;
pub mod oracle;
pub mod report;
pub mod spectral;
pub mod thermo;
pub mod verify;

pub use cumulants::{DerivativeScheme, Estimate, Numerics, Order, QuadratureSpec};
pub use model::{BathSpec, DriveProtocol, ModelParams, Side};
pub use report::CumulantReport;
pub use spectral::{EigenSystem, TiltedGenerator};

/// Errors raised by the numerical pipeline.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },

    #[error("{what} outside its domain (value {value})")]
    Domain { what: &'static str, value: f64 },

    #[error("degenerate eigenvalues: gap {gap:e} below threshold")]
    Degenerate { gap: f64 },

    #[error("derivative estimate did not converge: tableau spread {spread:e} vs tolerance {tol:e}")]
    NonConvergence { spread: f64, tol: f64 },

    #[error("quadrature did not reach tolerance {tol:e} within {panels} panels (last change {change:e})")]
    Quadrature { tol: f64, panels: usize, change: f64 },

    #[error("reference cumulant of order {order} vanishes; use unequal base temperatures")]
    ReferenceZero { order: u32 },

    #[error("geometric correction undefined: dynamic flux {dynamic_flux:e}, affinity {affinity:e}")]
    UndefinedCorrection { dynamic_flux: f64, affinity: f64 },

    #[error("propagation runs do not match the lambda stencil: {0}")]
    StencilMismatch(String),

    #[error("step-size control failed at t = {t} ps (step {step:e})")]
    StepControl { t: f64, step: f64 },

    #[error("low-temperature regime violated: theta0/T = {ratio} < {required}")]
    Regime { ratio: f64, required: f64 },

    #[error("operation requires a driven protocol (omega > 0)")]
    Undriven,
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
