//! Event-driven simulator and analytic toolkit for a two-node stochastic
//! fluid network fed by heavy-tailed batch arrivals.
//!
//! The crate has five pillars:
//!
//! * [`dist`] — heavy-tailed jump-size families, integrated-tail transforms,
//!   geometric compound sums, and subexponentiality diagnostics.
//! * [`network`] — model parameters, derived closed-form quantities, stability
//!   classification, and direction-case classification.
//! * [`sim`] — exact piecewise-linear simulation of the reflected buffer
//!   process, the parallel-queue majorant, and stationary estimators with
//!   batch-means confidence intervals.
//! * [`asym`] — closed-form and Monte Carlo evaluators for the stationary
//!   tail bounds and exact asymptotics.
//! * [`fluid`] — the deterministic drain model used as an independent oracle
//!   for the single-big-jump event geometry.
//!
//! Replications across seeds run data-parallel through [`par`] (rayon by
//! default, sequential when the `parallel` feature is disabled).

// validation guards are written as !(v > 0.0) so NaN inputs are rejected too
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asym;
pub mod config;
pub mod dist;
pub mod fluid;
pub mod network;
pub mod par;
mod quad;
pub mod sim;

use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter `{name}` = {value}: {reason}")]
    InvalidParameter {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },
    #[error("network is unstable; no stationary distribution to estimate")]
    Unstable,
    #[error("operation requires strong stability (both net drifts positive)")]
    NotStronglyStable,
    #[error("direction case mismatch: expected {expected}, classified {got}")]
    DirectionCase {
        expected: &'static str,
        got: &'static str,
    },
    #[error("operation requires {required}, got {got}")]
    WrongModel {
        required: &'static str,
        got: &'static str,
    },
    #[error("numeric failure in {0}")]
    Numeric(&'static str),
    #[error("insufficient data: {0}")]
    Insufficient(&'static str),
}

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
