//! Stochastic-geometry rate analysis for cooperative ISAC cellular networks.
//!
//! Analytical evaluators ([`commrate`], [`senserate`]) are checked against a
//! seeded Monte Carlo simulator ([`mcsim`]); [`paretoopt`] searches integer
//! allocations for the communication/sensing ASE frontier.

pub mod commrate;
pub mod mathkern;
pub mod mcsim;
pub mod netmodel;
pub mod paretoopt;
pub mod senserate;
pub mod validation;

use thiserror::Error;

pub use mathkern::{MathError, QuadratureSpec};
pub use netmodel::{FormulaVariant, NetworkParams, PerfPoint, ResourceAllocation, Violation};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Math(#[from] MathError),

    #[error("infeasible allocation: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    Infeasible(Vec<Violation>),

    #[error(transparent)]
    Simulation(#[from] mcsim::McError),

    #[error("invalid configuration: {0}")]
    Config(String),
}
