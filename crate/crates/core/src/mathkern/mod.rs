//! Special functions and quadrature kernels shared by the analytical evaluators.
//!
//! Every evaluator reduces to nested semi-infinite integrals of the form
//! `∫₀^∞ (1/z)(1 − E[e^{−zX}]) E[e^{−zY}] dz`. The pieces here are:
//!
//! - [`integrate`] / [`integrate_semi_infinite`]: adaptive Gauss–Kronrod
//!   quadrature with global error control,
//! - [`incomplete_beta`]: the lower incomplete Beta integral
//!   `B(a, b, c) = ∫₀ᵃ t^{b−1}(1−t)^{c−1} dt` (limit first),
//! - [`hamdi_rate`]: the `E[log(1 + X/Y)]` identity for independent
//!   non-negative `X`, `Y` given their Laplace transforms.
//!
//! All rates are in nats.

mod hamdi;
mod quadrature;
mod special;

pub use hamdi::{hamdi_integral, hamdi_rate, Degenerate, GammaLaplace, LaplaceTransform};
pub use quadrature::{integrate, integrate_semi_infinite, try_integrate, try_integrate_semi_infinite, Integral, QuadratureSpec};
pub(crate) use special::incomplete_beta_split;
pub use special::{beta, incomplete_beta, incomplete_beta_quadrature, ln_gamma, one_minus_pow1p, pow1p_neg};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MathError {
    #[error("domain error in {function}: {reason}")]
    Domain { function: &'static str, reason: String },

    /// Refinement budget exhausted; `value` is the best estimate and
    /// `abs_error` the estimated absolute error that missed the tolerance.
    #[error("quadrature did not converge: value {value:e}, estimated error {abs_error:e} after {intervals} intervals")]
    NonConvergence { value: f64, abs_error: f64, intervals: usize },

    #[error("integrand returned non-finite value {value} at x = {x:e}")]
    NonFinite { x: f64, value: f64 },
}

impl MathError {
    pub(crate) fn domain(function: &'static str, reason: impl Into<String>) -> Self {
        MathError::Domain { function, reason: reason.into() }
    }
}
