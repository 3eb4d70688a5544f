//! `Q ≥ 2`: nulling cluster of the serving BS and its `Q − 1` nearest
//! neighbours, hole neglected, serving distance `R` and cluster radius `r_Q`
//! treated as independent.
//!
//! With `U = πλR² ~ Exp(1)` and `T = πλr_Q² ~ Γ(Q, 1)` the rederived
//! conditional transform is `exp(−T·G(z κ U^β T^{−α/2}))`, where
//! `G(w) = H(w, K, α, 1)` and `κ = (πλ)^{α/2−β}`.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::{decay_scaled, SenseIntegrandCtx};
use crate::commrate::h_function;
use crate::mathkern::{beta, incomplete_beta_split, ln_gamma, one_minus_pow1p, try_integrate_semi_infinite, MathError, QuadratureSpec};
use crate::netmodel::{FormulaVariant, NetworkParams, ResourceAllocation};
use crate::Error;

/// Quadrature route for the rederived `(R, r_Q)` average.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterPath {
    /// Only for `α = 2β`: the `T` integral is done analytically, leaving
    /// `∫₀^∞ Q (1 + v + G(z v^β))^{−(Q+1)} dv`.
    #[default]
    Reduced,
    /// Plain two-dimensional quadrature over `(U, T)`.
    General,
}

fn gamma_weight(t: f64, q: f64) -> f64 {
    ((q - 1.0) * t.ln() - t - ln_gamma(q)).exp()
}

/// Printed conditional exponent `πλ(r_Q²((1+w)^{−K} − 1) + K z^{2/β} R^{4α/β} B(w/(w+1), 1−2/β, K+2/β))`,
/// `w = z R^{2α} r_Q^{−β}`.
fn printed_exponent(ctx: &SenseIntegrandCtx, z: f64, r: f64, r_q: f64) -> Result<f64, MathError> {
    let (alpha, b, k) = (ctx.alpha, ctx.beta, ctx.k as f64);
    let w = z * r.powf(2.0 * alpha) * r_q.powf(-b);
    let ib = incomplete_beta_split(w / (w + 1.0), 1.0 / (w + 1.0), 1.0 - 2.0 / b, k + 2.0 / b)?;
    let first = -r_q * r_q * one_minus_pow1p(w, k);
    let second = k * z.powf(2.0 / b) * r.powf(4.0 * alpha / b) * ib;
    Ok(PI * ctx.lambda_b * (first + second))
}

/// `E_{R, r_Q}[E[e^{−z I_S} | R, r_Q]]` for `Q ≥ 2`.
pub fn cluster_interference_average(
    ctx: &SenseIntegrandCtx,
    z: f64,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
    path: ClusterPath,
) -> Result<f64, MathError> {
    if ctx.q < 2 {
        return Err(MathError::domain("sense_ase_qge2", format!("needs q >= 2, got {}", ctx.q)));
    }
    let (alpha, beta_exp, k, q) = (ctx.alpha, ctx.beta, ctx.k, ctx.q as f64);
    let pl = PI * ctx.lambda_b;
    let inner = spec.tightened(10.0);
    let kf = k as f64;
    // Large-argument slope of G: G(w) ≈ K B(1−2/α, K+2/α) w^{2/α}.
    let slope = kf * beta(1.0 - 2.0 / alpha, kf + 2.0 / alpha);
    let p = 2.0 * beta_exp / alpha;
    match (variant, path) {
        (FormulaVariant::Rederived, ClusterPath::Reduced) => {
            if !ctx.is_alpha_twice_beta() {
                return Err(MathError::domain("sense_ase_qge2", "reduced path needs alpha = 2 beta"));
            }
            let r = try_integrate_semi_infinite(
                |v| {
                    let g = h_function(z * v.powf(beta_exp), k, alpha, 1.0)?;
                    Ok(q * (1.0 + v + g).powf(-(q + 1.0)))
                },
                &decay_scaled(spec, slope * z.powf(2.0 / alpha), p),
            )?;
            Ok(r.value)
        }
        (FormulaVariant::Rederived, ClusterPath::General) => {
            let kappa = pl.powf(alpha / 2.0 - beta_exp);
            let r = try_integrate_semi_infinite(
                |t| {
                    if t == 0.0 {
                        return Ok(0.0);
                    }
                    let scale = z * kappa * t.powf(-alpha / 2.0);
                    let over_u = try_integrate_semi_infinite(
                        |u| Ok((-u - t * h_function(scale * u.powf(beta_exp), k, alpha, 1.0)?).exp()),
                        &decay_scaled(&inner, t * slope * scale.powf(2.0 / alpha), p),
                    )?;
                    Ok(gamma_weight(t, q) * over_u.value)
                },
                spec,
            )?;
            Ok(r.value)
        }
        (FormulaVariant::AsWritten, _) => {
            let r = try_integrate_semi_infinite(
                |t| {
                    if t == 0.0 {
                        return Ok(0.0);
                    }
                    let r_q = (t / pl).sqrt();
                    let over_u = try_integrate_semi_infinite(
                        |u| {
                            if u == 0.0 {
                                return Ok(1.0);
                            }
                            let r = (u / pl).sqrt();
                            Ok((-u - printed_exponent(ctx, z, r, r_q)?).exp())
                        },
                        &inner,
                    )?;
                    Ok(gamma_weight(t, q) * over_u.value)
                },
                spec,
            )?;
            Ok(r.value)
        }
    }
}

/// `R_s` for `Q ≥ 2`.
pub fn radar_rate_qge2(
    ctx: &SenseIntegrandCtx,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
    path: ClusterPath,
) -> Result<f64, MathError> {
    if ctx.k == 0 {
        return Ok(0.0);
    }
    let inner = spec.tightened(10.0);
    ctx.outer(spec, |z| cluster_interference_average(ctx, z, &inner, variant, path))
}

/// Sensing ASE `λ_b J R_s` for `Q ≥ 2`. Picks the reduced path when it applies.
pub fn sense_ase_qge2(
    params: &NetworkParams,
    alloc: &ResourceAllocation,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
) -> Result<f64, Error> {
    if alloc.q < 2 {
        return Err(Error::Config(format!("cluster evaluator needs q >= 2, got q = {}", alloc.q)));
    }
    let ctx = SenseIntegrandCtx::new(params, alloc)?;
    if alloc.j == 0 {
        return Ok(0.0);
    }
    let path = if ctx.is_alpha_twice_beta() { ClusterPath::Reduced } else { ClusterPath::General };
    Ok(params.lambda_b * alloc.j as f64 * radar_rate_qge2(&ctx, spec, variant, path)?)
}
