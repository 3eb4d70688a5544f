//! `Q = 1`: no nulling, interference from every BS outside the hole.

use std::f64::consts::PI;

use super::SenseIntegrandCtx;
use crate::mathkern::{beta, incomplete_beta, one_minus_pow1p, try_integrate, try_integrate_semi_infinite, MathError, QuadratureSpec};
use crate::netmodel::{FormulaVariant, NetworkParams, ResourceAllocation};
use crate::Error;

/// `∫₀² (2/π) arccos(t/2) t (1 − (1 + g t^{−p})^{−K}) dt`, the in-hole mass
/// relative to the full-plane term.
fn hole_integral(g: f64, p: f64, k: f64, spec: &QuadratureSpec) -> Result<f64, MathError> {
    let r = try_integrate(
        |t| {
            if t == 0.0 {
                return Ok(0.0);
            }
            Ok(2.0 / PI * (t / 2.0).acos() * t * one_minus_pow1p(g * t.powf(-p), k))
        },
        0.0,
        2.0,
        spec,
    )?;
    Ok(r.value)
}

/// `−log E[e^{−z I_S} | R]` with the exact hole geometry:
/// `λ[π K s^{2/α} B(1−2/α, K+2/α) − R² ∫₀² 2 arccos(t/2) t (1 − (1 + s R^{−α} t^{−α})^{−K}) dt]`,
/// `s = z R^{2β}`.
pub fn interference_exponent_q1(ctx: &SenseIntegrandCtx, z: f64, r: f64, spec: &QuadratureSpec) -> Result<f64, MathError> {
    if !(r > 0.0) {
        return Err(MathError::domain("laplace_sense_interf_q1", format!("serving distance must be > 0, got {r}")));
    }
    if z == 0.0 {
        return Ok(0.0);
    }
    let (alpha, k) = (ctx.alpha, ctx.k as f64);
    let s = z * r.powf(2.0 * ctx.beta);
    let full = PI * k * s.powf(2.0 / alpha) * beta(1.0 - 2.0 / alpha, k + 2.0 / alpha);
    let g = z * r.powf(2.0 * ctx.beta - alpha);
    let hole = PI * r * r * hole_integral(g, alpha, k, spec)?;
    Ok(ctx.lambda_b * (full - hole).max(0.0))
}

/// Printed conditional transform, evaluated as it stands.
fn printed_transform_q1(ctx: &SenseIntegrandCtx, z: f64, r: f64, spec: &QuadratureSpec) -> Result<f64, MathError> {
    let (alpha, b, k) = (ctx.alpha, ctx.beta, ctx.k as f64);
    let scaled = r / (PI * ctx.lambda_b);
    let complete = incomplete_beta(1.0, 1.0 - 2.0 / b, k + 2.0 / b)?;
    let first = k * z.powf(2.0 / b) * scaled.powf(2.0 * alpha / b - 1.0) * complete;
    let g = z * scaled.powf(alpha - b / 2.0);
    let hole = hole_integral(g, b, k, spec)?;
    Ok((-r * (first + 1.0 - hole)).exp())
}

/// Conditional interference transform `E[e^{−z I_S} | R]` for `Q = 1`.
pub fn laplace_sense_interf_q1(
    ctx: &SenseIntegrandCtx,
    z: f64,
    r: f64,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
) -> Result<f64, MathError> {
    match variant {
        FormulaVariant::Rederived => Ok((-interference_exponent_q1(ctx, z, r, spec)?).exp()),
        FormulaVariant::AsWritten => printed_transform_q1(ctx, z, r, spec),
    }
}

/// `∫ E[e^{−z I_S} | R] f(R) dR` with `f(R) = 2πλR e^{−πλR²}`.
pub fn single_interference_average(
    ctx: &SenseIntegrandCtx,
    z: f64,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
) -> Result<f64, MathError> {
    let inner = spec.tightened(10.0);
    let lambda = ctx.lambda_b;
    let (alpha, k) = (ctx.alpha, ctx.k as f64);
    // Full-plane exponent ≈ a U^p.
    let p = 2.0 * ctx.beta / alpha;
    let a = (PI * lambda).powf(1.0 - p) * k * beta(1.0 - 2.0 / alpha, k + 2.0 / alpha) * z.powf(2.0 / alpha);
    let outer = super::decay_scaled(spec, a, p);
    // U = πλR² ~ Exp(1).
    let r = try_integrate_semi_infinite(
        |u| {
            if u == 0.0 {
                return Ok(0.0);
            }
            let r = (u / (PI * lambda)).sqrt();
            Ok((-u).exp() * laplace_sense_interf_q1(ctx, z, r, &inner, variant)?)
        },
        &outer,
    )?;
    Ok(r.value)
}

/// Hole-corrected `R_s` by full nesting over `z`, `R` and the hole strip.
pub(crate) fn radar_rate_q1(ctx: &SenseIntegrandCtx, spec: &QuadratureSpec, variant: FormulaVariant) -> Result<f64, MathError> {
    if ctx.k == 0 {
        return Ok(0.0);
    }
    let inner = spec.tightened(10.0);
    ctx.outer(spec, |z| single_interference_average(ctx, z, &inner, variant))
}

/// `R_s` for a `Q = 1` allocation through the nested route (any `α`, `β`).
pub fn avg_radar_rate_q1(
    params: &NetworkParams,
    alloc: &ResourceAllocation,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
) -> Result<f64, Error> {
    if alloc.q != 1 {
        return Err(Error::Config(format!("hole-corrected evaluator needs q = 1, got q = {}", alloc.q)));
    }
    let ctx = SenseIntegrandCtx::new(params, alloc)?;
    if alloc.j == 0 {
        return Ok(0.0);
    }
    Ok(radar_rate_q1(&ctx, spec, variant)?)
}

/// Denominator `I(z)` of the `α = 2β` closed form.
fn closed_form_denominator(ctx: &SenseIntegrandCtx, z: f64, spec: &QuadratureSpec, variant: FormulaVariant) -> Result<f64, MathError> {
    let (alpha, k) = (ctx.alpha, ctx.k as f64);
    match variant {
        FormulaVariant::Rederived => {
            let full = k * z.powf(2.0 / alpha) * beta(1.0 - 2.0 / alpha, k + 2.0 / alpha);
            Ok(1.0 + full - hole_integral(z, alpha, k, spec)?)
        }
        FormulaVariant::AsWritten => {
            let complete = incomplete_beta(1.0, 1.0 - 1.0 / alpha, k + 1.0 / alpha)?;
            let full = k * z.powf(1.0 / alpha) * complete;
            Ok(full - hole_integral(z, 2.0 * alpha, k, spec)? + 1.0)
        }
    }
}

/// `R_s` for `Q = 1` when `α = 2β`: the serving-distance average collapses
/// to `1/I(z)`.
pub fn radar_rate_alpha2beta(ctx: &SenseIntegrandCtx, spec: &QuadratureSpec, variant: FormulaVariant) -> Result<f64, MathError> {
    if !ctx.is_alpha_twice_beta() {
        return Err(MathError::domain(
            "sense_ase_alpha2beta",
            format!("closed form needs alpha = 2 beta, got alpha = {}, beta = {}", ctx.alpha, ctx.beta),
        ));
    }
    if ctx.k == 0 {
        return Ok(0.0);
    }
    let inner = spec.tightened(10.0);
    ctx.outer(spec, |z| Ok(1.0 / closed_form_denominator(ctx, z, &inner, variant)?))
}

/// Sensing ASE `λ_b J R_s` for `Q = 1`, `α = 2β`.
pub fn sense_ase_alpha2beta(
    params: &NetworkParams,
    alloc: &ResourceAllocation,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
) -> Result<f64, Error> {
    if alloc.q != 1 {
        return Err(Error::Config(format!("closed form needs q = 1, got q = {}", alloc.q)));
    }
    let ctx = SenseIntegrandCtx::new(params, alloc)?;
    if alloc.j == 0 {
        return Ok(0.0);
    }
    Ok(params.lambda_b * alloc.j as f64 * radar_rate_alpha2beta(&ctx, spec, variant)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn ctx(k: u32) -> SenseIntegrandCtx {
        SenseIntegrandCtx::from_parts(&NetworkParams::default(), k, 1)
    }

    fn spec() -> QuadratureSpec {
        QuadratureSpec::default()
    }

    #[test]
    fn transform_is_one_at_zero() {
        assert_eq!(laplace_sense_interf_q1(&ctx(2), 0.0, 0.5, &spec(), FormulaVariant::Rederived).unwrap(), 1.0);
    }

    #[test]
    fn hole_raises_the_transform() {
        let c = ctx(3);
        for z in [0.01, 0.3, 2.0, 30.0] {
            for r in [0.1, 0.5, 1.2] {
                let with_hole = laplace_sense_interf_q1(&c, z, r, &spec(), FormulaVariant::Rederived).unwrap();
                let s = z * r.powf(2.0 * c.beta);
                let k = c.k as f64;
                let no_hole = (-c.lambda_b * PI * k * s.powf(0.5) * beta(0.5, k + 0.5)).exp();
                assert!(with_hole > no_hole, "z={z} r={r}");
            }
        }
    }

    #[test]
    fn transform_is_a_transform_on_a_grid() {
        let c = ctx(4);
        for r in [0.2, 0.6, 1.5] {
            let mut last = 1.0;
            for i in 0..40 {
                let z = 1e-3 * 1.4f64.powi(i);
                let v = laplace_sense_interf_q1(&c, z, r, &spec(), FormulaVariant::Rederived).unwrap();
                assert!(v > 0.0 && v <= 1.0 && v <= last + 1e-12, "r={r} z={z}: {v}");
                last = v;
            }
        }
    }

    #[test]
    fn nested_route_matches_closed_form() {
        for k in [1, 4] {
            let c = ctx(k);
            let nested = radar_rate_q1(&c, &spec(), FormulaVariant::Rederived).unwrap();
            let closed = radar_rate_alpha2beta(&c, &spec(), FormulaVariant::Rederived).unwrap();
            assert!((nested - closed).abs() < 2e-5 * closed, "k={k}: {nested} vs {closed}");
        }
    }

    #[test]
    fn reference_values() {
        // Independent scipy evaluation at the default parameters.
        for (k, want) in [(1, 1.34164), (4, 1.40492)] {
            let got = radar_rate_alpha2beta(&ctx(k), &spec(), FormulaVariant::Rederived).unwrap();
            assert!((got - want).abs() < 5e-5, "k={k}: {got}");
        }
    }

    #[test]
    fn closed_form_is_linear_in_density() {
        let a = ResourceAllocation::new(1, 1, 3, 1);
        let base = sense_ase_alpha2beta(&NetworkParams::default(), &a, &spec(), FormulaVariant::Rederived).unwrap();
        for lambda in [0.5, 2.0] {
            let p = NetworkParams { lambda_b: lambda, ..Default::default() };
            let t = sense_ase_alpha2beta(&p, &a, &spec(), FormulaVariant::Rederived).unwrap();
            assert!((t / lambda - base).abs() < 1e-12 * base);
        }
    }

    #[test]
    fn printed_form_needs_beta_above_two() {
        let e = laplace_sense_interf_q1(&ctx(1), 1.0, 0.5, &spec(), FormulaVariant::AsWritten).unwrap_err();
        assert!(matches!(e, MathError::Domain { .. }));
        let p = NetworkParams { beta: 3.0, alpha: 4.0, ..Default::default() };
        let c = SenseIntegrandCtx::from_parts(&p, 1, 1);
        let v = laplace_sense_interf_q1(&c, 1.0, 0.5, &spec(), FormulaVariant::AsWritten).unwrap();
        assert!(v.is_finite() && v > 0.0);
    }

    #[test]
    fn printed_closed_form_evaluates() {
        let v = radar_rate_alpha2beta(&ctx(1), &spec(), FormulaVariant::AsWritten).unwrap();
        assert!(v.is_finite() && v > 0.0);
        let p = NetworkParams { alpha: 3.0, ..Default::default() };
        assert!(radar_rate_alpha2beta(&SenseIntegrandCtx::from_parts(&p, 1, 1), &spec(), FormulaVariant::Rederived).is_err());
    }
}
