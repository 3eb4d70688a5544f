//! Average downlink rate of a typical user under coordinated ZF nulling.
//!
//! The user is served by its nearest BS; the `L − 1` next-nearest BSs null
//! towards it, so interference starts at the `L`-th nearest distance `r_L`.
//! Conditioned on `η = r/r_L`, the interference Laplace transform at the
//! normalized argument is `exp(−πλ r² H(z, K, α, η))`.

use serde::{Deserialize, Serialize};

use crate::mathkern::{incomplete_beta_split, one_minus_pow1p, try_integrate, try_integrate_semi_infinite, MathError, QuadratureSpec};
use crate::netmodel::{validate, FormulaVariant, NetworkParams, ResourceAllocation};
use crate::Error;

/// Everything the rate integral depends on. There is deliberately no
/// density in here: the rate is scale-free in `λ_b`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CommIntegrandCtx {
    /// Residual DoF, the signal gain shape.
    pub d: u32,
    pub k: u32,
    pub l: u32,
    pub alpha: f64,
}

impl CommIntegrandCtx {
    pub fn new(params: &NetworkParams, alloc: &ResourceAllocation) -> Result<Self, Error> {
        let v = validate(params, alloc);
        if !v.is_empty() {
            return Err(Error::Infeasible(v));
        }
        let d = alloc.residual_dof(params.m_t);
        Ok(CommIntegrandCtx { d: d as u32, k: alloc.k, l: alloc.l, alpha: params.alpha })
    }

    /// `E_η[·]` of the interference transform at `z`.
    pub fn interference_average(&self, z: f64, spec: &QuadratureSpec, variant: FormulaVariant) -> Result<f64, MathError> {
        let (k, alpha, l) = (self.k, self.alpha, self.l);
        if l == 1 {
            return Ok(1.0 / (1.0 + h_function(z, k, alpha, 1.0)?));
        }
        let inner = spec.tightened(10.0);
        let lf = l as f64;
        let r = try_integrate(
            |eta| {
                if eta == 0.0 {
                    return Ok(0.0);
                }
                let h = h_function(z, k, alpha, eta)?;
                let lt = match variant {
                    FormulaVariant::AsWritten => 1.0 / (1.0 + h),
                    FormulaVariant::Rederived => (1.0 + eta * eta * h).powf(-lf),
                };
                Ok(eta_pdf(eta, l)? * lt)
            },
            0.0,
            1.0,
            &inner,
        )?;
        Ok(r.value)
    }

    /// `R_c` in nats per channel use.
    pub fn rate(&self, spec: &QuadratureSpec, variant: FormulaVariant) -> Result<f64, MathError> {
        if self.k == 0 {
            return Ok(0.0);
        }
        let d = self.d as f64;
        let r = try_integrate_semi_infinite(
            |z| {
                let signal = if z < 1e-300 { d } else { one_minus_pow1p(z, d) / z };
                Ok(signal * self.interference_average(z, spec, variant)?)
            },
            spec,
        )?;
        Ok(r.value)
    }
}

/// `H(z, K, α, η) = K z^{2/α} B(z/(z+η^{−α}), 1−2/α, K+2/α) + η^{−2}((1+zη^α)^{−K} − 1)`,
/// which equals `∫_{η^{−2}}^∞ (1 − (1 + z u^{−α/2})^{−K}) du`.
pub fn h_function(z: f64, k: u32, alpha: f64, eta: f64) -> Result<f64, MathError> {
    if !(eta > 0.0 && eta <= 1.0) {
        return Err(MathError::domain("h_function", format!("distance ratio must lie in (0, 1], got {eta}")));
    }
    if !(alpha > 2.0) {
        return Err(MathError::domain("h_function", format!("pathloss exponent must exceed 2, got {alpha}")));
    }
    if z < 0.0 {
        return Err(MathError::domain("h_function", format!("argument must be >= 0, got {z}")));
    }
    if z == 0.0 || k == 0 {
        return Ok(0.0);
    }
    let kf = k as f64;
    let w = z * eta.powf(alpha);
    let x = w / (1.0 + w);
    let b = incomplete_beta_split(x, 1.0 / (1.0 + w), 1.0 - 2.0 / alpha, kf + 2.0 / alpha)?;
    let h = kf * z.powf(2.0 / alpha) * b - one_minus_pow1p(w, kf) / (eta * eta);
    Ok(h.max(0.0))
}

/// Density of `η_L = r₁/r_L`: `2(L−1) x (1−x²)^{L−2}` on `[0, 1]`.
pub fn eta_pdf(x: f64, l: u32) -> Result<f64, MathError> {
    if l < 2 {
        return Err(MathError::domain("eta_pdf", format!("needs a cluster of at least 2, got {l}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Ok(0.0);
    }
    let lf = l as f64;
    Ok(2.0 * (lf - 1.0) * x * (1.0 - x * x).powf(lf - 2.0))
}

/// Average user rate `R_c` (nats).
pub fn avg_comm_rate(
    params: &NetworkParams,
    alloc: &ResourceAllocation,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
) -> Result<f64, Error> {
    let ctx = CommIntegrandCtx::new(params, alloc)?;
    Ok(ctx.rate(spec, variant)?)
}

/// Communication ASE `T_c = λ_b K R_c`.
pub fn comm_ase(
    params: &NetworkParams,
    alloc: &ResourceAllocation,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
) -> Result<f64, Error> {
    let r_c = avg_comm_rate(params, alloc, spec, variant)?;
    Ok(params.lambda_b * alloc.k as f64 * r_c)
}
