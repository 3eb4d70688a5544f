//! Radar information rate of a typical target sensed by its nearest BS.
//!
//! Interference at the serving BS comes from every BS outside the sensing
//! cluster, measured from the serving BS. No BS can lie closer to the target
//! than the serving BS, which leaves an interference hole of radius `R`
//! around the target.
//!
//! Each evaluator exists in two [`FormulaVariant`]s. `AsWritten` evaluates
//! the printed closed forms verbatim; `Rederived` redoes the same steps
//! with echo pathloss `R^{−2β}` and interference pathloss `x^{−α}` and
//! integrates numerically.

mod cluster;
mod single;

pub use cluster::{cluster_interference_average, radar_rate_qge2, sense_ase_qge2, ClusterPath};
pub use single::{
    avg_radar_rate_q1, interference_exponent_q1, laplace_sense_interf_q1, radar_rate_alpha2beta,
    sense_ase_alpha2beta, single_interference_average,
};

use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::mathkern::{ln_gamma, pow1p_neg, try_integrate, try_integrate_semi_infinite, MathError, QuadratureSpec};
use crate::netmodel::{validate, FormulaVariant, NetworkParams, ResourceAllocation};
use crate::Error;

/// Constants of one sensing-rate evaluation. `J` is absent on purpose: it
/// only scales the ASE.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SenseIntegrandCtx {
    pub k: u32,
    pub q: u32,
    pub alpha: f64,
    pub beta: f64,
    pub xi: f64,
    pub delta_t: f64,
    pub m_r: u32,
    pub lambda_b: f64,
}

impl SenseIntegrandCtx {
    pub fn new(params: &NetworkParams, alloc: &ResourceAllocation) -> Result<Self, Error> {
        let v = validate(params, alloc);
        if !v.is_empty() {
            return Err(Error::Infeasible(v));
        }
        Ok(Self::from_parts(params, alloc.k, alloc.q))
    }

    /// Context for `(k, q)` without an allocation feasibility check.
    pub fn from_parts(params: &NetworkParams, k: u32, q: u32) -> Self {
        SenseIntegrandCtx {
            k,
            q,
            alpha: params.alpha,
            beta: params.beta,
            xi: params.xi,
            delta_t: params.delta_t,
            m_r: params.m_r,
            lambda_b: params.lambda_b,
        }
    }

    /// `ξ ΔT M_r`.
    pub fn echo_gain(&self) -> f64 {
        self.xi * self.delta_t * self.m_r as f64
    }

    pub fn is_alpha_twice_beta(&self) -> bool {
        (self.alpha - 2.0 * self.beta).abs() <= 1e-12 * self.alpha.abs()
    }

    /// Outer Hamdi integral `∫ (1 − (1+cz)^{−K})/z · inner(z) dz`.
    pub(crate) fn outer<F>(&self, spec: &QuadratureSpec, mut inner: F) -> Result<f64, MathError>
    where
        F: FnMut(f64) -> Result<f64, MathError>,
    {
        let (c, k) = (self.echo_gain(), self.k as f64);
        let r = try_integrate_semi_infinite(
            |z| {
                let signal = if z < 1e-300 { k * c } else { (1.0 - signal_laplace_raw(z, k, c)) / z };
                if signal == 0.0 {
                    return Ok(0.0);
                }
                Ok(signal * inner(z)?)
            },
            spec,
        )?;
        Ok(r.value)
    }
}

/// Spec whose semi-infinite split sits at the decay scale of an integrand
/// behaving like `exp(−a x^p)`, so sharply peaked integrands are resolved.
pub(crate) fn decay_scaled(spec: &QuadratureSpec, a: f64, p: f64) -> QuadratureSpec {
    let scale = if a > 0.0 && a.is_finite() { a.powf(-1.0 / p).min(1.0) } else { 1.0 };
    QuadratureSpec { split_point: spec.split_point * scale.max(1e-300), ..*spec }
}

fn signal_laplace_raw(z: f64, k: f64, c: f64) -> f64 {
    pow1p_neg(c * z, k)
}

/// Echo-gain transform `E[e^{−z ξ ΔT M_r h}] = (1 + ξ ΔT M_r z)^{−K}`.
pub fn signal_laplace(z: f64, k: u32, xi: f64, delta_t: f64, m_r: u32) -> f64 {
    signal_laplace_raw(z, k as f64, xi * delta_t * m_r as f64)
}

/// Angle `arccos(x/2R)` of the part of a circle of radius `x` around the
/// serving BS that falls inside the hole; 0 once the circle clears it.
pub fn hole_arc_angle(x: f64, r: f64) -> f64 {
    if x >= 2.0 * r {
        0.0
    } else {
        (x / (2.0 * r)).acos()
    }
}

/// Density of the distance from the serving BS to its `(Q−1)`-th nearest
/// neighbour, `e^{−λπr²} 2(λπr²)^Q / (r Γ(Q))`.
pub fn rq_pdf(r: f64, q: u32, lambda_b: f64) -> Result<f64, MathError> {
    if q < 2 {
        return Err(MathError::domain("rq_pdf", format!("needs q >= 2, got {q}")));
    }
    if !(r > 0.0) {
        return Ok(0.0);
    }
    let u = lambda_b * PI * r * r;
    let qf = q as f64;
    Ok((-u + qf * u.ln() + 2f64.ln() - r.ln() - ln_gamma(qf)).exp())
}

/// Printed CCDF of `r_Q/(2R)`: `1 − (1 − 1/(4x²))^{Q−2}`.
///
/// At `q = 2` the exponent vanishes and the value is 0 everywhere. For
/// `q > 2` and `x < 1/2` the base turns negative; the result is clamped to 1.
pub fn rq_over_2r_ccdf(x: f64, q: u32) -> Result<f64, MathError> {
    if q < 2 {
        return Err(MathError::domain("rq_over_2r_ccdf", format!("needs q >= 2, got {q}")));
    }
    if q == 2 {
        return Ok(0.0);
    }
    if x < 0.5 {
        return Ok(1.0);
    }
    Ok(1.0 - (1.0 - 1.0 / (4.0 * x * x)).powi(q as i32 - 2))
}

/// Average radar rate `R_s` (nats) for any feasible allocation.
///
/// `Q = 1` uses the hole-corrected transform, through the closed form when
/// `α = 2β`; `Q ≥ 2` neglects the hole.
pub fn avg_radar_rate(
    params: &NetworkParams,
    alloc: &ResourceAllocation,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
) -> Result<f64, Error> {
    let ctx = SenseIntegrandCtx::new(params, alloc)?;
    if alloc.j == 0 || alloc.k == 0 {
        return Ok(0.0);
    }
    Ok(radar_rate(&ctx, spec, variant)?)
}

/// The dispatch behind [`avg_radar_rate`], on a bare context.
pub fn radar_rate(ctx: &SenseIntegrandCtx, spec: &QuadratureSpec, variant: FormulaVariant) -> Result<f64, MathError> {
    if ctx.k == 0 {
        return Ok(0.0);
    }
    if ctx.q == 1 {
        if ctx.is_alpha_twice_beta() {
            radar_rate_alpha2beta(ctx, spec, variant)
        } else {
            single::radar_rate_q1(ctx, spec, variant)
        }
    } else {
        let path = if ctx.is_alpha_twice_beta() { ClusterPath::Reduced } else { ClusterPath::General };
        radar_rate_qge2(ctx, spec, variant, path)
    }
}

/// Sensing ASE `T_s = λ_b J R_s`.
pub fn sense_ase(
    params: &NetworkParams,
    alloc: &ResourceAllocation,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
) -> Result<f64, Error> {
    let r_s = avg_radar_rate(params, alloc, spec, variant)?;
    Ok(params.lambda_b * alloc.j as f64 * r_s)
}

/// Average over the serving distance of the in-hole share of the
/// interference exponent when the nulling cluster clears the mean radius
/// `r_q = √(q/(πλ))` around the serving BS, at `z = 1`.
///
/// This quantifies how much the hole-neglect costs for a cluster of size `q`.
pub fn hole_correction_share(params: &NetworkParams, k: u32, q: u32, spec: &QuadratureSpec) -> Result<f64, MathError> {
    let (alpha, beta, lambda) = (params.alpha, params.beta, params.lambda_b);
    let kf = k as f64;
    let z = 1.0;
    let r_q = (q as f64 / (PI * lambda)).sqrt();
    let inner = spec.tightened(10.0);
    let ratio = |r: f64| -> Result<f64, MathError> {
        let s = z * r.powf(2.0 * beta);
        let lo = r_q / r;
        let hole = if lo >= 2.0 {
            0.0
        } else {
            let g = z * r.powf(2.0 * beta - alpha);
            lambda
                * r
                * r
                * try_integrate(
                    |t| Ok(2.0 * (t / 2.0).acos() * t * crate::mathkern::one_minus_pow1p(g * t.powf(-alpha), kf)),
                    lo,
                    2.0,
                    &inner,
                )?
                .value
        };
        if hole == 0.0 {
            return Ok(0.0);
        }
        // 2πλ ∫_{r_q}^∞ (1 − (1 + s x^{−α})^{−K}) x dx through the H identity.
        let w = s * r_q.powf(-alpha);
        let no_hole = PI * lambda * r_q * r_q * crate::commrate::h_function(w, k, alpha, 1.0)?;
        Ok(hole / no_hole)
    };
    // R = √(U/(πλ)) with U ~ Exp(1).
    let r = try_integrate_semi_infinite(
        |u| {
            if u == 0.0 {
                return Ok(0.0);
            }
            Ok((-u).exp() * ratio((u / (PI * lambda)).sqrt())?)
        },
        spec,
    )?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mathkern::integrate_semi_infinite;

    #[test]
    fn signal_laplace_values() {
        assert_eq!(signal_laplace(0.0, 3, 0.1, 1.0, 10), 1.0);
        assert!((signal_laplace(2.0, 1, 1.0, 1.0, 1) - 1.0 / 3.0).abs() < 1e-15);
        assert!((signal_laplace(1.0, 3, 0.1, 1.0, 10) - 0.125).abs() < 1e-15);
    }

    #[test]
    fn arc_angles() {
        assert_eq!(hole_arc_angle(2.0, 1.0), 0.0);
        assert!((hole_arc_angle(0.0, 0.7) - PI / 2.0).abs() < 1e-15);
        assert!((hole_arc_angle(0.7, 0.7) - PI / 3.0).abs() < 1e-15);
        assert_eq!(hole_arc_angle(5.0, 1.0), 0.0);
    }

    #[test]
    fn rq_pdf_normalizes() {
        let spec = QuadratureSpec { rel_tol: 1e-10, ..Default::default() };
        for (q, lambda) in [(4, 1.0), (2, 0.5), (9, 3.0)] {
            let s = integrate_semi_infinite(|r| rq_pdf(r, q, lambda).unwrap(), &spec).unwrap().value;
            assert!((s - 1.0).abs() < 1e-8, "q={q}: {s}");
        }
    }

    #[test]
    fn ccdf_printed_values() {
        for x in [0.1, 0.5, 1.0, 3.0] {
            assert_eq!(rq_over_2r_ccdf(x, 2).unwrap(), 0.0);
        }
        assert!(rq_over_2r_ccdf(1.05, 50).unwrap() >= 0.99);
        let mut last = 1.0;
        for i in 0..200 {
            let v = rq_over_2r_ccdf(0.5 + i as f64 * 0.05, 7).unwrap();
            assert!((0.0..=1.0).contains(&v) && v <= last);
            last = v;
        }
        assert!(rq_over_2r_ccdf(1.0, 1).is_err());
    }

    #[test]
    fn ccdf_tends_to_one_for_large_clusters() {
        let v: Vec<f64> = [10, 100, 1000].iter().map(|&q| rq_over_2r_ccdf(1.2, q).unwrap()).collect();
        assert!(v.windows(2).all(|w| w[1] >= w[0]));
        assert!(v[2] > 1.0 - 1e-12);
    }

    #[test]
    fn hole_share_small_for_large_clusters() {
        let p = NetworkParams::default();
        let spec = QuadratureSpec::default();
        let s10 = hole_correction_share(&p, 1, 10, &spec).unwrap();
        let s2 = hole_correction_share(&p, 1, 2, &spec).unwrap();
        assert!(s10 < 0.01, "{s10}");
        assert!(s2 > s10);
    }

    #[test]
    fn zero_targets_zero_rate() {
        let p = NetworkParams::default();
        let a = ResourceAllocation::new(2, 1, 0, 1);
        assert_eq!(avg_radar_rate(&p, &a, &QuadratureSpec::default(), FormulaVariant::Rederived).unwrap(), 0.0);
    }
}
