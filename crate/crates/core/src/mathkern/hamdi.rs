use super::special::{one_minus_pow1p, pow1p_neg};
use super::{try_integrate_semi_infinite, MathError, QuadratureSpec};

/// Laplace transform `z ↦ E[e^{−zX}]` of a non-negative random variable.
///
/// `complement` exists so that closed forms can supply `1 − E[e^{−zX}]`
/// without cancellation near `z = 0`.
pub trait LaplaceTransform {
    fn at(&self, z: f64) -> Result<f64, MathError>;

    fn complement(&self, z: f64) -> Result<f64, MathError> {
        Ok(1.0 - self.at(z)?)
    }
}

impl<F> LaplaceTransform for F
where
    F: Fn(f64) -> Result<f64, MathError>,
{
    fn at(&self, z: f64) -> Result<f64, MathError> {
        self(z)
    }
}

/// `X ~ Γ(shape, scale)`: `E[e^{−zX}] = (1 + scale·z)^{−shape}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GammaLaplace {
    pub shape: f64,
    pub scale: f64,
}

impl LaplaceTransform for GammaLaplace {
    fn at(&self, z: f64) -> Result<f64, MathError> {
        Ok(pow1p_neg(self.scale * z, self.shape))
    }

    fn complement(&self, z: f64) -> Result<f64, MathError> {
        Ok(one_minus_pow1p(self.scale * z, self.shape))
    }
}

/// Point mass at `value`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Degenerate(pub f64);

impl LaplaceTransform for Degenerate {
    fn at(&self, z: f64) -> Result<f64, MathError> {
        Ok((-z * self.0).exp())
    }

    fn complement(&self, z: f64) -> Result<f64, MathError> {
        Ok(-(-z * self.0).exp_m1())
    }
}

fn spot_check(name: &'static str, lt: &impl LaplaceTransform) -> Result<(), MathError> {
    let near_zero = lt.at(1e-12)?;
    if (near_zero - 1.0).abs() > 1e-6 {
        return Err(MathError::domain("hamdi_rate", format!("{name} transform is {near_zero} at z = 0+, expected 1")));
    }
    let at_one = lt.at(1.0)?;
    if !(0.0..=1.0 + 1e-12).contains(&at_one) {
        return Err(MathError::domain("hamdi_rate", format!("{name} transform is {at_one} at z = 1, outside [0, 1]")));
    }
    Ok(())
}

/// `E[log(1 + X/Y)] = ∫₀^∞ (1/z)(1 − E[e^{−zX}]) E[e^{−zY}] dz` in nats,
/// after spot-checking that both maps look like Laplace transforms.
pub fn hamdi_rate(
    signal: &impl LaplaceTransform,
    interference: &impl LaplaceTransform,
    spec: &QuadratureSpec,
) -> Result<f64, MathError> {
    spot_check("signal", signal)?;
    spot_check("interference", interference)?;
    hamdi_integral(signal, interference, spec)
}

/// The same integral without the spot checks, for closed forms that are
/// evaluated verbatim even when they are not proper transforms.
pub fn hamdi_integral(
    signal: &impl LaplaceTransform,
    interference: &impl LaplaceTransform,
    spec: &QuadratureSpec,
) -> Result<f64, MathError> {
    let r = try_integrate_semi_infinite(
        |z| {
            let c = signal.complement(z)?;
            if c == 0.0 {
                return Ok(0.0);
            }
            Ok(c * interference.at(z)? / z)
        },
        spec,
    )?;
    Ok(r.value)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_signal_gives_zero_rate() {
        let r = hamdi_rate(&Degenerate(0.0), &Degenerate(1.0), &QuadratureSpec::default()).unwrap();
        assert_eq!(r, 0.0);
    }

    #[test]
    fn exponential_over_unit() {
        // E[log(1+X)] with X ~ Exp(1) is e·E₁(1); the expected value below comes
        // from a direct quadrature of log(1+x)e^{-x}, independent of the identity.
        let direct = crate::mathkern::integrate_semi_infinite(
            |x| x.ln_1p() * (-x).exp(),
            &QuadratureSpec { rel_tol: 1e-12, ..Default::default() },
        )
        .unwrap()
        .value;
        assert!((direct - 0.596_347_362_323_194).abs() < 1e-9);
        let r = hamdi_rate(&GammaLaplace { shape: 1.0, scale: 1.0 }, &Degenerate(1.0), &QuadratureSpec::default()).unwrap();
        assert!((r - direct).abs() < 1e-6 * direct, "{r} vs {direct}");
    }

    #[test]
    fn rejects_non_transform() {
        let bogus = |_z: f64| -> Result<f64, MathError> { Ok(0.5) };
        let err = hamdi_rate(&GammaLaplace { shape: 1.0, scale: 1.0 }, &bogus, &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(err, MathError::Domain { .. }));
    }
}
