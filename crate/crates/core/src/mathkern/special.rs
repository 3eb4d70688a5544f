use super::{try_integrate, MathError, QuadratureSpec};

pub fn ln_gamma(x: f64) -> f64 {
    statrs::function::gamma::ln_gamma(x)
}

/// Complete Beta function Γ(b)Γ(c)/Γ(b+c) for b, c > 0.
pub fn beta(b: f64, c: f64) -> f64 {
    (ln_gamma(b) + ln_gamma(c) - ln_gamma(b + c)).exp()
}

/// `(1 + w)^{-k}` without cancellation for small `w`.
#[inline]
pub fn pow1p_neg(w: f64, k: f64) -> f64 {
    (-k * w.ln_1p()).exp()
}

/// `1 − (1 + w)^{-k}`, accurate as `w → 0`.
#[inline]
pub fn one_minus_pow1p(w: f64, k: f64) -> f64 {
    -(-k * w.ln_1p()).exp_m1()
}

fn check_exponents(function: &'static str, b: f64, c: f64) -> Result<(), MathError> {
    if !(b > 0.0 && b.is_finite()) {
        return Err(MathError::domain(function, format!("first exponent must be > 0 (integral diverges), got {b}")));
    }
    if !(c > 0.0 && c.is_finite()) {
        return Err(MathError::domain(function, format!("second exponent must be > 0 (integral diverges), got {c}")));
    }
    Ok(())
}

/// Lower incomplete Beta integral `∫₀ᵃ t^{b−1}(1−t)^{c−1} dt`.
///
/// Note the argument order: the upper limit comes first. `a = 1` gives the
/// complete Beta function.
pub fn incomplete_beta(a: f64, b: f64, c: f64) -> Result<f64, MathError> {
    incomplete_beta_split(a, 1.0 - a, b, c)
}

/// Same as [`incomplete_beta`] with `1 − a` supplied separately, for callers
/// that can form it without cancellation (e.g. `a = w/(1+w)`).
pub(crate) fn incomplete_beta_split(a: f64, one_minus_a: f64, b: f64, c: f64) -> Result<f64, MathError> {
    check_exponents("incomplete_beta", b, c)?;
    if !(0.0..=1.0).contains(&a) || !(0.0..=1.0).contains(&one_minus_a) {
        return Err(MathError::domain("incomplete_beta", format!("upper limit must lie in [0, 1], got {a}")));
    }
    if a == 0.0 {
        return Ok(0.0);
    }
    if one_minus_a == 0.0 {
        return Ok(beta(b, c));
    }
    let log_front = b * a.ln() + c * one_minus_a.ln();
    if a < (b + 1.0) / (b + c + 2.0) {
        Ok(log_front.exp() * beta_continued_fraction(b, c, a)? / b)
    } else {
        let tail = log_front.exp() * beta_continued_fraction(c, b, one_minus_a)? / c;
        Ok((beta(b, c) - tail).max(0.0))
    }
}

/// Modified Lentz evaluation of the incomplete Beta continued fraction.
fn beta_continued_fraction(a: f64, b: f64, x: f64) -> Result<f64, MathError> {
    const MAX_ITER: usize = 2000;
    const EPS: f64 = 1e-16;
    const TINY: f64 = 1e-300;

    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=MAX_ITER {
        let m = m as f64;
        let m2 = 2.0 * m;
        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;
        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let del = d * c;
        h *= del;
        if (del - 1.0).abs() < EPS {
            return Ok(h);
        }
    }
    Err(MathError::NonConvergence { value: h, abs_error: f64::NAN, intervals: MAX_ITER })
}

/// Quadrature route to the same integral.
///
/// The range is split at 1/2; an endpoint factor with exponent below one is
/// removed analytically by `t = u^{1/b}` (near 0) or `1 − t = v^{1/c}`
/// (near 1), leaving bounded integrands.
pub fn incomplete_beta_quadrature(a: f64, b: f64, c: f64, spec: &QuadratureSpec) -> Result<f64, MathError> {
    check_exponents("incomplete_beta_quadrature", b, c)?;
    if !(0.0..=1.0).contains(&a) {
        return Err(MathError::domain("incomplete_beta_quadrature", format!("upper limit must lie in [0, 1], got {a}")));
    }
    let lower_end = a.min(0.5);
    let mut total = piece_from_zero(lower_end, b, c, spec)?;
    if a > 0.5 {
        // ∫_{1/2}^{a} = ∫_{1−a}^{1/2} s^{c−1}(1−s)^{b−1} ds
        total += piece_from_zero(0.5, c, b, spec)? - piece_from_zero(1.0 - a, c, b, spec)?;
    }
    Ok(total)
}

/// `∫₀^x t^{p−1}(1−t)^{q−1} dt` for `x ≤ 1/2`.
fn piece_from_zero(x: f64, p: f64, q: f64, spec: &QuadratureSpec) -> Result<f64, MathError> {
    if x <= 0.0 {
        return Ok(0.0);
    }
    if p < 1.0 {
        let upper = x.powf(p);
        let r = try_integrate(|u| Ok((1.0 - u.powf(1.0 / p)).powf(q - 1.0)), 0.0, upper, spec)?;
        Ok(r.value / p)
    } else {
        let r = try_integrate(|t| Ok(t.powf(p - 1.0) * (1.0 - t).powf(q - 1.0)), 0.0, x, spec)?;
        Ok(r.value)
    }
}
