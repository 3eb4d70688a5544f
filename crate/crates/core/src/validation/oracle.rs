//! Brute-force reference for the incomplete Beta function, sharing no code
//! with the production evaluators.

/// Recursive adaptive Simpson with Richardson correction.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> f64 {
    fn simpson(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64) -> (f64, f64, f64) {
        let m = 0.5 * (a + b);
        let fm = f(m);
        (m, fm, (b - a) / 6.0 * (fa + 4.0 * fm + fb))
    }
    #[allow(clippy::too_many_arguments)]
    fn recurse(f: &dyn Fn(f64) -> f64, a: f64, fa: f64, b: f64, fb: f64, m: f64, fm: f64, whole: f64, tol: f64, depth: u32) -> f64 {
        let (lm, flm, left) = simpson(f, a, fa, m, fm);
        let (rm, frm, right) = simpson(f, m, fm, b, fb);
        let delta = left + right - whole;
        if depth == 0 || delta.abs() <= 15.0 * tol {
            return left + right + delta / 15.0;
        }
        recurse(f, a, fa, m, fm, lm, flm, left, tol / 2.0, depth - 1)
            + recurse(f, m, fm, b, fb, rm, frm, right, tol / 2.0, depth - 1)
    }
    if hi <= lo {
        return 0.0;
    }
    let (fa, fb) = (f(lo), f(hi));
    let (m, fm, whole) = simpson(f, lo, fa, hi, fb);
    recurse(f, lo, fa, hi, fb, m, fm, whole, tol, 48)
}

/// `∫₀ᵃ t^{b−1}(1−t)^{c−1} dt`. Singular endpoints are removed by `u = t^b`
/// near 0 and `s = (1−t)^c` near 1.
pub fn incomplete_beta_oracle(a: f64, b: f64, c: f64, tol: f64) -> f64 {
    let mid = 0.5 * a;
    let lower = if b < 1.0 {
        adaptive_simpson(&|u: f64| (1.0 - u.powf(1.0 / b)).powf(c - 1.0) / b, 0.0, mid.powf(b), tol)
    } else {
        adaptive_simpson(&|t: f64| t.powf(b - 1.0) * (1.0 - t).powf(c - 1.0), 0.0, mid, tol)
    };
    let upper = if c < 1.0 {
        adaptive_simpson(&|s: f64| (1.0 - s.powf(1.0 / c)).powf(b - 1.0) / c, (1.0 - a).powf(c), (1.0 - mid).powf(c), tol)
    } else {
        adaptive_simpson(&|t: f64| t.powf(b - 1.0) * (1.0 - t).powf(c - 1.0), mid, a, tol)
    };
    lower + upper
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn elementary_cases() {
        assert!((incomplete_beta_oracle(0.3, 1.0, 1.0, 1e-12) - 0.3).abs() < 1e-14);
        // ∫₀¹ t^{-1/2} dt = 2.
        assert!((incomplete_beta_oracle(1.0, 0.5, 1.0, 1e-12) - 2.0).abs() < 1e-11);
        // ∫₀¹ t^{-1/2}(1−t)^{-1/2} dt = π.
        assert!((incomplete_beta_oracle(1.0, 0.5, 0.5, 1e-12) - std::f64::consts::PI).abs() < 1e-10);
    }

    #[test]
    fn simpson_is_exact_on_cubics() {
        let v = adaptive_simpson(&|x: f64| x * x * x - x, 0.0, 2.0, 1e-12);
        assert!((v - 2.0).abs() < 1e-13);
    }
}
