use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::MathError;

/// Tolerances and budget for adaptive quadrature.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct QuadratureSpec {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum number of interval bisections.
    pub max_refinements: usize,
    /// Where `(0, ∞)` is split before the tail is compactified.
    pub split_point: f64,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec { rel_tol: 1e-6, abs_tol: 1e-12, max_refinements: 500, split_point: 1.0 }
    }
}

impl QuadratureSpec {
    pub fn validate(&self) -> Result<(), MathError> {
        if !(self.rel_tol > 0.0) {
            return Err(MathError::domain("QuadratureSpec", format!("rel_tol must be > 0, got {}", self.rel_tol)));
        }
        if !(self.abs_tol > 0.0) {
            return Err(MathError::domain("QuadratureSpec", format!("abs_tol must be > 0, got {}", self.abs_tol)));
        }
        if self.max_refinements < 1 {
            return Err(MathError::domain("QuadratureSpec", "max_refinements must be >= 1"));
        }
        if !(self.split_point > 0.0 && self.split_point.is_finite()) {
            return Err(MathError::domain("QuadratureSpec", format!("split_point must be finite and > 0, got {}", self.split_point)));
        }
        Ok(())
    }

    /// Spec for an inner integral: tolerances divided by `factor`, budget kept.
    pub fn tightened(&self, factor: f64) -> Self {
        QuadratureSpec { rel_tol: self.rel_tol / factor, abs_tol: self.abs_tol / factor, ..*self }
    }
}

/// Result of a converged quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub abs_error: f64,
    pub intervals: usize,
}

// Gauss–Kronrod 10/21 point rule (QUADPACK qk21 abscissae and weights).
#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.000_000_000_000_000_000_000_000_000_000_000,
];
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];
#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

/// Exponent of the tail map `z = split · v^{-TAIL_POWER}`. An algebraic tail
/// `z^{-p}` becomes `v^{TAIL_POWER·(p−1) − 1}`, bounded for `p ≥ 1.25`.
const TAIL_POWER: f64 = 4.0;

struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Segment {}
impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn checked<F>(f: &mut F, x: f64) -> Result<f64, MathError>
where
    F: FnMut(f64) -> Result<f64, MathError>,
{
    let v = f(x)?;
    if v.is_finite() {
        Ok(v)
    } else {
        Err(MathError::NonFinite { x, value: v })
    }
}

fn gk21<F>(f: &mut F, a: f64, b: f64) -> Result<Segment, MathError>
where
    F: FnMut(f64) -> Result<f64, MathError>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let f_center = checked(f, center)?;
    let mut res_gauss = 0.0;
    let mut res_kronrod = f_center * WGK[10];
    let mut res_abs = res_kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];

    for j in 0..5 {
        let jtw = 2 * j + 1;
        let dx = half * XGK[jtw];
        let f1 = checked(f, center - dx)?;
        let f2 = checked(f, center + dx)?;
        fv1[jtw] = f1;
        fv2[jtw] = f2;
        res_gauss += WG[j] * (f1 + f2);
        res_kronrod += WGK[jtw] * (f1 + f2);
        res_abs += WGK[jtw] * (f1.abs() + f2.abs());
    }
    for j in 0..5 {
        let jtwm1 = 2 * j;
        let dx = half * XGK[jtwm1];
        let f1 = checked(f, center - dx)?;
        let f2 = checked(f, center + dx)?;
        fv1[jtwm1] = f1;
        fv2[jtwm1] = f2;
        res_kronrod += WGK[jtwm1] * (f1 + f2);
        res_abs += WGK[jtwm1] * (f1.abs() + f2.abs());
    }

    let mean = 0.5 * res_kronrod;
    let mut res_asc = WGK[10] * (f_center - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_kronrod * half;
    res_abs *= half.abs();
    res_asc *= half.abs();
    let mut err = ((res_kronrod - res_gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Ok(Segment { a, b, value, error: err })
}

fn adaptive<F>(mut f: F, breakpoints: &[f64], spec: &QuadratureSpec) -> Result<Integral, MathError>
where
    F: FnMut(f64) -> Result<f64, MathError>,
{
    spec.validate()?;
    let mut heap = BinaryHeap::new();
    for w in breakpoints.windows(2) {
        if w[1] > w[0] {
            heap.push(gk21(&mut f, w[0], w[1])?);
        }
    }
    let mut refinements = 0;
    loop {
        let (value, error) = heap.iter().fold((0.0, 0.0), |(v, e), s| (v + s.value, e + s.error));
        if error <= spec.abs_tol.max(spec.rel_tol * value.abs()) {
            return Ok(Integral { value, abs_error: error, intervals: heap.len() });
        }
        let worst = match heap.pop() {
            Some(s) => s,
            None => return Ok(Integral { value: 0.0, abs_error: 0.0, intervals: 0 }),
        };
        let mid = 0.5 * (worst.a + worst.b);
        let too_narrow = !(mid > worst.a && mid < worst.b);
        if refinements >= spec.max_refinements || too_narrow {
            heap.push(worst);
            return Err(MathError::NonConvergence { value, abs_error: error, intervals: heap.len() });
        }
        heap.push(gk21(&mut f, worst.a, mid)?);
        heap.push(gk21(&mut f, mid, worst.b)?);
        refinements += 1;
    }
}

/// Adaptive Gauss–Kronrod quadrature of a fallible integrand over `[lo, hi]`.
pub fn try_integrate<F>(f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Integral, MathError>
where
    F: FnMut(f64) -> Result<f64, MathError>,
{
    if !(lo.is_finite() && hi.is_finite()) {
        return Err(MathError::domain("integrate", format!("finite limits required, got [{lo}, {hi}]")));
    }
    if hi < lo {
        let r = adaptive(f, &[hi, lo], spec)?;
        return Ok(Integral { value: -r.value, ..r });
    }
    adaptive(f, &[lo, hi], spec)
}

pub fn integrate<F>(mut f: F, lo: f64, hi: f64, spec: &QuadratureSpec) -> Result<Integral, MathError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate(|x| Ok(f(x)), lo, hi, spec)
}

/// `∫₀^∞ f(z) dz`: linear on `(0, split]`, and `z = split · v^{-4}` on the
/// tail, both pieces refined under one global error budget. The endpoints
/// `z = 0` and `z = ∞` are never sampled.
pub fn try_integrate_semi_infinite<F>(mut f: F, spec: &QuadratureSpec) -> Result<Integral, MathError>
where
    F: FnMut(f64) -> Result<f64, MathError>,
{
    spec.validate()?;
    let s = spec.split_point;
    let mapped = |u: f64| -> Result<f64, MathError> {
        if u <= 1.0 {
            Ok(f(s * u)? * s)
        } else {
            let v = 2.0 - u;
            let z = s * v.powf(-TAIL_POWER);
            if !z.is_finite() {
                return Ok(0.0);
            }
            let jac = TAIL_POWER * s * v.powf(-TAIL_POWER - 1.0);
            let fz = f(z)?;
            if fz == 0.0 {
                Ok(0.0)
            } else {
                Ok(fz * jac)
            }
        }
    };
    adaptive(mapped, &[0.0, 1.0, 2.0], spec)
}

pub fn integrate_semi_infinite<F>(mut f: F, spec: &QuadratureSpec) -> Result<Integral, MathError>
where
    F: FnMut(f64) -> f64,
{
    try_integrate_semi_infinite(|z| Ok(f(z)), spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let r = integrate(|x| 3.0 * x * x, 0.0, 2.0, &QuadratureSpec::default()).unwrap();
        assert!((r.value - 8.0).abs() < 1e-13);
    }

    #[test]
    fn reversed_limits_flip_sign() {
        let r = integrate(|x| x, 1.0, 0.0, &QuadratureSpec::default()).unwrap();
        assert!((r.value + 0.5).abs() < 1e-14);
    }

    #[test]
    fn exponential_tail() {
        let r = integrate_semi_infinite(|z| (-z).exp(), &QuadratureSpec::default()).unwrap();
        assert!((r.value - 1.0).abs() < 1e-8, "{}", r.value);
    }

    #[test]
    fn cauchy_tail() {
        let r = integrate_semi_infinite(|z| 1.0 / (1.0 + z * z), &QuadratureSpec::default()).unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-7, "{}", r.value);
    }

    #[test]
    fn slow_algebraic_tail() {
        // ∫₀^∞ (1+z)^{-3/2} dz = 2
        let r = integrate_semi_infinite(|z| (1.0 + z).powf(-1.5), &QuadratureSpec::default()).unwrap();
        assert!((r.value - 2.0).abs() < 2e-6, "{}", r.value);
    }

    #[test]
    fn split_point_invariance() {
        let f = |z: f64| -(-2.0 * z.ln_1p()).exp_m1() / z * (-z).exp();
        let vals: Vec<f64> = [0.5, 1.0, 4.0]
            .iter()
            .map(|&s| integrate_semi_infinite(f, &QuadratureSpec { split_point: s, ..Default::default() }).unwrap().value)
            .collect();
        for v in &vals {
            assert!((v - vals[0]).abs() <= 2e-6 * vals[0].abs(), "{vals:?}");
        }
    }

    #[test]
    fn starved_budget_reports_nonconvergence() {
        let spec = QuadratureSpec { max_refinements: 1, rel_tol: 1e-14, abs_tol: 1e-300, ..Default::default() };
        let err = integrate(|x| x.abs().sqrt().recip().min(1e6), -1.0, 1.0, &spec).unwrap_err();
        match err {
            MathError::NonConvergence { value, abs_error, .. } => {
                assert!(value.is_finite() && abs_error > 0.0);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn non_finite_integrand_is_an_error() {
        let err = integrate(|_| f64::NAN, 0.0, 1.0, &QuadratureSpec::default()).unwrap_err();
        assert!(matches!(err, MathError::NonFinite { .. }));
    }

    #[test]
    fn invalid_spec_is_rejected() {
        let spec = QuadratureSpec { rel_tol: 0.0, ..Default::default() };
        assert!(matches!(integrate(|x| x, 0.0, 1.0, &spec), Err(MathError::Domain { .. })));
    }
}
