//! Reference values from brute-force oracles that share no code with the
//! evaluators under test.

use isac_core::commrate::{avg_comm_rate, h_function};
use isac_core::mathkern::{hamdi_rate, incomplete_beta, integrate_semi_infinite, GammaLaplace};
use isac_core::mcsim::{
    mc_comm_rate, mc_conditional_sense_laplace, sample_point_counts, sample_ppp, sample_rq_over_2r, McConfig, Partition,
};
use isac_core::senserate::{laplace_sense_interf_q1, rq_over_2r_ccdf, SenseIntegrandCtx};
use isac_core::validation::oracle::incomplete_beta_oracle;
use isac_core::{FormulaVariant, NetworkParams, QuadratureSpec, ResourceAllocation};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Gamma};

#[test]
fn incomplete_beta_half_half_three_halves() {
    let got = incomplete_beta(0.5, 0.5, 1.5).unwrap();
    let want = incomplete_beta_oracle(0.5, 0.5, 1.5, 1e-9);
    assert!((got - want).abs() <= 1e-8 * want, "{got} vs {want}");
}

/// Trapezoid rule on `u = ln z`, 10⁷ nodes over `[1e-12, 80]`.
fn log_grid_trapezoid(f: impl Fn(f64) -> f64) -> f64 {
    let n = 10_000_000usize;
    let (a, b) = ((1e-12f64).ln(), 80f64.ln());
    let h = (b - a) / n as f64;
    let g = |i: usize| {
        let z = (a + i as f64 * h).exp();
        f(z) * z
    };
    let inner: f64 = (1..n).map(g).sum();
    h * (inner + 0.5 * (g(0) + g(n)))
}

#[test]
fn semi_infinite_matches_grid_oracle() {
    let f = |z: f64| (1.0 - (1.0 + z).powi(-2)) / z * (-z).exp();
    let want = log_grid_trapezoid(f);
    let got = integrate_semi_infinite(f, &QuadratureSpec { rel_tol: 1e-10, ..Default::default() }).unwrap().value;
    assert!((got - want).abs() < 1e-9, "{got} vs {want}");
}

#[test]
fn hamdi_gamma_over_gamma_matches_monte_carlo() {
    let law = Gamma::new(2.0, 1.0).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let n = 10_000_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let (s, i): (f64, f64) = (law.sample(&mut rng), law.sample(&mut rng));
        let v = (s / i).ln_1p();
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let half = 2.576 * ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let g = GammaLaplace { shape: 2.0, scale: 1.0 };
    let got = hamdi_rate(&g, &g, &QuadratureSpec::default()).unwrap();
    assert!((got - mean).abs() <= half, "{got} vs {mean} ± {half}");
}

#[test]
fn h_function_matches_pgfl_at_half_ratio() {
    // 2πλ ∫_{r_L}^∞ (1 − (1 + z r^α x^{−α})^{−K}) x dx / (πλ r²) with r = 1, r_L = 2.
    let (z, alpha) = (1.0f64, 4.0f64);
    let (r, r_l) = (1.0f64, 2.0f64);
    let f = |x: f64| if x < r_l { 0.0 } else { 2.0 * x * (1.0 - 1.0 / (1.0 + z * r.powf(alpha) * x.powf(-alpha))) / (r * r) };
    let n = 2_000_000usize;
    let (a, b) = (r_l.ln(), 1e5f64.ln());
    let h = (b - a) / n as f64;
    let g = |i: usize| {
        let x = (a + i as f64 * h).exp();
        f(x) * x
    };
    let grid = h * ((1..n).map(g).sum::<f64>() + 0.5 * (g(0) + g(n)));
    let got = h_function(z, 1, alpha, r / r_l).unwrap();
    assert!((got - grid).abs() < 1e-7, "{got} vs {grid}");
}

#[test]
fn cooperative_rate_matches_geometry_average() {
    // Average the conditional rate given (r, r_L) over sampled PPP layouts.
    let params = NetworkParams::default();
    let (k, l) = (8u32, 2u32);
    let alloc = ResourceAllocation::new(k, l, 0, 1);
    let d = alloc.residual_dof(params.m_t) as f64;
    let spec = QuadratureSpec::default();
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    let n = 20_000;
    let (mut sum, mut sq) = (0.0, 0.0);
    for _ in 0..n {
        let real = sample_ppp(params.lambda_b, 6.0, Partition::Comm { l }, &mut rng).unwrap();
        let r = real.distance_to_origin(real.cluster_indices[0]);
        let r_l = real.distance_to_origin(real.cluster_indices[l as usize - 1]);
        let eta = r / r_l;
        let c = std::f64::consts::PI * params.lambda_b * r * r;
        let v = integrate_semi_infinite(
            |z| {
                let s = if z < 1e-300 { d } else { (1.0 - (1.0 + z).powf(-d)) / z };
                s * (-c * h_function(z, k, params.alpha, eta).unwrap()).exp()
            },
            &spec,
        )
        .unwrap()
        .value;
        sum += v;
        sq += v * v;
    }
    let mean = sum / n as f64;
    let half = 2.576 * ((sq / n as f64 - mean * mean) / n as f64).sqrt();
    let got = avg_comm_rate(&params, &alloc, &spec, FormulaVariant::Rederived).unwrap();
    assert!((got - mean).abs() <= half, "{got} vs {mean} ± {half}");
}

#[test]
fn comm_optimum_matches_monte_carlo() {
    let params = NetworkParams::default();
    let alloc = ResourceAllocation::new(12, 1, 0, 1);
    let est = mc_comm_rate(&params, &alloc, &McConfig { trials: 100_000, seed: 31, ..Default::default() }).unwrap();
    let got = avg_comm_rate(&params, &alloc, &QuadratureSpec::default(), FormulaVariant::Rederived).unwrap();
    assert!(est.contains(got), "{got} vs {} ± {}", est.mean, est.half_width);
}

#[test]
fn conditional_sensing_transform_matches_monte_carlo() {
    let params = NetworkParams::default();
    let (z, r) = (1.0, 0.5);
    let mc = McConfig { trials: 200_000, seed: 5, ..Default::default() };
    let est = mc_conditional_sense_laplace(&params, 1, z, r, &mc).unwrap();
    let ctx = SenseIntegrandCtx::from_parts(&params, 1, 1);
    let got = laplace_sense_interf_q1(&ctx, z, r, &QuadratureSpec::default(), FormulaVariant::Rederived).unwrap();
    assert!(est.contains(got), "{got} vs {} ± {}", est.mean, est.half_width);
}

#[test]
fn window_point_count_is_poisson_mean() {
    let params = NetworkParams::default();
    let mc = McConfig { trials: 10_000, seed: 8, ..Default::default() };
    let counts = sample_point_counts(&params, &mc).unwrap();
    let mean = counts.iter().sum::<usize>() as f64 / counts.len() as f64;
    let want = std::f64::consts::PI * 400.0;
    assert!((mean / want - 1.0).abs() < 0.01, "{mean} vs {want}");
}

#[test]
fn large_cluster_ccdf_printed_and_empirical() {
    let printed = rq_over_2r_ccdf(1.05, 50).unwrap();
    assert!(printed >= 0.99, "{printed}");
    let params = NetworkParams::default();
    let xs = sample_rq_over_2r(&params, 50, &McConfig { trials: 20_000, seed: 3, window_radius_factor: 10.0, ..Default::default() }).unwrap();
    let empirical = xs.iter().filter(|&&x| x > 1.05).count() as f64 / xs.len() as f64;
    assert!(empirical >= 0.95, "{empirical}");
}

#[test]
fn different_seeds_agree_within_ci() {
    let params = NetworkParams::default();
    let alloc = ResourceAllocation::new(4, 1, 0, 1);
    let a = mc_comm_rate(&params, &alloc, &McConfig { trials: 20_000, seed: 100, window_radius_factor: 10.0, ..Default::default() }).unwrap();
    let b = mc_comm_rate(&params, &alloc, &McConfig { trials: 20_000, seed: 200, window_radius_factor: 10.0, ..Default::default() }).unwrap();
    assert_ne!(a.mean, b.mean);
    assert!(a.overlaps(&b), "{a:?} {b:?}");
}
