//! Seeded Monte Carlo oracle for the analytical evaluators.
//!
//! Every trial draws its own BS layout and gains from counter-derived
//! ChaCha8 streams keyed by `(seed, trial, stream, index)`, so estimates
//! do not depend on the number of worker threads. Layouts are generated in
//! rings of width `5/√λ` with one stream per ring: growing the window keeps
//! the inner points and their gains, which makes truncation comparisons
//! common-random-number comparisons.

mod channel;
mod geometry;
mod ks;

pub use channel::{mc_channel_level_gains, ChannelGains, GammaFit};
pub use geometry::{sample_points, sample_ppp, Partition, PppRealization, RING_WIDTH_FACTOR};
pub use ks::{kolmogorov_p_value, ks_test, ks_two_sample, KsResult};

use std::io::{self, Write};

use rand_distr::{Distribution, Gamma};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal};
use thiserror::Error as ThisError;

use crate::netmodel::{validate, NetworkParams, ResourceAllocation};
use crate::Error;
use geometry::{ring_layout, stream_rng, RingLayout, Stream};

/// SIR recorded for trials whose interferer set is empty.
pub const SIR_CAP: f64 = 1e12;

/// Attempts per trial before an empty window is treated as fatal.
const MAX_ATTEMPTS: u32 = 64;

#[derive(Debug, Clone, PartialEq, Eq, ThisError)]
pub enum McError {
    #[error("no usable BS in the simulation window")]
    EmptyRealization,
    #[error("sampled constraint channels are linearly dependent")]
    RankDeficiency,
    #[error("invalid Monte Carlo configuration: {0}")]
    InvalidConfig(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McConfig {
    pub trials: usize,
    pub seed: u64,
    /// Window radius in units of `1/√λ_b`.
    pub window_radius_factor: f64,
    pub ci_level: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        McConfig { trials: 100_000, seed: 1, window_radius_factor: 20.0, ci_level: 0.99 }
    }
}

impl McConfig {
    pub fn validate(&self) -> Result<(), McError> {
        if self.trials < 1 {
            return Err(McError::InvalidConfig("trials must be >= 1".into()));
        }
        if !(self.window_radius_factor >= 5.0 && self.window_radius_factor.is_finite()) {
            return Err(McError::InvalidConfig(format!(
                "window_radius_factor must be >= 5, got {}",
                self.window_radius_factor
            )));
        }
        if !(self.ci_level > 0.0 && self.ci_level < 1.0) {
            return Err(McError::InvalidConfig(format!("ci_level must lie in (0, 1), got {}", self.ci_level)));
        }
        Ok(())
    }

    pub fn window_radius(&self, lambda_b: f64) -> f64 {
        self.window_radius_factor / lambda_b.sqrt()
    }

    /// Two-sided normal quantile for `ci_level`.
    pub fn z_score(&self) -> f64 {
        Normal::new(0.0, 1.0).expect("standard normal").inverse_cdf(0.5 + self.ci_level / 2.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    /// Normal-approximation half-width at the configured level.
    pub half_width: f64,
    pub std_dev: f64,
    pub trials: usize,
    pub seed: u64,
    /// Trials whose SIR was capped at [`SIR_CAP`].
    pub capped: usize,
    /// Layout redraws caused by empty windows.
    pub resampled: usize,
}

impl McEstimate {
    pub fn lower(&self) -> f64 {
        self.mean - self.half_width
    }

    pub fn upper(&self) -> f64 {
        self.mean + self.half_width
    }

    pub fn contains(&self, x: f64) -> bool {
        (self.lower()..=self.upper()).contains(&x)
    }

    pub fn overlaps(&self, other: &McEstimate) -> bool {
        self.lower() <= other.upper() && other.lower() <= self.upper()
    }

    /// Mean and CI of per-trial values, summed in trial order.
    pub fn from_values(values: &[f64], mc: &McConfig) -> Self {
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let std_dev = var.sqrt();
        McEstimate {
            mean,
            half_width: mc.z_score() * std_dev / (n as f64).sqrt(),
            std_dev,
            trials: n,
            seed: mc.seed,
            capped: 0,
            resampled: 0,
        }
    }

    pub fn from_records(records: &[TrialRecord], mc: &McConfig) -> Self {
        let values: Vec<f64> = records.iter().map(|r| r.rate).collect();
        McEstimate {
            capped: records.iter().filter(|r| r.capped).count(),
            resampled: records.iter().map(|r| r.resamples as usize).sum(),
            ..Self::from_values(&values, mc)
        }
    }

    fn exact(value: f64, mc: &McConfig) -> Self {
        McEstimate { mean: value, half_width: 0.0, std_dev: 0.0, trials: mc.trials, seed: mc.seed, capped: 0, resampled: 0 }
    }
}

/// Per-trial outcome.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialRecord {
    pub trial: u64,
    /// Serving distance.
    pub r: f64,
    pub sir: f64,
    /// `log(1 + SIR)` in nats.
    pub rate: f64,
    pub capped: bool,
    pub resamples: u32,
}

/// Writes records as CSV with columns `trial,R,SIR,rate`.
pub fn write_trials_csv<W: Write>(mut w: W, records: &[TrialRecord]) -> io::Result<()> {
    writeln!(w, "trial,R,SIR,rate")?;
    for r in records {
        writeln!(w, "{},{:e},{:e},{:e}", r.trial, r.r, r.sir, r.rate)?;
    }
    Ok(())
}

fn check(params: &NetworkParams, alloc: &ResourceAllocation, mc: &McConfig) -> Result<(), Error> {
    mc.validate()?;
    let v = validate(params, alloc);
    if !v.is_empty() {
        return Err(Error::Infeasible(v));
    }
    Ok(())
}

/// Layout for one trial, redrawn under a new attempt counter until
/// `usable` accepts it.
fn layout_with_retry(
    params: &NetworkParams,
    mc: &McConfig,
    gain_shape: f64,
    trial: u64,
    usable: impl Fn(&RingLayout) -> bool,
) -> Result<(RingLayout, u32), McError> {
    let w = mc.window_radius(params.lambda_b);
    for attempt in 0..MAX_ATTEMPTS {
        let layout = ring_layout(params.lambda_b, w, gain_shape, mc.seed, trial, attempt);
        if usable(&layout) {
            return Ok((layout, attempt));
        }
    }
    Err(McError::EmptyRealization)
}

fn run<F>(mc: &McConfig, trial_fn: F) -> Result<Vec<TrialRecord>, Error>
where
    F: Fn(u64) -> Result<TrialRecord, Error> + Sync + Send,
{
    (0..mc.trials as u64).into_par_iter().map(trial_fn).collect()
}

/// `d^{−α}` from the squared distance.
#[inline]
fn path_gain(d2: f64, alpha: f64) -> f64 {
    let half = alpha / 2.0;
    if half == half.trunc() && half <= 8.0 {
        1.0 / d2.powi(half as i32)
    } else {
        d2.powf(-half)
    }
}

fn capped_sir(signal: f64, interference: f64) -> (f64, bool) {
    if interference > 0.0 {
        let sir = signal / interference;
        (sir, false)
    } else {
        (SIR_CAP, true)
    }
}

/// Per-trial records for the communication rate with signal gain shape `d`.
pub fn comm_trials(params: &NetworkParams, k: u32, l: u32, d: f64, mc: &McConfig) -> Result<Vec<TrialRecord>, Error> {
    mc.validate()?;
    let alpha = params.alpha;
    let signal_gain = Gamma::new(d, 1.0).map_err(|e| Error::Config(format!("signal shape {d}: {e}")))?;
    run(mc, |trial| {
        let (layout, attempt) = layout_with_retry(params, mc, k as f64, trial, |lay| lay.points.len() >= l as usize)?;
        let real = PppRealization::from_points(layout.points, Partition::Comm { l })?;
        let interference: f64 = real
            .interferer_indices
            .iter()
            .map(|&i| layout.gains[i] * path_gain(real.distance2_to_origin(i), alpha))
            .sum();
        let r = real.distance_to_origin(real.serving_index);
        let g = signal_gain.sample(&mut stream_rng(mc.seed, trial, Stream::Signal, 0, attempt));
        let (sir, capped) = capped_sir(g * r.powf(-alpha), interference);
        Ok(TrialRecord { trial, r, sir, rate: sir.ln_1p(), capped, resamples: attempt })
    })
}

/// Monte Carlo estimate of `R_c` from the Γ-gain SIR model.
pub fn mc_comm_rate(params: &NetworkParams, alloc: &ResourceAllocation, mc: &McConfig) -> Result<McEstimate, Error> {
    check(params, alloc, mc)?;
    if alloc.k == 0 {
        return Ok(McEstimate::exact(0.0, mc));
    }
    let d = alloc.residual_dof(params.m_t) as f64;
    let records = comm_trials(params, alloc.k, alloc.l, d, mc)?;
    Ok(McEstimate::from_records(&records, mc))
}

/// Per-trial records for the radar rate.
pub fn sense_trials(params: &NetworkParams, k: u32, q: u32, mc: &McConfig) -> Result<Vec<TrialRecord>, Error> {
    mc.validate()?;
    let (alpha, beta, c) = (params.alpha, params.beta, params.sensing_gain());
    let echo_gain = Gamma::new(k as f64, 1.0).map_err(|e| Error::Config(format!("gain shape {k}: {e}")))?;
    run(mc, |trial| {
        let (layout, attempt) = layout_with_retry(params, mc, k as f64, trial, |lay| !lay.points.is_empty())?;
        let real = PppRealization::from_points(layout.points, Partition::Sense { q })?;
        let r = real.distance_to_origin(real.serving_index);
        let interference: f64 = real
            .interferer_indices
            .iter()
            .map(|&i| layout.gains[i] * path_gain(real.distance2_to_serving(i), alpha))
            .sum();
        let h = echo_gain.sample(&mut stream_rng(mc.seed, trial, Stream::Signal, 0, attempt));
        let (sir, capped) = capped_sir(c * h * r.powf(-2.0 * beta), interference);
        Ok(TrialRecord { trial, r, sir, rate: sir.ln_1p(), capped, resamples: attempt })
    })
}

/// Monte Carlo estimate of `R_s`, including the true interference hole and
/// the true joint law of serving and cluster distances.
pub fn mc_radar_rate(params: &NetworkParams, alloc: &ResourceAllocation, mc: &McConfig) -> Result<McEstimate, Error> {
    check(params, alloc, mc)?;
    if alloc.k == 0 || alloc.j == 0 {
        return Ok(McEstimate::exact(0.0, mc));
    }
    let records = sense_trials(params, alloc.k, alloc.q, mc)?;
    Ok(McEstimate::from_records(&records, mc))
}

/// `E[e^{−z I_S} | R]` for `Q = 1`, by construction: the serving BS sits at
/// `(R, 0)` and the rest of the process is Poisson outside the disk of
/// radius `R` around the target.
pub fn mc_conditional_sense_laplace(params: &NetworkParams, k: u32, z: f64, r: f64, mc: &McConfig) -> Result<McEstimate, Error> {
    mc.validate()?;
    let (alpha, beta) = (params.alpha, params.beta);
    let w = mc.window_radius(params.lambda_b);
    if !(r > 0.0 && r < w) {
        return Err(Error::Config(format!("serving distance {r} must lie inside the window")));
    }
    let scale = r.powf(2.0 * beta);
    let values: Vec<f64> = (0..mc.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let layout = ring_layout(params.lambda_b, w, k as f64, mc.seed, trial, 0);
            let interference: f64 = layout
                .points
                .iter()
                .zip(&layout.gains)
                .filter(|(p, _)| p[0] * p[0] + p[1] * p[1] >= r * r)
                .map(|(p, g)| g * path_gain((p[0] - r).powi(2) + p[1] * p[1], alpha))
                .sum();
            (-z * interference * scale).exp()
        })
        .collect();
    Ok(McEstimate::from_values(&values, mc))
}

/// Per-trial geometry with at least `needed` points and no gains.
fn geometry_trials<T, F>(params: &NetworkParams, mc: &McConfig, needed: usize, f: F) -> Result<Vec<T>, Error>
where
    T: Send,
    F: Fn(&[[f64; 2]]) -> Result<T, Error> + Sync + Send,
{
    mc.validate()?;
    (0..mc.trials as u64)
        .into_par_iter()
        .map(|trial| {
            let (layout, _) = layout_with_retry(params, mc, 0.0, trial, |lay| lay.points.len() >= needed)?;
            f(&layout.points)
        })
        .collect()
}

/// Nearest-BS distances from the origin.
pub fn sample_nearest_distances(params: &NetworkParams, mc: &McConfig) -> Result<Vec<f64>, Error> {
    geometry_trials(params, mc, 1, |pts| {
        Ok(pts.iter().map(|p| p[0] * p[0] + p[1] * p[1]).fold(f64::INFINITY, f64::min).sqrt())
    })
}

/// `η_L = r₁/r_L` samples.
pub fn sample_distance_ratios(params: &NetworkParams, l: u32, mc: &McConfig) -> Result<Vec<f64>, Error> {
    if l < 2 {
        return Err(Error::Config(format!("distance ratio needs l >= 2, got {l}")));
    }
    geometry_trials(params, mc, l as usize, |pts| {
        let real = PppRealization::from_points(pts.to_vec(), Partition::Comm { l })?;
        let r1 = real.distance_to_origin(real.cluster_indices[0]);
        let rl = real.distance_to_origin(real.cluster_indices[l as usize - 1]);
        Ok(r1 / rl)
    })
}

/// `r_Q/(2R)` samples: distance from the serving BS to its `(q−1)`-th
/// nearest neighbour over twice the serving distance.
pub fn sample_rq_over_2r(params: &NetworkParams, q: u32, mc: &McConfig) -> Result<Vec<f64>, Error> {
    if q < 2 {
        return Err(Error::Config(format!("cluster radius needs q >= 2, got {q}")));
    }
    geometry_trials(params, mc, q as usize, |pts| {
        let real = PppRealization::from_points(pts.to_vec(), Partition::Sense { q })?;
        let r = real.distance_to_origin(real.serving_index);
        let r_q = real.distance_to_serving(real.cluster_indices[q as usize - 1]);
        Ok(r_q / (2.0 * r))
    })
}

/// Point counts in the window, one per trial.
pub fn sample_point_counts(params: &NetworkParams, mc: &McConfig) -> Result<Vec<usize>, Error> {
    geometry_trials(params, mc, 0, |pts| Ok(pts.len()))
}
