//! Channel-level zero-forcing oracle for the Γ gain laws.
//!
//! The tagged BS draws i.i.d. `CN(0, I_{M_t})` channels for its `K` users,
//! for the `K(L−1)` users of neighbouring cells it cooperates with, and for
//! the `J(Q−1)` equivalent sensing directions it must protect. Each user's
//! precoder is the unit-norm projection of its channel onto the orthogonal
//! complement of all other constraint channels.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist};

use super::geometry::{stream_rng, Stream};
use super::{ks_test, KsResult, McConfig, McError};
use crate::netmodel::{validate, NetworkParams, ResourceAllocation};
use crate::Error;

type CVec = Vec<Complex64>;

fn cn_vector<R: Rng + ?Sized>(m: usize, rng: &mut R) -> CVec {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    (0..m)
        .map(|_| {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            Complex64::new(re * s, im * s)
        })
        .collect()
}

fn dot(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

fn norm2(a: &[Complex64]) -> f64 {
    a.iter().map(|x| x.norm_sqr()).sum()
}

/// Removes the components of `v` along an orthonormal `basis` (twice, for
/// accuracy).
fn project_out(v: &mut [Complex64], basis: &[CVec]) {
    for _ in 0..2 {
        for q in basis {
            let c = dot(q, v);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
    }
}

/// Orthonormal basis of the span of `vs` by modified Gram–Schmidt.
fn orthonormal_basis(vs: &[&CVec]) -> Result<Vec<CVec>, McError> {
    let mut basis: Vec<CVec> = Vec::with_capacity(vs.len());
    for v in vs {
        let before = norm2(v);
        let mut w = (*v).clone();
        project_out(&mut w, &basis);
        let n = norm2(&w);
        if n <= 1e-20 * before {
            return Err(McError::RankDeficiency);
        }
        let inv = 1.0 / n.sqrt();
        w.iter_mut().for_each(|x| *x *= inv);
        basis.push(w);
    }
    Ok(basis)
}

/// Fitted `Γ(K, θ)` law of an aggregate gain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GammaFit {
    pub shape: f64,
    /// Moment estimate `mean/K`.
    pub scale: f64,
    pub ks: KsResult,
}

fn fit_gamma(samples: &[f64], shape: f64) -> GammaFit {
    let mean = samples.iter().sum::<f64>() / samples.len() as f64;
    let scale = mean / shape;
    let law = GammaDist::new(shape, 1.0 / scale).expect("positive parameters");
    GammaFit { shape, scale, ks: ks_test(samples, |x| law.cdf(x)) }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ChannelGains {
    /// Residual DoF `M_t − KL − J(Q−1) + 1`.
    pub d: u32,
    /// `|h₁^H f₁|²` of the tagged user.
    pub signal: Vec<f64>,
    /// `Σ_k |g^H f_k|²` towards an unrelated receiver.
    pub comm_interference: Vec<f64>,
    /// `Σ_k |t^H f_k|²` towards an isotropic target direction.
    pub sensing_signal: Vec<f64>,
    /// `Σ_k |g^H f_k|²` through an equivalent BS-to-BS channel.
    pub sensing_interference: Vec<f64>,
    /// Largest `|c^H f₁|²/‖c‖²` over all nulled directions.
    pub max_nulled_leak: f64,
    pub rank_resamples: usize,
    /// KS test of `signal` against `Γ(d, 1)`.
    pub ks_signal: KsResult,
    pub comm_interference_fit: GammaFit,
    pub sensing_signal_fit: GammaFit,
    pub sensing_interference_fit: GammaFit,
}

struct TrialGains {
    signal: f64,
    comm_interference: f64,
    sensing_signal: f64,
    sensing_interference: f64,
    leak: f64,
    attempts: u32,
}

fn one_trial(m_t: usize, alloc: &ResourceAllocation, seed: u64, trial: u64) -> Result<TrialGains, McError> {
    let (k, l) = (alloc.k as usize, alloc.l as usize);
    let nu = alloc.nu() as usize;
    for attempt in 0..64u32 {
        let mut rng = stream_rng(seed, trial, Stream::Channel, 0, attempt);
        let own: Vec<CVec> = (0..k).map(|_| cn_vector(m_t, &mut rng)).collect();
        let protected: Vec<CVec> = (0..k * (l - 1) + nu).map(|_| cn_vector(m_t, &mut rng)).collect();
        let g_comm = cn_vector(m_t, &mut rng);
        let t = cn_vector(m_t, &mut rng);
        let g_sense = cn_vector(m_t, &mut rng);

        let mut precoders = Vec::with_capacity(k);
        let mut failed = false;
        for user in 0..k {
            let constraints: Vec<&CVec> = own
                .iter()
                .enumerate()
                .filter(|(i, _)| *i != user)
                .map(|(_, v)| v)
                .chain(protected.iter())
                .collect();
            let basis = match orthonormal_basis(&constraints) {
                Ok(b) => b,
                Err(_) => {
                    failed = true;
                    break;
                }
            };
            let mut f = own[user].clone();
            project_out(&mut f, &basis);
            let n = norm2(&f);
            if n <= 1e-20 * norm2(&own[user]) {
                failed = true;
                break;
            }
            let inv = 1.0 / n.sqrt();
            f.iter_mut().for_each(|x| *x *= inv);
            precoders.push(f);
        }
        if failed {
            continue;
        }
        let f1 = &precoders[0];
        let leak = own[1..]
            .iter()
            .chain(protected.iter())
            .map(|c| dot(c, f1).norm_sqr() / norm2(c))
            .fold(0.0, f64::max);
        let aggregate = |v: &CVec| precoders.iter().map(|f| dot(v, f).norm_sqr()).sum::<f64>();
        return Ok(TrialGains {
            signal: dot(&own[0], f1).norm_sqr(),
            comm_interference: aggregate(&g_comm),
            sensing_signal: aggregate(&t),
            sensing_interference: aggregate(&g_sense),
            leak,
            attempts: attempt,
        });
    }
    Err(McError::RankDeficiency)
}

/// Samples the effective gains of an explicit ZF design, `mc.trials` draws.
pub fn mc_channel_level_gains(params: &NetworkParams, alloc: &ResourceAllocation, mc: &McConfig) -> Result<ChannelGains, Error> {
    mc.validate()?;
    let v = validate(params, alloc);
    if !v.is_empty() {
        return Err(Error::Infeasible(v));
    }
    if alloc.k == 0 {
        return Err(Error::Config("channel-level oracle needs k >= 1".into()));
    }
    let m_t = params.m_t as usize;
    let d = alloc.residual_dof(params.m_t) as u32;
    let trials: Vec<TrialGains> = (0..mc.trials as u64)
        .into_par_iter()
        .map(|trial| one_trial(m_t, alloc, mc.seed, trial))
        .collect::<Result<_, _>>()?;
    let col = |f: fn(&TrialGains) -> f64| trials.iter().map(f).collect::<Vec<f64>>();
    let signal = col(|t| t.signal);
    let comm_interference = col(|t| t.comm_interference);
    let sensing_signal = col(|t| t.sensing_signal);
    let sensing_interference = col(|t| t.sensing_interference);
    let law = GammaDist::new(d as f64, 1.0).expect("positive shape");
    let kf = alloc.k as f64;
    Ok(ChannelGains {
        d,
        ks_signal: ks_test(&signal, |x| law.cdf(x)),
        comm_interference_fit: fit_gamma(&comm_interference, kf),
        sensing_signal_fit: fit_gamma(&sensing_signal, kf),
        sensing_interference_fit: fit_gamma(&sensing_interference, kf),
        max_nulled_leak: trials.iter().map(|t| t.leak).fold(0.0, f64::max),
        rank_resamples: trials.iter().map(|t| t.attempts as usize).sum(),
        signal,
        comm_interference,
        sensing_signal,
        sensing_interference,
    })
}
