//! Network parameters, integer resource allocations and the DoF feasibility
//! rules shared by every evaluator.
//!
//! Distances are in km and densities in BS/km². Rates are nats per channel
//! use; ASE values are nats/use/km².

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Which form of the closed-form rate expressions to evaluate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FormulaVariant {
    /// The printed closed forms, evaluated verbatim.
    AsWritten,
    /// The same derivation steps re-done with the pathloss and distance laws
    /// of the system model, integrals evaluated numerically.
    #[default]
    Rederived,
}

impl FormulaVariant {
    pub fn as_str(self) -> &'static str {
        match self {
            FormulaVariant::AsWritten => "as_written",
            FormulaVariant::Rederived => "rederived",
        }
    }
}

impl fmt::Display for FormulaVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FormulaVariant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.replace('-', "_").as_str() {
            "as_written" => Ok(FormulaVariant::AsWritten),
            "rederived" => Ok(FormulaVariant::Rederived),
            other => Err(format!("unknown formula variant `{other}` (expected as_written or rederived)")),
        }
    }
}

/// Physical and deployment constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkParams {
    /// BS density (BS/km²).
    pub lambda_b: f64,
    /// User density, only checked against `lambda_b`.
    pub lambda_u: Option<f64>,
    /// Target density, only checked against `lambda_b`.
    pub lambda_s: Option<f64>,
    pub m_t: u32,
    pub m_r: u32,
    /// Communication and BS-to-BS pathloss exponent.
    pub alpha: f64,
    /// One-way sensing pathloss exponent (the echo sees `2·beta`).
    pub beta: f64,
    /// Radar cross-section.
    pub xi: f64,
    /// Matched-filter gain.
    pub delta_t: f64,
    /// Transmit power (W). Cancels in every SIR.
    pub p_t: f64,
    pub j_max: u32,
}

impl Default for NetworkParams {
    fn default() -> Self {
        NetworkParams {
            lambda_b: 1.0,
            lambda_u: None,
            lambda_s: None,
            m_t: 20,
            m_r: 10,
            alpha: 4.0,
            beta: 2.0,
            xi: 0.1,
            delta_t: 1.0,
            p_t: 1.0,
            j_max: 10,
        }
    }
}

impl NetworkParams {
    /// Deterministic echo scale `ξ·ΔT·M_r`.
    pub fn sensing_gain(&self) -> f64 {
        self.xi * self.delta_t * self.m_r as f64
    }

    /// Whether the echo and interference exponents satisfy `α = 2β`.
    pub fn is_alpha_twice_beta(&self) -> bool {
        (self.alpha - 2.0 * self.beta).abs() <= 1e-12 * self.alpha.abs()
    }

    pub fn violations(&self) -> Vec<Violation> {
        let mut v = Vec::new();
        let mut bad = |parameter: &'static str, value: f64, requirement: &'static str| {
            v.push(Violation::Parameter { parameter, value, requirement });
        };
        if !(self.lambda_b > 0.0 && self.lambda_b.is_finite()) {
            bad("lambda_b", self.lambda_b, "> 0");
        }
        if self.m_t < 2 {
            bad("m_t", self.m_t as f64, ">= 2");
        }
        if self.m_r < 1 {
            bad("m_r", self.m_r as f64, ">= 1");
        }
        if !(self.alpha > 2.0 && self.alpha.is_finite()) {
            bad("alpha", self.alpha, "> 2");
        }
        if !(self.beta > 1.0 && self.beta.is_finite()) {
            bad("beta", self.beta, "> 1");
        }
        if !(self.xi > 0.0) {
            bad("xi", self.xi, "> 0");
        }
        if !(self.delta_t > 0.0) {
            bad("delta_t", self.delta_t, "> 0");
        }
        if !(self.p_t > 0.0) {
            bad("p_t", self.p_t, "> 0");
        }
        if self.j_max < 1 {
            bad("j_max", self.j_max as f64, ">= 1");
        }
        if let Some(lu) = self.lambda_u {
            if !(lu >= self.lambda_b) {
                bad("lambda_u", lu, ">= lambda_b");
            }
        }
        if let Some(ls) = self.lambda_s {
            if !(ls >= self.lambda_b) {
                bad("lambda_s", ls, ">= lambda_b");
            }
        }
        v
    }
}

/// Integer decision tuple: users per BS `k`, communication cluster size `l`,
/// targets per BS `j`, sensing cluster size `q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ResourceAllocation {
    pub k: u32,
    pub l: u32,
    pub j: u32,
    pub q: u32,
}

impl ResourceAllocation {
    pub const fn new(k: u32, l: u32, j: u32, q: u32) -> Self {
        ResourceAllocation { k, l, j, q }
    }

    /// Antennas spent on sensing nulling, `J·(Q−1)`.
    pub fn nu(&self) -> u64 {
        self.j as u64 * self.q.saturating_sub(1) as u64
    }

    /// `K·L + J·(Q−1) + 1`.
    pub fn dof_used(&self) -> u64 {
        self.k as u64 * self.l as u64 + self.nu() + 1
    }

    /// Shape of the desired-signal gain, `M_t − K·L − J·(Q−1) + 1`.
    pub fn residual_dof(&self, m_t: u32) -> i64 {
        m_t as i64 - self.k as i64 * self.l as i64 - self.nu() as i64 + 1
    }
}

impl fmt::Display for ResourceAllocation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(K={}, L={}, J={}, Q={})", self.k, self.l, self.j, self.q)
    }
}

/// One broken invariant, with the offending values.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "violation", rename_all = "snake_case")]
pub enum Violation {
    Parameter { parameter: &'static str, value: f64, requirement: &'static str },
    ClusterSize { cluster: &'static str, value: u32 },
    DegenerateCluster { cluster: &'static str, value: u32, reason: &'static str },
    DofExceeded { used: u64, m_t: u32 },
    TooManyTargets { j: u32, j_max: u32 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Parameter { parameter, value, requirement } => {
                write!(f, "{parameter} = {value} violates {parameter} {requirement}")
            }
            Violation::ClusterSize { cluster, value } => write!(f, "cluster size {cluster} = {value} must be >= 1"),
            Violation::DegenerateCluster { cluster, value, reason } => {
                write!(f, "cluster size {cluster} = {value}: {reason}")
            }
            Violation::DofExceeded { used, m_t } => {
                write!(f, "K·L + J·(Q−1) + 1 = {used} exceeds M_t = {m_t}")
            }
            Violation::TooManyTargets { j, j_max } => write!(f, "J = {j} exceeds J_max = {j_max}"),
        }
    }
}

/// Every violated invariant of `params` and `alloc`; empty means feasible.
///
/// Besides the DoF budget and `J ≤ J_max`, a cluster with nothing to serve
/// is canonicalized: `K = 0` requires `L = 1` and `J = 0` requires `Q = 1`.
pub fn validate(params: &NetworkParams, alloc: &ResourceAllocation) -> Vec<Violation> {
    let mut v = params.violations();
    if alloc.l < 1 {
        v.push(Violation::ClusterSize { cluster: "l", value: alloc.l });
    }
    if alloc.q < 1 {
        v.push(Violation::ClusterSize { cluster: "q", value: alloc.q });
    }
    if alloc.k == 0 && alloc.l > 1 {
        v.push(Violation::DegenerateCluster { cluster: "l", value: alloc.l, reason: "K = 0 requires L = 1" });
    }
    if alloc.j == 0 && alloc.q > 1 {
        v.push(Violation::DegenerateCluster { cluster: "q", value: alloc.q, reason: "J = 0 requires Q = 1" });
    }
    if alloc.dof_used() > params.m_t as u64 {
        v.push(Violation::DofExceeded { used: alloc.dof_used(), m_t: params.m_t });
    }
    if alloc.j > params.j_max {
        v.push(Violation::TooManyTargets { j: alloc.j, j_max: params.j_max });
    }
    v
}

pub fn is_feasible(params: &NetworkParams, alloc: &ResourceAllocation) -> bool {
    validate(params, alloc).is_empty()
}

/// All feasible allocations in lexicographic `(k, l, j, q)` order.
pub fn enumerate_feasible(params: &NetworkParams) -> Vec<ResourceAllocation> {
    if !params.violations().is_empty() {
        return Vec::new();
    }
    let budget = params.m_t as u64 - 1;
    let mut out = Vec::new();
    for k in 0..params.m_t {
        let l_max = if k == 0 { 1 } else { (budget / k as u64) as u32 };
        for l in 1..=l_max {
            let left = budget - k as u64 * l as u64;
            for j in 0..=params.j_max {
                let q_max = if j == 0 { 1 } else { 1 + (left / j as u64) as u32 };
                for q in 1..=q_max {
                    out.push(ResourceAllocation { k, l, j, q });
                }
            }
        }
    }
    out
}

/// Per-link rates and network ASE of one allocation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PerfPoint {
    pub r_c: f64,
    pub r_s: f64,
    pub t_c: f64,
    pub t_s: f64,
    pub t_sum: f64,
}

impl PerfPoint {
    pub fn new(lambda_b: f64, alloc: &ResourceAllocation, r_c: f64, r_s: f64) -> Self {
        let t_c = lambda_b * alloc.k as f64 * r_c;
        let t_s = lambda_b * alloc.j as f64 * r_s;
        PerfPoint { r_c, r_s, t_c, t_s, t_sum: t_c + t_s }
    }

    /// `w·self + (1−w)·other`, componentwise.
    pub fn mix(&self, other: &PerfPoint, w: f64) -> PerfPoint {
        let m = |a: f64, b: f64| w * a + (1.0 - w) * b;
        PerfPoint {
            r_c: m(self.r_c, other.r_c),
            r_s: m(self.r_s, other.r_s),
            t_c: m(self.t_c, other.t_c),
            t_s: m(self.t_s, other.t_s),
            t_sum: m(self.t_sum, other.t_sum),
        }
    }
}
