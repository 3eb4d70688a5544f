//! Communication/sensing ASE frontier over integer allocations.
//!
//! Rates are memoized by what they actually depend on: `R_c` by
//! `(K, L, ν)` and `R_s` by `(K, Q)`. Distinct keys are evaluated in
//! parallel, then merged in key order, so results do not depend on the
//! thread count.

use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::io::{self, Write};
use std::str::FromStr;
use std::sync::Mutex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::commrate::CommIntegrandCtx;
use crate::mathkern::QuadratureSpec;
use crate::netmodel::{enumerate_feasible, FormulaVariant, NetworkParams, PerfPoint, ResourceAllocation};
use crate::senserate::{radar_rate, SenseIntegrandCtx};
use crate::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoundaryMethod {
    /// Pareto filter over every feasible allocation.
    #[default]
    Enumerate,
    /// One candidate per `ν = J(Q−1)`: best `(K, L)` for `T_c`, then the
    /// best `(J, Q)` for `T_s` at that `K`.
    PaperSearch,
}

impl fmt::Display for BoundaryMethod {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            BoundaryMethod::Enumerate => "enumerate",
            BoundaryMethod::PaperSearch => "paper_search",
        })
    }
}

impl FromStr for BoundaryMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "enumerate" => Ok(BoundaryMethod::Enumerate),
            "paper_search" | "paper-search" => Ok(BoundaryMethod::PaperSearch),
            other => Err(Error::Config(format!("unknown boundary method `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub alloc: ResourceAllocation,
    pub perf: PerfPoint,
}

impl BoundaryPoint {
    /// `self` is at least as good in both ASEs.
    pub fn weakly_dominates(&self, other: &BoundaryPoint) -> bool {
        self.perf.t_c >= other.perf.t_c && self.perf.t_s >= other.perf.t_s
    }

    pub fn strictly_dominates(&self, other: &BoundaryPoint) -> bool {
        self.weakly_dominates(other) && (self.perf.t_c > other.perf.t_c || self.perf.t_s > other.perf.t_s)
    }
}

/// Larger `primary`, then larger `secondary`, then the smaller allocation.
fn lex_best<'a>(
    points: impl IntoIterator<Item = &'a BoundaryPoint>,
    primary: impl Fn(&PerfPoint) -> f64,
    secondary: impl Fn(&PerfPoint) -> f64,
) -> Option<BoundaryPoint> {
    points.into_iter().copied().reduce(|best, p| {
        let ord = primary(&p.perf)
            .total_cmp(&primary(&best.perf))
            .then(secondary(&p.perf).total_cmp(&secondary(&best.perf)))
            .then(best.alloc.cmp(&p.alloc));
        if ord.is_gt() {
            p
        } else {
            best
        }
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Corners {
    pub comm_max: BoundaryPoint,
    pub sense_max: BoundaryPoint,
}

/// Convex combinations of the two corner points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TimeShare {
    pub comm_max: PerfPoint,
    pub sense_max: PerfPoint,
}

impl TimeShare {
    pub fn new(corners: &Corners) -> Self {
        TimeShare { comm_max: corners.comm_max.perf, sense_max: corners.sense_max.perf }
    }

    /// `t·comm_max + (1−t)·sense_max`, componentwise.
    pub fn at(&self, t: f64) -> PerfPoint {
        self.comm_max.mix(&self.sense_max, t)
    }

    /// Time-shared `T_c` at sensing ASE `t_s`, if `t_s` lies between the
    /// corners.
    pub fn t_c_at(&self, t_s: f64) -> Option<f64> {
        let (lo, hi) = (self.comm_max.t_s, self.sense_max.t_s);
        if hi <= lo {
            return (t_s == lo).then_some(self.comm_max.t_c.max(self.sense_max.t_c));
        }
        if !(lo..=hi).contains(&t_s) {
            return None;
        }
        let t = (hi - t_s) / (hi - lo);
        Some(self.at(t).t_c)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Frontier {
    pub method: BoundaryMethod,
    /// Non-dominated points by increasing `t_c` (so nonincreasing `t_s`).
    pub points: Vec<BoundaryPoint>,
    pub corners: Corners,
    pub timeshare: TimeShare,
    /// Everything that was evaluated, in allocation order.
    pub candidates: Vec<BoundaryPoint>,
}

impl Frontier {
    pub fn is_on_frontier(&self, alloc: &ResourceAllocation) -> bool {
        self.points.iter().any(|p| p.alloc == *alloc)
    }

    /// Best `T_c` on the frontier among points with `T_s ≥ t_s`.
    pub fn t_c_at(&self, t_s: f64) -> Option<f64> {
        self.points.iter().filter(|p| p.perf.t_s >= t_s).map(|p| p.perf.t_c).reduce(f64::max)
    }

    /// Largest relative `T_c` gain of a frontier point over time-sharing at
    /// the same `T_s`, taken over points between the corners.
    pub fn comm_gain_over_timeshare(&self) -> f64 {
        self.points
            .iter()
            .filter_map(|p| {
                let shared = self.timeshare.t_c_at(p.perf.t_s)?;
                (shared > 0.0).then(|| p.perf.t_c / shared - 1.0)
            })
            .fold(0.0, f64::max)
    }
}

/// Non-dominated subset under `(x, y)`, sorted by increasing `x`. Among
/// exact ties the smallest allocation is kept.
pub fn pareto_filter(points: &[BoundaryPoint], key: impl Fn(&PerfPoint) -> (f64, f64)) -> Vec<BoundaryPoint> {
    let mut sorted: Vec<&BoundaryPoint> = points.iter().collect();
    sorted.sort_by(|a, b| {
        let (ka, kb) = (key(&a.perf), key(&b.perf));
        kb.0.total_cmp(&ka.0).then(kb.1.total_cmp(&ka.1)).then(a.alloc.cmp(&b.alloc))
    });
    let mut out = Vec::new();
    let mut best_y = f64::NEG_INFINITY;
    for p in sorted {
        let y = key(&p.perf).1;
        if y > best_y {
            out.push(*p);
            best_y = y;
        }
    }
    out.reverse();
    out
}

/// Rate evaluator with per-key memoization.
pub struct Evaluator<'a> {
    params: &'a NetworkParams,
    spec: &'a QuadratureSpec,
    variant: FormulaVariant,
    comm: Mutex<HashMap<(u32, u32, u64), f64>>,
    sense: Mutex<HashMap<(u32, u32), f64>>,
}

impl<'a> Evaluator<'a> {
    pub fn new(params: &'a NetworkParams, spec: &'a QuadratureSpec, variant: FormulaVariant) -> Result<Self, Error> {
        let v = params.violations();
        if !v.is_empty() {
            return Err(Error::Infeasible(v));
        }
        Ok(Evaluator { params, spec, variant, comm: Mutex::default(), sense: Mutex::default() })
    }

    pub fn params(&self) -> &NetworkParams {
        self.params
    }

    fn comm_key(a: &ResourceAllocation) -> Option<(u32, u32, u64)> {
        (a.k > 0).then(|| (a.k, a.l, a.nu()))
    }

    fn sense_key(a: &ResourceAllocation) -> Option<(u32, u32)> {
        (a.k > 0 && a.j > 0).then_some((a.k, a.q))
    }

    fn comm_rate(&self, (k, l, nu): (u32, u32, u64)) -> Result<f64, Error> {
        let d = self.params.m_t as i64 - (k as i64 * l as i64) - nu as i64 + 1;
        if d < 1 {
            return Err(Error::Config(format!("no residual DoF for K={k}, L={l}, ν={nu}")));
        }
        let ctx = CommIntegrandCtx { d: d as u32, k, l, alpha: self.params.alpha };
        Ok(ctx.rate(self.spec, self.variant)?)
    }

    fn sense_rate(&self, (k, q): (u32, u32)) -> Result<f64, Error> {
        let ctx = SenseIntegrandCtx::from_parts(self.params, k, q);
        Ok(radar_rate(&ctx, self.spec, self.variant)?)
    }

    /// Evaluates every missing key of `allocs` in parallel.
    fn prefetch(&self, allocs: &[ResourceAllocation]) -> Result<(), Error> {
        let comm_missing: Vec<_> = {
            let cache = self.comm.lock().expect("cache lock");
            allocs.iter().filter_map(Self::comm_key).filter(|k| !cache.contains_key(k)).collect::<BTreeSet<_>>().into_iter().collect()
        };
        let sense_missing: Vec<_> = {
            let cache = self.sense.lock().expect("cache lock");
            allocs.iter().filter_map(Self::sense_key).filter(|k| !cache.contains_key(k)).collect::<BTreeSet<_>>().into_iter().collect()
        };
        let comm: Vec<f64> = comm_missing.par_iter().map(|&k| self.comm_rate(k)).collect::<Result<_, _>>()?;
        let sense: Vec<f64> = sense_missing.par_iter().map(|&k| self.sense_rate(k)).collect::<Result<_, _>>()?;
        self.comm.lock().expect("cache lock").extend(comm_missing.into_iter().zip(comm));
        self.sense.lock().expect("cache lock").extend(sense_missing.into_iter().zip(sense));
        Ok(())
    }

    fn cached(&self, a: &ResourceAllocation) -> BoundaryPoint {
        let r_c = Self::comm_key(a).map_or(0.0, |k| self.comm.lock().expect("cache lock")[&k]);
        let r_s = Self::sense_key(a).map_or(0.0, |k| self.sense.lock().expect("cache lock")[&k]);
        BoundaryPoint { alloc: *a, perf: PerfPoint::new(self.params.lambda_b, a, r_c, r_s) }
    }

    /// Rates and ASEs of feasible allocations, in input order.
    pub fn evaluate(&self, allocs: &[ResourceAllocation]) -> Result<Vec<BoundaryPoint>, Error> {
        for a in allocs {
            let v = crate::netmodel::validate(self.params, a);
            if !v.is_empty() {
                return Err(Error::Infeasible(v));
            }
        }
        self.prefetch(allocs)?;
        Ok(allocs.iter().map(|a| self.cached(a)).collect())
    }

    pub fn point(&self, alloc: &ResourceAllocation) -> Result<BoundaryPoint, Error> {
        Ok(self.evaluate(std::slice::from_ref(alloc))?[0])
    }

    /// Best `T_c` over the `Q = 1` slice, companion `T_s` as tie-break.
    pub fn corner_comm_max(&self) -> Result<BoundaryPoint, Error> {
        let slice: Vec<_> = enumerate_feasible(self.params).into_iter().filter(|a| a.q == 1).collect();
        let pts = self.evaluate(&slice)?;
        Ok(lex_best(&pts, |p| p.t_c, |p| p.t_s).expect("the Q = 1 slice is never empty"))
    }

    /// Best `T_s` over the `L = 1` slice with `K` swept, `T_c` as tie-break.
    pub fn corner_sense_max(&self) -> Result<BoundaryPoint, Error> {
        let slice: Vec<_> = enumerate_feasible(self.params).into_iter().filter(|a| a.l == 1).collect();
        let pts = self.evaluate(&slice)?;
        Ok(lex_best(&pts, |p| p.t_s, |p| p.t_c).expect("the L = 1 slice is never empty"))
    }

    pub fn corners(&self) -> Result<Corners, Error> {
        Ok(Corners { comm_max: self.corner_comm_max()?, sense_max: self.corner_sense_max()? })
    }

    /// The candidate for one `ν`: best `(K, L)` with `KL ≤ M_t − 1 − ν`,
    /// then best `(J, Q)` with `J(Q−1) = ν` at that `K`.
    pub fn paper_candidate(&self, nu: u64) -> Result<Option<BoundaryPoint>, Error> {
        let (m_t, j_max) = (self.params.m_t as u64, self.params.j_max);
        if nu + 1 >= m_t {
            return Ok(None);
        }
        let sensing: Vec<(u32, u32)> = if nu == 0 {
            (0..=j_max).map(|j| (j, 1)).collect()
        } else {
            (1..=j_max).filter(|&j| nu % j as u64 == 0).map(|j| (j, (nu / j as u64 + 1) as u32)).collect()
        };
        let Some(&(j0, q0)) = sensing.first() else {
            return Ok(None);
        };
        let budget = m_t - 1 - nu;
        let comm: Vec<ResourceAllocation> = (1..=budget as u32)
            .flat_map(|k| (1..=(budget / k as u64) as u32).map(move |l| ResourceAllocation::new(k, l, j0, q0)))
            .collect();
        let Some(best_c) = lex_best(&self.evaluate(&comm)?, |p| p.t_c, |p| p.t_s) else {
            return Ok(None);
        };
        let (k, l) = (best_c.alloc.k, best_c.alloc.l);
        let sense: Vec<ResourceAllocation> = sensing.iter().map(|&(j, q)| ResourceAllocation::new(k, l, j, q)).collect();
        Ok(lex_best(&self.evaluate(&sense)?, |p| p.t_s, |p| p.t_c))
    }

    /// `ν` maximizing the candidate `T_s`, found by bisection on the sign of
    /// its forward difference, which is only correct if `T_s` is unimodal
    /// in `ν`.
    fn bisect_sense_peak(&self) -> Result<u64, Error> {
        let t_s = |nu: u64| -> Result<f64, Error> { Ok(self.paper_candidate(nu)?.map_or(f64::NEG_INFINITY, |p| p.perf.t_s)) };
        let (mut lo, mut hi) = (0u64, (self.params.m_t as u64).saturating_sub(2));
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            if t_s(mid + 1)? > t_s(mid)? {
                lo = mid + 1;
            } else {
                hi = mid;
            }
        }
        Ok(lo)
    }

    /// Frontier by `method`. With `strict_binary_search`, the paper search
    /// sweeps `ν` only up to a bisected sensing peak.
    pub fn boundary(&self, method: BoundaryMethod, strict_binary_search: bool) -> Result<Frontier, Error> {
        let corners = self.corners()?;
        let candidates = match method {
            BoundaryMethod::Enumerate => self.evaluate(&enumerate_feasible(self.params))?,
            BoundaryMethod::PaperSearch => {
                let nu_max = if strict_binary_search {
                    self.bisect_sense_peak()?
                } else {
                    (self.params.m_t as u64).saturating_sub(2)
                };
                let mut pts = Vec::new();
                for nu in 0..=nu_max {
                    pts.extend(self.paper_candidate(nu)?);
                }
                pts.sort_by(|a, b| a.alloc.cmp(&b.alloc));
                pts.dedup_by(|a, b| a.alloc == b.alloc);
                pts
            }
        };
        let points = pareto_filter(&candidates, |p| (p.t_c, p.t_s));
        Ok(Frontier { method, points, corners, timeshare: TimeShare::new(&corners), candidates })
    }
}

pub fn corner_comm_max(params: &NetworkParams, spec: &QuadratureSpec, variant: FormulaVariant) -> Result<BoundaryPoint, Error> {
    Evaluator::new(params, spec, variant)?.corner_comm_max()
}

pub fn corner_sense_max(params: &NetworkParams, spec: &QuadratureSpec, variant: FormulaVariant) -> Result<BoundaryPoint, Error> {
    Evaluator::new(params, spec, variant)?.corner_sense_max()
}

pub fn boundary(
    params: &NetworkParams,
    method: BoundaryMethod,
    spec: &QuadratureSpec,
    variant: FormulaVariant,
) -> Result<Frontier, Error> {
    Evaluator::new(params, spec, variant)?.boundary(method, false)
}

pub fn timeshare_bound(corners: &Corners) -> TimeShare {
    TimeShare::new(corners)
}

pub const FRONTIER_CSV_HEADER: &str = "k,l,j,q,r_c,r_s,t_c,t_s,t_sum,on_frontier,method";

/// All candidates with their frontier flag (`1`/`0`).
pub fn write_frontier_csv<W: Write>(mut w: W, frontier: &Frontier) -> io::Result<()> {
    writeln!(w, "{FRONTIER_CSV_HEADER}")?;
    for c in &frontier.candidates {
        let (a, p) = (&c.alloc, &c.perf);
        writeln!(
            w,
            "{},{},{},{},{:e},{:e},{:e},{:e},{:e},{},{}",
            a.k,
            a.l,
            a.j,
            a.q,
            p.r_c,
            p.r_s,
            p.t_c,
            p.t_s,
            p.t_sum,
            u8::from(frontier.is_on_frontier(a)),
            frontier.method
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::commrate::avg_comm_rate;
    use crate::senserate::avg_radar_rate;

    fn small(m_t: u32, j_max: u32) -> NetworkParams {
        NetworkParams { m_t, j_max, ..Default::default() }
    }

    /// Direct, uncached evaluation of every feasible allocation.
    fn brute(params: &NetworkParams) -> Vec<BoundaryPoint> {
        let spec = QuadratureSpec::default();
        enumerate_feasible(params)
            .iter()
            .map(|a| {
                let r_c = avg_comm_rate(params, a, &spec, FormulaVariant::Rederived).unwrap();
                let r_s = avg_radar_rate(params, a, &spec, FormulaVariant::Rederived).unwrap();
                BoundaryPoint { alloc: *a, perf: PerfPoint::new(params.lambda_b, a, r_c, r_s) }
            })
            .collect()
    }

    fn brute_pareto(all: &[BoundaryPoint]) -> BTreeSet<(u64, u64)> {
        all.iter()
            .filter(|p| !all.iter().any(|o| o.strictly_dominates(p)))
            .map(|p| (p.perf.t_c.to_bits(), p.perf.t_s.to_bits()))
            .collect()
    }

    fn eval(params: &NetworkParams) -> Evaluator<'_> {
        static SPEC: std::sync::OnceLock<QuadratureSpec> = std::sync::OnceLock::new();
        Evaluator::new(params, SPEC.get_or_init(QuadratureSpec::default), FormulaVariant::Rederived).unwrap()
    }

    #[test]
    fn cached_values_match_direct_evaluation() {
        let p = small(6, 3);
        let all = brute(&p);
        let got = eval(&p).evaluate(&enumerate_feasible(&p)).unwrap();
        assert_eq!(got, all);
    }

    #[test]
    fn small_frontier_matches_brute_force() {
        let p = small(4, 2);
        let f = eval(&p).boundary(BoundaryMethod::Enumerate, false).unwrap();
        let got: BTreeSet<_> = f.points.iter().map(|p| (p.perf.t_c.to_bits(), p.perf.t_s.to_bits())).collect();
        assert_eq!(got, brute_pareto(&brute(&p)));
    }

    #[test]
    fn small_corners_match_brute_force() {
        let p3 = small(3, 10);
        let c = eval(&p3).corner_comm_max().unwrap();
        let best = brute(&p3).iter().filter(|b| b.alloc.q == 1).map(|b| b.perf.t_c).fold(0.0, f64::max);
        assert_eq!(c.alloc.q, 1);
        assert_eq!(c.perf.t_c, best);

        let p4 = small(4, 10);
        let s = eval(&p4).corner_sense_max().unwrap();
        let best = brute(&p4).iter().filter(|b| b.alloc.l == 1).map(|b| b.perf.t_s).fold(0.0, f64::max);
        assert_eq!(s.alloc.l, 1);
        assert_eq!(s.perf.t_s, best);
    }

    #[test]
    fn default_comm_corner() {
        let p = NetworkParams::default();
        let c = eval(&p).corner_comm_max().unwrap();
        assert_eq!((c.alloc.k, c.alloc.l, c.alloc.q), (12, 1, 1));
        assert_eq!(c.alloc.j, p.j_max);
        assert!((0.55..=0.65).contains(&(c.alloc.k as f64 / p.m_t as f64)));
    }

    #[test]
    fn frontier_invariants_at_default() {
        let p = NetworkParams::default();
        let e = eval(&p);
        let f = e.boundary(BoundaryMethod::Enumerate, false).unwrap();
        assert!(f.points.windows(2).all(|w| w[0].perf.t_c < w[1].perf.t_c && w[0].perf.t_s > w[1].perf.t_s));
        for p in &f.points {
            assert!(crate::netmodel::is_feasible(e.params(), &p.alloc));
            assert!(!f.candidates.iter().any(|c| c.strictly_dominates(p)));
        }
        let last = f.points.last().unwrap();
        let first = f.points.first().unwrap();
        assert_eq!(last.perf.t_c, f.corners.comm_max.perf.t_c);
        assert_eq!(first.perf.t_s, f.corners.sense_max.perf.t_s);
        assert!(f.corners.sense_max.alloc.j <= p.j_max);

        let staged = e.boundary(BoundaryMethod::PaperSearch, false).unwrap();
        for q in &staged.points {
            assert!(f.points.iter().any(|p| p.weakly_dominates(q)), "{:?}", q.alloc);
        }
        let strict = e.boundary(BoundaryMethod::PaperSearch, true).unwrap();
        assert!(strict.candidates.len() <= staged.candidates.len());
    }

    #[test]
    fn timeshare_endpoints_and_midpoint() {
        let p = small(8, 4);
        let c = eval(&p).corners().unwrap();
        let ts = timeshare_bound(&c);
        assert_eq!(ts.at(1.0), c.comm_max.perf);
        assert_eq!(ts.at(0.0), c.sense_max.perf);
        let m = ts.at(0.5);
        assert!((m.t_c - 0.5 * (c.comm_max.perf.t_c + c.sense_max.perf.t_c)).abs() < 1e-15);
        assert!((m.t_s - 0.5 * (c.comm_max.perf.t_s + c.sense_max.perf.t_s)).abs() < 1e-15);
    }

    #[test]
    fn pareto_filter_keeps_one_of_each_tie() {
        let mk = |k, t_c, t_s| BoundaryPoint {
            alloc: ResourceAllocation::new(k, 1, 0, 1),
            perf: PerfPoint { r_c: 0.0, r_s: 0.0, t_c, t_s, t_sum: t_c + t_s },
        };
        let pts = [mk(3, 1.0, 1.0), mk(2, 1.0, 1.0), mk(1, 2.0, 0.5), mk(4, 0.5, 0.5)];
        let f = pareto_filter(&pts, |p| (p.t_c, p.t_s));
        let ks: Vec<u32> = f.iter().map(|p| p.alloc.k).collect();
        assert_eq!(ks, vec![2, 1]);
    }

    #[test]
    fn csv_has_documented_header() {
        let p = small(3, 1);
        let f = eval(&p).boundary(BoundaryMethod::Enumerate, false).unwrap();
        let mut buf = Vec::new();
        write_frontier_csv(&mut buf, &f).unwrap();
        let s = String::from_utf8(buf).unwrap();
        assert_eq!(s.lines().next().unwrap(), FRONTIER_CSV_HEADER);
        assert_eq!(s.lines().count(), f.candidates.len() + 1);
        assert!(s.lines().skip(1).all(|l| l.ends_with(",enumerate")));
    }

    #[test]
    fn method_names_round_trip() {
        for m in [BoundaryMethod::Enumerate, BoundaryMethod::PaperSearch] {
            assert_eq!(m.to_string().parse::<BoundaryMethod>().unwrap(), m);
        }
    }
}
