//! Curve data behind the evaluation figures. Figure-specific parameters
//! (`M_t`, `M_r`, `J_max` sweeps) override the config; everything else comes
//! from it.

use std::fmt::Write as _;
use std::str::FromStr;

use isac_core::mcsim::mc_radar_rate;
use isac_core::mcsim::mc_comm_rate;
use isac_core::paretoopt::{pareto_filter, BoundaryMethod, BoundaryPoint, Evaluator};
use isac_core::validation::{sensing_ase_vs_q, timeshare_grid_dominance};
use isac_core::{NetworkParams, ResourceAllocation};

use crate::config::RunConfig;
use crate::output::{csv, num, Artifact};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FigureId {
    F4,
    F5,
    F6,
    F7,
    F9,
    F11,
}

impl FromStr for FigureId {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        Ok(match s {
            "f4" => FigureId::F4,
            "f5" => FigureId::F5,
            "f6" => FigureId::F6,
            "f7" => FigureId::F7,
            "f9" => FigureId::F9,
            "f11" => FigureId::F11,
            other => return Err(format!("unknown figure `{other}` (expected f4, f5, f6, f7, f9 or f11)")),
        })
    }
}

impl FigureId {
    pub fn name(self) -> &'static str {
        match self {
            FigureId::F4 => "f4",
            FigureId::F5 => "f5",
            FigureId::F6 => "f6",
            FigureId::F7 => "f7",
            FigureId::F9 => "f9",
            FigureId::F11 => "f11",
        }
    }
}

pub const F4_HEADER: &str = "k,l,r_c,t_c,t_s,t_sum,mc_r_c,mc_half_width";
pub const F5_HEADER: &str = "k,best_l,r_c,t_c,argmax";
pub const F6_HEADER: &str = "m_r,q,j,r_s,t_s,mc_r_s,mc_half_width,mc_t_s";
pub const F7_HEADER: &str = "m_r,q,j,t_c,t_s,t_sum,t_s_over_q1";
pub const F9_HEADER: &str = "m_t,scheme,k,l,j,q,r_c,r_s";
pub const F11_HEADER: &str = "m_t,scheme,k,l,j,q,t_c,t_s";
pub const F11_GAIN_HEADER: &str = "m_t,comm_gain,grid_hits,grid_points";

fn comm_slice(p: &NetworkParams) -> Vec<ResourceAllocation> {
    (1..p.m_t).flat_map(|k| (1..=(p.m_t - 1) / k).map(move |l| ResourceAllocation::new(k, l, p.j_max, 1))).collect()
}

fn f4(cfg: &RunConfig) -> Result<String, CliError> {
    let p = &cfg.network;
    let pts = Evaluator::new(p, &cfg.quadrature, cfg.formula_variant)?.evaluate(&comm_slice(p))?;
    let mut body = format!("{F4_HEADER}\n");
    for b in pts {
        let est = mc_comm_rate(p, &b.alloc, &cfg.mc)?;
        let (a, f) = (b.alloc, b.perf);
        let _ = writeln!(body, "{},{},{},{},{},{},{},{}", a.k, a.l, num(f.r_c), num(f.t_c), num(f.t_s), num(f.t_sum), num(est.mean), num(est.half_width));
    }
    Ok(body)
}

fn f5(cfg: &RunConfig) -> Result<String, CliError> {
    let p = &cfg.network;
    let pts = Evaluator::new(p, &cfg.quadrature, cfg.formula_variant)?.evaluate(&comm_slice(p))?;
    let best_per_k: Vec<BoundaryPoint> = (1..p.m_t)
        .filter_map(|k| pts.iter().filter(|b| b.alloc.k == k).copied().max_by(|a, b| a.perf.t_c.total_cmp(&b.perf.t_c).then(b.alloc.l.cmp(&a.alloc.l))))
        .collect();
    let top = best_per_k.iter().map(|b| b.perf.t_c).fold(f64::NEG_INFINITY, f64::max);
    let mut body = format!("{F5_HEADER}\n");
    let mut flagged = false;
    for b in &best_per_k {
        let is_max = !flagged && b.perf.t_c == top;
        flagged |= is_max;
        let _ = writeln!(body, "{},{},{},{},{}", b.alloc.k, b.alloc.l, num(b.perf.r_c), num(b.perf.t_c), u8::from(is_max));
    }
    Ok(body)
}

const M_R_SWEEP: [u32; 3] = [10, 20, 40];

fn f6(cfg: &RunConfig) -> Result<String, CliError> {
    let mut body = format!("{F6_HEADER}\n");
    for m_r in M_R_SWEEP {
        let p = NetworkParams { m_r, ..cfg.network };
        for (a, t_s) in sensing_ase_vs_q(&p, &cfg.quadrature, cfg.formula_variant)? {
            let est = mc_radar_rate(&p, &a, &cfg.mc)?;
            let r_s = t_s / (p.lambda_b * a.j as f64);
            let mc_t_s = p.lambda_b * a.j as f64 * est.mean;
            let _ = writeln!(body, "{m_r},{},{},{},{},{},{},{}", a.q, a.j, num(r_s), num(t_s), num(est.mean), num(est.half_width), num(mc_t_s));
        }
    }
    Ok(body)
}

fn f7(cfg: &RunConfig) -> Result<String, CliError> {
    let mut body = format!("{F7_HEADER}\n");
    for m_r in M_R_SWEEP {
        let p = NetworkParams { m_r, ..cfg.network };
        let curve = sensing_ase_vs_q(&p, &cfg.quadrature, cfg.formula_variant)?;
        let allocs: Vec<_> = curve.iter().map(|c| c.0).collect();
        let pts = Evaluator::new(&p, &cfg.quadrature, cfg.formula_variant)?.evaluate(&allocs)?;
        let base = pts[0].perf.t_s;
        for b in pts {
            let (a, f) = (b.alloc, b.perf);
            let _ = writeln!(body, "{m_r},{},{},{},{},{},{}", a.q, a.j, num(f.t_c), num(f.t_s), num(f.t_sum), num(f.t_s / base));
        }
    }
    Ok(body)
}

const M_T_SWEEP: [u32; 3] = [20, 30, 40];

fn alloc_fields(a: &ResourceAllocation) -> String {
    format!("{},{},{},{}", a.k, a.l, a.j, a.q)
}

fn f9(cfg: &RunConfig) -> Result<String, CliError> {
    let mut body = format!("{F9_HEADER}\n");
    for m_t in M_T_SWEEP {
        let p = NetworkParams { m_t, j_max: 5, ..cfg.network };
        let f = Evaluator::new(&p, &cfg.quadrature, cfg.formula_variant)?.boundary(BoundaryMethod::Enumerate, false)?;
        let rates = pareto_filter(&f.candidates, |x| (x.r_c, x.r_s));
        for b in &rates {
            let _ = writeln!(body, "{m_t},cooperative,{},{},{}", alloc_fields(&b.alloc), num(b.perf.r_c), num(b.perf.r_s));
        }
        let (c, s) = (f.corners.comm_max.perf, f.corners.sense_max.perf);
        for i in 0..=20 {
            let t = i as f64 / 20.0;
            let m = c.mix(&s, t);
            let _ = writeln!(body, "{m_t},timeshare,,,,,{},{}", num(m.r_c), num(m.r_s));
        }
    }
    Ok(body)
}

fn f11(cfg: &RunConfig) -> Result<(String, String), CliError> {
    let mut body = format!("{F11_HEADER}\n");
    let mut gains = format!("{F11_GAIN_HEADER}\n");
    for m_t in M_T_SWEEP {
        let p = NetworkParams { m_t, ..cfg.network };
        let f = Evaluator::new(&p, &cfg.quadrature, cfg.formula_variant)?.boundary(BoundaryMethod::Enumerate, false)?;
        for b in &f.points {
            let _ = writeln!(body, "{m_t},cooperative,{},{},{}", alloc_fields(&b.alloc), num(b.perf.t_c), num(b.perf.t_s));
        }
        for i in 0..=20 {
            let m = f.timeshare.at(i as f64 / 20.0);
            let _ = writeln!(body, "{m_t},timeshare,,,,,{},{}", num(m.t_c), num(m.t_s));
        }
        let (hits, n) = timeshare_grid_dominance(&f);
        let _ = writeln!(gains, "{m_t},{},{hits},{n}", num(f.comm_gain_over_timeshare()));
    }
    Ok((body, gains))
}

pub fn figure(cfg: &RunConfig, id: FigureId) -> Result<Vec<Artifact>, CliError> {
    let one = |body: String| vec![Artifact { name: format!("{}.csv", id.name()), content: csv(cfg, body) }];
    Ok(match id {
        FigureId::F4 => one(f4(cfg)?),
        FigureId::F5 => one(f5(cfg)?),
        FigureId::F6 => one(f6(cfg)?),
        FigureId::F7 => one(f7(cfg)?),
        FigureId::F9 => one(f9(cfg)?),
        FigureId::F11 => {
            let (body, gains) = f11(cfg)?;
            vec![
                Artifact { name: "f11.csv".into(), content: csv(cfg, body) },
                Artifact { name: "f11_gain.csv".into(), content: csv(cfg, gains) },
            ]
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rows(content: &str) -> Vec<Vec<String>> {
        content.lines().skip(2).map(|l| l.split(',').map(str::to_string).collect()).collect()
    }

    #[test]
    fn f5_flags_the_comm_optimum() {
        let out = figure(&RunConfig::default(), FigureId::F5).unwrap();
        let flagged: Vec<_> = rows(&out[0].content).into_iter().filter(|r| r[4] == "1").collect();
        assert_eq!(flagged.len(), 1);
        assert_eq!((flagged[0][0].as_str(), flagged[0][1].as_str()), ("12", "1"));
    }

    #[test]
    fn f7_ratio_column_starts_at_one() {
        let out = figure(&RunConfig::default(), FigureId::F7).unwrap();
        let r = rows(&out[0].content);
        assert_eq!(r[0][1], "1");
        assert_eq!(r[0][6].parse::<f64>().unwrap(), 1.0);
        assert_eq!(r.len(), 3 * 19);
    }

    #[test]
    fn unknown_figure_is_rejected() {
        assert!("f8".parse::<FigureId>().is_err());
        assert_eq!("f11".parse::<FigureId>().unwrap(), FigureId::F11);
    }
}
