use std::fmt::Write as _;

use isac_core::commrate::avg_comm_rate;
use isac_core::mcsim::{comm_trials, mc_comm_rate, mc_radar_rate, sense_trials, write_trials_csv, McConfig, McEstimate};
use isac_core::netmodel::validate;
use isac_core::paretoopt::{write_frontier_csv, BoundaryMethod, Evaluator};
use isac_core::senserate::avg_radar_rate;
use isac_core::validation::{run_all, CheckOutcome, ValidationConfig};
use isac_core::{NetworkParams, ResourceAllocation};

use crate::config::RunConfig;
use crate::output::{csv, num, Artifact};
use crate::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Target {
    Comm,
    Sense,
}

impl Target {
    fn name(self) -> &'static str {
        match self {
            Target::Comm => "comm",
            Target::Sense => "sense",
        }
    }
}

/// Which evaluator answers `target` for `alloc`.
pub fn route(params: &NetworkParams, alloc: &ResourceAllocation, target: Target) -> &'static str {
    match target {
        Target::Comm => "comm",
        Target::Sense if alloc.k == 0 || alloc.j == 0 => "sense_trivial",
        Target::Sense if alloc.q == 1 && params.is_alpha_twice_beta() => "sense_q1_closed_form",
        Target::Sense if alloc.q == 1 => "sense_q1_nested",
        Target::Sense if params.is_alpha_twice_beta() => "sense_cluster_reduced",
        Target::Sense => "sense_cluster_general",
    }
}

pub fn feasible_allocation(cfg: &RunConfig) -> Result<ResourceAllocation, CliError> {
    let alloc = cfg.allocation.ok_or_else(|| CliError::Config("an allocation is required (config [allocation] or --alloc)".into()))?;
    let v = validate(&cfg.network, &alloc);
    if !v.is_empty() {
        return Err(CliError::Core(isac_core::Error::Infeasible(v)));
    }
    Ok(alloc)
}

pub const EVAL_HEADER: &str = "target,variant,route,k,l,j,q,rate,ase";

pub struct EvalResult {
    pub artifact: Artifact,
    pub summary: String,
}

pub fn eval(cfg: &RunConfig, target: Target) -> Result<EvalResult, CliError> {
    let alloc = feasible_allocation(cfg)?;
    let p = &cfg.network;
    let (rate, ase) = match target {
        Target::Comm => {
            let r = avg_comm_rate(p, &alloc, &cfg.quadrature, cfg.formula_variant)?;
            (r, p.lambda_b * alloc.k as f64 * r)
        }
        Target::Sense => {
            let r = avg_radar_rate(p, &alloc, &cfg.quadrature, cfg.formula_variant)?;
            (r, p.lambda_b * alloc.j as f64 * r)
        }
    };
    let route = route(p, &alloc, target);
    let a = alloc;
    let body = format!(
        "{EVAL_HEADER}\n{},{},{route},{},{},{},{},{},{}\n",
        target.name(),
        cfg.formula_variant,
        a.k,
        a.l,
        a.j,
        a.q,
        num(rate),
        num(ase)
    );
    let (r, t) = match target {
        Target::Comm => ("r_c", "t_c"),
        Target::Sense => ("r_s", "t_s"),
    };
    Ok(EvalResult {
        artifact: Artifact { name: format!("eval_{}.csv", target.name()), content: csv(cfg, body) },
        summary: format!("{alloc} variant={} route={route} {r}={rate:.6} nats {t}={ase:.6}", cfg.formula_variant),
    })
}

pub const MC_HEADER: &str =
    "target,k,l,j,q,mean,half_width,ci_level,trials,seed,window_factor,half_window_mean,truncation_delta,analytic,capped,resampled";

fn mc_estimate(target: Target, p: &NetworkParams, a: &ResourceAllocation, mc: &McConfig) -> Result<McEstimate, CliError> {
    Ok(match target {
        Target::Comm => mc_comm_rate(p, a, mc)?,
        Target::Sense => mc_radar_rate(p, a, mc)?,
    })
}

/// Monte Carlo estimate plus a rerun at half the window radius (clamped to
/// the smallest allowed factor) as a truncation probe.
pub fn mc(cfg: &RunConfig, target: Target, records: bool) -> Result<(Vec<Artifact>, String), CliError> {
    let alloc = feasible_allocation(cfg)?;
    let p = &cfg.network;
    let est = mc_estimate(target, p, &alloc, &cfg.mc)?;
    let half = McConfig { window_radius_factor: (cfg.mc.window_radius_factor / 2.0).max(5.0), ..cfg.mc };
    let probe = mc_estimate(target, p, &alloc, &half)?;
    let analytic = match target {
        Target::Comm => avg_comm_rate(p, &alloc, &cfg.quadrature, cfg.formula_variant)?,
        Target::Sense => avg_radar_rate(p, &alloc, &cfg.quadrature, cfg.formula_variant)?,
    };
    let a = alloc;
    let body = format!(
        "{MC_HEADER}\n{},{},{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n",
        target.name(),
        a.k,
        a.l,
        a.j,
        a.q,
        num(est.mean),
        num(est.half_width),
        num(cfg.mc.ci_level),
        est.trials,
        est.seed,
        num(cfg.mc.window_radius_factor),
        num(probe.mean),
        num(est.mean - probe.mean),
        num(analytic),
        est.capped,
        est.resampled
    );
    let mut out = vec![Artifact { name: format!("mc_{}.csv", target.name()), content: csv(cfg, body) }];
    if records && a.k > 0 && (target == Target::Comm || a.j > 0) {
        let recs = match target {
            Target::Comm => comm_trials(p, a.k, a.l, a.residual_dof(p.m_t) as f64, &cfg.mc)?,
            Target::Sense => sense_trials(p, a.k, a.q, &cfg.mc)?,
        };
        let mut buf = Vec::new();
        write_trials_csv(&mut buf, &recs).expect("writing to memory");
        out.push(Artifact {
            name: format!("mc_{}_trials.csv", target.name()),
            content: csv(cfg, String::from_utf8(buf).expect("ascii")),
        });
    }
    let summary = format!(
        "{alloc} mc={:.6} ± {:.6} ({}% CI, n={}, seed={}) analytic={analytic:.6} half-window delta={:+.2e}",
        est.mean,
        est.half_width,
        100.0 * cfg.mc.ci_level,
        est.trials,
        est.seed,
        est.mean - probe.mean
    );
    Ok((out, summary))
}

pub fn boundary(cfg: &RunConfig, method: BoundaryMethod, strict: bool) -> Result<(Vec<Artifact>, String), CliError> {
    let eval = Evaluator::new(&cfg.network, &cfg.quadrature, cfg.formula_variant)?;
    let f = eval.boundary(method, strict)?;
    let mut buf = Vec::new();
    write_frontier_csv(&mut buf, &f).expect("writing to memory");
    let name = format!("boundary_{method}{}.csv", if strict { "_strict" } else { "" });
    let summary = format!(
        "{method}: {} frontier points of {} candidates; comm corner {} t_c={:.4}; sense corner {} t_s={:.4}; comm gain over time-sharing {:.1}%",
        f.points.len(),
        f.candidates.len(),
        f.corners.comm_max.alloc,
        f.corners.comm_max.perf.t_c,
        f.corners.sense_max.alloc,
        f.corners.sense_max.perf.t_s,
        100.0 * f.comm_gain_over_timeshare()
    );
    Ok((vec![Artifact { name, content: csv(cfg, String::from_utf8(buf).expect("ascii")) }], summary))
}

pub const VALIDATE_HEADER: &str = "id,name,severity,passed,seconds,details";

pub fn validate_suite(cfg: &RunConfig) -> (Vec<CheckOutcome>, Artifact) {
    let vc = ValidationConfig { params: cfg.network, quadrature: cfg.quadrature, mc: cfg.mc };
    let outcomes = run_all(&vc);
    let mut body = format!("{VALIDATE_HEADER}\n");
    for o in &outcomes {
        let sev = serde_json::to_value(o.severity).expect("serializes");
        let _ = writeln!(
            body,
            "{},{},{},{},{:.3},\"{}\"",
            o.id,
            o.name,
            sev.as_str().unwrap_or_default(),
            u8::from(o.passed),
            o.seconds,
            o.details.replace('"', "'")
        );
    }
    (outcomes, Artifact { name: "validate.csv".into(), content: csv(cfg, body) })
}
