//! Execution of a single experiment job.

use crate::config::{Background, C1AlphaVariant, Experiment, JobConfig};
use crate::svg::Plot;
use anyhow::{anyhow, Context, Result};
use liouville_core::asymptotics::{
    bracket_point, check_estimate, error_profile, localization_gap, super_sub_check, ErrorProfile, EstimateCheck, RateFit, Sampler,
};
use liouville_core::closedform::{LogDistanceShift, ModelExpansion};
use liouville_core::field::FnField;
use liouville_core::geometry::{build_domain, c1alpha_arm_corner, c1alpha_corner, curved_corner, disk, localized_pair, DomainKind, DomainSpec, Point2};
use liouville_core::kahler::{compose_product, disk_factor, monge_ampere_residual, product_bound_check, ProductDomainSpec};
use liouville_core::solver::{convergence_study, default_k_sequence, self_convergence, solve_blowup, BoundaryMode, ConvergenceRow, SolverConfig};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

/// Nodes within this many spacings of the boundary are left out of rate windows.
const WINDOW_FLOOR_SPACINGS: f64 = 20.0;
/// Upper end of the default rate window, as a fraction of the domain's feature scale.
const WINDOW_TOP_FRACTION: f64 = 0.2;
const SAMPLES_PER_OCTAVE: usize = 4;
/// Lattice offset of power-law graph domains; keeps nodes off the singular normal line.
const GRAPH_OFFSET: [f64; 2] = [0.5, 0.5];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    Pass,
    Fail,
    Error,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::Error => "error",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub value: f64,
    /// Human-readable acceptance condition.
    pub condition: String,
    pub pass: bool,
}

/// Content of a job's JSON report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobReport {
    pub name: String,
    pub kind: String,
    pub binding: bool,
    pub verdict: Verdict,
    pub slope: Option<f64>,
    pub constant: Option<f64>,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    pub details: serde_json::Value,
}

/// Files produced by a job, keyed by file name.
pub struct JobOutput {
    pub report: JobReport,
    pub files: Vec<(String, Vec<u8>)>,
}

struct Outcome {
    slope: Option<f64>,
    constant: Option<f64>,
    checks: Vec<Check>,
    details: serde_json::Value,
    csv: String,
    plot: Option<Plot>,
}

fn check(name: &str, value: f64, condition: String, pass: bool) -> Check {
    Check { name: name.into(), value, condition, pass }
}

pub fn run_job(job: &JobConfig, seed: u64) -> JobOutput {
    let kind = job.experiment.kind().to_string();
    let result =
        std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| execute(job, seed))).unwrap_or_else(|p| Err(anyhow!("job panicked: {}", panic_message(&p))));
    let mut files = Vec::new();
    let report = match result {
        Ok(o) => {
            let verdict = if o.checks.iter().all(|c| c.pass) { Verdict::Pass } else { Verdict::Fail };
            files.push((format!("{}.csv", job.name), o.csv.into_bytes()));
            if let Some(p) = o.plot {
                files.push((format!("{}.svg", job.name), p.render().into_bytes()));
            }
            JobReport {
                name: job.name.clone(),
                kind,
                binding: job.experiment.binding(),
                verdict,
                slope: o.slope,
                constant: o.constant,
                checks: o.checks,
                error: None,
                details: o.details,
            }
        }
        Err(e) => JobReport {
            name: job.name.clone(),
            kind,
            binding: job.experiment.binding(),
            verdict: Verdict::Error,
            slope: None,
            constant: None,
            checks: Vec::new(),
            error: Some(format!("{e:#}")),
            details: serde_json::Value::Null,
        },
    };
    let json = serde_json::to_vec_pretty(&report).expect("reports serialize");
    files.push((format!("{}.json", job.name), json));
    JobOutput { report, files }
}

fn panic_message(p: &Box<dyn std::any::Any + Send>) -> String {
    p.downcast_ref::<&str>().map(|s| s.to_string()).or_else(|| p.downcast_ref::<String>().cloned()).unwrap_or_else(|| "unknown panic".into())
}

fn execute(job: &JobConfig, seed: u64) -> Result<Outcome> {
    let opts = &job.solver;
    match &job.experiment {
        Experiment::DiskValidate { radius, hs, d_min, max_error, order } => {
            let dom = Arc::new(disk(*radius, Point2::ORIGIN)?);
            let exact = ModelExpansion::Ball { radius: *radius, center: Point2::ORIGIN };
            let mode = BoundaryMode::Matched { model: ModelExpansion::SmoothModel { domain: dom.clone() } };
            let rows = convergence_study(dom, &exact, &mode, hs, &opts.apply(hs[0]), *d_min)?;
            let fit = rows_fit(&rows)?;
            let e = rows[1].max_error;
            let checks = vec![
                check("max_error", e, format!("< {max_error} at h = {}", rows[1].h), e < *max_error),
                check("order", fit.slope, format!("in [{}, {}]", order[0], order[1]), (order[0]..=order[1]).contains(&fit.slope)),
            ];
            Ok(convergence_outcome(&rows, fit, checks, "disk error vs h"))
        }
        Experiment::ConvergenceStudy { domain, background, hs, h_ref, d_min, order } => {
            let dom = Arc::new(build_domain(domain)?);
            let mode = boundary_mode(*background, &dom)?;
            let cfg = opts.apply(hs[0]);
            let rows = match (h_ref, domain) {
                (Some(r), _) => self_convergence(dom, &mode, hs, *r, &cfg)?,
                (None, DomainKind::Disk { radius, center }) => {
                    let exact = ModelExpansion::Ball { radius: *radius, center: *center };
                    convergence_study(dom, &exact, &mode, hs, &cfg, *d_min)?
                }
                (None, _) => unreachable!("validated: non-disk studies carry h_ref"),
            };
            let fit = rows_fit(&rows)?;
            let checks =
                order.map(|o| vec![check("order", fit.slope, format!("in [{}, {}]", o[0], o[1]), (o[0]..=o[1]).contains(&fit.slope))]).unwrap_or_default();
            Ok(convergence_outcome(&rows, fit, checks, "error vs h"))
        }
        Experiment::SmoothRate { domain, h, window, expected, tolerance, ray_origin, ray_direction } => {
            let dom = Arc::new(build_domain(domain)?);
            let (origin, dir) = match (ray_origin, ray_direction, domain) {
                (Some(o), Some(d), _) => (*o, *d * (1.0 / d.norm())),
                (_, _, DomainKind::Disk { radius, center }) => (*center + Point2::new(*radius, 0.0), Point2::new(-1.0, 0.0)),
                _ => unreachable!("validated: non-disk domains carry a ray"),
            };
            let model = ModelExpansion::SmoothModel { domain: dom.clone() };
            let sol = solve_blowup(dom.clone(), &BoundaryMode::Matched { model: model.clone() }, &opts.apply(*h))?;
            let sampler = Sampler::ray(origin, dir, window[0], window[1], SAMPLES_PER_OCTAVE);
            let prof = error_profile(&sol, &model, &dom, &sampler)?;
            let est = check_estimate(&prof, *expected, *tolerance, (window[0], window[1]))?;
            Ok(rate_outcome(&prof, est, "error", "|u + log d - kappa d / 2|"))
        }
        Experiment::C1alphaRate { variant, alpha, m, radius, mu, amplitude, h, window, tolerance } => {
            let mut cfg = opts.apply(*h);
            if opts.lattice_offset.is_none() {
                cfg.lattice_offset = GRAPH_OFFSET;
            }
            match variant {
                C1AlphaVariant::Graph => {
                    let dom = Arc::new(c1alpha_corner(*alpha, *m, *radius)?);
                    let sol = Arc::new(solve_blowup(dom.clone(), &BoundaryMode::Matched { model: ModelExpansion::Defining { domain: dom.clone() } }, &cfg)?);
                    let shifted = LogDistanceShift { u: sol, domain: dom.clone() };
                    let zero = FnField(|_: Point2| Ok(0.0));
                    let w = window.unwrap_or([WINDOW_FLOOR_SPACINGS * h, WINDOW_TOP_FRACTION * dom.feature_scale()]);
                    let sampler = Sampler::ray(Point2::ORIGIN, Point2::new(0.0, 1.0), cfg.trust_factor * h, 2.0 * w[1], SAMPLES_PER_OCTAVE);
                    let prof = error_profile(&shifted, &zero, &dom, &sampler)?;
                    let est = check_estimate(&prof, *alpha, tolerance.unwrap_or(0.2), (w[0], w[1]))?;
                    Ok(rate_outcome(&prof, est, "error", "|u + log d|"))
                }
                C1AlphaVariant::CornerArms => {
                    let dom = Arc::new(c1alpha_arm_corner(*mu, *alpha, *amplitude, 2.0)?);
                    let (prof, est) = corner_profile(&dom, &cfg, *window, *alpha, tolerance.unwrap_or(0.1))?;
                    Ok(rate_outcome(&prof, est, "error", "|u - f_mu|"))
                }
            }
        }
        Experiment::CornerRate { mu, amplitude, arm_length, h, window, min_slope } => {
            let dom = Arc::new(curved_corner(*mu, *amplitude, *arm_length)?);
            let (prof, est) = corner_profile(&dom, &opts.apply(*h), *window, 1.0, 1.0 - min_slope)?;
            Ok(rate_outcome(&prof, est, "error", "|u - f_mu|"))
        }
        Experiment::Localization { mu, h, window_top, slack } => {
            let cfg = opts.apply(*h);
            let pair = localized_pair(*mu)?;
            let (a, b) = (Arc::new(pair.inner), Arc::new(pair.outer));
            let solve = |d: &Arc<DomainSpec>| {
                solve_blowup(d.clone(), &BoundaryMode::Matched { model: ModelExpansion::CornerModel { domain: d.clone(), corner: 0 } }, &cfg)
            };
            let (ua, ub) = (solve(&a)?, solve(&b)?);
            let sampler = Sampler::ray(Point2::ORIGIN, Point2::polar(1.0, 0.5 * mu * PI), cfg.trust_factor * h, 0.9 * pair.coincide, SAMPLES_PER_OCTAVE);
            let (prof, fit) = localization_gap(&ua, &ub, &a, &b, &sampler, (WINDOW_FLOOR_SPACINGS * h, *window_top))?;
            let bound = 1.0 / mu - slack;
            let checks = vec![check("slope", fit.slope, format!(">= {bound}"), fit.slope >= bound)];
            Ok(Outcome {
                slope: Some(fit.slope),
                constant: Some(fit.constant),
                checks,
                details: serde_json::json!({ "fit": fit, "coincide": pair.coincide, "skipped": prof.skipped }),
                csv: profile_csv(&prof, "gap"),
                plot: Some(Plot::from_profile(&prof, Some(&fit), "|u_inner - u_outer| vs r", "r", "gap")),
            })
        }
        Experiment::BracketAudit { domains, h, points, slack_factor } => {
            let cfg = opts.apply(*h);
            let slack = slack_factor * h * h;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let per = points / domains.len();
            let mut csv = String::from("domain,px,py,d,lower,u,upper,flagged\n");
            let (mut violations, mut flagged, mut total) = (0usize, 0usize, 0usize);
            let mut worst = f64::NEG_INFINITY;
            for kind in domains {
                let dom = Arc::new(build_domain(kind)?);
                let model = audit_background(kind, &dom);
                let sol = solve_blowup(dom.clone(), &BoundaryMode::Matched { model }, &cfg)?;
                let trust: Vec<usize> = (0..sol.grid.len()).filter(|&i| sol.in_trust(i)).collect();
                if trust.is_empty() {
                    return Err(anyhow!("domain {} has no trust-region nodes at h = {h}", dom.name()));
                }
                for _ in 0..per {
                    let idx = trust[rng.gen_range(0..trust.len())];
                    let node = &sol.grid.nodes[idx];
                    let u = sol.u[idx];
                    let b = bracket_point(&dom, node.p)?;
                    let excess = (b.lower - slack - u).max(u - b.upper - slack);
                    worst = worst.max(excess);
                    violations += usize::from(excess > 0.0);
                    flagged += usize::from(b.flagged);
                    total += 1;
                    let _ = writeln!(csv, "{},{},{},{},{},{},{},{}", dom.name().replace(',', ";"), node.p.x, node.p.y, node.d, b.lower, u, b.upper, b.flagged);
                }
            }
            let checks = vec![check("violations", violations as f64, format!("== 0 with slack {slack:e}"), violations == 0)];
            Ok(Outcome {
                slope: None,
                constant: None,
                checks,
                details: serde_json::json!({ "points": total, "slack": slack, "worst_excess": worst, "cone_lower_bounds": flagged }),
                csv,
                plot: None,
            })
        }
        Experiment::SupersubAudit { mus, amplitudes, points } => {
            let mut csv = String::from("mu,a,points,super_violations,sub_violations,max_super,min_sub\n");
            let mut reports = Vec::new();
            for &mu in mus {
                for &a in amplitudes {
                    let r = super_sub_check(mu, a, *points)?;
                    let _ = writeln!(csv, "{},{},{},{},{},{},{}", r.mu, r.a, r.points, r.super_violations, r.sub_violations, r.max_super, r.min_sub);
                    reports.push(r);
                }
            }
            let violations: usize = reports.iter().map(|r| r.super_violations + r.sub_violations).sum();
            Ok(Outcome {
                slope: None,
                constant: None,
                checks: vec![check("violations", violations as f64, "== 0".into(), violations == 0)],
                details: serde_json::json!({ "cases": reports }),
                csv,
                plot: None,
            })
        }
        Experiment::KahlerProduct { radii, points, fraction, fd_h, residual_tol, bound_range } => {
            let n = radii.len();
            let domains = radii.iter().map(|&r| disk(r, Point2::ORIGIN).map(Arc::new)).collect::<Result<Vec<_>, _>>()?;
            let factors = radii.iter().enumerate().map(|(i, &r)| disk_factor(r, Point2::ORIGIN, n, i)).collect::<Result<Vec<_>, _>>()?;
            let spec = ProductDomainSpec::new(domains, factors)?;
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let mut worst: f64 = 0.0;
            for _ in 0..*points {
                let z: Vec<Point2> = radii.iter().map(|&r| Point2::polar(fraction * r * rng.gen::<f64>().sqrt(), 2.0 * PI * rng.gen::<f64>())).collect();
                worst = worst.max(monge_ampere_residual(&spec, &z, *fd_h)?.abs());
            }
            let center = compose_product(&spec).value(&vec![Point2::ORIGIN; n])?;
            let bound = product_bound_check(&spec, *points, bound_range[0], bound_range[1], seed)?;
            let mut csv = String::from("level_d,samples,sup\n");
            for l in &bound.levels {
                let _ = writeln!(csv, "{},{},{}", l.d, l.samples, l.sup);
            }
            let checks = vec![
                check("residual", worst, format!("< {residual_tol}"), worst < *residual_tol),
                check("bound_growth", bound.max_growth, "stable across dyadic levels".into(), bound.stable),
            ];
            Ok(Outcome {
                slope: None,
                constant: Some(bound.sup),
                checks,
                details: serde_json::json!({ "n": n, "center_value": center, "max_residual": worst, "bound": bound }),
                csv,
                plot: None,
            })
        }
    }
}

fn boundary_mode(bg: Background, dom: &Arc<DomainSpec>) -> Result<BoundaryMode> {
    Ok(match bg {
        Background::Smooth => BoundaryMode::Matched { model: ModelExpansion::SmoothModel { domain: dom.clone() } },
        Background::Corner => BoundaryMode::Matched { model: ModelExpansion::CornerModel { domain: dom.clone(), corner: 0 } },
        Background::Defining => BoundaryMode::Matched { model: ModelExpansion::Defining { domain: dom.clone() } },
        Background::ConstantK => BoundaryMode::ConstantK { ks: default_k_sequence(), reference: None },
    })
}

/// Background of the bracket audit: the smooth model on smooth domains, the exact
/// corner model on straight sectors, and the defining function otherwise.
fn audit_background(kind: &DomainKind, dom: &Arc<DomainSpec>) -> ModelExpansion {
    match kind {
        DomainKind::Disk { .. } | DomainKind::SmoothBlob { .. } => ModelExpansion::SmoothModel { domain: dom.clone() },
        DomainKind::Sector { .. } => ModelExpansion::CornerModel { domain: dom.clone(), corner: 0 },
        _ => ModelExpansion::Defining { domain: dom.clone() },
    }
}

/// `|u - f_mu|` along the bisector of corner 0, solved with the defining-function background.
fn corner_profile(dom: &Arc<DomainSpec>, cfg: &SolverConfig, window: Option<[f64; 2]>, expected: f64, tolerance: f64) -> Result<(ErrorProfile, EstimateCheck)> {
    let mu = dom.corner(0)?.mu;
    let h = cfg.h;
    let sol = solve_blowup(dom.clone(), &BoundaryMode::Matched { model: ModelExpansion::Defining { domain: dom.clone() } }, cfg)?;
    let model = ModelExpansion::CornerModel { domain: dom.clone(), corner: 0 };
    let w = window.unwrap_or([WINDOW_FLOOR_SPACINGS * h, WINDOW_TOP_FRACTION * dom.feature_scale()]);
    let sampler = Sampler::ray(Point2::ORIGIN, Point2::polar(1.0, 0.5 * mu * PI), cfg.trust_factor * h, (2.0 * w[1]).min(1.0), SAMPLES_PER_OCTAVE);
    let prof = error_profile(&sol, &model, dom, &sampler)?;
    let est = check_estimate(&prof, expected, tolerance, (w[0], w[1])).context("rate fit")?;
    Ok((prof, est))
}

fn rate_outcome(prof: &ErrorProfile, est: EstimateCheck, column: &str, quantity: &str) -> Outcome {
    let bound = est.expected - est.tolerance;
    Outcome {
        slope: Some(est.fit.slope),
        constant: Some(est.fit.constant),
        checks: vec![check("slope", est.fit.slope, format!(">= {bound}"), est.pass)],
        details: serde_json::json!({ "estimate": est, "skipped": prof.skipped, "samples": prof.samples.len() }),
        csv: profile_csv(prof, column),
        plot: Some(Plot::from_profile(prof, Some(&est.fit), &format!("{quantity} vs d"), "d", quantity)),
    }
}

fn profile_csv(prof: &ErrorProfile, column: &str) -> String {
    let mut s = format!("x,d,px,py,{column}\n");
    for p in &prof.samples {
        let _ = writeln!(s, "{},{},{},{},{}", p.x, p.d, p.p.x, p.p.y, p.error);
    }
    s
}

/// Power-law fit of `max_error` against `h`. Studies have too few rows for the
/// profile fitter, so the least-squares line is computed here.
fn rows_fit(rows: &[ConvergenceRow]) -> Result<RateFit> {
    let n = rows.len();
    if n < 2 {
        return Err(anyhow!("need at least two rows to fit an order"));
    }
    let xs: Vec<f64> = rows.iter().map(|r| r.h.ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.max_error.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n as f64).sqrt();
    let window = rows.iter().fold((f64::INFINITY, 0.0f64), |(a, b), r| (a.min(r.h), b.max(r.h)));
    Ok(RateFit { slope, intercept, constant: intercept.exp(), rms, n, dropped_zero: 0, window })
}

fn convergence_outcome(rows: &[ConvergenceRow], fit: RateFit, checks: Vec<Check>, title: &str) -> Outcome {
    let mut csv = String::from("h,max_error,nodes,order\n");
    for r in rows {
        let order = r.order.map(|o| o.to_string()).unwrap_or_default();
        let _ = writeln!(csv, "{},{},{},{}", r.h, r.max_error, r.nodes, order);
    }
    let points: Vec<(f64, f64)> = rows.iter().map(|r| (r.h, r.max_error)).collect();
    Outcome {
        slope: Some(fit.slope),
        constant: Some(fit.constant),
        checks,
        details: serde_json::json!({ "rows": rows, "fit": fit }),
        csv,
        plot: Some(Plot { title: title.into(), x_label: "h".into(), y_label: "max error".into(), points, fit: Some(fit) }),
    }
}
