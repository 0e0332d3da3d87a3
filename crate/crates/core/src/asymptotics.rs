//! Comparison brackets, error profiles, rate fits and barrier audits.

use crate::closedform::{ball_solution, exterior_ball_solution, liouville_residual};
use crate::error::{Error, Result};
use crate::field::{Field, FnField};
use crate::geometry::{DomainSpec, Point2, Regularity};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// How the lower end of a bracket was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum LowerSource {
    ExteriorBall,
    /// Ball inside an exterior cone at the foot; weaker and flagged.
    ExteriorCone,
    None,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Bracket {
    pub lower: f64,
    pub upper: f64,
    pub d: f64,
    pub interior_radius: f64,
    pub exterior_radius: f64,
    pub lower_source: LowerSource,
    pub flagged: bool,
}

/// Directions sampled on a ball boundary when verifying that it avoids the domain.
const BALL_SAMPLES: usize = 720;

fn ball_outside(domain: &DomainSpec, c: Point2, r: f64) -> bool {
    let touch = 1e-7 * r.max(1e-300);
    let ok = |q: Point2| !domain.contains(q) || domain.nearest(q).1.dist <= touch;
    if !ok(c) {
        return false;
    }
    (0..BALL_SAMPLES).all(|k| ok(c + Point2::polar(r, 2.0 * PI * k as f64 / BALL_SAMPLES as f64)))
}

/// Comparison bracket: the solution on the largest interior tangent ball at the
/// foot is an upper bound, the solution outside an exterior ball a lower bound.
pub fn bracket_point(domain: &DomainSpec, p: Point2) -> Result<Bracket> {
    let dr = domain.distance_to_boundary(p)?;
    let d = dr.d;
    let q = dr.foot;
    let n = (p - q) * (1.0 / d);
    // Largest interior ball tangent at the foot, by bisection on its radius.
    let fits = |r: f64| {
        let c = q + n * r;
        domain.contains(c) && domain.nearest(c).1.dist >= r * (1.0 - 1e-9)
    };
    let mut lo = d;
    let mut hi = domain.diameter();
    if fits(hi) {
        lo = hi;
    } else {
        for _ in 0..50 {
            let m = 0.5 * (lo + hi);
            if fits(m) {
                lo = m;
            } else {
                hi = m;
            }
        }
    }
    let ri = lo;
    let upper = ball_solution(ri, q + n * ri, p)?;

    let seg = &domain.segments()[dr.segment];
    let mut lower = f64::NEG_INFINITY;
    let mut re = 0.0;
    let mut source = LowerSource::None;
    let candidate = |r: f64, gap: f64| -> Option<(f64, f64)> {
        let c = q - n * (gap + r);
        if ball_outside(domain, c, r) {
            exterior_ball_solution(r, c, p).ok().map(|v| (v, r))
        } else {
            None
        }
    };
    let found = match seg.regularity {
        Regularity::C1Alpha { alpha, .. } if seg.bound > 0.0 => {
            let m = seg.bound;
            let r = d.powf(1.0 - alpha) / (2.0 * m);
            (0..30).find_map(|k| candidate(r * 0.5f64.powi(k), m * d.powf(1.0 + alpha)))
        }
        _ => {
            let r0 = 1.0 / seg.bound.max(1.0 / domain.diameter());
            (0..30).find_map(|k| candidate(r0 * 0.5f64.powi(k), 0.0))
        }
    };
    if let Some((v, r)) = found {
        lower = v;
        re = r;
        source = LowerSource::ExteriorBall;
    } else {
        // Exterior cone with axis -n and half-opening theta: the ball of radius d
        // centred at distance d / sin(theta) from the foot lies inside it.
        for k in 2..7 {
            let th = PI / f64::from(1u32 << k);
            let c = q - n * (d / th.sin());
            if ball_outside(domain, c, d) {
                if let Ok(v) = exterior_ball_solution(d, c, p) {
                    lower = v;
                    re = d;
                    source = LowerSource::ExteriorCone;
                    break;
                }
            }
        }
    }
    Ok(Bracket { lower, upper, d, interior_radius: ri, exterior_radius: re, lower_source: source, flagged: source != LowerSource::ExteriorBall })
}

/// Quantity used on the horizontal axis of a profile.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Abscissa {
    /// Distance to the boundary.
    Distance,
    /// Distance to the sampler origin.
    Radius,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    pub origin: Point2,
    pub direction: Point2,
}

/// Geometric sampling along rays: `origin + s_j direction` with
/// `s_j = s_max 2^(-j / per_octave)` down to `s_min`. Rays usually start at a
/// boundary point or a corner vertex and point into the domain.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Sampler {
    pub rays: Vec<Ray>,
    pub s_max: f64,
    pub s_min: f64,
    pub per_octave: usize,
    pub abscissa: Abscissa,
}

impl Sampler {
    pub fn ray(origin: Point2, direction: Point2, s_min: f64, s_max: f64, per_octave: usize) -> Self {
        Sampler { rays: vec![Ray { origin, direction: direction.normalized() }], s_max, s_min, per_octave, abscissa: Abscissa::Distance }
    }

    pub fn points(&self) -> Vec<Point2> {
        let mut out = Vec::new();
        let per = self.per_octave.max(1) as f64;
        for ray in &self.rays {
            let mut j = 0;
            loop {
                let s = self.s_max * 2f64.powf(-(j as f64) / per);
                if s < self.s_min * (1.0 - 1e-12) {
                    break;
                }
                out.push(ray.origin + ray.direction * s);
                j += 1;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileSample {
    pub p: Point2,
    pub d: f64,
    pub x: f64,
    /// Signed `u - model`.
    pub error: f64,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorProfile {
    pub samples: Vec<ProfileSample>,
    /// Points dropped because a field could not be evaluated there (for grid
    /// solutions: outside the trust region).
    pub skipped: usize,
}

/// Minimum sample count for rate fits and profiles.
pub const MIN_SAMPLES: usize = 4;

/// Samples `u - model` at the sampler points, sorted by abscissa.
pub fn error_profile(u: &dyn Field, model: &dyn Field, domain: &DomainSpec, sampler: &Sampler) -> Result<ErrorProfile> {
    let mut prof = ErrorProfile::default();
    for p in sampler.points() {
        let Ok(dr) = domain.distance_to_boundary(p) else {
            prof.skipped += 1;
            continue;
        };
        let x = match sampler.abscissa {
            Abscissa::Distance => dr.d,
            Abscissa::Radius => p.dist(sampler.rays[0].origin),
        };
        match (u.value(p), model.value(p)) {
            (Ok(a), Ok(b)) if a.is_finite() && b.is_finite() => prof.samples.push(ProfileSample { p, d: dr.d, x, error: a - b }),
            _ => prof.skipped += 1,
        }
    }
    prof.samples.sort_by(|a, b| a.x.total_cmp(&b.x));
    if prof.samples.len() < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { found: prof.samples.len(), needed: MIN_SAMPLES });
    }
    Ok(prof)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateFit {
    pub slope: f64,
    /// `log C` in `|e| ~ C x^slope`.
    pub intercept: f64,
    pub constant: f64,
    pub rms: f64,
    pub n: usize,
    pub dropped_zero: usize,
    pub window: (f64, f64),
}

/// Least-squares fit of `log |e|` against `log x` on samples with `x` in `window`.
pub fn fit_rate(profile: &ErrorProfile, window: (f64, f64)) -> Result<RateFit> {
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut dropped = 0;
    for s in &profile.samples {
        if s.x < window.0 * (1.0 - 1e-12) || s.x > window.1 * (1.0 + 1e-12) {
            continue;
        }
        if s.error == 0.0 {
            dropped += 1;
            continue;
        }
        xs.push(s.x.ln());
        ys.push(s.error.abs().ln());
    }
    let n = xs.len();
    if n < MIN_SAMPLES {
        return Err(Error::InsufficientSamples { found: n, needed: MIN_SAMPLES });
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    if sxx <= 0.0 {
        return Err(Error::InsufficientSamples { found: 1, needed: MIN_SAMPLES });
    }
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rms = (xs.iter().zip(&ys).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum::<f64>() / n as f64).sqrt();
    Ok(RateFit { slope, intercept, constant: intercept.exp(), rms, n, dropped_zero: dropped, window })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimateCheck {
    pub pass: bool,
    pub expected: f64,
    pub tolerance: f64,
    pub fit: RateFit,
    /// Slope on the lower half (in log scale) of the window, if it could be fitted.
    pub shrunk_slope: Option<f64>,
    /// Shrinking the window toward the boundary lowers the slope by more than the fit residual.
    pub inconclusive: bool,
}

/// Passes iff the fitted slope is at least `expected - tolerance` with a finite constant.
pub fn check_estimate(profile: &ErrorProfile, expected: f64, tolerance: f64, window: (f64, f64)) -> Result<EstimateCheck> {
    let fit = fit_rate(profile, window)?;
    let inside = profile.samples.iter().filter(|s| s.x >= window.0 * (1.0 - 1e-12) && s.x <= window.1 * (1.0 + 1e-12));
    let (lo, hi) = inside.fold((f64::INFINITY, 0.0f64), |(a, b), s| (a.min(s.x), b.max(s.x)));
    let mid = (lo * hi).sqrt();
    let shrunk = fit_rate(profile, (lo, mid)).ok().map(|f| f.slope);
    let inconclusive = shrunk.is_some_and(|s| s < fit.slope - fit.rms);
    Ok(EstimateCheck { pass: fit.slope >= expected - tolerance && fit.constant.is_finite(), expected, tolerance, fit, shrunk_slope: shrunk, inconclusive })
}

/// Profile of `|u1 - u2|` against the distance to `center` and its rate fit.
/// The two domains must agree (as point sets) in the sampling ball.
pub fn localization_gap(
    u1: &dyn Field,
    u2: &dyn Field,
    domain1: &DomainSpec,
    domain2: &DomainSpec,
    sampler: &Sampler,
    window: (f64, f64),
) -> Result<(ErrorProfile, RateFit)> {
    let center = sampler.rays.first().ok_or_else(|| Error::InvalidParameter("sampler has no rays".into()))?.origin;
    let rho = sampler.s_max;
    let m = 64;
    let on_boundary = |dom: &DomainSpec, q: Point2| dom.nearest(q).1.dist <= 1e-9 * rho;
    for a in 1..=m {
        for b in 0..m {
            let q = center + Point2::polar(rho * a as f64 / m as f64, 2.0 * PI * (b as f64 + 0.5) / m as f64);
            if on_boundary(domain1, q) || on_boundary(domain2, q) {
                continue;
            }
            if domain1.contains(q) != domain2.contains(q) {
                return Err(Error::InvalidQuery(format!("domains differ at ({}, {}) inside the sampling ball", q.x, q.y)));
            }
        }
    }
    let sampler = Sampler { abscissa: Abscissa::Radius, ..sampler.clone() };
    let prof = error_profile(u1, u2, domain1, &sampler)?;
    let fit = fit_rate(&prof, window)?;
    Ok((prof, fit))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SuperSubReport {
    pub mu: f64,
    pub a: f64,
    pub points: usize,
    pub super_violations: usize,
    pub sub_violations: usize,
    /// Largest `(Delta u - e^{2u}) / e^{2u}` of the supersolution.
    pub max_super: f64,
    /// Smallest `(Delta u - e^{2u}) / e^{2u}` of the subsolution.
    pub min_sub: f64,
}

/// Relative tolerance on the sign checks.
pub const SUPER_SUB_TOL: f64 = 1e-6;

fn halton(mut i: usize, base: usize) -> f64 {
    let mut f = 1.0;
    let mut r = 0.0;
    while i > 0 {
        f /= base as f64;
        r += f * (i % base) as f64;
        i /= base;
    }
    r
}

/// `v_mu + log(1 + A r^(sqrt2/mu))`.
pub fn cone_supersolution(mu: f64, a: f64, z: Point2) -> Result<f64> {
    Ok(crate::closedform::cone_solution(mu, z)? + (a * z.norm().powf(2f64.sqrt() / mu)).ln_1p())
}

/// `v_mu - log(1 + A r^(1/mu))`.
pub fn cone_subsolution(mu: f64, a: f64, z: Point2) -> Result<f64> {
    Ok(crate::closedform::cone_solution(mu, z)? - (a * z.norm().powf(1.0 / mu)).ln_1p())
}

/// Finite-difference sign audit of the cone barriers at quasi-random points with
/// `r` log-uniform in `(0.01, 10)`. The Laplacian spacing is 1% of the distance to
/// the cone boundary and the residual is measured relative to `e^{2u}`.
pub fn super_sub_check(mu: f64, a: f64, samples: usize) -> Result<SuperSubReport> {
    if !(mu > 0.0 && mu < 2.0) || !(a >= 0.0) {
        return Err(Error::InvalidParameter(format!("need mu in (0, 2) and A >= 0, got mu = {mu}, A = {a}")));
    }
    let sup = FnField(move |z: Point2| cone_supersolution(mu, a, z));
    let sub = FnField(move |z: Point2| cone_subsolution(mu, a, z));
    let mut rep = SuperSubReport { mu, a, points: 0, super_violations: 0, sub_violations: 0, max_super: f64::NEG_INFINITY, min_sub: f64::INFINITY };
    let eps = 1e-3;
    for i in 1..=samples {
        let r = 0.01 * 1000f64.powf(halton(i, 2));
        let th = mu * PI * (eps + (1.0 - 2.0 * eps) * halton(i, 3));
        let z = Point2::polar(r, th);
        let edge = th.min(mu * PI - th);
        let d = if edge < 0.5 * PI { r * edge.sin() } else { r };
        let h = d / 100.0;
        let rs = liouville_residual(&sup, z, h)? / (2.0 * sup.value(z)?).exp();
        let rb = liouville_residual(&sub, z, h)? / (2.0 * sub.value(z)?).exp();
        rep.points += 1;
        rep.max_super = rep.max_super.max(rs);
        rep.min_sub = rep.min_sub.min(rb);
        if rs > SUPER_SUB_TOL {
            rep.super_violations += 1;
        }
        if rb < -SUPER_SUB_TOL {
            rep.sub_violations += 1;
        }
    }
    Ok(rep)
}
