//! Constructors for the standard test domains.

use super::curve::{CurveKind, CurveSegment, Profile, Regularity};
use super::domain::{CornerSpec, DomainSpec};
use super::point::{Frame, Point2};
use super::region::Region;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainKind {
    Disk {
        radius: f64,
        #[serde(default)]
        center: Point2,
    },
    /// Straight sector `{0 < theta < mu pi, r < radius}` with its vertex at the origin.
    Sector { mu: f64, radius: f64 },
    /// Corner of opening `mu pi` with `C^{1,alpha}` arms `t = amplitude s^(1 + alpha)`.
    C1AlphaArmCorner {
        mu: f64,
        alpha: f64,
        amplitude: f64,
        #[serde(default = "default_arm")]
        arm_length: f64,
    },
    /// Corner of opening `mu pi` whose arms are parabolas bending toward the interior
    /// with curvature `2 * amplitude` at the vertex, closed by an arc.
    CurvedCorner {
        mu: f64,
        amplitude: f64,
        #[serde(default = "default_arm")]
        arm_length: f64,
    },
    /// `{ y > m |x|^(1 + alpha) } ∩ { |z| < radius }`.
    C1AlphaCorner { alpha: f64, m: f64, radius: f64 },
    /// Three-lobed star `r < radius (1 + amplitude cos(lobes theta))`.
    SmoothBlob {
        #[serde(default = "one")]
        radius: f64,
        #[serde(default = "default_amp")]
        amplitude: f64,
        #[serde(default = "default_lobes")]
        lobes: u32,
    },
}

fn default_arm() -> f64 {
    2.0
}
fn one() -> f64 {
    1.0
}
fn default_amp() -> f64 {
    0.2
}
fn default_lobes() -> u32 {
    3
}

pub fn build_domain(kind: &DomainKind) -> Result<DomainSpec> {
    match *kind {
        DomainKind::Disk { radius, center } => disk(radius, center),
        DomainKind::Sector { mu, radius } => sector(mu, radius),
        DomainKind::CurvedCorner { mu, amplitude, arm_length } => curved_corner(mu, amplitude, arm_length),
        DomainKind::C1AlphaArmCorner { mu, alpha, amplitude, arm_length } => c1alpha_arm_corner(mu, alpha, amplitude, arm_length),
        DomainKind::C1AlphaCorner { alpha, m, radius } => c1alpha_corner(alpha, m, radius),
        DomainKind::SmoothBlob { radius, amplitude, lobes } => smooth_blob(radius, amplitude, lobes),
    }
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("{name} must be positive and finite, got {v}")))
    }
}

fn check_mu(mu: f64) -> Result<()> {
    if mu > 0.0 && mu < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("mu must lie in (0, 2), got {mu}")))
    }
}

pub fn disk(radius: f64, center: Point2) -> Result<DomainSpec> {
    positive("radius", radius)?;
    let seg = CurveSegment::arc(center, radius, 0.0, 2.0 * PI);
    Ok(DomainSpec::new("disk", vec![seg], vec![], Some(Region::Disk { center, radius }))?.with_feature_scale(radius))
}

/// Corner specs for every joint of the loop, measured from the segments.
fn tag_joints(segments: &[CurveSegment], joints: &[usize]) -> Vec<CornerSpec> {
    let n = segments.len();
    joints
        .iter()
        .map(|&i| {
            let t_out = segments[i].tangent(0.0).normalized();
            let t_in = -segments[(i + n - 1) % n].tangent(1.0).normalized();
            let mut a = t_out.cross(t_in).atan2(t_out.dot(t_in));
            if a <= 0.0 {
                a += 2.0 * PI;
            }
            CornerSpec { vertex: segments[i].start(), mu: a / PI, first: i, second: (i + n - 1) % n }
        })
        .collect()
}

/// Convex or reflex polygon from counter-clockwise vertices; every vertex is tagged.
pub fn polygon(name: &str, vertices: &[Point2]) -> Result<DomainSpec> {
    if vertices.len() < 3 {
        return Err(Error::InvalidParameter("a polygon needs at least three vertices".into()));
    }
    let n = vertices.len();
    let segs: Vec<CurveSegment> = (0..n).map(|i| CurveSegment::line(vertices[i], vertices[(i + 1) % n])).collect();
    let corners = tag_joints(&segs, &(0..n).collect::<Vec<_>>());
    DomainSpec::new(name, segs, corners, None)
}

pub fn sector(mu: f64, radius: f64) -> Result<DomainSpec> {
    check_mu(mu)?;
    positive("radius", radius)?;
    let o = Point2::ORIGIN;
    let a = Point2::new(radius, 0.0);
    let e2 = Point2::polar(1.0, mu * PI);
    let segs = vec![CurveSegment::line(o, a), CurveSegment::arc(o, radius, 0.0, mu * PI), CurveSegment::line(e2 * radius, o)];
    let corners = tag_joints(&segs, &[0, 1, 2]);
    let h1 = Region::HalfPlane { point: o, normal: Point2::new(0.0, 1.0) };
    let h2 = Region::HalfPlane { point: o, normal: Point2::new(e2.y, -e2.x) };
    let disk = Region::Disk { center: o, radius };
    let region = if mu <= 1.0 { Region::and(Region::and(h1, h2), disk) } else { Region::and(Region::or(h1, h2), disk) };
    Ok(DomainSpec::new(format!("sector(mu={mu})"), segs, corners, Some(region))?.with_feature_scale(radius))
}

pub fn curved_corner(mu: f64, amplitude: f64, arm: f64) -> Result<DomainSpec> {
    let p1 = Profile::Poly { coeffs: vec![0.0, 0.0, amplitude] };
    let p2 = Profile::Poly { coeffs: vec![0.0, 0.0, -amplitude] };
    bent_corner(format!("curved-corner(mu={mu})"), mu, amplitude * arm, arm, p1, p2, |_| Regularity::C2)
}

/// Corner whose arms are the `C^{1,alpha}` graphs `t = +-amplitude s^(1+alpha)` in the
/// frames of the two tangent rays.
pub fn c1alpha_arm_corner(mu: f64, alpha: f64, amplitude: f64, arm: f64) -> Result<DomainSpec> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    let p1 = Profile::Power { coef: amplitude, exponent: 1.0 + alpha };
    let p2 = Profile::Power { coef: -amplitude, exponent: 1.0 + alpha };
    let bend = 0.5 * amplitude * (1.0 + alpha) * arm.powf(alpha);
    bent_corner(format!("c1alpha-arm-corner(mu={mu}, alpha={alpha})"), mu, bend, arm, p1, p2, |frame| Regularity::C1Alpha { alpha, frame })
}

fn bent_corner(name: String, mu: f64, bend: f64, arm: f64, p1: Profile, p2: Profile, regularity: impl Fn(Frame) -> Regularity) -> Result<DomainSpec> {
    check_mu(mu)?;
    positive("arm_length", arm)?;
    if 2.0 * bend.atan() >= mu * PI {
        return Err(Error::InvalidParameter("arms bend too far for this opening".into()));
    }
    let f1 = Frame::IDENTITY;
    let f2 = Frame::new(Point2::ORIGIN, mu * PI);
    let sigma1 = CurveSegment::new(CurveKind::Graph { frame: f1, profile: p1.clone(), s0: 0.0, s1: arm }, regularity(f1));
    let sigma2 = CurveSegment::new(CurveKind::Graph { frame: f2, profile: p2.clone(), s0: arm, s1: 0.0 }, regularity(f2));
    let a1 = sigma1.end();
    let a2 = sigma2.start();
    let rc = a1.norm();
    let th1 = a1.angle();
    let mut th2 = a2.angle();
    while th2 <= th1 {
        th2 += 2.0 * PI;
    }
    let close = CurveSegment::arc(Point2::ORIGIN, rc, th1, th2);
    let segs = vec![sigma1, close, sigma2];
    let corners = tag_joints(&segs, &[0, 1, 2]);
    let r1 = Region::Graph { frame: f1, profile: p1, above: true };
    let r2 = Region::Graph { frame: f2, profile: p2, above: false };
    let disk = Region::Disk { center: Point2::ORIGIN, radius: rc };
    let region = if mu <= 1.0 { Region::and(Region::and(r1, r2), disk) } else { Region::and(Region::or(r1, r2), disk) };
    Ok(DomainSpec::new(name, segs, corners, Some(region))?.with_feature_scale(arm))
}

pub fn c1alpha_corner(alpha: f64, m: f64, radius: f64) -> Result<DomainSpec> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    positive("m", m)?;
    positive("radius", radius)?;
    let p = 1.0 + alpha;
    // Abscissa where the graph meets the circle: x^2 + m^2 x^(2p) = radius^2.
    let (mut lo, mut hi) = (0.0, radius);
    for _ in 0..200 {
        let x = 0.5 * (lo + hi);
        if x * x + m * m * x.powf(2.0 * p) > radius * radius {
            hi = x;
        } else {
            lo = x;
        }
    }
    let xe = 0.5 * (lo + hi);
    let profile = Profile::Power { coef: m, exponent: p };
    let graph = CurveSegment::new(
        CurveKind::Graph { frame: Frame::IDENTITY, profile: profile.clone(), s0: -xe, s1: xe },
        Regularity::C1Alpha { alpha, frame: Frame::IDENTITY },
    );
    let ye = m * xe.powf(p);
    let t0 = ye.atan2(xe);
    let close = CurveSegment::arc(Point2::ORIGIN, radius, t0, PI - t0);
    let segs = vec![graph, close];
    let corners = tag_joints(&segs, &[0, 1]);
    let region = Region::and(Region::Graph { frame: Frame::IDENTITY, profile, above: true }, Region::Disk { center: Point2::ORIGIN, radius });
    Ok(DomainSpec::new(format!("c1alpha-corner(alpha={alpha})"), segs, corners, Some(region))?.with_feature_scale(radius))
}

pub fn smooth_blob(radius: f64, amplitude: f64, lobes: u32) -> Result<DomainSpec> {
    positive("radius", radius)?;
    if !(0.0..1.0).contains(&amplitude) {
        return Err(Error::InvalidParameter("amplitude must lie in [0, 1)".into()));
    }
    let kind = CurveKind::Polar { center: Point2::ORIGIN, radius, amplitude, lobes, phase: 0.0, start: 0.0, end: 2.0 * PI };
    let seg = CurveSegment::new(kind, Regularity::C2);
    let region = Region::Polar { center: Point2::ORIGIN, radius, amplitude, lobes, phase: 0.0 };
    let reach = 1.0 / seg.bound.max(1e-12);
    Ok(DomainSpec::new("smooth-blob", vec![seg], vec![], Some(region))?.with_feature_scale(reach.min(radius)))
}

/// Two sectors with the same vertex and opening whose boundaries coincide inside
/// the ball of radius `coincide` around the vertex.
#[derive(Debug, Clone)]
pub struct LocalizedPair {
    pub inner: DomainSpec,
    pub outer: DomainSpec,
    pub coincide: f64,
}

pub fn localized_pair(mu: f64) -> Result<LocalizedPair> {
    Ok(LocalizedPair { inner: sector(mu, 1.0)?, outer: sector(mu, 1.6)?, coincide: 1.0 })
}
