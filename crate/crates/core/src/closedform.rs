//! Closed-form solutions, boundary model expansions and residual operators.

use crate::error::{Error, Result};
use crate::field::{fd_jet, fd_laplacian, Field, Jet};
use crate::geometry::{DomainSpec, Frame, Point2, Regularity};
use crate::jet::Jet2;
use std::f64::consts::PI;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

static ARCSIN_CLAMPS: AtomicU64 = AtomicU64::new(0);

/// Number of times an `arcsin` argument of the corner model was clamped into `[0, 1]`.
pub fn arcsin_clamp_count() -> u64 {
    ARCSIN_CLAMPS.load(Ordering::Relaxed)
}

fn clamped_asin(x: f64) -> f64 {
    if !(0.0..=1.0).contains(&x) {
        ARCSIN_CLAMPS.fetch_add(1, Ordering::Relaxed);
    }
    x.clamp(0.0, 1.0).asin()
}

/// `log(2r / (r^2 - |x - x0|^2))` on the open ball `|x - x0| < r`.
pub fn ball_solution(r: f64, x0: Point2, x: Point2) -> Result<f64> {
    let s = (x - x0).norm2();
    if !(r > 0.0) || s >= r * r {
        return Err(Error::out_of_domain(x, "outside the ball"));
    }
    Ok((2.0 * r / (r * r - s)).ln())
}

/// `log(2r / (|x - x0|^2 - r^2))` outside the closed ball.
pub fn exterior_ball_solution(r: f64, x0: Point2, x: Point2) -> Result<f64> {
    let s = (x - x0).norm2();
    if !(r > 0.0) || s <= r * r {
        return Err(Error::out_of_domain(x, "inside the closed ball"));
    }
    Ok((2.0 * r / (s - r * r)).ln())
}

/// `-log(mu r sin(theta / mu))` on the cone `0 < theta < mu pi` (local coordinates).
pub fn cone_solution(mu: f64, z: Point2) -> Result<f64> {
    let th = cone_angle(mu, z).ok_or_else(|| Error::out_of_domain(z, "outside the cone"))?;
    // Near the second edge, measure the angle from that edge so that the small
    // argument of the sine keeps its relative accuracy.
    let s = if th <= 0.5 * mu * PI {
        (th / mu).sin()
    } else {
        let w = z.rotate(-mu * PI);
        ((-w.y).atan2(w.x) / mu).sin()
    };
    Ok(-(mu * z.norm() * s).ln())
}

/// Angle of `z` in `(0, mu pi)`, if `z` is inside the cone.
fn cone_angle(mu: f64, z: Point2) -> Option<f64> {
    if z.norm() == 0.0 {
        return None;
    }
    let mid = 0.5 * mu * PI;
    let mut th = z.angle();
    while th > mid + PI {
        th -= 2.0 * PI;
    }
    while th <= mid - PI {
        th += 2.0 * PI;
    }
    (th > 0.0 && th < mu * PI).then_some(th)
}

pub fn half_plane_solution(x: Point2) -> Result<f64> {
    if x.y <= 0.0 {
        return Err(Error::out_of_domain(x, "not in the upper half-plane"));
    }
    Ok(-x.y.ln())
}

/// Closed forms and boundary model expansions used as oracles, boundary data
/// and solver backgrounds.
#[derive(Clone)]
pub enum ModelExpansion {
    Ball {
        radius: f64,
        center: Point2,
    },
    ExteriorBall {
        radius: f64,
        center: Point2,
    },
    /// `-log((x - point) . normal)`, `normal` a unit vector.
    HalfPlane {
        point: Point2,
        normal: Point2,
    },
    /// Cone solution in the local coordinates of `frame`.
    Cone {
        mu: f64,
        frame: Frame,
    },
    /// Corner model built from the distances to the two arms of a tagged corner.
    CornerModel {
        domain: Arc<DomainSpec>,
        corner: usize,
    },
    /// `-log d + kappa d / 2` with `kappa` the curvature at the nearest boundary point.
    SmoothModel {
        domain: Arc<DomainSpec>,
    },
    /// `-log rho` for the domain's defining function.
    Defining {
        domain: Arc<DomainSpec>,
    },
}

impl std::fmt::Debug for ModelExpansion {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.name())
    }
}

impl ModelExpansion {
    pub fn name(&self) -> String {
        match self {
            ModelExpansion::Ball { radius, .. } => format!("ball(r={radius})"),
            ModelExpansion::ExteriorBall { radius, .. } => format!("exterior-ball(r={radius})"),
            ModelExpansion::HalfPlane { .. } => "half-plane".into(),
            ModelExpansion::Cone { mu, .. } => format!("cone(mu={mu})"),
            ModelExpansion::CornerModel { domain, corner } => format!("corner-model({}, corner {corner})", domain.name()),
            ModelExpansion::SmoothModel { domain } => format!("smooth-model({})", domain.name()),
            ModelExpansion::Defining { domain } => format!("defining({})", domain.name()),
        }
    }

    fn analytic_jet(&self, p: Point2) -> Option<Result<Jet2>> {
        let (x, y) = Jet2::vars(p);
        Some(match self {
            ModelExpansion::Ball { radius, center } => {
                let (dx, dy) = (x - center.x, y - center.y);
                let den = Jet2::constant(radius * radius) - dx * dx - dy * dy;
                if den.v <= 0.0 {
                    Err(Error::out_of_domain(p, "outside the ball"))
                } else {
                    Ok(-(den * (0.5 / radius)).ln())
                }
            }
            ModelExpansion::ExteriorBall { radius, center } => {
                let (dx, dy) = (x - center.x, y - center.y);
                let den = dx * dx + dy * dy - radius * radius;
                if den.v <= 0.0 {
                    Err(Error::out_of_domain(p, "inside the closed ball"))
                } else {
                    Ok(-(den * (0.5 / radius)).ln())
                }
            }
            ModelExpansion::HalfPlane { point, normal } => {
                let s = (x - point.x) * normal.x + (y - point.y) * normal.y;
                if s.v <= 0.0 {
                    Err(Error::out_of_domain(p, "outside the half-plane"))
                } else {
                    Ok(-s.ln())
                }
            }
            ModelExpansion::Cone { mu, frame } => {
                let z = frame.to_local(p);
                match cone_angle(*mu, z) {
                    None => Err(Error::out_of_domain(p, "outside the cone")),
                    Some(th) => {
                        let (c, s) = (frame.angle.cos(), frame.angle.sin());
                        let dx = x - frame.origin.x;
                        let dy = y - frame.origin.y;
                        let lx = dx * c + dy * s;
                        let ly = dy * c - dx * s;
                        let r = (lx * lx + ly * ly).sqrt();
                        let mut a = Jet2::atan2(ly, lx);
                        a.v = th;
                        Ok(-(r * (a * (1.0 / mu)).sin() * *mu).ln())
                    }
                }
            }
            ModelExpansion::Defining { domain } => match domain.region() {
                None => Err(Error::InvalidQuery(format!("domain {} has no defining region", domain.name()))),
                Some(reg) => {
                    let rho = reg.jet(p);
                    if rho.v <= 0.0 {
                        Err(Error::out_of_domain(p, "defining function is not positive"))
                    } else {
                        Ok(-rho.ln())
                    }
                }
            },
            _ => return None,
        })
    }

    fn inside(domain: &DomainSpec, p: Point2) -> Result<()> {
        if domain.contains(p) {
            Ok(())
        } else {
            Err(Error::out_of_domain(p, format!("outside {}", domain.name())))
        }
    }

    fn smooth_parts(domain: &DomainSpec, p: Point2) -> Result<(f64, f64, Point2)> {
        let (seg, pr) = domain.nearest(p);
        let s = &domain.segments()[seg];
        if matches!(s.regularity, Regularity::C1Alpha { .. }) {
            return Err(Error::Regularity("the smooth model needs a C^2 boundary".into()));
        }
        if !(pr.dist > 0.0) {
            return Err(Error::out_of_domain(p, "on the boundary"));
        }
        Ok((pr.dist, s.curvature(pr.t), pr.foot))
    }

    /// Corner model value; `None` inside the domain but outside its chart logic.
    fn corner_value(domain: &DomainSpec, corner: usize, p: Point2) -> Result<f64> {
        let c = *domain.corner(corner)?;
        let cd = domain.corner_distances(corner, p)?;
        let r = p.dist(c.vertex);
        if !(r > 0.0) {
            return Err(Error::out_of_domain(p, "at the vertex"));
        }
        let mu = c.mu;
        let from_d = |d: f64| -(mu * r * (clamped_asin(d / r) / mu).sin()).ln();
        if mu <= 1.0 {
            return Ok(from_d(cd.d1.min(cd.d2)));
        }
        let tol = 1e-12 * r;
        if (cd.d1 - cd.d2).abs() <= tol {
            let (_, th) = domain.corner_polar(corner, p)?;
            if !(th > 0.0 && th < mu * PI) {
                return Err(Error::out_of_domain(p, "outside the opening of the corner"));
            }
            Ok(-(mu * r * (th / mu).sin()).ln())
        } else {
            Ok(from_d(cd.d1.min(cd.d2)))
        }
    }
}

impl Field for ModelExpansion {
    fn value(&self, p: Point2) -> Result<f64> {
        match self {
            ModelExpansion::Ball { radius, center } => ball_solution(*radius, *center, p),
            ModelExpansion::ExteriorBall { radius, center } => exterior_ball_solution(*radius, *center, p),
            ModelExpansion::HalfPlane { point, normal } => {
                let s = (p - *point).dot(*normal);
                if s <= 0.0 {
                    Err(Error::out_of_domain(p, "outside the half-plane"))
                } else {
                    Ok(-s.ln())
                }
            }
            ModelExpansion::Cone { mu, frame } => cone_solution(*mu, frame.to_local(p)),
            ModelExpansion::CornerModel { domain, corner } => {
                Self::inside(domain, p)?;
                Self::corner_value(domain, *corner, p)
            }
            ModelExpansion::SmoothModel { domain } => {
                Self::inside(domain, p)?;
                let (d, k, _) = Self::smooth_parts(domain, p)?;
                Ok(-d.ln() + 0.5 * k * d)
            }
            ModelExpansion::Defining { domain } => {
                let rho = domain.defining(p)?;
                if rho <= 0.0 {
                    Err(Error::out_of_domain(p, "defining function is not positive"))
                } else {
                    Ok(-rho.ln())
                }
            }
        }
    }

    fn jet(&self, p: Point2) -> Result<Jet> {
        if let Some(j) = self.analytic_jet(p) {
            return j.map(Jet::from);
        }
        match self {
            ModelExpansion::SmoothModel { domain } => {
                Self::inside(domain, p)?;
                let (d, k, foot) = Self::smooth_parts(domain, p)?;
                let n = (p - foot) * (1.0 / d);
                // -log d is differentiated exactly, the bounded correction numerically.
                let lap_d = -k / (1.0 - k * d);
                let spacing = 0.25 * d.min(0.04 * domain.feature_scale());
                let corr = SmoothCorrection { domain: domain.clone() };
                let cj = fd_jet(&corr, p, spacing)?;
                Ok(Jet { value: -d.ln() + cj.value, grad: n * (-1.0 / d) + cj.grad, laplacian: 1.0 / (d * d) - lap_d / d + cj.laplacian })
            }
            _ => fd_jet(self, p, self.fd_spacing(p)),
        }
    }

    fn fd_spacing(&self, p: Point2) -> f64 {
        match self {
            ModelExpansion::CornerModel { domain, corner } => {
                let d = domain.nearest(p).1.dist;
                let r = domain.corner(*corner).map(|c| c.vertex.dist(p)).unwrap_or(d);
                d.min(r) / 50.0
            }
            ModelExpansion::SmoothModel { domain } | ModelExpansion::Defining { domain } => domain.nearest(p).1.dist / 50.0,
            _ => 1e-4,
        }
    }
}

/// The bounded part `kappa d / 2` of the smooth model.
struct SmoothCorrection {
    domain: Arc<DomainSpec>,
}

impl Field for SmoothCorrection {
    fn value(&self, p: Point2) -> Result<f64> {
        let (d, k, _) = ModelExpansion::smooth_parts(&self.domain, p)?;
        Ok(0.5 * k * d)
    }
}

/// Distance to the boundary as a field.
pub struct DistanceField(pub Arc<DomainSpec>);

impl Field for DistanceField {
    fn value(&self, p: Point2) -> Result<f64> {
        Ok(self.0.distance_to_boundary(p)?.d)
    }
}

/// `Delta u - e^{2u}` with a fourth-order finite-difference Laplacian of spacing `h`.
pub fn liouville_residual(u: &dyn Field, p: Point2, h: f64) -> Result<f64> {
    let lap = fd_laplacian(u, p, h)?;
    Ok(lap - (2.0 * u.value(p)?).exp())
}

/// `S(v) = d Delta v - Delta d - (e^{2v} - 1) / d` for `v = u + log d`, with `d` the
/// distance to the boundary.
pub fn s_residual(v: &dyn Field, dist: &dyn Field, p: Point2, h: f64) -> Result<f64> {
    let d = dist.value(p)?;
    let lap_v = fd_laplacian(v, p, h)?;
    let lap_d = fd_laplacian(dist, p, h)?;
    Ok(d * lap_v - lap_d - (2.0 * v.value(p)?).exp_m1() / d)
}

/// `u + log d` for a field `u`.
pub struct LogDistanceShift {
    pub u: Arc<dyn Field>,
    pub domain: Arc<DomainSpec>,
}

impl Field for LogDistanceShift {
    fn value(&self, p: Point2) -> Result<f64> {
        let d = self.domain.distance_to_boundary(p)?.d;
        Ok(self.u.value(p)? + d.ln())
    }
}
