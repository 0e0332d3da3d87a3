//! Holomorphic maps, conformal pullback of solutions and images of boundary curves.

use crate::closedform::ModelExpansion;
use crate::error::{Error, Result};
use crate::field::Field;
use crate::geometry::{CurveKind, CurveSegment, Frame, Point2, Regularity};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::sync::Arc;

pub fn to_c(p: Point2) -> Complex64 {
    Complex64::new(p.x, p.y)
}

pub fn from_c(z: Complex64) -> Point2 {
    Point2::new(z.re, z.im)
}

fn default_branch() -> f64 {
    0.5 * PI
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum HolomorphicMap {
    /// `z -> zeta^exponent` with `zeta = frame.to_local(z)` and `arg zeta` taken in
    /// `(branch - pi, branch + pi]`. Only points with `|zeta| < radius` are accepted.
    Power {
        exponent: f64,
        #[serde(default)]
        frame: Frame,
        #[serde(default = "default_branch")]
        branch: f64,
        #[serde(default)]
        radius: Option<f64>,
    },
    /// `z -> 1 / (z - pole)`.
    Inversion { pole: Point2 },
    /// `z -> a z + b` with complex `a != 0`.
    Affine { a: Point2, b: Point2 },
    /// `z -> outer(inner(z))`.
    Compose { outer: Box<HolomorphicMap>, inner: Box<HolomorphicMap> },
}

impl HolomorphicMap {
    pub fn power(exponent: f64) -> Self {
        HolomorphicMap::Power { exponent, frame: Frame::IDENTITY, branch: default_branch(), radius: None }
    }

    /// `zeta^(1/mu)` in the given corner frame, branch cut opposite the bisector of the
    /// cone `0 < theta < mu pi`, which is sent to the upper half-plane.
    pub fn corner_power(mu: f64, frame: Frame, radius: Option<f64>) -> Self {
        HolomorphicMap::Power { exponent: 1.0 / mu, frame, branch: 0.5 * mu * PI, radius }
    }

    pub fn then(self, outer: HolomorphicMap) -> Self {
        HolomorphicMap::Compose { outer: Box::new(outer), inner: Box::new(self) }
    }

    pub fn eval(&self, p: Point2) -> Result<Point2> {
        Ok(self.eval_derivs(p)?.0)
    }

    /// `f'(z)` as a complex number.
    pub fn derivative(&self, p: Point2) -> Result<Complex64> {
        Ok(self.eval_derivs(p)?.1)
    }

    /// Image point, first and second complex derivative.
    pub fn eval_derivs(&self, p: Point2) -> Result<(Point2, Complex64, Complex64)> {
        if !p.is_finite() {
            return Err(Error::out_of_domain(p, "non-finite point"));
        }
        match self {
            HolomorphicMap::Power { exponent, frame, branch, radius } => {
                let zeta = frame.to_local(p);
                let r = zeta.norm();
                if r == 0.0 {
                    return Err(Error::out_of_domain(p, "power map is not conformal at its centre"));
                }
                if let Some(rad) = radius {
                    if r >= *rad {
                        return Err(Error::out_of_domain(p, format!("outside the injectivity disk of radius {rad}")));
                    }
                }
                let mut th = zeta.angle();
                while th > branch + PI {
                    th -= 2.0 * PI;
                }
                while th <= branch - PI {
                    th += 2.0 * PI;
                }
                if (th - (branch + PI)).abs() < 1e-14 {
                    return Err(Error::out_of_domain(p, "on the branch cut"));
                }
                let q = *exponent;
                let rot = Complex64::from_polar(1.0, -frame.angle);
                let w = Complex64::from_polar(r.powf(q), q * th);
                let d1 = Complex64::from_polar(q * r.powf(q - 1.0), (q - 1.0) * th) * rot;
                let d2 = Complex64::from_polar(q * (q - 1.0) * r.powf(q - 2.0), (q - 2.0) * th) * rot * rot;
                Ok((from_c(w), d1, d2))
            }
            HolomorphicMap::Inversion { pole } => {
                let z = to_c(p) - to_c(*pole);
                if z.norm() == 0.0 {
                    return Err(Error::out_of_domain(p, "at the pole of the inversion"));
                }
                let inv = z.inv();
                Ok((from_c(inv), -inv * inv, 2.0 * inv * inv * inv))
            }
            HolomorphicMap::Affine { a, b } => {
                let a = to_c(*a);
                if a.norm() == 0.0 {
                    return Err(Error::InvalidParameter("affine map with zero multiplier".into()));
                }
                Ok((from_c(a * to_c(p) + to_c(*b)), a, Complex64::new(0.0, 0.0)))
            }
            HolomorphicMap::Compose { outer, inner } => {
                let (w, g1, g2) = inner.eval_derivs(p)?;
                let (v, f1, f2) = outer.eval_derivs(w)?;
                Ok((v, f1 * g1, f2 * g1 * g1 + f1 * g2))
            }
        }
    }
}

/// `u1(z) = u2(f(z)) + log |f'(z)|`, a solution on the preimage when `u2` solves
/// the equation on the image.
pub struct Pullback {
    pub target: Arc<dyn Field>,
    pub map: HolomorphicMap,
}

impl Field for Pullback {
    fn value(&self, p: Point2) -> Result<f64> {
        let (w, d1, _) = self.map.eval_derivs(p)?;
        let m = d1.norm();
        if !(m > 0.0 && m.is_finite()) {
            return Err(Error::out_of_domain(p, "map is not conformal here"));
        }
        Ok(self.target.value(w)? + m.ln())
    }

    fn fd_spacing(&self, p: Point2) -> f64 {
        self.target.fd_spacing(p)
    }
}

pub fn pullback_solution(target: Arc<dyn Field>, map: HolomorphicMap) -> Pullback {
    Pullback { target, map }
}

/// Image of a boundary segment. A segment that starts or ends at the centre of a
/// power map `zeta^q` with `q > 1` becomes `C^{1,1/q}` there.
pub fn push_curve(curve: &CurveSegment, map: &HolomorphicMap) -> Result<CurveSegment> {
    let regularity = match map {
        HolomorphicMap::Power { exponent, frame, .. } => {
            let c = frame.origin;
            let at_start = curve.start().dist(c) < 1e-12;
            let at_end = curve.end().dist(c) < 1e-12;
            if at_start || at_end {
                let t = if at_start { curve.tangent(0.0) } else { -curve.tangent(1.0) };
                let dir = frame.vec_to_local(t).angle() * exponent;
                let chart = Frame::new(Point2::ORIGIN, dir);
                let q = *exponent;
                if q > 1.0 {
                    Regularity::C1Alpha { alpha: 1.0 / q, frame: chart }
                } else if q < 1.0 {
                    Regularity::C2Alpha { alpha: (1.0 / q - 1.0).min(1.0) }
                } else {
                    curve.regularity
                }
            } else {
                curve.regularity
            }
        }
        _ => curve.regularity,
    };
    let kind = CurveKind::Mapped { base: Box::new(curve.clone()), map: map.clone() };
    let mut seg = CurveSegment { kind, regularity, bound: 0.0 };
    seg.bound = seg.estimate_bound(4000);
    if !seg.bound.is_finite() {
        return Err(Error::Regularity("image curve has an unbounded regularity constant".into()));
    }
    Ok(seg)
}

/// Exact solution on the sector `{0 < theta < mu pi, r < radius}`: the
/// composition `(z / radius)^(1/mu)`, `(1 + w) / (1 - w)`, `w^2` sends it onto the
/// upper half-plane, where `-log y` is pulled back.
pub fn sector_exact_solution(mu: f64, radius: f64) -> Pullback {
    let to_half_disk = HolomorphicMap::Affine { a: Point2::new(1.0 / radius, 0.0), b: Point2::ORIGIN }.then(HolomorphicMap::Power {
        exponent: 1.0 / mu,
        frame: Frame::IDENTITY,
        branch: 0.5 * mu * PI,
        radius: None,
    });
    let cayley =
        HolomorphicMap::Inversion { pole: Point2::new(1.0, 0.0) }.then(HolomorphicMap::Affine { a: Point2::new(-2.0, 0.0), b: Point2::new(-1.0, 0.0) });
    let map = to_half_disk.then(cayley).then(HolomorphicMap::power(2.0));
    let uhp = ModelExpansion::HalfPlane { point: Point2::ORIGIN, normal: Point2::new(0.0, 1.0) };
    pullback_solution(Arc::new(uhp), map)
}
