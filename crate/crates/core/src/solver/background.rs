//! Smooth backgrounds `b` for the splitting `u = b + w`.

use crate::closedform::ModelExpansion;
use crate::error::{Error, Result};
use crate::field::{Field, Jet};
use crate::geometry::{DomainSpec, Point2};
use std::sync::Arc;

/// `b = 0`: the solver then works with `u` directly.
pub struct ZeroBackground;

impl Field for ZeroBackground {
    fn value(&self, _p: Point2) -> Result<f64> {
        Ok(0.0)
    }
    fn jet(&self, _p: Point2) -> Result<Jet> {
        Ok(Jet { value: 0.0, grad: Point2::ORIGIN, laplacian: 0.0 })
    }
}

/// `b_k = -log(e^{-m} + e^{-k})`: follows the reference `m` in the interior and
/// levels off at `k` on the boundary, where `m` blows up.
pub struct SoftMin {
    pub reference: Arc<dyn Field>,
    pub k: f64,
}

impl Field for SoftMin {
    fn value(&self, p: Point2) -> Result<f64> {
        Ok(self.jet(p)?.value)
    }

    fn jet(&self, p: Point2) -> Result<Jet> {
        let m = self.reference.jet(p)?;
        // sigma = e^{-m} / (e^{-m} + e^{-k}).
        let sigma = 1.0 / (1.0 + (m.value - self.k).exp());
        let value = m.value.min(self.k) - (-(m.value - self.k).abs()).exp().ln_1p();
        Ok(Jet { value, grad: m.grad * sigma, laplacian: sigma * m.laplacian - sigma * (1.0 - sigma) * m.grad.norm2() })
    }
}

/// Septic smoothstep: 1 below `a`, 0 above `b`, three continuous derivatives.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cutoff {
    pub a: f64,
    pub b: f64,
}

impl Cutoff {
    /// Value, first and second derivative.
    fn eval(&self, s: f64) -> (f64, f64, f64) {
        if s <= self.a {
            return (1.0, 0.0, 0.0);
        }
        if s >= self.b {
            return (0.0, 0.0, 0.0);
        }
        let w = self.b - self.a;
        let t = (s - self.a) / w;
        let u = 1.0 - t;
        let st = t.powi(4) * (35.0 - 84.0 * t + 70.0 * t * t - 20.0 * t.powi(3));
        let d1 = 140.0 * t.powi(3) * u.powi(3);
        let d2 = 420.0 * t * t * u * u * (1.0 - 2.0 * t);
        (1.0 - st, -d1 / w, -d2 / (w * w))
    }
}

/// What the cutoff is a function of.
#[derive(Clone)]
pub enum BlendCoordinate {
    /// Distance to a smooth boundary.
    Distance,
    /// Distance to a fixed point (a corner vertex).
    Radius(Point2),
}

/// `psi m + (1 - psi) f`: a boundary model `m` near the boundary (or a corner)
/// merged into a globally defined fallback `f`.
pub struct Blend {
    pub model: ModelExpansion,
    pub fallback: ModelExpansion,
    pub domain: Arc<DomainSpec>,
    pub coordinate: BlendCoordinate,
    pub cutoff: Cutoff,
}

impl Blend {
    /// Value, gradient and Laplacian of the blending coordinate.
    fn coordinate_jet(&self, p: Point2) -> Result<Jet> {
        match self.coordinate {
            BlendCoordinate::Distance => {
                let (seg, pr) = self.domain.nearest(p);
                let k = self.domain.segments()[seg].curvature(pr.t);
                let n = (p - pr.foot) * (1.0 / pr.dist);
                Ok(Jet { value: pr.dist, grad: n, laplacian: -k / (1.0 - k * pr.dist) })
            }
            BlendCoordinate::Radius(c) => {
                let r = p.dist(c);
                if r == 0.0 {
                    return Err(Error::out_of_domain(p, "blend centre"));
                }
                Ok(Jet { value: r, grad: (p - c) * (1.0 / r), laplacian: 1.0 / r })
            }
        }
    }
}

impl Field for Blend {
    fn value(&self, p: Point2) -> Result<f64> {
        let s = match self.coordinate {
            BlendCoordinate::Distance => self.domain.nearest(p).1.dist,
            BlendCoordinate::Radius(c) => p.dist(c),
        };
        let (psi, _, _) = self.cutoff.eval(s);
        if psi == 1.0 {
            return self.model.value(p);
        }
        let f = self.fallback.value(p)?;
        if psi == 0.0 {
            return Ok(f);
        }
        Ok(psi * self.model.value(p)? + (1.0 - psi) * f)
    }

    fn jet(&self, p: Point2) -> Result<Jet> {
        let s = self.coordinate_jet(p)?;
        let (psi, d1, d2) = self.cutoff.eval(s.value);
        if psi == 1.0 {
            return self.model.jet(p);
        }
        let f = self.fallback.jet(p)?;
        if psi == 0.0 {
            return Ok(f);
        }
        let m = self.model.jet(p)?;
        let gpsi = s.grad * d1;
        let lpsi = d2 * s.grad.norm2() + d1 * s.laplacian;
        let diff = m.value - f.value;
        let gdiff = m.grad - f.grad;
        Ok(Jet {
            value: psi * m.value + (1.0 - psi) * f.value,
            grad: m.grad * psi + f.grad * (1.0 - psi) + gpsi * diff,
            laplacian: psi * m.laplacian + (1.0 - psi) * f.laplacian + 2.0 * gpsi.dot(gdiff) + diff * lpsi,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::fd_jet;
    use crate::geometry::disk;

    #[test]
    fn cutoff_derivatives() {
        let c = Cutoff { a: 0.3, b: 0.7 };
        let e = 1e-5;
        for s in [0.35, 0.5, 0.61] {
            let (f, d1, d2) = c.eval(s);
            let (fp, _, _) = c.eval(s + e);
            let (fm, _, _) = c.eval(s - e);
            assert!(((fp - fm) / (2.0 * e) - d1).abs() < 1e-5);
            assert!(((fp - 2.0 * f + fm) / (e * e) - d2).abs() < 1e-3 * (1.0 + d2.abs()));
        }
    }

    #[test]
    fn blend_jet_matches_finite_differences() {
        let dom = Arc::new(disk(1.0, Point2::ORIGIN).unwrap());
        let b = Blend {
            model: ModelExpansion::SmoothModel { domain: dom.clone() },
            fallback: ModelExpansion::Defining { domain: dom.clone() },
            domain: dom,
            coordinate: BlendCoordinate::Distance,
            cutoff: Cutoff { a: 0.3, b: 0.6 },
        };
        let p = Point2::new(0.3, 0.25);
        let j = b.jet(p).unwrap();
        let f = fd_jet(&crate::field::FnField(|q| b.value(q)), p, 1e-3).unwrap();
        assert!((j.laplacian - f.laplacian).abs() < 1e-6, "{} {}", j.laplacian, f.laplacian);
        assert!((j.grad - f.grad).norm() < 1e-8);
    }

    #[test]
    fn softmin_limits() {
        let dom = Arc::new(disk(1.0, Point2::ORIGIN).unwrap());
        let s = SoftMin { reference: Arc::new(ModelExpansion::Defining { domain: dom }), k: 30.0 };
        let p = Point2::new(0.2, 0.1);
        let want = -((1.0 - 0.05) / 2.0f64).ln();
        assert!((s.value(p).unwrap() - want).abs() < 1e-12);
    }
}
