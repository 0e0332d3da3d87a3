//! Smooth defining functions `rho` with `rho > 0` inside, `rho = 0` on the boundary
//! and, away from joints, `|grad rho| = 1` on the boundary.
//!
//! Primitives are combined with the sharp R-functions
//! `a and b = a + b - sqrt(a^2 + b^2)` and `a or b = a + b + sqrt(a^2 + b^2)`,
//! which keep the unit-gradient normalisation on the smooth parts of the boundary.

use super::curve::Profile;
use super::point::{Frame, Point2};
use crate::jet::Jet2;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Region {
    /// `{ (x - point) . normal > 0 }` with `normal` a unit vector.
    HalfPlane {
        point: Point2,
        normal: Point2,
    },
    Disk {
        center: Point2,
        radius: f64,
    },
    DiskExterior {
        center: Point2,
        radius: f64,
    },
    /// Points above (`above = true`) or below the graph `t = phi(s)` in `frame` coordinates.
    Graph {
        frame: Frame,
        profile: Profile,
        above: bool,
    },
    /// Star-shaped region `r < radius * (1 + amplitude * cos(lobes * (theta - phase)))`.
    Polar {
        center: Point2,
        radius: f64,
        amplitude: f64,
        lobes: u32,
        phase: f64,
    },
    And {
        a: Box<Region>,
        b: Box<Region>,
    },
    Or {
        a: Box<Region>,
        b: Box<Region>,
    },
}

impl Region {
    pub fn and(a: Region, b: Region) -> Region {
        Region::And { a: Box::new(a), b: Box::new(b) }
    }

    pub fn or(a: Region, b: Region) -> Region {
        Region::Or { a: Box::new(a), b: Box::new(b) }
    }

    pub fn value(&self, p: Point2) -> f64 {
        self.jet(p).v
    }

    pub fn contains(&self, p: Point2) -> bool {
        self.value(p) > 0.0
    }

    pub fn jet(&self, p: Point2) -> Jet2 {
        let (x, y) = Jet2::vars(p);
        self.jet_of(x, y)
    }

    fn jet_of(&self, x: Jet2, y: Jet2) -> Jet2 {
        match self {
            Region::HalfPlane { point, normal } => (x - point.x) * normal.x + (y - point.y) * normal.y,
            Region::Disk { center, radius } => {
                let dx = x - center.x;
                let dy = y - center.y;
                (Jet2::constant(radius * radius) - dx * dx - dy * dy) * (0.5 / radius)
            }
            Region::DiskExterior { center, radius } => {
                let dx = x - center.x;
                let dy = y - center.y;
                (dx * dx + dy * dy - radius * radius) * (0.5 / radius)
            }
            Region::Graph { frame, profile, above } => {
                let (c, s) = (frame.angle.cos(), frame.angle.sin());
                let dx = x - frame.origin.x;
                let dy = y - frame.origin.y;
                let ls = dx * c + dy * s;
                let lt = dy * c - dx * s;
                let [f0, f1, f2, f3] = profile.derivs(ls.v);
                let phi = ls.chain(f0, f1, f2);
                let dphi = ls.chain(f1, f2, f3);
                let q = (dphi * dphi + 1.0).sqrt();
                let r = (lt - phi) / q;
                if *above {
                    r
                } else {
                    -r
                }
            }
            Region::Polar { center, radius, amplitude, lobes, phase } => {
                let dx = x - center.x;
                let dy = y - center.y;
                let r = (dx * dx + dy * dy).sqrt();
                let th = Jet2::atan2(dy, dx);
                let n = *lobes as f64;
                let arg = (th - *phase) * n;
                let big_r = (arg.cos() * *amplitude + 1.0) * *radius;
                let big_r1 = arg.sin() * (-radius * amplitude * n);
                let ratio = big_r1 / big_r;
                (big_r - r) / (ratio * ratio + 1.0).sqrt()
            }
            Region::And { a, b } => {
                let (a, b) = (a.jet_of(x, y), b.jet_of(x, y));
                a + b - (a * a + b * b).sqrt()
            }
            Region::Or { a, b } => {
                let (a, b) = (a.jet_of(x, y), b.jet_of(x, y));
                a + b + (a * a + b * b).sqrt()
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn disk_defining_function_is_normalised() {
        let r = Region::Disk { center: Point2::new(0.5, -0.25), radius: 2.0 };
        let p = Point2::new(0.5 + 2.0 * 0.6, -0.25 + 2.0 * 0.8);
        let j = r.jet(p);
        assert!(j.v.abs() < 1e-14);
        assert!((j.grad().norm() - 1.0).abs() < 1e-14);
        assert!(r.contains(Point2::new(0.5, 0.0)));
    }

    #[test]
    fn graph_region_sign_and_gradient_on_curve() {
        let profile = Profile::Poly { coeffs: vec![0.0, 0.0, 0.5] };
        let frame = Frame::new(Point2::new(1.0, 2.0), 0.3);
        let r = Region::Graph { frame, profile, above: true };
        let on = frame.to_world(Point2::new(0.7, 0.5 * 0.49));
        let j = r.jet(on);
        assert!(j.v.abs() < 1e-14);
        assert!((j.grad().norm() - 1.0).abs() < 1e-12);
        assert!(r.contains(frame.to_world(Point2::new(0.0, 0.1))));
        assert!(!r.contains(frame.to_world(Point2::new(0.0, -0.1))));
    }

    #[test]
    fn polar_region_normalised_on_boundary() {
        let r = Region::Polar { center: Point2::ORIGIN, radius: 1.0, amplitude: 0.2, lobes: 3, phase: 0.0 };
        for k in 0..20 {
            let th = k as f64 * 0.31;
            let rr = 1.0 + 0.2 * (3.0 * th).cos();
            let j = r.jet(Point2::polar(rr, th));
            assert!(j.v.abs() < 1e-13);
            assert!((j.grad().norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn r_conjunction_of_half_planes() {
        let r = Region::and(
            Region::HalfPlane { point: Point2::ORIGIN, normal: Point2::new(0.0, 1.0) },
            Region::HalfPlane { point: Point2::ORIGIN, normal: Point2::new(1.0, 0.0) },
        );
        assert!(r.contains(Point2::new(0.1, 0.1)));
        assert!(!r.contains(Point2::new(-0.1, 0.1)));
        // Far from the corner along an edge the gradient is the edge normal.
        let j = r.jet(Point2::new(5.0, 1e-9));
        assert!((j.g[1] - 1.0).abs() < 1e-6 && j.g[0].abs() < 1e-6);
    }
}
