//! Second-order forward-mode differentiation in two variables.

use crate::geometry::Point2;
use std::ops::{Add, Div, Mul, Neg, Sub};

/// Value, gradient and Hessian `[xx, xy, yy]` of a scalar function of `(x, y)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet2 {
    pub v: f64,
    pub g: [f64; 2],
    pub h: [f64; 3],
}

impl Jet2 {
    pub fn constant(c: f64) -> Self {
        Jet2 { v: c, g: [0.0; 2], h: [0.0; 3] }
    }

    pub fn var_x(x: f64) -> Self {
        Jet2 { v: x, g: [1.0, 0.0], h: [0.0; 3] }
    }

    pub fn var_y(y: f64) -> Self {
        Jet2 { v: y, g: [0.0, 1.0], h: [0.0; 3] }
    }

    /// The coordinate pair `(x, y)` at `p`.
    pub fn vars(p: Point2) -> (Jet2, Jet2) {
        (Jet2::var_x(p.x), Jet2::var_y(p.y))
    }

    pub fn laplacian(&self) -> f64 {
        self.h[0] + self.h[2]
    }

    pub fn grad(&self) -> Point2 {
        Point2::new(self.g[0], self.g[1])
    }

    /// Chain rule for a scalar function with value `f0`, derivative `f1` and
    /// second derivative `f2` at `self.v`.
    pub fn chain(self, f0: f64, f1: f64, f2: f64) -> Jet2 {
        let [gx, gy] = self.g;
        Jet2 { v: f0, g: [f1 * gx, f1 * gy], h: [f1 * self.h[0] + f2 * gx * gx, f1 * self.h[1] + f2 * gx * gy, f1 * self.h[2] + f2 * gy * gy] }
    }

    pub fn ln(self) -> Jet2 {
        let x = self.v;
        self.chain(x.ln(), 1.0 / x, -1.0 / (x * x))
    }

    pub fn exp(self) -> Jet2 {
        let e = self.v.exp();
        self.chain(e, e, e)
    }

    pub fn sqrt(self) -> Jet2 {
        let s = self.v.sqrt();
        self.chain(s, 0.5 / s, -0.25 / (s * self.v))
    }

    pub fn sin(self) -> Jet2 {
        let (s, c) = self.v.sin_cos();
        self.chain(s, c, -s)
    }

    pub fn cos(self) -> Jet2 {
        let (s, c) = self.v.sin_cos();
        self.chain(c, -s, -c)
    }

    pub fn atan2(y: Jet2, x: Jet2) -> Jet2 {
        // d atan2 = (x dy - y dx) / r^2, built from the quotient rules below.
        let r2 = x * x + y * y;
        let num_v = y.v.atan2(x.v);
        let gx = (x.v * y.g[0] - y.v * x.g[0]) / r2.v;
        let gy = (x.v * y.g[1] - y.v * x.g[1]) / r2.v;
        // Second derivatives through the jet algebra of (x dy - y dx)/r2 per direction.
        let ax = (x * Jet2::dir(y, 0) - y * Jet2::dir(x, 0)) / r2;
        let ay = (x * Jet2::dir(y, 1) - y * Jet2::dir(x, 1)) / r2;
        Jet2 { v: num_v, g: [gx, gy], h: [ax.g[0], ax.g[1], ay.g[1]] }
    }

    /// First-order jet of the partial derivative in direction `k` (Hessian dropped).
    fn dir(a: Jet2, k: usize) -> Jet2 {
        let hk = if k == 0 { [a.h[0], a.h[1]] } else { [a.h[1], a.h[2]] };
        Jet2 { v: a.g[k], g: hk, h: [0.0; 3] }
    }

    pub fn powf(self, p: f64) -> Jet2 {
        let x = self.v;
        self.chain(x.powf(p), p * x.powf(p - 1.0), p * (p - 1.0) * x.powf(p - 2.0))
    }

    pub fn abs(self) -> Jet2 {
        if self.v < 0.0 {
            -self
        } else {
            self
        }
    }

    pub fn scale(self, s: f64) -> Jet2 {
        Jet2 { v: self.v * s, g: [self.g[0] * s, self.g[1] * s], h: [self.h[0] * s, self.h[1] * s, self.h[2] * s] }
    }
}

impl Add for Jet2 {
    type Output = Jet2;
    fn add(self, o: Jet2) -> Jet2 {
        Jet2 { v: self.v + o.v, g: [self.g[0] + o.g[0], self.g[1] + o.g[1]], h: [self.h[0] + o.h[0], self.h[1] + o.h[1], self.h[2] + o.h[2]] }
    }
}

impl Sub for Jet2 {
    type Output = Jet2;
    fn sub(self, o: Jet2) -> Jet2 {
        self + (-o)
    }
}

impl Neg for Jet2 {
    type Output = Jet2;
    fn neg(self) -> Jet2 {
        self.scale(-1.0)
    }
}

impl Mul for Jet2 {
    type Output = Jet2;
    fn mul(self, o: Jet2) -> Jet2 {
        let (a, b) = (self, o);
        Jet2 {
            v: a.v * b.v,
            g: [a.g[0] * b.v + a.v * b.g[0], a.g[1] * b.v + a.v * b.g[1]],
            h: [
                a.h[0] * b.v + 2.0 * a.g[0] * b.g[0] + a.v * b.h[0],
                a.h[1] * b.v + a.g[0] * b.g[1] + a.g[1] * b.g[0] + a.v * b.h[1],
                a.h[2] * b.v + 2.0 * a.g[1] * b.g[1] + a.v * b.h[2],
            ],
        }
    }
}

impl Div for Jet2 {
    type Output = Jet2;
    fn div(self, o: Jet2) -> Jet2 {
        let x = o.v;
        self * o.chain(1.0 / x, -1.0 / (x * x), 2.0 / (x * x * x))
    }
}

impl Add<f64> for Jet2 {
    type Output = Jet2;
    fn add(self, c: f64) -> Jet2 {
        Jet2 { v: self.v + c, ..self }
    }
}

impl Sub<f64> for Jet2 {
    type Output = Jet2;
    fn sub(self, c: f64) -> Jet2 {
        Jet2 { v: self.v - c, ..self }
    }
}

impl Mul<f64> for Jet2 {
    type Output = Jet2;
    fn mul(self, c: f64) -> Jet2 {
        self.scale(c)
    }
}

impl Mul<Jet2> for f64 {
    type Output = Jet2;
    fn mul(self, j: Jet2) -> Jet2 {
        j.scale(self)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fd_check(f: impl Fn(Jet2, Jet2) -> Jet2, p: Point2) {
        let (x, y) = Jet2::vars(p);
        let j = f(x, y);
        let val = |q: Point2| f(Jet2::constant(q.x), Jet2::constant(q.y)).v;
        let e = 1e-4;
        let ex = Point2::new(e, 0.0);
        let ey = Point2::new(0.0, e);
        let gx = (val(p + ex) - val(p - ex)) / (2.0 * e);
        let gy = (val(p + ey) - val(p - ey)) / (2.0 * e);
        let hxx = (val(p + ex) - 2.0 * val(p) + val(p - ex)) / (e * e);
        let hyy = (val(p + ey) - 2.0 * val(p) + val(p - ey)) / (e * e);
        let hxy = (val(p + ex + ey) - val(p + ex - ey) - val(p - ex + ey) + val(p - ex - ey)) / (4.0 * e * e);
        assert!((j.g[0] - gx).abs() < 1e-6, "gx {} vs {}", j.g[0], gx);
        assert!((j.g[1] - gy).abs() < 1e-6, "gy {} vs {}", j.g[1], gy);
        assert!((j.h[0] - hxx).abs() < 1e-4, "hxx {} vs {}", j.h[0], hxx);
        assert!((j.h[1] - hxy).abs() < 1e-4, "hxy {} vs {}", j.h[1], hxy);
        assert!((j.h[2] - hyy).abs() < 1e-4, "hyy {} vs {}", j.h[2], hyy);
    }

    #[test]
    fn jet_rules_match_finite_differences() {
        let p = Point2::new(0.7, 0.4);
        fd_check(|x, y| (x * x + y * y * 3.0).ln(), p);
        fd_check(|x, y| (x * y).exp() / (x + 2.0), p);
        fd_check(|x, y| (x * x + y * y).sqrt() - x.sin() * y.cos(), p);
        fd_check(|x, y| Jet2::atan2(y, x), p);
        fd_check(|x, y| (x + y * y).powf(1.5), p);
    }
}
