use super::point::{Frame, Point2};
use crate::conformal::{from_c, to_c, HolomorphicMap};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

/// Graph profile `s -> phi(s)` used by [`CurveKind::Graph`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Profile {
    /// `sum_k coeffs[k] * s^k`.
    Poly { coeffs: Vec<f64> },
    /// `coef * |s|^exponent`, with `exponent > 1`.
    Power { coef: f64, exponent: f64 },
}

/// Smallest `|s|` used when differentiating a power profile more than once.
/// Second and third derivatives blow up at the origin for exponents below 2.
const POWER_CLAMP: f64 = 1e-9;

impl Profile {
    /// `[phi, phi', phi'', phi''']` at `s`.
    pub fn derivs(&self, s: f64) -> [f64; 4] {
        match self {
            Profile::Poly { coeffs } => {
                let mut out = [0.0; 4];
                for (k, &c) in coeffs.iter().enumerate().rev() {
                    // Horner-free evaluation is fine for the short polynomials used here.
                    let k = k as i32;
                    out[0] += c * s.powi(k);
                    if k >= 1 {
                        out[1] += c * k as f64 * s.powi(k - 1);
                    }
                    if k >= 2 {
                        out[2] += c * (k * (k - 1)) as f64 * s.powi(k - 2);
                    }
                    if k >= 3 {
                        out[3] += c * (k * (k - 1) * (k - 2)) as f64 * s.powi(k - 3);
                    }
                }
                out
            }
            Profile::Power { coef, exponent: p } => {
                let a = s.abs();
                let sg = if s < 0.0 { -1.0 } else { 1.0 };
                let ac = a.max(POWER_CLAMP);
                [
                    coef * a.powf(*p),
                    coef * p * a.powf(p - 1.0) * sg,
                    coef * p * (p - 1.0) * ac.powf(p - 2.0),
                    coef * p * (p - 1.0) * (p - 2.0) * ac.powf(p - 3.0) * sg,
                ]
            }
        }
    }
}

/// Regularity class of a boundary segment.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "class", rename_all = "snake_case")]
pub enum Regularity {
    C2,
    C2Alpha {
        alpha: f64,
    },
    /// `C^{1,alpha}` near a distinguished point. `frame` is the graph chart: the
    /// distinguished point is its origin and the tangent there is its x-axis.
    C1Alpha {
        alpha: f64,
        frame: Frame,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum CurveKind {
    Line {
        a: Point2,
        b: Point2,
    },
    /// Circular arc, angle running linearly from `start` to `end`.
    Arc {
        center: Point2,
        radius: f64,
        start: f64,
        end: f64,
    },
    Ellipse {
        center: Point2,
        a: f64,
        b: f64,
        rotation: f64,
        start: f64,
        end: f64,
    },
    /// The graph `t -> frame((s, phi(s)))`, `s` running linearly from `s0` to `s1`.
    Graph {
        frame: Frame,
        profile: Profile,
        s0: f64,
        s1: f64,
    },
    /// Polar curve `r = radius * (1 + amplitude * cos(lobes * (theta - phase)))`.
    Polar {
        center: Point2,
        radius: f64,
        amplitude: f64,
        lobes: u32,
        phase: f64,
        start: f64,
        end: f64,
    },
    /// Image of another segment under a holomorphic map.
    Mapped {
        base: Box<CurveSegment>,
        map: HolomorphicMap,
    },
}

/// A parametrised boundary piece; the parameter always runs over `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveSegment {
    pub kind: CurveKind,
    pub regularity: Regularity,
    /// Curvature bound for `C2` pieces, `sup |phi'(x)| / |x|^alpha` for `C1Alpha` pieces.
    pub bound: f64,
}

/// Nearest point on a curve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Projection {
    pub t: f64,
    pub foot: Point2,
    pub dist: f64,
}

const PROJECTION_SAMPLES: usize = 160;

impl CurveSegment {
    pub fn new(kind: CurveKind, regularity: Regularity) -> Self {
        let mut seg = CurveSegment { kind, regularity, bound: 0.0 };
        seg.bound = seg.estimate_bound(2000);
        seg
    }

    pub fn line(a: Point2, b: Point2) -> Self {
        CurveSegment { kind: CurveKind::Line { a, b }, regularity: Regularity::C2, bound: 0.0 }
    }

    pub fn arc(center: Point2, radius: f64, start: f64, end: f64) -> Self {
        CurveSegment { kind: CurveKind::Arc { center, radius, start, end }, regularity: Regularity::C2, bound: 1.0 / radius }
    }

    pub fn point(&self, t: f64) -> Point2 {
        self.eval(t).0
    }

    /// Position, first and second derivative in the curve parameter.
    pub fn eval(&self, t: f64) -> (Point2, Point2, Point2) {
        match &self.kind {
            CurveKind::Line { a, b } => {
                let d = *b - *a;
                (*a + d * t, d, Point2::ORIGIN)
            }
            CurveKind::Arc { center, radius, start, end } => {
                let w = end - start;
                let th = start + w * t;
                let (s, c) = th.sin_cos();
                (*center + Point2::new(c, s) * *radius, Point2::new(-s, c) * (radius * w), Point2::new(-c, -s) * (radius * w * w))
            }
            CurveKind::Ellipse { center, a, b, rotation, start, end } => {
                let w = end - start;
                let th = start + w * t;
                let (s, c) = th.sin_cos();
                let p = Point2::new(a * c, b * s);
                let d1 = Point2::new(-a * s, b * c) * w;
                let d2 = Point2::new(-a * c, -b * s) * (w * w);
                (*center + p.rotate(*rotation), d1.rotate(*rotation), d2.rotate(*rotation))
            }
            CurveKind::Graph { frame, profile, s0, s1 } => {
                let w = s1 - s0;
                let s = s0 + w * t;
                let [f0, f1, f2, _] = profile.derivs(s);
                (frame.to_world(Point2::new(s, f0)), frame.vec_to_world(Point2::new(w, f1 * w)), frame.vec_to_world(Point2::new(0.0, f2 * w * w)))
            }
            CurveKind::Polar { center, radius, amplitude, lobes, phase, start, end } => {
                let w = end - start;
                let th = start + w * t;
                let n = *lobes as f64;
                let arg = n * (th - phase);
                let r = radius * (1.0 + amplitude * arg.cos());
                let r1 = -radius * amplitude * n * arg.sin();
                let r2 = -radius * amplitude * n * n * arg.cos();
                let (s, c) = th.sin_cos();
                let p = Point2::new(r * c, r * s);
                let d1 = Point2::new(r1 * c - r * s, r1 * s + r * c);
                let d2 = Point2::new(r2 * c - 2.0 * r1 * s - r * c, r2 * s + 2.0 * r1 * c - r * s);
                (*center + p, d1 * w, d2 * (w * w))
            }
            CurveKind::Mapped { base, map } => {
                let (p, d1, d2) = base.eval(t);
                let nan = Point2::new(f64::NAN, f64::NAN);
                match map.eval_derivs(p) {
                    Ok((w, f1, f2)) => {
                        let (c1, c2) = (to_c(d1), to_c(d2));
                        let g1 = f1 * c1;
                        let g2 = f2 * c1 * c1 + f1 * c2;
                        (w, from_c(g1), from_c(g2))
                    }
                    Err(_) => (nan, nan, nan),
                }
            }
        }
    }

    pub fn tangent(&self, t: f64) -> Point2 {
        self.eval(t).1
    }

    pub fn start(&self) -> Point2 {
        self.point(0.0)
    }

    pub fn end(&self) -> Point2 {
        self.point(1.0)
    }

    /// Signed curvature `cross(g', g'') / |g'|^3`: positive when the curve turns toward
    /// its left side, which is the domain side for correctly oriented boundaries.
    pub fn curvature(&self, t: f64) -> f64 {
        let (_, d1, d2) = self.eval(t);
        d1.cross(d2) / d1.norm().powi(3)
    }

    /// Polyline with `n + 1` vertices at uniform parameter values.
    pub fn polyline(&self, n: usize) -> Vec<Point2> {
        (0..=n).map(|k| self.point(k as f64 / n as f64)).collect()
    }

    pub fn length_estimate(&self, n: usize) -> f64 {
        self.polyline(n).windows(2).map(|w| w[0].dist(w[1])).sum()
    }

    /// Bound consistent with the regularity tag, estimated from `n` samples.
    pub fn estimate_bound(&self, n: usize) -> f64 {
        match self.regularity {
            Regularity::C2 | Regularity::C2Alpha { .. } => {
                (0..=n).map(|k| self.curvature(k as f64 / n as f64).abs()).filter(|k| k.is_finite()).fold(0.0, f64::max)
            }
            Regularity::C1Alpha { alpha, frame } => {
                let mut m: f64 = 0.0;
                for k in 0..=n {
                    let (p, d1, _) = self.eval(k as f64 / n as f64);
                    let q = frame.to_local(p);
                    let v = frame.vec_to_local(d1);
                    if q.x.abs() < 1e-12 || v.x.abs() < 1e-300 {
                        continue;
                    }
                    let slope = v.y / v.x;
                    let r = slope.abs() / q.x.abs().powf(alpha);
                    if r.is_finite() {
                        m = m.max(r);
                    }
                }
                m
            }
        }
    }

    /// Closest point of the segment to `p`.
    ///
    /// Dense sampling locates candidate minima, each of which is then polished by a
    /// safeguarded Newton iteration on `(g(t) - p) . g'(t) = 0`.
    pub fn project(&self, p: Point2) -> Projection {
        let n = PROJECTION_SAMPLES;
        let samples: Vec<f64> = (0..=n).map(|k| self.point(k as f64 / n as f64).dist(p)).collect();
        let mut cands: Vec<usize> = (0..=n)
            .filter(|&k| {
                let left = if k == 0 { f64::INFINITY } else { samples[k - 1] };
                let right = if k == n { f64::INFINITY } else { samples[k + 1] };
                samples[k] <= left && samples[k] <= right
            })
            .collect();
        cands.sort_by(|&a, &b| samples[a].total_cmp(&samples[b]));
        cands.truncate(4);
        let mut best = Projection { t: 0.0, foot: self.start(), dist: samples[0] };
        let end = Projection { t: 1.0, foot: self.end(), dist: samples[n] };
        if end.dist < best.dist {
            best = end;
        }
        for k in cands {
            let a = k.saturating_sub(1) as f64 / n as f64;
            let b = (k + 1).min(n) as f64 / n as f64;
            let t = self.polish(p, a, b, k as f64 / n as f64);
            let foot = self.point(t);
            let dist = foot.dist(p);
            if dist < best.dist {
                best = Projection { t, foot, dist };
            }
        }
        best
    }

    fn polish(&self, p: Point2, mut a: f64, mut b: f64, t0: f64) -> f64 {
        let g = |t: f64| {
            let (q, d1, d2) = self.eval(t);
            let r = q - p;
            (r.dot(d1), d1.norm2() + r.dot(d2))
        };
        let (ga, _) = g(a);
        let (gb, _) = g(b);
        if !(ga < 0.0 && gb > 0.0) {
            // No interior stationary point bracketed: the sampled minimum is at an end.
            let da = self.point(a).dist(p);
            let db = self.point(b).dist(p);
            let dt = self.point(t0).dist(p);
            return if da <= db && da <= dt {
                a
            } else if db <= dt {
                b
            } else {
                t0
            };
        }
        let mut t = t0.clamp(a, b);
        for _ in 0..100 {
            let (gt, dg) = g(t);
            if gt == 0.0 {
                return t;
            }
            if gt < 0.0 {
                a = t;
            } else {
                b = t;
            }
            let newton = t - gt / dg;
            let next = if dg > 0.0 && newton.is_finite() && newton > a && newton < b { newton } else { 0.5 * (a + b) };
            if (next - t).abs() <= 1e-16 * (1.0 + t.abs()) || (b - a) < 1e-16 {
                return next;
            }
            t = next;
        }
        t
    }

    /// Parameters where the curve crosses the level `coord(g(t)) = c`, found by
    /// refining sign changes of a polyline with `n` pieces.
    pub(crate) fn refine_level(&self, axis: usize, c: f64, ta: f64, tb: f64) -> f64 {
        let f = |t: f64| {
            let q = self.point(t);
            (if axis == 0 { q.x } else { q.y }) - c
        };
        let (mut a, mut b) = (ta, tb);
        let mut fa = f(a);
        if fa == 0.0 {
            return a;
        }
        let fb = f(b);
        if fb == 0.0 {
            return b;
        }
        for _ in 0..200 {
            let m = 0.5 * (a + b);
            if m <= a || m >= b {
                break;
            }
            let fm = f(m);
            if fm == 0.0 {
                return m;
            }
            if (fm < 0.0) == (fa < 0.0) {
                a = m;
                fa = fm;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    }

    pub fn is_c1alpha(&self) -> bool {
        matches!(self.regularity, Regularity::C1Alpha { .. })
    }
}

/// Signed curvature at parameter `t`, refused on pieces tagged only `C^{1,alpha}`.
pub fn curvature_at(curve: &CurveSegment, t: f64) -> Result<f64> {
    if curve.is_c1alpha() {
        return Err(Error::Regularity("curvature is not defined on a C^{1,alpha} segment".into()));
    }
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidParameter(format!("curve parameter {t} outside [0, 1]")));
    }
    Ok(curve.curvature(t))
}

/// Nearest point of a single segment to `p`.
pub fn project_to_curve(curve: &CurveSegment, p: Point2) -> Result<Projection> {
    if !p.is_finite() {
        return Err(Error::InvalidQuery("non-finite query point".into()));
    }
    Ok(curve.project(p))
}
