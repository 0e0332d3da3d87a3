use super::curve::{CurveSegment, Projection};
use super::point::{Frame, Point2};
use super::region::Region;
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

/// A tagged corner where segment `first` leaves the vertex and segment `second`
/// arrives at it. With the boundary oriented so that the domain lies on the left,
/// the interior opening from the ray along `first` counter-clockwise to the ray
/// along `second` is `mu * pi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CornerSpec {
    pub vertex: Point2,
    pub mu: f64,
    pub first: usize,
    pub second: usize,
}

/// Serialized form. Derived caches are rebuilt and validated on load.
#[derive(Debug, Clone, Serialize, Deserialize)]
struct DomainSpecRaw {
    name: String,
    segments: Vec<CurveSegment>,
    corners: Vec<CornerSpec>,
    #[serde(default)]
    region: Option<Region>,
    #[serde(default = "default_chart_fraction")]
    chart_fraction: f64,
    #[serde(default)]
    feature_scale: Option<f64>,
}

fn default_chart_fraction() -> f64 {
    0.2
}

/// A bounded, simply connected domain given by one counter-clockwise boundary loop.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(try_from = "DomainSpecRaw", into = "DomainSpecRaw")]
pub struct DomainSpec {
    name: String,
    segments: Vec<CurveSegment>,
    corners: Vec<CornerSpec>,
    region: Option<Region>,
    chart_fraction: f64,
    feature_scale: f64,
    lengths: Vec<f64>,
    polyline: Vec<Point2>,
    lo: Point2,
    hi: Point2,
}

impl TryFrom<DomainSpecRaw> for DomainSpec {
    type Error = Error;
    fn try_from(r: DomainSpecRaw) -> Result<Self> {
        let mut d = DomainSpec::new(r.name, r.segments, r.corners, r.region)?;
        d.chart_fraction = r.chart_fraction;
        if let Some(f) = r.feature_scale {
            d.feature_scale = f;
        }
        Ok(d)
    }
}

impl From<DomainSpec> for DomainSpecRaw {
    fn from(d: DomainSpec) -> Self {
        DomainSpecRaw {
            name: d.name,
            segments: d.segments,
            corners: d.corners,
            region: d.region,
            chart_fraction: d.chart_fraction,
            feature_scale: Some(d.feature_scale),
        }
    }
}

/// Points per segment in the cached polyline used for inside tests.
pub(crate) const POLY_PER_SEGMENT: usize = 2500;
/// Relative tolerance on loop closure and corner angles.
const JOINT_TOL: f64 = 1e-9;
const ANGLE_TOL: f64 = 1e-7;

/// Distances from the two arms of a corner.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CornerDistances {
    pub corner: usize,
    pub d1: f64,
    pub d2: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DistanceResult {
    pub d: f64,
    pub foot: Point2,
    pub segment: usize,
    pub t: f64,
    /// Filled for the corner whose vertex is nearest to the query point.
    pub corner: Option<CornerDistances>,
}

/// Region classes near a corner.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum RegionClass {
    /// `d1 > c0 |z|`.
    Omega1,
    /// `d1 = c0 |z|`.
    Gamma1,
    /// `c1 |z|^2 < d1 < c0 |z|`.
    Omega2,
    /// `d1 = c1 |z|^2`.
    Gamma2,
    /// `d1 < c1 |z|^2`.
    Omega3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RegionConfig {
    pub c0: f64,
    pub c1: f64,
}

impl RegionConfig {
    /// Upper limit on `c0` for a corner of opening `mu * pi`.
    pub fn c0_limit(mu: f64) -> f64 {
        0.5 * mu * 0.25f64.atan()
    }

    /// `c0` at 40% of its limit and `c1 = 10 / diameter`.
    pub fn default_for(domain: &DomainSpec, corner: usize) -> Result<Self> {
        let c = domain.corner(corner)?;
        Ok(RegionConfig { c0: 0.4 * Self::c0_limit(c.mu), c1: 10.0 / domain.diameter() })
    }
}

impl DomainSpec {
    /// Validates and builds a domain from one counter-clockwise boundary loop.
    pub fn new(name: impl Into<String>, segments: Vec<CurveSegment>, corners: Vec<CornerSpec>, region: Option<Region>) -> Result<Self> {
        if segments.is_empty() {
            return Err(Error::InvalidGeometry("boundary loop has no segments".into()));
        }
        let mut polyline = Vec::with_capacity(segments.len() * POLY_PER_SEGMENT + 1);
        for s in &segments {
            let pts = s.polyline(POLY_PER_SEGMENT);
            if pts.iter().any(|p| !p.is_finite()) {
                return Err(Error::InvalidGeometry("segment evaluates to non-finite points".into()));
            }
            polyline.extend_from_slice(&pts[..POLY_PER_SEGMENT]);
        }
        polyline.push(polyline[0]);
        let (mut lo, mut hi) = (polyline[0], polyline[0]);
        for p in &polyline {
            lo = Point2::new(lo.x.min(p.x), lo.y.min(p.y));
            hi = Point2::new(hi.x.max(p.x), hi.y.max(p.y));
        }
        let diam = (hi - lo).norm();
        let lengths: Vec<f64> = segments.iter().map(|s| s.length_estimate(4096)).collect();
        let d = DomainSpec {
            name: name.into(),
            segments,
            corners,
            region,
            chart_fraction: default_chart_fraction(),
            feature_scale: diam,
            lengths,
            polyline,
            lo,
            hi,
        };
        d.validate(diam)?;
        Ok(d)
    }

    fn validate(&self, diam: f64) -> Result<()> {
        let n = self.segments.len();
        for i in 0..n {
            let a = self.segments[i].end();
            let b = self.segments[(i + 1) % n].start();
            if a.dist(b) > JOINT_TOL * diam {
                return Err(Error::InvalidGeometry(format!("segment {i} does not meet segment {}: gap {}", (i + 1) % n, a.dist(b))));
            }
        }
        let area: f64 = self.polyline.windows(2).map(|w| w[0].cross(w[1])).sum::<f64>() * 0.5;
        if area <= 0.0 {
            return Err(Error::InvalidGeometry("boundary loop is not counter-clockwise".into()));
        }
        let mut tagged = vec![false; n];
        for (k, c) in self.corners.iter().enumerate() {
            if !(c.mu > 0.0 && c.mu < 2.0) {
                return Err(Error::InvalidGeometry(format!("corner {k}: mu = {} outside (0, 2)", c.mu)));
            }
            if c.first >= n || c.second != (c.first + n - 1) % n {
                return Err(Error::InvalidGeometry(format!("corner {k}: arms {} and {} are not consecutive", c.second, c.first)));
            }
            if self.segments[c.first].start().dist(c.vertex) > JOINT_TOL * diam {
                return Err(Error::InvalidGeometry(format!("corner {k}: vertex is not at the start of segment {}", c.first)));
            }
            let measured = self.joint_angle(c.first);
            if (measured - c.mu * PI).abs() > ANGLE_TOL {
                return Err(Error::InvalidGeometry(format!("corner {k}: opening {} does not match mu * pi = {}", measured, c.mu * PI)));
            }
            tagged[c.first] = true;
        }
        for (i, &t) in tagged.iter().enumerate() {
            if !t && (self.joint_angle(i) - PI).abs() > 1e-6 {
                return Err(Error::InvalidGeometry(format!("untagged corner at the start of segment {i}")));
            }
        }
        self.check_simple()
    }

    /// Interior opening angle in `(0, 2 pi)` at the start of segment `i`.
    pub fn joint_angle(&self, i: usize) -> f64 {
        let n = self.segments.len();
        let t_out = self.segments[i].tangent(0.0).normalized();
        let t_in = -self.segments[(i + n - 1) % n].tangent(1.0).normalized();
        let a = t_out.cross(t_in).atan2(t_out.dot(t_in));
        if a <= 0.0 {
            a + 2.0 * PI
        } else {
            a
        }
    }

    fn check_simple(&self) -> Result<()> {
        let m = 96;
        let mut pts = Vec::new();
        for s in &self.segments {
            let p = s.polyline(m);
            pts.extend_from_slice(&p[..m]);
        }
        let k = pts.len();
        let seg = |i: usize| (pts[i], pts[(i + 1) % k]);
        for i in 0..k {
            for j in (i + 2)..k {
                if i == 0 && j == k - 1 {
                    continue;
                }
                let (a, b) = seg(i);
                let (c, d) = seg(j);
                if segments_cross(a, b, c, d) {
                    return Err(Error::InvalidGeometry(format!("boundary self-intersects near ({}, {})", a.x, a.y)));
                }
            }
        }
        Ok(())
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn segments(&self) -> &[CurveSegment] {
        &self.segments
    }

    pub fn corners(&self) -> &[CornerSpec] {
        &self.corners
    }

    pub fn corner(&self, k: usize) -> Result<&CornerSpec> {
        self.corners.get(k).ok_or_else(|| Error::InvalidQuery(format!("no corner with index {k}")))
    }

    pub fn region(&self) -> Option<&Region> {
        self.region.as_ref()
    }

    pub fn bounding_box(&self) -> (Point2, Point2) {
        (self.lo, self.hi)
    }

    pub fn diameter(&self) -> f64 {
        (self.hi - self.lo).norm()
    }

    pub fn segment_length(&self, i: usize) -> f64 {
        self.lengths[i]
    }

    /// Length scale used to place sampling windows.
    pub fn feature_scale(&self) -> f64 {
        self.feature_scale
    }

    pub fn with_feature_scale(mut self, s: f64) -> Self {
        self.feature_scale = s;
        self
    }

    pub fn with_chart_fraction(mut self, f: f64) -> Self {
        self.chart_fraction = f;
        self
    }

    /// Radius of the corner chart: a fraction of the shorter adjacent segment.
    pub fn chart_radius(&self, corner: usize) -> Result<f64> {
        let c = self.corner(corner)?;
        Ok(self.chart_fraction * self.lengths[c.first].min(self.lengths[c.second]))
    }

    pub fn polyline(&self) -> &[Point2] {
        &self.polyline
    }

    /// Segment index and curve parameter of the `k`-th polyline vertex.
    pub(crate) fn polyline_param(&self, k: usize) -> (usize, f64) {
        let n = self.segments.len();
        if k >= n * POLY_PER_SEGMENT {
            return (n - 1, 1.0);
        }
        (k / POLY_PER_SEGMENT, (k % POLY_PER_SEGMENT) as f64 / POLY_PER_SEGMENT as f64)
    }

    /// Even-odd test against the cached boundary polyline.
    pub fn contains(&self, p: Point2) -> bool {
        if p.x < self.lo.x || p.x > self.hi.x || p.y < self.lo.y || p.y > self.hi.y {
            return false;
        }
        let mut inside = false;
        for w in self.polyline.windows(2) {
            let (a, b) = (w[0], w[1]);
            if (a.y > p.y) != (b.y > p.y) {
                let x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
                if x > p.x {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Nearest boundary point without an inside check. Ties go to the lowest segment id.
    pub fn nearest(&self, p: Point2) -> (usize, Projection) {
        let mut best = (0, self.segments[0].project(p));
        for (i, s) in self.segments.iter().enumerate().skip(1) {
            let pr = s.project(p);
            if pr.dist < best.1.dist {
                best = (i, pr);
            }
        }
        best
    }

    /// Local frame of a corner: vertex at the origin, first arm along the positive x-axis.
    pub fn corner_frame(&self, corner: usize) -> Result<Frame> {
        let c = self.corner(corner)?;
        let t = self.segments[c.first].tangent(0.0);
        Ok(Frame::new(c.vertex, t.angle()))
    }

    /// Polar coordinates in the corner frame, angle taken in the window of width
    /// `2 pi` centred on the bisector of the opening.
    pub fn corner_polar(&self, corner: usize, p: Point2) -> Result<(f64, f64)> {
        let c = self.corner(corner)?;
        let z = self.corner_frame(corner)?.to_local(p);
        let mid = 0.5 * c.mu * PI;
        let mut th = z.angle();
        while th > mid + PI {
            th -= 2.0 * PI;
        }
        while th <= mid - PI {
            th += 2.0 * PI;
        }
        Ok((z.norm(), th))
    }

    pub fn corner_distances(&self, corner: usize, p: Point2) -> Result<CornerDistances> {
        let c = self.corner(corner)?;
        Ok(CornerDistances { corner, d1: self.segments[c.first].project(p).dist, d2: self.segments[c.second].project(p).dist })
    }

    fn nearest_corner(&self, p: Point2) -> Option<usize> {
        (0..self.corners.len()).min_by(|&a, &b| self.corners[a].vertex.dist(p).total_cmp(&self.corners[b].vertex.dist(p)))
    }

    /// Projection of an interior point onto the boundary.
    pub fn distance_to_boundary(&self, p: Point2) -> Result<DistanceResult> {
        if !p.is_finite() || !self.contains(p) {
            return Err(Error::InvalidQuery(format!("({}, {}) is not inside {}", p.x, p.y, self.name)));
        }
        let (segment, pr) = self.nearest(p);
        let corner = match self.nearest_corner(p) {
            Some(k) => Some(self.corner_distances(k, p)?),
            None => None,
        };
        Ok(DistanceResult { d: pr.dist, foot: pr.foot, segment, t: pr.t, corner })
    }

    /// Region class of `p` with respect to `corner`, using `d1 = min(d1, d2)`.
    pub fn classify_region(&self, corner: usize, p: Point2, cfg: &RegionConfig) -> Result<RegionClass> {
        let c = *self.corner(corner)?;
        if !(cfg.c0 > 0.0 && cfg.c0 < RegionConfig::c0_limit(c.mu)) {
            return Err(Error::InvalidParameter(format!("c0 = {} must lie in (0, {}) for mu = {}", cfg.c0, RegionConfig::c0_limit(c.mu), c.mu)));
        }
        if !(cfg.c1 > 0.0) {
            return Err(Error::InvalidParameter("c1 must be positive".into()));
        }
        let r = p.dist(c.vertex);
        let chart = self.chart_radius(corner)?;
        if r >= chart {
            return Err(Error::InvalidQuery(format!("|z| = {r} is outside the chart radius {chart}")));
        }
        if !self.contains(p) {
            return Err(Error::InvalidQuery("point is not inside the domain".into()));
        }
        let cd = self.corner_distances(corner, p)?;
        let d1 = cd.d1.min(cd.d2);
        let tol = 1e-12 * r.max(f64::MIN_POSITIVE);
        let g1 = cfg.c0 * r;
        let g2 = cfg.c1 * r * r;
        Ok(if d1 > g1 + tol {
            RegionClass::Omega1
        } else if (d1 - g1).abs() <= tol {
            RegionClass::Gamma1
        } else if d1 > g2 + tol {
            RegionClass::Omega2
        } else if (d1 - g2).abs() <= tol {
            RegionClass::Gamma2
        } else {
            RegionClass::Omega3
        })
    }

    /// Defining function of the domain, if one was attached.
    pub fn defining(&self, p: Point2) -> Result<f64> {
        self.region.as_ref().map(|r| r.value(p)).ok_or_else(|| Error::InvalidQuery(format!("domain {} has no defining region", self.name)))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        Ok(serde_json::from_str(s)?)
    }
}

fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = (b - a).cross(c - a);
    let o2 = (b - a).cross(d - a);
    let o3 = (d - c).cross(a - c);
    let o4 = (d - c).cross(b - c);
    o1 * o2 < 0.0 && o3 * o4 < 0.0
}

/// Free-function form of [`DomainSpec::distance_to_boundary`].
pub fn distance_to_boundary(domain: &DomainSpec, p: Point2) -> Result<DistanceResult> {
    domain.distance_to_boundary(p)
}

/// Free-function form of [`DomainSpec::corner_frame`].
pub fn corner_frame(domain: &DomainSpec, corner: usize) -> Result<Frame> {
    domain.corner_frame(corner)
}

/// Free-function form of [`DomainSpec::classify_region`].
pub fn classify_region(domain: &DomainSpec, corner: usize, p: Point2, cfg: &RegionConfig) -> Result<RegionClass> {
    domain.classify_region(corner, p, cfg)
}
