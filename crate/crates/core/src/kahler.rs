//! Product Kähler–Einstein potentials on products of planar domains.
//!
//! A factor potential solves `Delta u_i = 4 e^{(n+1) u_i}`, so that the complex
//! Hessian of `u = sum u_i` is diagonal with entries `Delta u_i / 4` and
//! `det u_{i jbar} = e^{(n+1) u}`. Factors are obtained from Liouville solutions
//! `Delta v = e^{2v}` by `u_i(z) = c v(lambda z)` with `c = 2/(n+1)` and
//! `lambda = sqrt(2(n+1))`.

use crate::closedform::{ball_solution, ModelExpansion};
use crate::error::{Error, Result};
use crate::field::{fd_laplacian, Field, Jet};
use crate::geometry::{DomainSpec, Point2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::sync::Arc;

/// Factor residual tolerance, relative to `max(1, 4 e^{(n+1)u})`.
pub const FACTOR_RESIDUAL_TOL: f64 = 1e-6;

/// `2/(n+1)`.
pub fn value_scale(n: usize) -> f64 {
    2.0 / (n as f64 + 1.0)
}

/// `sqrt(2(n+1))`: the factor domain `Omega_i` maps to `lambda Omega_i` for `v`.
pub fn length_scale(n: usize) -> f64 {
    (2.0 * (n as f64 + 1.0)).sqrt()
}

/// Where a factor potential came from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum Provenance {
    ClosedForm(String),
    Numerical(String),
}

/// `v_lambda(y) = v(y / lambda) - log lambda`; solves `Delta v = e^{2v}` on `lambda Omega`
/// whenever `v` does on `Omega`.
pub struct Rescaled {
    pub v: Arc<dyn Field>,
    pub lambda: f64,
}

impl Field for Rescaled {
    fn value(&self, y: Point2) -> Result<f64> {
        Ok(self.v.value(y * (1.0 / self.lambda))? - self.lambda.ln())
    }
    fn jet(&self, y: Point2) -> Result<Jet> {
        let j = self.v.jet(y * (1.0 / self.lambda))?;
        let s = 1.0 / self.lambda;
        Ok(Jet { value: j.value - self.lambda.ln(), grad: j.grad * s, laplacian: j.laplacian * s * s })
    }
    fn fd_spacing(&self, y: Point2) -> f64 {
        self.v.fd_spacing(y * (1.0 / self.lambda)) * self.lambda
    }
}

pub fn rescale_liouville(v: Arc<dyn Field>, lambda: f64) -> Rescaled {
    Rescaled { v, lambda }
}

/// Factor potential `u_i(z) = (2/(n+1)) v(sqrt(2(n+1)) z)`.
pub struct FactorSolution {
    pub index: usize,
    pub n: usize,
    pub v: Arc<dyn Field>,
    pub provenance: Provenance,
}

impl std::fmt::Debug for FactorSolution {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("FactorSolution").field("index", &self.index).field("n", &self.n).field("provenance", &self.provenance).finish()
    }
}

impl Field for FactorSolution {
    fn value(&self, z: Point2) -> Result<f64> {
        Ok(value_scale(self.n) * self.v.value(z * length_scale(self.n))?)
    }
    fn jet(&self, z: Point2) -> Result<Jet> {
        let (c, l) = (value_scale(self.n), length_scale(self.n));
        let j = self.v.jet(z * l)?;
        Ok(Jet { value: c * j.value, grad: j.grad * (c * l), laplacian: j.laplacian * (c * l * l) })
    }
    fn fd_spacing(&self, z: Point2) -> f64 {
        self.v.fd_spacing(z * length_scale(self.n)) / length_scale(self.n)
    }
}

impl FactorSolution {
    /// `Delta u_i - 4 e^{(n+1) u_i}` with a finite-difference Laplacian of spacing `h`.
    pub fn residual(&self, z: Point2, h: f64) -> Result<f64> {
        let lap = fd_laplacian(self, z, h)?;
        Ok(lap - 4.0 * ((self.n as f64 + 1.0) * self.value(z)?).exp())
    }

    /// Inverse transform `v(y) = ((n+1)/2) u_i(y / sqrt(2(n+1)))`.
    pub fn liouville_value(&self, y: Point2) -> Result<f64> {
        Ok(self.value(y * (1.0 / length_scale(self.n)))? / value_scale(self.n))
    }
}

/// Builds the factor potential from a Liouville solution `v` on the scaled domain
/// `sqrt(2(n+1)) Omega_i` and checks the factor equation at `probes` (points of `Omega_i`).
pub fn factor_from_liouville(v: Arc<dyn Field>, n: usize, index: usize, provenance: Provenance, probes: &[Point2]) -> Result<FactorSolution> {
    if n == 0 {
        return Err(Error::InvalidParameter("complex dimension must be at least 1".into()));
    }
    let f = FactorSolution { index, n, v, provenance };
    for &z in probes {
        let h = f.fd_spacing(z);
        let r = f.residual(z, h)?;
        let scale = (4.0 * ((n as f64 + 1.0) * f.value(z)?).exp()).max(1.0);
        if !(r.abs() <= FACTOR_RESIDUAL_TOL * scale) {
            return Err(Error::Regularity(format!("factor {index} residual {r:e} at ({}, {}) exceeds tolerance", z.x, z.y)));
        }
    }
    Ok(f)
}

/// Closed-form factor on a disk: `v` is the ball solution on the scaled disk.
pub fn disk_factor(radius: f64, center: Point2, n: usize, index: usize) -> Result<FactorSolution> {
    let l = length_scale(n);
    let (r, c) = (radius * l, center * l);
    let v: Arc<dyn Field> = Arc::new(ModelExpansion::Ball { radius: r, center: c });
    ball_solution(r, c, c)?;
    let probes = [center, center + Point2::new(0.5 * radius, 0.0), center + Point2::new(0.0, -0.3 * radius)];
    factor_from_liouville(v, n, index, Provenance::ClosedForm(format!("ball r={radius}")), &probes)
}

/// Factor built from a Liouville solution `u` on `Omega_i` itself (for example a grid
/// solution), rescaled onto `sqrt(2(n+1)) Omega_i` first.
pub fn factor_from_unscaled(u: Arc<dyn Field>, n: usize, index: usize, label: &str, probes: &[Point2]) -> Result<FactorSolution> {
    let v: Arc<dyn Field> = Arc::new(rescale_liouville(u, length_scale(n)));
    factor_from_liouville(v, n, index, Provenance::Numerical(label.to_string()), probes)
}

/// `(2/(n+1)) (f - log sqrt(2(n+1)))` for a Liouville model `f` on `Omega_i`: the
/// boundary model of the factor potential.
pub struct FactorModel {
    pub model: Arc<dyn Field>,
    pub n: usize,
}

impl Field for FactorModel {
    fn value(&self, z: Point2) -> Result<f64> {
        Ok(value_scale(self.n) * (self.model.value(z)? - length_scale(self.n).ln()))
    }
}

/// Product of `n` planar factors with their potentials.
pub struct ProductDomainSpec {
    pub n: usize,
    pub factors: Vec<Arc<DomainSpec>>,
    pub solutions: Vec<FactorSolution>,
}

impl ProductDomainSpec {
    pub fn new(factors: Vec<Arc<DomainSpec>>, solutions: Vec<FactorSolution>) -> Result<Self> {
        let n = factors.len();
        if n == 0 || solutions.len() != n {
            return Err(Error::InvalidParameter(format!("need one solution per factor, got {} factors and {} solutions", n, solutions.len())));
        }
        if let Some(s) = solutions.iter().find(|s| s.n != n) {
            return Err(Error::InvalidParameter(format!("factor {} was built for n = {}, product has n = {n}", s.index, s.n)));
        }
        Ok(ProductDomainSpec { n, factors, solutions })
    }

    /// The strictly pseudoconvex factor is not supported, so its term is absent.
    pub fn has_pseudoconvex_factor(&self) -> bool {
        false
    }
}

/// `u(z_1, ..., z_n) = sum u_i(z_i)`.
pub struct ProductSolution<'a> {
    spec: &'a ProductDomainSpec,
}

pub fn compose_product(spec: &ProductDomainSpec) -> ProductSolution<'_> {
    ProductSolution { spec }
}

impl ProductSolution<'_> {
    pub fn value(&self, z: &[Point2]) -> Result<f64> {
        check_slots(self.spec, z)?;
        let mut u = 0.0;
        for (i, (&zi, f)) in z.iter().zip(&self.spec.solutions).enumerate() {
            if !self.spec.factors[i].contains(zi) {
                return Err(Error::out_of_domain(zi, format!("outside factor {i}")));
            }
            u += f.value(zi)?;
        }
        Ok(u)
    }
}

fn check_slots(spec: &ProductDomainSpec, z: &[Point2]) -> Result<()> {
    if z.len() != spec.n {
        return Err(Error::InvalidQuery(format!("expected {} coordinates, got {}", spec.n, z.len())));
    }
    Ok(())
}

/// `prod (Delta u_i / 4) - e^{(n+1) u}` with per-factor finite-difference Laplacians.
pub fn monge_ampere_residual(spec: &ProductDomainSpec, z: &[Point2], h: f64) -> Result<f64> {
    let u = compose_product(spec).value(z)?;
    let mut det = 1.0;
    for (&zi, f) in z.iter().zip(&spec.solutions) {
        det *= fd_laplacian(f, zi, h)? / 4.0;
    }
    Ok(det - ((spec.n as f64 + 1.0) * u).exp())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundLevel {
    /// Samples have `min_i d_i` in `(d / 2, d]`.
    pub d: f64,
    pub samples: usize,
    pub sup: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub levels: Vec<BoundLevel>,
    pub sup: f64,
    /// Largest ratio of consecutive level sups.
    pub max_growth: f64,
    pub stable: bool,
    /// The `c_2` term of a pseudoconvex factor is structurally absent.
    pub pseudoconvex_term: Option<f64>,
}

/// Allowed sup growth per dyadic level.
pub const BOUND_GROWTH_TOL: f64 = 0.10;

fn sample_at_distance(domain: &DomainSpec, rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> Option<(Point2, f64)> {
    let (a, b) = domain.bounding_box();
    for _ in 0..200_000 {
        let p = Point2::new(rng.gen_range(a.x..b.x), rng.gen_range(a.y..b.y));
        if !domain.contains(p) {
            continue;
        }
        if let Ok(r) = domain.distance_to_boundary(p) {
            if r.d > lo && r.d <= hi {
                return Some((p, r.d));
            }
        }
    }
    None
}

/// Sup of `|u + (2/(n+1)) sum log d_i|` over dyadic bands of `min_i d_i` from `d_max`
/// down to `d_min`, with `samples` points split evenly over the bands.
pub fn product_bound_check(spec: &ProductDomainSpec, samples: usize, d_max: f64, d_min: f64, seed: u64) -> Result<BoundReport> {
    if !(d_min > 0.0 && d_max > d_min) {
        return Err(Error::InvalidParameter(format!("need 0 < d_min < d_max, got [{d_min}, {d_max}]")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let c1 = value_scale(spec.n);
    let u = compose_product(spec);
    let mut bands = Vec::new();
    let mut d = d_max;
    while d / 2.0 >= d_min * (1.0 - 1e-12) {
        bands.push(d);
        d /= 2.0;
    }
    if bands.is_empty() {
        return Err(Error::InvalidParameter("distance range shorter than one dyadic level".into()));
    }
    let per = (samples / bands.len()).max(1);
    let mut levels = Vec::new();
    for &top in &bands {
        let mut sup: f64 = 0.0;
        let mut count = 0;
        for s in 0..per {
            let j = s % spec.n;
            let mut z = Vec::with_capacity(spec.n);
            let mut logs = 0.0;
            for (i, dom) in spec.factors.iter().enumerate() {
                let (lo, hi) = if i == j { (top / 2.0, top) } else { (top / 2.0, f64::INFINITY) };
                let (p, di) = sample_at_distance(dom, &mut rng, lo, hi).ok_or(Error::InsufficientSamples { found: count, needed: per })?;
                z.push(p);
                logs += di.ln();
            }
            let v = u.value(&z)? + c1 * logs;
            sup = sup.max(v.abs());
            count += 1;
        }
        levels.push(BoundLevel { d: top, samples: count, sup });
    }
    let sup = levels.iter().map(|l| l.sup).fold(0.0, f64::max);
    let max_growth = levels.windows(2).map(|w| if w[0].sup > 0.0 { w[1].sup / w[0].sup } else { 1.0 }).fold(1.0, f64::max);
    Ok(BoundReport { stable: sup.is_finite() && max_growth <= 1.0 + BOUND_GROWTH_TOL, levels, sup, max_growth, pseudoconvex_term: None })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::disk;

    #[test]
    fn disk_factor_center_value() {
        let f = disk_factor(1.0, Point2::ORIGIN, 2, 0).unwrap();
        let expected = (2.0 / 3.0) * (2.0 / 6f64.sqrt()).ln();
        assert!((f.value(Point2::ORIGIN).unwrap() - expected).abs() < 1e-14);
    }

    #[test]
    fn two_disk_product() {
        let d = Arc::new(disk(1.0, Point2::ORIGIN).unwrap());
        let s = vec![disk_factor(1.0, Point2::ORIGIN, 2, 0).unwrap(), disk_factor(1.0, Point2::ORIGIN, 2, 1).unwrap()];
        let spec = ProductDomainSpec::new(vec![d.clone(), d], s).unwrap();
        let z = [Point2::new(0.3, -0.2), Point2::new(-0.5, 0.1)];
        assert!(monge_ampere_residual(&spec, &z, 1e-3).unwrap().abs() < 1e-7);
        let rep = product_bound_check(&spec, 200, 0.16, 0.01, 7).unwrap();
        assert!(rep.stable, "{rep:?}");
    }
}
