//! Scalar fields on the plane and finite-difference helpers.

use crate::error::{Error, Result};
use crate::geometry::Point2;
use crate::jet::Jet2;
use std::sync::Arc;

/// Value, gradient and Laplacian of a scalar field at a point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Jet {
    pub value: f64,
    pub grad: Point2,
    pub laplacian: f64,
}

impl From<Jet2> for Jet {
    fn from(j: Jet2) -> Self {
        Jet { value: j.v, grad: j.grad(), laplacian: j.laplacian() }
    }
}

/// A scalar function that may be undefined at some points.
pub trait Field: Send + Sync {
    fn value(&self, p: Point2) -> Result<f64>;

    /// Defaults to fourth-order central differences with spacing [`Field::fd_spacing`].
    fn jet(&self, p: Point2) -> Result<Jet> {
        fd_jet(self, p, self.fd_spacing(p))
    }

    /// Spacing used by the default [`Field::jet`].
    fn fd_spacing(&self, _p: Point2) -> f64 {
        1e-3
    }
}

impl<T: Field + ?Sized> Field for Arc<T> {
    fn value(&self, p: Point2) -> Result<f64> {
        (**self).value(p)
    }
    fn jet(&self, p: Point2) -> Result<Jet> {
        (**self).jet(p)
    }
    fn fd_spacing(&self, p: Point2) -> f64 {
        (**self).fd_spacing(p)
    }
}

impl<T: Field + ?Sized> Field for &T {
    fn value(&self, p: Point2) -> Result<f64> {
        (**self).value(p)
    }
    fn jet(&self, p: Point2) -> Result<Jet> {
        (**self).jet(p)
    }
    fn fd_spacing(&self, p: Point2) -> f64 {
        (**self).fd_spacing(p)
    }
}

/// Wraps a closure as a [`Field`].
pub struct FnField<F>(pub F);

impl<F: Fn(Point2) -> Result<f64> + Send + Sync> Field for FnField<F> {
    fn value(&self, p: Point2) -> Result<f64> {
        (self.0)(p)
    }
}

fn stencil_value<F: Field + ?Sized>(f: &F, q: Point2, center: Point2, h: f64) -> Result<f64> {
    match f.value(q) {
        Ok(v) if v.is_finite() => Ok(v),
        _ => Err(Error::StencilInvalid { x: center.x, y: center.y, h }),
    }
}

/// Fourth-order central-difference Laplacian on the 9-point cross of spacing `h`.
pub fn fd_laplacian<F: Field + ?Sized>(f: &F, p: Point2, h: f64) -> Result<f64> {
    Ok(fd_jet(f, p, h)?.laplacian)
}

/// Fourth-order central differences for the gradient and Laplacian.
pub fn fd_jet<F: Field + ?Sized>(f: &F, p: Point2, h: f64) -> Result<Jet> {
    if !(h > 0.0) {
        return Err(Error::InvalidParameter(format!("finite-difference spacing must be positive, got {h}")));
    }
    let f0 = stencil_value(f, p, p, h)?;
    let mut lap = 0.0;
    let mut grad = [0.0; 2];
    for (k, e) in [Point2::new(h, 0.0), Point2::new(0.0, h)].into_iter().enumerate() {
        let fp1 = stencil_value(f, p + e, p, h)?;
        let fm1 = stencil_value(f, p - e, p, h)?;
        let fp2 = stencil_value(f, p + e * 2.0, p, h)?;
        let fm2 = stencil_value(f, p - e * 2.0, p, h)?;
        lap += (-fp2 + 16.0 * fp1 - 30.0 * f0 + 16.0 * fm1 - fm2) / (12.0 * h * h);
        grad[k] = (fm2 - 8.0 * fm1 + 8.0 * fp1 - fp2) / (12.0 * h);
    }
    Ok(Jet { value: f0, grad: Point2::new(grad[0], grad[1]), laplacian: lap })
}
