//! Numerical laboratory for blow-up solutions of Liouville's equation
//! `Delta u = e^{2u}` on planar domains, with boundary behaviour near smooth
//! pieces, `C^{1,alpha}` pieces and corners.

// `!(x > 0.0)` is used on purpose so that NaN parameters are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
pub mod closedform;
pub mod conformal;
pub mod error;
pub mod field;
pub mod geometry;
pub mod jet;
pub mod kahler;
pub mod solver;

pub use closedform::ModelExpansion;
pub use error::{Error, Result};
pub use field::{Field, Jet};
pub use geometry::{CornerSpec, CurveSegment, DomainSpec, Point2};
