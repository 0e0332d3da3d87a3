//! Boundary curves, domains, distances and corner charts.

mod build;
mod curve;
pub(crate) mod domain;
mod point;
mod region;

pub use build::{
    build_domain, c1alpha_arm_corner, c1alpha_corner, curved_corner, disk, localized_pair, polygon, sector, smooth_blob, DomainKind, LocalizedPair,
};
pub use curve::{curvature_at, project_to_curve, CurveKind, CurveSegment, Profile, Projection, Regularity};
pub use domain::{classify_region, corner_frame, distance_to_boundary, CornerDistances, CornerSpec, DistanceResult, DomainSpec, RegionClass, RegionConfig};
pub use point::{Frame, Point2};
pub use region::Region;
