use liouville_core::closedform::ModelExpansion;
use liouville_core::field::{Field, FnField};
use liouville_core::geometry::disk;
use liouville_core::kahler::*;
use liouville_core::{Error, Point2};
use std::sync::Arc;

fn two_disks() -> ProductDomainSpec {
    let d = Arc::new(disk(1.0, Point2::ORIGIN).unwrap());
    let s = vec![disk_factor(1.0, Point2::ORIGIN, 2, 0).unwrap(), disk_factor(1.0, Point2::ORIGIN, 2, 1).unwrap()];
    ProductDomainSpec::new(vec![d.clone(), d], s).unwrap()
}

#[test]
fn single_factor_reduces_to_scaled_liouville() {
    let d = Arc::new(disk(1.0, Point2::ORIGIN).unwrap());
    let f = disk_factor(1.0, Point2::ORIGIN, 1, 0).unwrap();
    for z in [Point2::new(0.2, 0.1), Point2::new(-0.6, 0.3)] {
        assert!(f.residual(z, 1e-3).unwrap().abs() < 1e-8);
    }
    let spec = ProductDomainSpec::new(vec![d], vec![f]).unwrap();
    let z = [Point2::new(0.4, -0.4)];
    assert!(monge_ampere_residual(&spec, &z, 1e-3).unwrap().abs() < 1e-8);
    assert_eq!(compose_product(&spec).value(&z).unwrap(), spec.solutions[0].value(z[0]).unwrap());
}

#[test]
fn scaling_round_trip() {
    let v: Arc<dyn Field> = Arc::new(ModelExpansion::Ball { radius: 6f64.sqrt(), center: Point2::ORIGIN });
    let f = factor_from_liouville(v.clone(), 2, 0, Provenance::ClosedForm("ball".into()), &[Point2::ORIGIN]).unwrap();
    for y in [Point2::new(0.3, 0.2), Point2::new(-1.5, 0.7)] {
        assert!((f.liouville_value(y).unwrap() - v.value(y).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn constant_shift_scales_by_two_over_n_plus_one() {
    let base = ModelExpansion::Ball { radius: 6f64.sqrt(), center: Point2::ORIGIN };
    let shifted = {
        let b = base.clone();
        FnField(move |y: Point2| Ok(b.value(y)? + 0.3))
    };
    let a = FactorSolution { index: 0, n: 2, v: Arc::new(base), provenance: Provenance::ClosedForm("a".into()) };
    let b = FactorSolution { index: 0, n: 2, v: Arc::new(shifted), provenance: Provenance::ClosedForm("b".into()) };
    let z = Point2::new(0.1, 0.2);
    assert!((b.value(z).unwrap() - a.value(z).unwrap() - 0.2).abs() < 1e-14);
}

#[test]
fn non_solution_is_rejected() {
    let base = ModelExpansion::Ball { radius: 6f64.sqrt(), center: Point2::ORIGIN };
    let v: Arc<dyn Field> = Arc::new(FnField(move |y: Point2| Ok(base.value(y)? + 0.01)));
    let bad = factor_from_liouville(v, 2, 0, Provenance::ClosedForm("shifted".into()), &[Point2::new(0.1, 0.0)]);
    assert!(matches!(bad, Err(Error::Regularity(_))), "{bad:?}");
}

#[test]
fn rescaled_numerical_factor_matches_closed_form() {
    let u: Arc<dyn Field> = Arc::new(ModelExpansion::Ball { radius: 1.0, center: Point2::ORIGIN });
    let f = factor_from_unscaled(u, 2, 0, "ball", &[Point2::new(0.2, 0.0)]).unwrap();
    let g = disk_factor(1.0, Point2::ORIGIN, 2, 0).unwrap();
    let z = Point2::new(0.5, -0.1);
    assert!((f.value(z).unwrap() - g.value(z).unwrap()).abs() < 1e-13);
}

#[test]
fn translation_acts_on_one_slot() {
    let spec = two_disks();
    let shifted = {
        let d = Arc::new(disk(1.0, Point2::new(3.0, 0.0)).unwrap());
        let d0 = Arc::new(disk(1.0, Point2::ORIGIN).unwrap());
        let s = vec![disk_factor(1.0, Point2::new(3.0, 0.0), 2, 0).unwrap(), disk_factor(1.0, Point2::ORIGIN, 2, 1).unwrap()];
        ProductDomainSpec::new(vec![d, d0], s).unwrap()
    };
    let z = [Point2::new(0.2, 0.3), Point2::new(-0.1, 0.4)];
    let zs = [Point2::new(3.2, 0.3), Point2::new(-0.1, 0.4)];
    let a = compose_product(&spec).value(&z).unwrap();
    let b = compose_product(&shifted).value(&zs).unwrap();
    assert!((a - b).abs() < 1e-13);
}

#[test]
fn outside_point_is_a_domain_error() {
    let spec = two_disks();
    let z = [Point2::new(1.2, 0.0), Point2::ORIGIN];
    assert!(matches!(compose_product(&spec).value(&z), Err(Error::OutOfDomain { .. })));
}

#[test]
fn perturbation_makes_residual_positive() {
    let spec = two_disks();
    let bumped = {
        let d = Arc::new(disk(1.0, Point2::ORIGIN).unwrap());
        let base = ModelExpansion::Ball { radius: 6f64.sqrt(), center: Point2::ORIGIN };
        let v = FnField(move |y: Point2| Ok(base.value(y)? + 0.15));
        let f0 = FactorSolution { index: 0, n: 2, v: Arc::new(v), provenance: Provenance::ClosedForm("bumped".into()) };
        ProductDomainSpec::new(vec![d.clone(), d], vec![f0, disk_factor(1.0, Point2::ORIGIN, 2, 1).unwrap()]).unwrap()
    };
    let z = [Point2::new(0.1, 0.1), Point2::new(0.2, -0.3)];
    assert!(monge_ampere_residual(&spec, &z, 1e-3).unwrap().abs() < 1e-8);
    assert!(monge_ampere_residual(&bumped, &z, 1e-3).unwrap() < 0.0);
}

#[test]
fn single_disk_bound_is_stable() {
    let d = Arc::new(disk(1.0, Point2::ORIGIN).unwrap());
    let spec = ProductDomainSpec::new(vec![d], vec![disk_factor(1.0, Point2::ORIGIN, 1, 0).unwrap()]).unwrap();
    let rep = product_bound_check(&spec, 300, 0.16, 0.01, 3).unwrap();
    assert!(rep.stable && rep.pseudoconvex_term.is_none(), "{rep:?}");
}
