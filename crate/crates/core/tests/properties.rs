use liouville_core::asymptotics::{bracket_point, cone_subsolution, cone_supersolution, fit_rate, ErrorProfile, ProfileSample};
use liouville_core::closedform::{ball_solution, cone_solution, ModelExpansion};
use liouville_core::field::Field;
use liouville_core::geometry::{curved_corner, disk, project_to_curve, Frame, Point2};
use liouville_core::kahler::{factor_from_liouville, Provenance};
use proptest::prelude::*;
use std::f64::consts::PI;
use std::sync::{Arc, OnceLock};

fn corner_domain() -> &'static liouville_core::geometry::DomainSpec {
    static DOM: OnceLock<liouville_core::geometry::DomainSpec> = OnceLock::new();
    DOM.get_or_init(|| curved_corner(0.75, 0.25, 2.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn distance_is_min_over_segments(x in -2.5f64..2.5, y in -2.5f64..2.5) {
        let dom = corner_domain();
        let p = Point2::new(x, y);
        prop_assume!(dom.contains(p));
        let d = dom.distance_to_boundary(p).unwrap().d;
        let m = dom.segments().iter().map(|s| project_to_curve(s, p).unwrap().dist).fold(f64::INFINITY, f64::min);
        prop_assert!((d - m).abs() < 1e-12);
    }

    #[test]
    fn frames_preserve_distances(ox in -3.0f64..3.0, oy in -3.0f64..3.0, th in -PI..PI,
                                 ax in -5.0f64..5.0, ay in -5.0f64..5.0, bx in -5.0f64..5.0, by in -5.0f64..5.0) {
        let f = Frame::new(Point2::new(ox, oy), th);
        let (a, b) = (Point2::new(ax, ay), Point2::new(bx, by));
        prop_assert!((f.to_local(a).dist(f.to_local(b)) - a.dist(b)).abs() < 1e-12);
        prop_assert!(f.to_world(f.to_local(a)).dist(a) < 1e-12);
    }

    #[test]
    fn barriers_sandwich_the_cone(mu in 0.2f64..1.95, a in 0.01f64..10.0, r in 1e-3f64..5.0, t in 1e-3f64..0.999) {
        let z = Point2::polar(r, mu * PI * t);
        let v = cone_solution(mu, z).unwrap();
        prop_assert!(cone_subsolution(mu, a, z).unwrap() <= v);
        prop_assert!(v <= cone_supersolution(mu, a, z).unwrap());
    }

    #[test]
    fn power_law_fit_recovers_the_exponent(beta in 0.2f64..3.0, c in 0.01f64..100.0) {
        let samples = (0..40).map(|k| {
            let x = 0.01 * 1.1f64.powi(k);
            ProfileSample { p: Point2::ORIGIN, d: x, x, error: c * x.powf(beta) }
        }).collect();
        let fit = fit_rate(&ErrorProfile { samples, skipped: 0 }, (0.0, 1.0)).unwrap();
        prop_assert!((fit.slope - beta).abs() < 1e-9);
        prop_assert!((fit.constant - c).abs() < 1e-8 * c.max(1.0));
    }

    #[test]
    fn factor_scaling_round_trips(n in 1usize..5, r in 0.5f64..3.0, yx in -0.9f64..0.9, yy in -0.9f64..0.9) {
        let v: Arc<dyn Field> = Arc::new(ModelExpansion::Ball { radius: r, center: Point2::ORIGIN });
        let f = factor_from_liouville(v.clone(), n, 0, Provenance::ClosedForm("ball".into()), &[Point2::ORIGIN]).unwrap();
        let y = Point2::new(yx, yy) * (r / 1.3);
        prop_assert!((f.liouville_value(y).unwrap() - v.value(y).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn disk_brackets_contain_the_exact_solution(r in 0.02f64..0.995, t in -PI..PI) {
        let dom = disk(1.0, Point2::ORIGIN).unwrap();
        let p = Point2::polar(r, t);
        let b = bracket_point(&dom, p).unwrap();
        let u = ball_solution(1.0, Point2::ORIGIN, p).unwrap();
        prop_assert!(b.lower <= u + 1e-9 && u <= b.upper + 1e-9, "{} {} {}", b.lower, u, b.upper);
    }
}
