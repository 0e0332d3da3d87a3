use liouville_core::closedform::{ball_solution, ModelExpansion};
use liouville_core::field::{Field, FnField};
use liouville_core::geometry::*;
use liouville_core::solver::*;
use liouville_core::Error;
use std::sync::Arc;

fn unit_disk() -> Arc<DomainSpec> {
    Arc::new(disk(1.0, Point2::ORIGIN).unwrap())
}

fn unit_square() -> Arc<DomainSpec> {
    Arc::new(polygon("square", &[Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)]).unwrap())
}

#[test]
fn dirichlet_with_exact_trace_on_the_disk() {
    let exact = FnField(|p: Point2| ball_solution(1.0, Point2::ORIGIN, p));
    let dom = Arc::new(disk(0.9, Point2::ORIGIN).unwrap());
    let sol = solve_dirichlet(dom, &exact, &SolverConfig::with_h(1.0 / 64.0)).unwrap();
    let err = sol.grid.nodes.iter().zip(&sol.u).map(|(n, u)| (u - exact.value(n.p).unwrap()).abs()).fold(0.0, f64::max);
    assert!(err < 1e-3, "{err}");
}

#[test]
fn zero_data_gives_a_negative_solution() {
    let sol = solve_dirichlet(unit_square(), &FnField(|_| Ok(0.0)), &SolverConfig::with_h(1.0 / 32.0)).unwrap();
    let k = sol.grid.index_of(16, 16).unwrap();
    assert!(sol.u[k] < 0.0);
    assert!(sol.u.iter().all(|&u| u <= 0.0));
}

#[test]
fn boundary_data_dominance_carries_over() {
    let cfg = SolverConfig::with_h(1.0 / 32.0);
    let pairs: [(f64, f64); 3] = [(-1.0, 0.5), (0.0, 0.1), (1.0, 3.0)];
    for (a, b) in pairs {
        let lo = solve_dirichlet(unit_disk(), &FnField(move |p: Point2| Ok(a + 0.3 * p.x)), &cfg).unwrap();
        let hi = solve_dirichlet(unit_disk(), &FnField(move |p: Point2| Ok(b + 0.3 * p.x)), &cfg).unwrap();
        assert!(lo.u.iter().zip(&hi.u).all(|(l, h)| l <= h), "{a} {b}");
    }
}

#[test]
fn newton_history_decreases_to_tolerance() {
    let dom = unit_disk();
    let sol =
        solve_blowup(dom.clone(), &BoundaryMode::Matched { model: ModelExpansion::SmoothModel { domain: dom } }, &SolverConfig::with_h(1.0 / 32.0)).unwrap();
    let hist = &sol.report.residual_history;
    assert!(hist.windows(2).all(|w| w[1] < w[0]));
    assert!(*hist.last().unwrap() <= NewtonConfig::default().tol);
    assert!(sol.u.iter().all(|u| u.is_finite()));
}

#[test]
fn constant_k_is_monotone_and_reaches_log_two() {
    let dom = unit_disk();
    let ks: Vec<f64> = (1..=8).map(|k| 2.0 * k as f64).collect();
    let mode = BoundaryMode::ConstantK { ks, reference: Some(ModelExpansion::SmoothModel { domain: dom.clone() }) };
    let sol = solve_blowup(dom, &mode, &SolverConfig::with_h(1.0 / 32.0)).unwrap();
    assert!(sol.report.k_history.iter().skip(1).all(|s| s.min_change >= -1e-6));
    assert!((sol.value(Point2::ORIGIN).unwrap() - 2f64.ln()).abs() < 5e-3);
}

#[test]
fn k_sequence_must_increase() {
    let mode = BoundaryMode::ConstantK { ks: vec![4.0, 2.0], reference: None };
    assert!(matches!(solve_blowup(unit_disk(), &mode, &SolverConfig::with_h(0.1)), Err(Error::InvalidParameter(_))));
}

#[test]
fn evaluation_on_nodes_and_outside() {
    let dom = unit_disk();
    let sol =
        solve_blowup(dom.clone(), &BoundaryMode::Matched { model: ModelExpansion::SmoothModel { domain: dom } }, &SolverConfig::with_h(1.0 / 32.0)).unwrap();
    let k = sol.grid.index_of(3, -5).unwrap();
    let p = sol.grid.nodes[k].p;
    assert!((evaluate(&sol, p).unwrap() - sol.u[k]).abs() < 1e-12);
    assert!(evaluate(&sol, Point2::new(1.5, 0.0)).is_err());
    assert!(matches!(evaluate(&sol, Point2::new(0.99, 0.0)), Err(Error::InvalidQuery(_))));
    let mid = Point2::new(0.3 + 1.0 / 64.0, 0.2 + 1.0 / 64.0);
    assert!((evaluate(&sol, mid).unwrap() - ball_solution(1.0, Point2::ORIGIN, mid).unwrap()).abs() < 1e-3);
}

#[test]
fn thin_domain_is_rejected() {
    // A slot of width 0.02 cut into the unit square, straddled by lattice nodes at x = 0.45 and 0.55.
    let slotted = Arc::new(
        polygon(
            "slotted",
            &[
                Point2::new(0.0, 0.0),
                Point2::new(1.0, 0.0),
                Point2::new(1.0, 1.0),
                Point2::new(0.51, 1.0),
                Point2::new(0.51, 0.3),
                Point2::new(0.49, 0.3),
                Point2::new(0.49, 1.0),
                Point2::new(0.0, 1.0),
            ],
        )
        .unwrap(),
    );
    assert!(matches!(discretize(slotted.clone(), 0.1, [0.5, 0.5]), Err(Error::Discretization(_))));
    assert!(discretize(slotted, 0.005, [0.5, 0.5]).is_ok());
}

#[test]
fn convergence_study_is_deterministic_and_second_order() {
    let dom = unit_disk();
    let exact = ModelExpansion::Ball { radius: 1.0, center: Point2::ORIGIN };
    let mode = BoundaryMode::Matched { model: ModelExpansion::SmoothModel { domain: dom.clone() } };
    let hs = [1.0 / 16.0, 1.0 / 32.0];
    let a = convergence_study(dom.clone(), &exact, &mode, &hs, &SolverConfig::default(), 0.1).unwrap();
    let b = convergence_study(dom, &exact, &mode, &hs, &SolverConfig::default(), 0.1).unwrap();
    assert_eq!(a.iter().map(|r| r.max_error).collect::<Vec<_>>(), b.iter().map(|r| r.max_error).collect::<Vec<_>>());
    let order = a[1].order.unwrap();
    assert!((1.5..=3.0).contains(&order), "{order}");
}

#[test]
fn reflex_sector_self_convergence() {
    let dom = Arc::new(sector(1.5, 1.0).unwrap());
    let mode = BoundaryMode::Matched { model: ModelExpansion::CornerModel { domain: dom.clone(), corner: 0 } };
    let rows = self_convergence(dom, &mode, &[1.0 / 32.0, 1.0 / 64.0], 1.0 / 256.0, &SolverConfig::default()).unwrap();
    assert!(rows[1].order.unwrap() >= 1.5, "{rows:?}");
}

#[test]
fn binary_dump_round_trip() {
    let dom = unit_disk();
    let sol = solve_blowup(dom.clone(), &BoundaryMode::Matched { model: ModelExpansion::SmoothModel { domain: dom } }, &SolverConfig::with_h(0.125)).unwrap();
    let mut buf = Vec::new();
    write_binary(&sol, &mut buf).unwrap();
    let back = read_binary(buf.as_slice()).unwrap();
    assert_eq!(back.h, 0.125);
    assert_eq!(back.nodes.len(), sol.grid.len());
    for (k, n) in back.nodes.iter().enumerate() {
        assert_eq!((n.0 as i64, n.1 as i64), (sol.grid.nodes[k].i, sol.grid.nodes[k].j));
        assert_eq!(n.3, sol.u[k]);
    }
    assert!(read_binary(&b"NOTADUMP"[..]).is_err());
    let mut csv = Vec::new();
    write_csv(&sol, &mut csv).unwrap();
    let text = String::from_utf8(csv).unwrap();
    assert!(text.starts_with("x,y,d,u_h\n"));
    assert_eq!(text.lines().count(), sol.grid.len() + 1);
}
