use iso3bp::boundary::{newton_correct, solve_tau, CorrectorOptions};
use iso3bp::continuation::{tangent_field, trace_branch, Branch, StopPolicy, ToleranceConfig};
use iso3bp::integrator::IntegratorConfig;
use iso3bp::io::fixtures::{checked_angle, TABLES};
use iso3bp::periodic::{locate_rational_theta, symmetry_check, THETA_TOLERANCE};
use iso3bp::Error;

/// A short branch through the curve point nearest a printed table row.
fn branch_through_row(index: usize, cfg: &IntegratorConfig) -> Branch {
    let row = TABLES[index];
    let [t, a, b] = row.coords();
    let near = solve_tau(a, b, row.kind, t / row.kind.period_multiplier(), cfg).unwrap();
    let dir = tangent_field(near.coords(), row.kind, cfg).unwrap();
    let seed = newton_correct(near.coords(), row.kind, dir, &CorrectorOptions::with_eps(1e-11), cfg)
        .unwrap()
        .point;
    let stop = StopPolicy {
        max_pillars: 3,
        ..Default::default()
    };
    let run = |orientation| {
        let tol = ToleranceConfig {
            k: 20,
            orientation,
            ..Default::default()
        };
        trace_branch(&seed, row.kind, &tol, &stop, cfg).unwrap()
    };
    run(1).joined_with(&run(-1))
}

fn locates_row(index: usize) {
    let cfg = IntegratorConfig::default();
    let branch = branch_through_row(index, &cfg);
    let (p, q) = checked_angle(index);
    let rec = locate_rational_theta(&branch, p, q, &cfg).unwrap();
    let expected = p as f64 * std::f64::consts::PI / q as f64;
    assert!((rec.theta - expected).abs() < THETA_TOLERANCE);
    assert!(rec.closure_error < 1e-8, "closure {:e}", rec.closure_error);
    let printed = TABLES[index].coords();
    for (got, want) in rec.coords().iter().zip(printed) {
        assert!((got - want).abs() < 1e-3, "{:?} vs {printed:?}", rec.coords());
    }
}

#[test]
fn locates_an_odd_even_row() {
    assert_eq!(checked_angle(13), (5, 3));
    locates_row(13);
    locates_row(22);
}

#[test]
fn locates_an_odd_row() {
    assert_eq!(checked_angle(4), (9, 4));
    locates_row(0);
    locates_row(4);
}

#[test]
fn target_outside_the_branch_is_reported() {
    let cfg = IntegratorConfig::default();
    let branch = branch_through_row(22, &cfg);
    match locate_rational_theta(&branch, 100, 1, &cfg) {
        Err(Error::TargetOutOfRange { lo, hi, .. }) => assert!(lo < hi),
        other => panic!("{other:?}"),
    }
    assert!(matches!(locate_rational_theta(&branch, 1, 0, &cfg), Err(Error::InvalidInput(_))));
}

#[test]
fn located_odd_even_solution_is_even_about_the_quarter_period() {
    let cfg = IntegratorConfig::default();
    let branch = branch_through_row(22, &cfg);
    let pt = branch.points[branch.points.len() / 2];
    let report = symmetry_check(&pt, &cfg).unwrap();
    assert!(report.matches_class(1e-6, 1e-3), "{report:?}");
}
