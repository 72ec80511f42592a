use std::sync::Arc;

use infbilap::eigensolver::{
    continuation, extract_duals, rayleigh_quotient, solve_clamped_p, solve_hinged_p, structure_report, EigenPair,
    SolveOptions,
};
use infbilap::geometry::{make_domain, scale_domain, GridDomain, Resolution, Shape, ShapeKind, ShapeSpec};
use infbilap::operators::{laplacian, torsion, BcKind, ScalarField};
use infbilap::oracles::{clamped_profile_w, ClampedProfileParams};
use infbilap::Error;

fn domain(shape: Shape, res: Resolution) -> Arc<GridDomain> {
    Arc::new(make_domain(&ShapeSpec::new(shape, res)).unwrap())
}

fn disk(h: f64) -> Arc<GridDomain> {
    domain(Shape::Disk { radius: 1.0 }, Resolution::Spacing(h))
}

fn interval(m: usize) -> Arc<GridDomain> {
    domain(Shape::Interval { half_length: 1.0 }, Resolution::Cells(m))
}

fn solve(d: &Arc<GridDomain>, bc: BcKind, p: f64) -> EigenPair {
    let opts = SolveOptions::default();
    match bc {
        BcKind::Hinged => solve_hinged_p(d, p, None, &opts),
        BcKind::Clamped => solve_clamped_p(d, p, None, &opts),
    }
    .unwrap()
}

#[test]
fn rayleigh_consistency_and_orientation() {
    for (d, bc, p) in [
        (disk(0.05), BcKind::Hinged, 4.0),
        (disk(0.05), BcKind::Clamped, 4.0),
        (interval(100), BcKind::Hinged, 8.0),
        (interval(100), BcKind::Clamped, 8.0),
    ] {
        let pair = solve(&d, bc, p);
        let q = rayleigh_quotient(&pair.u, bc, p);
        assert!((pair.lambda - q).abs() <= 1e-8 * q, "{bc:?} {} vs {q}", pair.lambda);
        assert!(pair.el_residual < 1e-8);
        let v = pair.u.values();
        let top = v.iter().copied().fold(0.0f64, |m, x| if x.abs() > m.abs() { x } else { m });
        assert!(top > 0.0);
        let again = solve(&d, bc, p);
        assert_eq!(again.u.values(), pair.u.values());
        assert_eq!(again.lambda.to_bits(), pair.lambda.to_bits());
    }
}

#[test]
fn test_function_bounds() {
    let d = disk(0.05);
    for p in [2.0, 8.0, 32.0] {
        let hinged = solve(&d, BcKind::Hinged, p);
        let t = torsion(&d).unwrap();
        assert!(hinged.lambda <= rayleigh_quotient(&t, BcKind::Hinged, p) + 1e-6);
        let params = ClampedProfileParams::unit(2).unwrap();
        let w = ScalarField::from_fn(d.clone(), |[x, y]| {
            clamped_profile_w(&params, x.hypot(y).min(1.0)).unwrap()
        })
        .unwrap();
        let clamped = solve(&d, BcKind::Clamped, p);
        assert!(clamped.lambda <= rayleigh_quotient(&w, BcKind::Clamped, p) + 1e-6);
        assert!(clamped.lambda > hinged.lambda);
    }
}

#[test]
fn beam_and_laplacian_eigenvalues_at_p2() {
    let clamped = solve(&interval(200), BcKind::Clamped, 2.0);
    // first root of cos(2k) cosh(2k) = 1 is 2k = 4.730040744862704
    let k = 4.730_040_744_862_704 / 2.0;
    assert!((clamped.lambda / (k * k) - 1.0).abs() < 0.01, "{}", clamped.lambda);
    let hinged = solve(&interval(200), BcKind::Hinged, 2.0);
    let pi2 = std::f64::consts::PI.powi(2) / 4.0;
    assert!((hinged.lambda / pi2 - 1.0).abs() < 1e-4);
}

#[test]
fn discrete_scaling_is_exact() {
    let d = disk(0.05);
    let big = Arc::new(scale_domain(&d, 2.0).unwrap());
    for bc in [BcKind::Hinged, BcKind::Clamped] {
        let a = solve(&d, bc, 8.0).lambda;
        let b = solve(&big, bc, 8.0).lambda;
        assert!((b * 4.0 / a - 1.0).abs() < 1e-8);
    }
}

#[test]
fn single_point_schedule() {
    let d = disk(0.1);
    let trace = continuation(&d, BcKind::Hinged, &[2.0], &SolveOptions::default()).unwrap();
    assert_eq!(trace.entries.len(), 1);
    assert_eq!(trace.lambda_inf_estimate, trace.entries[0].lambda);
    assert!(continuation(&d, BcKind::Hinged, &[], &SolveOptions::default()).is_err());
    assert!(continuation(&d, BcKind::Hinged, &[4.0, 2.0], &SolveOptions::default()).is_err());
}

#[test]
fn invalid_inputs() {
    let d = disk(0.1);
    let opts = SolveOptions::default();
    assert!(solve_hinged_p(&d, 1.5, None, &opts).is_err());
    assert!(solve_clamped_p(&d, 300.0, None, &opts).is_err());
    let zero = ScalarField::constant(d.clone(), 0.0);
    assert!(matches!(solve_hinged_p(&d, 4.0, Some(&zero), &opts), Err(Error::DegenerateField(_))));
    assert!(matches!(solve_clamped_p(&d, 4.0, Some(&zero), &opts), Err(Error::DegenerateField(_))));
    let other = ScalarField::constant(disk(0.05), 1.0);
    assert!(solve_hinged_p(&d, 4.0, Some(&other), &opts).is_err());
    assert!(solve_hinged_p(&d, 4.0, None, &SolveOptions::with_tol(-1.0)).is_err());
    let capped = SolveOptions { tol: 1e-8, max_iter: 1 };
    let r = solve_clamped_p(&d, 16.0, None, &capped);
    assert!(matches!(r, Err(Error::IterationCap { .. })), "{r:?}");
    let err = continuation(&d, BcKind::Clamped, &[2.0, 16.0], &capped).unwrap_err();
    assert!(matches!(err, Error::Continuation { p, .. } if p == 2.0), "{err}");
}

#[test]
fn dual_identities_at_moderate_p() {
    let d = domain(Shape::unit_area(ShapeKind::Ellipse, 2.0), Resolution::Spacing(0.04));
    for bc in [BcKind::Hinged, BcKind::Clamped] {
        for p in [2.0, 4.0, 8.0] {
            let pair = solve(&d, bc, p);
            let duals = extract_duals(&pair).unwrap();
            assert!((duals.f_dualnorm * pair.lambda - 1.0).abs() < 1e-6, "{bc:?} p={p}");
            assert!((duals.g_dualnorm - 1.0).abs() < 1e-6);
            assert!(duals.poisson_residual < 1e-7);
        }
    }
}

#[test]
fn p2_duals_are_linear() {
    let d = disk(0.05);
    let pair = solve(&d, BcKind::Hinged, 2.0);
    let duals = extract_duals(&pair).unwrap();
    let lu = laplacian(&pair.u, BcKind::Hinged);
    let l2 = pair.lambda * pair.lambda;
    for (f, y) in duals.f.values().iter().zip(lu.values()) {
        assert!((f - y / l2).abs() < 1e-14 * (1.0 + y.abs()));
    }
    // g passes through log space, so equality holds to rounding
    for (g, u) in duals.g.values().iter().zip(pair.u.values()) {
        assert!((g - u).abs() <= 4.0 * f64::EPSILON * u.abs());
    }
    assert!((duals.poisson_residual - pair.el_residual).abs() < 1e-12);
}

#[test]
fn structure_report_conventions() {
    let d = interval(100);
    let pair = solve(&d, BcKind::Clamped, 16.0);
    let duals = extract_duals(&pair).unwrap();
    let fmax = duals.f.max_abs();
    let empty = structure_report(&pair, &duals, 2.0 * fmax);
    assert_eq!(empty.sign_set_fraction, 0.0);
    assert_eq!(empty.inclusion_violation, 0.0);
    assert!(empty.hinged_constancy.is_none());
    let rep = structure_report(&pair, &duals, 1e-3 * fmax);
    assert!(rep.sign_set_fraction > 0.5 && rep.sign_set_fraction <= 1.0);
    let hinged = solve(&d, BcKind::Hinged, 16.0);
    let hd = extract_duals(&hinged).unwrap();
    assert!(structure_report(&hinged, &hd, 1e-3 * hd.f.max_abs()).hinged_constancy.is_some());
}

#[test]
fn hinged_interval_approaches_torsion() {
    let d = interval(200);
    let trace = continuation(&d, BcKind::Hinged, &[2.0, 4.0, 8.0, 16.0, 32.0, 64.0, 128.0], &SolveOptions::default())
        .unwrap();
    assert!((trace.terminal_pair().lambda / 2.0 - 1.0).abs() < 0.03);
    let u = &trace.terminal_pair().u;
    let t = torsion(&d).unwrap();
    let (us, ts) = (u.max_abs(), t.max_abs());
    let err = u
        .values()
        .iter()
        .zip(t.values())
        .map(|(a, b)| (a / us - b / ts).abs())
        .fold(0.0, f64::max);
    assert!(err < 0.02, "{err}");
}
