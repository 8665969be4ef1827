use std::f64::consts::TAU;

use approx::assert_abs_diff_eq;
use disloc_core::geometry::{in_class_c, in_class_d, min_separation};
use disloc_core::{pt, Burgers, Configuration, CurveShape, Dislocation, Domain, Error, ParametricCurve, Point};
use proptest::prelude::*;

fn config(points: &[(f64, f64)], domain: &Domain) -> Configuration {
    let d = points
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| Dislocation::new(pt(x, y), if i % 2 == 0 { Burgers::Positive } else { Burgers::Negative }))
        .collect();
    Configuration::new(d, domain).unwrap()
}

fn cardioid() -> Domain {
    Domain::parametric(ParametricCurve::new(CurveShape::default_cardioid(), None).unwrap())
}

fn ellipse() -> Domain {
    let shape = CurveShape::Ellipse { center: pt(0.1, -0.2), semi_axes: [1.5, 0.8] };
    Domain::parametric(ParametricCurve::new(shape, None).unwrap())
}

fn brute_force_distance(domain: &Domain, x: Point, samples: usize) -> f64 {
    let Domain::Parametric(curve) = domain else { unreachable!() };
    (0..samples)
        .map(|i| (curve.eval(TAU * i as f64 / samples as f64).position - x).norm())
        .fold(f64::INFINITY, f64::min)
}

#[test]
fn disk_probe_on_axis() {
    let p = Domain::unit_disk().boundary_probe(pt(0.5, 0.0)).unwrap();
    assert_abs_diff_eq!(p.distance, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(p.nearest, pt(1.0, 0.0), epsilon = 1e-15);
    assert_abs_diff_eq!(p.normal, pt(1.0, 0.0), epsilon = 1e-15);
    assert_eq!(p.curvature, 1.0);
}

#[test]
fn half_plane_probe() {
    let p = Domain::upper_half_plane().boundary_probe(pt(0.0, 0.1)).unwrap();
    assert_abs_diff_eq!(p.distance, 0.1, epsilon = 1e-15);
    assert_abs_diff_eq!(p.nearest, pt(0.0, 0.0), epsilon = 1e-15);
    assert_abs_diff_eq!(p.normal, pt(0.0, -1.0), epsilon = 1e-15);
    assert_eq!(p.curvature, 0.0);
}

#[test]
fn disk_probe_off_axis_matches_dense_sampling() {
    let x = pt(0.3, 0.4);
    let p = Domain::unit_disk().boundary_probe(x).unwrap();
    assert_abs_diff_eq!(p.distance, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(p.nearest, pt(0.6, 0.8), epsilon = 1e-15);
    let dense = (0..100_000)
        .map(|i| (pt((TAU * i as f64 / 1e5).cos(), (TAU * i as f64 / 1e5).sin()) - x).norm())
        .fold(f64::INFINITY, f64::min);
    assert_abs_diff_eq!(p.distance, dense, epsilon = 1e-9);
}

#[test]
fn plane_has_no_boundary() {
    assert_eq!(Domain::Plane.boundary_probe(pt(1.0, 2.0)).unwrap_err(), Error::NoBoundary);
    assert!(Domain::Plane.boundary_distance(pt(1.0, 2.0)).is_infinite());
}

#[test]
fn centre_of_disk_is_flagged_ambiguous() {
    let p = Domain::unit_disk().boundary_probe(pt(0.0, 0.0)).unwrap();
    assert!(p.ambiguous);
    assert_eq!(p.distance, 1.0);
}

#[test]
fn exterior_disk_normal_points_out_of_the_domain() {
    let p = Domain::exterior_disk(Point::zeros(), 1.0).unwrap().boundary_probe(pt(0.0, 1.5)).unwrap();
    assert_abs_diff_eq!(p.distance, 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(p.normal, pt(0.0, -1.0), epsilon = 1e-15);
    assert!(p.curvature < 0.0);
}

#[test]
fn invalid_domains_are_rejected() {
    assert_eq!(Domain::disk(Point::zeros(), 0.0).unwrap_err().kind(), "DomainError");
    assert_eq!(Domain::exterior_disk(Point::zeros(), -1.0).unwrap_err().kind(), "DomainError");
    assert!(Domain::half_plane(Point::zeros(), Point::zeros()).is_err());
    let cusped = CurveShape::Cardioid { a: 0.3, smoothing: 1.0, offset: Point::zeros() };
    assert!(ParametricCurve::new(cusped, None).is_err());
    assert!(Domain::polygon(vec![pt(0.0, 0.0), pt(1.0, 0.5), pt(0.0, 1.0)]).is_err());
}

#[test]
fn configuration_validation() {
    let disk = Domain::unit_disk();
    let outside = Configuration::new(vec![Dislocation::new(pt(1.2, 0.0), Burgers::Positive)], &disk);
    assert!(matches!(outside, Err(Error::PointOutside { .. })));
    let same = Configuration::new(
        vec![Dislocation::new(pt(0.1, 0.0), Burgers::Positive), Dislocation::new(pt(0.1, 0.0), Burgers::Negative)],
        &disk,
    );
    assert_eq!(same.unwrap_err(), Error::CoincidentPoints);
    assert!(Burgers::try_from(2i8).is_err());
    assert_eq!(Burgers::try_from(-1i8).unwrap(), Burgers::Negative);
}

#[test]
fn min_separation_examples() {
    let disk = Domain::unit_disk();
    assert_abs_diff_eq!(min_separation(&config(&[(0.5, 0.0)], &disk), &disk), 0.5, epsilon = 1e-15);
    assert_abs_diff_eq!(min_separation(&config(&[(0.5, 0.0), (-0.5, 0.0)], &disk), &disk), 0.5, epsilon = 1e-15);
    // Candidates 0.1 (boundary of z_1), 0.3 (boundary of z_2) and 0.2 (pair).
    assert_abs_diff_eq!(min_separation(&config(&[(0.9, 0.0), (0.7, 0.0)], &disk), &disk), 0.1, epsilon = 1e-12);
    let plane = Domain::Plane;
    assert_abs_diff_eq!(min_separation(&config(&[(0.0, 0.0), (3.0, 4.0)], &plane), &plane), 5.0, epsilon = 1e-15);
}

#[test]
fn class_d_examples() {
    let disk = Domain::unit_disk();
    assert!(in_class_d(&config(&[(0.95, 0.0)], &disk), &disk, 0.1, 0.5).unwrap());
    assert!(in_class_d(&config(&[(0.95, 0.0), (-0.2, 0.0)], &disk), &disk, 0.1, 0.5).unwrap());
    assert!(!in_class_d(&config(&[(0.95, 0.0), (-0.6, 0.0)], &disk), &disk, 0.1, 0.5).unwrap());
    let err = in_class_d(&config(&[(0.95, 0.0)], &disk), &disk, 0.5, 0.1).unwrap_err();
    assert!(matches!(err, Error::ParameterOrder(_)));
}

#[test]
fn class_c_examples() {
    let disk = Domain::unit_disk();
    assert!(in_class_c(&config(&[(0.05, 0.0), (-0.05, 0.0)], &disk), &disk, 0.2, 0.5).unwrap());
    assert!(!in_class_c(&config(&[(0.05, 0.0), (0.4, 0.0)], &disk), &disk, 0.2, 0.5).unwrap());
    assert!(!in_class_c(&config(&[(0.05, 0.0), (-0.05, 0.0), (0.3, 0.0)], &disk), &disk, 0.2, 0.5).unwrap());
    assert!(matches!(
        in_class_c(&config(&[(0.05, 0.0), (-0.05, 0.0)], &disk), &disk, 0.5, 0.2),
        Err(Error::ParameterOrder(_))
    ));
}

#[test]
fn parametric_disk_radius_bounds_curvature() {
    for domain in [ellipse(), cardioid()] {
        let Domain::Parametric(curve) = &domain else { unreachable!() };
        let rho = curve.disk_radius();
        let max_kappa = (0..20_000)
            .map(|i| curve.eval(TAU * i as f64 / 20_000.0).curvature().abs())
            .fold(0.0, f64::max);
        // ρ̄ comes from a coarser sample, so allow the sampling error.
        assert!(max_kappa * rho <= 1.0 + 1e-3, "κ_max ρ̄ = {}", max_kappa * rho);
    }
    // Ellipse: max curvature a/b² at the end of the major axis.
    let Domain::Parametric(curve) = ellipse() else { unreachable!() };
    assert_abs_diff_eq!(curve.disk_radius(), 0.8 * 0.8 / 1.5, epsilon = 1e-9);
}

#[test]
fn cardioid_fits_the_unit_square() {
    let (lo, hi) = cardioid().bounding_box().unwrap();
    assert!(lo.x > 0.0 && lo.y > 0.0 && hi.x < 1.0 && hi.y < 1.0);
    assert_abs_diff_eq!((lo + hi) / 2.0, pt(0.5, 0.5), epsilon = 1e-6);
}

#[test]
fn polygon_probes_flag_vertices_and_report_flat_edges() {
    let sq = Domain::unit_square();
    let p = sq.boundary_probe(pt(0.5, 0.1)).unwrap();
    assert_abs_diff_eq!(p.distance, 0.1, epsilon = 1e-15);
    assert_abs_diff_eq!(p.normal, pt(0.0, -1.0), epsilon = 1e-15);
    assert_eq!(p.curvature, 0.0);
    assert!(!p.near_vertex);
    let corner = sq.boundary_probe(pt(0.1, 0.1)).unwrap();
    assert!(corner.ambiguous);
    let beyond = sq.boundary_probe(pt(0.05, 0.01)).unwrap();
    assert!(!beyond.near_vertex);
    assert!(sq.contains(pt(0.5, 0.5)) && !sq.contains(pt(1.0, 0.5)) && !sq.contains(pt(1.5, 0.5)));
    assert_abs_diff_eq!(sq.diameter(), 2f64.sqrt(), epsilon = 1e-15);
    assert!(sq.disk_radius().is_none());
}

#[test]
fn l_shaped_polygon() {
    let l = Domain::polygon(vec![
        pt(0.0, 0.0),
        pt(2.0, 0.0),
        pt(2.0, 1.0),
        pt(1.0, 1.0),
        pt(1.0, 2.0),
        pt(0.0, 2.0),
    ])
    .unwrap();
    assert!(l.contains(pt(0.5, 1.5)));
    assert!(!l.contains(pt(1.5, 1.5)));
    // Nearest to the reentrant corner (1, 1).
    let p = l.boundary_probe(pt(0.8, 0.8)).unwrap();
    assert_abs_diff_eq!(p.distance, (0.08f64).sqrt(), epsilon = 1e-12);
    assert!(p.near_vertex);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn disk_probe_matches_radial_form(r in 0.01..0.999f64, th in 0.0..TAU, cx in -2.0..2.0f64, rho in 0.5..3.0f64) {
        let c = pt(cx, 0.3);
        let d = Domain::disk(c, rho).unwrap();
        let x = c + pt(th.cos(), th.sin()) * (r * rho);
        let p = d.boundary_probe(x).unwrap();
        prop_assert!((p.distance - (rho - (x - c).norm())).abs() < 1e-12);
        prop_assert!((p.normal.norm() - 1.0).abs() < 1e-12);
        prop_assert!((x - (p.nearest - p.normal * p.distance)).norm() < 1e-12);
    }

    #[test]
    fn parametric_probe_matches_brute_force(u in 0.0..1.0f64, v in 0.0..1.0f64, which in 0..2usize) {
        let domain = if which == 0 { ellipse() } else { cardioid() };
        let (lo, hi) = domain.bounding_box().unwrap();
        let x = pt(lo.x + u * (hi.x - lo.x), lo.y + v * (hi.y - lo.y));
        prop_assume!(domain.contains(x));
        let p = domain.boundary_probe(x).unwrap();
        let brute = brute_force_distance(&domain, x, 100_000);
        // Brute force overestimates by at most the sampling chord error.
        prop_assert!(p.distance <= brute + 1e-12);
        prop_assert!(brute - p.distance < 1e-6, "probe {} brute {}", p.distance, brute);
        prop_assert!((p.normal.norm() - 1.0).abs() < 1e-12);
        prop_assert!((x - p.nearest).norm() - p.distance < 1e-12);
        if !p.ambiguous {
            prop_assert!((x - (p.nearest - p.normal * p.distance)).norm() < 1e-7);
        }
    }

    #[test]
    fn min_separation_is_permutation_and_motion_invariant(
        pts in proptest::collection::vec((-0.6..0.6f64, -0.6..0.6f64), 2..5),
        shift in (-3.0..3.0f64, -3.0..3.0f64),
        angle in 0.0..TAU,
    ) {
        let disk = Domain::unit_disk();
        let Ok(c) = Configuration::new(
            pts.iter().map(|&(x, y)| Dislocation::new(pt(x, y), Burgers::Positive)).collect(),
            &disk,
        ) else { return Ok(()) };
        let d = min_separation(&c, &disk);
        let mut rev = c.dislocations().to_vec();
        rev.reverse();
        prop_assert!((min_separation(&Configuration::unchecked(rev), &disk) - d).abs() < 1e-15);
        let (s, co) = angle.sin_cos();
        let t = pt(shift.0, shift.1);
        let moved = Configuration::unchecked(
            c.dislocations()
                .iter()
                .map(|dl| Dislocation::new(pt(co * dl.position.x - s * dl.position.y, s * dl.position.x + co * dl.position.y) + t, dl.burgers))
                .collect(),
        );
        let moved_disk = Domain::disk(t, 1.0).unwrap();
        prop_assert!((min_separation(&moved, &moved_disk) - d).abs() < 1e-12);
    }

    #[test]
    fn class_membership_is_monotone(
        pts in proptest::collection::vec((-0.99..0.99f64, -0.99..0.99f64), 1..4),
        delta in 0.01..0.2f64,
        gamma in 0.25..0.9f64,
        grow in 1.0..1.5f64,
        shrink in 0.5..1.0f64,
    ) {
        let disk = Domain::unit_disk();
        let Ok(c) = Configuration::new(
            pts.iter().map(|&(x, y)| Dislocation::new(pt(x, y), Burgers::Positive)).collect(),
            &disk,
        ) else { return Ok(()) };
        let (d2, g2) = (delta * grow, gamma * shrink);
        if d2 < g2 && in_class_d(&c, &disk, delta, gamma).unwrap() {
            prop_assert!(in_class_d(&c, &disk, d2, g2).unwrap());
        }
        if c.len() >= 2 && d2 < g2 && in_class_c(&c, &disk, delta, gamma).unwrap() {
            prop_assert!(in_class_c(&c, &disk, d2, g2).unwrap());
        }
    }
}
