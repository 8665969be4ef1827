use std::f64::consts::{PI, TAU};

use disloc_core::{
    energy, forces, pt, AnalyticKernels, Burgers, Configuration, CurveShape, Dislocation, Domain, Error, GlideSet,
    KernelEvaluator, Mobility, NumericConfig, NumericKernels, ParametricCurve, Point,
};
use proptest::prelude::*;

fn config(items: &[(f64, f64, i8)], domain: &Domain) -> Configuration {
    let d = items
        .iter()
        .map(|&(x, y, b)| Dislocation::new(pt(x, y), Burgers::try_from(b).unwrap()))
        .collect();
    Configuration::new(d, domain).unwrap()
}

fn disk() -> AnalyticKernels {
    AnalyticKernels::new(Domain::unit_disk())
}

/// Closed-form energy of a `(+1, -1)` pair in the unit disk.
fn disk_pair_energy(z1: Point, z2: Point) -> f64 {
    (z1 - z2).norm().ln() / TAU + (1.0 - z1.norm_squared()).ln() / (2.0 * TAU) + (1.0 - z2.norm_squared()).ln() / (2.0 * TAU)
        - (1.0 - 2.0 * z1.dot(&z2) + z1.norm_squared() * z2.norm_squared()).ln() / (2.0 * TAU)
}

fn fd_forces(c: &Configuration, k: &dyn KernelEvaluator, step: f64) -> Vec<Point> {
    let s = c.state();
    (0..c.len())
        .map(|i| {
            let mut comp = [0.0; 2];
            for (a, slot) in comp.iter_mut().enumerate() {
                let mut p = s.clone();
                let mut m = s.clone();
                p[2 * i + a] += step;
                m[2 * i + a] -= step;
                let ep = energy(&c.with_state(&p), k).unwrap();
                let em = energy(&c.with_state(&m), k).unwrap();
                *slot = -(ep - em) / (2.0 * step);
            }
            pt(comp[0], comp[1])
        })
        .collect()
}

fn max_rel(a: &[Point], b: &[Point]) -> f64 {
    let scale = b.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-12);
    a.iter().zip(b).map(|(u, v)| (u - v).norm()).fold(0.0, f64::max) / scale
}

fn rotate(p: Point, th: f64) -> Point {
    let (s, c) = th.sin_cos();
    pt(c * p.x - s * p.y, s * p.x + c * p.y)
}

#[test]
fn single_dislocation_energy_in_the_disk() {
    let d: f64 = 0.1;
    let e = energy(&config(&[(1.0 - d, 0.0, 1)], &Domain::unit_disk()), &disk()).unwrap();
    assert!((e - (2.0 * d - d * d).ln() / (2.0 * TAU)).abs() < 1e-14);
    assert!((e - -0.1321568).abs() < 5e-8);
}

#[test]
fn plane_pair_at_unit_distance_has_zero_energy() {
    let plane = AnalyticKernels::new(Domain::Plane);
    let e = energy(&config(&[(1.0, 0.0, 1), (0.0, 0.0, -1)], &Domain::Plane), &plane).unwrap();
    assert_eq!(e, 0.0);
}

#[test]
fn disk_pair_energy_matches_closed_form() {
    let c = config(&[(0.3, 0.0, 1), (-0.3, 0.0, -1)], &Domain::unit_disk());
    let e = energy(&c, &disk()).unwrap();
    let exact = disk_pair_energy(pt(0.3, 0.0), pt(-0.3, 0.0));
    assert!((e - exact).abs() < 1e-14, "{e} vs {exact}");
    // (1/2π) log 0.6 + (1/2π) log 0.91 - (1/4π) log(1.18 + 0.0081)
    let by_hand = (0.6f64).ln() / TAU + (0.91f64).ln() / TAU - (1.1881f64).ln() / (2.0 * TAU);
    assert!((e - by_hand).abs() < 1e-14);
}

#[test]
fn force_examples() {
    let f = forces(&config(&[(0.5, 0.0, 1)], &Domain::unit_disk()), &disk()).unwrap();
    assert!((f[0] - pt(0.5 / (TAU * 0.75), 0.0)).norm() < 1e-14);
    assert!((f[0].x - 0.106103).abs() < 5e-7);

    let plane = AnalyticKernels::new(Domain::Plane);
    let f = forces(&config(&[(1.0, 0.0, 1), (0.0, 0.0, -1)], &Domain::Plane), &plane).unwrap();
    assert!((f[0] - pt(-1.0 / TAU, 0.0)).norm() < 1e-15);
    assert!((f[0].x - -0.159155).abs() < 5e-7);
    assert!((f[0] + f[1]).norm() < 1e-15);

    let hp = AnalyticKernels::new(Domain::upper_half_plane());
    let f = forces(&config(&[(0.0, 0.1, 1)], &Domain::upper_half_plane()), &hp).unwrap();
    assert!((f[0] - pt(0.0, -1.0 / (0.4 * PI))).norm() < 1e-14);
    assert!((f[0].y - -0.795775).abs() < 5e-7);
}

#[test]
fn sign_flip_of_all_moduli_leaves_forces_unchanged() {
    let d = Domain::unit_disk();
    let a = config(&[(0.2, 0.1, 1), (-0.3, 0.4, -1), (0.1, -0.5, 1)], &d);
    let b = config(&[(0.2, 0.1, -1), (-0.3, 0.4, 1), (0.1, -0.5, -1)], &d);
    let (fa, fb) = (forces(&a, &disk()).unwrap(), forces(&b, &disk()).unwrap());
    assert!(max_rel(&fa, &fb) < 1e-15);
}

#[test]
fn coincident_dislocations_are_refused() {
    let c = Configuration::unchecked(vec![
        Dislocation::new(pt(0.2, 0.2), Burgers::Positive),
        Dislocation::new(pt(0.2, 0.2), Burgers::Negative),
    ]);
    assert_eq!(energy(&c, &disk()).unwrap_err(), Error::CoincidentPoints);
    assert_eq!(forces(&c, &disk()).unwrap_err(), Error::CoincidentPoints);
}

#[test]
fn identity_mobility_passes_through() {
    let m = Mobility::Identity;
    for f in [pt(0.0, 0.0), pt(1.5, -2.0), pt(-1e-9, 3e7)] {
        assert_eq!(m.velocity(f), f);
    }
}

#[test]
fn glide_mobility_examples() {
    let m = Mobility::Glide(GlideSet::square());
    assert_eq!(GlideSet::square().directions(), &[pt(1.0, 0.0), pt(-1.0, 0.0), pt(0.0, 1.0), pt(0.0, -1.0)]);
    assert_eq!(m.velocity(pt(2.0, 1.0)), pt(2.0, 0.0));
    assert_eq!(m.velocity(pt(1.0, 1.0)), pt(1.0, 0.0));
    assert_eq!(m.velocity(pt(-3.0, 0.5)), pt(-3.0, 0.0));
    assert_eq!(m.velocity(Point::zeros()), Point::zeros());
    assert!(GlideSet::new(&[]).is_err());
    assert!(GlideSet::new(&[pt(0.0, 0.0)]).is_err());
    let g = GlideSet::new(&[pt(3.0, 4.0), pt(-0.6, -0.8)]).unwrap();
    assert_eq!(g.directions().len(), 2);
    assert!((g.directions()[0] - pt(0.6, 0.8)).norm() < 1e-15);
}

#[test]
fn numeric_forces_match_energy_gradient() {
    let curve = ParametricCurve::new(CurveShape::default_cardioid(), None).unwrap();
    let domain = Domain::parametric(curve);
    let k = NumericKernels::new(domain.clone(), NumericConfig::default()).unwrap();
    let c = config(&[(0.45, 0.55, 1), (0.6, 0.4, -1)], &domain);
    let f = forces(&c, &k).unwrap();
    let fd = fd_forces(&c, &k, 1e-6 * domain.diameter());
    assert!(max_rel(&f, &fd) < 1e-3, "{f:?} vs {fd:?}");
}

fn random_config(domain: &Domain, n: usize, seed: &[(f64, f64)]) -> Option<Configuration> {
    let pts: Vec<Point> = match domain {
        Domain::Disk { .. } => seed.iter().map(|&(r, t)| pt(0.9 * r.sqrt() * t.cos(), 0.9 * r.sqrt() * t.sin())).collect(),
        Domain::ExteriorDisk { .. } => seed.iter().map(|&(r, t)| pt((1.1 + 2.0 * r) * t.cos(), (1.1 + 2.0 * r) * t.sin())).collect(),
        Domain::HalfPlane { .. } => seed.iter().map(|&(r, t)| pt(2.0 * t / TAU - 1.0, 0.05 + 1.5 * r)).collect(),
        _ => seed.iter().map(|&(r, t)| pt(2.0 * r - 1.0, 2.0 * t / TAU - 1.0)).collect(),
    };
    let pts = &pts[..n];
    for i in 0..n {
        for j in 0..i {
            if (pts[i] - pts[j]).norm() < 0.05 {
                return None;
            }
        }
    }
    let d = pts
        .iter()
        .enumerate()
        .map(|(i, &p)| Dislocation::new(p, if i % 2 == 0 { Burgers::Positive } else { Burgers::Negative }))
        .collect();
    Configuration::new(d, domain).ok()
}

fn domains() -> Vec<Domain> {
    vec![
        Domain::unit_disk(),
        Domain::exterior_disk(Point::zeros(), 1.0).unwrap(),
        Domain::upper_half_plane(),
        Domain::Plane,
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    #[test]
    fn forces_are_minus_energy_gradient(n in 1usize..=4, seed in prop::collection::vec((0.0..1.0f64, 0.0..TAU), 4)) {
        for domain in domains() {
            if matches!(domain, Domain::Plane) && n == 1 {
                continue;
            }
            let Some(c) = random_config(&domain, n, &seed) else { continue };
            let k = AnalyticKernels::new(domain.clone());
            let step = 1e-6 * if domain.is_bounded() { domain.diameter() } else { 1.0 };
            let err = max_rel(&forces(&c, &k).unwrap(), &fd_forces(&c, &k, step));
            prop_assert!(err < 1e-6, "{}: relative error {err:e}", domain.kind());
        }
    }

    #[test]
    fn plane_pairs_obey_action_reaction(a in (-5.0..5.0f64, -5.0..5.0f64), b in (-5.0..5.0f64, -5.0..5.0f64), like in any::<bool>()) {
        prop_assume!((a.0 - b.0).hypot(a.1 - b.1) > 1e-3);
        let c = config(&[(a.0, a.1, 1), (b.0, b.1, if like { 1 } else { -1 })], &Domain::Plane);
        let f = forces(&c, &AnalyticKernels::new(Domain::Plane)).unwrap();
        prop_assert!((f[0] + f[1]).norm() <= 1e-12 * f[0].norm().max(1.0));
    }

    #[test]
    fn disk_forces_are_rotation_equivariant(seed in prop::collection::vec((0.0..1.0f64, 0.0..TAU), 4), th in 0.0..TAU, n in 1usize..=4) {
        let domain = Domain::unit_disk();
        let Some(c) = random_config(&domain, n, &seed) else { return Ok(()) };
        let rotated: Vec<f64> = c.positions().iter().flat_map(|p| { let q = rotate(*p, th); [q.x, q.y] }).collect();
        let cr = c.with_state(&rotated);
        let (f, fr) = (forces(&c, &disk()).unwrap(), forces(&cr, &disk()).unwrap());
        for (a, b) in f.iter().zip(&fr) {
            prop_assert!((rotate(*a, th) - b).norm() < 1e-12 * a.norm().max(1.0));
        }
        prop_assert!((energy(&c, &disk()).unwrap() - energy(&cr, &disk()).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn disk_pair_energy_is_rotation_invariant(r1 in 0.05..0.95f64, r2 in 0.05..0.95f64, phi in 0.1..TAU - 0.1, th in 0.0..TAU) {
        let z1 = rotate(pt(r1, 0.0), th);
        let z2 = rotate(pt(r2 * phi.cos(), r2 * phi.sin()), th);
        let c = config(&[(z1.x, z1.y, 1), (z2.x, z2.y, -1)], &Domain::unit_disk());
        let e = energy(&c, &disk()).unwrap();
        prop_assert!((e - disk_pair_energy(pt(r1, 0.0), pt(r2 * phi.cos(), r2 * phi.sin()))).abs() < 1e-12);
    }

    #[test]
    fn glide_is_dissipative_and_contracting(fx in -1e3..1e3f64, fy in -1e3..1e3f64, angles in prop::collection::vec(0.0..PI, 1..5)) {
        let set = if angles.len() == 1 {
            GlideSet::square()
        } else {
            GlideSet::new(&angles.iter().map(|a| pt(a.cos(), a.sin())).collect::<Vec<_>>()).unwrap()
        };
        let f = pt(fx, fy);
        let v = Mobility::Glide(set.clone()).velocity(f);
        prop_assert!(v.dot(&f) >= 0.0);
        prop_assert!(v.norm() <= f.norm() * (1.0 + 1e-15));
        for g in set.directions() {
            prop_assert!((g.norm() - 1.0).abs() < 1e-15);
            prop_assert!(set.directions().iter().any(|h| (g + h).norm() < 1e-12));
        }
    }

    #[test]
    fn glide_argmax_is_scale_invariant(fx in -10.0..10.0f64, fy in -10.0..10.0f64, lambda in 1e-6..1e6f64) {
        let set = GlideSet::new(&[pt(1.0, 0.0), pt(0.5, 0.8), pt(-0.3, 0.9)]).unwrap();
        let f = pt(fx, fy);
        prop_assert_eq!(set.best(f), set.best(f * lambda));
    }
}
