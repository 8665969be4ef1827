use std::f64::consts::{PI, TAU};

use disloc_core::bounds::{
    boundary_rate_constant, boundary_scenario, c_sigma, escape_time, fatal_force_bound, grad_g_bounds,
    grad_h_far_bound, grad_h_near_bound, pair_rate_constant, pair_scenario, separation_time, verify_against_trajectory,
    zeta0_max,
};
use disloc_core::geometry::in_class_d;
use disloc_core::oracles::{DiskSingle, HalfPlaneSingle, PlanePair};
use disloc_core::{
    forces, integrate, pt, AnalyticKernels, BoundaryScenario, Burgers, Configuration, Dislocation, Domain, Error,
    IntegrationParams, KernelEvaluator, Mobility, PairScenario, Point, Verdict,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Closed form evaluated by hand in a different arrangement.
fn c_sigma_by_hand(s: f64) -> f64 {
    let num = 8.0 - 9.0 * s + 2.0 * s * s;
    let den = 4.0 * (1.0 - s) * (4.0 - 4.0 * s + s * s);
    2f64.ln() + num / den
}

#[test]
fn c_sigma_values() {
    for s in [0.05, 0.1, 0.2, 0.5, 0.9] {
        assert!(close(c_sigma(s).unwrap(), c_sigma_by_hand(s), 1e-14));
    }
    assert!(close(c_sigma(0.5).unwrap(), 2f64.ln() + 4.0 / 4.5, 1e-15));
    assert!(close(c_sigma(0.5).unwrap(), 1.582036, 5e-7));
    assert!(close(c_sigma(0.2).unwrap(), 2f64.ln() + (0.08 - 1.8 + 8.0) / (4.0 * 0.8 * 1.8 * 1.8), 1e-15));
    assert!(close(c_sigma(0.2).unwrap(), 1.298857, 5e-7));
    assert!(close(c_sigma(0.1).unwrap(), 1.241008, 5e-7));
    assert!(close(c_sigma(0.05).unwrap(), 1.216003, 5e-7));
    assert!(c_sigma(0.9999).unwrap() > 1e3);
    let grid: Vec<f64> = (1..100).map(|i| c_sigma(i as f64 / 100.0).unwrap()).collect();
    assert!(grid.windows(2).all(|w| w[1] > w[0]));
    for s in [0.0, 1.0, -0.5, 1.5, f64::NAN] {
        assert!(matches!(c_sigma(s), Err(Error::InvalidDomain(_))));
    }
}

#[test]
fn grad_g_bound_examples() {
    let b = grad_g_bounds(&Domain::unit_disk(), pt(0.9, 0.0), pt(-0.5, 0.0)).unwrap();
    assert!(close(b.grad_y, 1.0 / (TAU * 1.4) + 1.0 / (TAU * 0.5), 1e-15));
    assert!(close(b.grad_y, 0.4319920, 5e-8));
    assert!(b.grad_x.is_some());
    // d_1(x) ≥ |x - y| leaves the first bound undefined.
    let b = grad_g_bounds(&Domain::unit_disk(), pt(0.0, 0.0), pt(0.1, 0.0)).unwrap();
    assert!(b.grad_x.is_none());
    let far = grad_g_bounds(&Domain::upper_half_plane(), pt(1e9, 1.0), pt(0.0, 0.5)).unwrap();
    assert!(close(far.grad_y, 1.0 / (TAU * 0.5), 1e-9));
    assert_eq!(grad_g_bounds(&Domain::unit_disk(), pt(0.1, 0.0), pt(0.1, 0.0)).unwrap_err(), Error::CoincidentPoints);
}

#[test]
fn far_and_near_bound_examples() {
    let disk = Domain::unit_disk();
    let far = grad_h_far_bound(&disk, pt(0.5, 0.0)).unwrap();
    assert!(close(far, 2.0 * 2f64.ln() / (PI * 0.5), 1e-15));
    assert!(close(far, 0.8825424, 5e-8));
    assert_eq!(grad_h_far_bound(&disk, Point::zeros()).unwrap(), 0.0);
    assert_eq!(grad_h_far_bound(&Domain::upper_half_plane(), pt(0.0, 1.0)).unwrap_err(), Error::UnboundedDomain);

    let k = AnalyticKernels::new(disk.clone());
    let x = pt(0.95, 0.0);
    let near = grad_h_near_bound(&disk, x, 0.5).unwrap();
    assert!((near.leading - pt(-1.0 / (TAU * 0.05), 0.0)).norm() < 1e-12);
    assert!(close(near.radius, c_sigma(0.5).unwrap() / PI, 1e-15));
    assert!(close(near.radius, 0.503578, 5e-7));
    assert!((k.grad_h(x).unwrap() - near.leading).norm() <= near.radius);
    assert!(matches!(grad_h_near_bound(&disk, pt(0.1, 0.0), 0.5), Err(Error::TooFarFromBoundary { .. })));

    let hp = Domain::upper_half_plane();
    let near = grad_h_near_bound(&hp, pt(0.3, 0.2), 0.5).unwrap();
    assert_eq!(near.radius, 0.0);
    let exact = AnalyticKernels::new(hp).grad_h(pt(0.3, 0.2)).unwrap();
    assert!((exact - near.leading).norm() < 1e-14);

    let ext = Domain::exterior_disk(Point::zeros(), 1.0).unwrap();
    let x = pt(0.0, 1.1);
    let near = grad_h_near_bound(&ext, x, 0.5).unwrap();
    let exact = AnalyticKernels::new(ext).grad_h(x).unwrap();
    assert!((exact - near.leading).norm() <= near.radius);
}

#[test]
fn fatal_force_examples() {
    let b = fatal_force_bound(1, 1.0, 0.05, 0.5).unwrap();
    assert!(close(b.constant, c_sigma(0.05).unwrap(), 1e-15));
    assert!(close(b.radius, 0.1935328, 5e-8));
    // Exact single-dislocation force against the normal prediction.
    let k = AnalyticKernels::new(Domain::unit_disk());
    let c = Configuration::new(vec![Dislocation::new(pt(0.95, 0.0), Burgers::Positive)], k.domain()).unwrap();
    let f = forces(&c, &k).unwrap()[0];
    let err = (f - pt(1.0 / (4.0 * PI * 0.05), 0.0)).norm();
    assert!(close(err, 1.0 / (0.2 * PI) - 0.95 / (TAU * 0.0975), 1e-12));
    assert!(close(err, 0.040809, 5e-7));
    assert!(err <= b.radius);
    let grid: Vec<f64> = (1..50).map(|i| fatal_force_bound(3, 1.0, 0.1, 0.2 + 0.5 / i as f64).unwrap().radius).collect();
    assert!(grid.windows(2).all(|w| w[1] > w[0]), "bound must grow as γ approaches 2σρ̄");
    assert!(fatal_force_bound(2, 1.0, 0.1, 0.2).is_err());
    assert!(fatal_force_bound(0, 1.0, 0.1, 0.5).is_err());
}

#[test]
fn boundary_scenario_examples() {
    let r = boundary_scenario(&BoundaryScenario { n: 1, rho: 1.0, sigma: Some(0.1), delta0: 0.1, gamma0: None }).unwrap();
    let c = r.constants["c"];
    assert!(close(c, 0.2 * c_sigma(0.1).unwrap(), 1e-15));
    assert!(close(c, 0.2482016, 5e-8));
    assert!(close(r.time_bound, TAU * 0.01 / (1.0 - c), 1e-15));
    assert!(close(r.time_bound, 0.0835754, 5e-8));
    assert_eq!(r.verdict, Verdict::Holds);

    let hp = boundary_scenario(&BoundaryScenario { n: 1, rho: f64::INFINITY, sigma: None, delta0: 0.1, gamma0: None }).unwrap();
    assert_eq!(hp.constants["c"], 0.0);
    assert!(close(hp.time_bound, 0.0628319, 5e-8));

    assert!(close(separation_time(2, 0.05, 0.5, 0.25), PI * (0.45f64.powi(2) - 0.2f64.powi(2)) / 6.0, 1e-15));
    assert!(close(separation_time(2, 0.05, 0.5, 0.25), 0.0850848, 5e-8));
    let two = boundary_scenario(&BoundaryScenario { n: 2, rho: 1.0, sigma: Some(0.1), delta0: 0.01, gamma0: Some(0.5) }).unwrap();
    assert!(close(two.safe_window.unwrap(), separation_time(2, 0.01, 0.5, 0.25), 1e-15));
}

#[test]
fn quoted_ensemble_constant_is_an_invalid_regime() {
    let input = BoundaryScenario { n: 2, rho: 1.0, sigma: None, delta0: 0.2, gamma0: Some(0.5) };
    assert!(matches!(boundary_scenario(&input), Err(Error::InvalidRegime(_))));
    assert!(matches!(boundary_rate_constant(2, 1.0, 0.5, 0.2, 0.5), Err(Error::InvalidRegime(_))));
}

#[test]
fn boundary_scenario_rejects_bad_inputs() {
    let base = BoundaryScenario { n: 2, rho: 1.0, sigma: Some(0.1), delta0: 0.05, gamma0: Some(0.5) };
    assert!(boundary_scenario(&BoundaryScenario { gamma0: None, ..base.clone() }).is_err());
    assert!(boundary_scenario(&BoundaryScenario { delta0: 0.2, ..base.clone() }).is_err());
    assert!(boundary_scenario(&BoundaryScenario { n: 0, ..base.clone() }).is_err());
    // c(δ_0) ≥ 1 is an invalid regime, never a clamped report.
    let big = BoundaryScenario { n: 3, rho: 1.0, sigma: Some(0.5), delta0: 0.12, gamma0: Some(0.5) };
    assert!(matches!(boundary_scenario(&big), Err(Error::InvalidRegime(_))));
}

#[test]
fn pair_scenario_examples() {
    assert!(close(zeta0_max(2, 1.0), 2f64.sqrt() / 4.0, 1e-15));
    assert!(close(zeta0_max(2, 1.0), 0.353553, 5e-7));
    for n in 2..6 {
        assert!(close(pair_rate_constant(n, zeta0_max(n, 0.7), 0.7), 1.0, 1e-12));
    }
    let r = pair_scenario(&PairScenario { n: 2, zeta0: 0.1, eta0: 1.0, diam: f64::INFINITY }).unwrap();
    assert!(close(r.constants["c"], 0.08, 1e-15));
    assert!(close(r.time_bound, PI * 0.01 / (2.0 * 0.92), 1e-15));
    assert!(close(r.time_bound, 0.0170739, 5e-8));
    assert!(r.time_bound_alternate.unwrap() < r.time_bound);
    assert!(matches!(r.verdict, Verdict::NotApplicable { .. }));
    let exact = PlanePair::new(pt(0.05, 0.0), -1.0).unwrap().collision_time().unwrap();
    assert!(close(exact, 0.015708, 5e-7));
    assert!(exact <= r.time_bound);

    assert!(matches!(
        pair_scenario(&PairScenario { n: 2, zeta0: 0.36, eta0: 1.0, diam: f64::INFINITY }),
        Err(Error::InvalidRegime(_))
    ));
    assert!(matches!(
        pair_scenario(&PairScenario { n: 3, zeta0: 0.01, eta0: 0.5, diam: f64::INFINITY }),
        Err(Error::UnboundedDomain)
    ));
    assert!(matches!(
        pair_scenario(&PairScenario { n: 2, zeta0: 0.5, eta0: 0.1, diam: 2.0 }),
        Err(Error::ParameterOrder(_))
    ));
    let bounded = pair_scenario(&PairScenario { n: 3, zeta0: 0.01, eta0: 0.5, diam: 2.0 }).unwrap();
    assert_eq!(bounded.verdict, Verdict::Holds);
}

#[test]
fn escape_time_series_matches_closed_form() {
    // Where both are accurate, the expansion and the closed form agree.
    for l in [1e-3, -1e-3] {
        let chi = 2.3;
        let closed = {
            let (a, b) = (0.8, 0.4);
            PI / (l * l) * (chi * (b - a) - 0.5 * l * (b * b - a * a) + chi * chi / l * ((l * a + chi) / (l * b + chi)).ln())
        };
        let series = escape_time(l * 0.5, chi, 0.8, 0.4).unwrap();
        let closed_half = escape_time(l * 0.5 * 1e3, chi, 0.8, 0.4).unwrap();
        assert!(close(series, PI * (0.8f64.powi(3) - 0.4f64.powi(3)) / (3.0 * chi), 1e-3));
        assert!(closed.is_finite() && closed_half.is_finite());
    }
    // Integrating the rate bound numerically as an independent oracle.
    let (l, chi, a, b) = (1.7, 2.3, 0.8, 0.4);
    let steps = 100_000;
    let h = (a - b) / steps as f64;
    let quad: f64 = (0..steps)
        .map(|i| {
            let d = b + (i as f64 + 0.5) * h;
            PI * d * d / (l * d + chi) * h
        })
        .sum();
    assert!(close(escape_time(l, chi, a, b).unwrap(), quad, 1e-9));
    assert!(escape_time(-10.0, 1.0, 0.8, 0.4).is_err());
}

#[test]
fn leading_order_limits() {
    let tiny = 1e-4;
    let single = boundary_scenario(&BoundaryScenario { n: 1, rho: 1.0, sigma: None, delta0: tiny, gamma0: None }).unwrap();
    assert!((single.time_bound / (TAU * tiny * tiny) - 1.0).abs() < 1e-3);
    // With other dislocations c(δ) carries an O(δ) interaction term of size
    // about 40δ, so 0.1% needs δ_0 = 1e-5; the deviation is first order.
    for n in [2, 3] {
        let dev = |d: f64| {
            let r = boundary_scenario(&BoundaryScenario { n, rho: 1.0, sigma: None, delta0: d, gamma0: Some(0.5) }).unwrap();
            r.time_bound / (TAU * d * d) - 1.0
        };
        assert!(dev(1e-5).abs() < 1e-3, "n = {n}");
        assert!((dev(1e-4) / dev(1e-5) - 10.0).abs() < 0.1, "n = {n}");
    }
    for n in [2, 3] {
        let r = pair_scenario(&PairScenario { n, zeta0: tiny, eta0: 0.5, diam: 2.0 }).unwrap();
        assert!((r.time_bound / (0.5 * PI * tiny * tiny) - 1.0).abs() < 1e-3, "n = {n}");
    }
}

#[test]
fn rate_constant_is_scale_invariant() {
    for n in [1, 2, 3] {
        for (delta, gamma0) in [(0.01, 0.5), (0.05, 0.4), (0.1, 0.9)] {
            let base = boundary_rate_constant(n, 1.0, 0.3, delta, gamma0).unwrap();
            for lambda in [0.5, 2.0, 10.0] {
                let scaled = boundary_rate_constant(n, lambda, 0.3, lambda * delta, lambda * gamma0).unwrap();
                assert!((scaled - base).abs() <= 1e-12 * base.abs().max(1.0), "n={n} λ={lambda}");
            }
        }
    }
}

fn sample_disk(rng: &mut ChaCha8Rng, r_max: f64) -> Point {
    let r = r_max * rng.random::<f64>().sqrt();
    let t = TAU * rng.random::<f64>();
    pt(r * t.cos(), r * t.sin())
}

fn sample_point(domain: &Domain, rng: &mut ChaCha8Rng) -> Point {
    match domain {
        Domain::Disk { .. } => sample_disk(rng, 0.999),
        Domain::ExteriorDisk { .. } => {
            let r = 1.001 + 3.0 * rng.random::<f64>().powi(2);
            let t = TAU * rng.random::<f64>();
            pt(r * t.cos(), r * t.sin())
        }
        _ => pt(4.0 * rng.random::<f64>() - 2.0, 1e-3 + 2.0 * rng.random::<f64>().powi(2)),
    }
}

#[test]
fn gradient_bounds_dominate_on_sweeps() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for domain in [Domain::unit_disk(), Domain::exterior_disk(Point::zeros(), 1.0).unwrap(), Domain::upper_half_plane()] {
        let k = AnalyticKernels::new(domain.clone());
        let (mut checked_x, mut checked) = (0, 0);
        while checked < 1000 {
            let (x, y) = (sample_point(&domain, &mut rng), sample_point(&domain, &mut rng));
            if (x - y).norm() < 1e-6 {
                continue;
            }
            let b = grad_g_bounds(&domain, x, y).unwrap();
            let gy = k.grad_green_y(x, y).unwrap().norm();
            assert!(gy <= b.grad_y * (1.0 + 1e-12), "{}: |∇_y G| {gy} > {}", domain.kind(), b.grad_y);
            if let Some(bx) = b.grad_x {
                let gx = k.grad_green(x, y).unwrap().norm();
                assert!(gx <= bx * (1.0 + 1e-12), "{}: |∇_x G| {gx} > {bx} at {x:?}, {y:?}", domain.kind());
                checked_x += 1;
            }
            checked += 1;
        }
        assert!(checked_x > 100, "{}: only {checked_x} admissible pairs", domain.kind());

        let sigma = 0.5;
        let mut near = 0;
        while near < 1000 {
            let x = sample_point(&domain, &mut rng);
            let Ok(nb) = grad_h_near_bound(&domain, x, sigma) else { continue };
            let dev = (k.grad_h(x).unwrap() - nb.leading).norm();
            assert!(dev <= nb.radius + 1e-9 * nb.leading.norm(), "{}: deviation {dev} > {}", domain.kind(), nb.radius);
            near += 1;
        }
    }
    let disk = Domain::unit_disk();
    let k = AnalyticKernels::new(disk.clone());
    for _ in 0..1000 {
        let x = sample_disk(&mut rng, 0.999);
        assert!(k.grad_h(x).unwrap().norm() <= grad_h_far_bound(&disk, x).unwrap() * (1.0 + 1e-12));
    }
}

/// Rejection sampler for `D_{n,δ,γ}` in the unit disk.
fn sample_class_d(rng: &mut ChaCha8Rng, n: usize, delta: f64, gamma: f64) -> Option<Configuration> {
    let domain = Domain::unit_disk();
    for _ in 0..10_000 {
        let t = TAU * rng.random::<f64>();
        let r = 1.0 - delta * rng.random::<f64>().max(1e-6);
        let mut d = vec![Dislocation::new(pt(r * t.cos(), r * t.sin()), Burgers::Positive)];
        for i in 1..n {
            let b = if rng.random::<bool>() { Burgers::Positive } else { Burgers::Negative };
            let _ = i;
            d.push(Dislocation::new(sample_disk(rng, 1.0 - gamma), b));
        }
        let Ok(c) = Configuration::new(d, &domain) else { continue };
        if in_class_d(&c, &domain, delta, gamma).unwrap() {
            return Some(c);
        }
    }
    None
}

#[test]
fn fatal_force_bound_holds_on_sampled_configurations() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let k = AnalyticKernels::new(Domain::unit_disk());
    let mut checked = 0;
    while checked < 1000 {
        let n = 1 + checked % 3;
        let sigma = 0.02 + 0.2 * rng.random::<f64>();
        let delta = sigma;
        let gamma = (2.0 * sigma + 0.05 + 0.5 * rng.random::<f64>()).min(0.95);
        let Some(c) = sample_class_d(&mut rng, n, delta, gamma) else { continue };
        let bound = fatal_force_bound(n, 1.0, sigma, gamma).unwrap();
        let z = c.position(0);
        let d = 1.0 - z.norm();
        let predicted = z / z.norm() / (4.0 * PI * d);
        let err = (forces(&c, &k).unwrap()[0] - predicted).norm();
        assert!(err <= bound.radius, "n={n} σ={sigma} γ={gamma}: error {err} > {}", bound.radius);
        checked += 1;
    }
}

#[test]
fn bounds_verified_against_trajectories() {
    let hp = HalfPlaneSingle::new(0.1).unwrap();
    let kernels = AnalyticKernels::new(Domain::upper_half_plane());
    let tr = integrate(&hp.initial(), &kernels, &Mobility::Identity, &IntegrationParams::with_t_max(1.0)).unwrap();
    let report = boundary_scenario(&BoundaryScenario { n: 1, rho: f64::INFINITY, sigma: None, delta0: 0.1, gamma0: None }).unwrap();
    let v = verify_against_trajectory(&report, &tr).unwrap();
    assert!(v.passed && v.kind_matches);
    assert!(v.margin.unwrap().abs() < 1e-8, "exact case saturates the bound");

    let disk = DiskSingle::new(0.1).unwrap();
    let kernels = AnalyticKernels::new(Domain::unit_disk());
    let tr = integrate(&disk.initial(), &kernels, &Mobility::Identity, &IntegrationParams::with_t_max(1.0)).unwrap();
    let report = boundary_scenario(&BoundaryScenario { n: 1, rho: 1.0, sigma: Some(0.1), delta0: 0.1, gamma0: None }).unwrap();
    let v = verify_against_trajectory(&report, &tr).unwrap();
    assert!(v.passed);
    assert!(close(v.observed_time.unwrap(), 0.065097, 1e-5));

    let pair = PlanePair::new(pt(0.05, 0.0), -1.0).unwrap();
    let kernels = AnalyticKernels::new(Domain::Plane);
    let tr = integrate(&pair.initial(), &kernels, &Mobility::Identity, &IntegrationParams::with_t_max(1.0)).unwrap();
    let report = pair_scenario(&PairScenario { n: 2, zeta0: 0.1, eta0: 1.0, diam: f64::INFINITY }).unwrap();
    let v = verify_against_trajectory(&report, &tr).unwrap();
    assert!(v.passed, "{v:?}");

    let wrong = boundary_scenario(&BoundaryScenario { n: 2, rho: 1.0, sigma: Some(0.1), delta0: 0.01, gamma0: Some(0.5) }).unwrap();
    assert!(!verify_against_trajectory(&wrong, &tr).unwrap().passed);
    let single = boundary_scenario(&BoundaryScenario { n: 1, rho: 1.0, sigma: Some(0.1), delta0: 0.1, gamma0: None }).unwrap();
    assert!(matches!(verify_against_trajectory(&single, &tr), Err(Error::ScenarioMismatch(_))));
}
