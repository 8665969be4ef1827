//! Shared fixtures for the criterion benches.

use disloc_core::{pt, Burgers, Configuration, Dislocation, Domain, Point};

/// Deterministic interior points of the unit disk on a spiral.
pub fn disk_points(n: usize) -> Vec<Point> {
    (0..n)
        .map(|i| {
            let t = i as f64 / n as f64;
            let r = 0.9 * t.sqrt();
            let a = 2.399963 * i as f64;
            pt(r * a.cos(), r * a.sin())
        })
        .collect()
}

/// Deterministic interior points of the unit square, away from the edges.
pub fn square_points(n: usize) -> Vec<Point> {
    disk_points(n).into_iter().map(|p| pt(0.5 + 0.45 * p.x, 0.5 + 0.45 * p.y)).collect()
}

/// `n` dislocations of alternating sign spread over the unit disk.
pub fn disk_configuration(n: usize) -> Configuration {
    let d = disk_points(n + 1)
        .into_iter()
        .skip(1)
        .enumerate()
        .map(|(i, p)| Dislocation::new(p * 0.8, if i % 2 == 0 { Burgers::Positive } else { Burgers::Negative }))
        .collect();
    Configuration::new(d, &Domain::unit_disk()).expect("spiral points are separated and interior")
}
