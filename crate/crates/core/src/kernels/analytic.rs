//! Closed-form kernels for the disk, the exterior of a disk, the half-plane
//! and the plane.
//!
//! For a disk of radius `ρ̄` centred at the origin, with `x* = ρ̄² x / |x|²`,
//! `|x||x* - y|` expands to `Q = ρ̄⁴ - 2ρ̄² x·y + |x|²|y|²`, so
//! `k = (1/4π) log(Q/ρ̄²)` is regular at `x = 0`. The exterior disk has the
//! same `k` because `|y||x - y*|` expands to the same `Q`.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::kernels::{free_space, Backend, KernelEvaluator, COINCIDENCE_TOLERANCE};

fn disk_q(x: Point, y: Point, rho: f64) -> f64 {
    let r2 = rho * rho;
    r2 * r2 - 2.0 * r2 * x.dot(&y) + x.norm_squared() * y.norm_squared()
}

/// `k` for the disk of radius `rho` centred at the origin (also its exterior).
pub fn k_disk(x: Point, y: Point, rho: f64) -> f64 {
    (disk_q(x, y, rho) / (rho * rho)).ln() / (4.0 * PI)
}

/// `∇_x k` for the disk of radius `rho` centred at the origin (also its exterior).
pub fn grad_k_disk(x: Point, y: Point, rho: f64) -> Point {
    (x * y.norm_squared() - y * (rho * rho)) / (2.0 * PI * disk_q(x, y, rho))
}

/// `G` for the disk of radius `rho` centred at the origin, `x ≠ y`.
pub fn green_disk(x: Point, y: Point, rho: f64) -> Result<f64> {
    for p in [x, y] {
        if !(p.norm() < rho) {
            return Err(Error::PointOutside { x: p.x, y: p.y });
        }
    }
    if (x - y).norm() < COINCIDENCE_TOLERANCE {
        return Err(Error::CoincidentPoints);
    }
    Ok(free_space(x, y) + k_disk(x, y, rho))
}

/// `h(x) = (1/2π) log((ρ̄² - |x|²)/ρ̄)` for the disk centred at the origin.
pub fn h_disk(x: Point, rho: f64) -> f64 {
    ((rho * rho - x.norm_squared()) / rho).ln() / (2.0 * PI)
}

/// `∇h(x) = -x / (π(ρ̄² - |x|²))` for the disk centred at the origin.
pub fn grad_h_disk(x: Point, rho: f64) -> Point {
    -x / (PI * (rho * rho - x.norm_squared()))
}

/// `h(x) = (1/2π) log((|x|² - ρ̄²)/ρ̄)` outside the disk centred at the origin.
pub fn h_exterior_disk(x: Point, rho: f64) -> f64 {
    ((x.norm_squared() - rho * rho) / rho).ln() / (2.0 * PI)
}

/// `∇h(x) = x / (π(|x|² - ρ̄²))` outside the disk centred at the origin.
pub fn grad_h_exterior_disk(x: Point, rho: f64) -> Point {
    x / (PI * (x.norm_squared() - rho * rho))
}

/// Reflection of `x` across the line through `origin` with unit normal `n`.
pub fn reflect(x: Point, origin: Point, n: Point) -> Point {
    x - n * (2.0 * (x - origin).dot(&n))
}

/// Exact kernels for the domains with closed-form Green's functions.
#[derive(Clone, Debug)]
pub struct AnalyticKernels {
    domain: Domain,
}

impl AnalyticKernels {
    /// Panics for domains without closed forms; use [`AnalyticKernels::try_new`] to check.
    pub fn new(domain: Domain) -> Self {
        Self::try_new(domain).expect("domain has closed-form kernels")
    }

    pub fn try_new(domain: Domain) -> Result<Self> {
        match domain {
            Domain::Disk { .. } | Domain::ExteriorDisk { .. } | Domain::HalfPlane { .. } | Domain::Plane => {
                Ok(AnalyticKernels { domain })
            }
            _ => Err(Error::InvalidDomain(format!("no closed-form kernels for a {}", domain.kind()))),
        }
    }

    fn check(&self, p: Point) -> Result<()> {
        if self.domain.contains(p) {
            return Ok(());
        }
        match self.domain {
            Domain::ExteriorDisk { .. } => Err(Error::PointInsideDisk { x: p.x, y: p.y }),
            _ => Err(Error::PointOutside { x: p.x, y: p.y }),
        }
    }
}

impl KernelEvaluator for AnalyticKernels {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn backend(&self) -> Backend {
        Backend::Analytic
    }

    fn k(&self, x: Point, y: Point) -> Result<f64> {
        self.check(x)?;
        self.check(y)?;
        Ok(match self.domain {
            Domain::Disk { center, radius } | Domain::ExteriorDisk { center, radius } => {
                k_disk(x - center, y - center, radius)
            }
            Domain::HalfPlane { origin, inward_normal } => {
                (reflect(x, origin, inward_normal) - y).norm().ln() / (2.0 * PI)
            }
            _ => 0.0,
        })
    }

    fn grad_k(&self, x: Point, y: Point) -> Result<Point> {
        self.check(x)?;
        self.check(y)?;
        Ok(match self.domain {
            Domain::Disk { center, radius } | Domain::ExteriorDisk { center, radius } => {
                grad_k_disk(x - center, y - center, radius)
            }
            Domain::HalfPlane { origin, inward_normal: n } => {
                let r = reflect(x, origin, n) - y;
                // The reflection's linear part maps r to r - 2(r·n)n.
                (r - n * (2.0 * r.dot(&n))) / (2.0 * PI * r.norm_squared())
            }
            _ => Point::zeros(),
        })
    }

    fn h(&self, x: Point) -> Result<f64> {
        self.check(x)?;
        Ok(match self.domain {
            Domain::Disk { center, radius } => h_disk(x - center, radius),
            Domain::ExteriorDisk { center, radius } => h_exterior_disk(x - center, radius),
            Domain::HalfPlane { origin, inward_normal } => {
                (2.0 * (x - origin).dot(&inward_normal)).ln() / (2.0 * PI)
            }
            _ => 0.0,
        })
    }

    fn grad_h(&self, x: Point) -> Result<Point> {
        self.check(x)?;
        Ok(match self.domain {
            Domain::Disk { center, radius } => grad_h_disk(x - center, radius),
            Domain::ExteriorDisk { center, radius } => grad_h_exterior_disk(x - center, radius),
            Domain::HalfPlane { origin, inward_normal } => {
                inward_normal / (2.0 * PI * (x - origin).dot(&inward_normal))
            }
            _ => Point::zeros(),
        })
    }
}
