//! Green's function `G = -(1/2π) log|x-y| + k`, its regular part `k` and the
//! self-interaction `h(x) = k(x,x)`.
//!
//! Closed forms cover the disk, its exterior, the half-plane and the plane;
//! other domains solve the Dirichlet problem for `k` numerically.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};

pub mod analytic;
pub mod grid;
pub mod numeric;
pub mod nystrom;

pub use analytic::AnalyticKernels;
pub use numeric::{NumericConfig, NumericKernels};

/// How kernel values are produced.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Backend {
    Analytic,
    BoundaryIntegral,
    GridFd,
}

impl Backend {
    pub fn name(self) -> &'static str {
        match self {
            Backend::Analytic => "analytic",
            Backend::BoundaryIntegral => "boundary-integral",
            Backend::GridFd => "grid-fd",
        }
    }
}

/// Points closer than this are treated as coincident.
pub const COINCIDENCE_TOLERANCE: f64 = 1e-14;

/// Free-space kernel `-(1/2π) log|x - y|`.
pub fn free_space(x: Point, y: Point) -> f64 {
    -(x - y).norm().ln() / (2.0 * PI)
}

/// Gradient of [`free_space`] in `x`.
pub fn grad_free_space(x: Point, y: Point) -> Point {
    let r = x - y;
    -r / (2.0 * PI * r.norm_squared())
}

/// Source of `k`, `h` and their gradients for one domain.
///
/// Implementations are deterministic: repeated calls with the same arguments
/// return identical values regardless of internal caching.
pub trait KernelEvaluator: Send + Sync {
    fn domain(&self) -> &Domain;

    fn backend(&self) -> Backend;

    /// Discretisation size reported alongside numeric values (0 when exact).
    fn resolution(&self) -> usize {
        0
    }

    /// Points closer than this to the boundary are refused.
    fn boundary_margin(&self) -> f64 {
        0.0
    }

    /// Regular part `k(x, y)`.
    fn k(&self, x: Point, y: Point) -> Result<f64>;

    /// `∇_x k(x, y)`.
    fn grad_k(&self, x: Point, y: Point) -> Result<Point>;

    /// `h(x) = k(x, x)`.
    fn h(&self, x: Point) -> Result<f64> {
        self.k(x, x)
    }

    /// `∇h(x) = 2 ∇_x k(x, y)|_{y=x}`, using the symmetry of `k`.
    fn grad_h(&self, x: Point) -> Result<Point> {
        Ok(self.grad_k(x, x)? * 2.0)
    }

    /// Green's function `G(x, y)` for `x ≠ y`.
    fn green(&self, x: Point, y: Point) -> Result<f64> {
        if (x - y).norm() < COINCIDENCE_TOLERANCE {
            return Err(Error::CoincidentPoints);
        }
        Ok(free_space(x, y) + self.k(x, y)?)
    }

    /// `∇_x G(x, y)` for `x ≠ y`.
    fn grad_green(&self, x: Point, y: Point) -> Result<Point> {
        if (x - y).norm() < COINCIDENCE_TOLERANCE {
            return Err(Error::CoincidentPoints);
        }
        Ok(grad_free_space(x, y) + self.grad_k(x, y)?)
    }

    /// `∇_y G(x, y)`, from the symmetry `G(x, y) = G(y, x)`.
    fn grad_green_y(&self, x: Point, y: Point) -> Result<Point> {
        self.grad_green(y, x)
    }
}

/// The natural evaluator for a domain: closed forms where available, the
/// boundary-integral solver for smooth curves and the grid solver for polygons.
pub fn evaluator_for(domain: &Domain, config: &NumericConfig) -> Result<Box<dyn KernelEvaluator>> {
    match domain {
        Domain::Disk { .. } | Domain::ExteriorDisk { .. } | Domain::HalfPlane { .. } | Domain::Plane => {
            Ok(Box::new(AnalyticKernels::new(domain.clone())))
        }
        Domain::Parametric(_) | Domain::Polygon(_) => Ok(Box::new(NumericKernels::new(domain.clone(), config.clone())?)),
    }
}
