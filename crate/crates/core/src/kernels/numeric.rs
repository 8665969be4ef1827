//! Kernels for domains without closed forms.
//!
//! `k(·, y)` is the harmonic function with boundary values
//! `(1/2π) log|s - y|`. One boundary-value solve per source point `y` serves
//! every target; solutions are kept in a small least-recently-used cache.
//! Gradients in the first argument use central differences with the source
//! frozen, so `∇h(x) = 2 ∇_x k(x, y)|_{y=x}` costs one solve.

use std::collections::VecDeque;
use std::f64::consts::TAU;
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};
use crate::kernels::grid::{GridSolution, GridSolver};
use crate::kernels::nystrom::Nystrom;
use crate::kernels::{Backend, KernelEvaluator};

/// Source points are snapped to this lattice before solving.
const SOURCE_LATTICE: f64 = 1e12;

/// Discretisation settings for the numeric backends.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NumericConfig {
    /// `None` picks the boundary integral for curves and the grid for polygons.
    pub backend: Option<Backend>,
    /// Boundary nodes `N_b`; even and at least 64.
    pub boundary_nodes: usize,
    /// Grid spacing; `None` means `diam / 256`.
    pub grid_spacing: Option<f64>,
    /// Relative residual accepted from the linear solve.
    pub solve_tolerance: f64,
    /// Finite-difference step as a fraction of the diameter.
    pub gradient_step: f64,
    /// Number of cached source solutions.
    pub cache_capacity: usize,
}

impl Default for NumericConfig {
    fn default() -> Self {
        NumericConfig {
            backend: None,
            boundary_nodes: 512,
            grid_spacing: None,
            solve_tolerance: 1e-10,
            gradient_step: 1e-5,
            cache_capacity: 32,
        }
    }
}

enum Solver {
    Integral(Nystrom),
    Grid(GridSolver),
}

enum Solution {
    Density(Vec<f64>),
    Grid(GridSolution),
}

/// Numeric evaluator for parametric curves and axis-aligned polygons.
pub struct NumericKernels {
    domain: Domain,
    config: NumericConfig,
    backend: Backend,
    solver: Solver,
    margin: f64,
    step: f64,
    resolution: usize,
    cache: Mutex<VecDeque<((u64, u64), Arc<Solution>)>>,
}

impl std::fmt::Debug for NumericKernels {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("NumericKernels")
            .field("domain", &self.domain.kind())
            .field("backend", &self.backend)
            .field("resolution", &self.resolution)
            .field("margin", &self.margin)
            .finish()
    }
}

impl NumericKernels {
    pub fn new(domain: Domain, config: NumericConfig) -> Result<Self> {
        if config.boundary_nodes < 64 || config.boundary_nodes % 2 != 0 {
            return Err(Error::PreconditionViolated(format!(
                "boundary_nodes must be even and at least 64, got {}",
                config.boundary_nodes
            )));
        }
        if !(config.gradient_step > 0.0 && config.solve_tolerance > 0.0) {
            return Err(Error::PreconditionViolated("step and tolerance must be positive".into()));
        }
        let diam = domain.diameter();
        let backend = match (&domain, config.backend) {
            (Domain::Parametric(_), None) => Backend::BoundaryIntegral,
            (Domain::Polygon(_), None) => Backend::GridFd,
            (_, Some(b)) => b,
            _ => Backend::Analytic,
        };
        let n = config.boundary_nodes;
        let (solver, margin, resolution) = match (&domain, backend) {
            (Domain::Parametric(curve), Backend::BoundaryIntegral) => {
                let s = Nystrom::for_curve(curve, n)?;
                let margin = (TAU * diam / n as f64).max(1.5 * s.max_spacing());
                (Solver::Integral(s), margin, n)
            }
            (Domain::Polygon(poly), Backend::BoundaryIntegral) => {
                let s = Nystrom::for_polygon(poly, n)?;
                let margin = (TAU * diam / n as f64).max(1.5 * s.max_spacing());
                let len = s.len();
                (Solver::Integral(s), margin, len)
            }
            (Domain::Polygon(poly), Backend::GridFd) => {
                let h = config.grid_spacing.unwrap_or(diam / 256.0);
                if !(h > 0.0 && h < diam) {
                    return Err(Error::PreconditionViolated(format!("invalid grid spacing {h}")));
                }
                let s = GridSolver::new(poly, h, config.solve_tolerance)?;
                let margin = 2.0 * s.spacing();
                let cells = s.cells().0.max(s.cells().1);
                (Solver::Grid(s), margin, cells)
            }
            _ => {
                return Err(Error::InvalidDomain(format!(
                    "backend {} is not available for a {} domain",
                    backend.name(),
                    domain.kind()
                )))
            }
        };
        Ok(NumericKernels {
            step: config.gradient_step * diam,
            domain,
            config,
            backend,
            solver,
            margin,
            resolution,
            cache: Mutex::new(VecDeque::new()),
        })
    }

    pub fn config(&self) -> &NumericConfig {
        &self.config
    }

    fn check(&self, p: Point) -> Result<()> {
        self.domain.require_inside(p)?;
        let d = self.domain.boundary_distance(p);
        if d < self.margin {
            return Err(Error::TargetTooCloseToBoundary { distance: d, margin: self.margin });
        }
        Ok(())
    }

    fn solution(&self, y: Point) -> Result<Arc<Solution>> {
        let key = (y.x.to_bits(), y.y.to_bits());
        if let Some(hit) = self.cache.lock().unwrap().iter().find(|(k, _)| *k == key) {
            return Ok(hit.1.clone());
        }
        let sol = Arc::new(match &self.solver {
            Solver::Integral(s) => {
                let data: Vec<f64> = s.nodes().iter().map(|p| (p - y).norm().ln() / TAU).collect();
                Solution::Density(s.solve(&data)?)
            }
            Solver::Grid(s) => Solution::Grid(s.solve(y)?),
        });
        let mut cache = self.cache.lock().unwrap();
        if !cache.iter().any(|(k, _)| *k == key) {
            cache.push_front((key, sol.clone()));
            cache.truncate(self.config.cache_capacity.max(1));
        }
        Ok(sol)
    }

    fn evaluate(&self, sol: &Solution, x: Point) -> Result<f64> {
        match (&self.solver, sol) {
            (Solver::Integral(s), Solution::Density(mu)) => Ok(s.evaluate(mu, x)),
            (Solver::Grid(s), Solution::Grid(g)) => s.evaluate(g, x),
            _ => unreachable!("solution kind matches solver"),
        }
    }

    /// `k(x, y)` at each target for one source `y`.
    pub fn solve_k(&self, y: Point, targets: &[Point]) -> Result<Vec<f64>> {
        self.check(y)?;
        let y = snap(y);
        let sol = self.solution(y)?;
        targets
            .iter()
            .map(|&x| {
                self.check(x)?;
                self.evaluate(&sol, x)
            })
            .collect()
    }
}

fn snap(y: Point) -> Point {
    Point::new((y.x * SOURCE_LATTICE).round() / SOURCE_LATTICE, (y.y * SOURCE_LATTICE).round() / SOURCE_LATTICE)
}

impl KernelEvaluator for NumericKernels {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn backend(&self) -> Backend {
        self.backend
    }

    fn resolution(&self) -> usize {
        self.resolution
    }

    fn boundary_margin(&self) -> f64 {
        self.margin
    }

    fn k(&self, x: Point, y: Point) -> Result<f64> {
        Ok(self.solve_k(y, &[x])?[0])
    }

    fn grad_k(&self, x: Point, y: Point) -> Result<Point> {
        self.check(x)?;
        self.check(y)?;
        let sol = self.solution(snap(y))?;
        let s = self.step;
        let ex = Point::new(s, 0.0);
        let ey = Point::new(0.0, s);
        let dx = self.evaluate(&sol, x + ex)? - self.evaluate(&sol, x - ex)?;
        let dy = self.evaluate(&sol, x + ey)? - self.evaluate(&sol, x - ey)?;
        Ok(Point::new(dx, dy) / (2.0 * s))
    }
}
