//! Nyström discretisation of the interior Dirichlet problem with a
//! double-layer potential.
//!
//! `u(x) = ∫ K(x,s) μ(s) ds` with `K(x,s) = (x-s)·ν(s) / (2π|x-s|²)` and the
//! boundary equation `-μ/2 + ∫ K μ = g`. The system matrix depends only on the
//! curve, so it is factorised once and each right-hand side costs a
//! back-substitution. Smooth curves use the trapezoid rule in the curve
//! parameter; polygons use a graded parametrisation that clusters nodes at
//! the corners.

use std::f64::consts::{PI, TAU};

use nalgebra::{DMatrix, DVector, Dyn, LU};

use crate::error::{Error, Result};
use crate::geometry::{ParametricCurve, Point, Polygon};

/// Exponent of the corner grading; the node density vanishes to this order.
const GRADING_ORDER: f64 = 6.0;

pub struct Nystrom {
    nodes: Vec<Point>,
    normals: Vec<Point>,
    weights: Vec<f64>,
    lu: LU<f64, Dyn, Dyn>,
}

impl std::fmt::Debug for Nystrom {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Nystrom").field("nodes", &self.nodes.len()).finish()
    }
}

impl Nystrom {
    /// Trapezoid rule with `n` equispaced parameter nodes.
    pub fn for_curve(curve: &ParametricCurve, n: usize) -> Result<Self> {
        let h = TAU / n as f64;
        let mut nodes = Vec::with_capacity(n);
        let mut normals = Vec::with_capacity(n);
        let mut weights = Vec::with_capacity(n);
        let mut diag = Vec::with_capacity(n);
        for i in 0..n {
            let c = curve.eval(i as f64 * h);
            nodes.push(c.position);
            normals.push(c.normal());
            weights.push(c.speed() * h);
            diag.push(-c.curvature() / (4.0 * PI));
        }
        Self::assemble(nodes, normals, weights, Some(diag))
    }

    /// Graded midpoint rule on each edge, with about `n` nodes in total.
    pub fn for_polygon(poly: &Polygon, n: usize) -> Result<Self> {
        let m = poly.vertices().len();
        let perimeter: f64 = (0..m).map(|i| {
            let (a, b) = poly.edge(i);
            (b - a).norm()
        }).sum();
        let mut nodes = Vec::new();
        let mut normals = Vec::new();
        let mut weights = Vec::new();
        for i in 0..m {
            let (a, b) = poly.edge(i);
            let len = (b - a).norm();
            let ne = ((n as f64 * len / perimeter).round() as usize).max(8);
            let normal = poly.edge_normal(i);
            for j in 0..ne {
                let t = (j as f64 + 0.5) * TAU / ne as f64;
                let (w, dw) = grading(t);
                nodes.push(a + (b - a) * (w / TAU));
                normals.push(normal);
                weights.push(len * dw / ne as f64);
            }
        }
        Self::assemble(nodes, normals, weights, None)
    }

    /// `diag` holds the limits `K(s_i, s_i)`; `None` means nodes on the same
    /// straight edge, where the kernel vanishes.
    fn assemble(
        nodes: Vec<Point>,
        normals: Vec<Point>,
        weights: Vec<f64>,
        diag: Option<Vec<f64>>,
    ) -> Result<Self> {
        let n = nodes.len();
        let mut a = DMatrix::<f64>::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let kij = if i == j {
                    diag.as_ref().map_or(0.0, |d| d[i])
                } else {
                    kernel(nodes[i], nodes[j], normals[j])
                };
                a[(i, j)] = kij * weights[j];
            }
            a[(i, i)] -= 0.5;
        }
        let lu = a.lu();
        if !lu.is_invertible() {
            return Err(Error::SolverDivergence("boundary-integral matrix is singular".into()));
        }
        Ok(Nystrom { nodes, normals, weights, lu })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[Point] {
        &self.nodes
    }

    /// Largest quadrature weight, a proxy for the node spacing.
    pub fn max_spacing(&self) -> f64 {
        self.weights.iter().cloned().fold(0.0, f64::max)
    }

    /// Density for Dirichlet data sampled at the nodes.
    pub fn solve(&self, data: &[f64]) -> Result<Vec<f64>> {
        let rhs = DVector::from_column_slice(data);
        let mu = self
            .lu
            .solve(&rhs)
            .ok_or_else(|| Error::SolverDivergence("boundary-integral solve failed".into()))?;
        if mu.iter().any(|v| !v.is_finite()) {
            return Err(Error::SolverDivergence("non-finite density".into()));
        }
        Ok(mu.as_slice().to_vec())
    }

    /// The double-layer potential at an interior point.
    ///
    /// The constant density is integrated exactly (`D[1] = -1` inside), which
    /// keeps the rule accurate close to the boundary.
    pub fn evaluate(&self, density: &[f64], x: Point) -> f64 {
        let nearest = self
            .nodes
            .iter()
            .enumerate()
            .map(|(j, s)| (j, (s - x).norm_squared()))
            .fold((0, f64::INFINITY), |a, b| if b.1 < a.1 { b } else { a })
            .0;
        let mu0 = density[nearest];
        let mut sum = 0.0;
        for j in 0..self.nodes.len() {
            sum += kernel(x, self.nodes[j], self.normals[j]) * self.weights[j] * (density[j] - mu0);
        }
        sum - mu0
    }
}

fn kernel(x: Point, s: Point, normal: Point) -> f64 {
    let r = x - s;
    r.dot(&normal) / (TAU * r.norm_squared())
}

/// Sigmoidal map of `[0, 2π]` onto itself whose derivative vanishes at the
/// endpoints to order `GRADING_ORDER - 1`. Returns the map and its derivative.
fn grading(t: f64) -> (f64, f64) {
    let p = GRADING_ORDER;
    let v = |s: f64| (1.0 / p - 0.5) * ((PI - s) / PI).powi(3) + (1.0 / p) * (s - PI) / PI + 0.5;
    let dv = |s: f64| -3.0 * (1.0 / p - 0.5) * (PI - s).powi(2) / PI.powi(3) + 1.0 / (p * PI);
    let a = v(t).powf(p);
    let b = v(TAU - t).powf(p);
    let da = p * v(t).powf(p - 1.0) * dv(t);
    let db = -p * v(TAU - t).powf(p - 1.0) * dv(TAU - t);
    let w = TAU * a / (a + b);
    let dw = TAU * (da * b - a * db) / (a + b).powi(2);
    (w, dw)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grading_is_monotone_onto() {
        let (w0, _) = grading(0.0);
        let (w1, _) = grading(TAU);
        assert!(w0.abs() < 1e-14 && (w1 - TAU).abs() < 1e-12);
        let mut prev = -1.0;
        for i in 0..=200 {
            let (w, dw) = grading(TAU * i as f64 / 200.0);
            assert!(w >= prev && dw >= 0.0);
            prev = w;
        }
        // The graded rule sums to the edge length.
        let n = 64;
        let total: f64 = (0..n).map(|j| grading((j as f64 + 0.5) * TAU / n as f64).1 / n as f64).sum();
        assert!((total - 1.0).abs() < 1e-9, "{total}");
    }
}
