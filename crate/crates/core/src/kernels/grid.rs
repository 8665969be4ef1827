//! Five-point finite differences for the Dirichlet problem on axis-aligned
//! polygons.
//!
//! The grid is aligned with the edges. The regular part is split as
//! `k(·,y) = k_ref(·,y) + w`, where `k_ref` is the exact regular part for the
//! half-plane or quarter-plane formed by the edges nearest to `y`. Its
//! boundary data cancel the logarithmic peak near `y`, so `w` has smooth data
//! and the grid resolves it uniformly. The discrete Laplacian depends only on
//! the polygon and is factorised once.

use std::f64::consts::TAU;

use crate::error::{Error, Result};
use crate::geometry::{Point, Polygon};
use crate::kernels::analytic::reflect;

const OUTSIDE: i64 = -1;
const BOUNDARY: i64 = -2;

/// Symmetric positive definite band matrix factorised as `L Lᵀ`.
#[derive(Clone, Debug)]
struct BandCholesky {
    n: usize,
    bw: usize,
    l: Vec<f64>,
}

impl BandCholesky {
    /// `entries(i)` lists `(j, a_ij)` for `j ≤ i`, `i - j ≤ bw`.
    fn factor(n: usize, bw: usize, entries: impl Fn(usize) -> Vec<(usize, f64)>) -> Result<Self> {
        let w = bw + 1;
        let mut l = vec![0.0; n * w];
        for i in 0..n {
            for (j, v) in entries(i) {
                l[i * w + (j + bw - i)] = v;
            }
        }
        for i in 0..n {
            let start = i.saturating_sub(bw);
            for j in start..=i {
                let mut sum = l[i * w + (j + bw - i)];
                let kstart = start.max(j.saturating_sub(bw));
                for k in kstart..j {
                    sum -= l[i * w + (k + bw - i)] * l[j * w + (k + bw - j)];
                }
                if i == j {
                    if !(sum > 0.0) {
                        return Err(Error::SolverDivergence("grid matrix is not positive definite".into()));
                    }
                    l[i * w + bw] = sum.sqrt();
                } else {
                    l[i * w + (j + bw - i)] = sum / l[j * w + bw];
                }
            }
        }
        Ok(BandCholesky { n, bw, l })
    }

    fn solve(&self, b: &mut [f64]) {
        let (n, bw, w) = (self.n, self.bw, self.bw + 1);
        for i in 0..n {
            let mut s = b[i];
            for k in i.saturating_sub(bw)..i {
                s -= self.l[i * w + (k + bw - i)] * b[k];
            }
            b[i] = s / self.l[i * w + bw];
        }
        for i in (0..n).rev() {
            let mut s = b[i];
            for k in i + 1..(i + bw + 1).min(n) {
                s -= self.l[k * w + (i + bw - k)] * b[k];
            }
            b[i] = s / self.l[i * w + bw];
        }
    }
}

/// Image charges `(position, coefficient)` with `k_ref(x) = Σ c log|x - p| / 2π`.
pub type Images = Vec<(Point, f64)>;

/// Grid values of the smooth remainder for one source point.
#[derive(Clone, Debug)]
pub struct GridSolution {
    values: Vec<f64>,
    images: Images,
}

#[derive(Debug)]
pub struct GridSolver {
    poly: Polygon,
    origin: Point,
    hx: f64,
    hy: f64,
    nx: usize,
    ny: usize,
    /// Unknown index per node, or `OUTSIDE` / `BOUNDARY`.
    index: Vec<i64>,
    unknowns: Vec<(usize, usize)>,
    chol: BandCholesky,
    tolerance: f64,
}

impl GridSolver {
    /// Spacing close to `spacing`, adjusted so every vertex is a grid node.
    pub fn new(poly: &Polygon, spacing: f64, tolerance: f64) -> Result<Self> {
        let (lo, hi) = poly.bounding_box();
        let size = hi - lo;
        let nx = ((size.x / spacing).round() as usize).max(4);
        let ny = ((size.y / spacing).round() as usize).max(4);
        let hx = size.x / nx as f64;
        let hy = size.y / ny as f64;
        for v in poly.vertices() {
            let fx = (v.x - lo.x) / hx;
            let fy = (v.y - lo.y) / hy;
            if (fx - fx.round()).abs() > 1e-9 || (fy - fy.round()).abs() > 1e-9 {
                return Err(Error::InvalidDomain(format!(
                    "vertex ({}, {}) is not on the {nx}x{ny} grid",
                    v.x, v.y
                )));
            }
        }
        let cols = nx + 1;
        let mut index = vec![OUTSIDE; (nx + 1) * (ny + 1)];
        let mut unknowns = Vec::new();
        for j in 0..=ny {
            for i in 0..=nx {
                let p = lo + Point::new(i as f64 * hx, j as f64 * hy);
                let probe = poly.probe(p);
                index[j * cols + i] = if probe.distance <= 1e-9 * hx.min(hy) {
                    BOUNDARY
                } else if poly.contains(p) {
                    unknowns.push((i, j));
                    (unknowns.len() - 1) as i64
                } else {
                    OUTSIDE
                };
            }
        }
        if unknowns.is_empty() {
            return Err(Error::InvalidDomain("grid has no interior nodes".into()));
        }
        let (cx, cy) = (1.0 / (hx * hx), 1.0 / (hy * hy));
        let mut bw = 0usize;
        for (u, &(i, j)) in unknowns.iter().enumerate() {
            let south = index[(j - 1) * cols + i];
            if south >= 0 {
                bw = bw.max(u - south as usize);
            }
        }
        let idx = &index;
        let unk = &unknowns;
        let chol = BandCholesky::factor(unknowns.len(), bw.max(1), |u| {
            let (i, j) = unk[u];
            let mut row = vec![(u, 2.0 * (cx + cy))];
            let west = idx[j * cols + i - 1];
            if west >= 0 {
                row.push((west as usize, -cx));
            }
            let south = idx[(j - 1) * cols + i];
            if south >= 0 {
                row.push((south as usize, -cy));
            }
            row
        })?;
        Ok(GridSolver { poly: poly.clone(), origin: lo, hx, hy, nx, ny, index, unknowns, chol, tolerance })
    }

    pub fn cells(&self) -> (usize, usize) {
        (self.nx, self.ny)
    }

    pub fn spacing(&self) -> f64 {
        self.hx.max(self.hy)
    }

    fn node(&self, i: usize, j: usize) -> Point {
        self.origin + Point::new(i as f64 * self.hx, j as f64 * self.hy)
    }

    /// Exact regular part of the half- or quarter-plane bounded by the edges
    /// nearest to `y`, as image charges outside the polygon.
    pub fn images(&self, y: Point) -> Images {
        let poly = &self.poly;
        let m = poly.vertices().len();
        let e = poly.nearest_edge(y);
        let (a, b) = poly.edge(e);
        let n1 = poly.edge_normal(e);
        let y1 = reflect(y, a, n1);
        let along = (y - a).dot(&(b - a)) / (b - a).norm_squared();
        let (v, other) = if along < 0.5 { (e, (e + m - 1) % m) } else { ((e + 1) % m, (e + 1) % m) };
        let outside = |p: Point| !poly.contains(p) && poly.probe(p).distance > 0.0;
        if poly.is_convex_corner(v) {
            let (c, _) = poly.edge(other);
            let n2 = poly.edge_normal(other);
            let y2 = reflect(y, c, n2);
            let y12 = reflect(y1, c, n2);
            if outside(y1) && outside(y2) && outside(y12) {
                return vec![(y1, 1.0), (y2, 1.0), (y12, -1.0)];
            }
        }
        if outside(y1) {
            vec![(y1, 1.0)]
        } else {
            Vec::new()
        }
    }

    /// Solves for the smooth remainder of `k(·, y)`.
    pub fn solve(&self, y: Point) -> Result<GridSolution> {
        let images = self.images(y);
        let cols = self.nx + 1;
        let (cx, cy) = (1.0 / (self.hx * self.hx), 1.0 / (self.hy * self.hy));
        let data = |p: Point| (p - y).norm().ln() / TAU - reference(&images, p);
        let mut values = vec![f64::NAN; self.index.len()];
        for j in 0..=self.ny {
            for i in 0..=self.nx {
                if self.index[j * cols + i] == BOUNDARY {
                    values[j * cols + i] = data(self.node(i, j));
                }
            }
        }
        let mut rhs = vec![0.0; self.unknowns.len()];
        for (u, &(i, j)) in self.unknowns.iter().enumerate() {
            for (ni, nj, c) in [(i - 1, j, cx), (i + 1, j, cx), (i, j - 1, cy), (i, j + 1, cy)] {
                if self.index[nj * cols + ni] == BOUNDARY {
                    rhs[u] += c * values[nj * cols + ni];
                }
            }
        }
        let mut sol = rhs.clone();
        self.chol.solve(&mut sol);
        for (u, &(i, j)) in self.unknowns.iter().enumerate() {
            values[j * cols + i] = sol[u];
        }
        // Residual of the full five-point system, boundary terms included.
        let scale = rhs.iter().fold(1.0f64, |m, v| m.max(v.abs()));
        let mut worst = 0.0f64;
        for &(i, j) in &self.unknowns {
            let c = values[j * cols + i];
            let lap = cx * (values[j * cols + i - 1] + values[j * cols + i + 1] - 2.0 * c)
                + cy * (values[(j - 1) * cols + i] + values[(j + 1) * cols + i] - 2.0 * c);
            worst = worst.max(lap.abs());
        }
        if !(worst <= self.tolerance * scale) {
            return Err(Error::SolverDivergence(format!("grid residual {worst:e} exceeds tolerance")));
        }
        Ok(GridSolution { values, images })
    }

    /// `k(x, y)` from a solution for `y`.
    pub fn evaluate(&self, sol: &GridSolution, x: Point) -> Result<f64> {
        Ok(reference(&sol.images, x) + self.interpolate(&sol.values, x)?)
    }

    /// Tensor cubic Lagrange interpolation, bilinear where the 4x4 stencil
    /// leaves the domain.
    fn interpolate(&self, values: &[f64], x: Point) -> Result<f64> {
        let cols = self.nx + 1;
        let fx = (x.x - self.origin.x) / self.hx;
        let fy = (x.y - self.origin.y) / self.hy;
        let i = (fx.floor() as i64).clamp(0, self.nx as i64 - 1) as usize;
        let j = (fy.floor() as i64).clamp(0, self.ny as i64 - 1) as usize;
        let i0 = (i.saturating_sub(1)).min(self.nx - 3);
        let j0 = (j.saturating_sub(1)).min(self.ny - 3);
        let valid = |a: usize, b: usize| self.index[b * cols + a] != OUTSIDE;
        let full = (0..4).all(|q| (0..4).all(|p| valid(i0 + p, j0 + q)));
        if full {
            let wx = lagrange4(fx - i0 as f64);
            let wy = lagrange4(fy - j0 as f64);
            let mut s = 0.0;
            for q in 0..4 {
                for p in 0..4 {
                    s += wx[p] * wy[q] * values[(j0 + q) * cols + i0 + p];
                }
            }
            return Ok(s);
        }
        if !(valid(i, j) && valid(i + 1, j) && valid(i, j + 1) && valid(i + 1, j + 1)) {
            return Err(Error::PointOutside { x: x.x, y: x.y });
        }
        let (u, v) = (fx - i as f64, fy - j as f64);
        Ok((1.0 - u) * (1.0 - v) * values[j * cols + i]
            + u * (1.0 - v) * values[j * cols + i + 1]
            + (1.0 - u) * v * values[(j + 1) * cols + i]
            + u * v * values[(j + 1) * cols + i + 1])
    }
}

fn reference(images: &Images, x: Point) -> f64 {
    images.iter().map(|(p, c)| c * (x - p).norm().ln()).sum::<f64>() / TAU
}

/// Lagrange weights for nodes `0..4` at offset `t`.
fn lagrange4(t: f64) -> [f64; 4] {
    let mut w = [1.0; 4];
    for (k, wk) in w.iter_mut().enumerate() {
        for m in 0..4 {
            if m != k {
                *wk *= (t - m as f64) / (k as f64 - m as f64);
            }
        }
    }
    w
}
