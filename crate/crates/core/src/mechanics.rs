//! Renormalised energy, Peach–Koehler forces and mobility laws.

use crate::error::{Error, Result};
use crate::geometry::{Configuration, Point};
use crate::kernels::{free_space, KernelEvaluator, COINCIDENCE_TOLERANCE};

/// Renormalised energy
/// `E = Σ_{i<j} b_i b_j (k(z_i,z_j) - (1/2π) log|z_i - z_j|) + ½ Σ h(z_i)`.
pub fn energy(config: &Configuration, kernels: &dyn KernelEvaluator) -> Result<f64> {
    let n = config.len();
    let mut e = 0.0;
    for i in 0..n {
        let zi = config.position(i);
        e += 0.5 * kernels.h(zi)?;
        for j in i + 1..n {
            let zj = config.position(j);
            if (zi - zj).norm() < COINCIDENCE_TOLERANCE {
                return Err(Error::CoincidentPoints);
            }
            e += config.sign(i) * config.sign(j) * (free_space(zi, zj) + kernels.k(zi, zj)?);
        }
    }
    Ok(e)
}

/// Forces `f_i = -½ ∇h(z_i) - Σ_{j≠i} b_i b_j ∇_x G(z_i, z_j)`, the negative
/// gradient of [`energy`] in each position.
pub fn forces(config: &Configuration, kernels: &dyn KernelEvaluator) -> Result<Vec<Point>> {
    let n = config.len();
    let mut f = Vec::with_capacity(n);
    for i in 0..n {
        let zi = config.position(i);
        let mut fi = -kernels.grad_h(zi)? * 0.5;
        for j in 0..n {
            if j != i {
                let bij = config.sign(i) * config.sign(j);
                fi -= kernels.grad_green(zi, config.position(j))? * bij;
            }
        }
        f.push(fi);
    }
    Ok(f)
}

/// Unit glide directions, closed under negation.
#[derive(Clone, Debug, PartialEq)]
pub struct GlideSet {
    directions: Vec<Point>,
}

impl GlideSet {
    /// Normalises the directions and adds any missing negations.
    pub fn new(directions: &[Point]) -> Result<Self> {
        let mut dirs: Vec<Point> = Vec::new();
        for d in directions {
            let n = d.norm();
            if !(n > 0.0 && n.is_finite()) {
                return Err(Error::PreconditionViolated("glide direction must be non-zero".into()));
            }
            let u = d / n;
            for v in [u, -u] {
                if !dirs.iter().any(|w| (w - v).norm() < 1e-12) {
                    dirs.push(v);
                }
            }
        }
        if dirs.is_empty() {
            return Err(Error::PreconditionViolated("glide set is empty".into()));
        }
        Ok(GlideSet { directions: dirs })
    }

    /// The square lattice: `±e_1, ±e_2`.
    pub fn square() -> Self {
        Self::new(&[Point::new(1.0, 0.0), Point::new(0.0, 1.0)]).unwrap()
    }

    pub fn directions(&self) -> &[Point] {
        &self.directions
    }

    /// Index of the direction maximising `f·g`; ties go to the lowest index.
    pub fn best(&self, f: Point) -> usize {
        let mut best = 0;
        let mut val = f.dot(&self.directions[0]);
        for (i, g) in self.directions.iter().enumerate().skip(1) {
            let v = f.dot(g);
            if v > val {
                best = i;
                val = v;
            }
        }
        best
    }
}

/// Map from forces to velocities.
#[derive(Clone, Debug, PartialEq, Default)]
pub enum Mobility {
    #[default]
    Identity,
    /// Motion only along the glide direction best aligned with the force.
    Glide(GlideSet),
}

impl Mobility {
    pub fn velocity(&self, f: Point) -> Point {
        match self {
            Mobility::Identity => f,
            Mobility::Glide(set) => {
                if f == Point::zeros() {
                    return f;
                }
                let g = set.directions()[set.best(f)];
                g * f.dot(&g)
            }
        }
    }

    pub fn apply(&self, forces: &[Point]) -> Vec<Point> {
        forces.iter().map(|f| self.velocity(*f)).collect()
    }
}
