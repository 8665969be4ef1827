//! Exact solutions used as references for the integrator and the bounds.
//!
//! All cases use unit Burgers moduli. Each oracle reports its classification
//! and collision time and can sample its trajectory as a [`Configuration`].

use std::f64::consts::PI;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::geometry::{pt, Burgers, Configuration, Dislocation, Domain, Point};

/// How an exactly solvable case ends.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Classification {
    BoundaryCollision,
    PairCollision,
    Equilibrium,
    GlobalExistence,
}

/// Summary of one exact case, as reported by the CLI.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OracleResult {
    pub case: &'static str,
    pub parameters: Vec<(&'static str, f64)>,
    pub classification: Classification,
    pub collision_time: Option<f64>,
}

/// One dislocation at height `δ` above the boundary of the upper half-plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfPlaneSingle {
    pub delta: f64,
}

impl HalfPlaneSingle {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta.is_finite()) {
            return Err(Error::PreconditionViolated(format!("δ must be positive, got {delta}")));
        }
        Ok(HalfPlaneSingle { delta })
    }

    /// `T = 2πδ²`.
    pub fn collision_time(&self) -> f64 {
        2.0 * PI * self.delta * self.delta
    }

    /// `x_2(t) = √(δ² - t/2π)` for `0 ≤ t ≤ T`.
    pub fn height_at(&self, t: f64) -> Result<f64> {
        in_range(t, self.collision_time())?;
        Ok((self.delta * self.delta - t / (2.0 * PI)).max(0.0).sqrt())
    }

    pub fn initial(&self) -> Configuration {
        single(pt(0.0, self.delta), &Domain::upper_half_plane())
    }

    pub fn configuration_at(&self, t: f64) -> Result<Configuration> {
        Ok(single_unchecked(pt(0.0, self.height_at(t)?)))
    }

    pub fn result(&self) -> OracleResult {
        OracleResult {
            case: "halfplane-single",
            parameters: vec![("delta", self.delta)],
            classification: Classification::BoundaryCollision,
            collision_time: Some(self.collision_time()),
        }
    }
}

/// One dislocation at distance `δ` from the boundary of the unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskSingle {
    pub delta: f64,
}

impl DiskSingle {
    pub fn new(delta: f64) -> Result<Self> {
        if !(delta > 0.0 && delta < 1.0) {
            return Err(Error::InvalidDomain(format!("need 0 < δ < 1, got {delta}")));
        }
        Ok(DiskSingle { delta })
    }

    /// `T = π(δ² - 2δ - 2 log(1-δ))`.
    pub fn collision_time(&self) -> f64 {
        let d = self.delta;
        PI * (d * d - 2.0 * d - 2.0 * (1.0 - d).ln())
    }

    /// `R = |z|²` at time `t`, solving `log(R/R_0) - R + R_0 = t/π` on
    /// `[R_0, 1]`, where the left side is increasing.
    pub fn radius_squared_at(&self, t: f64) -> Result<f64> {
        in_range(t, self.collision_time())?;
        let r0 = (1.0 - self.delta).powi(2);
        let g = |r: f64| (r / r0).ln() - r + r0 - t / PI;
        let dg = |r: f64| 1.0 / r - 1.0;
        solve_monotone(g, dg, r0, 1.0)
    }

    /// Position at time `t`, starting from `(1-δ, 0)`.
    pub fn position_at(&self, t: f64) -> Result<Point> {
        Ok(pt(self.radius_squared_at(t)?.sqrt(), 0.0))
    }

    pub fn initial(&self) -> Configuration {
        single(pt(1.0 - self.delta, 0.0), &Domain::unit_disk())
    }

    pub fn configuration_at(&self, t: f64) -> Result<Configuration> {
        Ok(single_unchecked(self.position_at(t)?))
    }

    pub fn result(&self) -> OracleResult {
        OracleResult {
            case: "disk-single",
            parameters: vec![("delta", self.delta)],
            classification: Classification::BoundaryCollision,
            collision_time: Some(self.collision_time()),
        }
    }
}

/// `r* = √(√5 - 2)`, the unstable equilibrium radius of the symmetric pair.
pub fn symmetric_pair_equilibrium() -> f64 {
    (5f64.sqrt() - 2.0).sqrt()
}

/// Opposite-sign dislocations at `(r_0, 0)` with `b = +1` and `(-r_0, 0)`
/// with `b = -1` in the unit disk.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DiskSymmetricPair {
    pub r0: f64,
}

impl DiskSymmetricPair {
    pub fn new(r0: f64) -> Result<Self> {
        if !(r0 > 0.0 && r0 < 1.0) {
            return Err(Error::InvalidDomain(format!("need 0 < r_0 < 1, got {r0}")));
        }
        Ok(DiskSymmetricPair { r0 })
    }

    /// Decided by the sign of `r_0⁴ + 4r_0² - 1`; `r*` itself is the
    /// equilibrium even though rounding may leave that sign nonzero.
    pub fn classification(&self) -> Classification {
        let r2 = self.r0 * self.r0;
        let s = r2 * r2 + 4.0 * r2 - 1.0;
        if self.r0 == symmetric_pair_equilibrium() || s == 0.0 {
            Classification::Equilibrium
        } else if s < 0.0 {
            Classification::PairCollision
        } else {
            Classification::BoundaryCollision
        }
    }

    /// `ṙ = (r⁴ + 4r² - 1) / (4π r (1 - r⁴))`.
    pub fn radial_velocity(r: f64) -> f64 {
        let r2 = r * r;
        (r2 * r2 + 4.0 * r2 - 1.0) / (4.0 * PI * r * (1.0 - r2 * r2))
    }

    /// Closed-form collision time for the predicted fate; `None` at equilibrium.
    pub fn collision_time(&self) -> Result<Option<f64>> {
        let s5 = 5f64.sqrt();
        let a = 4.0 * s5 / 5.0;
        let r2 = self.r0 * self.r0;
        Ok(match self.classification() {
            Classification::BoundaryCollision => Some(
                2.0 * PI
                    * (r2 - 1.0
                        - a * checked_ln((7.0 - 3.0 * s5) * (r2 + 2.0 + s5) / (2.0 * (r2 + 2.0 - s5)))?
                        - 2.0 * checked_ln((r2 * r2 + 4.0 * r2 - 1.0) / 4.0)?),
            ),
            Classification::PairCollision => Some(
                2.0 * PI
                    * (r2 + a * checked_ln((9.0 + 4.0 * s5) * (r2 + 2.0 - s5) / (-(r2 + 2.0 + s5)))?
                        - 2.0 * checked_ln(1.0 - 4.0 * r2 - r2 * r2)?),
            ),
            _ => None,
        })
    }

    /// Time for `R = r²` to reach `R` from `R_0`, from the integrated law
    /// `R - R_0 + (4√5/5 - 2) log((R+2-√5)/(R_0+2-√5)) - (4√5/5 + 2) log((R+2+√5)/(R_0+2+√5)) = -t/2π`.
    pub fn time_to_radius_squared(&self, r: f64) -> f64 {
        let s5 = 5f64.sqrt();
        let r0 = self.r0 * self.r0;
        let a = 4.0 * s5 / 5.0;
        let lhs = r - r0 + (a - 2.0) * ((r + 2.0 - s5) / (r0 + 2.0 - s5)).ln()
            - (a + 2.0) * ((r + 2.0 + s5) / (r0 + 2.0 + s5)).ln();
        -2.0 * PI * lhs
    }

    /// Common radius at time `t ∈ [0, T]`.
    pub fn radius_at(&self, t: f64) -> Result<f64> {
        let end = match self.classification() {
            Classification::PairCollision => 0.0,
            Classification::BoundaryCollision => 1.0,
            _ => return Ok(self.r0),
        };
        in_range(t, self.time_to_radius_squared(end))?;
        let r0 = self.r0 * self.r0;
        let s5 = 5f64.sqrt();
        let g = |r: f64| self.time_to_radius_squared(r) - t;
        // dt/dR = 2π(1 - R²)/(R² + 4R - 1).
        let dg = |r: f64| 2.0 * PI * (1.0 - r * r) / ((r + 2.0 - s5) * (r + 2.0 + s5));
        let (lo, hi) = if end > r0 { (r0, end) } else { (end, r0) };
        Ok(solve_monotone(g, dg, lo, hi)?.sqrt())
    }

    /// Collision time from integrating `ṙ` with classical RK4 until the
    /// clearance drops to `eps`, plus the local residual: `2πε²` at the
    /// boundary, `πs²/2` for a pair at separation `s = 2r`.
    pub fn reduced_ode_collision_time(&self, eps: f64) -> Result<Option<f64>> {
        let pair = match self.classification() {
            Classification::PairCollision => true,
            Classification::BoundaryCollision => false,
            _ => return Ok(None),
        };
        let clearance = |r: f64| if pair { 2.0 * r } else { 1.0 - r };
        if clearance(self.r0) <= eps {
            return Err(Error::PreconditionViolated("initial clearance is below the stop distance".into()));
        }
        let f = Self::radial_velocity;
        let (mut t, mut r) = (0.0, self.r0);
        loop {
            let c = clearance(r);
            // Each step moves at most 0.1% of the current clearance.
            let dt = 1e-3 * c / f(r).abs();
            let k1 = f(r);
            let k2 = f(r + 0.5 * dt * k1);
            let k3 = f(r + 0.5 * dt * k2);
            let k4 = f(r + dt * k3);
            let next = r + dt / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
            let c1 = clearance(next);
            if c1 <= eps {
                t += dt * (c - eps) / (c - c1);
                break;
            }
            t += dt;
            r = next;
        }
        let tail = if pair { 0.5 * PI * eps * eps } else { 2.0 * PI * eps * eps };
        Ok(Some(t + tail))
    }

    pub fn initial(&self) -> Configuration {
        pair_unchecked(pt(self.r0, 0.0), pt(-self.r0, 0.0), Burgers::Negative)
    }

    pub fn configuration_at(&self, t: f64) -> Result<Configuration> {
        let r = self.radius_at(t)?;
        Ok(pair_unchecked(pt(r, 0.0), pt(-r, 0.0), Burgers::Negative))
    }

    pub fn result(&self) -> Result<OracleResult> {
        Ok(OracleResult {
            case: "disk-symmetric-pair",
            parameters: vec![("r0", self.r0)],
            classification: self.classification(),
            collision_time: self.collision_time()?,
        })
    }
}

/// Reduced dynamics of an opposite-sign pair in the unit disk in polar form,
/// `φ` being the angle between the position vectors. Returns `(ṙ_1, ṙ_2, φ̇)`.
pub fn disk_pair_reduced_rhs(r1: f64, r2: f64, phi: f64) -> Result<(f64, f64, f64)> {
    let c = phi.cos();
    let d = r1 * r1 + r2 * r2 - 2.0 * r1 * r2 * c;
    if d < 1e-20 {
        return Err(Error::Singularity(format!("coincident dislocations, |z_1 - z_2|² = {d}")));
    }
    let q = 1.0 - 2.0 * r1 * r2 * c + r1 * r1 * r2 * r2;
    let tau = 2.0 * PI;
    let dr1 = ((r2 * c - r1) / d + r1 / (1.0 - r1 * r1) - (r2 * c - r1 * r2 * r2) / q) / tau;
    let dr2 = ((r1 * c - r2) / d + r2 / (1.0 - r2 * r2) - (r1 * c - r1 * r1 * r2) / q) / tau;
    let s = r1 * r1 + r2 * r2;
    let dphi = s * (s - r1 * r1 * r2 * r2 - 1.0) * phi.sin() / (tau * r1 * r2 * q * d);
    Ok((dr1, dr2, dphi))
}

/// Two dislocations at `z_0` and `-z_0` in the plane.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PlanePair {
    pub z0: Point,
    /// Product of the Burgers signs, `±1`.
    pub b1b2: f64,
}

impl PlanePair {
    pub fn new(z0: Point, b1b2: f64) -> Result<Self> {
        if z0 == Point::zeros() {
            return Err(Error::ZeroInitialCondition);
        }
        if b1b2.abs() != 1.0 {
            return Err(Error::PreconditionViolated(format!("b_1 b_2 must be ±1, got {b1b2}")));
        }
        Ok(PlanePair { z0, b1b2 })
    }

    pub fn classification(&self) -> Classification {
        if self.b1b2 < 0.0 {
            Classification::PairCollision
        } else {
            Classification::GlobalExistence
        }
    }

    /// `T = 2π|z_0|²` for opposite signs; `None` for like signs.
    pub fn collision_time(&self) -> Option<f64> {
        (self.b1b2 < 0.0).then(|| 2.0 * PI * self.z0.norm_squared())
    }

    /// `z_1(t) = z_0 √(1 + b_1 b_2 t / (2π|z_0|²))`.
    pub fn position_at(&self, t: f64) -> Result<Point> {
        in_range(t, self.collision_time().unwrap_or(f64::INFINITY))?;
        let s = 1.0 + self.b1b2 * t / (2.0 * PI * self.z0.norm_squared());
        Ok(self.z0 * s.max(0.0).sqrt())
    }

    fn second_sign(&self) -> Burgers {
        if self.b1b2 > 0.0 {
            Burgers::Positive
        } else {
            Burgers::Negative
        }
    }

    pub fn initial(&self) -> Configuration {
        pair_unchecked(self.z0, -self.z0, self.second_sign())
    }

    pub fn configuration_at(&self, t: f64) -> Result<Configuration> {
        let z = self.position_at(t)?;
        Ok(pair_unchecked(z, -z, self.second_sign()))
    }

    pub fn result(&self) -> OracleResult {
        OracleResult {
            case: "plane-pair",
            parameters: vec![("z0_x", self.z0.x), ("z0_y", self.z0.y), ("b1b2", self.b1b2)],
            classification: self.classification(),
            collision_time: self.collision_time(),
        }
    }
}

fn checked_ln(x: f64) -> Result<f64> {
    if x > 0.0 {
        Ok(x.ln())
    } else {
        Err(Error::Singularity(format!("non-positive logarithm argument {x}")))
    }
}

fn in_range(t: f64, total: f64) -> Result<()> {
    if t >= 0.0 && t <= total {
        Ok(())
    } else {
        Err(Error::PreconditionViolated(format!("t = {t} outside [0, {total}]")))
    }
}

fn single(p: Point, domain: &Domain) -> Configuration {
    Configuration::new(vec![Dislocation::new(p, Burgers::Positive)], domain)
        .expect("oracle initial point lies in its domain")
}

fn single_unchecked(p: Point) -> Configuration {
    Configuration::unchecked(vec![Dislocation::new(p, Burgers::Positive)])
}

fn pair_unchecked(z1: Point, z2: Point, b2: Burgers) -> Configuration {
    Configuration::unchecked(vec![Dislocation::new(z1, Burgers::Positive), Dislocation::new(z2, b2)])
}

/// Root of a monotone `g` on `[lo, hi]`: bisection to a tight bracket, then
/// Newton steps kept only while they stay inside it.
fn solve_monotone(g: impl Fn(f64) -> f64, dg: impl Fn(f64) -> f64, mut lo: f64, mut hi: f64) -> Result<f64> {
    let (glo, ghi) = (g(lo), g(hi));
    if glo == 0.0 {
        return Ok(lo);
    }
    if ghi == 0.0 {
        return Ok(hi);
    }
    // Endpoints may be singular (±∞); only the sign matters.
    let rising = ghi > glo;
    if (glo > 0.0) == (ghi > 0.0) {
        return Err(Error::NoConvergence("root is not bracketed".into()));
    }
    let side = |lo: &mut f64, hi: &mut f64, mid: f64| {
        if (g(mid) > 0.0) == rising {
            *hi = mid;
        } else {
            *lo = mid;
        }
    };
    while hi - lo > 1e-6 * (1.0 + hi.abs()) {
        let mid = 0.5 * (lo + hi);
        side(&mut lo, &mut hi, mid);
    }
    let mut x = 0.5 * (lo + hi);
    for _ in 0..50 {
        let step = g(x) / dg(x);
        let next = x - step;
        if !(next > lo && next < hi) {
            break;
        }
        x = next;
        if step.abs() <= 1e-13 * (1.0 + x.abs()) {
            return Ok(x);
        }
    }
    // Newton left the bracket or stalled: finish by bisection.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            return Ok(mid);
        }
        side(&mut lo, &mut hi, mid);
    }
}
