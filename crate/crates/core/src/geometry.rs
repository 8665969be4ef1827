//! Planar domains, boundary probes and dislocation configurations.
//!
//! Normals returned by probes point out of the domain. Curvature is signed so
//! that a disk seen from inside has `κ > 0` and seen from outside `κ < 0`.

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::Vector2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::COINCIDENCE_TOLERANCE;

/// A point or vector in the plane.
pub type Point = Vector2<f64>;

/// Coarse samples used to seed the nearest-point search on parametric curves.
pub const NEAREST_POINT_SAMPLES: usize = 1024;

/// Probes whose nearest boundary point is this close to a polygon vertex are flagged.
pub const VERTEX_TOLERANCE: f64 = 1e-9;

/// Shorthand for constructing a [`Point`].
pub fn pt(x: f64, y: f64) -> Point {
    Point::new(x, y)
}

/// Counter-clockwise rotation by a right angle.
pub fn perp(v: Point) -> Point {
    pt(-v.y, v.x)
}

/// Result of projecting a point onto the boundary.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryProbe {
    /// Distance `d_1(x)` from the point to the boundary.
    pub distance: f64,
    /// A nearest boundary point.
    pub nearest: Point,
    /// Unit outward normal at `nearest`.
    pub normal: Point,
    /// Signed curvature at `nearest`.
    pub curvature: f64,
    /// More than one nearest point exists; `nearest` is one of them.
    pub ambiguous: bool,
    /// `nearest` lies within [`VERTEX_TOLERANCE`] of a polygon vertex.
    pub near_vertex: bool,
}

/// A planar domain `Ω`.
#[derive(Clone, Debug)]
pub enum Domain {
    Disk { center: Point, radius: f64 },
    ExteriorDisk { center: Point, radius: f64 },
    /// `{x : (x - origin)·inward_normal > 0}` with a unit `inward_normal`.
    HalfPlane { origin: Point, inward_normal: Point },
    Plane,
    Parametric(Arc<ParametricCurve>),
    Polygon(Arc<Polygon>),
}

impl Domain {
    pub fn disk(center: Point, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Domain::Disk { center, radius })
    }

    pub fn unit_disk() -> Self {
        Domain::Disk { center: Point::zeros(), radius: 1.0 }
    }

    pub fn exterior_disk(center: Point, radius: f64) -> Result<Self> {
        check_radius(radius)?;
        Ok(Domain::ExteriorDisk { center, radius })
    }

    /// Half-plane through `origin` whose interior lies on the side of `inward_normal`.
    pub fn half_plane(origin: Point, inward_normal: Point) -> Result<Self> {
        let norm = inward_normal.norm();
        if !(norm.is_finite() && norm > 0.0) {
            return Err(Error::InvalidDomain("half-plane normal must be non-zero".into()));
        }
        Ok(Domain::HalfPlane { origin, inward_normal: inward_normal / norm })
    }

    /// The upper half-plane `{x_2 > 0}`.
    pub fn upper_half_plane() -> Self {
        Domain::HalfPlane { origin: Point::zeros(), inward_normal: pt(0.0, 1.0) }
    }

    pub fn parametric(curve: ParametricCurve) -> Self {
        Domain::Parametric(Arc::new(curve))
    }

    pub fn polygon(vertices: Vec<Point>) -> Result<Self> {
        Ok(Domain::Polygon(Arc::new(Polygon::new(vertices)?)))
    }

    /// The unit square `[0,1]²`.
    pub fn unit_square() -> Self {
        Domain::polygon(vec![pt(0.0, 0.0), pt(1.0, 0.0), pt(1.0, 1.0), pt(0.0, 1.0)])
            .expect("unit square is a valid polygon")
    }

    /// Short name used in logs and output files.
    pub fn kind(&self) -> &'static str {
        match self {
            Domain::Disk { .. } => "disk",
            Domain::ExteriorDisk { .. } => "exterior-disk",
            Domain::HalfPlane { .. } => "half-plane",
            Domain::Plane => "plane",
            Domain::Parametric(_) => "parametric",
            Domain::Polygon(_) => "polygon",
        }
    }

    /// Whether `x` lies in the open domain.
    pub fn contains(&self, x: Point) -> bool {
        if !(x.x.is_finite() && x.y.is_finite()) {
            return false;
        }
        match self {
            Domain::Disk { center, radius } => (x - center).norm() < *radius,
            Domain::ExteriorDisk { center, radius } => (x - center).norm() > *radius,
            Domain::HalfPlane { origin, inward_normal } => (x - origin).dot(inward_normal) > 0.0,
            Domain::Plane => true,
            Domain::Parametric(curve) => curve.contains(x),
            Domain::Polygon(poly) => poly.contains(x),
        }
    }

    /// Diameter of the domain; infinite for unbounded domains.
    pub fn diameter(&self) -> f64 {
        match self {
            Domain::Disk { radius, .. } => 2.0 * radius,
            Domain::ExteriorDisk { .. } | Domain::HalfPlane { .. } | Domain::Plane => f64::INFINITY,
            Domain::Parametric(curve) => curve.diameter(),
            Domain::Polygon(poly) => poly.diameter(),
        }
    }

    pub fn is_bounded(&self) -> bool {
        self.diameter().is_finite()
    }

    /// Radius `ρ̄` of the uniform interior and exterior disk condition.
    ///
    /// Infinite for the half-plane and the plane, `None` for polygons, whose
    /// corners violate the condition.
    pub fn disk_radius(&self) -> Option<f64> {
        match self {
            Domain::Disk { radius, .. } | Domain::ExteriorDisk { radius, .. } => Some(*radius),
            Domain::HalfPlane { .. } | Domain::Plane => Some(f64::INFINITY),
            Domain::Parametric(curve) => Some(curve.disk_radius()),
            Domain::Polygon(_) => None,
        }
    }

    /// Axis-aligned bounding box `(min, max)` of a bounded domain.
    pub fn bounding_box(&self) -> Option<(Point, Point)> {
        match self {
            Domain::Disk { center, radius } => {
                Some((center - pt(*radius, *radius), center + pt(*radius, *radius)))
            }
            Domain::Parametric(curve) => Some(curve.bounding_box()),
            Domain::Polygon(poly) => Some(poly.bounding_box()),
            _ => None,
        }
    }

    /// Distance `d_1(x)` to the boundary; infinite in the plane.
    pub fn boundary_distance(&self, x: Point) -> f64 {
        match self {
            Domain::Disk { center, radius } => (radius - (x - center).norm()).abs(),
            Domain::ExteriorDisk { center, radius } => ((x - center).norm() - radius).abs(),
            Domain::HalfPlane { origin, inward_normal } => (x - origin).dot(inward_normal).abs(),
            Domain::Plane => f64::INFINITY,
            Domain::Parametric(_) | Domain::Polygon(_) => {
                self.boundary_probe(x).map(|p| p.distance).unwrap_or(f64::INFINITY)
            }
        }
    }

    /// Nearest boundary point with its outward normal and curvature.
    pub fn boundary_probe(&self, x: Point) -> Result<BoundaryProbe> {
        match self {
            Domain::Plane => Err(Error::NoBoundary),
            Domain::Disk { center, radius } => {
                let r = x - center;
                let (dir, ambiguous) = radial_direction(r);
                Ok(BoundaryProbe {
                    distance: (radius - r.norm()).abs(),
                    nearest: center + dir * *radius,
                    normal: dir,
                    curvature: 1.0 / radius,
                    ambiguous,
                    near_vertex: false,
                })
            }
            Domain::ExteriorDisk { center, radius } => {
                let r = x - center;
                let (dir, ambiguous) = radial_direction(r);
                Ok(BoundaryProbe {
                    distance: (r.norm() - radius).abs(),
                    nearest: center + dir * *radius,
                    normal: -dir,
                    curvature: -1.0 / radius,
                    ambiguous,
                    near_vertex: false,
                })
            }
            Domain::HalfPlane { origin, inward_normal } => {
                let d = (x - origin).dot(inward_normal);
                Ok(BoundaryProbe {
                    distance: d.abs(),
                    nearest: x - inward_normal * d,
                    normal: -inward_normal,
                    curvature: 0.0,
                    ambiguous: false,
                    near_vertex: false,
                })
            }
            Domain::Parametric(curve) => Ok(curve.probe(x).0),
            Domain::Polygon(poly) => Ok(poly.probe(x)),
        }
    }

    /// Fails with `PointOutside` unless `x` lies in the open domain.
    pub fn require_inside(&self, x: Point) -> Result<()> {
        if self.contains(x) {
            Ok(())
        } else {
            Err(Error::PointOutside { x: x.x, y: x.y })
        }
    }
}

fn check_radius(radius: f64) -> Result<()> {
    if radius.is_finite() && radius > 0.0 {
        Ok(())
    } else {
        Err(Error::InvalidDomain(format!("radius must be positive and finite, got {radius}")))
    }
}

fn radial_direction(r: Point) -> (Point, bool) {
    let n = r.norm();
    if n == 0.0 {
        (pt(1.0, 0.0), true)
    } else {
        (r / n, false)
    }
}

/// Position, tangent and second derivative of a curve at one parameter value.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CurvePoint {
    pub position: Point,
    pub tangent: Point,
    pub second: Point,
}

impl CurvePoint {
    pub fn speed(&self) -> f64 {
        self.tangent.norm()
    }

    /// Outward normal for a counter-clockwise curve.
    pub fn normal(&self) -> Point {
        pt(self.tangent.y, -self.tangent.x) / self.speed()
    }

    /// Signed curvature for a counter-clockwise curve.
    pub fn curvature(&self) -> f64 {
        let t = self.tangent;
        let s = self.second;
        (t.x * s.y - t.y * s.x) / self.speed().powi(3)
    }
}

/// One row of a tabulated curve: parameter, position and two derivatives.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveRow {
    pub theta: f64,
    pub x: f64,
    pub y: f64,
    pub dx: f64,
    pub dy: f64,
    pub ddx: f64,
    pub ddy: f64,
}

/// Shapes a [`ParametricCurve`] can be built from; all are `2π`-periodic.
#[derive(Clone, Debug, PartialEq)]
pub enum CurveShape {
    Ellipse { center: Point, semi_axes: [f64; 2] },
    /// `offset - a (1 - c e^{iθ})²`, the image of the unit circle under a
    /// univalent map. `c = 1` gives the cusped cardioid
    /// `2a(1 - cos θ)(cos θ, sin θ) + offset`; `c < 1` is smooth.
    Cardioid { a: f64, smoothing: f64, offset: Point },
    /// Rows with strictly increasing `theta` spanning less than one period;
    /// quintic Hermite interpolation between rows, wrapping at `θ_0 + 2π`.
    Table(Vec<CurveRow>),
}

impl CurveShape {
    /// The smooth cardioid used by default, centred in the unit square.
    pub fn default_cardioid() -> Self {
        let a = 0.3;
        let smoothing = 0.7;
        let raw = CurveShape::Cardioid { a, smoothing, offset: Point::zeros() };
        let (lo, hi) = sampled_box(&raw);
        let offset = pt(0.5, 0.5) - (lo + hi) / 2.0;
        CurveShape::Cardioid { a, smoothing, offset }
    }

    fn validate(&self) -> Result<()> {
        match self {
            CurveShape::Ellipse { semi_axes, .. } => {
                if semi_axes.iter().all(|a| a.is_finite() && *a > 0.0) {
                    Ok(())
                } else {
                    Err(Error::InvalidDomain("ellipse semi-axes must be positive".into()))
                }
            }
            CurveShape::Cardioid { a, smoothing, .. } => {
                if !(a.is_finite() && *a > 0.0) {
                    return Err(Error::InvalidDomain("cardioid scale must be positive".into()));
                }
                if !(*smoothing > 0.0 && *smoothing < 1.0) {
                    return Err(Error::InvalidDomain(format!(
                        "cardioid smoothing must lie in (0, 1) for a C² boundary, got {smoothing}"
                    )));
                }
                Ok(())
            }
            CurveShape::Table(rows) => {
                if rows.len() < 8 {
                    return Err(Error::InvalidDomain("curve table needs at least 8 rows".into()));
                }
                let first = rows[0].theta;
                for w in rows.windows(2) {
                    if !(w[1].theta > w[0].theta) {
                        return Err(Error::InvalidDomain("curve table theta must increase".into()));
                    }
                }
                if !(rows[rows.len() - 1].theta < first + TAU) {
                    return Err(Error::InvalidDomain("curve table must span less than 2π".into()));
                }
                Ok(())
            }
        }
    }

    /// Evaluates the shape in its own orientation.
    pub fn eval(&self, theta: f64) -> CurvePoint {
        match self {
            CurveShape::Ellipse { center, semi_axes: [a, b] } => {
                let (s, c) = theta.sin_cos();
                CurvePoint {
                    position: center + pt(a * c, b * s),
                    tangent: pt(-a * s, b * c),
                    second: pt(-a * c, -b * s),
                }
            }
            CurveShape::Cardioid { a, smoothing: c, offset } => {
                // w = offset - a + 2ac e^{iθ} - a c² e^{2iθ}
                let (s1, c1) = theta.sin_cos();
                let (s2, c2) = (2.0 * theta).sin_cos();
                let k1 = 2.0 * a * c;
                let k2 = a * c * c;
                CurvePoint {
                    position: offset + pt(-a + k1 * c1 - k2 * c2, k1 * s1 - k2 * s2),
                    tangent: pt(-k1 * s1 + 2.0 * k2 * s2, k1 * c1 - 2.0 * k2 * c2),
                    second: pt(-k1 * c1 + 4.0 * k2 * c2, -k1 * s1 + 4.0 * k2 * s2),
                }
            }
            CurveShape::Table(rows) => eval_table(rows, theta),
        }
    }
}

fn sampled_box(shape: &CurveShape) -> (Point, Point) {
    let mut lo = pt(f64::INFINITY, f64::INFINITY);
    let mut hi = -lo;
    for i in 0..4096 {
        let p = shape.eval(TAU * i as f64 / 4096.0).position;
        lo = lo.inf(&p);
        hi = hi.sup(&p);
    }
    (lo, hi)
}

fn eval_table(rows: &[CurveRow], theta: f64) -> CurvePoint {
    let n = rows.len();
    let t0 = rows[0].theta;
    let t = t0 + (theta - t0).rem_euclid(TAU);
    // Interval [rows[i], rows[i+1]] with wrap-around after the last row.
    let i = match rows.binary_search_by(|r| r.theta.partial_cmp(&t).unwrap()) {
        Ok(i) => i.min(n - 1),
        Err(i) => i - 1,
    };
    let a = rows[i];
    let (b, tb) = if i + 1 < n { (rows[i + 1], rows[i + 1].theta) } else { (rows[0], t0 + TAU) };
    let len = tb - a.theta;
    let u = (t - a.theta) / len;
    let (v, dv, ddv) = hermite5_basis(u);
    let comb = |w: &[f64; 6], pa: f64, da: f64, dda: f64, pb: f64, db: f64, ddb: f64| {
        w[0] * pa + w[1] * len * da + w[2] * len * len * dda + w[3] * pb + w[4] * len * db
            + w[5] * len * len * ddb
    };
    let px = |w: &[f64; 6]| comb(w, a.x, a.dx, a.ddx, b.x, b.dx, b.ddx);
    let py = |w: &[f64; 6]| comb(w, a.y, a.dy, a.ddy, b.y, b.dy, b.ddy);
    CurvePoint {
        position: pt(px(&v), py(&v)),
        tangent: pt(px(&dv), py(&dv)) / len,
        second: pt(px(&ddv), py(&ddv)) / (len * len),
    }
}

/// Quintic Hermite basis on `[0,1]` and its first two derivatives in `u`.
fn hermite5_basis(u: f64) -> ([f64; 6], [f64; 6], [f64; 6]) {
    let u2 = u * u;
    let u3 = u2 * u;
    let u4 = u3 * u;
    let u5 = u4 * u;
    let v = [
        1.0 - 10.0 * u3 + 15.0 * u4 - 6.0 * u5,
        u - 6.0 * u3 + 8.0 * u4 - 3.0 * u5,
        0.5 * (u2 - 3.0 * u3 + 3.0 * u4 - u5),
        10.0 * u3 - 15.0 * u4 + 6.0 * u5,
        -4.0 * u3 + 7.0 * u4 - 3.0 * u5,
        0.5 * (u3 - 2.0 * u4 + u5),
    ];
    let dv = [
        -30.0 * u2 + 60.0 * u3 - 30.0 * u4,
        1.0 - 18.0 * u2 + 32.0 * u3 - 15.0 * u4,
        0.5 * (2.0 * u - 9.0 * u2 + 12.0 * u3 - 5.0 * u4),
        30.0 * u2 - 60.0 * u3 + 30.0 * u4,
        -12.0 * u2 + 28.0 * u3 - 15.0 * u4,
        0.5 * (3.0 * u2 - 8.0 * u3 + 5.0 * u4),
    ];
    let ddv = [
        -60.0 * u + 180.0 * u2 - 120.0 * u3,
        -36.0 * u + 96.0 * u2 - 60.0 * u3,
        0.5 * (2.0 - 18.0 * u + 36.0 * u2 - 20.0 * u3),
        60.0 * u - 180.0 * u2 + 120.0 * u3,
        -24.0 * u + 84.0 * u2 - 60.0 * u3,
        0.5 * (6.0 * u - 24.0 * u2 + 20.0 * u3),
    ];
    (v, dv, ddv)
}

/// A closed `C²` curve bounding a simply connected domain.
///
/// The parametrisation is normalised to run counter-clockwise, so the
/// interior lies to the left of the tangent.
#[derive(Clone, Debug)]
pub struct ParametricCurve {
    shape: CurveShape,
    reversed: bool,
    samples: Vec<Point>,
    rho: f64,
    diameter: f64,
    bbox: (Point, Point),
}

impl ParametricCurve {
    /// Builds the curve; `disk_radius` overrides the default `ρ̄ = 1/max|κ|`.
    pub fn new(shape: CurveShape, disk_radius: Option<f64>) -> Result<Self> {
        shape.validate()?;
        let m = NEAREST_POINT_SAMPLES;
        let raw: Vec<CurvePoint> = (0..m).map(|i| shape.eval(TAU * i as f64 / m as f64)).collect();
        if raw.iter().any(|p| !(p.speed() > 0.0) || !p.position.x.is_finite()) {
            return Err(Error::InvalidDomain("curve must be regular".into()));
        }
        let area: f64 = (0..m)
            .map(|i| {
                let a = raw[i].position;
                let b = raw[(i + 1) % m].position;
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
            / 2.0;
        if area == 0.0 {
            return Err(Error::InvalidDomain("curve encloses no area".into()));
        }
        let mut curve = ParametricCurve {
            shape,
            reversed: area < 0.0,
            samples: Vec::new(),
            rho: 0.0,
            diameter: 0.0,
            bbox: (Point::zeros(), Point::zeros()),
        };
        let pts: Vec<CurvePoint> = (0..m).map(|i| curve.eval(TAU * i as f64 / m as f64)).collect();
        let max_kappa = pts.iter().map(|p| p.curvature().abs()).fold(0.0, f64::max);
        curve.rho = match disk_radius {
            Some(r) if r.is_finite() && r > 0.0 => r,
            Some(r) => return Err(Error::InvalidDomain(format!("invalid disk radius {r}"))),
            None if max_kappa > 0.0 => 1.0 / max_kappa,
            None => f64::INFINITY,
        };
        curve.samples = pts.iter().map(|p| p.position).collect();
        let mut diam = 0.0f64;
        for (i, p) in curve.samples.iter().enumerate() {
            for q in &curve.samples[i + 1..] {
                diam = diam.max((p - q).norm_squared());
            }
        }
        curve.diameter = diam.sqrt();
        let mut lo = pt(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in &curve.samples {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        curve.bbox = (lo, hi);
        Ok(curve)
    }

    pub fn shape(&self) -> &CurveShape {
        &self.shape
    }

    /// Evaluates the counter-clockwise parametrisation at `theta`.
    pub fn eval(&self, theta: f64) -> CurvePoint {
        if self.reversed {
            let p = self.shape.eval(-theta);
            CurvePoint { position: p.position, tangent: -p.tangent, second: p.second }
        } else {
            self.shape.eval(theta)
        }
    }

    pub fn disk_radius(&self) -> f64 {
        self.rho
    }

    pub fn diameter(&self) -> f64 {
        self.diameter
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        self.bbox
    }

    /// Interior test: the point lies on the inner side of its nearest boundary point.
    pub fn contains(&self, x: Point) -> bool {
        let (probe, _) = self.probe(x);
        probe.distance > 0.0 && (x - probe.nearest).dot(&probe.normal) < 0.0
    }

    /// Nearest-point probe and the parameter of the nearest point.
    pub fn probe(&self, x: Point) -> (BoundaryProbe, f64) {
        let m = self.samples.len();
        let step = TAU / m as f64;
        let d2: Vec<f64> = self.samples.iter().map(|p| (p - x).norm_squared()).collect();
        let best = d2.iter().cloned().fold(f64::INFINITY, f64::min);
        // Local minima of the sampled distance that could still win after refinement.
        let slack = {
            let max_gap = (0..m)
                .map(|i| (self.samples[(i + 1) % m] - self.samples[i]).norm())
                .fold(0.0, f64::max);
            (best.sqrt() + max_gap).powi(2)
        };
        let mut refined: Vec<(f64, f64, Point)> = Vec::new();
        for i in 0..m {
            let prev = d2[(i + m - 1) % m];
            let next = d2[(i + 1) % m];
            if d2[i] <= prev && d2[i] <= next && d2[i] <= slack {
                let theta = self.refine(x, i as f64 * step, step);
                let p = self.eval(theta).position;
                refined.push(((p - x).norm(), theta, p));
            }
        }
        refined.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let (dist, theta, nearest) = refined[0];
        let scale = 1e-9 * (1.0 + dist);
        let ambiguous = refined[1..]
            .iter()
            .any(|(d, _, p)| (d - dist).abs() <= scale && (p - nearest).norm() > 1e-6 * self.diameter);
        let cp = self.eval(theta);
        (
            BoundaryProbe {
                distance: dist,
                nearest,
                normal: cp.normal(),
                curvature: cp.curvature(),
                ambiguous,
                near_vertex: false,
            },
            theta,
        )
    }

    /// Minimises `|γ(θ) - x|²` on `[θ0 - step, θ0 + step]`.
    fn refine(&self, x: Point, theta0: f64, step: f64) -> f64 {
        let deriv = |t: f64| {
            let c = self.eval(t);
            let r = c.position - x;
            (r.dot(&c.tangent), c.tangent.norm_squared() + r.dot(&c.second))
        };
        let mut lo = theta0 - step;
        let mut hi = theta0 + step;
        let (flo, _) = deriv(lo);
        let (fhi, _) = deriv(hi);
        if !(flo <= 0.0 && fhi >= 0.0) {
            return self.golden(x, lo, hi);
        }
        let mut t = theta0;
        for _ in 0..100 {
            let (g, gp) = deriv(t);
            if g == 0.0 {
                return t;
            }
            if g < 0.0 {
                lo = t;
            } else {
                hi = t;
            }
            let newton = t - g / gp;
            let next = if gp > 0.0 && newton > lo && newton < hi { newton } else { 0.5 * (lo + hi) };
            if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) || hi - lo <= 1e-15 {
                return next;
            }
            t = next;
        }
        t
    }

    fn golden(&self, x: Point, mut a: f64, mut b: f64) -> f64 {
        let f = |t: f64| (self.eval(t).position - x).norm_squared();
        let r = 0.5 * (5f64.sqrt() - 1.0);
        let mut c = b - r * (b - a);
        let mut d = a + r * (b - a);
        let (mut fc, mut fd) = (f(c), f(d));
        while b - a > 1e-14 {
            if fc < fd {
                b = d;
                d = c;
                fd = fc;
                c = b - r * (b - a);
                fc = f(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + r * (b - a);
                fd = f(d);
            }
        }
        0.5 * (a + b)
    }
}

/// A simple polygon whose edges are horizontal or vertical.
#[derive(Clone, Debug)]
pub struct Polygon {
    vertices: Vec<Point>,
    convex: Vec<bool>,
}

impl Polygon {
    /// Accepts either orientation; vertices are stored counter-clockwise.
    pub fn new(mut vertices: Vec<Point>) -> Result<Self> {
        if vertices.len() < 4 {
            return Err(Error::InvalidDomain("polygon needs at least four vertices".into()));
        }
        let n = vertices.len();
        for i in 0..n {
            let e = vertices[(i + 1) % n] - vertices[i];
            if e.norm() == 0.0 {
                return Err(Error::InvalidDomain("polygon has a repeated vertex".into()));
            }
            if e.x != 0.0 && e.y != 0.0 {
                return Err(Error::InvalidDomain(format!("polygon edge {i} is not axis-aligned")));
            }
        }
        let area: f64 = (0..n)
            .map(|i| {
                let a = vertices[i];
                let b = vertices[(i + 1) % n];
                a.x * b.y - b.x * a.y
            })
            .sum::<f64>()
            / 2.0;
        if area == 0.0 {
            return Err(Error::InvalidDomain("polygon encloses no area".into()));
        }
        if area < 0.0 {
            vertices.reverse();
        }
        let convex = (0..n)
            .map(|i| {
                let a = vertices[(i + n - 1) % n];
                let b = vertices[i];
                let c = vertices[(i + 1) % n];
                let e1 = b - a;
                let e2 = c - b;
                e1.x * e2.y - e1.y * e2.x > 0.0
            })
            .collect();
        Ok(Polygon { vertices, convex })
    }

    /// Vertices in counter-clockwise order.
    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    /// Whether the interior angle at vertex `i` is a right angle (rather than 3π/2).
    pub fn is_convex_corner(&self, i: usize) -> bool {
        self.convex[i]
    }

    pub fn edge(&self, i: usize) -> (Point, Point) {
        (self.vertices[i], self.vertices[(i + 1) % self.vertices.len()])
    }

    /// Outward normal of edge `i`.
    pub fn edge_normal(&self, i: usize) -> Point {
        let (a, b) = self.edge(i);
        let t = (b - a).normalize();
        pt(t.y, -t.x)
    }

    pub fn diameter(&self) -> f64 {
        let mut d = 0.0f64;
        for (i, p) in self.vertices.iter().enumerate() {
            for q in &self.vertices[i + 1..] {
                d = d.max((p - q).norm());
            }
        }
        d
    }

    pub fn bounding_box(&self) -> (Point, Point) {
        let mut lo = pt(f64::INFINITY, f64::INFINITY);
        let mut hi = -lo;
        for p in &self.vertices {
            lo = lo.inf(p);
            hi = hi.sup(p);
        }
        (lo, hi)
    }

    /// Strict interior test by ray casting.
    pub fn contains(&self, x: Point) -> bool {
        if self.probe_edges(x).0 == 0.0 {
            return false;
        }
        let n = self.vertices.len();
        let mut inside = false;
        for i in 0..n {
            let a = self.vertices[i];
            let b = self.vertices[(i + 1) % n];
            if (a.y > x.y) != (b.y > x.y) {
                let t = (x.y - a.y) / (b.y - a.y);
                if x.x < a.x + t * (b.x - a.x) {
                    inside = !inside;
                }
            }
        }
        inside
    }

    /// Closest distance, nearest point and edge index, and whether another
    /// edge attains the same distance at a different point.
    fn probe_edges(&self, x: Point) -> (f64, Point, usize, bool) {
        let n = self.vertices.len();
        let mut best = (f64::INFINITY, x, 0usize);
        let mut candidates = Vec::with_capacity(n);
        for i in 0..n {
            let (a, b) = self.edge(i);
            let e = b - a;
            let t = ((x - a).dot(&e) / e.norm_squared()).clamp(0.0, 1.0);
            let p = a + e * t;
            let d = (x - p).norm();
            candidates.push((d, p));
            if d < best.0 {
                best = (d, p, i);
            }
        }
        let tol = 1e-12 * (1.0 + best.0);
        let ambiguous =
            candidates.iter().any(|(d, p)| (d - best.0).abs() <= tol && (p - best.1).norm() > tol);
        (best.0, best.1, best.2, ambiguous)
    }

    /// Index of the edge nearest to `x`.
    pub fn nearest_edge(&self, x: Point) -> usize {
        self.probe_edges(x).2
    }

    pub fn probe(&self, x: Point) -> BoundaryProbe {
        let (distance, nearest, edge, ambiguous) = self.probe_edges(x);
        let near_vertex = self.vertices.iter().any(|v| (v - nearest).norm() <= VERTEX_TOLERANCE);
        BoundaryProbe {
            distance,
            nearest,
            normal: self.edge_normal(edge),
            curvature: 0.0,
            ambiguous,
            near_vertex,
        }
    }
}

/// Sign of the Burgers vector along the dislocation line.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "i8", into = "i8")]
pub enum Burgers {
    Positive,
    Negative,
}

impl Burgers {
    pub fn sign(self) -> f64 {
        match self {
            Burgers::Positive => 1.0,
            Burgers::Negative => -1.0,
        }
    }
}

impl TryFrom<i8> for Burgers {
    type Error = String;

    fn try_from(v: i8) -> std::result::Result<Self, String> {
        match v {
            1 => Ok(Burgers::Positive),
            -1 => Ok(Burgers::Negative),
            _ => Err(format!("Burgers modulus must be +1 or -1, got {v}")),
        }
    }
}

impl From<Burgers> for i8 {
    fn from(b: Burgers) -> i8 {
        match b {
            Burgers::Positive => 1,
            Burgers::Negative => -1,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Dislocation {
    pub position: Point,
    pub burgers: Burgers,
}

impl Dislocation {
    pub fn new(position: Point, burgers: Burgers) -> Self {
        Dislocation { position, burgers }
    }
}

/// Distinct dislocations inside a domain.
#[derive(Clone, Debug, PartialEq)]
pub struct Configuration {
    dislocations: Vec<Dislocation>,
}

impl Configuration {
    /// Checks that there is at least one dislocation, all lie in `domain` and
    /// no two coincide.
    pub fn new(dislocations: Vec<Dislocation>, domain: &Domain) -> Result<Self> {
        if dislocations.is_empty() {
            return Err(Error::PreconditionViolated("configuration is empty".into()));
        }
        for d in &dislocations {
            domain.require_inside(d.position)?;
        }
        for (i, a) in dislocations.iter().enumerate() {
            if dislocations[i + 1..].iter().any(|b| (b.position - a.position).norm() < COINCIDENCE_TOLERANCE) {
                return Err(Error::CoincidentPoints);
            }
        }
        Ok(Configuration { dislocations })
    }

    /// Builds a configuration without domain checks; used for integrator stages.
    pub fn unchecked(dislocations: Vec<Dislocation>) -> Self {
        Configuration { dislocations }
    }

    pub fn len(&self) -> usize {
        self.dislocations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dislocations.is_empty()
    }

    pub fn dislocations(&self) -> &[Dislocation] {
        &self.dislocations
    }

    pub fn position(&self, i: usize) -> Point {
        self.dislocations[i].position
    }

    pub fn sign(&self, i: usize) -> f64 {
        self.dislocations[i].burgers.sign()
    }

    pub fn positions(&self) -> Vec<Point> {
        self.dislocations.iter().map(|d| d.position).collect()
    }

    /// Positions flattened as `[x_1, y_1, x_2, y_2, ...]`.
    pub fn state(&self) -> Vec<f64> {
        self.dislocations.iter().flat_map(|d| [d.position.x, d.position.y]).collect()
    }

    /// Same dislocations moved to the positions in `state`.
    pub fn with_state(&self, state: &[f64]) -> Configuration {
        let dislocations = self
            .dislocations
            .iter()
            .enumerate()
            .map(|(i, d)| Dislocation::new(pt(state[2 * i], state[2 * i + 1]), d.burgers))
            .collect();
        Configuration { dislocations }
    }

    /// Removes the dislocations at the given indices.
    pub fn without(&self, skip: &[usize]) -> Configuration {
        let dislocations = self
            .dislocations
            .iter()
            .enumerate()
            .filter(|(i, _)| !skip.contains(i))
            .map(|(_, d)| *d)
            .collect();
        Configuration { dislocations }
    }
}

/// `d_n(z)`: the smallest boundary distance or pairwise separation.
///
/// Infinite for an empty configuration and for a single dislocation in the plane.
pub fn min_separation(config: &Configuration, domain: &Domain) -> f64 {
    let pos = config.positions();
    let mut d = pos.iter().map(|p| domain.boundary_distance(*p)).fold(f64::INFINITY, f64::min);
    for (i, p) in pos.iter().enumerate() {
        for q in &pos[i + 1..] {
            d = d.min((p - q).norm());
        }
    }
    d
}

/// Membership in `D_{n,δ,γ}`: the first dislocation is within `δ` of the
/// boundary and the others are `γ`-separated from each other and the boundary.
pub fn in_class_d(config: &Configuration, domain: &Domain, delta: f64, gamma: f64) -> Result<bool> {
    if !(delta > 0.0 && delta < gamma) {
        return Err(Error::ParameterOrder(format!("need 0 < δ < γ, got δ={delta}, γ={gamma}")));
    }
    if !(gamma < domain.diameter() / 2.0) {
        return Err(Error::ParameterOrder(format!("need γ < diam/2, got γ={gamma}")));
    }
    let near = domain.boundary_distance(config.position(0)) < delta;
    let rest = config.without(&[0]);
    Ok(near && min_separation(&rest, domain) > gamma)
}

/// Membership in `C_{n,ζ,η}`: the first two dislocations are within `ζ` of
/// each other and `η`-separated from everything else.
pub fn in_class_c(config: &Configuration, domain: &Domain, zeta: f64, eta: f64) -> Result<bool> {
    if !(zeta > 0.0 && zeta < eta) {
        return Err(Error::ParameterOrder(format!("need 0 < ζ < η, got ζ={zeta}, η={eta}")));
    }
    if config.len() < 2 {
        return Err(Error::PreconditionViolated("class C needs at least two dislocations".into()));
    }
    let (z1, z2) = (config.position(0), config.position(1));
    if !((z1 - z2).norm() < zeta) {
        return Ok(false);
    }
    let rest = config.without(&[0, 1]);
    if min_separation(&rest, domain) <= eta {
        return Ok(false);
    }
    let others = rest.positions();
    let clear = [z1, z2].iter().all(|z| {
        domain.boundary_distance(*z) > eta && others.iter().all(|w| (z - w).norm() > eta)
    });
    Ok(clear)
}

/// Unit vector at angle `theta`.
pub fn direction(theta: f64) -> Point {
    pt(theta.cos(), theta.sin())
}

/// Angle between two non-zero vectors, in `[0, π]`.
pub fn angle_between(a: Point, b: Point) -> f64 {
    let c = a.dot(&b) / (a.norm() * b.norm());
    c.clamp(-1.0, 1.0).acos()
}

