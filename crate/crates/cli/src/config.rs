//! Run configuration, read from TOML.
//!
//! Every section is optional; each subcommand reads the sections it needs.
//!
//! ```toml
//! seed = 42
//! output_dir = "out"
//! ensemble_size = 500
//! histogram_bin_width = 0.005
//!
//! [domain]               # kind: disk | exterior-disk | half-plane | plane |
//! kind = "disk"          #       ellipse | cardioid | curve | polygon | unit-square
//! center = [0.0, 0.0]
//! radius = 1.0
//!
//! [[dislocations]]       # explicit start for `simulate`
//! position = [0.0, 0.9]
//! burgers = 1
//!
//! [start_circle]         # alternatively a ring of single-dislocation starts
//! count = 80
//! radius = 0.1           # center omitted: the equilibrium of h is located
//!
//! [sampling]             # class D_{n,δ0,γ0} for `ensemble`
//! n = 2
//! delta0 = 0.2
//! gamma0 = 0.5
//! burgers = "random-rest"   # or { fixed = [1, -1] }
//!
//! [mobility]
//! kind = "identity"      # or "glide" with directions = [[1, 0], [0, 1]]
//!
//! [integration]          # disloc_core::IntegrationParams
//! t_max = 1.0
//!
//! [numeric]              # disloc_core::NumericConfig
//! boundary_nodes = 512
//!
//! [probe]                # `kernel-probe`: explicit points and/or a grid
//! points = [[0.5, 0.5]]
//! grid = { lo = [0.1, 0.1], hi = [0.9, 0.9], nx = 9, ny = 9 }
//!
//! [bounds]               # `bounds`: scenario = boundary | pair | fatal
//! scenario = "boundary"
//! n = 1
//! rho = 1.0
//! delta0 = 0.1
//!
//! [oracle]               # `oracle`: half-plane-single | disk-single |
//! case = "disk-single"   #   disk-symmetric-pair | plane-pair
//! delta = 0.1
//! compare = true
//! ```

use std::path::{Path, PathBuf};

use disloc_core::geometry::CurveRow;
use disloc_core::{
    pt, BoundaryScenario, Burgers, CurveShape, Domain, GlideSet, IntegrationParams, Mobility, NumericConfig,
    PairScenario, ParametricCurve, Point,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

fn p([x, y]: [f64; 2]) -> Point {
    pt(x, y)
}

fn one() -> f64 {
    1.0
}

fn up() -> [f64; 2] {
    [0.0, 1.0]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DomainSpec {
    Disk {
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "one")]
        radius: f64,
    },
    ExteriorDisk {
        #[serde(default)]
        center: [f64; 2],
        #[serde(default = "one")]
        radius: f64,
    },
    HalfPlane {
        #[serde(default)]
        origin: [f64; 2],
        #[serde(default = "up")]
        inward_normal: [f64; 2],
    },
    Plane,
    Ellipse {
        #[serde(default)]
        center: [f64; 2],
        semi_axes: [f64; 2],
        #[serde(default, skip_serializing_if = "Option::is_none")]
        disk_radius: Option<f64>,
    },
    /// Omitted fields give the smooth cardioid centred in the unit square.
    Cardioid {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        a: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        smoothing: Option<f64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        offset: Option<[f64; 2]>,
    },
    /// Tabulated boundary curve.
    Curve {
        rows: Vec<CurveRow>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        disk_radius: Option<f64>,
    },
    Polygon {
        vertices: Vec<[f64; 2]>,
    },
    UnitSquare,
}

impl Default for DomainSpec {
    fn default() -> Self {
        DomainSpec::Disk { center: [0.0, 0.0], radius: 1.0 }
    }
}

impl DomainSpec {
    pub fn build(&self) -> CliResult<Domain> {
        let d = match self {
            DomainSpec::Disk { center, radius } => Domain::disk(p(*center), *radius)?,
            DomainSpec::ExteriorDisk { center, radius } => Domain::exterior_disk(p(*center), *radius)?,
            DomainSpec::HalfPlane { origin, inward_normal } => Domain::half_plane(p(*origin), p(*inward_normal))?,
            DomainSpec::Plane => Domain::Plane,
            DomainSpec::Ellipse { center, semi_axes, disk_radius } => Domain::parametric(ParametricCurve::new(
                CurveShape::Ellipse { center: p(*center), semi_axes: *semi_axes },
                *disk_radius,
            )?),
            DomainSpec::Cardioid { a: None, smoothing: None, offset: None } => {
                Domain::parametric(ParametricCurve::new(CurveShape::default_cardioid(), None)?)
            }
            DomainSpec::Cardioid { a, smoothing, offset } => {
                let a = a.unwrap_or(0.3);
                let smoothing = smoothing.unwrap_or(0.7);
                let offset = match offset {
                    Some(o) => p(*o),
                    None => {
                        let raw = ParametricCurve::new(CurveShape::Cardioid { a, smoothing, offset: Point::zeros() }, None)?;
                        let (lo, hi) = raw.bounding_box();
                        pt(0.5, 0.5) - (lo + hi) / 2.0
                    }
                };
                Domain::parametric(ParametricCurve::new(CurveShape::Cardioid { a, smoothing, offset }, None)?)
            }
            DomainSpec::Curve { rows, disk_radius } => {
                Domain::parametric(ParametricCurve::new(CurveShape::Table(rows.clone()), *disk_radius)?)
            }
            DomainSpec::Polygon { vertices } => Domain::polygon(vertices.iter().copied().map(p).collect())?,
            DomainSpec::UnitSquare => Domain::unit_square(),
        };
        Ok(d)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DislocationSpec {
    pub position: [f64; 2],
    pub burgers: Burgers,
}

/// A ring of single-dislocation starts.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StartCircle {
    /// `None` locates the critical point of `h` nearest the bounding-box centre.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub center: Option<[f64; 2]>,
    pub radius: f64,
    pub count: usize,
    #[serde(default = "positive")]
    pub burgers: Burgers,
}

fn positive() -> Burgers {
    Burgers::Positive
}

/// How Burgers moduli are assigned to sampled configurations.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BurgersRule {
    /// `b_1 = +1`, the others independently `±1` with equal probability.
    #[default]
    RandomRest,
    Fixed(Vec<Burgers>),
}

/// Uniform rejection sampling in `D_{n,δ0,γ0}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SamplingSpec {
    pub n: usize,
    pub delta0: f64,
    pub gamma0: f64,
    #[serde(default)]
    pub burgers: BurgersRule,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum MobilitySpec {
    #[default]
    Identity,
    Glide {
        directions: Vec<[f64; 2]>,
    },
}

impl MobilitySpec {
    pub fn build(&self) -> CliResult<Mobility> {
        Ok(match self {
            MobilitySpec::Identity => Mobility::Identity,
            MobilitySpec::Glide { directions } => {
                let dirs: Vec<Point> = directions.iter().copied().map(p).collect();
                Mobility::Glide(GlideSet::new(&dirs)?)
            }
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeGrid {
    pub lo: [f64; 2],
    pub hi: [f64; 2],
    pub nx: usize,
    pub ny: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub points: Vec<[f64; 2]>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<ProbeGrid>,
    /// Source `y` for the `k` column; `None` reports `k(x, x)`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<[f64; 2]>,
}

impl ProbeSpec {
    /// Explicit points first, then the grid in row-major order.
    pub fn points(&self) -> Vec<Point> {
        let mut out: Vec<Point> = self.points.iter().copied().map(p).collect();
        if let Some(g) = &self.grid {
            let step = |lo: f64, hi: f64, n: usize, i: usize| {
                if n <= 1 {
                    lo
                } else {
                    lo + (hi - lo) * i as f64 / (n - 1) as f64
                }
            };
            for j in 0..g.ny {
                for i in 0..g.nx {
                    out.push(pt(step(g.lo[0], g.hi[0], g.nx, i), step(g.lo[1], g.hi[1], g.ny, j)));
                }
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FatalSpec {
    pub n: usize,
    pub rho: f64,
    pub sigma: f64,
    pub gamma: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scenario", rename_all = "kebab-case")]
pub enum BoundsSpec {
    Boundary(BoundaryScenario),
    Pair(PairScenario),
    Fatal(FatalSpec),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum OracleCase {
    HalfPlaneSingle {
        delta: f64,
    },
    DiskSingle {
        delta: f64,
    },
    /// `r0` omitted means the equilibrium radius.
    DiskSymmetricPair {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        r0: Option<f64>,
    },
    PlanePair {
        z0: [f64; 2],
        b1b2: f64,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OracleSpec {
    #[serde(flatten)]
    pub case: OracleCase,
    #[serde(default)]
    pub compare: bool,
}

fn default_output_dir() -> PathBuf {
    PathBuf::from("out")
}

fn default_ensemble_size() -> usize {
    500
}

fn default_bin_width() -> f64 {
    0.005
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_output_dir")]
    pub output_dir: PathBuf,
    #[serde(default = "default_ensemble_size")]
    pub ensemble_size: usize,
    #[serde(default = "default_bin_width")]
    pub histogram_bin_width: f64,
    #[serde(default)]
    pub domain: DomainSpec,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dislocations: Vec<DislocationSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub start_circle: Option<StartCircle>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sampling: Option<SamplingSpec>,
    #[serde(default)]
    pub mobility: MobilitySpec,
    #[serde(default)]
    pub integration: IntegrationParams,
    #[serde(default)]
    pub numeric: NumericConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub probe: Option<ProbeSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bounds: Option<BoundsSpec>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub oracle: Option<OracleSpec>,
}

impl Default for RunConfig {
    fn default() -> Self {
        toml::from_str("").expect("empty config parses")
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> CliResult<Self> {
        let config: RunConfig = toml::from_str(text).map_err(|e| CliError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> CliResult<String> {
        toml::to_string(self).map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn validate(&self) -> CliResult<()> {
        if self.ensemble_size == 0 {
            return Err(CliError::Config("ensemble_size must be at least 1".into()));
        }
        if !(self.histogram_bin_width > 0.0) {
            return Err(CliError::Config("histogram_bin_width must be positive".into()));
        }
        if let Some(s) = &self.sampling {
            if s.n == 0 {
                return Err(CliError::Config("sampling.n must be at least 1".into()));
            }
            if !(s.delta0 > 0.0 && s.delta0 < s.gamma0) {
                return Err(CliError::Config(format!(
                    "sampling needs 0 < delta0 < gamma0, got delta0={}, gamma0={}",
                    s.delta0, s.gamma0
                )));
            }
            if let BurgersRule::Fixed(b) = &s.burgers {
                if b.len() != s.n {
                    return Err(CliError::Config(format!("fixed Burgers list has {} entries, n = {}", b.len(), s.n)));
                }
            }
        }
        if let Some(c) = &self.start_circle {
            if !(c.radius > 0.0) || c.count == 0 {
                return Err(CliError::Config("start_circle needs a positive radius and count".into()));
            }
        }
        Ok(())
    }
}
