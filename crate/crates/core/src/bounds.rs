//! Rigorous estimates: kernel gradient bounds near the boundary, the
//! fatal-force estimate and explicit collision-time bounds for the boundary
//! and pair collision scenarios.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::dynamics::{Termination, Trajectory};
use crate::error::{Error, Result};
use crate::geometry::{Domain, Point};

/// `C_σ = log 2 + (2σ² - 9σ + 8) / (4(1-σ)(2-σ)²)` for `σ ∈ (0, 1)`.
pub fn c_sigma(sigma: f64) -> Result<f64> {
    if !(sigma > 0.0 && sigma < 1.0) {
        return Err(Error::InvalidDomain(format!("σ must lie in (0, 1), got {sigma}")));
    }
    Ok(2f64.ln() + (2.0 * sigma * sigma - 9.0 * sigma + 8.0) / (4.0 * (1.0 - sigma) * (2.0 - sigma).powi(2)))
}

/// `λ_Ω = |log(diam/2)|`.
pub fn lambda_omega(domain: &Domain) -> Result<f64> {
    let diam = domain.diameter();
    if !diam.is_finite() {
        return Err(Error::UnboundedDomain);
    }
    Ok((diam / 2.0).ln().abs())
}

fn disk_radius(domain: &Domain) -> Result<f64> {
    domain
        .disk_radius()
        .ok_or_else(|| Error::PreconditionViolated(format!("a {} has no disk radius", domain.kind())))
}

/// Upper bounds on `|∇_x G(x,y)|` and `|∇_y G(x,y)|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GradGBounds {
    /// Requires `d_1(x) < ρ̄` and `d_1(x) < |x - y|`; `None` otherwise.
    pub grad_x: Option<f64>,
    pub grad_y: f64,
}

/// Gradient bounds for the Green's function from comparison with the
/// exterior tangent disk at the point of the boundary nearest to `x`.
pub fn grad_g_bounds(domain: &Domain, x: Point, y: Point) -> Result<GradGBounds> {
    domain.require_inside(x)?;
    domain.require_inside(y)?;
    if x == y {
        return Err(Error::CoincidentPoints);
    }
    let probe = domain.boundary_probe(x)?;
    let rho = disk_radius(domain)?;
    let d = probe.distance;
    let r = (x - y).norm();
    let grad_x = if d < rho && d < r {
        let denom = PI * (r - d).powi(2);
        Some(if rho.is_finite() {
            let centre = probe.nearest + probe.normal * rho;
            2.0 * ((y - centre).norm_squared() - rho * rho) * (rho + d) / (rho * rho * denom)
        } else {
            // Limit ρ̄ → ∞: the tangent disk becomes the tangent half-plane.
            4.0 * (probe.nearest - y).dot(&probe.normal) / denom
        })
    } else {
        None
    };
    let grad_y = 1.0 / (2.0 * PI * r) + 1.0 / (2.0 * PI * domain.boundary_distance(y));
    Ok(GradGBounds { grad_x, grad_y })
}

/// `|∇h(x)| ≤ 2 max(-log d_1(x), λ_Ω) / (π d_1(x))` in a bounded domain.
pub fn grad_h_far_bound(domain: &Domain, x: Point) -> Result<f64> {
    domain.require_inside(x)?;
    let lambda = lambda_omega(domain)?;
    let d = domain.boundary_distance(x);
    Ok(2.0 * (-d.ln()).max(lambda) / (PI * d))
}

/// Near-boundary asymptotics `|∇h(x) + ν/(2π d_1)| ≤ C_σ/(π ρ̄)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NearBound {
    /// Leading term `-ν/(2π d_1)`.
    pub leading: Point,
    pub radius: f64,
}

/// Valid for `d_1(x) ≤ σ ρ̄`.
pub fn grad_h_near_bound(domain: &Domain, x: Point, sigma: f64) -> Result<NearBound> {
    domain.require_inside(x)?;
    let c = c_sigma(sigma)?;
    let rho = disk_radius(domain)?;
    let probe = domain.boundary_probe(x)?;
    let d = probe.distance;
    if d > sigma * rho {
        return Err(Error::TooFarFromBoundary { distance: d, limit: sigma * rho });
    }
    Ok(NearBound { leading: -probe.normal / (2.0 * PI * d), radius: c / (PI * rho) })
}

/// Fatal-force estimate `|f_1 - ν/(4π d_1(z_1))| ≤ C_{n,σ}(γ)/(2π ρ̄)` on `D_{n,δ,γ}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct FatalForceBound {
    /// `C_{n,σ}(γ) = C_σ + 4(1+σ)(n-1)γ(γ+2ρ̄)/(γ-2σρ̄)²`.
    pub constant: f64,
    /// `C_{n,σ}(γ)/(2π ρ̄)`.
    pub radius: f64,
}

/// Requires `γ > 2σρ̄`.
pub fn fatal_force_bound(n: usize, rho: f64, sigma: f64, gamma: f64) -> Result<FatalForceBound> {
    if n == 0 {
        return Err(Error::PreconditionViolated("n must be at least 1".into()));
    }
    let cs = c_sigma(sigma)?;
    if !(rho > 0.0 && rho.is_finite()) {
        return Err(Error::PreconditionViolated(format!("ρ̄ must be positive and finite, got {rho}")));
    }
    if !(gamma > 2.0 * sigma * rho) {
        return Err(Error::PreconditionViolated(format!("need γ > 2σρ̄, got γ={gamma}, 2σρ̄={}", 2.0 * sigma * rho)));
    }
    let constant = cs
        + 4.0 * (1.0 + sigma) * (n as f64 - 1.0) * gamma * (gamma + 2.0 * rho)
            / (gamma - 2.0 * sigma * rho).powi(2);
    Ok(FatalForceBound { constant, radius: constant / (2.0 * PI * rho) })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scenario {
    Boundary,
    Pair,
}

/// Whether the explicit bound is guaranteed to precede any other collision.
#[derive(Clone, Debug, PartialEq, Serialize)]
#[serde(tag = "status", rename_all = "kebab-case")]
pub enum Verdict {
    Holds,
    Fails,
    NotApplicable { reason: String },
}

/// Constants, the collision-time bound and the sufficiency verdict.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BoundReport {
    pub scenario: Scenario,
    pub n: usize,
    pub inputs: BTreeMap<String, f64>,
    pub constants: BTreeMap<String, f64>,
    /// Upper bound on the collision time.
    pub time_bound: f64,
    /// The same bound in the alternative algebraic form, where one exists.
    pub time_bound_alternate: Option<f64>,
    /// Lower bound on the time before any other collision can occur.
    pub safe_window: Option<f64>,
    pub verdict: Verdict,
}

/// Inputs of the boundary-collision estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BoundaryScenario {
    pub n: usize,
    /// Disk radius `ρ̄`; infinite gives the half-plane limit.
    pub rho: f64,
    /// `None` means `max(δ_0/ρ̄, 0.5)`.
    #[serde(default)]
    pub sigma: Option<f64>,
    pub delta0: f64,
    /// Separation of the other dislocations; required for `n ≥ 2`.
    #[serde(default)]
    pub gamma0: Option<f64>,
}

/// `c(δ)` of the boundary scenario.
pub fn boundary_rate_constant(n: usize, rho: f64, sigma: f64, delta: f64, gamma0: f64) -> Result<f64> {
    let m = n as f64 - 1.0;
    if n >= 2 && !(delta < gamma0 / 4.0) {
        return Err(Error::InvalidRegime(format!("need δ < γ_0/4, got δ={delta}, γ_0={gamma0}")));
    }
    let g = gamma0 - 4.0 * delta;
    if rho.is_infinite() {
        return Ok(if n >= 2 { 16.0 * delta * m * gamma0 / (g * g) } else { 0.0 });
    }
    let cs = c_sigma(sigma)?;
    let interaction = if n >= 2 {
        2.0 * (rho + delta) / rho
            * m
            * (1.0 + 4.0 * (rho + 2.0 * delta) / g + 16.0 * delta * (rho + delta) / (g * g))
    } else {
        0.0
    };
    Ok(2.0 * delta / rho * (cs + interaction))
}

/// Collision-time bound for the dislocation nearest the boundary.
pub fn boundary_scenario(input: &BoundaryScenario) -> Result<BoundReport> {
    let BoundaryScenario { n, rho, delta0, gamma0, .. } = *input;
    if n == 0 {
        return Err(Error::PreconditionViolated("n must be at least 1".into()));
    }
    if !(rho > 0.0) {
        return Err(Error::PreconditionViolated(format!("ρ̄ must be positive, got {rho}")));
    }
    if !(delta0 > 0.0) {
        return Err(Error::PreconditionViolated(format!("δ_0 must be positive, got {delta0}")));
    }
    let sigma = input.sigma.unwrap_or_else(|| (delta0 / rho).max(0.5)).min(1.0 - 1e-12);
    if rho.is_finite() && delta0 > sigma * rho {
        return Err(Error::PreconditionViolated(format!("need δ_0 ≤ σρ̄, got δ_0={delta0}, σρ̄={}", sigma * rho)));
    }
    if n >= 2 && gamma0.is_none() {
        return Err(Error::PreconditionViolated("γ_0 is required when n ≥ 2".into()));
    }
    let g0 = gamma0.unwrap_or(f64::NAN);
    if let Some(g) = gamma0 {
        if !(delta0 < g / 4.0) {
            return Err(Error::InvalidRegime(format!("need δ_0 < γ_0/4, got δ_0={delta0}, γ_0={g}")));
        }
    }
    let c = boundary_rate_constant(n, rho, sigma, delta0, g0)?;
    if !(c < 1.0) {
        return Err(Error::InvalidRegime(format!("c(δ_0) = {c} is not below 1")));
    }
    let time_bound = 2.0 * PI * delta0 * delta0 / (1.0 - c);
    let mut inputs = BTreeMap::from([
        ("n".to_string(), n as f64),
        ("rho".to_string(), rho),
        ("sigma".to_string(), sigma),
        ("delta0".to_string(), delta0),
    ]);
    let mut constants = BTreeMap::from([("c".to_string(), c)]);
    if rho.is_finite() {
        constants.insert("C_sigma".into(), c_sigma(sigma)?);
    }
    let (safe_window, verdict) = match gamma0 {
        Some(g) => {
            inputs.insert("gamma0".into(), g);
            let window = separation_time(n, delta0, g, g / 2.0);
            let verdict = if n == 1 || time_bound < window { Verdict::Holds } else { Verdict::Fails };
            (Some(window), verdict)
        }
        None => (None, Verdict::Holds),
    };
    Ok(BoundReport {
        scenario: Scenario::Boundary,
        n,
        inputs,
        constants,
        time_bound,
        time_bound_alternate: None,
        safe_window,
        verdict,
    })
}

/// `T(γ) = π((γ_0-δ_0)² - (γ-δ_0)²)/(4n-2)`: time before the separation of the
/// other dislocations can drop from `γ_0` to `γ`.
pub fn separation_time(n: usize, delta0: f64, gamma0: f64, gamma: f64) -> f64 {
    PI * ((gamma0 - delta0).powi(2) - (gamma - delta0).powi(2)) / (4.0 * n as f64 - 2.0)
}

/// Inputs of the pair-collision estimate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PairScenario {
    pub n: usize,
    pub zeta0: f64,
    pub eta0: f64,
    /// Domain diameter; infinite for unbounded domains.
    pub diam: f64,
}

/// `c(ζ) = 8ζ²/η_0² + 4(n-2)ζ/η_0`.
pub fn pair_rate_constant(n: usize, zeta: f64, eta0: f64) -> f64 {
    8.0 * zeta * zeta / (eta0 * eta0) + 4.0 * (n as f64 - 2.0) * zeta / eta0
}

/// Largest admissible initial pair separation, where `c(ζ_0) = 1`.
pub fn zeta0_max(n: usize, eta0: f64) -> f64 {
    let m = n as f64 - 2.0;
    eta0 * ((m * m + 2.0).sqrt() - m) / 4.0
}

/// Collision-time bound for a close opposite-sign pair.
pub fn pair_scenario(input: &PairScenario) -> Result<BoundReport> {
    let PairScenario { n, zeta0, eta0, diam } = *input;
    if n < 2 {
        return Err(Error::PreconditionViolated("the pair scenario needs n ≥ 2".into()));
    }
    if !(zeta0 > 0.0 && eta0 > zeta0) {
        return Err(Error::ParameterOrder(format!("need 0 < ζ_0 < η_0, got ζ_0={zeta0}, η_0={eta0}")));
    }
    if !(eta0 < diam / 2.0) {
        return Err(Error::PreconditionViolated(format!("need η_0 < diam/2, got η_0={eta0}")));
    }
    if n >= 3 && !diam.is_finite() {
        return Err(Error::UnboundedDomain);
    }
    let zmax = zeta0_max(n, eta0);
    let c = pair_rate_constant(n, zeta0, eta0);
    if !(zeta0 < zmax && c < 1.0) {
        return Err(Error::InvalidRegime(format!("ζ_0 = {zeta0} is not below ζ_0,max = {zmax}")));
    }
    let time_bound = PI * zeta0 * zeta0 / (2.0 * (1.0 - c));
    let m = n as f64 - 2.0;
    let alt_den = eta0 * eta0 - zeta0 * zeta0 - 2.0 * m * zeta0 * eta0;
    let time_bound_alternate = (alt_den > 0.0).then(|| PI * zeta0 * zeta0 * eta0 * eta0 / (2.0 * alt_den));
    let inputs = BTreeMap::from([
        ("n".to_string(), n as f64),
        ("zeta0".to_string(), zeta0),
        ("eta0".to_string(), eta0),
        ("diam".to_string(), diam),
    ]);
    let mut constants = BTreeMap::from([("c".to_string(), c), ("zeta0_max".to_string(), zmax)]);
    let (safe_window, verdict) = if diam.is_finite() {
        let lambda = (diam / 2.0).ln().abs();
        let big_lambda = 2.0 * (m - 1.0 + lambda);
        let chi = 2.0 + 3.0 * zeta0;
        constants.insert("lambda".into(), lambda);
        constants.insert("Lambda".into(), big_lambda);
        constants.insert("chi".into(), chi);
        let window = escape_time(big_lambda, chi, eta0, eta0 / 2.0)?;
        (Some(window), if time_bound < window { Verdict::Holds } else { Verdict::Fails })
    } else {
        (None, Verdict::NotApplicable { reason: "λ_Ω is undefined for an unbounded domain".into() })
    };
    Ok(BoundReport {
        scenario: Scenario::Pair,
        n,
        inputs,
        constants,
        time_bound,
        time_bound_alternate,
        safe_window,
        verdict,
    })
}

/// Time for the separation bound `ḋ ≥ -(Λd + χ)/(π d²)` to bring `d` from
/// `η_0` down to `η`:
/// `(π/Λ²)(χ(η-η_0) - (Λ/2)(η²-η_0²) + (χ²/Λ) log((Λη_0+χ)/(Λη+χ)))`.
///
/// For `|Λ| η_0 ≪ χ` the closed form cancels catastrophically and the
/// two-term expansion in `Λ` is used instead.
pub fn escape_time(big_lambda: f64, chi: f64, eta0: f64, eta: f64) -> Result<f64> {
    let (l, x) = (big_lambda, chi);
    if !(l * eta0 + x > 0.0 && l * eta + x > 0.0) {
        return Err(Error::InvalidRegime("the separation rate bound is not negative".into()));
    }
    if (l * eta0 / x).abs() < 1e-3 {
        let t3 = (eta0.powi(3) - eta.powi(3)) / (3.0 * x);
        let t4 = l * (eta0.powi(4) - eta.powi(4)) / (4.0 * x * x);
        let t5 = l * l * (eta0.powi(5) - eta.powi(5)) / (5.0 * x * x * x);
        return Ok(PI * (t3 - t4 + t5));
    }
    Ok(PI / (l * l)
        * (x * (eta - eta0) - 0.5 * l * (eta * eta - eta0 * eta0)
            + x * x / l * ((l * eta0 + x) / (l * eta + x)).ln()))
}

/// Outcome of checking a bound against an integrated trajectory.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Verification {
    /// The first event is the one the scenario predicts.
    pub kind_matches: bool,
    pub observed_time: Option<f64>,
    pub time_bound: f64,
    /// `time_bound - observed_time`.
    pub margin: Option<f64>,
    pub passed: bool,
}

/// Relative slack allowed when the bound is sharp and the observed time
/// carries integration error.
pub const VERIFICATION_SLACK: f64 = 1e-6;

pub fn verify_against_trajectory(report: &BoundReport, trajectory: &Trajectory) -> Result<Verification> {
    if trajectory.signs.len() != report.n {
        return Err(Error::ScenarioMismatch(format!(
            "report has n = {}, trajectory has {} dislocations",
            report.n,
            trajectory.signs.len()
        )));
    }
    let kind_matches = match (report.scenario, &trajectory.termination) {
        (Scenario::Boundary, Termination::BoundaryCollision { index }) => *index == 0,
        (Scenario::Pair, Termination::PairCollision { i, j }) => (*i, *j) == (0, 1),
        _ => false,
    };
    let observed_time = trajectory.corrected_time;
    let margin = observed_time.map(|t| report.time_bound - t);
    let within = observed_time.is_some_and(|t| t <= report.time_bound * (1.0 + VERIFICATION_SLACK));
    Ok(Verification { kind_matches, observed_time, time_bound: report.time_bound, margin, passed: kind_matches && within })
}
