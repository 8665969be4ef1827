//! Gradient-flow dynamics `ż_i = v_i(f(z))` integrated with an adaptive
//! Dormand–Prince 5(4) scheme.
//!
//! Integration stops at the first collision event: a dislocation within
//! `ε_stop` of the boundary or two dislocations within `ε_stop` of each other.
//! Events are located on the cubic Hermite interpolant of the accepted step.
//! The reported collision time adds the residual time of the leading-order
//! local law from separation `ε_stop` to zero.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{min_separation, Burgers, Configuration, Dislocation, Domain};
use crate::kernels::KernelEvaluator;
use crate::mechanics::{forces, Mobility};

/// Integrator settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IntegrationParams {
    pub t_max: f64,
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Collision threshold; `None` means `1e-4 · diam` (or `1e-4` if unbounded).
    pub eps_stop: Option<f64>,
    pub max_steps: usize,
    pub initial_step: Option<f64>,
    pub max_step: Option<f64>,
}

impl Default for IntegrationParams {
    fn default() -> Self {
        IntegrationParams {
            t_max: 1.0,
            rel_tol: 1e-8,
            abs_tol: 1e-10,
            eps_stop: None,
            max_steps: 10_000_000,
            initial_step: None,
            max_step: None,
        }
    }
}

impl IntegrationParams {
    pub fn with_t_max(t_max: f64) -> Self {
        IntegrationParams { t_max, ..Default::default() }
    }

    /// The threshold actually used: never inside the kernel's validity margin.
    pub fn effective_eps(&self, kernels: &dyn KernelEvaluator) -> f64 {
        let diam = kernels.domain().diameter();
        let base = self.eps_stop.unwrap_or(if diam.is_finite() { 1e-4 * diam } else { 1e-4 });
        base.max(2.0 * kernels.boundary_margin())
    }
}

/// Why integration stopped.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Termination {
    BoundaryCollision { index: usize },
    PairCollision { i: usize, j: usize },
    HorizonReached,
    StepFailure { reason: String },
}

impl Termination {
    pub fn event_indices(&self) -> Vec<usize> {
        match self {
            Termination::BoundaryCollision { index } => vec![*index],
            Termination::PairCollision { i, j } => vec![*i, *j],
            _ => Vec::new(),
        }
    }

    pub fn is_collision(&self) -> bool {
        matches!(self, Termination::BoundaryCollision { .. } | Termination::PairCollision { .. })
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evaluations: usize,
}

/// Positions `[x_1, y_1, ...]` at time `t`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sample {
    pub t: f64,
    pub state: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Trajectory {
    pub signs: Vec<Burgers>,
    pub samples: Vec<Sample>,
    pub termination: Termination,
    /// Time of the last sample.
    pub raw_time: f64,
    /// Collision time with the residual-time correction; `None` without a collision.
    pub corrected_time: Option<f64>,
    pub eps_stop: f64,
    pub stats: StepStats,
}

impl Trajectory {
    pub fn configuration(&self, k: usize) -> Configuration {
        let s = &self.samples[k].state;
        Configuration::unchecked(
            self.signs
                .iter()
                .enumerate()
                .map(|(i, b)| Dislocation::new(crate::geometry::pt(s[2 * i], s[2 * i + 1]), *b))
                .collect(),
        )
    }

    pub fn final_configuration(&self) -> Configuration {
        self.configuration(self.samples.len() - 1)
    }

    pub fn event_indices(&self) -> Vec<usize> {
        self.termination.event_indices()
    }
}

/// Velocities `v(f(z))` flattened like the state.
pub fn velocity_field(
    config: &Configuration,
    kernels: &dyn KernelEvaluator,
    mobility: &Mobility,
) -> Result<Vec<f64>> {
    let f = forces(config, kernels)?;
    Ok(mobility.apply(&f).iter().flat_map(|v| [v.x, v.y]).collect())
}

/// Residual time to collision from separation `eps` under the local law.
pub fn residual_time(termination: &Termination, eps: f64) -> Option<f64> {
    match termination {
        Termination::BoundaryCollision { .. } => Some(2.0 * PI * eps * eps),
        Termination::PairCollision { .. } => Some(0.5 * PI * eps * eps),
        _ => None,
    }
}

const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
/// Fifth-order weights minus embedded fourth-order weights.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[derive(Clone, Copy, Debug)]
enum Event {
    Boundary(usize),
    Pair(usize, usize),
}

/// Signed clearance of an event: positive while no collision has occurred.
fn clearance(event: Event, state: &[f64], domain: &Domain, eps: f64) -> f64 {
    let p = |i: usize| crate::geometry::pt(state[2 * i], state[2 * i + 1]);
    match event {
        Event::Boundary(i) => {
            let z = p(i);
            let d = domain.boundary_distance(z);
            (if domain.contains(z) { d } else { -d }) - eps
        }
        Event::Pair(i, j) => (p(i) - p(j)).norm() - eps,
    }
}

fn hermite(y0: &[f64], f0: &[f64], y1: &[f64], f1: &[f64], h: f64, s: f64) -> Vec<f64> {
    let h00 = (1.0 + 2.0 * s) * (1.0 - s) * (1.0 - s);
    let h10 = s * (1.0 - s) * (1.0 - s);
    let h01 = s * s * (3.0 - 2.0 * s);
    let h11 = s * s * (s - 1.0);
    (0..y0.len()).map(|i| h00 * y0[i] + h10 * h * f0[i] + h01 * y1[i] + h11 * h * f1[i]).collect()
}

/// Integrates from `config` until a collision, the horizon or a step failure.
pub fn integrate(
    config: &Configuration,
    kernels: &dyn KernelEvaluator,
    mobility: &Mobility,
    params: &IntegrationParams,
) -> Result<Trajectory> {
    let domain = kernels.domain();
    if !(params.t_max > 0.0 && params.rel_tol > 0.0 && params.abs_tol > 0.0) {
        return Err(Error::PreconditionViolated("t_max and tolerances must be positive".into()));
    }
    let eps = params.effective_eps(kernels);
    let sep = min_separation(config, domain);
    if !(sep > 2.0 * eps) {
        return Err(Error::PreconditionViolated(format!(
            "minimum separation {sep:e} must exceed 2·eps_stop = {:e}",
            2.0 * eps
        )));
    }
    let n = config.len();
    let mut events = Vec::new();
    if !matches!(domain, Domain::Plane) {
        events.extend((0..n).map(Event::Boundary));
    }
    for i in 0..n {
        for j in i + 1..n {
            events.push(Event::Pair(i, j));
        }
    }

    let mut stats = StepStats::default();
    let rhs = |state: &[f64], stats: &mut StepStats| -> Result<Vec<f64>> {
        stats.rhs_evaluations += 1;
        let c = config.with_state(state);
        for d in c.dislocations() {
            domain.require_inside(d.position)?;
        }
        velocity_field(&c, kernels, mobility)
    };

    let t_max = params.t_max;
    let h_min = 1e-15 * t_max;
    let h_max = params.max_step.unwrap_or(t_max).min(t_max);
    let mut t = 0.0;
    let mut y = config.state();
    let mut f = rhs(&y, &mut stats)?;
    let scale = if sep.is_finite() { sep * sep } else { 1.0 };
    let mut h = params.initial_step.unwrap_or(1e-3 * scale).min(h_max);
    let mut samples = vec![Sample { t, state: y.clone() }];
    let dim = y.len();

    let finish = |samples: Vec<Sample>, termination: Termination, stats: StepStats| {
        let raw_time = samples.last().map(|s| s.t).unwrap_or(0.0);
        let corrected_time = residual_time(&termination, eps).map(|r| raw_time + r);
        Trajectory {
            signs: config.dislocations().iter().map(|d| d.burgers).collect(),
            samples,
            termination,
            raw_time,
            corrected_time,
            eps_stop: eps,
            stats,
        }
    };

    loop {
        if stats.accepted + stats.rejected >= params.max_steps {
            let reason = format!("step limit {} reached", params.max_steps);
            return Ok(finish(samples, Termination::StepFailure { reason }, stats));
        }
        let last = t_max - t <= h;
        if last {
            h = t_max - t;
        }
        // Stages; a failed evaluation (a stage left the domain) rejects the step.
        let mut k: Vec<Vec<f64>> = Vec::with_capacity(7);
        k.push(f.clone());
        let mut ok = true;
        for s in 1..7 {
            let stage: Vec<f64> =
                (0..dim).map(|i| y[i] + h * (0..s).map(|m| A[s][m] * k[m][i]).sum::<f64>()).collect();
            match rhs(&stage, &mut stats) {
                Ok(v) => k.push(v),
                Err(_) => {
                    ok = false;
                    break;
                }
            }
        }
        let (y_new, err) = if ok {
            let y_new: Vec<f64> =
                (0..dim).map(|i| y[i] + h * (0..6).map(|m| A[6][m] * k[m][i]).sum::<f64>()).collect();
            let mut acc = 0.0;
            for i in 0..dim {
                let e = h * (0..7).map(|m| E[m] * k[m][i]).sum::<f64>();
                let sc = params.abs_tol + params.rel_tol * y[i].abs().max(y_new[i].abs());
                acc += (e / sc).powi(2);
            }
            (y_new, (acc / dim as f64).sqrt())
        } else {
            (Vec::new(), f64::INFINITY)
        };

        if !(err <= 1.0) {
            stats.rejected += 1;
            let factor = if err.is_finite() { (0.9 * err.powf(-0.2)).clamp(0.2, 1.0) } else { 0.25 };
            h *= factor;
            if h < h_min {
                let reason = format!("step size {h:e} fell below {h_min:e} at t = {t}");
                return Ok(finish(samples, Termination::StepFailure { reason }, stats));
            }
            continue;
        }

        stats.accepted += 1;
        let f_new = k[6].clone();
        let t_new = if last { t_max } else { t + h };

        // Earliest event crossing inside the step.
        let mut hit: Option<(f64, Event)> = None;
        for &ev in &events {
            if clearance(ev, &y_new, domain, eps) > 0.0 {
                continue;
            }
            let at = |s: f64| clearance(ev, &hermite(&y, &f, &y_new, &f_new, h, s), domain, eps);
            let s = locate_root(at, h, t);
            if hit.is_none_or(|(s0, _)| s < s0) {
                hit = Some((s, ev));
            }
        }
        if let Some((s, ev)) = hit {
            let state = hermite(&y, &f, &y_new, &f_new, h, s);
            samples.push(Sample { t: t + s * h, state });
            let termination = match ev {
                Event::Boundary(i) => Termination::BoundaryCollision { index: i },
                Event::Pair(i, j) => Termination::PairCollision { i, j },
            };
            return Ok(finish(samples, termination, stats));
        }

        t = t_new;
        y = y_new;
        f = f_new;
        samples.push(Sample { t, state: y.clone() });
        if last {
            return Ok(finish(samples, Termination::HorizonReached, stats));
        }
        let grow = if err > 0.0 { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) } else { 5.0 };
        h = (h * grow).min(h_max);
    }
}

/// Root of `g` on `[0, 1]` with `g(0) > 0 ≥ g(1)`, to `1e-12` of the time scale.
fn locate_root(g: impl Fn(f64) -> f64, h: f64, t: f64) -> f64 {
    let tol = 1e-12 * (t + h).max(f64::MIN_POSITIVE) / h;
    let (mut a, mut b) = (0.0, 1.0);
    let (mut ga, mut gb) = (g(a), g(b));
    if ga <= 0.0 {
        return 0.0;
    }
    let mut side = 0i8;
    for _ in 0..200 {
        if b - a <= tol {
            break;
        }
        // Illinois variant of regula falsi, bisection if it stalls.
        let mut s = (a * gb - b * ga) / (gb - ga);
        if !(s > a && s < b) {
            s = 0.5 * (a + b);
        }
        let gs = g(s);
        if gs > 0.0 {
            a = s;
            ga = gs;
            if side == -1 {
                gb *= 0.5;
            }
            side = -1;
        } else {
            b = s;
            gb = gs;
            if side == 1 {
                ga *= 0.5;
            }
            side = 1;
        }
    }
    b
}
