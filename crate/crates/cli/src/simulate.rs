use std::f64::consts::TAU;
use std::fs;

use disloc_core::dynamics::velocity_field;
use disloc_core::{
    evaluator_for, integrate, pt, Backend, Burgers, Configuration, CurveShape, Dislocation, Domain, IntegrationParams,
    KernelEvaluator, Mobility, NumericConfig, NumericKernels, ParametricCurve, Point, Termination, Trajectory,
};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{write_json, Cell, Table};
use crate::RunOptions;

/// The evaluator requested by `numeric.backend`, falling back to the natural one.
///
/// A numeric backend on a disk runs on the same circle written as a curve,
/// which is how closed forms are checked against the solvers.
pub fn kernels_for(domain: &Domain, numeric: &NumericConfig) -> CliResult<Box<dyn KernelEvaluator>> {
    match (domain, numeric.backend) {
        (_, None) | (_, Some(Backend::Analytic)) => Ok(evaluator_for(domain, numeric)?),
        (Domain::Disk { center, radius }, Some(_)) => {
            let curve = ParametricCurve::new(
                CurveShape::Ellipse { center: *center, semi_axes: [*radius, *radius] },
                Some(*radius),
            )?;
            Ok(Box::new(NumericKernels::new(Domain::parametric(curve), numeric.clone())?))
        }
        (_, Some(_)) => Ok(Box::new(NumericKernels::new(domain.clone(), numeric.clone())?)),
    }
}

pub fn trajectory_table(traj: &Trajectory) -> Table {
    let n = traj.signs.len();
    let mut headers = vec!["t".to_string()];
    for i in 1..=n {
        headers.extend([format!("x{i}"), format!("y{i}"), format!("b{i}")]);
    }
    let mut table = Table::new(headers);
    for s in &traj.samples {
        let mut row = vec![Cell::Num(s.t)];
        for (i, b) in traj.signs.iter().enumerate() {
            row.extend([Cell::Num(s.state[2 * i]), Cell::Num(s.state[2 * i + 1]), Cell::Int(burgers_label(*b))]);
        }
        table.push(row);
    }
    table
}

/// Angle in degrees between the final velocity of the colliding dislocation
/// and the outward normal at its nearest boundary point.
pub fn approach_angle(traj: &Trajectory, kernels: &dyn KernelEvaluator, mobility: &Mobility) -> CliResult<Option<f64>> {
    let Termination::BoundaryCollision { index } = traj.termination else {
        return Ok(None);
    };
    let last = traj.final_configuration();
    let v = velocity_field(&last, kernels, mobility)?;
    let v = pt(v[2 * index], v[2 * index + 1]);
    let probe = kernels.domain().boundary_probe(last.position(index))?;
    let cos = (v.dot(&probe.normal) / v.norm()).clamp(-1.0, 1.0);
    Ok(Some(cos.acos().to_degrees()))
}

/// Newton iteration on `∇h = 0` with a central-difference Jacobian.
pub fn locate_equilibrium(kernels: &dyn KernelEvaluator, guess: Point) -> CliResult<Point> {
    let domain = kernels.domain();
    let step = 1e-4 * domain.diameter().min(1.0);
    let mut x = guess;
    for _ in 0..30 {
        let g = kernels.grad_h(x)?;
        if g.norm() < 1e-12 {
            return Ok(x);
        }
        let col = |e: Point| -> CliResult<Point> { Ok((kernels.grad_h(x + e * step)? - kernels.grad_h(x - e * step)?) / (2.0 * step)) };
        let (c0, c1) = (col(pt(1.0, 0.0))?, col(pt(0.0, 1.0))?);
        let det = c0.x * c1.y - c1.x * c0.y;
        if det.abs() < 1e-300 {
            break;
        }
        let dx = pt(c1.y * g.x - c1.x * g.y, -c0.y * g.x + c0.x * g.y) / det;
        x -= dx;
        domain.require_inside(x)?;
        if dx.norm() < 1e-13 {
            return Ok(x);
        }
    }
    let g = kernels.grad_h(x)?;
    if g.norm() < 1e-8 {
        Ok(x)
    } else {
        Err(disloc_core::Error::NoConvergence(format!("no critical point of h found near ({}, {})", guess.x, guess.y)).into())
    }
}

fn build_configuration(config: &RunConfig, domain: &Domain) -> CliResult<Configuration> {
    if config.dislocations.is_empty() {
        return Err(CliError::Config("simulate needs [[dislocations]] or [start_circle]".into()));
    }
    let d = config
        .dislocations
        .iter()
        .map(|s| Dislocation::new(pt(s.position[0], s.position[1]), s.burgers))
        .collect();
    Ok(Configuration::new(d, domain)?)
}

/// JSON sidecar written next to every trajectory.
pub fn sidecar(traj: &Trajectory, kernels: &dyn KernelEvaluator, params: &IntegrationParams, seed: u64) -> Value {
    json!({
        "termination": traj.termination,
        "raw_time": traj.raw_time,
        "corrected_time": traj.corrected_time,
        "event_indices": traj.event_indices(),
        "eps_stop": traj.eps_stop,
        "stats": traj.stats,
        "domain": kernels.domain().kind(),
        "backend": kernels.backend().name(),
        "resolution": kernels.resolution(),
        "params": params,
        "seed": seed,
    })
}

/// One trajectory of a start-circle batch.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingRun {
    pub index: usize,
    pub theta: f64,
    pub start: [f64; 2],
    pub termination: Termination,
    pub corrected_time: Option<f64>,
    pub end: [f64; 2],
    /// Degrees between the final velocity and the outward normal.
    pub approach_angle: Option<f64>,
    /// For starts on a symmetry line of the square, the largest distance from it.
    pub diagonal_drift: Option<f64>,
    #[serde(skip)]
    pub trajectory: Trajectory,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RingBatch {
    pub center: [f64; 2],
    pub radius: f64,
    pub backend: &'static str,
    pub resolution: usize,
    pub runs: Vec<RingRun>,
}

fn is_unit_square(domain: &Domain) -> bool {
    matches!(domain, Domain::Polygon(p) if {
        let v = p.vertices();
        let (lo, hi) = p.bounding_box();
        v.len() == 4 && (lo - pt(0.0, 0.0)).norm() < 1e-14 && (hi - pt(1.0, 1.0)).norm() < 1e-14
    })
}

/// Distance from the square diagonal (or midline) through the start, if any.
fn diagonal_drift(traj: &Trajectory, start: Point) -> Option<f64> {
    let c = pt(0.5, 0.5);
    let d = start - c;
    let lines = [pt(1.0, 1.0), pt(1.0, -1.0), pt(1.0, 0.0), pt(0.0, 1.0)];
    let dir = lines.iter().map(|l| l.normalize()).find(|l| (d.x * l.y - d.y * l.x).abs() < 1e-12 * d.norm())?;
    let normal = pt(-dir.y, dir.x);
    Some(traj.samples.iter().map(|s| (pt(s.state[0], s.state[1]) - c).dot(&normal).abs()).fold(0.0, f64::max))
}

/// Single dislocations started at `center + r (cos θ_i, sin θ_i)`, `θ_i = 2πi/count`.
pub fn ring_runs(config: &RunConfig, workers: Option<usize>) -> CliResult<RingBatch> {
    let ring = config.start_circle.as_ref().ok_or_else(|| CliError::Config("missing [start_circle]".into()))?;
    let domain = config.domain.build()?;
    let kernels = kernels_for(&domain, &config.numeric)?;
    let mobility = config.mobility.build()?;
    let center = match ring.center {
        Some([x, y]) => pt(x, y),
        None => {
            let (lo, hi) = domain
                .bounding_box()
                .ok_or_else(|| CliError::Config("start_circle.center is required in unbounded domains".into()))?;
            locate_equilibrium(kernels.as_ref(), (lo + hi) / 2.0)?
        }
    };
    let square = is_unit_square(&domain);
    let run = |i: usize| -> CliResult<RingRun> {
        let theta = TAU * i as f64 / ring.count as f64;
        let start = center + pt(theta.cos(), theta.sin()) * ring.radius;
        let c = Configuration::new(vec![Dislocation::new(start, ring.burgers)], &domain)?;
        let traj = integrate(&c, kernels.as_ref(), &mobility, &config.integration)?;
        let end = traj.final_configuration().position(0);
        Ok(RingRun {
            index: i,
            theta,
            start: [start.x, start.y],
            termination: traj.termination.clone(),
            corrected_time: traj.corrected_time,
            end: [end.x, end.y],
            approach_angle: approach_angle(&traj, kernels.as_ref(), &mobility)?,
            diagonal_drift: if square { diagonal_drift(&traj, start) } else { None },
            trajectory: traj,
        })
    };
    let runs = crate::with_pool(workers, || (0..ring.count).into_par_iter().map(run).collect::<CliResult<Vec<_>>>())??;
    Ok(RingBatch {
        center: [center.x, center.y],
        radius: ring.radius,
        backend: kernels.backend().name(),
        resolution: kernels.resolution(),
        runs,
    })
}

/// `simulate`: one trajectory, or a start-circle batch when `[start_circle]` is set.
pub fn cmd_simulate(config: &RunConfig, opts: &RunOptions) -> CliResult<Value> {
    fs::create_dir_all(&opts.out)?;
    if config.start_circle.is_some() {
        let batch = ring_runs(config, opts.workers)?;
        for r in &batch.runs {
            trajectory_table(&r.trajectory).write(&opts.out, &format!("trajectory_{:03}", r.index), opts.format)?;
        }
        let mut summary = serde_json::to_value(&batch)?;
        summary["params"] = serde_json::to_value(&config.integration)?;
        summary["seed"] = json!(opts.seed);
        write_json(&opts.out, "batch.json", &summary)?;
        return Ok(summary);
    }
    let domain = config.domain.build()?;
    let kernels = kernels_for(&domain, &config.numeric)?;
    let mobility = config.mobility.build()?;
    let start = build_configuration(config, &domain)?;
    let traj = integrate(&start, kernels.as_ref(), &mobility, &config.integration)?;
    trajectory_table(&traj).write(&opts.out, "trajectory", opts.format)?;
    let meta = sidecar(&traj, kernels.as_ref(), &config.integration, opts.seed);
    write_json(&opts.out, "trajectory.meta.json", &meta)?;
    Ok(meta)
}

/// Burgers moduli as written in trajectory files.
pub fn burgers_label(b: Burgers) -> i64 {
    i8::from(b) as i64
}
