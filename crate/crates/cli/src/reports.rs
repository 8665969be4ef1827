//! `bounds` and `oracle`: JSON wrappers over the core estimates and exact cases.

use std::fs;

use disloc_core::bounds::{boundary_scenario, fatal_force_bound, pair_scenario};
use disloc_core::oracles::{
    symmetric_pair_equilibrium, Classification, DiskSingle, DiskSymmetricPair, HalfPlaneSingle, OracleResult,
    PlanePair,
};
use disloc_core::{integrate, pt, Configuration, Domain, IntegrationParams, Mobility, Termination};
use serde_json::{json, Value};

use crate::config::{BoundsSpec, OracleCase, RunConfig};
use crate::error::{CliError, CliResult};
use crate::output::write_json;
use crate::simulate::kernels_for;
use crate::RunOptions;

pub fn bounds_report(spec: &BoundsSpec) -> CliResult<Value> {
    Ok(match spec {
        BoundsSpec::Boundary(s) => serde_json::to_value(boundary_scenario(s)?)?,
        BoundsSpec::Pair(s) => serde_json::to_value(pair_scenario(s)?)?,
        BoundsSpec::Fatal(s) => {
            let b = fatal_force_bound(s.n, s.rho, s.sigma, s.gamma)?;
            json!({ "scenario": "fatal", "inputs": s, "constant": b.constant, "radius": b.radius })
        }
    })
}

pub fn cmd_bounds(config: &RunConfig, opts: &RunOptions) -> CliResult<Value> {
    let spec = config.bounds.as_ref().ok_or_else(|| CliError::Config("bounds needs a [bounds] section".into()))?;
    let report = bounds_report(spec)?;
    fs::create_dir_all(&opts.out)?;
    write_json(&opts.out, "bounds.json", &report)?;
    Ok(report)
}

/// The exact case, its domain and its starting configuration.
fn oracle_case(case: &OracleCase) -> CliResult<(OracleResult, Domain, Configuration)> {
    Ok(match case {
        OracleCase::HalfPlaneSingle { delta } => {
            let o = HalfPlaneSingle::new(*delta)?;
            (o.result(), Domain::upper_half_plane(), o.initial())
        }
        OracleCase::DiskSingle { delta } => {
            let o = DiskSingle::new(*delta)?;
            (o.result(), Domain::unit_disk(), o.initial())
        }
        OracleCase::DiskSymmetricPair { r0 } => {
            let o = DiskSymmetricPair::new(r0.unwrap_or_else(symmetric_pair_equilibrium))?;
            (o.result()?, Domain::unit_disk(), o.initial())
        }
        OracleCase::PlanePair { z0, b1b2 } => {
            let o = PlanePair::new(pt(z0[0], z0[1]), *b1b2)?;
            (o.result(), Domain::Plane, o.initial())
        }
    })
}

/// Integrates the exact case and reports the relative error in collision time,
/// or the largest displacement when the oracle predicts no collision.
pub fn oracle_compare(case: &OracleCase, config: &RunConfig) -> CliResult<Value> {
    let (result, domain, start) = oracle_case(case)?;
    let kernels = kernels_for(&domain, &config.numeric)?;
    let mut params: IntegrationParams = config.integration.clone();
    if let Some(t) = result.collision_time {
        params.t_max = params.t_max.max(2.0 * t);
    }
    let traj = integrate(&start, kernels.as_ref(), &Mobility::Identity, &params)?;
    let initial = start.state();
    let max_drift = traj
        .samples
        .iter()
        .map(|s| s.state.iter().zip(&initial).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt())
        .fold(0.0, f64::max);
    let expected_kind = match result.classification {
        Classification::BoundaryCollision => "boundary-collision",
        Classification::PairCollision => "pair-collision",
        Classification::Equilibrium | Classification::GlobalExistence => "horizon-reached",
    };
    let observed_kind = match traj.termination {
        Termination::BoundaryCollision { .. } => "boundary-collision",
        Termination::PairCollision { .. } => "pair-collision",
        Termination::HorizonReached => "horizon-reached",
        Termination::StepFailure { .. } => "step-failure",
    };
    let relative_error = match (result.collision_time, traj.corrected_time) {
        (Some(exact), Some(sim)) => Some((sim - exact).abs() / exact),
        _ => None,
    };
    Ok(json!({
        "oracle": result,
        "termination": traj.termination,
        "kind_matches": expected_kind == observed_kind,
        "corrected_time": traj.corrected_time,
        "relative_error": relative_error,
        "max_drift": max_drift,
        "params": params,
    }))
}

pub fn cmd_oracle(config: &RunConfig, opts: &RunOptions) -> CliResult<Value> {
    let spec = config.oracle.as_ref().ok_or_else(|| CliError::Config("oracle needs an [oracle] section".into()))?;
    let report = if spec.compare || opts.compare {
        oracle_compare(&spec.case, config)?
    } else {
        serde_json::to_value(oracle_case(&spec.case)?.0)?
    };
    fs::create_dir_all(&opts.out)?;
    write_json(&opts.out, "oracle.json", &report)?;
    Ok(report)
}
