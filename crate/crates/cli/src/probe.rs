use std::fs;

use disloc_core::{pt, KernelEvaluator, Point};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::{CliError, CliResult};
use crate::output::{Cell, Table};
use crate::simulate::kernels_for;
use crate::RunOptions;

pub const PROBE_COLUMNS: [&str; 9] = ["x", "y", "k", "h", "grad_h_x", "grad_h_y", "backend", "resolution", "error"];

/// Kernel values at one point, or the reason it was refused.
#[derive(Clone, Debug, PartialEq)]
pub struct ProbeRow {
    pub x: Point,
    pub values: Result<(f64, f64, Point), String>,
}

pub fn probe_points(kernels: &dyn KernelEvaluator, points: &[Point], source: Option<Point>) -> Vec<ProbeRow> {
    points
        .iter()
        .map(|&x| {
            let eval = || -> disloc_core::Result<(f64, f64, Point)> {
                let k = kernels.k(x, source.unwrap_or(x))?;
                Ok((k, kernels.h(x)?, kernels.grad_h(x)?))
            };
            ProbeRow { x, values: eval().map_err(|e| format!("{}: {e}", e.kind())) }
        })
        .collect()
}

pub fn probe_table(kernels: &dyn KernelEvaluator, rows: &[ProbeRow]) -> Table {
    let backend = kernels.backend().name();
    let resolution = kernels.resolution();
    let mut t = Table::new(PROBE_COLUMNS);
    for r in rows {
        let mut row: Vec<Cell> = vec![r.x.x.into(), r.x.y.into()];
        match &r.values {
            Ok((k, h, g)) => row.extend([(*k).into(), (*h).into(), g.x.into(), g.y.into()]),
            Err(_) => row.extend([Cell::Empty, Cell::Empty, Cell::Empty, Cell::Empty]),
        }
        row.extend([backend.into(), resolution.into(), r.values.as_ref().err().cloned().into()]);
        t.push(row);
    }
    t
}

/// `kernel-probe`: writes `probe.{csv,json}`; refused points carry an error.
pub fn cmd_kernel_probe(config: &RunConfig, opts: &RunOptions) -> CliResult<Value> {
    let spec = config.probe.as_ref().ok_or_else(|| CliError::Config("kernel-probe needs a [probe] section".into()))?;
    let points = spec.points();
    if points.is_empty() {
        return Err(CliError::Config("probe lists no points".into()));
    }
    let domain = config.domain.build()?;
    let kernels = kernels_for(&domain, &config.numeric)?;
    let rows = probe_points(kernels.as_ref(), &points, spec.source.map(|[x, y]| pt(x, y)));
    fs::create_dir_all(&opts.out)?;
    let path = probe_table(kernels.as_ref(), &rows).write(&opts.out, "probe", opts.format)?;
    Ok(json!({
        "points": rows.len(),
        "refused": rows.iter().filter(|r| r.values.is_err()).count(),
        "backend": kernels.backend().name(),
        "resolution": kernels.resolution(),
        "output": path,
    }))
}
