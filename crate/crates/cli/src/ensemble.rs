//! Seeded Monte Carlo ensembles in `D_{n,δ0,γ0}`.
//!
//! Run `i` draws from `ChaCha8Rng::seed_from_u64(splitmix64(master ^ i))`,
//! so each record depends only on the master seed and its own index.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fs;

use disloc_core::{integrate, pt, Burgers, Configuration, Dislocation, Domain, KernelEvaluator, Point, Termination};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};

use crate::config::{BurgersRule, RunConfig, SamplingSpec};
use crate::error::{CliError, CliResult};
use crate::output::{write_json, Cell, Table};
use crate::simulate::{burgers_label, kernels_for};
use crate::RunOptions;

pub const PRNG: &str = "ChaCha8Rng (rand_chacha 0.9)";
pub const SEEDING: &str = "seed_i = splitmix64(master XOR i); rng_i = ChaCha8Rng::seed_from_u64(seed_i)";

/// Draws per accepted sample above which sampling gives up.
const MAX_DRAWS_PER_ACCEPT: u64 = 10_000;

pub fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

pub fn run_seed(master: u64, index: usize) -> u64 {
    splitmix64(master ^ index as u64)
}

struct Sampler<'a> {
    domain: &'a Domain,
    lo: Point,
    hi: Point,
    accepted: u64,
    attempts: u64,
}

impl Sampler<'_> {
    fn draw(&mut self, rng: &mut ChaCha8Rng, accept: impl Fn(&[Point]) -> bool, k: usize) -> CliResult<Vec<Point>> {
        loop {
            self.attempts += 1;
            if self.attempts > (self.accepted + 1) * MAX_DRAWS_PER_ACCEPT {
                return Err(CliError::RejectionOverflow { accepted: self.accepted, attempts: self.attempts });
            }
            let pts: Vec<Point> = (0..k)
                .map(|_| {
                    let u: f64 = rng.random();
                    let v: f64 = rng.random();
                    pt(self.lo.x + u * (self.hi.x - self.lo.x), self.lo.y + v * (self.hi.y - self.lo.y))
                })
                .collect();
            if pts.iter().all(|p| self.domain.contains(*p)) && accept(&pts) {
                self.accepted += 1;
                return Ok(pts);
            }
        }
    }
}

/// Uniform draw from `D_{n,δ0,γ0}`: `z_1` in the band `2ε < d_1 < δ0`, then
/// `z_2..z_n` jointly, each more than `γ0` from the boundary and from each other.
///
/// The lower cut `2ε` keeps the start integrable at the stopping threshold `ε`.
pub fn sample_configuration(
    domain: &Domain,
    spec: &SamplingSpec,
    eps: f64,
    rng: &mut ChaCha8Rng,
) -> CliResult<(Configuration, u64)> {
    let (lo, hi) = domain
        .bounding_box()
        .ok_or_else(|| CliError::Config("ensemble sampling needs a bounded domain".into()))?;
    let mut s = Sampler { domain, lo, hi, accepted: 0, attempts: 0 };
    let z1 = s.draw(
        rng,
        |p| {
            let d = domain.boundary_distance(p[0]);
            d < spec.delta0 && d > 2.0 * eps
        },
        1,
    )?[0];
    let gamma = spec.gamma0;
    let rest = if spec.n > 1 {
        s.draw(
            rng,
            |p| {
                p.iter().all(|z| domain.boundary_distance(*z) > gamma)
                    && p.iter().enumerate().all(|(i, a)| p[i + 1..].iter().all(|b| (a - b).norm() > gamma))
            },
            spec.n - 1,
        )?
    } else {
        Vec::new()
    };
    let signs: Vec<Burgers> = match &spec.burgers {
        BurgersRule::RandomRest => std::iter::once(Burgers::Positive)
            .chain((1..spec.n).map(|_| if rng.random_bool(0.5) { Burgers::Positive } else { Burgers::Negative }))
            .collect(),
        BurgersRule::Fixed(b) => b.clone(),
    };
    let d = std::iter::once(z1).chain(rest).zip(signs).map(|(z, b)| Dislocation::new(z, b)).collect();
    Ok((Configuration::new(d, domain)?, s.attempts))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RunRecord {
    pub run: usize,
    pub seed: u64,
    pub initial: Vec<[f64; 2]>,
    pub burgers: Vec<i64>,
    pub d1: f64,
    pub draws: u64,
    pub termination: Termination,
    pub raw_time: f64,
    pub corrected_time: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Histogram {
    pub bin_width: f64,
    /// `counts[k]` holds times in `[k w, (k+1) w)`.
    pub counts: Vec<usize>,
}

impl Histogram {
    pub fn new(bin_width: f64, times: impl IntoIterator<Item = f64>) -> Self {
        let mut counts: Vec<usize> = Vec::new();
        for t in times {
            let k = (t / bin_width).floor().max(0.0) as usize;
            if counts.len() <= k {
                counts.resize(k + 1, 0);
            }
            counts[k] += 1;
        }
        Histogram { bin_width, counts }
    }

    pub fn total(&self) -> usize {
        self.counts.iter().sum()
    }

    pub fn table(&self) -> Table {
        let mut t = Table::new(["bin_lo", "bin_hi", "count"]);
        for (k, c) in self.counts.iter().enumerate() {
            let lo = k as f64 * self.bin_width;
            t.push(vec![lo.into(), (lo + self.bin_width).into(), (*c).into()]);
        }
        t
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnsembleSummary {
    #[serde(skip)]
    pub records: Vec<RunRecord>,
    pub runs: usize,
    pub boundary_collisions: usize,
    pub non_boundary_terminations: usize,
    /// Kind name to count, over all terminations.
    pub terminations: BTreeMap<String, usize>,
    pub histogram: Histogram,
    /// Largest corrected boundary-collision time.
    pub max_time: Option<f64>,
    /// Leading-order bound `2πδ0²`.
    pub bound: f64,
    pub exceeding_bound: usize,
    /// Mean corrected boundary-collision time keyed by `b_2`, when `n ≥ 2`.
    pub mean_time_by_b2: BTreeMap<String, f64>,
    pub master_seed: u64,
    pub prng: &'static str,
    pub seeding: &'static str,
}

fn termination_name(t: &Termination) -> &'static str {
    match t {
        Termination::BoundaryCollision { .. } => "boundary-collision",
        Termination::PairCollision { .. } => "pair-collision",
        Termination::HorizonReached => "horizon-reached",
        Termination::StepFailure { .. } => "step-failure",
    }
}

/// Run `run` of the ensemble, independent of every other run.
pub fn run_record(config: &RunConfig, spec: &SamplingSpec, kernels: &dyn KernelEvaluator, run: usize) -> CliResult<RunRecord> {
    let domain = kernels.domain();
    let mobility = config.mobility.build()?;
    let seed = run_seed(config.seed, run);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let eps = config.integration.effective_eps(kernels);
    let (start, draws) = sample_configuration(domain, spec, eps, &mut rng)?;
    let traj = integrate(&start, kernels, &mobility, &config.integration)?;
    Ok(RunRecord {
        run,
        seed,
        initial: start.positions().iter().map(|p| [p.x, p.y]).collect(),
        burgers: start.dislocations().iter().map(|d| burgers_label(d.burgers)).collect(),
        d1: domain.boundary_distance(start.position(0)),
        draws,
        termination: traj.termination,
        raw_time: traj.raw_time,
        corrected_time: traj.corrected_time,
    })
}

/// Runs the ensemble described by `[sampling]`; records are ordered by run index.
pub fn run_ensemble(config: &RunConfig, workers: Option<usize>) -> CliResult<EnsembleSummary> {
    let spec = config.sampling.as_ref().ok_or_else(|| CliError::Config("ensemble needs a [sampling] section".into()))?;
    let domain = config.domain.build()?;
    if !(spec.gamma0 < domain.diameter() / 2.0) {
        return Err(CliError::Config(format!("sampling needs gamma0 < diam/2, got gamma0={}", spec.gamma0)));
    }
    let kernels = kernels_for(&domain, &config.numeric)?;
    let records = crate::with_pool(workers, || {
        (0..config.ensemble_size)
            .into_par_iter()
            .map(|i| run_record(config, spec, kernels.as_ref(), i))
            .collect::<CliResult<Vec<_>>>()
    })??;
    Ok(summarise(config, spec, records))
}

fn summarise(config: &RunConfig, spec: &SamplingSpec, records: Vec<RunRecord>) -> EnsembleSummary {
    let bound = 2.0 * PI * spec.delta0 * spec.delta0;
    let boundary: Vec<&RunRecord> = records
        .iter()
        .filter(|r| matches!(r.termination, Termination::BoundaryCollision { .. }))
        .collect();
    let times: Vec<f64> = boundary.iter().filter_map(|r| r.corrected_time).collect();
    let mut terminations = BTreeMap::new();
    for r in &records {
        *terminations.entry(termination_name(&r.termination).to_string()).or_insert(0) += 1;
    }
    let mut mean_time_by_b2 = BTreeMap::new();
    if spec.n >= 2 {
        for sign in [1i64, -1] {
            let ts: Vec<f64> = boundary.iter().filter(|r| r.burgers[1] == sign).filter_map(|r| r.corrected_time).collect();
            if !ts.is_empty() {
                mean_time_by_b2.insert(format!("{sign:+}"), ts.iter().sum::<f64>() / ts.len() as f64);
            }
        }
    }
    EnsembleSummary {
        runs: records.len(),
        boundary_collisions: boundary.len(),
        non_boundary_terminations: records.len() - boundary.len(),
        terminations,
        histogram: Histogram::new(config.histogram_bin_width, times.iter().copied()),
        max_time: times.iter().copied().reduce(f64::max),
        bound,
        exceeding_bound: times.iter().filter(|t| **t > bound).count(),
        mean_time_by_b2,
        master_seed: config.seed,
        prng: PRNG,
        seeding: SEEDING,
        records,
    }
}

pub fn records_table(records: &[RunRecord]) -> Table {
    let n = records.first().map_or(0, |r| r.initial.len());
    let mut headers: Vec<String> = vec!["run".into(), "seed".into()];
    for i in 1..=n {
        headers.extend([format!("x{i}"), format!("y{i}"), format!("b{i}")]);
    }
    headers.extend(["d1", "draws", "termination", "event_indices", "raw_time", "corrected_time"].map(String::from));
    let mut t = Table::new(headers);
    for r in records {
        let mut row: Vec<Cell> = vec![r.run.into(), Cell::Text(r.seed.to_string())];
        for (z, b) in r.initial.iter().zip(&r.burgers) {
            row.extend([z[0].into(), z[1].into(), (*b).into()]);
        }
        let events: Vec<String> = r.termination.event_indices().iter().map(|i| i.to_string()).collect();
        row.extend([
            r.d1.into(),
            Cell::Int(r.draws as i64),
            termination_name(&r.termination).into(),
            events.join(" ").into(),
            r.raw_time.into(),
            r.corrected_time.into(),
        ]);
        t.push(row);
    }
    t
}

/// `ensemble`: writes `records`, `histogram` and `summary.json`.
pub fn cmd_ensemble(config: &RunConfig, opts: &RunOptions) -> CliResult<Value> {
    fs::create_dir_all(&opts.out)?;
    let summary = run_ensemble(config, opts.workers)?;
    records_table(&summary.records).write(&opts.out, "records", opts.format)?;
    summary.histogram.table().write(&opts.out, "histogram", opts.format)?;
    let mut value = serde_json::to_value(&summary)?;
    value["params"] = serde_json::to_value(&config.integration)?;
    value["sampling"] = serde_json::to_value(config.sampling.as_ref())?;
    value["domain"] = json!(config.domain);
    write_json(&opts.out, "summary.json", &value)?;
    Ok(value)
}
