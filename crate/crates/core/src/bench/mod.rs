//! Batch evaluation: random instances on one map, planned once per inflation
//! value, tracked once per acceleration bound, aggregated per
//! `(a_max, δ)` pair.

mod report;
mod warehouse;

use std::path::PathBuf;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use report::{emit_report, ReportFormat};
pub use warehouse::WarehouseLayout;

use crate::controller_sim::{simulate, Contact, ControlGains, SimConfig};
use crate::error::{Error, Result};
use crate::grid_world::{generate_instance_with, load_map, GenOptions, GridMap, Instance};
use crate::planner::{Mode, Planner};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MapSource {
    Warehouse(WarehouseLayout),
    File { path: PathBuf },
}

impl MapSource {
    pub fn load(&self) -> Result<GridMap> {
        match self {
            MapSource::Warehouse(layout) => layout.build(),
            MapSource::File { path } => load_map(path),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    pub map: MapSource,
    pub n_instances: usize,
    pub n_obstacles: usize,
    pub a_max: Vec<f64>,
    pub inflation: Vec<f64>,
    pub gains: ControlGains,
    pub v_max: f64,
    pub omega_max: f64,
    pub seed: u64,
    pub mode: Mode,
    /// Instance generator settings.
    pub generator: GenOptions,
    pub sim: SimConfig,
    /// Worker threads; `None` uses the global pool.
    pub workers: Option<usize>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            map: MapSource::Warehouse(WarehouseLayout::default()),
            n_instances: 100,
            n_obstacles: 128,
            a_max: vec![5.0, 8.0, 15.0],
            inflation: vec![0.0, 0.05, 0.1, 0.2, 0.5],
            gains: ControlGains::default(),
            v_max: 1.0,
            omega_max: std::f64::consts::PI,
            seed: 0,
            mode: Mode::Aat,
            generator: GenOptions { min_start_goal_distance: 20.0, ..GenOptions::default() },
            sim: SimConfig::default(),
            workers: None,
        }
    }
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: BenchConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_instances == 0 {
            return Err(Error::invalid("n_instances", "must be positive"));
        }
        if self.a_max.is_empty() || self.a_max.iter().any(|a| !(*a > 0.0 && a.is_finite())) {
            return Err(Error::invalid("a_max", "need at least one positive value"));
        }
        if self.inflation.is_empty() || self.inflation.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::invalid("inflation", "need at least one non-negative value"));
        }
        if !(self.v_max > 0.0 && self.omega_max > 0.0) {
            return Err(Error::invalid("speeds", "v_max and omega_max must be positive"));
        }
        if self.workers == Some(0) {
            return Err(Error::invalid("workers", "must be positive"));
        }
        ControlGains::new(self.gains.lambda1, self.gains.lambda2)?;
        self.generator.validate()?;
        self.sim.validate()
    }

    /// Instance `index` of the batch.
    pub fn instance(&self, map: &GridMap, index: usize) -> Result<Instance> {
        let mut inst = generate_instance_with(map, self.n_obstacles, self.instance_seed(index), &self.generator)?;
        inst.robot.v_max = self.v_max;
        inst.robot.omega_max = self.omega_max;
        Ok(inst)
    }

    pub fn instance_seed(&self, index: usize) -> u64 {
        self.seed.wrapping_mul(1_000_003).wrapping_add(index as u64)
    }

    fn sorted_a(&self) -> Vec<f64> {
        sorted_unique(&self.a_max)
    }

    fn sorted_inflation(&self) -> Vec<f64> {
        sorted_unique(&self.inflation)
    }
}

fn sorted_unique(v: &[f64]) -> Vec<f64> {
    let mut v = v.to_vec();
    v.sort_by(f64::total_cmp);
    v.dedup();
    v
}

/// Aggregate over the evaluated instances for one `(a_max, δ)` pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub a_max: f64,
    pub inflation: f64,
    pub success_rate: f64,
    pub rmse1: f64,
    pub rmse2: f64,
    pub normalized_cost: f64,
    pub runs: usize,
    /// Runs with at least one wall contact (reported, not counted as
    /// failures unless the simulation says so).
    pub static_contact_runs: usize,
}

/// Outcome of every simulation of one instance, `[a][δ]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceResult {
    pub index: usize,
    pub seed: u64,
    /// Arrival time of the uninflated plan.
    pub baseline: f64,
    /// Arrival time per configured δ.
    pub arrival: Vec<f64>,
    pub runs: Vec<Vec<RunResult>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub success: bool,
    pub rmse1: f64,
    pub rmse2: f64,
    pub static_contact: bool,
    pub aborted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchReport {
    pub rows: Vec<BenchRow>,
    pub requested: usize,
    pub evaluated: usize,
    /// Instances where planning failed for some δ.
    pub no_plan: Vec<usize>,
    /// Instances the generator could not build.
    pub generation_failures: Vec<usize>,
    /// Simulations stopped by a non-finite state.
    pub aborted: usize,
    pub instances: Vec<InstanceResult>,
}

enum Evaluated {
    Done(InstanceResult),
    NoPlan,
    NotGenerated,
}

/// Runs the whole batch. Results do not depend on the number of workers.
pub fn run_benchmark(config: &BenchConfig) -> Result<BenchReport> {
    config.validate()?;
    let map = config.map.load()?;
    let work = || -> Vec<Evaluated> {
        (0..config.n_instances).into_par_iter().map(|i| evaluate(config, &map, i)).collect()
    };
    let results = match config.workers {
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid("workers", e.to_string()))?
            .install(work),
        None => work(),
    };

    let mut report = BenchReport {
        rows: Vec::new(),
        requested: config.n_instances,
        evaluated: 0,
        no_plan: Vec::new(),
        generation_failures: Vec::new(),
        aborted: 0,
        instances: Vec::new(),
    };
    for (i, r) in results.into_iter().enumerate() {
        match r {
            Evaluated::Done(res) => report.instances.push(res),
            Evaluated::NoPlan => report.no_plan.push(i),
            Evaluated::NotGenerated => report.generation_failures.push(i),
        }
    }
    report.evaluated = report.instances.len();
    report.aborted = report
        .instances
        .iter()
        .flat_map(|r| r.runs.iter().flatten())
        .filter(|r| r.aborted)
        .count();

    let inflations = config.sorted_inflation();
    for (ai, &a) in config.sorted_a().iter().enumerate() {
        for (di, &d) in inflations.iter().enumerate() {
            report.rows.push(aggregate(&report.instances, ai, di, a, d));
        }
    }
    Ok(report)
}

fn aggregate(instances: &[InstanceResult], ai: usize, di: usize, a: f64, d: f64) -> BenchRow {
    let n = instances.len();
    let mut row = BenchRow {
        a_max: a,
        inflation: d,
        success_rate: 0.0,
        rmse1: 0.0,
        rmse2: 0.0,
        normalized_cost: 0.0,
        runs: n,
        static_contact_runs: 0,
    };
    if n == 0 {
        return row;
    }
    let (mut ok, mut tracked) = (0usize, 0usize);
    for inst in instances {
        let run = inst.runs[ai][di];
        ok += run.success as usize;
        row.static_contact_runs += run.static_contact as usize;
        if !run.aborted {
            row.rmse1 += run.rmse1;
            row.rmse2 += run.rmse2;
            tracked += 1;
        }
        row.normalized_cost += if inst.baseline > 0.0 { inst.arrival[di] / inst.baseline } else { 1.0 };
    }
    row.success_rate = ok as f64 / n as f64;
    row.rmse1 /= tracked.max(1) as f64;
    row.rmse2 /= tracked.max(1) as f64;
    row.normalized_cost /= n as f64;
    row
}

/// Plans every δ (plus δ = 0 as the cost baseline) and tracks each plan for
/// every acceleration bound.
fn evaluate(config: &BenchConfig, map: &GridMap, index: usize) -> Evaluated {
    let inst = match config.instance(map, index) {
        Ok(inst) => inst,
        Err(e) => {
            log::warn!("instance {index}: {e}");
            return Evaluated::NotGenerated;
        }
    };
    let mut inflations = config.sorted_inflation();
    let baseline_added = inflations[0] != 0.0;
    if baseline_added {
        inflations.insert(0, 0.0);
    }
    let mut plans = Vec::with_capacity(inflations.len());
    for &d in &inflations {
        match Planner::new(&inst, d).plan_with_stats(config.mode, config.v_max, config.omega_max).0 {
            Some(p) => plans.push(p),
            None => {
                log::info!("instance {index}: no plan at inflation {d}");
                return Evaluated::NoPlan;
            }
        }
    }
    let baseline = plans[0].arrival_time;
    if baseline_added {
        plans.remove(0);
    }
    let arrival = plans.iter().map(|p| p.arrival_time).collect();

    let runs = config
        .sorted_a()
        .iter()
        .map(|&a| {
            plans
                .iter()
                .map(|plan| match simulate(plan, &inst, a, config.gains, &config.sim) {
                    Ok(out) => RunResult {
                        success: out.success,
                        rmse1: out.rmse1,
                        rmse2: out.rmse2,
                        static_contact: !out.static_contacts.is_empty()
                            || out.collisions.iter().any(|c| c.with == Contact::Static),
                        aborted: false,
                    },
                    Err(e) => {
                        log::error!("instance {index}, a_max {a}: {e}");
                        RunResult { success: false, rmse1: 0.0, rmse2: 0.0, static_contact: false, aborted: true }
                    }
                })
                .collect()
        })
        .collect();
    Evaluated::Done(InstanceResult { index, seed: config.instance_seed(index), baseline, arrival, runs })
}
