use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use timed_nav::bench::{emit_report, run_benchmark, BenchConfig, MapSource, ReportFormat, WarehouseLayout};
use timed_nav::controller_sim::{simulate, ControlGains, SimConfig};
use timed_nav::grid_world::{generate_instance_with, load_instance, load_map, save_instance, GenOptions, GridMap};
use timed_nav::planner::{Mode, Plan, Planner};
use timed_nav::refiner::refine_plan;

/// Exit status when the planner finds no plan.
const EXIT_NO_PLAN: u8 = 3;

#[derive(Parser)]
#[command(name = "timed-nav", version, about = "Plan, refine and track timed paths among moving obstacles")]
struct Cli {
    /// Seed for every random choice; overrides a bench config's seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a map and a random instance.
    Gen(GenArgs),
    /// Plan a timed path for an instance.
    Plan(PlanArgs),
    /// Turn a plan into a sampled reference trajectory.
    Refine(RefineArgs),
    /// Track a plan in closed loop and audit collisions.
    Simulate(SimulateArgs),
    /// Run a benchmark batch.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    /// Map file to use; the default warehouse layout otherwise.
    #[arg(long)]
    map: Option<PathBuf>,
    /// Empty map of this width instead (needs --height).
    #[arg(long, requires = "height", conflicts_with = "map")]
    width: Option<usize>,
    #[arg(long, requires = "width")]
    height: Option<usize>,
    #[arg(long, default_value_t = 128)]
    obstacles: usize,
    /// Seconds the obstacles walk before parking.
    #[arg(long)]
    horizon: Option<f64>,
    /// Minimum start-goal distance, meters.
    #[arg(long, default_value_t = 0.0)]
    min_distance: f64,
    /// Chance an obstacle waits a step instead of moving.
    #[arg(long)]
    wait_probability: Option<f64>,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Base name of the written `.map` and `.json` files.
    #[arg(long, default_value = "instance")]
    name: String,
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long)]
    instance: PathBuf,
    /// sipp, aa or aat.
    #[arg(long, default_value = "aat")]
    mode: Mode,
    /// Extra dynamic clearance δ, meters.
    #[arg(long, default_value_t = 0.0)]
    inflate: f64,
    #[arg(long)]
    v_max: Option<f64>,
    #[arg(long)]
    omega_max: Option<f64>,
    #[arg(long, default_value = "plan.json")]
    out: PathBuf,
}

#[derive(Args)]
struct RefineArgs {
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, default_value_t = 5.0)]
    amax: f64,
    #[arg(long, default_value_t = 1.0)]
    v_max: f64,
    /// Sample period of the CSV, seconds.
    #[arg(long, default_value_t = 0.01)]
    period: f64,
    #[arg(long, default_value = "reference.csv")]
    out: PathBuf,
}

#[derive(Args)]
struct SimulateArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long)]
    plan: PathBuf,
    #[arg(long, default_value_t = 5.0)]
    amax: f64,
    #[arg(long, default_value_t = -4.0, allow_hyphen_values = true)]
    lambda1: f64,
    #[arg(long, default_value_t = -5.0, allow_hyphen_values = true)]
    lambda2: f64,
    #[arg(long, default_value_t = 1e-3)]
    dt: f64,
    /// Add the reference acceleration to the command.
    #[arg(long)]
    feedforward: bool,
    /// Saturate translational commands at --amax.
    #[arg(long)]
    clamp: bool,
    /// Refine each segment from the actual state at its start.
    #[arg(long)]
    rebase: bool,
    /// Count wall contacts as failures.
    #[arg(long)]
    count_static: bool,
    /// Keep every n-th step in the trace.
    #[arg(long, default_value_t = 10)]
    trace_every: usize,
    #[arg(long, default_value = "trace.csv")]
    trace: PathBuf,
    #[arg(long, default_value = "outcome.json")]
    outcome: PathBuf,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value = ".")]
    out_dir: PathBuf,
    /// Worker threads.
    #[arg(long)]
    workers: Option<usize>,
    /// Format printed to stdout: csv, table or grid.
    #[arg(long, default_value = "table")]
    format: String,
}

/// A failure that maps to a specific exit status.
#[derive(Debug)]
struct NoPlan;

impl std::fmt::Display for NoPlan {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str("no plan exists for this instance")
    }
}

impl std::error::Error for NoPlan {}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) if e.is::<NoPlan>() => {
            eprintln!("timed-nav: {e}");
            ExitCode::from(EXIT_NO_PLAN)
        }
        Err(e) => {
            eprintln!("timed-nav: {e:#}");
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Gen(args) => gen(args, cli.seed.unwrap_or(0)),
        Command::Plan(args) => plan(args),
        Command::Refine(args) => refine(args),
        Command::Simulate(args) => sim(args),
        Command::Bench(args) => bench(args, cli.seed),
    }
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_plan(path: &Path) -> Result<Plan> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Plan::from_json(&text).with_context(|| format!("parsing {}", path.display()))
}

fn gen(args: GenArgs, seed: u64) -> Result<()> {
    let map = match (&args.map, args.width, args.height) {
        (Some(path), _, _) => load_map(path).with_context(|| format!("reading {}", path.display()))?,
        (None, Some(w), Some(h)) => GridMap::new(w, h, 1.0)?,
        _ => WarehouseLayout::default().build()?,
    };
    let mut opts = GenOptions { horizon: args.horizon, min_start_goal_distance: args.min_distance, ..Default::default() };
    if let Some(p) = args.wait_probability {
        opts.wait_probability = p;
    }
    let inst = generate_instance_with(&map, args.obstacles, seed, &opts)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    let map_path = args.out_dir.join(format!("{}.map", args.name));
    let inst_path = args.out_dir.join(format!("{}.json", args.name));
    save_instance(&inst, &inst_path, &map_path)?;
    println!("{}", inst_path.display());
    Ok(())
}

fn plan(args: PlanArgs) -> Result<()> {
    let inst = load_instance(&args.instance).with_context(|| format!("loading {}", args.instance.display()))?;
    if !(args.inflate >= 0.0 && args.inflate.is_finite()) {
        bail!("--inflate must be a non-negative number");
    }
    let v_max = args.v_max.unwrap_or(inst.robot.v_max);
    let omega_max = args.omega_max.unwrap_or(inst.robot.omega_max);
    if !(v_max > 0.0 && omega_max > 0.0) {
        bail!("speeds must be positive");
    }
    let (plan, stats) = Planner::new(&inst, args.inflate).plan_with_stats(args.mode, v_max, omega_max);
    log::info!("search: {stats:?}");
    let plan = plan.ok_or(NoPlan)?;
    write(&args.out, &plan.to_json()?)?;
    println!("arrival {:.4} s, {} actions", plan.arrival_time, plan.actions.len());
    Ok(())
}

fn refine(args: RefineArgs) -> Result<()> {
    let plan = read_plan(&args.plan)?;
    let traj = refine_plan(&plan, args.amax, args.v_max)?;
    write(&args.out, &traj.to_csv(args.period)?)?;
    if traj.overrun() > 0.0 {
        eprintln!("warning: fallback profiles delay the reference by {:.3} s", traj.overrun());
    }
    Ok(())
}

fn sim(args: SimulateArgs) -> Result<()> {
    let inst = load_instance(&args.instance).with_context(|| format!("loading {}", args.instance.display()))?;
    let plan = read_plan(&args.plan)?;
    let gains = ControlGains::new(args.lambda1, args.lambda2)?;
    let config = SimConfig {
        dt: args.dt,
        feedforward: args.feedforward,
        clamp: args.clamp,
        rebase: args.rebase,
        count_static: args.count_static,
        trace_every: args.trace_every,
        ..SimConfig::default()
    };
    let out = simulate(&plan, &inst, args.amax, gains, &config)?;
    write(&args.trace, &out.trace_csv())?;
    write(&args.outcome, &out.to_json()?)?;
    println!(
        "{}: rmse1 {:.5}, rmse2 {:.5}, {} collision(s)",
        if out.success { "success" } else { "collision" },
        out.rmse1,
        out.rmse2,
        out.collisions.len()
    );
    Ok(())
}

fn bench(args: BenchArgs, seed: Option<u64>) -> Result<()> {
    let format: ReportFormat = args.format.parse()?;
    let text = fs::read_to_string(&args.config).with_context(|| format!("reading {}", args.config.display()))?;
    let mut config = BenchConfig::from_json(&text)?;
    if let MapSource::File { path } = &mut config.map {
        if path.is_relative() {
            *path = args.config.parent().unwrap_or(Path::new(".")).join(&*path);
        }
    }
    if let Some(seed) = seed {
        config.seed = seed;
    }
    if args.workers.is_some() {
        config.workers = args.workers;
    }
    let report = run_benchmark(&config)?;
    fs::create_dir_all(&args.out_dir).with_context(|| format!("creating {}", args.out_dir.display()))?;
    write(&args.out_dir.join("bench.csv"), &emit_report(&report, ReportFormat::Csv)?)?;
    write(&args.out_dir.join("bench.txt"), &emit_report(&report, ReportFormat::Table)?)?;
    write(&args.out_dir.join("bench_grid.txt"), &emit_report(&report, ReportFormat::Grid)?)?;
    write(&args.out_dir.join("bench.json"), &(serde_json::to_string_pretty(&report)? + "\n"))?;
    print!("{}", emit_report(&report, format)?);
    if report.aborted > 0 {
        bail!("{} simulation(s) aborted on a non-finite state", report.aborted);
    }
    Ok(())
}
