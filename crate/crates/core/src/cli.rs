//! Command-line front end: `plan`, `tpg`, `simulate` and `bench`.
//!
//! A plan directory holds everything later stages need, so `tpg` and
//! `simulate` take a directory written by the stage before them.

use crate::error::{Error, Result};
use crate::exec::{self, JitterModel, PauseScript};
use crate::motion::{plan_sequential, MotionConfig, SequentialPlan};
use crate::scenario::{load_scenario, Scenario};
use crate::syncbase::plan_synchronous;
use crate::taskplan::{build_problem, plan_tasks, TaskPlan};
use crate::tpg::{build_tpg, shortcut_tpg, ShortcutOptions, Tpg};
use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

/// Graphs with more nodes than this get the long shortcut budget.
pub const LARGE_GRAPH_NODES: usize = 4000;
pub const SHORTCUT_SECONDS_SMALL: f64 = 20.0;
pub const SHORTCUT_SECONDS_LARGE: f64 = 60.0;

#[derive(Parser, Debug)]
#[command(name = "apexmr", version, about = "Plan, coordinate and stress-test multi-arm assembly")]
pub struct Cli {
    /// Width of the parallel collision scan [default: logical cores]
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Override the scenario's discretization step, seconds
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Assign steps, build the task plan and plan sequential motions
    Plan(PlanArgs),
    /// Build the temporal plan graph for a plan directory and shortcut it
    Tpg(TpgArgs),
    /// Execute a graph under random delays and verify every trace
    Simulate(SimulateArgs),
    /// Run the whole pipeline on every scenario in a directory
    Bench(BenchArgs),
}

#[derive(Args, Debug)]
pub struct PlanArgs {
    /// Scenario file
    pub scenario: PathBuf,
    /// Planner seed [default: the scenario's]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory
    #[arg(long, default_value = "out")]
    pub out: PathBuf,
}

#[derive(Args, Debug)]
pub struct TpgArgs {
    /// Directory written by `plan`
    pub plan_dir: PathBuf,
    /// Shortcut time budget [default: 20 s, or 60 s above 4000 nodes]
    #[arg(long)]
    pub shortcut_seconds: Option<f64>,
    /// Stop shortcutting after this many samples; makes the result independent of machine speed
    #[arg(long)]
    pub shortcut_iterations: Option<usize>,
    /// Also build the synchronous baseline and its graph
    #[arg(long)]
    pub sync: bool,
    /// Shortcut seed [default: the plan's]
    #[arg(long)]
    pub seed: Option<u64>,
    /// Output directory [default: the plan directory]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Jitter {
    /// Nominal durations
    None,
    /// Skill durations drawn from each skill's envelope
    Skills,
    /// Skill draws plus up to 20% slower transits
    Full,
}

impl Jitter {
    fn model(self) -> JitterModel {
        match self {
            Jitter::None => JitterModel::none(),
            Jitter::Skills => JitterModel::skills(),
            Jitter::Full => JitterModel { skills: true, pose_slowdown: 0.2 },
        }
    }
}

#[derive(Args, Debug)]
pub struct SimulateArgs {
    /// Directory written by `tpg`
    pub tpg_dir: PathBuf,
    /// Graph file inside the directory [default: tpg_shortcut.json, else tpg.json]
    #[arg(long)]
    pub graph: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, value_enum, default_value_t = Jitter::Skills)]
    pub jitter: Jitter,
    /// JSON pause script, or `random` for fresh random pauses every trial
    #[arg(long)]
    pub pause_script: Option<String>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Sampling step of the trace verifier, seconds
    #[arg(long, default_value_t = 0.02)]
    pub sample_dt: f64,
    /// Output directory [default: the graph directory]
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct BenchArgs {
    /// Directory of `.scn` scenarios
    pub suite: PathBuf,
    /// Motion and shortcut seeds 0..N, averaged
    #[arg(long, default_value_t = 1)]
    pub seeds: u64,
    /// Shortcut time budget [default: 20 s, or 60 s above 4000 nodes]
    #[arg(long)]
    pub shortcut_seconds: Option<f64>,
    #[arg(long)]
    pub shortcut_iterations: Option<usize>,
    #[arg(long, default_value = "bench")]
    pub out: PathBuf,
}

/// Settings a plan directory was produced with.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunInfo {
    pub seed: u64,
}

pub fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.unwrap_or_else(default_threads).max(1);
    match cli.command {
        Command::Plan(a) => cmd_plan(&a, cli.dt).map(|_| ()),
        Command::Tpg(a) => cmd_tpg(&a, threads).map(|_| ()),
        Command::Simulate(a) => cmd_simulate(&a).map(|_| ()),
        Command::Bench(a) => cmd_bench(&a, cli.dt, threads).map(|_| ()),
    }
}

fn default_threads() -> usize {
    std::thread::available_parallelism().map_or(1, |n| n.get())
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn to_json<T: Serialize>(v: &T) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("artifact serializes");
    s.push('\n');
    s
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    serde_json::from_str(&text).map_err(|e| Error::Parse(format!("{}: {e}", path.display())))
}

fn read_scenario(dir: &Path) -> Result<Scenario> {
    let path = dir.join("scenario.json");
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    Scenario::from_json(&text)
}

fn motion_config(seed: u64) -> MotionConfig {
    MotionConfig { seed, ..MotionConfig::default() }
}

fn shortcut_budget(seconds: Option<f64>, nodes: usize) -> Duration {
    let default = if nodes > LARGE_GRAPH_NODES { SHORTCUT_SECONDS_LARGE } else { SHORTCUT_SECONDS_SMALL };
    Duration::from_secs_f64(seconds.unwrap_or(default).max(0.0))
}

/// Everything `plan` produces.
pub struct PlanOutput {
    pub scenario: Scenario,
    pub plan: TaskPlan,
    pub seq: SequentialPlan,
}

pub fn cmd_plan(a: &PlanArgs, dt: Option<f64>) -> Result<PlanOutput> {
    let mut sc = load_scenario(&a.scenario)?;
    if let Some(dt) = dt {
        sc.dt = dt;
    }
    let seed = a.seed.unwrap_or(sc.rng_seed);
    sc.rng_seed = seed;
    let plan = plan_tasks(&sc)?;
    let seq = plan_sequential(&sc, &plan, &motion_config(seed))?;
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write(&a.out.join("scenario.json"), &format!("{}\n", sc.to_json()))?;
    write(&a.out.join("run.json"), &to_json(&RunInfo { seed }))?;
    write(&a.out.join("assignment.json"), &to_json(&plan.assignment))?;
    write(&a.out.join("assignment.lp"), &build_problem(&sc).to_lp())?;
    write(&a.out.join("task_plan.json"), &to_json(&plan))?;
    write(&a.out.join("sequential.json"), &to_json(&seq))?;
    for r in 0..plan.n_robots() {
        write(&a.out.join(format!("robot_{r}.csv")), &seq.robot_csv(&plan, r))?;
    }
    log::info!("plan: {} tasks, sequential makespan {:.3}", plan.tasks.len(), seq.makespan);
    println!("{} tasks, sequential makespan {:.3} s, written to {}", plan.tasks.len(), seq.makespan, a.out.display());
    Ok(PlanOutput { scenario: sc, plan, seq })
}

/// One line of the metrics table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub plan: String,
    pub makespan: f64,
    pub wait_time: f64,
}

/// Rows normalized by the first row's makespan, which is the sequential plan.
pub fn metrics_csv(rows: &[MetricsRow]) -> String {
    let base = rows.first().map_or(1.0, |r| r.makespan);
    let base = if base > 0.0 { base } else { 1.0 };
    let mut out = String::from("plan,makespan,wait_time,makespan_norm,wait_time_norm\n");
    for r in rows {
        let _ = writeln!(
            out,
            "{},{:.6},{:.6},{:.6},{:.6}",
            r.plan,
            r.makespan,
            r.wait_time,
            r.makespan / base,
            r.wait_time / base
        );
    }
    out
}

fn write_graph(dir: &Path, name: &str, g: &Tpg) -> Result<()> {
    write(&dir.join(format!("{name}.json")), &to_json(g))?;
    write(&dir.join(format!("{name}.dot")), &g.to_dot())?;
    write(&dir.join(format!("{name}_edges.txt")), &g.to_edge_list())
}

pub fn cmd_tpg(a: &TpgArgs, threads: usize) -> Result<Vec<MetricsRow>> {
    let sc = read_scenario(&a.plan_dir)?;
    let info: RunInfo = read_json(&a.plan_dir.join("run.json"))?;
    let plan: TaskPlan = read_json(&a.plan_dir.join("task_plan.json"))?;
    let seq: SequentialPlan = read_json(&a.plan_dir.join("sequential.json"))?;
    let out = a.out.clone().unwrap_or_else(|| a.plan_dir.clone());
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let seed = a.seed.unwrap_or(info.seed);

    let started = Instant::now();
    let g = build_tpg(&sc.world, &plan, &seq, threads)?;
    log::info!("tpg: {} nodes, {} edges in {:?}", g.n_nodes(), g.edges.len(), started.elapsed());
    let roll = g.rollout()?;
    write_graph(&out, "tpg", &g)?;

    let mut short = g.clone();
    let opts = ShortcutOptions {
        time_budget: shortcut_budget(a.shortcut_seconds, g.n_nodes()),
        max_iterations: a.shortcut_iterations,
        seed,
        dt: sc.dt,
    };
    let stats = shortcut_tpg(&mut short, &sc.world, &opts)?;
    let short_roll = short.rollout()?;
    write_graph(&out, "tpg_shortcut", &short)?;
    write(&out.join("shortcut_stats.json"), &to_json(&stats))?;

    let mut rows = vec![MetricsRow { plan: "sequential".into(), makespan: seq.makespan, wait_time: seq.wait_time(&plan) }];
    if a.sync {
        let sync = plan_synchronous(&sc, &plan, &seq, &motion_config(seed))?;
        write(&out.join("sync.json"), &to_json(&sync))?;
        for r in 0..plan.n_robots() {
            write(&out.join(format!("sync_robot_{r}.csv")), &sync.robot_csv(&plan, r))?;
        }
        let sg = build_tpg(&sc.world, &plan, &sync.motions, threads)?;
        let sr = sg.rollout()?;
        write_graph(&out, "sync_tpg", &sg)?;
        rows.push(MetricsRow { plan: "sync".into(), makespan: sync.makespan, wait_time: sync.motions.wait_time(&plan) });
        rows.push(MetricsRow { plan: "sync_tpg".into(), makespan: sr.makespan, wait_time: sr.wait_time });
    }
    rows.push(MetricsRow { plan: "tpg".into(), makespan: roll.makespan, wait_time: roll.wait_time });
    rows.push(MetricsRow { plan: "tpg_shortcut".into(), makespan: short_roll.makespan, wait_time: short_roll.wait_time });
    let table = metrics_csv(&rows);
    write(&out.join("metrics.csv"), &table)?;
    print!("{table}");
    Ok(rows)
}

/// Aggregate outcome of `simulate`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimulationReport {
    pub trials: usize,
    pub violations: usize,
    pub deadlocks: usize,
    pub makespans: Vec<f64>,
    pub wait_times: Vec<f64>,
}

fn quantile(sorted: &[f64], q: f64) -> f64 {
    if sorted.is_empty() {
        return 0.0;
    }
    let i = ((sorted.len() - 1) as f64 * q).round() as usize;
    sorted[i]
}

impl SimulationReport {
    /// `key=value` lines.
    pub fn summary(&self) -> String {
        let mut m = self.makespans.clone();
        m.sort_by(f64::total_cmp);
        let mean = |v: &[f64]| if v.is_empty() { 0.0 } else { v.iter().sum::<f64>() / v.len() as f64 };
        let mut out = String::new();
        let _ = writeln!(out, "trials={}", self.trials);
        let _ = writeln!(out, "violations={}", self.violations);
        let _ = writeln!(out, "deadlocks={}", self.deadlocks);
        let _ = writeln!(out, "makespan_min={:.6}", m.first().copied().unwrap_or(0.0));
        let _ = writeln!(out, "makespan_mean={:.6}", mean(&m));
        let _ = writeln!(out, "makespan_p50={:.6}", quantile(&m, 0.5));
        let _ = writeln!(out, "makespan_p95={:.6}", quantile(&m, 0.95));
        let _ = writeln!(out, "makespan_max={:.6}", m.last().copied().unwrap_or(0.0));
        let _ = writeln!(out, "wait_time_mean={:.6}", mean(&self.wait_times));
        out
    }
}

pub fn cmd_simulate(a: &SimulateArgs) -> Result<SimulationReport> {
    let sc = read_scenario(&a.tpg_dir)?;
    let name = match &a.graph {
        Some(n) => n.clone(),
        None if a.tpg_dir.join("tpg_shortcut.json").exists() => "tpg_shortcut.json".into(),
        None => "tpg.json".into(),
    };
    let g: Tpg = read_json(&a.tpg_dir.join(&name))?;
    let out = a.out.clone().unwrap_or_else(|| a.tpg_dir.clone());
    std::fs::create_dir_all(&out).map_err(|e| Error::io(&out, e))?;
    let fixed: Option<PauseScript> = match a.pause_script.as_deref() {
        None | Some("random") => None,
        Some(path) => Some(read_json(Path::new(path))?),
    };
    if let Some(s) = &fixed {
        if let Some(p) = s.pauses.iter().find(|p| p.robot >= g.n_robots()) {
            return Err(Error::UnknownRobot(p.robot));
        }
    }
    let horizon = g.rollout()?.makespan;
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut report = SimulationReport { trials: a.trials, violations: 0, deadlocks: 0, makespans: Vec::new(), wait_times: Vec::new() };
    let mut rows = String::from("trial,makespan,wait_time,safe,deadlock\n");
    for trial in 0..a.trials {
        let script = match (&fixed, a.pause_script.as_deref()) {
            (Some(s), _) => Some(s.clone()),
            (None, Some("random")) => Some(PauseScript::random(&mut rng, g.n_robots(), horizon, 3, 5.0)),
            _ => None,
        };
        let seed = a.seed.wrapping_add(trial as u64);
        match exec::simulate(&g, &sc.skills, a.jitter.model(), seed, script.as_ref()) {
            Ok(mut trace) => {
                let verdict = exec::verify_trace(&sc.world, &g, &trace, a.sample_dt);
                let safe = verdict.safe;
                trace.verdict = Some(verdict);
                if !safe {
                    report.violations += 1;
                }
                if trial == 0 || !safe {
                    write(&out.join(format!("trace_{trial}.csv")), &trace.to_csv())?;
                    write(&out.join(format!("trace_{trial}.txt")), &trace.summary())?;
                }
                let _ = writeln!(rows, "{trial},{:.6},{:.6},{safe},false", trace.makespan, trace.wait_time);
                report.makespans.push(trace.makespan);
                report.wait_times.push(trace.wait_time);
            }
            Err(Error::Internal(msg)) => {
                log::warn!("trial {trial}: {msg}");
                report.deadlocks += 1;
                let _ = writeln!(rows, "{trial},,,false,true");
            }
            Err(e) => return Err(e),
        }
    }
    write(&out.join("trials.csv"), &rows)?;
    let summary = report.summary();
    write(&out.join("report.txt"), &summary)?;
    print!("{summary}");
    Ok(report)
}

/// Per-fixture averages over seeds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchRow {
    pub fixture: String,
    pub nodes: usize,
    pub task_s: f64,
    pub motion_s: f64,
    pub tpg_s: f64,
    pub shortcut_s: f64,
    pub seq_makespan: f64,
    pub tpg_makespan: f64,
    pub shortcut_makespan: f64,
    pub seq_wait: f64,
    pub tpg_wait: f64,
    pub shortcut_wait: f64,
}

const BENCH_COLUMNS: [&str; 12] = [
    "fixture",
    "nodes",
    "task_s",
    "motion_s",
    "tpg_s",
    "shortcut_s",
    "seq_makespan",
    "tpg_makespan",
    "shortcut_makespan",
    "seq_wait",
    "tpg_wait",
    "shortcut_wait",
];

impl BenchRow {
    fn cells(&self) -> Vec<String> {
        let mut v = vec![self.fixture.clone(), self.nodes.to_string()];
        v.extend([self.task_s, self.motion_s, self.tpg_s, self.shortcut_s].map(|x| format!("{x:.4}")));
        v.extend(
            [self.seq_makespan, self.tpg_makespan, self.shortcut_makespan, self.seq_wait, self.tpg_wait, self.shortcut_wait]
                .map(|x| format!("{x:.3}")),
        );
        v
    }
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut out = BENCH_COLUMNS.join(",") + "\n";
    for r in rows {
        out += &(r.cells().join(",") + "\n");
    }
    out
}

/// Fixed-width table for the terminal.
pub fn bench_table(rows: &[BenchRow]) -> String {
    let cells: Vec<Vec<String>> = rows.iter().map(BenchRow::cells).collect();
    let width: Vec<usize> = (0..BENCH_COLUMNS.len())
        .map(|c| cells.iter().map(|r| r[c].len()).chain([BENCH_COLUMNS[c].len()]).max().unwrap_or(0))
        .collect();
    let line = |r: &[String]| {
        let parts: Vec<String> = r.iter().zip(&width).map(|(s, w)| format!("{s:>w$}")).collect();
        parts.join("  ").trim_end().to_string() + "\n"
    };
    let header: Vec<String> = BENCH_COLUMNS.iter().map(|s| s.to_string()).collect();
    let mut out = line(&header);
    for r in &cells {
        out += &line(r);
    }
    out
}

fn bench_one(path: &Path, a: &BenchArgs, dt: Option<f64>, threads: usize) -> Result<BenchRow> {
    let mut sc = load_scenario(path)?;
    if let Some(dt) = dt {
        sc.dt = dt;
    }
    let fixture = path.file_stem().map_or_else(String::new, |s| s.to_string_lossy().into_owned());
    let seeds = a.seeds.max(1);
    let mut acc = BenchRow {
        fixture,
        nodes: 0,
        task_s: 0.0,
        motion_s: 0.0,
        tpg_s: 0.0,
        shortcut_s: 0.0,
        seq_makespan: 0.0,
        tpg_makespan: 0.0,
        shortcut_makespan: 0.0,
        seq_wait: 0.0,
        tpg_wait: 0.0,
        shortcut_wait: 0.0,
    };
    for seed in 0..seeds {
        let t = Instant::now();
        let plan = plan_tasks(&sc)?;
        acc.task_s += t.elapsed().as_secs_f64();
        let t = Instant::now();
        let seq = plan_sequential(&sc, &plan, &motion_config(seed))?;
        acc.motion_s += t.elapsed().as_secs_f64();
        let t = Instant::now();
        let g = build_tpg(&sc.world, &plan, &seq, threads)?;
        acc.tpg_s += t.elapsed().as_secs_f64();
        let roll = g.rollout()?;
        let mut short = g.clone();
        let opts = ShortcutOptions {
            time_budget: shortcut_budget(a.shortcut_seconds, g.n_nodes()),
            max_iterations: a.shortcut_iterations,
            seed,
            dt: sc.dt,
        };
        let t = Instant::now();
        shortcut_tpg(&mut short, &sc.world, &opts)?;
        acc.shortcut_s += t.elapsed().as_secs_f64();
        let sr = short.rollout()?;
        acc.nodes = g.n_nodes();
        acc.seq_makespan += seq.makespan;
        acc.tpg_makespan += roll.makespan;
        acc.shortcut_makespan += sr.makespan;
        acc.seq_wait += seq.wait_time(&plan);
        acc.tpg_wait += roll.wait_time;
        acc.shortcut_wait += sr.wait_time;
    }
    let n = seeds as f64;
    for x in [
        &mut acc.task_s,
        &mut acc.motion_s,
        &mut acc.tpg_s,
        &mut acc.shortcut_s,
        &mut acc.seq_makespan,
        &mut acc.tpg_makespan,
        &mut acc.shortcut_makespan,
        &mut acc.seq_wait,
        &mut acc.tpg_wait,
        &mut acc.shortcut_wait,
    ] {
        *x /= n;
    }
    Ok(acc)
}

pub fn cmd_bench(a: &BenchArgs, dt: Option<f64>, threads: usize) -> Result<Vec<BenchRow>> {
    let entries = std::fs::read_dir(&a.suite).map_err(|e| Error::io(&a.suite, e))?;
    let mut files: Vec<PathBuf> = entries
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().is_some_and(|x| x == "scn"))
        .collect();
    files.sort();
    let mut rows = Vec::new();
    for f in &files {
        log::info!("bench: {}", f.display());
        rows.push(bench_one(f, a, dt, threads)?);
    }
    std::fs::create_dir_all(&a.out).map_err(|e| Error::io(&a.out, e))?;
    write(&a.out.join("bench.csv"), &bench_csv(&rows))?;
    let table = bench_table(&rows);
    write(&a.out.join("bench.txt"), &table)?;
    print!("{table}");
    Ok(rows)
}
