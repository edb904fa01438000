//! `evoplan`: command-line front end for the network evolution planner.
//!
//! Subcommands: `generate` (build a synthetic scenario directory),
//! `plan` (run the planner and emit report files), `sweep` (grid of
//! plan runs aggregated into one CSV) and `verify` (oracle
//! certification of the scheduling core).
//!
//! Exit codes: 0 success, 1 error, 2 infeasible plan.

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Deserialize;

use evoplan_core::{
    build_report, generate, greedy_deadline_schedule, load, oracle_min_cost_plan,
    oracle_schedulable, oracle_schedule, plan, save, validate, write_report, GeneratorParams, Mode,
    OracleBudget, PlanStatus, Scenario, StationType,
};

#[derive(Parser)]
#[command(name = "evoplan", version, about = "Cellular network evolution planner")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    /// Suppress the human-readable summary on stdout.
    #[arg(long, global = true)]
    quiet: bool,
}

#[derive(Subcommand)]
enum Cmd {
    /// Generate a synthetic scenario directory.
    Generate(GenerateArgs),
    /// Plan a scenario and write schedule.csv, metrics.csv, summary.json.
    Plan(PlanArgs),
    /// Run a grid of plans and aggregate one CSV row per cell.
    Sweep(SweepArgs),
    /// Certify the scheduling core against the exhaustive oracles.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CliMode {
    Shared,
    Independent,
}

impl From<CliMode> for Mode {
    fn from(m: CliMode) -> Mode {
        match m {
            CliMode::Shared => Mode::Shared,
            CliMode::Independent => Mode::Independent,
        }
    }
}

fn mode_name(m: Mode) -> &'static str {
    match m {
        Mode::Shared => "shared",
        Mode::Independent => "independent",
    }
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    stations: usize,
    #[arg(long)]
    clusters: usize,
    #[arg(long, default_value_t = 2)]
    operators: usize,
    #[arg(long, default_value_t = 60)]
    horizon: u32,
    /// Demand growth factor over the horizon (>= 1).
    #[arg(long, default_value_t = 6.0)]
    growth: f64,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Side of the square area in km (derived from density when omitted).
    #[arg(long)]
    area_km: Option<f64>,
    /// Changes per period (heuristic default when omitted).
    #[arg(long)]
    change_rate: Option<u32>,
    #[arg(long, default_value_t = 1.0)]
    hmax: f64,
    #[arg(long, default_value_t = 0.7)]
    phi: f64,
    /// Fraction of clusters placed inside dense urban disks.
    #[arg(long)]
    urban_fraction: Option<f64>,
    /// Demand scale for clusters outside the urban disks.
    #[arg(long)]
    rural_load: Option<f64>,
    /// JSON config with a custom station type table.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output scenario directory.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct PlanArgs {
    /// Scenario directory (meta.json, stations.csv, clusters.csv, demand.csv).
    scenario: PathBuf,
    /// Override the per-period change budget from meta.json.
    #[arg(long)]
    change_rate: Option<u32>,
    /// Override the HHI ceiling from meta.json.
    #[arg(long)]
    hmax: Option<f64>,
    /// Override the compliance fraction from meta.json.
    #[arg(long)]
    phi: Option<f64>,
    #[arg(long, value_enum, default_value_t = CliMode::Shared)]
    mode: CliMode,
    /// Output report directory.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepArgs {
    /// Scenario directory.
    scenario: PathBuf,
    /// Change budgets to sweep, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = Vec::<u32>::new())]
    change_rate: Vec<u32>,
    /// HHI ceilings to sweep, comma-separated.
    #[arg(long, value_delimiter = ',', default_values_t = Vec::<f64>::new())]
    hmax: Vec<f64>,
    /// Modes to sweep, comma-separated.
    #[arg(long, value_enum, value_delimiter = ',', default_values_t = vec![CliMode::Shared])]
    mode: Vec<CliMode>,
    /// Output CSV file.
    #[arg(short, long)]
    out: PathBuf,
}

#[derive(Args)]
struct VerifyArgs {
    /// Random instances per certification property.
    #[arg(long, default_value_t = 1000)]
    samples: usize,
    /// Horizon for the exhaustive scheduling enumeration.
    #[arg(long, default_value_t = 4)]
    horizon: u32,
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

#[derive(Debug, Deserialize)]
struct ConfigFile {
    #[serde(default)]
    types: Option<Vec<StationType>>,
}

fn main() -> ExitCode {
    // Exit code 2 is reserved for infeasible plans; argument errors are 1.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = if err.use_stderr() { 1 } else { 0 };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    let quiet = cli.quiet;
    let outcome = match cli.cmd {
        Cmd::Generate(args) => cmd_generate(args, quiet),
        Cmd::Plan(args) => cmd_plan(args, quiet),
        Cmd::Sweep(args) => cmd_sweep(args, quiet),
        Cmd::Verify(args) => cmd_verify(args, quiet),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn cmd_generate(args: GenerateArgs, quiet: bool) -> Result<ExitCode> {
    let defaults = GeneratorParams::default();
    let type_table = match &args.config {
        Some(path) => {
            let raw = std::fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            let cfg: ConfigFile = serde_json::from_str(&raw)
                .with_context(|| format!("parsing config {}", path.display()))?;
            cfg.types
        }
        None => None,
    };
    let params = GeneratorParams {
        stations: args.stations,
        clusters: args.clusters,
        operators: args.operators,
        horizon: args.horizon,
        growth: args.growth,
        seed: args.seed,
        area_km: args.area_km,
        change_rate: args.change_rate,
        h_max: args.hmax,
        phi: args.phi,
        urban_fraction: args.urban_fraction.unwrap_or(defaults.urban_fraction),
        rural_load: args.rural_load.unwrap_or(defaults.rural_load),
        type_table,
        ..defaults
    };
    let sc = generate(&params).context("generating scenario")?;
    let violations = validate(&sc);
    if !violations.is_empty() {
        bail!("generated scenario fails validation: {:?}", violations[0]);
    }
    save(&sc, &args.out).with_context(|| format!("writing {}", args.out.display()))?;
    if !quiet {
        println!(
            "wrote {}: {} stations, {} clusters, {} operators, horizon {}, N={}",
            args.out.display(),
            sc.stations.len(),
            sc.clusters.len(),
            sc.operators.len(),
            sc.horizon,
            sc.change_rate
        );
    }
    Ok(ExitCode::SUCCESS)
}

fn load_with_overrides(
    dir: &Path,
    change_rate: Option<u32>,
    hmax: Option<f64>,
    phi: Option<f64>,
) -> Result<Scenario> {
    let mut sc = load(dir).with_context(|| format!("loading scenario {}", dir.display()))?;
    if let Some(n) = change_rate {
        sc.change_rate = n;
    }
    if let Some(h) = hmax {
        sc.h_max = h;
    }
    if let Some(p) = phi {
        sc.phi = p;
    }
    Ok(sc)
}

fn cmd_plan(args: PlanArgs, quiet: bool) -> Result<ExitCode> {
    let sc = load_with_overrides(&args.scenario, args.change_rate, args.hmax, args.phi)?;
    let mode: Mode = args.mode.into();
    let result = plan(&sc, mode);
    let report = build_report(&sc, &result.schedule, mode);
    write_report(&args.out, &sc, &result, &report)
        .with_context(|| format!("writing {}", args.out.display()))?;
    match &result.status {
        PlanStatus::Success => {
            if !quiet {
                println!(
                    "planned {} ({}): {} changes, final cost {:.2}, total cost {:.2}",
                    args.scenario.display(),
                    mode_name(mode),
                    result.schedule.changes().len(),
                    report.final_cost,
                    report.total_cost
                );
            }
            Ok(ExitCode::SUCCESS)
        }
        PlanStatus::Infeasible { phase, reason } => {
            if !quiet {
                println!(
                    "infeasible in phase {}: {reason} (details in summary.json)",
                    phase.name()
                );
            }
            Ok(ExitCode::from(2))
        }
    }
}

struct SweepRow {
    change_rate: u32,
    h_max: f64,
    mode: Mode,
    status: String,
    changes: usize,
    creations: usize,
    enhancements: usize,
    decommissions: usize,
    final_cost: f64,
    total_cost: f64,
    unused_total: f64,
}

fn thread_cap() -> usize {
    std::env::var("EVOPLAN_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
        .filter(|&n| n >= 1)
        .unwrap_or_else(|| {
            std::thread::available_parallelism()
                .map(|n| n.get())
                .unwrap_or(1)
        })
}

fn cmd_sweep(args: SweepArgs, quiet: bool) -> Result<ExitCode> {
    let base = load(&args.scenario)
        .with_context(|| format!("loading scenario {}", args.scenario.display()))?;
    let rates = if args.change_rate.is_empty() {
        vec![base.change_rate]
    } else {
        args.change_rate.clone()
    };
    let ceilings = if args.hmax.is_empty() {
        vec![base.h_max]
    } else {
        args.hmax.clone()
    };

    // Deterministic cell order: change rate, then ceiling, then mode.
    let mut cells: Vec<(u32, f64, Mode)> = Vec::new();
    for &n in &rates {
        for &h in &ceilings {
            for &m in &args.mode {
                cells.push((n, h, m.into()));
            }
        }
    }

    let results: Mutex<Vec<Option<SweepRow>>> = Mutex::new((0..cells.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = thread_cap().min(cells.len()).max(1);
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = next.fetch_add(1, Ordering::Relaxed);
                let Some(&(n, h, mode)) = cells.get(i) else {
                    break;
                };
                let mut sc = base.clone();
                sc.change_rate = n;
                sc.h_max = h;
                let result = plan(&sc, mode);
                let report = build_report(&sc, &result.schedule, mode);
                let status = match &result.status {
                    PlanStatus::Success => "success".to_string(),
                    PlanStatus::Infeasible { .. } => "infeasible".to_string(),
                };
                let row = SweepRow {
                    change_rate: n,
                    h_max: h,
                    mode,
                    status,
                    changes: result.schedule.changes().len(),
                    creations: result.counts.creations,
                    enhancements: result.counts.enhancements,
                    decommissions: result.counts.decommissions,
                    final_cost: report.final_cost,
                    total_cost: report.total_cost,
                    unused_total: report.periods.iter().map(|m| m.unused).sum(),
                };
                results.lock().unwrap()[i] = Some(row);
            });
        }
    });

    let mut out = String::from(
        "change_rate,h_max,mode,status,changes,creations,enhancements,decommissions,\
         final_cost,total_cost,unused_total\n",
    );
    for row in results.into_inner().unwrap() {
        let r = row.expect("every sweep cell produces a row");
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{},{}\n",
            r.change_rate,
            r.h_max,
            mode_name(r.mode),
            r.status,
            r.changes,
            r.creations,
            r.enhancements,
            r.decommissions,
            r.final_cost,
            r.total_cost,
            r.unused_total
        ));
    }
    std::fs::write(&args.out, out).with_context(|| format!("writing {}", args.out.display()))?;
    if !quiet {
        println!("wrote {} ({} cells)", args.out.display(), cells.len());
    }
    Ok(ExitCode::SUCCESS)
}

fn cmd_verify(args: VerifyArgs, quiet: bool) -> Result<ExitCode> {
    let budget = OracleBudget::default();
    if args.horizon > budget.max_horizon {
        bail!(
            "horizon {} exceeds the oracle enumeration limit of {}; \
             exhaustive certification is not available at that size",
            args.horizon,
            budget.max_horizon
        );
    }

    let mut rows: Vec<(&str, Result<String, String>)> = Vec::new();

    rows.push(("scheduling optimality", verify_optimality(args.horizon, &budget)));
    rows.push((
        "feasibility condition",
        verify_feasibility(args.samples, args.seed),
    ));
    rows.push((
        "min-cost bound",
        verify_min_cost(args.samples.min(100), args.seed, &budget),
    ));

    let mut failed = false;
    for (name, outcome) in &rows {
        match outcome {
            Ok(detail) => {
                if !quiet {
                    println!("{name:<24} PASS  {detail}");
                }
            }
            Err(detail) => {
                failed = true;
                println!("{name:<24} FAIL  {detail}");
            }
        }
    }
    if failed {
        bail!("oracle certification failed");
    }
    Ok(ExitCode::SUCCESS)
}

/// Exhaustive greedy-vs-oracle comparison over all deadline multisets up
/// to the oracle's request limit.
fn verify_optimality(horizon: u32, budget: &OracleBudget) -> Result<String, String> {
    fn rec(
        k: u32,
        lo: u32,
        cur: &mut Vec<u32>,
        max_len: usize,
        check: &mut dyn FnMut(&[u32]) -> Result<(), String>,
    ) -> Result<(), String> {
        check(cur)?;
        if cur.len() == max_len {
            return Ok(());
        }
        for d in lo..=k {
            cur.push(d);
            rec(k, d, cur, max_len, check)?;
            cur.pop();
        }
        Ok(())
    }

    let mut cases = 0u64;
    for k in 1..=horizon {
        for n in 1..=3u32 {
            let mut check = |set: &[u32]| -> Result<(), String> {
                let greedy = greedy_deadline_schedule(set, n, k);
                let oracle = oracle_schedule(set, n, k, budget).map_err(|e| e.to_string())?;
                match (&greedy, &oracle) {
                    (Some((_, gl)), Some((ol, _))) if gl == ol => Ok(()),
                    (None, None) => Ok(()),
                    _ => Err(format!("mismatch on {set:?} n={n} k={k}")),
                }
                .map(|()| cases += 1)
            };
            rec(k, 1, &mut Vec::new(), budget.max_requests.min(6), &mut check)?;
        }
    }
    Ok(format!("{cases} cases"))
}

/// Random multisets: the sorted-deadline condition must coincide with
/// greedy feasibility.
fn verify_feasibility(samples: usize, seed: u64) -> Result<String, String> {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..samples {
        let k = rng.gen_range(1..=12u32);
        let n = rng.gen_range(1..=4u32);
        let len = rng.gen_range(0..=(k as usize * n as usize).min(16));
        let set: Vec<u32> = (0..len).map(|_| rng.gen_range(1..=k)).collect();
        let greedy_ok = greedy_deadline_schedule(&set, n, k).is_some();
        if greedy_ok != oracle_schedulable(&set, n) {
            return Err(format!("split on {set:?} n={n} k={k}"));
        }
    }
    Ok(format!("{samples} multisets"))
}

/// The production planner must never beat the exhaustive min-cost oracle
/// on instances small enough to enumerate.
fn verify_min_cost(samples: usize, seed: u64, budget: &OracleBudget) -> Result<String, String> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed.wrapping_add(1));
    let mut compared = 0usize;
    for _ in 0..samples {
        let sc = tiny_scenario(&mut rng);
        let result = plan(&sc, Mode::Shared);
        if !result.is_success() {
            continue;
        }
        let (best_cost, _) = oracle_min_cost_plan(&sc, budget)
            .map_err(|e| e.to_string())?
            .ok_or_else(|| "oracle misses a plan the planner found".to_string())?;
        let traj = result.schedule.trajectory(&sc);
        let greedy_cost: f64 = (0..sc.stations.len())
            .map(|b| sc.cost(b, traj[b][sc.horizon as usize - 1]))
            .sum();
        if greedy_cost < best_cost - 1e-9 {
            return Err(format!(
                "planner cost {greedy_cost} beats exhaustive optimum {best_cost}"
            ));
        }
        compared += 1;
    }
    Ok(format!("{compared} instances"))
}

/// A random co-located single-market instance inside the oracle budget.
fn tiny_scenario(rng: &mut rand_chacha::ChaCha8Rng) -> Scenario {
    use evoplan_core::{BaseStation, SubscriberCluster, TechClass};
    use rand::Rng;
    let types = vec![
        StationType {
            id: "off".into(),
            tech: TechClass::Off,
            sectors: 0,
            capacity: 0.0,
            radius_km: 0.0,
            cost: 0.0,
        },
        StationType {
            id: "3g".into(),
            tech: TechClass::ThreeG,
            sectors: 1,
            capacity: 100.0,
            radius_km: 5.0,
            cost: 1.0,
        },
        StationType {
            id: "lte1".into(),
            tech: TechClass::Lte,
            sectors: 1,
            capacity: 120.0,
            radius_km: 3.0,
            cost: 1.1,
        },
        StationType {
            id: "lte2".into(),
            tech: TechClass::Lte,
            sectors: 2,
            capacity: 240.0,
            radius_km: 3.0,
            cost: 2.0,
        },
    ];
    let (off, threeg, lte1, lte2) = (0usize, 1, 2, 3);
    let n_stations = rng.gen_range(2..=4usize);
    let horizon = rng.gen_range(3..=5u32);
    let stations: Vec<BaseStation> = (0..n_stations)
        .map(|b| {
            let legacy = rng.gen_bool(0.5);
            BaseStation {
                id: format!("b{b}"),
                x: 0.0,
                y: 0.0,
                initial_type: if legacy { threeg } else { lte1 },
                allowed_types: if legacy {
                    vec![off, threeg]
                } else {
                    vec![off, lte1, lte2]
                },
                owner: 0,
            }
        })
        .collect();
    let clusters = vec![SubscriberCluster {
        id: "c0".into(),
        x: 0.0,
        y: 0.0,
    }];
    let initial_cap: f64 = stations.iter().map(|s| types[s.initial_type].capacity).sum();
    let start = initial_cap * rng.gen_range(0.3..0.9);
    let growth = rng.gen_range(1.0..2.5f64);
    let demand: Vec<f64> = (1..=horizon)
        .map(|k| start * growth.powf((k - 1) as f64 / (horizon - 1).max(1) as f64))
        .collect();
    Scenario::new(
        types,
        stations,
        clusters,
        vec!["op1".into()],
        horizon,
        rng.gen_range(1..=2u32),
        1.0,
        1.0,
        demand,
        &[],
    )
    .expect("tiny instance is structurally sound")
}
