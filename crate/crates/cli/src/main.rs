//! `beliefplan`: solve, simulate, benchmark and inspect games with sensing.
//!
//! Exit codes: 0 success, 1 usage, 2 model or specification error, 3 run
//! failure (dead end, exhausted sensing budget, contradiction).

use std::fmt::Write as _;
use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::str::FromStr;

use beliefplan::arena::{parse_model, serialize_model};
use beliefplan::automata::parse_spec_document;
use beliefplan::executor::{run, EnvPolicy, RunConfig, RunReport, Termination};
use beliefplan::observation::{initial_belief, Belief};
use beliefplan::product::SolutionExport;
use beliefplan::sensing::{build_brtree, solve_sensing, NodeKind};
use beliefplan::strategy::progress_defined;
use beliefplan::wumpus::{build_wumpus, WumpusConfig, WumpusStart, WUMPUS_SPEC};
use beliefplan::Instance;
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

#[derive(Parser)]
#[command(name = "beliefplan", version, about = "Reactive planning with sensing actions in partially observable games")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the complete-information game and print its summary.
    Solve {
        model: PathBuf,
        spec: PathBuf,
        /// Write the per-state solution (owner, rank, action) as JSON.
        #[arg(long)]
        export: Option<PathBuf>,
    },
    /// Run the composite strategy against an environment policy.
    Simulate {
        model: PathBuf,
        spec: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        run: RunArgs,
        /// Write the trace, one JSON record per line.
        #[arg(long)]
        trace: Option<PathBuf>,
        /// Include full beliefs in the trace.
        #[arg(long)]
        belief_full: bool,
        /// Include decision latency in the trace.
        #[arg(long)]
        latency: bool,
        /// Write the run statistics here instead of standard output.
        #[arg(long)]
        stats: Option<PathBuf>,
        /// Write the belief-size series as `step size` lines.
        #[arg(long)]
        series: Option<PathBuf>,
    },
    /// Run the Wumpus gridworld over several seeds.
    BenchWumpus {
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        seeds: SeedArgs,
        /// Grid configuration as JSON; the built-in layout otherwise.
        #[arg(long)]
        config: Option<PathBuf>,
        /// Write the generated model and specification documents into this
        /// directory.
        #[arg(long)]
        emit: Option<PathBuf>,
        /// Print the summary as JSON.
        #[arg(long)]
        json: bool,
    },
    /// Build the belief revision tree of a belief and print it as JSON.
    ExportBrt {
        model: PathBuf,
        spec: PathBuf,
        /// File of whitespace-separated product state names; the initial
        /// belief otherwise.
        #[arg(long)]
        belief: Option<PathBuf>,
        #[arg(long)]
        max_nodes: Option<usize>,
        /// Write the tree here instead of standard output.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Run `simulate` over several seeds and aggregate the statistics.
    Sweep {
        model: PathBuf,
        spec: PathBuf,
        #[command(flatten)]
        run: RunArgs,
        #[command(flatten)]
        seeds: SeedArgs,
        #[arg(long)]
        json: bool,
    },
}

#[derive(Args, Clone)]
struct RunArgs {
    #[arg(long, default_value_t = 1000, value_parser = clap::value_parser!(u64).range(1..))]
    steps: u64,
    /// `random`, `stationary` or `scripted:<file>`.
    #[arg(long, default_value = "random")]
    env: EnvArg,
    /// Maximum sensing actions per system turn.
    #[arg(long)]
    budget: Option<u32>,
}

#[derive(Args, Clone)]
struct SeedArgs {
    #[arg(long, default_value_t = 20, value_parser = clap::value_parser!(u64).range(1..))]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed_base: u64,
}

#[derive(Clone, Debug)]
enum EnvArg {
    Random,
    Stationary,
    Scripted(PathBuf),
}

impl FromStr for EnvArg {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "random" => Ok(EnvArg::Random),
            "stationary" => Ok(EnvArg::Stationary),
            _ => match s.strip_prefix("scripted:") {
                Some(path) if !path.is_empty() => Ok(EnvArg::Scripted(path.into())),
                _ => Err(format!("expected random, stationary or scripted:<file>, got `{s}`")),
            },
        }
    }
}

enum Failure {
    Usage(String),
    Model(String),
    Run(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Usage(_) => 1,
            Failure::Model(_) => 2,
            Failure::Run(_) => 3,
        }
    }

    fn message(&self) -> &str {
        match self {
            Failure::Usage(m) | Failure::Model(m) | Failure::Run(m) => m,
        }
    }
}

type Outcome = Result<(), Failure>;

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 1 } else { 0 });
        }
    };
    match dispatch(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}

fn dispatch(command: Command) -> Outcome {
    match command {
        Command::Solve { model, spec, export } => solve(&model, &spec, export.as_deref()),
        Command::Simulate { model, spec, seed, run, trace, belief_full, latency, stats, series } => {
            let cfg = RunConfig {
                record_beliefs: belief_full,
                record_latency: latency,
                ..run_config(&run, seed)?
            };
            let inst = load(&model, &spec)?;
            simulate(&inst, &cfg, trace.as_deref(), stats.as_deref(), series.as_deref())
        }
        Command::BenchWumpus { run, seeds, config, emit, json } => bench_wumpus(&run, &seeds, config.as_deref(), emit.as_deref(), json),
        Command::ExportBrt { model, spec, belief, max_nodes, out } => {
            export_brt(&model, &spec, belief.as_deref(), max_nodes, out.as_deref())
        }
        Command::Sweep { model, spec, run, seeds, json } => {
            run_config(&run, 0)?;
            let inst = load(&model, &spec)?;
            let reports = sweep(&inst, &run, &seeds)?;
            print_summary(&summarize(&inst, &reports), &reports, json, &[])
        }
    }
}

fn read(path: &Path) -> Result<String, Failure> {
    fs::read_to_string(path).map_err(|e| Failure::Model(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Outcome {
    fs::write(path, contents).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))
}

fn load(model: &Path, spec: &Path) -> Result<Instance, Failure> {
    let model_text = read(model)?;
    let spec_text = read(spec)?;
    let model = parse_model(&model_text).map_err(|e| Failure::Model(format!("{}: {e}", model.display())))?;
    let dba = parse_spec_document(&spec_text, model.arena.ap_names())
        .map_err(|e| Failure::Model(format!("{}: {e}", spec.display())))?;
    Instance::new(model, dba).map_err(|e| Failure::Model(e.to_string()))
}

fn run_config(args: &RunArgs, seed: u64) -> Result<RunConfig, Failure> {
    let env_policy = match &args.env {
        EnvArg::Random => EnvPolicy::UniformRandom,
        EnvArg::Stationary => EnvPolicy::Stationary,
        EnvArg::Scripted(path) => {
            let text = fs::read_to_string(path).map_err(|e| Failure::Usage(format!("{}: {e}", path.display())))?;
            let names: Vec<String> = text.split_whitespace().map(|s| s.trim_end_matches("@env").to_string()).collect();
            if names.is_empty() {
                return Err(Failure::Usage(format!("{}: empty script", path.display())));
            }
            EnvPolicy::Scripted(names)
        }
    };
    Ok(RunConfig {
        env_policy,
        sensing_budget_per_turn: args.budget,
        ..RunConfig::new(seed, args.steps as usize)
    })
}

fn ms(d: std::time::Duration) -> f64 {
    d.as_secs_f64() * 1e3
}

fn solve(model: &Path, spec: &Path, export: Option<&Path>) -> Outcome {
    let inst = load(model, spec)?;
    let doc = SolutionExport::new(&inst.arena, &inst.game, &inst.solution);
    println!("states: {}", doc.states);
    println!("winning: {}", doc.winning);
    println!("max_rank: {}", doc.max_rank);
    println!("initial: {} ({})", doc.initial, if doc.initial_winning { "winning" } else { "losing" });
    println!("build_ms: {:.3}", ms(inst.build_time));
    println!("solve_ms: {:.3}", ms(inst.solve_time));
    if let Some(path) = export {
        let text = serde_json::to_string_pretty(&doc).expect("solution serializes");
        write(path, &(text + "\n"))?;
    }
    Ok(())
}

fn simulate(inst: &Instance, cfg: &RunConfig, trace: Option<&Path>, stats: Option<&Path>, series: Option<&Path>) -> Outcome {
    let report = run(inst, cfg).map_err(|e| Failure::Run(e.to_string()))?;
    if let Some(path) = trace {
        let file = fs::File::create(path).map_err(|e| Failure::Run(format!("{}: {e}", path.display())))?;
        let mut out = BufWriter::new(file);
        for event in &report.trace {
            serde_json::to_writer(&mut out, event).expect("trace events serialize");
            out.write_all(b"\n").map_err(|e| Failure::Run(e.to_string()))?;
        }
        out.flush().map_err(|e| Failure::Run(e.to_string()))?;
    }
    if let Some(path) = series {
        let text: String = report.belief_series().iter().map(|(s, n)| format!("{s} {n}\n")).collect();
        write(path, &text)?;
    }
    let doc = json!({
        "seed": cfg.seed,
        "initial_belief_size": report.initial_belief_size,
        "termination": report.termination,
        "stats": report.stats,
    });
    let text = serde_json::to_string_pretty(&doc).expect("stats serialize") + "\n";
    match stats {
        Some(path) => write(path, &text)?,
        None => print!("{text}"),
    }
    termination_outcome(&report.termination)
}

fn termination_outcome(t: &Termination) -> Outcome {
    match t {
        Termination::MaxSteps => Ok(()),
        Termination::DeadEnd { belief } => Err(Failure::Run(format!(
            "dead end: no progress action and no refining sensor at belief {{{}}}",
            belief.join(", ")
        ))),
        Termination::BudgetExhausted { belief } => {
            Err(Failure::Run(format!("sensing budget exhausted at belief {{{}}}", belief.join(", "))))
        }
    }
}

fn sweep(inst: &Instance, args: &RunArgs, seeds: &SeedArgs) -> Result<Vec<RunReport>, Failure> {
    let base = run_config(args, 0)?;
    (seeds.seed_base..seeds.seed_base + seeds.seeds)
        .into_par_iter()
        .map(|seed| run(inst, &RunConfig { seed, ..base.clone() }).map_err(|e| Failure::Run(format!("seed {seed}: {e}"))))
        .collect()
}

#[derive(Serialize)]
struct Summary {
    runs: usize,
    steps: usize,
    states: usize,
    winning: usize,
    build_ms: f64,
    solve_ms: f64,
    f_visits_min: usize,
    f_visits_mean: f64,
    f_visits_max: usize,
    max_belief_size: usize,
    sensing_mean: f64,
    mean_latency_us: f64,
    dead_ends: usize,
    outside_win: usize,
}

fn summarize(inst: &Instance, reports: &[RunReport]) -> Summary {
    let n = reports.len().max(1) as f64;
    let f: Vec<usize> = reports.iter().map(|r| r.stats.f_visits).collect();
    Summary {
        runs: reports.len(),
        steps: reports.first().map_or(0, |r| r.stats.steps),
        states: inst.game.num_states(),
        winning: inst.solution.num_winning(),
        build_ms: ms(inst.build_time),
        solve_ms: ms(inst.solve_time),
        f_visits_min: f.iter().copied().min().unwrap_or(0),
        f_visits_mean: f.iter().sum::<usize>() as f64 / n,
        f_visits_max: f.iter().copied().max().unwrap_or(0),
        max_belief_size: reports.iter().map(|r| r.stats.max_belief_size).max().unwrap_or(0),
        sensing_mean: reports.iter().map(|r| r.stats.sensing_actions).sum::<usize>() as f64 / n,
        mean_latency_us: reports.iter().map(|r| r.stats.mean_latency_us).sum::<f64>() / n,
        dead_ends: reports.iter().filter(|r| r.termination != Termination::MaxSteps).count(),
        outside_win: reports.iter().map(|r| r.stats.outside_win).sum(),
    }
}

fn print_summary(summary: &Summary, reports: &[RunReport], json: bool, notes: &[String]) -> Outcome {
    if json {
        let runs: Vec<_> = reports
            .iter()
            .map(|r| json!({ "termination": r.termination, "stats": r.stats }))
            .collect();
        let doc = json!({ "summary": summary, "runs": runs, "notes": notes });
        println!("{}", serde_json::to_string_pretty(&doc).expect("summary serializes"));
    } else {
        let mut out = String::from("run  f_visits  max_belief  sensing  physical  latency_us  end\n");
        for (i, r) in reports.iter().enumerate() {
            let end = match r.termination {
                Termination::MaxSteps => "max_steps",
                Termination::DeadEnd { .. } => "dead_end",
                Termination::BudgetExhausted { .. } => "budget",
            };
            let s = &r.stats;
            let _ = writeln!(
                out,
                "{i:<4} {:>9} {:>11} {:>8} {:>9} {:>11.1}  {end}",
                s.f_visits, s.max_belief_size, s.sensing_actions, s.physical_actions, s.mean_latency_us
            );
        }
        let value = serde_json::to_value(summary).expect("summary serializes");
        for (k, v) in value.as_object().expect("summary is an object") {
            let _ = writeln!(out, "{k}: {v}");
        }
        for note in notes {
            let _ = writeln!(out, "note: {note}");
        }
        print!("{out}");
    }
    if summary.dead_ends > 0 {
        return Err(Failure::Run(format!("{} of {} runs ended early", summary.dead_ends, summary.runs)));
    }
    Ok(())
}

fn bench_wumpus(args: &RunArgs, seeds: &SeedArgs, config: Option<&Path>, emit: Option<&Path>, json: bool) -> Outcome {
    run_config(args, 0)?;
    let (config, notes) = match config {
        Some(path) => {
            let c: WumpusConfig = serde_json::from_str(&read(path)?)
                .map_err(|e| Failure::Model(format!("{}: {e}", path.display())))?;
            (c, vec![format!("configuration from {}", path.display())])
        }
        None => {
            let c = WumpusConfig::default();
            let notes = vec![
                format!(
                    "built-in layout: R1 {} R2 {} R3 {}, robot starts at {}, region of {} cells",
                    c.r1,
                    c.r2,
                    c.r3,
                    c.robot_start,
                    c.region.len()
                ),
                "the region, start cells and goal cells are a reconstruction, not measured values".into(),
            ];
            (c, notes)
        }
    };
    let mut notes = notes;
    if matches!(config.wumpus_start, WumpusStart::AnywhereInRegion) {
        notes.push("the wumpus may start anywhere in the region".into());
    }
    if matches!(args.env, EnvArg::Random) {
        notes.push("assumed wumpus policy: uniform over its enabled moves".into());
    }
    let w = build_wumpus(&config).map_err(|e| Failure::Model(e.to_string()))?;
    if let Some(dir) = emit {
        fs::create_dir_all(dir).map_err(|e| Failure::Run(format!("{}: {e}", dir.display())))?;
        write(&dir.join("wumpus.model"), &serialize_model(&w.model))?;
        write(&dir.join("wumpus.spec"), &format!("{WUMPUS_SPEC}\n"))?;
    }
    let inst = Instance::new(w.model, w.dba).map_err(|e| Failure::Model(e.to_string()))?;
    let reports = sweep(&inst, args, seeds)?;
    print_summary(&summarize(&inst, &reports), &reports, json, &notes)
}

fn export_brt(model: &Path, spec: &Path, belief: Option<&Path>, max_nodes: Option<usize>, out: Option<&Path>) -> Outcome {
    let inst = load(model, spec)?;
    let game = &inst.game;
    let root = match belief {
        Some(path) => {
            let text = read(path)?;
            let mut states = Vec::new();
            for name in text.split_whitespace() {
                let q = game
                    .state_by_name(name)
                    .ok_or_else(|| Failure::Model(format!("{}: unknown product state `{name}`", path.display())))?;
                states.push(q);
            }
            if states.is_empty() {
                return Err(Failure::Model(format!("{}: empty belief", path.display())));
            }
            Belief::new(states)
        }
        None => initial_belief(game, &inst.observations),
    };
    let mut fp = |b: &Belief| progress_defined(&inst.solution, game, b);
    let tree = build_brtree(&root, &inst.sensing, &mut fp, max_nodes).map_err(|e| Failure::Run(e.to_string()))?;
    let strategy = solve_sensing(&tree);
    let nodes: Vec<_> = tree
        .nodes()
        .iter()
        .enumerate()
        .map(|(i, node)| {
            let mut v = json!({
                "id": i,
                "belief": node.belief.names(game),
                "rank": strategy.rank(&node.belief),
            });
            match &node.kind {
                NodeKind::Leaf(reason) => v["leaf"] = json!(reason),
                NodeKind::Internal(splits) => {
                    v["splits"] = splits
                        .iter()
                        .map(|s| json!({ "query": inst.sensing.describe(s.query), "holds": s.holds, "fails": s.fails }))
                        .collect();
                    v["choice"] = json!(strategy.choice(&node.belief).map(|q| inst.sensing.describe(q)));
                }
            }
            v
        })
        .collect();
    let doc = json!({ "root": tree.root(), "depth": tree.depth(), "root_rank": strategy.root_rank(), "nodes": nodes });
    let text = serde_json::to_string_pretty(&doc).expect("tree serializes") + "\n";
    match out {
        Some(path) => write(path, &text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
