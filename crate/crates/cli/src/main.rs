//! Batch front end for the toolkit: frontier experiments, single runs,
//! point certification, oracle dumps, and method comparisons, with CSV and
//! SVG artifacts.
//!
//! Exit codes: 0 on success (for `certify`, the property was certified or
//! holds on the sample), 2 when a certification check comes back negative,
//! and 1 for usage errors or failures of any other kind.

mod report;
mod svg;

use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::str::FromStr;

use anyhow::{bail, Context};
use cc_pareto::bench::{self, AnalyticFacts};
use cc_pareto::cc1::{self, CC1Config, CC1Trace};
use cc_pareto::certify::{self, AbadieVerdict, GeoffrionVerdict, KktMode, KktVerdict};
use cc_pareto::json::ProblemJson;
use cc_pareto::oracle::{self, FrontierSet};
use cc_pareto::scalarize;
use cc_pareto::solver::{self, BackendChoice};
use cc_pareto::VectorProblem;
use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;

use report::RunReport;

#[derive(Parser)]
#[command(
    name = "cc-pareto",
    version,
    about = "Pareto minimizers for convex vector problems via anchored-sum scalarization"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// List the registered benchmark problems.
    List,
    /// Run the anchored-descent loop from one start point.
    Solve(SolveArgs),
    /// Multi-start frontier experiment; emits CSV and an optional SVG.
    Frontier(FrontierArgs),
    /// Check an optimality or regularity property at a point.
    Certify(CertifyArgs),
    /// Brute-force grid frontier for cross-validation (n <= 3).
    Oracle(OracleArgs),
    /// Compare anchored descent and a weighted-sum sweep against the oracle.
    Compare(CompareArgs),
}

/// Problem selection: a registry id or a JSON file, exactly one of the two.
#[derive(Args)]
#[group(required = true, multiple = false)]
struct ProblemArgs {
    /// Benchmark id (see `list`), e.g. `schaffer` or `random-quadratic(7,3,2)`.
    #[arg(long)]
    problem: Option<String>,
    /// Path to a problem description in the JSON schema.
    #[arg(long, value_name = "PATH")]
    problem_file: Option<PathBuf>,
}

struct Loaded {
    id: String,
    problem: VectorProblem,
    facts: Option<AnalyticFacts>,
}

impl ProblemArgs {
    fn load(&self) -> anyhow::Result<Loaded> {
        if let Some(id) = &self.problem {
            let named = bench::get(id)?;
            Ok(Loaded {
                id: named.id,
                problem: named.problem,
                facts: Some(named.facts),
            })
        } else {
            let path = self.problem_file.as_ref().expect("clap enforces the group");
            let text =
                fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            let problem = ProblemJson::parse(&text)?.build()?;
            let id = path
                .file_stem()
                .and_then(|s| s.to_str())
                .unwrap_or("custom")
                .to_string();
            Ok(Loaded {
                id,
                problem,
                facts: None,
            })
        }
    }
}

/// Knobs of the outer loop and the inner solver.
#[derive(Args)]
struct AlgoArgs {
    /// Initial step tolerance.
    #[arg(long, default_value_t = 1e-3)]
    eps0: f64,
    /// Geometric decay of the step tolerance per outer iteration.
    #[arg(long, default_value_t = 0.5)]
    gamma: f64,
    /// Floor for the step tolerance.
    #[arg(long, default_value_t = 1e-6)]
    eps_min: f64,
    /// Feasibility tolerance of the inner solver.
    #[arg(long, default_value_t = 1e-8)]
    tol: f64,
    /// Outer iteration budget.
    #[arg(long, default_value_t = 50)]
    max_outer: u64,
    /// Scalar backend: auto, lp, or penalty-subgradient.
    #[arg(long, default_value = "auto")]
    backend: String,
    /// Add the proximal quadratic term to every inner subproblem.
    #[arg(long)]
    proximal: bool,
}

impl AlgoArgs {
    fn config(&self) -> anyhow::Result<CC1Config> {
        let mut cfg = CC1Config {
            eps0: self.eps0,
            gamma: self.gamma,
            eps_min: self.eps_min,
            max_outer: self.max_outer,
            proximal: self.proximal,
            ..CC1Config::default()
        };
        cfg.solver.backend = BackendChoice::from_str(&self.backend)?;
        cfg.solver.feas_tol = self.tol;
        cfg.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Start point, comma separated (e.g. `0.5,-0.25`).
    #[arg(long, value_name = "COORDS")]
    start: String,
    #[command(flatten)]
    algo: AlgoArgs,
    /// Print the full trace as JSON instead of a summary.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct FrontierArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of seeded random starts.
    #[arg(long, default_value_t = 200)]
    starts: usize,
    /// Seed for the start sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[command(flatten)]
    algo: AlgoArgs,
    /// Write the per-start CSV here (default: stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
    /// Write an objective-space scatter SVG here (2 objectives only).
    #[arg(long, value_name = "PATH")]
    svg: Option<PathBuf>,
    /// Print the run report as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct CertifyArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Point to certify, comma separated.
    #[arg(long, value_name = "COORDS")]
    point: String,
    /// Property to check.
    #[arg(long, value_enum)]
    mode: CertifyMode,
    /// Random directions for the regularity check.
    #[arg(long, default_value_t = 64)]
    samples: usize,
    /// Seed for the direction sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Grid resolution for the trade-off estimator.
    #[arg(long, default_value_t = 1001)]
    grid: usize,
    /// Trade-off ratio cap for the estimator.
    #[arg(long, default_value_t = 1e6)]
    cap: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum CertifyMode {
    WeakKkt,
    StrongKkt,
    Abadie,
    Geoffrion,
}

impl CertifyMode {
    fn label(self) -> &'static str {
        match self {
            CertifyMode::WeakKkt => "weak-kkt",
            CertifyMode::StrongKkt => "strong-kkt",
            CertifyMode::Abadie => "abadie",
            CertifyMode::Geoffrion => "geoffrion",
        }
    }
}

#[derive(Args)]
struct OracleArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Grid resolution per dimension.
    #[arg(long, default_value_t = 401)]
    grid: usize,
    /// Write the frontier CSV here (default: stdout).
    #[arg(long, value_name = "PATH")]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CompareArgs {
    #[command(flatten)]
    problem: ProblemArgs,
    /// Number of seeded random starts for anchored descent.
    #[arg(long, default_value_t = 50)]
    starts: usize,
    /// Seed for the start sampler.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Number of strictly interior weights on the weighted-sum sweep.
    #[arg(long, default_value_t = 50)]
    tau_grid: usize,
    /// Oracle grid resolution used as ground truth.
    #[arg(long, default_value_t = 1001)]
    grid: usize,
    #[command(flatten)]
    algo: AlgoArgs,
    /// Print the comparison as JSON.
    #[arg(long)]
    json: bool,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            // --help and --version land here as well; only genuine usage
            // mistakes exit nonzero.
            let code = u8::from(err.use_stderr());
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    init_worker_pool();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

/// Honors `CC_PARETO_THREADS` before any parallel work starts.
fn init_worker_pool() {
    if let Ok(raw) = std::env::var("CC_PARETO_THREADS") {
        match raw.parse::<usize>() {
            Ok(n) if n >= 1 => {
                let _ = rayon::ThreadPoolBuilder::new()
                    .num_threads(n)
                    .build_global();
            }
            _ => eprintln!("warning: ignoring CC_PARETO_THREADS={raw:?} (want a positive integer)"),
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<ExitCode> {
    match cli.command {
        Command::List => {
            cmd_list();
            Ok(ExitCode::SUCCESS)
        }
        Command::Solve(args) => cmd_solve(args).map(|()| ExitCode::SUCCESS),
        Command::Frontier(args) => cmd_frontier(args).map(|()| ExitCode::SUCCESS),
        Command::Certify(args) => cmd_certify(args),
        Command::Oracle(args) => cmd_oracle(args).map(|()| ExitCode::SUCCESS),
        Command::Compare(args) => cmd_compare(args).map(|()| ExitCode::SUCCESS),
    }
}

fn cmd_list() {
    for (id, description) in bench::list() {
        println!("{id:<28} {description}");
    }
}

fn cmd_solve(args: SolveArgs) -> anyhow::Result<()> {
    let loaded = args.problem.load()?;
    let cfg = args.algo.config()?;
    let x0 = parse_coords(&args.start)?;
    let trace = cc1::run_cc1(&loaded.problem, &x0, &cfg)?;
    if args.json {
        let doc = serde_json::json!({
            "problem": loaded.id,
            "config": cfg,
            "trace": trace,
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        let start = trace.start();
        println!("problem: {}", loaded.id);
        println!("start:   x = {:?}  f = {:?}", start.x, start.f);
        println!("final:   x = {:?}  f = {:?}", trace.final_x, trace.final_f);
        println!(
            "stopped: {} after {} outer iterations",
            report::termination_label(trace.termination),
            trace.records.len()
        );
    }
    Ok(())
}

fn cmd_frontier(args: FrontierArgs) -> anyhow::Result<()> {
    if args.starts == 0 {
        bail!("--starts must be at least 1");
    }
    let loaded = args.problem.load()?;
    let cfg = args.algo.config()?;
    let runs = cc1::multi_start(&loaded.problem, args.starts, args.seed, &cfg)?;
    let traces: Vec<CC1Trace> = runs.into_iter().collect::<cc_pareto::Result<_>>()?;

    let mut report = RunReport::new(&loaded.id, &cfg, &traces, loaded.facts.as_ref());
    let csv = report.to_csv();
    match &args.out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            report.files.push(path.display().to_string());
        }
        None => print!("{csv}"),
    }

    if let Some(path) = &args.svg {
        if loaded.problem.num_objectives() != 2 {
            bail!("--svg needs a problem with exactly 2 objectives");
        }
        let starts: Vec<[f64; 2]> = report
            .rows
            .iter()
            .map(|r| [r.start_f[0], r.start_f[1]])
            .collect();
        let finals: Vec<[f64; 2]> = report.rows.iter().map(|r| [r.f[0], r.f[1]]).collect();
        let doc = svg::scatter(&loaded.id, &starts, &finals);
        fs::write(path, doc).with_context(|| format!("writing {}", path.display()))?;
        report.files.push(path.display().to_string());
    }

    if args.json {
        println!("{}", serde_json::to_string_pretty(&report)?);
    } else if args.out.is_some() {
        report.print_summary();
    }
    Ok(())
}

fn cmd_certify(args: CertifyArgs) -> anyhow::Result<ExitCode> {
    let loaded = args.problem.load()?;
    let point = parse_coords(&args.point)?;
    let (report, positive) = match args.mode {
        CertifyMode::StrongKkt | CertifyMode::WeakKkt => {
            let mode = match args.mode {
                CertifyMode::StrongKkt => KktMode::Strong,
                _ => KktMode::Weak,
            };
            let cert = certify::kkt_certificate(&loaded.problem, &point, mode)?;
            let positive = cert.verdict == KktVerdict::Certified;
            (serde_json::to_value(&cert)?, positive)
        }
        CertifyMode::Abadie => {
            let rep = certify::check_abadie(&loaded.problem, &point, args.samples, args.seed)?;
            let positive = rep.verdict == AbadieVerdict::HoldsOnSample;
            (serde_json::to_value(&rep)?, positive)
        }
        CertifyMode::Geoffrion => {
            let rep = certify::estimate_geoffrion(&loaded.problem, &point, args.grid, args.cap)?;
            let positive = rep.verdict == GeoffrionVerdict::Bounded;
            (serde_json::to_value(&rep)?, positive)
        }
    };
    let doc = serde_json::json!({
        "problem": loaded.id,
        "point": point,
        "mode": args.mode.label(),
        "certified": positive,
        "report": report,
    });
    println!("{}", serde_json::to_string_pretty(&doc)?);
    Ok(if positive {
        ExitCode::SUCCESS
    } else {
        ExitCode::from(2)
    })
}

fn cmd_oracle(args: OracleArgs) -> anyhow::Result<()> {
    let loaded = args.problem.load()?;
    let front = oracle::grid_pareto(&loaded.problem, args.grid)?;
    let csv = front.to_csv();
    match &args.out {
        Some(path) => {
            fs::write(path, &csv).with_context(|| format!("writing {}", path.display()))?;
            println!("problem: {}", loaded.id);
            println!(
                "frontier points: {} at resolution {}",
                front.points().len(),
                front.resolution()
            );
            println!("wrote {}", path.display());
        }
        None => print!("{csv}"),
    }
    Ok(())
}

fn cmd_compare(args: CompareArgs) -> anyhow::Result<()> {
    if args.starts == 0 {
        bail!("--starts must be at least 1");
    }
    if args.tau_grid == 0 {
        bail!("--tau-grid must be at least 1");
    }
    let loaded = args.problem.load()?;
    if loaded.problem.num_objectives() != 2 {
        bail!("compare needs a problem with exactly 2 objectives");
    }
    let cfg = args.algo.config()?;
    let front = oracle::grid_pareto(&loaded.problem, args.grid)?;

    let runs = cc1::multi_start(&loaded.problem, args.starts, args.seed, &cfg)?;
    let traces: Vec<CC1Trace> = runs.into_iter().collect::<cc_pareto::Result<_>>()?;
    let converged = traces.iter().filter(|t| t.termination.converged()).count();
    let cc1_images: Vec<Vec<f64>> = traces
        .iter()
        .filter(|t| t.termination.converged())
        .map(|t| t.final_f.clone())
        .collect();

    // Weighted-sum sweep over strictly positive weights (t, 1-t).
    let ws_images: Vec<Vec<f64>> = (1..=args.tau_grid)
        .into_par_iter()
        .map(|i| {
            let t = i as f64 / (args.tau_grid + 1) as f64;
            let sub = scalarize::weighted_sum(&loaded.problem, &[t, 1.0 - t])?;
            let res = solver::solve(&sub, &cfg.solver, None)?;
            loaded.problem.objective_values(&res.x)
        })
        .collect::<cc_pareto::Result<_>>()?;

    let cc1_distance = one_sided_hausdorff(&cc1_images, &front);
    let ws_distance = one_sided_hausdorff(&ws_images, &front);

    if args.json {
        let doc = serde_json::json!({
            "problem": loaded.id,
            "oracle_resolution": front.resolution(),
            "oracle_points": front.points().len(),
            "cc1": {
                "starts": args.starts,
                "converged": converged,
                "distance_to_oracle": cc1_distance,
            },
            "weighted_sum": {
                "weights": args.tau_grid,
                "distance_to_oracle": ws_distance,
            },
        });
        println!("{}", serde_json::to_string_pretty(&doc)?);
    } else {
        println!("problem: {}", loaded.id);
        println!(
            "oracle: {} frontier points at resolution {}",
            front.points().len(),
            front.resolution()
        );
        println!(
            "cc1: {converged}/{} converged, image distance to oracle {cc1_distance:.6}",
            args.starts
        );
        println!(
            "weighted-sum: {} weights, image distance to oracle {ws_distance:.6}",
            args.tau_grid
        );
    }
    Ok(())
}

/// Worst, over method images, of the best ∞-distance to an oracle image.
fn one_sided_hausdorff(images: &[Vec<f64>], front: &FrontierSet) -> f64 {
    images
        .iter()
        .map(|f| {
            front
                .points()
                .iter()
                .map(|entry| inf_distance(f, &entry.f))
                .fold(f64::INFINITY, f64::min)
        })
        .fold(0.0, f64::max)
}

fn inf_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max)
}

fn parse_coords(text: &str) -> anyhow::Result<Vec<f64>> {
    text.split(',')
        .map(|tok| {
            let tok = tok.trim();
            tok.parse::<f64>()
                .map_err(|_| anyhow::anyhow!("bad coordinate {tok:?} (want a number)"))
        })
        .collect()
}
