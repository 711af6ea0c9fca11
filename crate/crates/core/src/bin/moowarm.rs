use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use moowarm::ecm::{harvest_mask, run_ecm, EcmConfig, GridSpec, OrderSignature, WarmPolicy};
use moowarm::experiment::{
    run_experiment, summarize, verify, write_outputs, write_summary_csv, wsm_seed, EcmAxis, ExperimentMatrix,
    MatrixInstance, WsmAxis,
};
use moowarm::instances::{generate, Family, GenSpec};
use moowarm::ordergrid::{tradeoff_frontier, write_tradeoff_csv, WsMode};
use moowarm::report::{write_report_csv, RunReport};
use moowarm::wsm::{run_wsm, WeightOrdering, WsmConfig, WsmWarm};
use moowarm::Error;

#[derive(Parser)]
#[command(
    name = "moowarm",
    version,
    about = "Warm-started multi-objective integer programming"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a seeded KP, AP or TSP instance.
    Generate(GenerateArgs),
    /// Run one WSM or ECM configuration on one instance.
    Solve(RunArgs),
    /// Count warm starts and skippable cells for every order signature.
    AnalyzeOrder(AnalyzeArgs),
    /// Run one configuration and check it against the brute-force oracle.
    Verify(RunArgs),
    /// Run an experiment matrix and write report, summary and trade-off CSVs.
    Report(ReportArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long)]
    family: String,
    #[arg(long)]
    size: usize,
    /// Number of objectives.
    #[arg(long)]
    p: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value = ".")]
    out: PathBuf,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MethodArg {
    Wsm,
    Ecm,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum OrderingArg {
    Random,
    Lex,
    Angle,
}

impl From<OrderingArg> for WeightOrdering {
    fn from(o: OrderingArg) -> Self {
        match o {
            OrderingArg::Random => WeightOrdering::Random,
            OrderingArg::Lex => WeightOrdering::Lexicographic,
            OrderingArg::Angle => WeightOrdering::Angle,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum WarmArg {
    None,
    Weak,
    Strong,
}

impl From<WarmArg> for WarmPolicy {
    fn from(w: WarmArg) -> Self {
        match w {
            WarmArg::None => WarmPolicy::None,
            WarmArg::Weak => WarmPolicy::Weak,
            WarmArg::Strong => WarmPolicy::Strong,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct RunArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, value_enum)]
    method: MethodArg,
    /// Weight samples (WSM).
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, value_enum, default_value = "random")]
    ordering: OrderingArg,
    /// Levels per objective (ECM), or `full` for every integer level.
    #[arg(long, default_value = "10")]
    grid: String,
    /// Order signature such as `o+-` (ECM); all ascending by default.
    #[arg(long)]
    signature: Option<String>,
    /// WSM accepts `none` and `weak` (previous optimum).
    #[arg(long, value_enum, default_value = "none")]
    warm: WarmArg,
    #[arg(long, value_enum, default_value = "off")]
    propagate: Switch,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Check the run against the brute-force oracle.
    #[arg(long)]
    verify: bool,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long)]
    instance: PathBuf,
    #[arg(long, default_value = "10")]
    grid: String,
    /// Restrict the warm-start mode; both by default.
    #[arg(long, value_enum)]
    warm: Option<WarmArg>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long, required = true)]
    instance: Vec<PathBuf>,
    #[arg(long, value_enum)]
    method: Vec<MethodArg>,
    #[arg(long, default_value_t = 100)]
    samples: usize,
    #[arg(long, value_enum)]
    ordering: Vec<OrderingArg>,
    #[arg(long, default_value = "10")]
    grid: String,
    #[arg(long)]
    signature: Vec<String>,
    #[arg(long, value_enum)]
    warm: Vec<WarmArg>,
    #[arg(long, value_enum)]
    propagate: Vec<Switch>,
    #[arg(long)]
    rho: Option<f64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 1)]
    repetitions: usize,
    #[arg(long)]
    out: PathBuf,
    /// Verify every run against the brute-force oracle.
    #[arg(long)]
    verify: bool,
}

enum Failure {
    Validation(String),
    Verification(String),
    Runtime(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::Parse(_) | Error::Validation(_) | Error::Dimension { .. } => Failure::Validation(e.to_string()),
            _ => Failure::Runtime(e.to_string()),
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Runtime(e.to_string())
    }
}

fn parse_grid(text: &str) -> Result<GridSpec, Failure> {
    if text == "full" {
        return Ok(GridSpec::IntegerRange { upper: None });
    }
    match text.parse::<usize>() {
        Ok(m) if m >= 1 => Ok(GridSpec::Equidistant(m)),
        _ => Err(Failure::Validation(format!(
            "--grid expects a positive integer or `full`, got {text:?}"
        ))),
    }
}

fn wsm_warm(w: WarmArg) -> Result<WsmWarm, Failure> {
    match w {
        WarmArg::None => Ok(WsmWarm::None),
        WarmArg::Weak => Ok(WsmWarm::Previous),
        WarmArg::Strong => Err(Failure::Validation("WSM supports --warm none or weak".into())),
    }
}

fn run_one(args: &RunArgs) -> Result<(MatrixInstance, RunReport), Failure> {
    let inst = MatrixInstance::load(&args.instance)?;
    let mut report = match args.method {
        MethodArg::Wsm => {
            let config = WsmConfig {
                num_samples: args.samples,
                ordering: args.ordering.into(),
                warm_start: wsm_warm(args.warm)?,
                seed: wsm_seed(args.seed, &inst.label),
            };
            run_wsm(&inst.problem, &config)?
        }
        MethodArg::Ecm => {
            let p = inst.problem.objective_count();
            let signature = match &args.signature {
                Some(s) => s.parse::<OrderSignature>()?,
                None => OrderSignature::all_ascending(p - 1),
            };
            let config = EcmConfig {
                grid: parse_grid(&args.grid)?,
                signature,
                warm: args.warm.into(),
                propagate: args.propagate == Switch::On,
                rho: args.rho,
            };
            run_ecm(&inst.problem, &config)?
        }
    };
    report.instance = inst.label.clone();
    Ok((inst, report))
}

fn print_report(report: &RunReport) {
    let t = &report.totals;
    println!(
        "{} {} {} warm={} propagate={}: {} subproblems, {} solved, {} skipped, {} injected, {} LP iterations, {} nodes, {:.1} ms, {} archive points",
        report.instance,
        report.method,
        report.variant,
        report.warm,
        report.propagate_label(),
        report.records.len(),
        t.solves,
        t.skips,
        t.injections,
        t.lp_iterations,
        t.nodes,
        t.wall_ms,
        report.archive.len()
    );
}

fn write_single(report: &RunReport, out: &Path) -> Result<(), Failure> {
    fs::create_dir_all(out)?;
    write_report_csv(fs::File::create(out.join("report.csv"))?, std::slice::from_ref(report))?;
    write_summary_csv(
        fs::File::create(out.join("summary.csv"))?,
        &summarize(std::slice::from_ref(report)),
    )?;
    fs::write(out.join("archive.csv"), report.archive.to_csv()?)?;
    Ok(())
}

fn check(inst: &MatrixInstance, report: &RunReport) -> Result<bool, Failure> {
    let verdict = verify(&inst.problem, report)?;
    if verdict.passed() {
        println!(
            "verify {} {} {}: PASS ({} skips and {} values re-solved cold)",
            report.instance, report.method, report.variant, verdict.skips_checked, verdict.values_checked
        );
    } else {
        println!("verify {} {} {}: FAIL", report.instance, report.method, report.variant);
        for v in &verdict.violations {
            println!("  {v}");
        }
    }
    Ok(verdict.passed())
}

fn solve(args: &RunArgs, always_verify: bool) -> Result<(), Failure> {
    let (inst, report) = run_one(args)?;
    print_report(&report);
    if let Some(out) = &args.out {
        write_single(&report, out)?;
    }
    if (args.verify || always_verify) && !check(&inst, &report)? {
        return Err(Failure::Verification("verification failed".into()));
    }
    Ok(())
}

fn analyze(args: &AnalyzeArgs) -> Result<(), Failure> {
    let inst = MatrixInstance::load(&args.instance)?;
    let p = inst.problem.objective_count();
    let config = EcmConfig {
        grid: parse_grid(&args.grid)?,
        ..EcmConfig::new(1, OrderSignature::all_ascending(p - 1))
    };
    let report = run_ecm(&inst.problem, &config)?;
    let mask = harvest_mask(&report)
        .ok_or_else(|| Failure::Runtime("some grid cell ended without a feasibility verdict".into()))??;
    let modes = match args.warm {
        None => vec![WsMode::Weak, WsMode::Strong],
        Some(WarmArg::Weak) => vec![WsMode::Weak],
        Some(WarmArg::Strong) => vec![WsMode::Strong],
        Some(WarmArg::None) => return Err(Failure::Validation("--warm must be weak or strong".into())),
    };
    let mut rows = Vec::new();
    for mode in modes {
        rows.extend(tradeoff_frontier(&mask, mode)?);
    }
    let feasible = mask.flags().iter().filter(|f| **f).count();
    println!("{}: {} cells, {} feasible", inst.label, mask.flags().len(), feasible);
    for r in &rows {
        println!(
            "{:<8} {:<6} warm_starts={:<6} detections={:<6}{}",
            r.signature.label(),
            r.mode,
            r.count.warm_starts,
            r.count.detections,
            if r.nondominated { " *" } else { "" }
        );
    }
    if let Some(out) = &args.out {
        fs::create_dir_all(out)?;
        write_tradeoff_csv(fs::File::create(out.join("tradeoff.csv"))?, &rows)?;
    }
    Ok(())
}

fn report(args: &ReportArgs) -> Result<(), Failure> {
    let instances = args
        .instance
        .iter()
        .map(|p| MatrixInstance::load(p))
        .collect::<moowarm::Result<Vec<_>>>()?;
    let methods = if args.method.is_empty() {
        vec![MethodArg::Wsm, MethodArg::Ecm]
    } else {
        args.method.clone()
    };
    let warm = if args.warm.is_empty() {
        vec![WarmArg::None, WarmArg::Weak, WarmArg::Strong]
    } else {
        args.warm.clone()
    };
    let orderings = if args.ordering.is_empty() {
        vec![OrderingArg::Random, OrderingArg::Lex, OrderingArg::Angle]
    } else {
        args.ordering.clone()
    };
    let propagate = if args.propagate.is_empty() {
        vec![false, true]
    } else {
        args.propagate.iter().map(|s| *s == Switch::On).collect()
    };
    let signatures = args
        .signature
        .iter()
        .map(|s| s.parse::<OrderSignature>())
        .collect::<moowarm::Result<Vec<_>>>()?;

    // WSM has a single warm-start channel: weak and strong both mean "previous".
    let mut wsm_warm_values = vec![WsmWarm::None];
    if warm.iter().any(|w| *w != WarmArg::None) {
        wsm_warm_values.push(WsmWarm::Previous);
    }
    let matrix = ExperimentMatrix {
        instances,
        wsm: methods.contains(&MethodArg::Wsm).then(|| WsmAxis {
            samples: args.samples,
            orderings: orderings.iter().map(|o| (*o).into()).collect(),
            warm: wsm_warm_values,
        }),
        ecm: if methods.contains(&MethodArg::Ecm) {
            Some(EcmAxis {
                grid: parse_grid(&args.grid)?,
                signatures,
                warm: warm.iter().map(|w| (*w).into()).collect(),
                propagate,
                rho: args.rho,
            })
        } else {
            None
        },
        repetitions: args.repetitions,
        master_seed: args.seed,
    };
    let result = run_experiment(&matrix)?;
    for r in &result.reports {
        print_report(r);
    }
    for f in &result.failures {
        eprintln!("cell failed: {} {} {}: {}", f.instance, f.method, f.variant, f.message);
    }
    for path in write_outputs(&result, &args.out)? {
        println!("wrote {}", path.display());
    }
    if args.verify {
        let mut ok = true;
        for r in &result.reports {
            let inst = matrix
                .instances
                .iter()
                .find(|i| i.label == r.instance)
                .expect("report belongs to a matrix instance");
            ok &= check(inst, r)?;
        }
        if !ok {
            return Err(Failure::Verification("verification failed".into()));
        }
    }
    Ok(())
}

fn gen(args: &GenerateArgs) -> Result<(), Failure> {
    let spec = GenSpec::new(args.family.parse::<Family>()?, args.size, args.p, args.seed);
    let problem = generate(&spec)?;
    fs::create_dir_all(&args.out)?;
    let path = args.out.join(spec.file_name());
    problem.save(&path)?;
    println!("{}", path.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Generate(a) => gen(a),
        Command::Solve(a) => solve(a, false),
        Command::AnalyzeOrder(a) => analyze(a),
        Command::Verify(a) => solve(a, true),
        Command::Report(a) => report(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Validation(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(2)
        }
        Err(Failure::Verification(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(3)
        }
        Err(Failure::Runtime(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(1)
        }
    }
}
