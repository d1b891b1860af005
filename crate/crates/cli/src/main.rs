use std::fmt;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Value};
use sperner_core::adversary::{adversary_bounds, row_sum_formula_full, row_sum_formula_short, sigma, snake_gamma, snake_problem};
use sperner_core::audit::audit;
use sperner_core::bench::{points_of, scaling_exponent, summarize, sweep, write_csv, Family, SweepConfig};
use sperner_core::chain::Labeling;
use sperner_core::complex::{PseudoManifold, Simplex};
use sperner_core::instances::{
    beta, bits_len, labeling_cb, random_spm_instance, snake_reduce, BitSequence, SnakeOracle,
};
use sperner_core::io::{parse_labeling, regular_instance_file, InstanceFile, IoError};
use sperner_core::oracle::{LabelSource, LabelingOracle, OracleError};
use sperner_core::par::Execution;
use sperner_core::rng::SplitMix64;
use sperner_core::separation::{ght_budget, iterated_separation_number, StrategyKind, EXACT_CAP};
use sperner_core::solver::{solve, Problem, SolveError, SolveResult, SpmInstance};

const PROMISE: u8 = 2;
const PARSE: u8 = 3;
const INTERNAL: u8 = 4;

#[derive(Parser)]
#[command(name = "sperner", version, about = "Query-counting solvers for Sperner problems on pseudo-manifolds")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve an instance and report the fully labeled facet and query counts.
    Solve(SolveArgs),
    /// Sweep REGULAR 2-SPM or SNAKE sizes and emit CSV.
    Bench(BenchArgs),
    /// Audit an instance with full label access.
    Check(CheckArgs),
    /// Write an instance file.
    Gen(GenArgs),
    /// Adversary lower-bound quantities for SNAKE.
    Adversary(AdversaryArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Regular2spm,
    Snake,
}

impl From<FamilyArg> for Family {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Regular2spm => Family::Regular2Spm,
            FamilyArg::Snake => Family::Snake,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Exact,
    Gridline,
    Bfs,
}

impl From<StrategyArg> for StrategyKind {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Exact => StrategyKind::Exact,
            StrategyArg::Gridline => StrategyKind::GridLine,
            StrategyArg::Bfs => StrategyKind::BfsLevel,
        }
    }
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum ProblemArg {
    Spm,
    Ospm,
}

#[derive(Args)]
struct Source {
    /// Generated family (with --m and --b).
    #[arg(long, value_enum, conflicts_with = "file", required_unless_present = "file")]
    family: Option<FamilyArg>,
    #[arg(long, requires = "family")]
    m: Option<u32>,
    /// Bit sequence of length m - 2 (empty for m <= 2).
    #[arg(long, requires = "family", allow_hyphen_values = true)]
    b: Option<String>,
    /// Instance JSON file.
    #[arg(long)]
    file: Option<PathBuf>,
    /// Labeling JSON file, overriding labels in --file.
    #[arg(long, requires = "file")]
    labels: Option<PathBuf>,
    /// Start facet, comma separated.
    #[arg(long, value_delimiter = ',')]
    start: Option<Vec<u32>>,
}

#[derive(Args)]
struct SolveArgs {
    #[command(flatten)]
    source: Source,
    #[arg(long, value_enum, default_value = "gridline")]
    strategy: StrategyArg,
    #[arg(long, value_enum, default_value = "spm")]
    problem: ProblemArg,
    /// Include the per-level trace.
    #[arg(long)]
    trace: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_enum, default_value = "regular2spm")]
    family: FamilyArg,
    /// Grid sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "8,16,32,64")]
    m: Vec<u32>,
    /// Random bit sequences per size, on top of all-0 and all-1.
    #[arg(long, default_value_t = 50)]
    samples: usize,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    #[arg(long, value_enum, default_value = "gridline")]
    strategy: StrategyArg,
    /// Run tasks on one thread.
    #[arg(long)]
    sequential: bool,
    /// Write 0 for wall time so rows are reproducible byte for byte.
    #[arg(long)]
    no_timing: bool,
    /// CSV destination (stdout by default).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[command(flatten)]
    source: Source,
}

#[derive(Clone, Copy, ValueEnum)]
enum GenFamily {
    Regular2spm,
    Snake,
    /// Random pseudo-manifold with a labeling satisfying the SPM promise.
    Random,
}

#[derive(Args)]
struct GenArgs {
    #[arg(long, value_enum)]
    family: GenFamily,
    #[arg(long, default_value_t = 9)]
    m: u32,
    /// Bit sequence; drawn from --seed when omitted.
    #[arg(long, allow_hyphen_values = true)]
    b: Option<String>,
    #[arg(long, default_value_t = 1)]
    seed: u64,
    /// Dimension of a random instance.
    #[arg(long, default_value_t = 2)]
    dim: usize,
    /// Facet count target of a random instance.
    #[arg(long, default_value_t = 30)]
    size: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct AdversaryArgs {
    /// Grid sizes, comma separated.
    #[arg(long, value_delimiter = ',', default_value = "5")]
    m: Vec<u32>,
    #[arg(long)]
    sequential: bool,
}

#[derive(Debug)]
struct Failure {
    code: u8,
    message: String,
}

impl Failure {
    fn new(code: u8, message: impl fmt::Display) -> Self {
        Failure {
            code,
            message: message.to_string(),
        }
    }
}

impl From<IoError> for Failure {
    fn from(e: IoError) -> Self {
        Failure::new(PARSE, e)
    }
}

impl From<SolveError> for Failure {
    fn from(e: SolveError) -> Self {
        let code = match &e {
            SolveError::PromiseViolation(_) => PROMISE,
            SolveError::NotOriented
            | SolveError::StartNotFacet(_)
            | SolveError::Oracle(OracleError::UnknownVertex(_)) => PARSE,
            _ => INTERNAL,
        };
        Failure::new(code, e)
    }
}

type CliResult<T = ()> = Result<T, Failure>;

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|e| Failure::new(PARSE, format!("{}: {e}", path.display())))
}

fn emit(text: &str, out: Option<&Path>) -> CliResult {
    match out {
        Some(p) => fs::write(p, text).map_err(|e| Failure::new(INTERNAL, format!("{}: {e}", p.display()))),
        None => stdout(format!("{text}\n").as_bytes()),
    }
}

/// A closed pipe downstream is not an error.
fn stdout(bytes: &[u8]) -> CliResult {
    match io::stdout().lock().write_all(bytes) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(Failure::new(INTERNAL, e)),
        _ => Ok(()),
    }
}

/// Pretty JSON; `serde_json::Map` keeps keys sorted.
fn pretty(v: &Value) -> String {
    serde_json::to_string_pretty(v).expect("plain data")
}

fn parse_bits(b: &str, m: u32) -> CliResult<BitSequence> {
    let bits: BitSequence = b.parse().map_err(|e| Failure::new(PARSE, e))?;
    if bits.len() != bits_len(m) {
        return Err(Failure::new(
            PARSE,
            format!("--b needs {} bits for m = {m}, got {}", bits_len(m), bits.len()),
        ));
    }
    Ok(bits)
}

struct Loaded {
    manifold: PseudoManifold,
    labels: Option<Labeling>,
    start: Option<Simplex>,
    grid: Option<(Family, u32, BitSequence)>,
}

fn load(src: &Source) -> CliResult<Loaded> {
    let start = src
        .start
        .as_ref()
        .map(|s| Simplex::new(s.iter().copied()))
        .transpose()
        .map_err(|e| Failure::new(PARSE, e))?;
    if let Some(family) = src.family {
        let m = src.m.ok_or_else(|| Failure::new(PARSE, "--family needs --m"))?;
        let b = src.b.as_deref().ok_or_else(|| Failure::new(PARSE, "--family needs --b"))?;
        let bits = parse_bits(b, m)?;
        let file = regular_instance_file(Family::from(family).name(), m, &bits)?;
        let inst = file.into_instance()?;
        return Ok(Loaded {
            manifold: inst.manifold,
            labels: inst.labels,
            start,
            grid: Some((family.into(), m, bits)),
        });
    }
    let path = src.file.as_ref().expect("clap requires --family or --file");
    let inst = InstanceFile::parse(&read(path)?)?.into_instance()?;
    let labels = match &src.labels {
        Some(p) => Some(parse_labeling(&read(p)?)?),
        None => inst.labels,
    };
    let grid = match &inst.rule {
        Some(rule) => {
            let family = Family::parse(&rule.family)
                .ok_or_else(|| Failure::new(PARSE, format!("unknown rule family {:?}", rule.family)))?;
            Some((family, rule.m, parse_bits(&rule.b, rule.m)?))
        }
        None => None,
    };
    Ok(Loaded {
        manifold: inst.manifold,
        labels,
        start: start.or(inst.start),
        grid,
    })
}

fn run_solver<S: LabelSource>(
    manifold: PseudoManifold,
    start: Option<Simplex>,
    oracle: LabelingOracle<S>,
    strategy: StrategyKind,
    grid_m: u32,
    problem: Problem,
) -> CliResult<(SolveResult, LabelingOracle<S>)> {
    let mut inst = match start {
        Some(s) => SpmInstance::new(manifold, s, oracle)?,
        None => SpmInstance::with_first_facet(manifold, oracle)?,
    };
    let r = solve(&mut inst, &strategy.strategy(grid_m), problem)?;
    Ok((r, inst.oracle))
}

fn cmd_solve(args: &SolveArgs) -> CliResult {
    let loaded = load(&args.source)?;
    let strategy = StrategyKind::from(args.strategy);
    let problem = match args.problem {
        ProblemArg::Spm => Problem::Spm,
        ProblemArg::Ospm => Problem::Ospm,
    };
    let grid_m = loaded.grid.as_ref().map_or(0, |g| g.1);
    let boundary = loaded.manifold.boundary_vertices();
    let interior: std::collections::BTreeSet<_> =
        loaded.manifold.vertices().difference(&boundary).copied().collect();
    let interior_graph = loaded.manifold.skeleton().induced(&interior);
    let manifold = loaded.manifold.clone();

    let mut out = serde_json::Map::new();
    let result = match (&loaded.grid, loaded.labels) {
        (Some((Family::Snake, m, bits)), _) => {
            let (oracle, _) = snake_reduce(SnakeOracle::new(bits.clone(), *m).map_err(|e| Failure::new(PARSE, e))?);
            let (r, oracle) = run_solver(manifold, loaded.start, oracle, strategy, grid_m, problem)?;
            out.insert("snake_queries".into(), json!(oracle.source().snake().count()));
            r
        }
        (_, Some(labels)) => run_solver(manifold, loaded.start, LabelingOracle::new(labels), strategy, grid_m, problem)?.0,
        (_, None) => return Err(Failure::new(PARSE, "no labels: pass --labels or a file with labels or a rule")),
    };

    out.insert("facet".into(), json!(result.facet));
    out.insert("flow".into(), json!(result.flow));
    out.insert("case".into(), json!(result.case));
    out.insert("problem".into(), json!(if problem == Problem::Spm { "spm" } else { "ospm" }));
    out.insert("strategy".into(), json!(strategy.name()));
    out.insert("queries".into(), json!(result.queries));
    out.insert("levels".into(), json!(result.trace.len()));
    out.insert("separator_total".into(), json!(result.separator_total()));
    if let Some((_, m, _)) = &loaded.grid {
        let pts: Vec<[u32; 2]> = points_of(*m, &result.facet).iter().map(|p| [p.i, p.j]).collect();
        out.insert("points".into(), json!(pts));
        out.insert("solution".into(), json!(beta(*m, &result.facet).map(|(i, j)| [i, j])));
    }
    if strategy == StrategyKind::Exact {
        let budget = if interior_graph.len() <= EXACT_CAP {
            let s = iterated_separation_number(&interior_graph, EXACT_CAP)
                .map_err(|e| Failure::new(INTERNAL, e))?
                .value;
            json!({
                "interior_vertices": interior_graph.len(),
                "separation_number": s,
                "interior_queries": result.queries.interior,
                "within": result.queries.interior <= s as usize,
            })
        } else {
            Value::Null
        };
        out.insert("budget".into(), budget);
    }
    out.insert("ght_budget".into(), json!(ght_budget(interior_graph.len(), 0)));
    if args.trace {
        out.insert("trace".into(), json!(result.trace));
    }
    emit(&pretty(&Value::Object(out)), None)
}

fn cmd_bench(args: &BenchArgs) -> CliResult {
    let cfg = SweepConfig {
        family: args.family.into(),
        ms: args.m.clone(),
        samples: args.samples,
        seed: args.seed,
        strategy: args.strategy.into(),
        exec: if args.sequential {
            Execution::Sequential
        } else {
            Execution::Parallel
        },
        timing: !args.no_timing,
    };
    if let Some(&m) = cfg.ms.iter().find(|&&m| m < 2) {
        return Err(Failure::new(PARSE, format!("bench sizes must be at least 2, got {m}")));
    }
    let rows = sweep(&cfg).map_err(|e| Failure::new(INTERNAL, e))?;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(|e| Failure::new(INTERNAL, e))?;
    match &args.out {
        Some(p) => fs::write(p, &buf).map_err(|e| Failure::new(INTERNAL, format!("{}: {e}", p.display())))?,
        None => stdout(&buf)?,
    }
    let summary = summarize(&rows);
    for s in &summary {
        eprintln!(
            "m={} n={} samples={} worst_interior={} mean_interior={:.2} worst_total={}",
            s.m, s.n, s.samples, s.worst_interior, s.mean_interior, s.worst_total
        );
    }
    match scaling_exponent(&summary) {
        Some(e) => eprintln!("exponent={e:.4}"),
        None => eprintln!("exponent=n/a"),
    }
    Ok(())
}

fn cmd_check(args: &CheckArgs) -> CliResult {
    let loaded = load(&args.source)?;
    let labels = match (&loaded.grid, loaded.labels) {
        (_, Some(l)) => l,
        (Some((_, m, bits)), None) => labeling_cb(bits, *m).map_err(|e| Failure::new(PARSE, e))?,
        (None, None) => return Err(Failure::new(PARSE, "check needs a full labeling")),
    };
    let grid_m = loaded.grid.as_ref().map(|g| g.1);
    let report = audit(&loaded.manifold, &labels, loaded.start.as_ref(), grid_m).map_err(|e| Failure::new(PARSE, e))?;
    emit(&pretty(&json!(report)), None)?;
    if !report.conservation_holds() {
        return Err(Failure::new(INTERNAL, "conservation law fails"));
    }
    if !report.promises_hold() {
        return Err(Failure::new(PROMISE, "promise violated"));
    }
    Ok(())
}

fn cmd_gen(args: &GenArgs) -> CliResult {
    let bits = |m: u32| match &args.b {
        Some(b) => parse_bits(b, m),
        None => Ok(BitSequence::random(&mut SplitMix64::new(args.seed), bits_len(m))),
    };
    let file = match args.family {
        GenFamily::Regular2spm => regular_instance_file("regular2spm", args.m, &bits(args.m)?)?,
        GenFamily::Snake => {
            let b = bits(args.m)?;
            let mut f = regular_instance_file("snake", args.m, &b)?;
            f.labels = None;
            f
        }
        GenFamily::Random => {
            let (m, l, start) =
                random_spm_instance(args.seed, args.dim, args.size).map_err(|e| Failure::new(PARSE, e))?;
            let mut f = InstanceFile::from_manifold(&m);
            f.labels = Some(l.labels);
            f.start = Some(start.vertices().to_vec());
            f
        }
    };
    emit(&file.to_json(), args.out.as_deref())
}

fn cmd_adversary(args: &AdversaryArgs) -> CliResult {
    let exec = if args.sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    };
    let mut reports = Vec::new();
    for &m in &args.m {
        let p = snake_problem(m).map_err(|e| Failure::new(PARSE, e))?;
        let g = snake_gamma(m).map_err(|e| Failure::new(PARSE, e))?;
        let bounds = adversary_bounds(&p, &g, exec).map_err(|e| Failure::new(INTERNAL, e))?;
        let mut report = json!({ "m": m, "inputs": p.len(), "bounds": bounds });
        if m >= 3 {
            let (mut literal, mut full) = (0usize, 0usize);
            for b in BitSequence::all(bits_len(m)) {
                let s = sigma(&g, b.index() as usize) as i128;
                literal += (s == row_sum_formula_short(&b)) as usize;
                full += (s == row_sum_formula_full(&b)) as usize;
            }
            report["row_sums"] = json!({
                "rows": p.len(),
                "match_upper_m_minus_4": literal,
                "match_upper_m_minus_3": full,
            });
        }
        reports.push(report);
    }
    emit(&pretty(&Value::Array(reports)), None)
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(PARSE) } else { ExitCode::SUCCESS };
        }
    };
    let outcome = match &cli.command {
        Command::Solve(a) => cmd_solve(a),
        Command::Bench(a) => cmd_bench(a),
        Command::Check(a) => cmd_check(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Adversary(a) => cmd_adversary(a),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
