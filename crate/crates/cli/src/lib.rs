//! Command-line front end: instance files in, solutions and CSV reports out.
//!
//! Exit codes: 0 success, 2 usage or I/O problems, 3 no feasible solution,
//! 4 a solution that fails validation.

pub mod file;
pub mod report;

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use boxloc::eval::{cost_deviation, criteria};
use boxloc::exact::{exact_sweep, solve_exact, validate_solution};
use boxloc::gen::{generate, GenConfig, ThresholdExpansion, RNG_NAME};
use boxloc::heuristic::{frontier, Frontier, FrontierEntry};
use boxloc::{DblpError, Instance, ObjectiveMode, Solution, SolveOptions};
use clap::{Args, Parser, Subcommand, ValueEnum};

use file::{GeneratorInfo, InstanceFile};

#[derive(Debug, Parser)]
#[command(name = "boxloc", version, about = "Drop box location and collection tour planning")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a random instance.
    Generate(GenerateArgs),
    /// Solve one access bound exactly.
    Solve(SolveArgs),
    /// Trace the cost/access frontier.
    Frontier(FrontierArgs),
    /// Compare the heuristic frontier with exact solutions at the same bounds.
    Compare(CompareArgs),
    /// Score a solution against an instance.
    Evaluate(EvaluateArgs),
}

#[derive(Debug, Args)]
pub struct GenerateArgs {
    #[arg(long)]
    pub seed: u64,
    #[arg(long)]
    pub populations: usize,
    #[arg(long)]
    pub locations: usize,
    #[arg(long, default_value_t = 2)]
    pub q: u32,
    #[arg(long, value_enum, default_value_t = Expansion::PerPopulation)]
    pub expansion: Expansion,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Expansion {
    PerPopulation,
    Global,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Minimum access every population must reach.
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    /// Override the instance's coverage multiplicity.
    #[arg(long)]
    pub q: Option<u32>,
    /// Upper bound on total cost.
    #[arg(long)]
    pub budget: Option<f64>,
    /// Upper bound on the collection tour's cost.
    #[arg(long)]
    pub cmax: Option<f64>,
    /// Select exactly this many boxes.
    #[arg(long)]
    pub count: Option<usize>,
    /// Maximize the weight covered `q` times, keeping this base coverage.
    #[arg(long, value_name = "BASE")]
    pub max_coverage: Option<u32>,
    /// Drop populations whose access rows are implied by others.
    #[arg(long)]
    pub dominance_filter: bool,
    #[arg(long)]
    pub node_limit: Option<usize>,
    /// Solution JSON destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Method {
    Heuristic,
    ExactSweep,
}

#[derive(Debug, Args)]
pub struct FrontierArgs {
    #[arg(long)]
    pub instance: PathBuf,
    /// Access step; defaults to the smallest single-box access change.
    #[arg(long)]
    pub epsilon: Option<f64>,
    #[arg(long, value_enum, default_value_t = Method::Heuristic)]
    pub method: Method,
    /// Frontier CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CompareArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub epsilon: Option<f64>,
    /// Refuse instances with more locations than this.
    #[arg(long, default_value_t = 60)]
    pub max_locations: usize,
    /// Deviation CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvaluateArgs {
    #[arg(long)]
    pub instance: PathBuf,
    #[arg(long)]
    pub solution: PathBuf,
    /// JSON matrix of distances, one row per population.
    #[arg(long)]
    pub distances: Option<PathBuf>,
    /// Access bound the solution is checked against.
    #[arg(long, default_value_t = 0.0)]
    pub r: f64,
    /// Criteria CSV destination.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("{0}")]
    Usage(String),
    #[error("{}: {source}", path.display())]
    Io { path: PathBuf, source: std::io::Error },
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("solution fails validation:\n  {}", .0.join("\n  "))]
    Invalid(Vec<String>),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) | CliError::Io { .. } => 2,
            CliError::Infeasible(_) => 3,
            CliError::Invalid(_) => 4,
        }
    }
}

impl From<DblpError> for CliError {
    fn from(e: DblpError) -> Self {
        match e {
            DblpError::Infeasible(_)
            | DblpError::AccessUnreachable { .. }
            | DblpError::CoverageUnreachable { .. }
            | DblpError::NodeLimit => CliError::Infeasible(e.to_string()),
            DblpError::InvalidInstance(_) | DblpError::UnknownLocation(_) | DblpError::InvalidArgument(_) => {
                CliError::Usage(e.to_string())
            }
        }
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Summaries go to `stdout`, errors to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if code == 0 { stdout.write_all(text.as_bytes()) } else { stderr.write_all(text.as_bytes()) };
            return code;
        }
    };
    match execute(cli.command, stdout) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(stderr, "error: {e}");
            e.exit_code()
        }
    }
}

pub fn execute(command: Command, out: &mut dyn Write) -> Result<(), CliError> {
    match command {
        Command::Generate(a) => cmd_generate(a, out),
        Command::Solve(a) => cmd_solve(a, out),
        Command::Frontier(a) => cmd_frontier(a, out),
        Command::Compare(a) => cmd_compare(a, out),
        Command::Evaluate(a) => cmd_evaluate(a, out),
    }
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn write(path: &Path, bytes: &[u8]) -> Result<(), CliError> {
    fs::write(path, bytes).map_err(|source| CliError::Io {
        path: path.to_path_buf(),
        source,
    })
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> csv::Result<()>) -> Vec<u8> {
    let mut buf = Vec::new();
    f(&mut buf).expect("writing CSV to memory cannot fail");
    buf
}

pub fn load_instance(path: &Path) -> Result<(Instance, InstanceFile), CliError> {
    let text = read(path)?;
    let file = InstanceFile::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let inst = file
        .to_instance()
        .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
    let diags = inst.validate();
    if !diags.is_empty() {
        return Err(DblpError::InvalidInstance(diags).into());
    }
    Ok((inst, file))
}

fn say(out: &mut dyn Write, line: impl AsRef<str>) {
    let _ = writeln!(out, "{}", line.as_ref());
}

fn cmd_generate(a: GenerateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let mut cfg = GenConfig::new(a.populations, a.locations, a.seed);
    cfg.q = a.q;
    cfg.expansion = match a.expansion {
        Expansion::PerPopulation => ThresholdExpansion::PerPopulation,
        Expansion::Global => ThresholdExpansion::Global,
    };
    let inst = generate(&cfg)?;
    let mut file = InstanceFile::from_instance(&inst);
    file.generator = Some(GeneratorInfo {
        seed: a.seed,
        rng: RNG_NAME.to_string(),
        config: cfg,
    });
    write(&a.out, file.emit().as_bytes())?;
    say(
        out,
        format!(
            "wrote {} locations ({} required), {} populations to {}",
            inst.locations.len(),
            inst.required_ids().count(),
            inst.populations.len(),
            a.out.display()
        ),
    );
    Ok(())
}

fn print_summary(out: &mut dyn Write, inst: &Instance, file: &InstanceFile, sol: &Solution) -> Result<(), CliError> {
    let report = criteria(inst, sol, None, file.durations.as_ref())?;
    say(out, format!("tour: {}", sol.tour.join(" -> ")));
    for (label, value) in report.rows() {
        say(out, format!("{label}: {value:.6}"));
    }
    Ok(())
}

fn cmd_solve(a: SolveArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (mut inst, file) = load_instance(&a.instance)?;
    if let Some(q) = a.q {
        inst.q = q;
    }
    let options = SolveOptions {
        r: a.r,
        objective: match a.max_coverage {
            Some(base_coverage) => ObjectiveMode::MaxCoverage { base_coverage },
            None => ObjectiveMode::MinCost,
        },
        budget: a.budget,
        tour_cost_cap: a.cmax,
        fixed_count: a.count,
        dominance_filter: a.dominance_filter,
        node_limit: a.node_limit,
    };
    let sol = solve_exact(&inst, &options)?;
    let diags = validate_solution(&inst, &options, &sol);
    if !diags.is_empty() {
        return Err(CliError::Invalid(diags.iter().map(|d| d.to_string()).collect()));
    }
    if let Some(path) = &a.out {
        let mut json = serde_json::to_string_pretty(&sol).expect("solutions always serialize");
        json.push('\n');
        write(path, json.as_bytes())?;
    }
    print_summary(out, &inst, &file, &sol)
}

/// Exact solutions at every access level the heuristic frontier reached.
fn sweep_at(inst: &Instance, heuristic: &Frontier) -> Result<Vec<FrontierEntry>, CliError> {
    let rs: Vec<f64> = heuristic.entries.iter().map(|e| e.solution.min_access).collect();
    Ok(exact_sweep(inst, &SolveOptions::default(), &rs)
        .into_iter()
        .collect::<Result<Vec<_>, _>>()?)
}

fn cmd_frontier(a: FrontierArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (inst, _) = load_instance(&a.instance)?;
    let heuristic = frontier(&inst, a.epsilon)?;
    let result = match a.method {
        Method::Heuristic => heuristic,
        Method::ExactSweep => {
            let exact = sweep_at(&inst, &heuristic)?;
            let report = cost_deviation(&exact, &heuristic);
            if let Some(dev) = report.mean_percent_deviation {
                say(out, format!("heuristic mean deviation from exact: {dev:.3}%"));
            }
            Frontier::from_entries(exact)
        }
    };
    if let Some(path) = &a.out {
        write(path, &csv_bytes(|b| report::write_frontier(b, &result)))?;
    }
    say(out, format!("{} frontier entries", result.len()));
    for e in &result.entries {
        say(
            out,
            format!(
                "  access {:.6}  cost {:.2}  boxes {}",
                e.solution.min_access,
                e.solution.total_cost,
                e.solution.selected.len()
            ),
        );
    }
    Ok(())
}

fn cmd_compare(a: CompareArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (inst, _) = load_instance(&a.instance)?;
    if inst.locations.len() > a.max_locations {
        return Err(CliError::Usage(format!(
            "{} locations exceeds the exact-solver guard of {}; raise --max-locations to proceed",
            inst.locations.len(),
            a.max_locations
        )));
    }
    let t = Instant::now();
    let heuristic = frontier(&inst, a.epsilon)?;
    let heuristic_seconds = t.elapsed().as_secs_f64();
    let t = Instant::now();
    let exact = sweep_at(&inst, &heuristic)?;
    let exact_seconds = t.elapsed().as_secs_f64();
    let mut dev = cost_deviation(&exact, &heuristic);
    dev.heuristic_seconds = heuristic_seconds;
    dev.exact_seconds = exact_seconds;
    if let Some(path) = &a.out {
        write(path, &csv_bytes(|b| report::write_deviation(b, &dev)))?;
    }
    let mean = dev
        .mean_percent_deviation
        .map_or_else(|| "n/a".to_string(), |d| format!("{d:.3}%"));
    say(
        out,
        format!(
            "{} bounds, mean deviation {mean}, heuristic {heuristic_seconds:.3}s, exact {exact_seconds:.3}s",
            dev.pairs.len()
        ),
    );
    Ok(())
}

fn cmd_evaluate(a: EvaluateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let (inst, file) = load_instance(&a.instance)?;
    let sol: Solution = serde_json::from_str(&read(&a.solution)?)
        .map_err(|e| CliError::Usage(format!("{}: {e}", a.solution.display())))?;
    if let Some(id) = sol
        .selected
        .iter()
        .chain(&sol.tour)
        .find(|id| inst.location_index(id).is_none())
    {
        return Err(CliError::Usage(format!("solution names unknown location `{id}`")));
    }
    let distances: Option<Vec<Vec<f64>>> = match &a.distances {
        Some(path) => {
            let m: Vec<Vec<f64>> = serde_json::from_str(&read(path)?)
                .map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            let n = inst.locations.len();
            if m.len() != inst.populations.len() || m.iter().any(|row| row.len() != n) {
                return Err(CliError::Usage(format!(
                    "{}: expected a {} x {n} matrix",
                    path.display(),
                    inst.populations.len()
                )));
            }
            Some(m)
        }
        None => None,
    };
    let diags = validate_solution(&inst, &SolveOptions::with_r(a.r), &sol);
    if !diags.is_empty() {
        return Err(CliError::Invalid(diags.iter().map(|d| d.to_string()).collect()));
    }
    let report = criteria(&inst, &sol, distances.as_deref(), file.durations.as_ref())?;
    if let Some(path) = &a.out {
        write(path, &csv_bytes(|b| report::write_criteria(b, &report)))?;
    }
    for (label, value) in report.rows() {
        say(out, format!("{label}: {value:.6}"));
    }
    Ok(())
}
