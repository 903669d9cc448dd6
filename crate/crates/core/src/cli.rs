//! The `ah` command-line tool.
//!
//! Exit codes: 0 success, 1 certification failure, 2 usage error, 3 data error.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufRead, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::baselines::{self, generate_instance, opt_exact, parse_instance, run_baseline, Algorithm, Generator, OptMethod};
use crate::data;
use crate::engine::{EngineError, PackingState};
use crate::numerics::{parse_rational, Rational};
use crate::params::reconstruct::reconstruct_params;
use crate::params::{load_partial_params, write_params, write_partial_params, ClassTable};
use crate::scenarios::{enumerate_scenarios, Scenario};
use crate::verifier::{
    empirical_check, verify_all, verify_all_resumable, verify_scenario, verify_weights, EmpiricalOptions, GlobalReport,
    ScenarioReport, Status, UvwTable, Verdict, VerifyOptions,
};
use crate::weights::{build_weight_function, Uvw, WeightFunction, WeightTable};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CERT: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_DATA: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "ah", version, about = "Advanced Harmonic bin packing and ratio certification")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Pack sizes read from standard input (one rational per line) and print the placement trace.
    Pack(PackArgs),
    /// Certify one scenario from u, v, w or an imported weight table.
    VerifyScenario(VerifyScenarioArgs),
    /// Certify every scenario and report the global bound.
    VerifyAll(VerifyAllArgs),
    /// Generate an instance, pack it with AH and the baselines, and run the empirical check.
    Simulate(SimulateArgs),
    /// Optimal bin count of an instance read from standard input or generated.
    Opt(OptArgs),
    /// Complete a partial parameter file from weight tables.
    Reconstruct(ReconstructArgs),
    /// Print the weight table of a scenario.
    ExportWeights(ExportArgs),
}

#[derive(Debug, Args)]
pub struct DataArgs {
    /// Parameter file; partial files are completed from the shipped weight tables.
    #[arg(long, value_name = "PATH")]
    pub params: Option<PathBuf>,
    /// Scenario variables table.
    #[arg(long, value_name = "PATH")]
    pub uvw: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PackArgs {
    #[command(flatten)]
    pub data: DataArgs,
    /// Run the invariant audit after every item.
    #[arg(long)]
    pub audit: bool,
    /// Write the trace here instead of standard output.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScenarioArgs {
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub x: Option<Rational>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub y: Option<Rational>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub u: Option<Rational>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub v: Option<Rational>,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub w: Option<Rational>,
}

#[derive(Debug, Args)]
pub struct VerifyScenarioArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    /// Imported weight table; bypasses the construction from parameters.
    #[arg(long, value_name = "PATH")]
    pub weights: Option<PathBuf>,
    /// Fail (exit 1) when the certified bound exceeds this value.
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub target: Option<Rational>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct VerifyAllArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub target: Option<Rational>,
    #[arg(long, value_name = "N")]
    pub jobs: Option<usize>,
    /// Report file; existing scenario lines are kept and not recomputed.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Search a dyadic grid of this many bits for scenarios without shipped u, v, w
    /// (results are marked noncanonical).
    #[arg(long, value_name = "BITS")]
    pub search: Option<u32>,
}

#[derive(Debug, Args)]
pub struct GenArgs {
    /// uniform, uniform(lo,hi), grid, grid-adversarial(huge|large|small|tiny), replay(path).
    #[arg(long, value_name = "NAME")]
    pub gen: Option<String>,
    #[arg(long, default_value_t = 1000)]
    pub n: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub gen: GenArgs,
    /// Additive constant allowed in the empirical check.
    #[arg(long, default_value_t = 200)]
    pub psi: u64,
    #[arg(long)]
    pub audit: bool,
    /// Ratio for the `bins <= r * OPT + psi` check (exact OPT only).
    #[arg(long, value_parser = rational, allow_hyphen_values = true)]
    pub target: Option<Rational>,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct OptArgs {
    #[command(flatten)]
    pub gen: GenArgs,
    /// Largest instance solved exactly; larger ones get the volume bound.
    #[arg(long, default_value_t = baselines::DEFAULT_OPT_LIMIT)]
    pub limit: usize,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ReconstructArgs {
    /// Partial parameter file (default: the published values).
    #[arg(long, value_name = "PATH")]
    pub params: Option<PathBuf>,
    /// Weight tables (repeatable; default: the shipped tables).
    #[arg(long, value_name = "PATH")]
    pub weights: Vec<PathBuf>,
    /// Table whose record endpoints are known scenario endpoints.
    #[arg(long, value_name = "PATH")]
    pub uvw: Option<PathBuf>,
    /// Where to write the completed parameters (default: standard output).
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[command(flatten)]
    pub data: DataArgs,
    #[command(flatten)]
    pub scenario: ScenarioArgs,
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

fn rational(s: &str) -> Result<Rational, String> {
    parse_rational(s).map_err(|e| e.to_string())
}

/// A failed command, carrying its exit code.
#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Data(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Usage(_) => EXIT_USAGE,
            CliError::Data(_) => EXIT_DATA,
        }
    }
}

fn data_err(e: impl std::fmt::Display) -> CliError {
    CliError::Data(e.to_string())
}

type Outcome = Result<i32, CliError>;

/// Parses `args` (including the program name) and runs the command.
pub fn main_with_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    let stdin = io::stdin();
    match run(cli.command, &mut stdin.lock()) {
        Ok(code) => code,
        Err(e) => {
            match &e {
                CliError::Usage(m) => eprintln!("usage error: {m}"),
                CliError::Data(m) => eprintln!("error: {m}"),
            }
            e.code()
        }
    }
}

/// Runs a parsed command; `input` stands in for standard input.
pub fn run(cmd: Command, input: &mut dyn BufRead) -> Outcome {
    match cmd {
        Command::Pack(a) => cmd_pack(a, input),
        Command::VerifyScenario(a) => cmd_verify_scenario(a),
        Command::VerifyAll(a) => cmd_verify_all(a),
        Command::Simulate(a) => cmd_simulate(a),
        Command::Opt(a) => cmd_opt(a, input),
        Command::Reconstruct(a) => cmd_reconstruct(a),
        Command::ExportWeights(a) => cmd_export(a),
    }
}

// ----- shared loading -----

fn load_uvw(path: Option<&Path>) -> Result<UvwTable, CliError> {
    match path {
        Some(p) => UvwTable::load(p).map_err(data_err),
        None => Ok(data::uvw_table()),
    }
}

/// Complete tables load directly; partial ones are completed from the shipped
/// weight tables or rejected.
fn load_table(args: &DataArgs) -> Result<ClassTable, CliError> {
    let Some(path) = &args.params else {
        return Ok(data::canonical_table());
    };
    let partial = load_partial_params(path).map_err(data_err)?;
    if partial.is_complete() {
        return partial.into_table().map_err(data_err);
    }
    let uvw = load_uvw(args.uvw.as_deref())?;
    let report = reconstruct_params(&partial, &data::weight_tables(), &data::uvw_endpoints(&uvw));
    if !report.table.is_complete() || !report.conflicts().is_empty() {
        return Err(CliError::Data(format!(
            "{} is incomplete and cannot be completed from the weight tables:\n{report}",
            path.display()
        )));
    }
    report.table.into_table().map_err(data_err)
}

fn output(path: Option<&Path>) -> Result<Box<dyn Write>, CliError> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(
            File::create(p).map_err(|e| CliError::Data(format!("cannot create {}: {e}", p.display())))?,
        )),
        None => Box::new(BufWriter::new(io::stdout())),
    })
}

fn io_err(e: io::Error) -> CliError {
    CliError::Data(format!("write failed: {e}"))
}

fn scenario_of(table: &ClassTable, x: &Rational, y: &Rational) -> Result<Scenario, CliError> {
    let s = Scenario::new(table, x.clone(), y.clone())
        .ok_or_else(|| CliError::Usage(format!("({x},{y}] is not a scenario interval")))?;
    if !enumerate_scenarios(table).contains(&s) {
        return Err(CliError::Usage(format!("({x},{y}] is not a scenario of this parameter set")));
    }
    Ok(s)
}

/// `u, v, w` from flags, else from the table.
fn choose_uvw(s: &Scenario, a: &ScenarioArgs, uvw: &UvwTable) -> Result<Option<Uvw>, CliError> {
    match (&a.u, &a.v, &a.w) {
        (None, None, None) => Ok(uvw.lookup(s).map(|r| r.uvw.clone())),
        (Some(u), Some(v), Some(w)) => Ok(Some(Uvw::large(u.clone(), v.clone(), w.clone()))),
        (None, None, Some(w)) if s.basic => Ok(Some(Uvw::basic(w.clone()))),
        (None, None, Some(_)) => Err(CliError::Usage(format!(
            "{} has a large threshold class; pass --u and --v as well",
            s.label()
        ))),
        _ => Err(CliError::Usage("--u and --v need --w".into())),
    }
}

fn required<'a>(v: &'a Option<Rational>, flag: &str) -> Result<&'a Rational, CliError> {
    v.as_ref().ok_or_else(|| CliError::Usage(format!("missing --{flag}")))
}

fn instance(gen: &GenArgs, table: Option<&ClassTable>) -> Result<Option<(Vec<Rational>, String)>, CliError> {
    let Some(name) = &gen.gen else { return Ok(None) };
    let g: Generator = name.parse().map_err(|e: baselines::BaselineError| CliError::Usage(e.to_string()))?;
    let inst = generate_instance(&g, gen.n, gen.seed, table).map_err(data_err)?;
    Ok(Some((inst.sizes, inst.descriptor)))
}

// ----- verbs -----

fn cmd_pack(a: PackArgs, input: &mut dyn BufRead) -> Outcome {
    let table = load_table(&a.data)?;
    let mut state = PackingState::new(table);
    let mut out = output(a.out.as_deref())?;
    for (n, line) in input.lines().enumerate() {
        let line = line.map_err(data_err)?;
        let t = line.split('#').next().unwrap_or("").trim();
        if t.is_empty() {
            continue;
        }
        let size = parse_rational(t).map_err(|e| CliError::Data(format!("line {}: {e}", n + 1)))?;
        let ev = state
            .pack_item(&size)
            .map_err(|e| CliError::Data(format!("line {}: {e}", n + 1)))?;
        writeln!(out, "{ev}").map_err(io_err)?;
        if a.audit {
            let rep = state.audit_step();
            if !rep.passed() {
                out.flush().map_err(io_err)?;
                eprintln!("audit failed after item {}:\n{rep}", state.items().len() - 1);
                return Ok(EXIT_CERT);
            }
        }
    }
    out.flush().map_err(io_err)?;
    if a.audit {
        let rep = state.audit();
        if !rep.passed() {
            eprintln!("final audit failed:\n{rep}");
            return Ok(EXIT_CERT);
        }
    }
    eprintln!("items={} bins={}", state.items().len(), state.bins_used());
    Ok(EXIT_OK)
}

fn report_outcome(rep: &ScenarioReport, target: Option<&Rational>) -> i32 {
    let exceeds = matches!((rep.r(), target), (Some(r), Some(t)) if &r > t);
    if rep.certified() && !exceeds {
        EXIT_OK
    } else {
        EXIT_CERT
    }
}

fn write_report(out: &mut dyn Write, rep: &ScenarioReport) -> io::Result<()> {
    writeln!(out, "{}", rep.line())?;
    if let Some(r) = rep.r() {
        writeln!(out, "# r~{}", r.to_decimal(15))?;
    }
    if !rep.detail.is_empty() {
        writeln!(out, "# {}", rep.detail)?;
    }
    Ok(())
}

fn cmd_verify_scenario(a: VerifyScenarioArgs) -> Outcome {
    let table = load_table(&a.data)?;
    let rep = if let Some(path) = &a.weights {
        let wt = WeightTable::load(path).map_err(data_err)?;
        let (x, y) = match (&a.scenario.x, &a.scenario.y, &wt.scenario) {
            (Some(x), Some(y), _) => (x.clone(), y.clone()),
            (None, None, Some((x, y))) => (x.clone(), y.clone()),
            _ => return Err(CliError::Usage("pass --x and --y or a table with a scenario header".into())),
        };
        let s = scenario_of(&table, &x, &y)?;
        let wf = WeightFunction::from_table(&table, s, &wt).map_err(data_err)?;
        verify_weights(&table, &wf, Default::default())
    } else {
        let x = required(&a.scenario.x, "x")?;
        let y = required(&a.scenario.y, "y")?;
        let s = scenario_of(&table, x, y)?;
        let uvw = load_uvw(a.data.uvw.as_deref())?;
        match choose_uvw(&s, &a.scenario, &uvw)? {
            Some(choice) => verify_scenario(&table, &s, &choice, Default::default()),
            None => {
                eprintln!("no u, v, w for {}; pass --w (and --u, --v)", s.label());
                return Ok(EXIT_CERT);
            }
        }
    };
    let mut out = output(a.out.as_deref())?;
    write_report(&mut out, &rep).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    if rep.status == Status::Infeasible {
        eprintln!("infeasible: {}", rep.detail);
    }
    Ok(report_outcome(&rep, a.target.as_ref()))
}

fn cmd_verify_all(a: VerifyAllArgs) -> Outcome {
    let table = load_table(&a.data)?;
    let uvw = load_uvw(a.data.uvw.as_deref())?;
    let opts = VerifyOptions { jobs: a.jobs, search_bits: a.search, ..Default::default() };
    let report: GlobalReport = match &a.out {
        Some(path) => verify_all_resumable(&table, &uvw, opts, path).map_err(data_err)?,
        None => {
            let rep = verify_all(&table, &uvw, opts);
            let mut out = output(None)?;
            for r in &rep.reports {
                writeln!(out, "{}", r.line()).map_err(io_err)?;
            }
            out.write_all(rep.footer().as_bytes()).map_err(io_err)?;
            out.flush().map_err(io_err)?;
            rep
        }
    };
    let bad = report.count(Status::Infeasible) + report.count(Status::BudgetExceeded);
    eprintln!(
        "certified={} infeasible={} budget-exceeded={} missing-uvw={} noncanonical={} global r={}",
        report.count(Status::Certified),
        report.count(Status::Infeasible),
        report.count(Status::BudgetExceeded),
        report.count(Status::MissingUvw),
        report.reports.iter().filter(|r| !r.canonical).count(),
        report.global_r.as_ref().map_or("-".into(), |r| format!("{r} (~{})", r.to_decimal(12))),
    );
    let mut code = if bad > 0 { EXIT_CERT } else { EXIT_OK };
    if let Some(t) = &a.target {
        for r in report.exceeding(t).filter(|r| r.canonical) {
            eprintln!("exceeds target: {}", r.line());
            code = EXIT_CERT;
        }
    }
    Ok(code)
}

const SIM_BASELINES: [Algorithm; 4] = [Algorithm::NextFit, Algorithm::FirstFit, Algorithm::BestFit, Algorithm::Harmonic(12)];

fn cmd_simulate(a: SimulateArgs) -> Outcome {
    let table = load_table(&a.data)?;
    let uvw = load_uvw(a.data.uvw.as_deref())?;
    let gen = GenArgs { gen: Some(a.gen.gen.clone().unwrap_or_else(|| "uniform".into())), ..a.gen };
    let (sizes, descriptor) = instance(&gen, Some(&table))?.expect("generator set");
    let scenarios = enumerate_scenarios(&table);
    let mut state = PackingState::new(table);
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "instance {descriptor}").map_err(io_err)?;
    match state.pack_all(&sizes, a.audit) {
        Ok(()) => {}
        Err(EngineError::Audit { item, report }) => {
            out.flush().map_err(io_err)?;
            eprintln!("audit failed after item {item}:\n{report}");
            return Ok(EXIT_CERT);
        }
        Err(e) => return Err(data_err(e)),
    }
    writeln!(out, "ah bins={}{}", state.bins_used(), if a.audit { " audit=pass" } else { "" }).map_err(io_err)?;
    for alg in SIM_BASELINES {
        writeln!(out, "{alg} bins={}", run_baseline(alg, &sizes).bins).map_err(io_err)?;
    }
    let opt = opt_exact(&sizes, baselines::DEFAULT_OPT_LIMIT);
    writeln!(out, "opt bins={} method={}", opt.bin_count, opt.method).map_err(io_err)?;
    let r = a.target.clone().unwrap_or_else(|| {
        "10060574276093395247/6374352691333693440".parse().expect("constant")
    });
    let opts = EmpiricalOptions {
        psi: a.psi,
        fallback: true,
        opt: (opt.method == OptMethod::Exact).then_some((opt.bin_count as u64, r)),
    };
    let rep = empirical_check(&state, &scenarios, &uvw, &opts);
    writeln!(out, "empirical {rep}").map_err(io_err)?;
    out.flush().map_err(io_err)?;
    Ok(match rep.verdict {
        Verdict::Pass => EXIT_OK,
        Verdict::Fail | Verdict::Unverifiable => EXIT_CERT,
    })
}

fn cmd_opt(a: OptArgs, input: &mut dyn BufRead) -> Outcome {
    let sizes = match instance(&a.gen, Some(&data::canonical_table()))? {
        Some((s, _)) => s,
        None => {
            let mut text = String::new();
            input.read_to_string(&mut text).map_err(data_err)?;
            parse_instance(&text).map_err(data_err)?
        }
    };
    let res = opt_exact(&sizes, a.limit);
    let mut out = output(a.out.as_deref())?;
    writeln!(out, "opt={} method={} items={}", res.bin_count, res.method, sizes.len()).map_err(io_err)?;
    for (i, b) in res.assignment.iter().enumerate() {
        writeln!(out, "{i} {} {b}", sizes[i]).map_err(io_err)?;
    }
    out.flush().map_err(io_err)?;
    Ok(EXIT_OK)
}

fn cmd_reconstruct(a: ReconstructArgs) -> Outcome {
    let partial = match &a.params {
        Some(p) => load_partial_params(p).map_err(data_err)?,
        None => data::published_partial(),
    };
    let tables = if a.weights.is_empty() {
        data::weight_tables()
    } else {
        a.weights
            .iter()
            .map(|p| WeightTable::load(p).map_err(data_err))
            .collect::<Result<Vec<_>, _>>()?
    };
    let uvw = load_uvw(a.uvw.as_deref())?;
    let report = reconstruct_params(&partial, &tables, &data::uvw_endpoints(&uvw));
    eprint!("{report}");
    let complete = report.table.is_complete() && report.conflicts().is_empty();
    let text = if complete {
        write_params(&report.table.clone().into_table().map_err(data_err)?)
    } else {
        write_partial_params(&report.table)
    };
    let mut out = output(a.out.as_deref())?;
    out.write_all(text.as_bytes()).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    Ok(if complete { EXIT_OK } else { EXIT_CERT })
}

fn cmd_export(a: ExportArgs) -> Outcome {
    let table = load_table(&a.data)?;
    let s = scenario_of(&table, required(&a.scenario.x, "x")?, required(&a.scenario.y, "y")?)?;
    let uvw = load_uvw(a.data.uvw.as_deref())?;
    let Some(choice) = choose_uvw(&s, &a.scenario, &uvw)? else {
        eprintln!("no u, v, w for {}; pass --w (and --u, --v)", s.label());
        return Ok(EXIT_CERT);
    };
    let wf = match build_weight_function(&table, &s, &choice) {
        Ok(wf) => wf,
        Err(e) => {
            eprintln!("{e}");
            return Ok(EXIT_CERT);
        }
    };
    let mut out = output(a.out.as_deref())?;
    out.write_all(wf.to_table(&table).to_text().as_bytes()).map_err(io_err)?;
    out.flush().map_err(io_err)?;
    Ok(EXIT_OK)
}
