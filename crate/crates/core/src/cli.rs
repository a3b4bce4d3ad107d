//! Command-line driver. `run` returns the process exit code.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde_json::{Map, Value as Json};

use crate::archsim::{bytes_per_vertex, report, simulate_with, ReportFormat, SimConfig, SimError};
use crate::codegen::{emit, plan_kernels, KernelPlan};
use crate::diag::Diagnostic;
use crate::graphio::DEFAULT_URAM_BYTES;
use crate::interp::{self, vector_names, PropertyStore, RunOptions, RuntimeError, DEFAULT_MAX_ITERS};
use crate::passes::{run_passes, PassOptions};
use crate::sema::{analyze_with_channels, render_mir, MirProgram, DEFAULT_CHANNELS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_DIAGNOSTICS: i32 = 1;
pub const EXIT_RUNTIME: i32 = 2;
pub const EXIT_USAGE: i32 = 3;

#[derive(Parser, Debug)]
#[command(name = "graphitron", version, about = "Graphitron compiler, interpreter and accelerator simulator")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Parse and analyze a program, reporting diagnostics.
    Check(CompileArgs),
    /// Write device kernels, host driver and manifest.
    Emit {
        #[command(flatten)]
        compile: CompileArgs,
        #[arg(short = 'o', long = "out", value_name = "DIR")]
        out: PathBuf,
        /// Overwrite existing files that differ from the new output.
        #[arg(long)]
        regolden: bool,
    },
    /// Interpret a program on a graph.
    Run {
        #[command(flatten)]
        compile: CompileArgs,
        #[command(flatten)]
        output: OutputArgs,
        /// Graph path (argv[1]) and further program arguments.
        #[arg(last = true, value_name = "ARGS")]
        args: Vec<String>,
    },
    /// Simulate the generated accelerator on a graph.
    Sim {
        #[command(flatten)]
        compile: CompileArgs,
        #[command(flatten)]
        output: OutputArgs,
        #[command(flatten)]
        sim: SimArgs,
        #[arg(last = true, value_name = "ARGS")]
        args: Vec<String>,
    },
    /// Print the middle-end IR.
    DumpMir {
        #[command(flatten)]
        compile: CompileArgs,
        #[arg(long)]
        json: bool,
    },
    /// Print the kernel plan as JSON.
    DumpPlan(CompileArgs),
}

#[derive(Args, Debug)]
struct CompileArgs {
    /// Program source (.gt).
    source: PathBuf,
    /// Skip decoupling and lane legalization.
    #[arg(long)]
    no_passes: bool,
    /// Processing lanes; a power of two.
    #[arg(long, default_value_t = 4, value_parser = parse_lanes)]
    lanes: u32,
    #[arg(long, default_value_t = DEFAULT_CHANNELS, value_parser = clap::value_parser!(u32).range(1..))]
    channels: u32,
    /// Write the pass report as JSON to standard error.
    #[arg(long)]
    dump_pass_report: bool,
}

#[derive(Args, Debug)]
struct OutputArgs {
    /// Properties or scalars to print, comma separated.
    #[arg(long, value_delimiter = ',', value_name = "NAME")]
    print: Vec<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args, Debug)]
struct SimArgs {
    #[arg(long, default_value_t = 1024, value_parser = clap::value_parser!(u64).range(1..))]
    cache_lines: u64,
    #[arg(long, default_value_t = 8, value_parser = clap::value_parser!(u64).range(1..))]
    line_size: u64,
    #[arg(long, default_value_t = DEFAULT_URAM_BYTES, value_parser = clap::value_parser!(u64).range(1..))]
    uram_bytes: u64,
    #[arg(long, default_value_t = 64, value_parser = clap::value_parser!(u64).range(1..))]
    burst_length: u64,
    /// Fraction used by the main loop's direction switch.
    #[arg(long)]
    frontier_threshold: Option<f64>,
    /// Write counters as JSON to this file instead of a table on standard error.
    #[arg(long, value_name = "FILE")]
    stats: Option<PathBuf>,
    #[arg(long)]
    no_cache: bool,
    #[arg(long)]
    no_shuffle_model: bool,
    #[arg(long)]
    no_prefetch: bool,
}

fn parse_lanes(s: &str) -> Result<u32, String> {
    match s.parse::<u32>() {
        Ok(n) if n > 0 && n.is_power_of_two() => Ok(n),
        _ => Err(format!("`{s}` is not a power of two")),
    }
}

/// A failure with its exit code; the message is already formatted.
struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl Into<String>) -> Self {
        Failure { code: EXIT_USAGE, message: message.into() }
    }
    fn runtime(message: impl Into<String>) -> Self {
        Failure { code: EXIT_RUNTIME, message: message.into() }
    }
}

impl From<RuntimeError> for Failure {
    fn from(e: RuntimeError) -> Self {
        Failure::runtime(format!("error: {e}"))
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::runtime(format!("error: {e}"))
    }
}

impl From<SimError> for Failure {
    fn from(e: SimError) -> Self {
        match e {
            SimError::InvalidConfig(_) => Failure::usage(format!("error: {e}")),
            e => Failure::runtime(format!("error: {e}")),
        }
    }
}

struct Compiled {
    mir: MirProgram,
    plan: KernelPlan,
}

fn diagnostic(path: &Path, d: Diagnostic) -> Failure {
    Failure { code: EXIT_DIAGNOSTICS, message: d.render(&path.display().to_string()) }
}

fn compile(c: &CompileArgs, err: &mut dyn Write) -> Result<Compiled, Failure> {
    let source = std::fs::read_to_string(&c.source)
        .map_err(|e| Failure::runtime(format!("error: cannot read `{}`: {e}", c.source.display())))?;
    let fir = crate::frontend::parse_source(&source).map_err(|d| diagnostic(&c.source, d))?;
    let mir = analyze_with_channels(&fir, c.channels).map_err(|d| diagnostic(&c.source, d))?;
    let options = if c.no_passes { PassOptions::none() } else { PassOptions::all(c.lanes) };
    let (mir, reports) = run_passes(mir, options).map_err(|d| diagnostic(&c.source, d))?;
    if c.dump_pass_report {
        let json = serde_json::to_string_pretty(&reports).expect("pass report serializes");
        writeln!(err, "{json}")?;
    }
    let plan = plan_kernels(&mir, c.lanes, c.channels);
    Ok(Compiled { mir, plan })
}

fn load_graph(mir: &MirProgram, args: &[String]) -> Result<crate::graphio::Graph, Failure> {
    interp::load_program_graph(mir, args).map_err(|e| match e {
        RuntimeError::Graph(g) if !matches!(g, crate::graphio::GraphError::Io { .. }) => {
            let path = interp::graph_path(mir, args).unwrap_or_default();
            Failure::runtime(format!("error: {path}: {g}"))
        }
        e => e.into(),
    })
}

fn max_iters() -> Result<u64, Failure> {
    match std::env::var("GRAPHITRON_MAX_ITERS") {
        Err(_) => Ok(DEFAULT_MAX_ITERS),
        Ok(v) => v
            .parse::<u64>()
            .ok()
            .filter(|n| *n > 0)
            .ok_or_else(|| Failure::usage(format!("error: GRAPHITRON_MAX_ITERS must be a positive integer, got `{v}`"))),
    }
}

fn selected<'a>(mir: &'a MirProgram, output: &'a OutputArgs) -> Result<Vec<&'a str>, Failure> {
    if output.print.is_empty() {
        return Ok(vector_names(mir));
    }
    for name in &output.print {
        if mir.property(name).is_none_or(|p| !p.is_vector()) && mir.scalar_id(name).is_none() {
            return Err(Failure::usage(format!("error: no property or scalar named `{name}`")));
        }
    }
    Ok(output.print.iter().map(String::as_str).collect())
}

fn values_of(store: &PropertyStore, name: &str) -> Vec<interp::Value> {
    match store.property(name) {
        Some(v) if !v.is_empty() || store.scalar(name).is_none() => v.to_vec(),
        _ => store.scalar(name).into_iter().collect(),
    }
}

fn print_values(store: &PropertyStore, names: &[&str], json: bool, out: &mut dyn Write) -> std::io::Result<()> {
    if json {
        let mut map = Map::new();
        for name in names {
            let vals = values_of(store, name).iter().map(|v| serde_json::to_value(v).expect("value serializes")).collect();
            map.insert(name.to_string(), Json::Array(vals));
        }
        let text = serde_json::to_string_pretty(&Json::Object(map)).expect("json");
        return writeln!(out, "{text}");
    }
    for name in names {
        if names.len() > 1 {
            writeln!(out, "# {name}")?;
        }
        for v in values_of(store, name) {
            writeln!(out, "{v}")?;
        }
    }
    Ok(())
}

fn execute(cli: Cli, out: &mut dyn Write, err: &mut dyn Write) -> Result<(), Failure> {
    match cli.command {
        Command::Check(c) => {
            let compiled = compile(&c, err)?;
            writeln!(out, "{}: ok ({} kernels)", c.source.display(), compiled.plan.kernels.len())?;
        }
        Command::Emit { compile: c, out: dir, regolden } => {
            let compiled = compile(&c, err)?;
            let program = c.source.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let art = emit(&program, &compiled.plan, &compiled.mir);
            let existing: Vec<String> =
                art.diff_against(&dir).into_iter().filter(|rel| dir.join(rel).exists()).collect();
            if !existing.is_empty() && !regolden {
                return Err(Failure::runtime(format!(
                    "error: `{}` differs from the new output in {}; pass --regolden to overwrite",
                    dir.display(),
                    existing.join(", ")
                )));
            }
            art.write_to(&dir)?;
            for (rel, _) in art.files() {
                writeln!(out, "{}", dir.join(rel).display())?;
            }
        }
        Command::Run { compile: c, output, args } => {
            let compiled = compile(&c, err)?;
            let names = selected(&compiled.mir, &output)?;
            let options = RunOptions { max_iters: max_iters()? };
            let graph = load_graph(&compiled.mir, &args)?;
            let result = interp::run_with_options(&compiled.mir, &graph, &args, options)?;
            print_values(&result.store, &names, output.json, out)?;
        }
        Command::Sim { compile: c, output, sim, args } => {
            let config = SimConfig {
                lanes: c.lanes,
                uram_bytes: sim.uram_bytes,
                cache_lines: sim.cache_lines as usize,
                line_size: sim.line_size as usize,
                channels: c.channels,
                burst_length: sim.burst_length as usize,
                frontier_threshold: sim.frontier_threshold,
                cache_enabled: !sim.no_cache,
                shuffle_model: !sim.no_shuffle_model,
                prefetch: !sim.no_prefetch,
            };
            config.validate()?;
            let compiled = compile(&c, err)?;
            let names = selected(&compiled.mir, &output)?;
            let options = RunOptions { max_iters: max_iters()? };
            let graph = load_graph(&compiled.mir, &args)?;
            let parts = crate::graphio::partition(&graph, config.uram_bytes, bytes_per_vertex(&compiled.plan));
            let run = simulate_with(&compiled.plan, &compiled.mir, &graph, &parts, &config, &args, options)?;
            print_values(&run.result.store, &names, output.json, out)?;
            match sim.stats {
                Some(path) => std::fs::write(&path, report(&run.stats, ReportFormat::Json))
                    .map_err(|e| Failure::runtime(format!("error: cannot write `{}`: {e}", path.display())))?,
                None => write!(err, "{}", report(&run.stats, ReportFormat::Table))?,
            }
        }
        Command::DumpMir { compile: c, json } => {
            let compiled = compile(&c, err)?;
            if json {
                let text = serde_json::to_string_pretty(&compiled.mir).expect("mir serializes");
                writeln!(out, "{text}")?;
            } else {
                write!(out, "{}", render_mir(&compiled.mir))?;
            }
        }
        Command::DumpPlan(c) => {
            let compiled = compile(&c, err)?;
            let text = serde_json::to_string_pretty(&compiled.plan).expect("plan serializes");
            writeln!(out, "{text}")?;
        }
    }
    Ok(())
}

/// Runs the command line `argv` (including the program name).
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_USAGE
                }
            };
        }
    };
    match execute(cli, out, err) {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(err, "{}", f.message.trim_end());
            f.code
        }
    }
}
