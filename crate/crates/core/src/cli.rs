//! Command-line driver.

use std::collections::BTreeSet;
use std::io::Write;
use std::path::PathBuf;
use std::time::Duration;

use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::cfg::dump_cfg;
use crate::checker::{analyze, dump_system, par_map, Analysis, CheckOptions, DEFAULT_BUDGET};
use crate::diagnostics::{diagnose, render_json, render_text, render_warnings, Diagnostic, Sources};
use crate::frontend::{parse_sources, Program};
use crate::oracle::{interpret, ConcreteValue};
use crate::smt::{Solver, TranslateConfig};
use crate::symexec::dump_summary;

#[derive(Parser, Debug)]
#[command(name = "tfit", version, about = "Static tensor-shape checker backed by an SMT solver")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Check programs for shape errors and solve shape holes.
    Check(CheckArgs),
    /// Run a program with the reference interpreter.
    Run(RunArgs),
    /// Print intermediate artifacts without checking.
    Dump(DumpArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
}

#[derive(Args, Debug)]
pub struct DumpFlags {
    /// Print the loop-free control-flow graphs.
    #[arg(long)]
    pub dump_cfg: bool,
    /// Print function summaries.
    #[arg(long)]
    pub dump_summaries: bool,
    /// Print the instantiated constraint system of each entry.
    #[arg(long)]
    pub dump_constraints: bool,
}

#[derive(Args, Debug)]
pub struct CheckArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    /// Check only this function.
    #[arg(long)]
    pub entry: Option<String>,
    /// Solver command line; must speak SMT-LIB 2 on standard input.
    #[arg(long, env = "TFIT_SOLVER", default_value = "z3 -in -smt2")]
    pub solver_cmd: String,
    /// Per-query timeout in seconds.
    #[arg(long, default_value_t = 10, value_parser = clap::value_parser!(u64).range(1..))]
    pub timeout: u64,
    /// Number of example values listed for a hole.
    #[arg(long, default_value_t = 3)]
    pub max_examples: usize,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[command(flatten)]
    pub dumps: DumpFlags,
    /// Write every solver query to this directory.
    #[arg(long, value_name = "DIR")]
    pub dump_smt: Option<PathBuf>,
    /// Number of solver queries run in parallel.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub jobs: u64,
    /// Skip equality elimination before solving.
    #[arg(long)]
    pub no_eliminate: bool,
}

#[derive(Args, Debug)]
pub struct RunArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long, default_value = "main")]
    pub entry: String,
}

#[derive(Args, Debug)]
pub struct DumpArgs {
    #[arg(required = true)]
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub entry: Option<String>,
    #[command(flatten)]
    pub dumps: DumpFlags,
}

struct Failed;

type Out<'a> = &'a mut dyn Write;

fn load(files: &[PathBuf], err: Out) -> Result<(Program, Sources), Failed> {
    let mut sources = Sources::new();
    let mut texts = Vec::new();
    for f in files {
        match std::fs::read_to_string(f) {
            Ok(t) => texts.push((f.display().to_string(), t)),
            Err(e) => {
                let _ = writeln!(err, "error: cannot read {}: {e}", f.display());
                return Err(Failed);
            }
        }
    }
    let program = parse_sources(texts.iter().map(|(n, t)| (n.as_str(), t.as_str()))).map_err(|e| {
        let _ = writeln!(err, "error: {e}");
        Failed
    })?;
    sources.extend(texts);
    Ok((program, sources))
}

fn entries(a: &Analysis, entry: &Option<String>, err: Out) -> Result<Vec<String>, Failed> {
    match entry {
        Some(e) if a.summaries.contains_key(e) => Ok(vec![e.clone()]),
        Some(e) => {
            let _ = writeln!(err, "error: no analyzable function named `{e}`");
            Err(Failed)
        }
        None => Ok(a.entry_points()),
    }
}

fn dumps(a: &Analysis, entries: &[String], flags: &DumpFlags, out: Out) {
    if flags.dump_cfg {
        for f in &a.order {
            if let Some(cfg) = a.cfgs.get(f) {
                let _ = write!(out, "{}", dump_cfg(cfg));
            }
        }
    }
    if flags.dump_summaries {
        for f in &a.order {
            if let Some(s) = a.summaries.get(f) {
                let _ = write!(out, "{}", dump_summary(s));
            }
        }
    }
    if flags.dump_constraints {
        for e in entries {
            if let Some(sys) = a.system(e, DEFAULT_BUDGET) {
                let _ = write!(out, "{}", dump_system(&sys));
            }
        }
    }
}

fn warn_all(err: Out, lines: impl IntoIterator<Item = String>, seen: &mut BTreeSet<String>) {
    for l in lines {
        if seen.insert(l.clone()) {
            let _ = writeln!(err, "{l}");
        }
    }
}

fn check(args: &CheckArgs, out: Out, err: Out) -> Result<i32, Failed> {
    let (program, sources) = load(&args.files, err)?;
    let a = analyze(&program);
    let entries = entries(&a, &args.entry, err)?;
    dumps(&a, &entries, &args.dumps, err);
    if let Some(dir) = &args.dump_smt {
        if let Err(e) = std::fs::create_dir_all(dir) {
            let _ = writeln!(err, "error: cannot create {}: {e}", dir.display());
            return Err(Failed);
        }
    }
    let opts = CheckOptions {
        solver: Solver::new(&args.solver_cmd, Duration::from_secs(args.timeout)),
        translate: TranslateConfig::default(),
        eliminate: !args.no_eliminate,
        max_examples: args.max_examples,
        jobs: if entries.len() > 1 { 1 } else { args.jobs as usize },
        dump_smt: args.dump_smt.clone(),
    };
    let mut seen = BTreeSet::new();
    warn_all(err, a.warnings.iter().map(|w| w.to_string()), &mut seen);
    let results = par_map(&entries, args.jobs as usize, |e| a.check_entry(e, &opts).expect("entries have summaries"));
    let mut all: Vec<(String, Vec<Diagnostic>)> = Vec::new();
    let mut errors = false;
    for (entry, r) in entries.iter().zip(results) {
        let report = match r {
            Ok(r) => r,
            Err(e) => {
                let _ = writeln!(err, "error: {e}");
                return Err(Failed);
            }
        };
        warn_all(err, report.warnings.iter().map(|w| w.to_string()), &mut seen);
        errors |= report.has_errors();
        let returns = a.cfgs.get(entry).map(|c| c.result_type.to_string()).unwrap_or_else(|| "()".into());
        let diags = diagnose(&report, &returns);
        warn_all(err, render_warnings(&diags), &mut seen);
        all.push((entry.clone(), diags));
    }
    match args.format {
        Format::Text => {
            for (_, d) in &all {
                let _ = write!(out, "{}", render_text(d, &sources));
            }
        }
        Format::Json => {
            let _ = write!(out, "{}", render_json(&all));
        }
    }
    Ok(if errors { 1 } else { 0 })
}

fn run(args: &RunArgs, out: Out, err: Out) -> Result<i32, Failed> {
    let (program, _) = load(&args.files, err)?;
    let Some(f) = program.function(&args.entry) else {
        let _ = writeln!(err, "error: no function named `{}`", args.entry);
        return Err(Failed);
    };
    if !f.params.is_empty() {
        let _ = writeln!(err, "error: `{}` takes parameters; only parameterless entries can be run", args.entry);
        return Err(Failed);
    }
    match interpret(&program, &args.entry, vec![]) {
        Ok(v) => {
            if v != ConcreteValue::Tuple(vec![]) {
                let _ = writeln!(out, "{v}");
            }
            Ok(0)
        }
        Err(e) => {
            let _ = writeln!(out, "{e}");
            Ok(1)
        }
    }
}

fn dump(args: &DumpArgs, out: Out, err: Out) -> Result<i32, Failed> {
    let (program, _) = load(&args.files, err)?;
    let a = analyze(&program);
    let entries = entries(&a, &args.entry, err)?;
    let f = &args.dumps;
    let any = f.dump_cfg || f.dump_summaries || f.dump_constraints;
    let flags = DumpFlags { dump_cfg: f.dump_cfg || !any, dump_summaries: f.dump_summaries || !any, dump_constraints: f.dump_constraints || !any };
    dumps(&a, &entries, &flags, out);
    warn_all(err, a.warnings.iter().map(|w| w.to_string()), &mut BTreeSet::new());
    Ok(0)
}

/// Parse `argv` and run the command. Returns the process exit code:
/// 0 when no errors were found, 1 for shape errors, 2 for usage, input or
/// solver failures.
pub fn main_with<I, T>(argv: I, out: Out, err: Out) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let text = e.render().to_string();
            let _ = if e.use_stderr() { write!(err, "{text}") } else { write!(out, "{text}") };
            return code;
        }
    };
    let r = match &cli.command {
        Command::Check(a) => check(a, out, err),
        Command::Run(a) => run(a, out, err),
        Command::Dump(a) => dump(a, out, err),
    };
    r.unwrap_or(2)
}
