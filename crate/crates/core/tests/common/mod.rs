#![allow(dead_code)]

pub mod broadcast;
pub mod gen;

use std::path::{Path, PathBuf};

use tfit::checker::{analyze, CheckOptions, CheckReport};
use tfit::diagnostics::{diagnose, Diagnostic, FindingKind};
use tfit::frontend::parse_source;

/// What a corpus program declares about itself in trailing comments.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Expect {
    Ok,
    Error(u32),
    Unique(u32, u32, i64),
    Examples(u32, u32),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum OracleExpect {
    Ok,
    Fail(u32),
    Skip,
}

#[derive(Clone, Debug)]
pub struct CorpusProgram {
    pub name: String,
    pub path: PathBuf,
    pub source: String,
    pub expects: Vec<Expect>,
    pub oracle: OracleExpect,
}

impl CorpusProgram {
    /// The path as the checker reports it.
    pub fn file(&self) -> String {
        self.path.display().to_string()
    }
}

pub fn corpus_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("corpus")
}

fn num(s: &str) -> u32 {
    s.parse().unwrap_or_else(|_| panic!("bad number `{s}` in corpus annotation"))
}

fn position(s: &str) -> (u32, u32) {
    let (l, c) = s.split_once(':').expect("LINE:COL");
    (num(l), num(c))
}

pub fn parse_annotations(source: &str) -> (Vec<Expect>, OracleExpect) {
    let mut expects = Vec::new();
    let mut oracle = OracleExpect::Skip;
    for line in source.lines() {
        if let Some(rest) = line.strip_prefix("// expect:") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            expects.push(match words.as_slice() {
                ["ok"] => Expect::Ok,
                ["error", l] => Expect::Error(num(l)),
                ["unique", p, v] => {
                    let (l, c) = position(p);
                    Expect::Unique(l, c, v.parse().unwrap())
                }
                ["examples", p] => {
                    let (l, c) = position(p);
                    Expect::Examples(l, c)
                }
                other => panic!("unknown expectation {other:?}"),
            });
        } else if let Some(rest) = line.strip_prefix("// oracle:") {
            let words: Vec<&str> = rest.split_whitespace().collect();
            oracle = match words.as_slice() {
                ["ok"] => OracleExpect::Ok,
                ["fail", l] => OracleExpect::Fail(num(l)),
                ["skip"] => OracleExpect::Skip,
                other => panic!("unknown oracle annotation {other:?}"),
            };
        }
    }
    (expects, oracle)
}

pub fn corpus() -> Vec<CorpusProgram> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(corpus_dir())
        .expect("corpus directory")
        .map(|e| e.unwrap().path())
        .filter(|p| p.extension().is_some_and(|x| x == "tfit"))
        .collect();
    files.sort();
    files
        .into_iter()
        .map(|path| {
            let source = std::fs::read_to_string(&path).unwrap();
            let (expects, oracle) = parse_annotations(&source);
            let name = path.file_stem().unwrap().to_string_lossy().into_owned();
            CorpusProgram { name, path, source, expects, oracle }
        })
        .collect()
}

pub fn corpus_program(name: &str) -> CorpusProgram {
    corpus().into_iter().find(|p| p.name == name).unwrap_or_else(|| panic!("no corpus program `{name}`"))
}

/// Check every entry point, as the command line does.
pub fn check_all(source: &str, file: &str, opts: &CheckOptions) -> Vec<(String, CheckReport, Vec<Diagnostic>)> {
    let program = parse_source(source, file).unwrap_or_else(|e| panic!("{file}: {e}"));
    let a = analyze(&program);
    a.entry_points()
        .into_iter()
        .filter_map(|entry| {
            let report = a.check_entry(&entry, opts)?.unwrap_or_else(|e| panic!("{file}: {e}"));
            let returns = a.cfgs[&entry].result_type.to_string();
            let diags = diagnose(&report, &returns);
            Some((entry, report, diags))
        })
        .collect()
}

/// Whether the findings match one corpus expectation.
pub fn meets(expect: &Expect, diags: &[Diagnostic]) -> bool {
    let errors = || diags.iter().filter(|d| d.kind == FindingKind::Contradiction);
    let hole_at = |l: u32, c: u32| diags.iter().filter_map(|d| d.hole.as_ref()).find(|h| h.loc.line == l && h.loc.column == c);
    match *expect {
        Expect::Ok => errors().next().is_none(),
        Expect::Error(line) => errors().any(|d| d.facts.iter().any(|f| f.origin.loc.line == line)),
        Expect::Unique(l, c, v) => hole_at(l, c).is_some_and(|h| h.unique && h.values == [v]),
        Expect::Examples(l, c) => hole_at(l, c).is_some_and(|h| !h.unique && !h.values.is_empty()),
    }
}

#[derive(Clone, Debug, Default)]
pub struct Differential {
    pub programs: usize,
    /// Runs the oracle completed normally.
    pub oracle_ok: usize,
    /// Oracle completed, but the checker reported an error.
    pub false_positives: Vec<String>,
    /// Oracle hit a shape error that the checker reported too.
    pub caught: usize,
    /// Oracle hit a shape error that the checker missed.
    pub missed: Vec<String>,
}

/// Compare the checker with the interpreter on one concrete program.
pub fn differential_one(source: &str, opts: &CheckOptions, stats: &mut Differential) {
    let program = parse_source(source, "gen.tfit").unwrap_or_else(|e| panic!("generated program does not parse: {e}\n{source}"));
    let concrete = tfit::oracle::interpret(&program, "main", vec![]);
    let a = analyze(&program);
    let report = a.check_entry("main", opts).expect("main has a summary").expect("solver runs");
    stats.programs += 1;
    match concrete {
        Ok(_) => {
            stats.oracle_ok += 1;
            if report.has_errors() {
                stats.false_positives.push(source.to_string());
            }
        }
        Err(f) if f.is_shape_error() => {
            if report.has_errors() {
                stats.caught += 1;
            } else {
                stats.missed.push(format!("{f}\n{source}"));
            }
        }
        Err(f) => panic!("generated program failed outside the shape checks: {f}\n{source}"),
    }
}
