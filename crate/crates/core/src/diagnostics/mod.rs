//! Turning check reports into reports for people and machines.

use std::collections::BTreeMap;
use std::fmt::Write;

use serde::Serialize;

use crate::checker::{CheckReport, HoleKind};
use crate::constraints::{eliminate_equalities, BoolExpr, GuardedConstraint, Origin, OriginKind};
use crate::frontend::SourceLoc;

/// Source text by file name, for snippets.
pub type Sources = BTreeMap<String, String>;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
    Info,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FindingKind {
    Contradiction,
    Hole,
    InfeasibleWarning,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoleReport {
    pub loc: SourceLoc,
    pub unique: bool,
    pub values: Vec<i64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Diagnostic {
    pub severity: Severity,
    pub kind: FindingKind,
    pub entry: String,
    /// Rendered return type of the entry.
    pub returns: String,
    pub condition: BoolExpr,
    pub facts: Vec<GuardedConstraint>,
    pub hole: Option<HoleReport>,
}

/// Inline `v = e` equations of a core into the remaining facts and fold
/// constants. Falls back to the raw core when nothing would remain.
pub fn simplify_core(core: &[GuardedConstraint]) -> Vec<GuardedConstraint> {
    let (mut facts, _) = eliminate_equalities(core.to_vec());
    if facts.is_empty() {
        facts = core.to_vec();
    }
    facts.sort_by(|a, b| (&a.origin.loc, a.origin.kind).cmp(&(&b.origin.loc, b.origin.kind)));
    facts
}

/// Findings of one entry: contradictions, infeasible paths, then holes.
pub fn diagnose(report: &CheckReport, returns: &str) -> Vec<Diagnostic> {
    let entry = report.system.entry.clone();
    let base = |severity, kind, condition: &BoolExpr| Diagnostic {
        severity,
        kind,
        entry: entry.clone(),
        returns: returns.to_string(),
        condition: condition.clone(),
        facts: vec![],
        hole: None,
    };
    let mut out = Vec::new();
    for (cond, c) in report.contradictions() {
        let mut d = base(Severity::Error, FindingKind::Contradiction, cond);
        d.facts = simplify_core(&c.facts);
        out.push(d);
    }
    for cond in report.infeasible() {
        let mut d = base(Severity::Warning, FindingKind::InfeasibleWarning, cond);
        d.facts = vec![GuardedConstraint {
            guard: BoolExpr::True,
            body: cond.clone(),
            origin: Origin { loc: report.system.loc.clone(), kind: OriginKind::PathCondition },
        }];
        out.push(d);
    }
    for h in &report.holes {
        let mut d = base(Severity::Info, FindingKind::Hole, &BoolExpr::True);
        d.hole = Some(HoleReport {
            loc: h.loc.clone(),
            unique: matches!(h.kind, HoleKind::Unique(_)),
            values: h.values().to_vec(),
        });
        out.push(d);
    }
    out
}

/// Up to three source lines around `line`, the middle one numbered. The
/// number is right-aligned in a field four wider than `indent`.
pub fn snippet(sources: &Sources, loc: &SourceLoc, indent: usize) -> String {
    let Some(text) = sources.get(&*loc.file) else { return String::new() };
    let lines: Vec<&str> = text.lines().collect();
    let width = indent + 4;
    let at = loc.line as usize;
    let mut out = String::new();
    for n in at.saturating_sub(1).max(1)..=at + 1 {
        let Some(src) = lines.get(n - 1) else { continue };
        let line = if n == at {
            format!("{n:>width$}  | {src}")
        } else {
            format!("{:width$}  | {src}", "")
        };
        writeln!(out, "{}", line.trim_end()).unwrap();
    }
    out
}

fn origin_phrase(kind: OriginKind) -> &'static str {
    match kind {
        OriginKind::UserAssert => "Asserted at",
        OriginKind::BlockArgument => "Joined in the function at",
        OriginKind::Result => "Returned from the function at",
        OriginKind::Intrinsic => "Required by the operation at",
        OriginKind::CallGlue => "Passed at the call at",
        OriginKind::PathCondition => "Assumed in the function at",
    }
}

fn short_loc(loc: &SourceLoc) -> String {
    format!("{}:{}", loc.file, loc.line)
}

/// Text report: errors under `In f():`, holes under `In f() -> T:`.
/// Warnings are not part of it.
pub fn render_text(diags: &[Diagnostic], sources: &Sources) -> String {
    let mut out = String::new();
    let mut header = String::new();
    for d in diags {
        let h = match d.kind {
            FindingKind::Contradiction => format!("In {}():", d.entry),
            FindingKind::Hole => format!("In {}() -> {}:", d.entry, d.returns),
            FindingKind::InfeasibleWarning => continue,
        };
        if h != header {
            writeln!(out, "{h}").unwrap();
            header = h;
        }
        match d.kind {
            FindingKind::Contradiction => {
                if d.condition == BoolExpr::True {
                    writeln!(out, "Something doesn't fit!").unwrap();
                } else {
                    writeln!(out, "Something doesn't fit when {}!", d.condition).unwrap();
                }
                for f in &d.facts {
                    writeln!(out, "  - {f}").unwrap();
                    writeln!(out, "      {} {}", origin_phrase(f.origin.kind), short_loc(&f.origin.loc)).unwrap();
                    out.push_str(&snippet(sources, &f.origin.loc, 6));
                }
            }
            FindingKind::Hole => {
                let h = d.hole.as_ref().expect("hole findings carry a hole");
                let values: Vec<String> = h.values.iter().map(|v| v.to_string()).collect();
                let line = match (h.unique, values.is_empty()) {
                    (true, _) => format!("The hole at {} has to be exactly {}", h.loc, values[0]),
                    (false, true) => format!("No value could be found for the hole at {}", h.loc),
                    (false, false) => {
                        format!("Some example values that the hole at {} might take are: {}", h.loc, values.join(", "))
                    }
                };
                writeln!(out, "  - {line}").unwrap();
                out.push_str(&snippet(sources, &h.loc, 2));
            }
            FindingKind::InfeasibleWarning => {}
        }
    }
    out
}

/// Warning lines for findings that are not part of the text report.
pub fn render_warnings(diags: &[Diagnostic]) -> Vec<String> {
    diags
        .iter()
        .filter(|d| d.kind == FindingKind::InfeasibleWarning)
        .map(|d| {
            let loc = d.facts.first().map(|f| f.origin.loc.to_string()).unwrap_or_default();
            format!("{loc}: warning: in {}(), path condition `{}` is infeasible; constraints under it were not checked", d.entry, d.condition)
        })
        .collect()
}

#[derive(Serialize)]
struct JsonFact {
    expr: String,
    file: String,
    line: u32,
    column: u32,
}

#[derive(Serialize)]
struct JsonHole {
    file: String,
    line: u32,
    column: u32,
    unique: bool,
    values: Vec<i64>,
}

#[derive(Serialize)]
struct JsonFinding {
    kind: FindingKind,
    severity: Severity,
    #[serde(skip_serializing_if = "Option::is_none")]
    condition: Option<String>,
    /// Checking phase that established the finding: 1 for infeasible
    /// paths, 2 for contradictions.
    #[serde(skip_serializing_if = "Option::is_none")]
    phase: Option<u8>,
    facts: Vec<JsonFact>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hole: Option<JsonHole>,
}

#[derive(Serialize)]
struct JsonEntry {
    entry: String,
    findings: Vec<JsonFinding>,
}

fn json_entry(entry: &str, diags: &[Diagnostic]) -> JsonEntry {
    let findings = diags
        .iter()
        .map(|d| JsonFinding {
            kind: d.kind,
            severity: d.severity,
            condition: (d.kind != FindingKind::Hole).then(|| d.condition.to_string()),
            phase: match d.kind {
                FindingKind::InfeasibleWarning => Some(1),
                FindingKind::Contradiction => Some(2),
                FindingKind::Hole => None,
            },
            facts: d
                .facts
                .iter()
                .map(|f| JsonFact {
                    expr: f.to_string(),
                    file: f.origin.loc.file.to_string(),
                    line: f.origin.loc.line,
                    column: f.origin.loc.column,
                })
                .collect(),
            hole: d.hole.as_ref().map(|h| JsonHole {
                file: h.loc.file.to_string(),
                line: h.loc.line,
                column: h.loc.column,
                unique: h.unique,
                values: h.values.clone(),
            }),
        })
        .collect();
    JsonEntry { entry: entry.to_string(), findings }
}

/// One `{entry, findings}` object per checked entry.
pub fn render_json(entries: &[(String, Vec<Diagnostic>)]) -> String {
    let all: Vec<JsonEntry> = entries.iter().map(|(e, d)| json_entry(e, d)).collect();
    serde_json::to_string_pretty(&all).expect("report serializes") + "\n"
}
