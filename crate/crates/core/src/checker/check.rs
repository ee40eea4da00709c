use std::collections::BTreeSet;
use std::path::PathBuf;
use std::time::Duration;

use crate::constraints::{eliminate_tagged, BoolExpr, FreeVars, GuardedConstraint, OriginKind};
use crate::frontend::SourceLoc;
use crate::smt::{SmtScript, Solver, SolverError, Status, Tag, TranslateConfig, Translator};
use crate::symexec::Warning;

use super::{par_map, InstantiatedSystem};

#[derive(Clone, Debug)]
pub struct CheckOptions {
    pub solver: Solver,
    pub translate: TranslateConfig,
    /// Run equality elimination on every query before translation.
    pub eliminate: bool,
    pub max_examples: usize,
    pub jobs: usize,
    /// Directory receiving every query as an SMT-LIB file.
    pub dump_smt: Option<PathBuf>,
}

impl Default for CheckOptions {
    fn default() -> Self {
        CheckOptions {
            solver: Solver::new("z3 -in -smt2", Duration::from_secs(10)),
            translate: TranslateConfig::default(),
            eliminate: true,
            max_examples: 3,
            jobs: 1,
            dump_smt: None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Feasibility {
    Feasible,
    Infeasible,
    Unknown,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Contradiction {
    /// Indices into the system's constraints.
    pub core: Vec<usize>,
    /// The core constraints as they were asserted, after elimination.
    pub facts: Vec<GuardedConstraint>,
    pub condition_in_core: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum PathVerdict {
    Ok,
    Contradiction(Contradiction),
    Unknown,
    /// The path was infeasible or its feasibility unknown.
    NotChecked,
}

#[derive(Clone, Debug, PartialEq)]
pub struct QueryRecord {
    pub label: String,
    pub status: Status,
}

#[derive(Clone, Debug, PartialEq)]
pub struct PathReport {
    pub condition: BoolExpr,
    pub feasibility: Feasibility,
    pub verdict: PathVerdict,
    pub queries: Vec<QueryRecord>,
    /// A contradiction already reported under a weaker condition.
    pub duplicate: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub enum HoleKind {
    Unique(i64),
    Examples(Vec<i64>),
    /// The hole occurs in no asserted formula, so any value fits.
    UnconstrainedSample(Vec<i64>),
}

#[derive(Clone, Debug, PartialEq)]
pub struct HoleSolution {
    pub loc: SourceLoc,
    pub symbol: String,
    pub kind: HoleKind,
    pub queries: Vec<QueryRecord>,
}

impl HoleSolution {
    pub fn values(&self) -> &[i64] {
        match &self.kind {
            HoleKind::Unique(v) => std::slice::from_ref(v),
            HoleKind::Examples(v) | HoleKind::UnconstrainedSample(v) => v,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct CheckReport {
    pub system: InstantiatedSystem,
    pub paths: Vec<PathReport>,
    pub holes: Vec<HoleSolution>,
    pub warnings: Vec<Warning>,
}

impl CheckReport {
    /// Contradictions to report, one per distinct core.
    pub fn contradictions(&self) -> impl Iterator<Item = (&BoolExpr, &Contradiction)> {
        self.paths.iter().filter(|p| !p.duplicate).filter_map(|p| match &p.verdict {
            PathVerdict::Contradiction(c) => Some((&p.condition, c)),
            _ => None,
        })
    }

    pub fn has_errors(&self) -> bool {
        self.contradictions().next().is_some()
    }

    /// Infeasible path conditions worth a notice: once a contradiction has
    /// been found, stronger paths fail the feasibility check because of it.
    pub fn infeasible(&self) -> Vec<&BoolExpr> {
        let mut out = Vec::new();
        for p in &self.paths {
            if matches!(p.verdict, PathVerdict::Contradiction(_)) {
                break;
            }
            if p.feasibility == Feasibility::Infeasible {
                out.push(&p.condition);
            }
        }
        out
    }
}

/// Distinct guards of the system, `True` first, then by number of
/// conjuncts, ties kept in order of first appearance.
pub fn enumerate_path_conditions(sys: &InstantiatedSystem) -> Vec<BoolExpr> {
    let mut conds = vec![BoolExpr::True];
    for c in &sys.constraints {
        if c.guard != BoolExpr::False && !conds.contains(&c.guard) {
            conds.push(c.guard.clone());
        }
    }
    conds.sort_by_key(|c| if *c == BoolExpr::True { 0 } else { c.conjuncts().len() });
    conds
}

type Item = (Tag, GuardedConstraint);

/// The tagged constraints of one query. Phase 1 asserts the condition and
/// the constraints of the blocks dominating the path; phase 2 adds every
/// other constraint under its guard and the bodies of those guarded exactly
/// by the condition.
fn query_items(sys: &InstantiatedSystem, cond: &BoolExpr, phase2: bool, eliminate: bool) -> Vec<Item> {
    let mut items = Vec::new();
    if *cond != BoolExpr::True {
        items.push((Tag::PathCondition, GuardedConstraint::new(BoolExpr::True, cond.clone(), sys.loc.clone(), OriginKind::PathCondition)));
    }
    let within = cond.conjuncts();
    for (i, c) in sys.constraints.iter().enumerate() {
        if c.guard != *cond {
            // Feasibility only looks at the blocks dominating the path.
            if phase2 || c.guard.conjuncts().iter().all(|g| within.contains(g)) {
                items.push((Tag::Constraint(i), c.clone()));
            }
        } else if phase2 {
            items.push((Tag::Constraint(i), GuardedConstraint { guard: BoolExpr::True, ..c.clone() }));
        }
    }
    if eliminate {
        items = eliminate_tagged(items).0;
    }
    items
}

fn encode(sys: &InstantiatedSystem, items: &[Item], config: TranslateConfig) -> SmtScript {
    let mut tr = Translator::new(config, sys.holes.clone());
    let formulas: Vec<(Tag, String)> = items.iter().map(|(t, c)| (t.clone(), tr.guarded(&c.guard, &c.body))).collect();
    SmtScript::build(&tr, formulas)
}

fn smt_int(n: i64) -> String {
    if n < 0 {
        format!("(- {})", n.unsigned_abs())
    } else {
        n.to_string()
    }
}

struct Runner<'a> {
    opts: &'a CheckOptions,
    prefix: String,
    records: Vec<QueryRecord>,
}

impl Runner<'_> {
    fn run(&mut self, label: &str, script: &SmtScript, core: bool, model: bool) -> Result<crate::smt::Verdict, SolverError> {
        if let Some(dir) = &self.opts.dump_smt {
            let file = dir.join(format!("{}-{}.smt2", self.prefix, self.records.len()));
            let text = format!("; {label}\n{}(check-sat)\n", script.to_smtlib());
            std::fs::write(&file, text).map_err(|e| SolverError::Io(format!("{}: {e}", file.display())))?;
        }
        let verdict = self.opts.solver.check(script, core, model)?;
        self.records.push(QueryRecord { label: label.to_string(), status: verdict.status });
        Ok(verdict)
    }
}

/// Check one path condition: feasibility first, then the constraints
/// guarded by it.
pub fn check_path(sys: &InstantiatedSystem, cond: &BoolExpr, opts: &CheckOptions) -> Result<PathReport, SolverError> {
    let index = enumerate_path_conditions(sys).iter().position(|c| c == cond).unwrap_or(usize::MAX);
    let mut runner = Runner { opts, prefix: format!("{}-path{index}", sys.entry), records: vec![] };
    let mut report = PathReport {
        condition: cond.clone(),
        feasibility: Feasibility::Feasible,
        verdict: PathVerdict::NotChecked,
        queries: vec![],
        duplicate: false,
    };
    let phase1 = query_items(sys, cond, false, opts.eliminate);
    if !phase1.is_empty() {
        let v = runner.run("phase 1", &encode(sys, &phase1, opts.translate), false, false)?;
        report.feasibility = match v.status {
            Status::Sat => Feasibility::Feasible,
            Status::Unsat => Feasibility::Infeasible,
            Status::Unknown | Status::Timeout => Feasibility::Unknown,
        };
    }
    if report.feasibility != Feasibility::Feasible {
        report.queries = runner.records;
        return Ok(report);
    }
    if *cond != BoolExpr::True && !sys.constraints.iter().any(|c| c.guard == *cond) {
        report.verdict = PathVerdict::Ok;
        report.queries = runner.records;
        return Ok(report);
    }
    let phase2 = query_items(sys, cond, true, opts.eliminate);
    let script = encode(sys, &phase2, opts.translate);
    let v = runner.run("phase 2", &script, true, false)?;
    report.verdict = match v.status {
        Status::Sat => PathVerdict::Ok,
        Status::Unknown | Status::Timeout => PathVerdict::Unknown,
        Status::Unsat => {
            let mut c = Contradiction { core: vec![], facts: vec![], condition_in_core: false };
            let names: BTreeSet<String> = v.core.into_iter().collect();
            let asserted = script.assertions.iter().filter(|a| a.tag != Tag::Definition);
            for (a, (_, fact)) in asserted.zip(&phase2) {
                if !names.contains(&a.name) {
                    continue;
                }
                match a.tag {
                    Tag::Constraint(i) => {
                        if !c.core.contains(&i) {
                            c.core.push(i);
                        }
                        c.facts.push(fact.clone());
                    }
                    Tag::PathCondition => c.condition_in_core = true,
                    Tag::Definition | Tag::Search => {}
                }
            }
            c.core.sort();
            PathVerdict::Contradiction(c)
        }
    };
    report.queries = runner.records;
    Ok(report)
}

/// Re-assert a contradiction's facts, together with its path condition,
/// without anything else.
pub fn recheck_core(sys: &InstantiatedSystem, cond: &BoolExpr, c: &Contradiction, opts: &CheckOptions) -> Result<Status, SolverError> {
    let mut items: Vec<Item> = c.facts.iter().map(|f| (Tag::Search, f.clone())).collect();
    if *cond != BoolExpr::True {
        items.push((Tag::PathCondition, GuardedConstraint::new(BoolExpr::True, cond.clone(), sys.loc.clone(), OriginKind::PathCondition)));
    }
    Ok(opts.solver.check(&encode(sys, &items, opts.translate), false, false)?.status)
}

/// Value or example values for every hole, under the given (feasible and
/// contradiction-free) path condition.
pub fn solve_holes(sys: &InstantiatedSystem, cond: &BoolExpr, opts: &CheckOptions) -> Result<Vec<HoleSolution>, SolverError> {
    let items = query_items(sys, cond, true, opts.eliminate);
    let mut present = FreeVars::default();
    for (_, c) in &items {
        present.bool(&c.guard);
        present.bool(&c.body);
    }
    let base = encode(sys, &items, opts.translate);
    let mut runner = Runner { opts, prefix: format!("{}-holes", sys.entry), records: vec![] };
    let first = runner.run("model", &base, false, true)?;
    if first.status != Status::Sat {
        return Ok(vec![]);
    }
    let sample: Vec<i64> = (1..).take(opts.max_examples).collect();
    let mut out = Vec::new();
    for (loc, sym) in &sys.holes {
        runner.records.clear();
        let model_value = first.model.get(sym).copied();
        let kind = match model_value {
            Some(m) if present.holes.contains(loc) => {
                let mut q = base.clone();
                q.push(Tag::Search, format!("(not (= {sym} {}))", smt_int(m)));
                match runner.run(&format!("{sym} != {m}"), &q, false, false)?.status {
                    Status::Unsat => HoleKind::Unique(m),
                    Status::Sat => HoleKind::Examples(examples(&mut runner, &base, sym, opts.max_examples)?),
                    Status::Unknown | Status::Timeout => HoleKind::Examples(vec![m]),
                }
            }
            _ => HoleKind::UnconstrainedSample(sample.clone()),
        };
        out.push(HoleSolution { loc: loc.clone(), symbol: sym.clone(), kind, queries: runner.records.clone() });
    }
    Ok(out)
}

fn with_clause(base: &SmtScript, clause: String) -> SmtScript {
    let mut q = base.clone();
    q.push(Tag::Search, clause);
    q
}

/// The smallest admissible values >= 1, found by bounding queries and a
/// binary search for each, topped up by plain enumeration when fewer exist.
fn examples(runner: &mut Runner, base: &SmtScript, sym: &str, max: usize) -> Result<Vec<i64>, SolverError> {
    let mut found: Vec<i64> = Vec::new();
    let mut lb = 1i64;
    'ascending: while found.len() < max {
        let v = runner.run(&format!("{sym} >= {lb}"), &with_clause(base, format!("(>= {sym} {})", smt_int(lb))), false, true)?;
        if v.status != Status::Sat {
            break;
        }
        let Some(mut hi) = v.model.get(sym).copied() else { break };
        let mut lo = lb;
        while lo < hi {
            let mid = lo + (hi - lo) / 2;
            let clause = format!("(and (>= {sym} {}) (<= {sym} {}))", smt_int(lo), smt_int(mid));
            let v = runner.run(&format!("{lo} <= {sym} <= {mid}"), &with_clause(base, clause), false, true)?;
            match v.status {
                Status::Sat => match v.model.get(sym) {
                    Some(&m) => hi = m,
                    None => break 'ascending,
                },
                Status::Unsat => lo = mid + 1,
                Status::Unknown | Status::Timeout => break 'ascending,
            }
        }
        found.push(lo);
        lb = match lo.checked_add(1) {
            Some(n) => n,
            None => break,
        };
    }
    while found.len() < max {
        let clause = crate::smt::conj(found.iter().map(|v| format!("(not (= {sym} {}))", smt_int(*v))).collect());
        let v = runner.run(&format!("{sym} not in {found:?}"), &with_clause(base, clause), false, true)?;
        match (v.status, v.model.get(sym)) {
            (Status::Sat, Some(&m)) if !found.contains(&m) => found.push(m),
            _ => break,
        }
    }
    Ok(found)
}

/// Check every path condition of the system, drop contradictions already
/// reported under a weaker condition, and solve holes on the weakest path
/// that checked out.
pub fn check_system(sys: InstantiatedSystem, opts: &CheckOptions) -> Result<CheckReport, SolverError> {
    let conds = enumerate_path_conditions(&sys);
    let results = par_map(&conds, opts.jobs, |c| check_path(&sys, c, opts));
    let mut paths = results.into_iter().collect::<Result<Vec<_>, _>>()?;
    let mut warnings = sys.warnings.clone();
    let mut reported: Vec<BTreeSet<usize>> = Vec::new();
    for p in &mut paths {
        if let PathVerdict::Contradiction(c) = &p.verdict {
            let key: BTreeSet<usize> = c.core.iter().copied().collect();
            if reported.iter().any(|k| k.is_subset(&key)) {
                p.duplicate = true;
            } else {
                reported.push(key);
            }
        }
        if p.feasibility == Feasibility::Unknown || p.verdict == PathVerdict::Unknown {
            let status = p.queries.last().map_or(Status::Unknown, |q| q.status);
            warnings.push(Warning {
                loc: sys.loc.clone(),
                message: format!("solver answered {status} for path condition `{}`; not checked", p.condition),
            });
        }
    }
    let mut holes = vec![];
    if !sys.holes.is_empty() {
        if let Some(p) = paths.iter().find(|p| p.feasibility == Feasibility::Feasible && p.verdict == PathVerdict::Ok) {
            holes = solve_holes(&sys, &p.condition, opts)?;
        }
    }
    Ok(CheckReport { system: sys, paths, holes, warnings })
}
