use std::collections::BTreeMap;
use std::fmt::Write;

use crate::constraints::{
    equate, simplify_any, simplify_bool, substitute, substitute_bool, AnyExpr, Bindings, BoolExpr, FreeVars,
    GuardedConstraint, IntExpr, OriginKind, ShapeExpr, Sort,
};
use crate::frontend::SourceLoc;
use crate::smt::hole_symbols;
use crate::symexec::{FunctionSummary, TraceItem, Warning};

/// Default cap on the number of constraints of an instantiated system.
pub const DEFAULT_BUDGET: usize = 50_000;

/// One step of an inlining chain: the function and the call site it was
/// entered from (`None` for the entry itself).
#[derive(Clone, Debug, PartialEq)]
pub struct Frame {
    pub function: String,
    pub call: Option<SourceLoc>,
}

/// The constraints of an entry function with every call replaced by an
/// instance of the callee's summary.
#[derive(Clone, Debug, PartialEq)]
pub struct InstantiatedSystem {
    pub entry: String,
    pub loc: SourceLoc,
    pub args: Vec<AnyExpr>,
    pub result: AnyExpr,
    pub constraints: Vec<GuardedConstraint>,
    /// Inlining chain of each constraint, starting at the entry.
    pub provenance: Vec<Vec<Frame>>,
    pub holes: BTreeMap<SourceLoc, String>,
    pub warnings: Vec<Warning>,
}

struct Inliner<'a> {
    summaries: &'a BTreeMap<String, FunctionSummary>,
    budget: usize,
    instances: usize,
    out: Vec<GuardedConstraint>,
    provenance: Vec<Vec<Frame>>,
    warnings: Vec<Warning>,
    over_budget: bool,
}

fn renamed(var: &str, sort: Sort, k: usize) -> AnyExpr {
    let name = format!("{var}@{k}");
    match sort {
        Sort::Int => AnyExpr::Int(IntExpr::Var(name)),
        Sort::Bool => AnyExpr::Bool(BoolExpr::Var(name)),
        Sort::Shape => AnyExpr::Shape(ShapeExpr::Var(name)),
    }
}

impl Inliner<'_> {
    fn push(&mut self, c: GuardedConstraint, chain: &[Frame]) {
        self.out.push(c);
        self.provenance.push(chain.to_vec());
    }

    fn warn(&mut self, loc: &SourceLoc, message: String) {
        let w = Warning { loc: loc.clone(), message };
        if !self.warnings.contains(&w) {
            self.warnings.push(w);
        }
    }

    fn expand(&mut self, s: &FunctionSummary, rename: &Bindings, guard: &BoolExpr, chain: &[Frame], stack: &mut Vec<String>) {
        let sub_b = |b: &BoolExpr| simplify_bool(&substitute_bool(b, rename).expect("renaming preserves sorts"));
        let sub_a = |a: &AnyExpr| simplify_any(&substitute(a, rename).expect("renaming preserves sorts"));
        for item in &s.trace {
            match *item {
                TraceItem::Constraint(i) => {
                    let c = &s.constraints[i];
                    let g = simplify_bool(&BoolExpr::and([guard.clone(), sub_b(&c.guard)]));
                    if g == BoolExpr::False {
                        continue;
                    }
                    let body = sub_b(&c.body);
                    self.push(GuardedConstraint { guard: g, body, origin: c.origin.clone() }, chain);
                }
                TraceItem::Call(i) => {
                    let call = &s.calls[i];
                    let g = simplify_bool(&BoolExpr::and([guard.clone(), sub_b(&call.guard)]));
                    if g == BoolExpr::False {
                        continue;
                    }
                    let Some(callee) = self.summaries.get(&call.callee) else {
                        self.warn(&call.loc, format!("no summary for `{}`; the call is not checked", call.callee));
                        continue;
                    };
                    if stack.contains(&call.callee) {
                        self.warn(&call.loc, format!("recursive call to `{}` is not analyzed", call.callee));
                        continue;
                    }
                    if self.out.len() >= self.budget {
                        if !self.over_budget {
                            self.over_budget = true;
                            self.warn(&call.loc, format!("inlining budget of {} constraints exceeded; remaining calls are not checked", self.budget));
                        }
                        continue;
                    }
                    self.instances += 1;
                    let k = self.instances;
                    let mut vars = callee.internal_vars();
                    callee.args.iter().for_each(|a| vars.any(a));
                    vars.any(&callee.result);
                    let inner: Bindings = vars.vars.iter().map(|(v, sort)| (v.clone(), renamed(v, *sort, k))).collect();
                    let mut inner_chain = chain.to_vec();
                    inner_chain.push(Frame { function: call.callee.clone(), call: Some(call.loc.clone()) });
                    let fresh = |a: &AnyExpr| substitute(a, &inner).expect("renaming preserves sorts");
                    for (param, arg) in callee.args.iter().zip(&call.args) {
                        if let Some(eq) = equate(&fresh(param), &sub_a(arg)) {
                            self.glue(&g, eq, &call.loc, &inner_chain);
                        }
                    }
                    stack.push(call.callee.clone());
                    self.expand(callee, &inner, &g, &inner_chain, stack);
                    stack.pop();
                    if let Some(eq) = equate(&sub_a(&call.result), &fresh(&callee.result)) {
                        self.glue(&g, eq, &call.loc, &inner_chain);
                    }
                }
            }
        }
    }

    fn glue(&mut self, guard: &BoolExpr, eq: BoolExpr, loc: &SourceLoc, chain: &[Frame]) {
        let body = simplify_bool(&eq);
        if body != BoolExpr::True {
            self.push(GuardedConstraint::new(guard.clone(), body, loc.clone(), OriginKind::CallGlue), chain);
        }
    }
}

/// Replace every call of `entry` by a freshly renamed copy of the callee's
/// summary, recursively. Callee arguments and results are tied to the call
/// by equations under the call's guard. Recursive calls, calls without a
/// summary and calls beyond the constraint budget are left unconstrained.
pub fn instantiate(entry: &FunctionSummary, summaries: &BTreeMap<String, FunctionSummary>, budget: usize) -> InstantiatedSystem {
    let mut inl = Inliner {
        summaries,
        budget,
        instances: 0,
        out: vec![],
        provenance: vec![],
        warnings: vec![],
        over_budget: false,
    };
    let chain = [Frame { function: entry.name.clone(), call: None }];
    inl.expand(entry, &Bindings::new(), &BoolExpr::True, &chain, &mut vec![entry.name.clone()]);
    let mut fv = FreeVars::default();
    inl.out.iter().for_each(|c| {
        fv.bool(&c.guard);
        fv.bool(&c.body);
    });
    InstantiatedSystem {
        entry: entry.name.clone(),
        loc: entry.loc.clone(),
        args: entry.args.clone(),
        result: entry.result.clone(),
        constraints: inl.out,
        provenance: inl.provenance,
        holes: hole_symbols(&fv.holes),
        warnings: inl.warnings,
    }
}

impl InstantiatedSystem {
    /// Constraints whose guard and body mention no hole.
    pub fn is_hole_free(&self) -> bool {
        self.constraints.iter().all(|c| c.free_vars().holes.is_empty())
    }
}

/// One constraint per line, with its origin.
pub fn dump_system(sys: &InstantiatedSystem) -> String {
    let mut out = String::new();
    let mut head: Vec<String> = sys.args.iter().map(|a| a.to_string()).collect();
    if sys.result != AnyExpr::Compound(vec![]) {
        head.push(sys.result.to_string());
    }
    writeln!(out, "{}({}):", sys.entry, head.join(", ")).unwrap();
    for (c, chain) in sys.constraints.iter().zip(&sys.provenance) {
        let via: Vec<&str> = chain.iter().skip(1).map(|f| f.function.as_str()).collect();
        let via = if via.is_empty() { String::new() } else { format!(" via {}", via.join(" > ")) };
        writeln!(out, "  {c}    ; {} at {}{via}", c.origin.kind, c.origin.loc).unwrap();
    }
    out
}
