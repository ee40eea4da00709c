//! Symbolic execution of loop-free CFGs into function summaries.

use std::collections::BTreeMap;
use std::fmt::{self, Write};

use crate::cfg::{topo_order, Callee, FreshKind, FunctionCfg, Op, Terminator, ValueId};
use crate::constraints::{
    equate, simplify_any, simplify_bool, AnyExpr, BoolExpr, FreeVars, GuardedConstraint, IntExpr, OriginKind, RelOp,
    ShapeExpr,
};
use crate::frontend::ast::{CmpOp, LogicOp};
use crate::frontend::{Intrinsic, SourceLoc, Type};

/// Abstract value of a CFG value. Tensors are represented by their shape,
/// unit values by the empty compound.
#[derive(Clone, Debug, PartialEq)]
pub enum AbsValue {
    Expr(AnyExpr),
    /// Nothing is known, and nothing may be concluded from uses.
    Opaque,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CallSite {
    pub callee: String,
    pub args: Vec<AnyExpr>,
    pub result: AnyExpr,
    pub guard: BoolExpr,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Warning {
    pub loc: SourceLoc,
    pub message: String,
}

impl fmt::Display for Warning {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: warning: {}", self.loc, self.message)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionSummary {
    pub name: String,
    pub args: Vec<AnyExpr>,
    pub result: AnyExpr,
    pub constraints: Vec<GuardedConstraint>,
    pub calls: Vec<CallSite>,
    /// Path condition of every reachable block that ends in `return`.
    pub exit_conditions: Vec<BoolExpr>,
    /// Constraints and calls interleaved in execution order.
    pub trace: Vec<TraceItem>,
    pub warnings: Vec<Warning>,
    pub loc: SourceLoc,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TraceItem {
    Constraint(usize),
    Call(usize),
}

impl FunctionSummary {
    /// Variables that are neither arguments nor the result.
    pub fn internal_vars(&self) -> FreeVars {
        let mut all = FreeVars::default();
        for c in &self.constraints {
            all.bool(&c.guard);
            all.bool(&c.body);
        }
        for call in &self.calls {
            call.args.iter().for_each(|a| all.any(a));
            all.any(&call.result);
            all.bool(&call.guard);
        }
        let mut interface = FreeVars::default();
        self.args.iter().for_each(|a| interface.any(a));
        interface.any(&self.result);
        all.vars.retain(|v, _| !interface.vars.contains_key(v));
        all
    }
}

/// Fresh variables shaped like `ty`, named after `name`.
pub fn shell(ty: &Type, name: &str) -> AbsValue {
    match ty {
        Type::Int => AbsValue::Expr(AnyExpr::Int(IntExpr::var(format!("n{name}")))),
        Type::Bool => AbsValue::Expr(AnyExpr::Bool(BoolExpr::Var(format!("b{name}")))),
        Type::Tensor | Type::Shape => AbsValue::Expr(AnyExpr::Shape(ShapeExpr::var(format!("s{name}")))),
        Type::Unit => AbsValue::Expr(AnyExpr::Compound(vec![])),
        Type::Tuple(items) => {
            let mut parts = Vec::new();
            for (i, t) in items.iter().enumerate() {
                match shell(t, &format!("{name}_{i}")) {
                    AbsValue::Expr(e) => parts.push(e),
                    AbsValue::Opaque => return AbsValue::Opaque,
                }
            }
            AbsValue::Expr(AnyExpr::Compound(parts))
        }
    }
}

fn shell_expr(ty: &Type, name: &str) -> AnyExpr {
    match shell(ty, name) {
        AbsValue::Expr(e) => e,
        AbsValue::Opaque => AnyExpr::Compound(vec![]),
    }
}

struct Exec<'a> {
    cfg: &'a FunctionCfg,
    env: BTreeMap<ValueId, AbsValue>,
    constraints: Vec<GuardedConstraint>,
    calls: Vec<CallSite>,
    trace: Vec<TraceItem>,
    warnings: Vec<Warning>,
}

impl Exec<'_> {
    fn constrain(&mut self, guard: &BoolExpr, body: BoolExpr, loc: &SourceLoc, kind: OriginKind) {
        self.trace.push(TraceItem::Constraint(self.constraints.len()));
        self.constraints.push(GuardedConstraint::new(guard.clone(), body, loc.clone(), kind));
    }

    fn get(&self, v: ValueId) -> AbsValue {
        self.env.get(&v).cloned().unwrap_or(AbsValue::Opaque)
    }

    fn int(&self, v: ValueId) -> Option<IntExpr> {
        match self.get(v) {
            AbsValue::Expr(AnyExpr::Int(i)) => Some(i),
            _ => None,
        }
    }

    fn boolean(&self, v: ValueId) -> Option<BoolExpr> {
        match self.get(v) {
            AbsValue::Expr(AnyExpr::Bool(b)) => Some(b),
            _ => None,
        }
    }

    fn shape(&self, v: ValueId) -> Option<ShapeExpr> {
        match self.get(v) {
            AbsValue::Expr(AnyExpr::Shape(s)) => Some(s),
            _ => None,
        }
    }

    fn expr(&self, v: ValueId) -> Option<AnyExpr> {
        match self.get(v) {
            AbsValue::Expr(e) => Some(e),
            AbsValue::Opaque => None,
        }
    }

    fn warn(&mut self, loc: &SourceLoc, message: impl Into<String>) {
        self.warnings.push(Warning { loc: loc.clone(), message: message.into() });
    }

    fn fresh_for(&self, v: ValueId) -> AnyExpr {
        let info = self.cfg.value(v);
        shell_expr(&info.ty, &info.name)
    }

    fn eval(&mut self, op: &Op, dest: Option<ValueId>, guard: &BoolExpr, loc: &SourceLoc) -> Option<AnyExpr> {
        use AnyExpr as A;
        Some(match op {
            Op::ConstInt(n) => A::Int(IntExpr::Lit(*n)),
            Op::ConstBool(b) => A::Bool(if *b { BoolExpr::True } else { BoolExpr::False }),
            Op::Hole => A::Int(IntExpr::Hole(loc.clone())),
            Op::Arith(o, a, b) => A::Int(IntExpr::arith(*o, self.int(*a)?, self.int(*b)?)),
            Op::Compare(o, a, b) => {
                let eq = || equate(&self.expr(*a)?, &self.expr(*b)?);
                A::Bool(match o {
                    CmpOp::Eq => eq()?,
                    CmpOp::Ne => BoolExpr::not(eq()?),
                    CmpOp::Lt | CmpOp::Le | CmpOp::Gt | CmpOp::Ge => {
                        let rel = match o {
                            CmpOp::Lt => RelOp::Lt,
                            CmpOp::Le => RelOp::Le,
                            CmpOp::Gt => RelOp::Gt,
                            _ => RelOp::Ge,
                        };
                        BoolExpr::IntRel(rel, self.int(*a)?, self.int(*b)?)
                    }
                })
            }
            Op::Logic(o, a, b) => {
                let (a, b) = (self.boolean(*a)?, self.boolean(*b)?);
                A::Bool(if *o == LogicOp::And { BoolExpr::And(vec![a, b]) } else { BoolExpr::Or(vec![a, b]) })
            }
            Op::Not(a) => A::Bool(BoolExpr::not(self.boolean(*a)?)),
            Op::TupleMake(items) => A::Compound(items.iter().map(|v| self.expr(*v)).collect::<Option<_>>()?),
            Op::TupleGet(t, i) => match self.expr(*t)? {
                A::Compound(mut items) if *i < items.len() => items.swap_remove(*i),
                _ => return None,
            },
            Op::ShapeLit(dims) => A::Shape(ShapeExpr::Lit(dims.iter().map(|d| self.int(*d)).collect::<Option<_>>()?)),
            Op::ShapeIndex(s, i) => {
                let s = self.shape(*s)?;
                match crate::constraints::simplify_int(&self.int(*i)?) {
                    IntExpr::Lit(c) => A::Int(IntExpr::dim(s, c)),
                    _ => {
                        self.warn(loc, "shape index is not a constant; uses of this dimension are not checked");
                        return None;
                    }
                }
            }
            Op::Rank(s) => A::Int(IntExpr::rank(self.shape(*s)?)),
            Op::Broadcast(a, b) => A::Shape(ShapeExpr::broadcast(self.shape(*a)?, self.shape(*b)?)),
            Op::Call(Callee::Intrinsic(intr), args) => match intr {
                Intrinsic::ShapeOf => A::Shape(self.shape(args[0])?),
                Intrinsic::Rank => A::Int(IntExpr::rank(self.shape(args[0])?)),
                Intrinsic::Randn => {
                    let result = self.fresh_for(dest?);
                    if let (Some(arg), A::Shape(r)) = (self.shape(args[0]), &result) {
                        self.constrain(guard, BoolExpr::ShapeEq(r.clone(), arg), loc, OriginKind::Intrinsic);
                    }
                    result
                }
                Intrinsic::Opaque(_) => self.fresh_for(dest?),
            },
            Op::Call(Callee::Function(name), args) => {
                let result = match dest {
                    Some(d) => self.fresh_for(d),
                    None => A::Compound(vec![]),
                };
                let args = args
                    .iter()
                    .map(|a| self.expr(*a).unwrap_or_else(|| self.fresh_for(*a)))
                    .collect();
                self.trace.push(TraceItem::Call(self.calls.len()));
                self.calls.push(CallSite {
                    callee: name.clone(),
                    args,
                    result: result.clone(),
                    guard: guard.clone(),
                    loc: loc.clone(),
                });
                result
            }
            Op::Assert(c) => {
                match self.boolean(*c) {
                    Some(body) => self.constrain(guard, body, loc, OriginKind::UserAssert),
                    None => self.warn(loc, "assertion depends on a value the analysis cannot track; not checked"),
                }
                return None;
            }
        })
    }
}

fn or_into(slot: &mut BoolExpr, c: &BoolExpr) {
    *slot = simplify_bool(&BoolExpr::Or(vec![slot.clone(), c.clone()]));
}

/// Symbolically execute a loop-free CFG.
///
/// # Panics
/// If the CFG contains a cycle.
pub fn summarize(cfg: &FunctionCfg) -> FunctionSummary {
    let order = topo_order(cfg).expect("summarize requires a loop-free CFG");
    let mut ex = Exec { cfg, env: BTreeMap::new(), constraints: vec![], calls: vec![], trace: vec![], warnings: vec![] };
    for block in cfg.blocks.values() {
        for p in &block.params {
            ex.env.insert(*p, shell(cfg.ty(*p), &cfg.value(*p).name));
        }
    }
    for (v, kind) in &cfg.fresh {
        debug_assert!(matches!(kind, FreshKind::LoopGuard | FreshKind::LoopCarried));
        ex.env.insert(*v, shell(cfg.ty(*v), &cfg.value(*v).name));
    }
    let args: Vec<AnyExpr> = cfg.params().iter().map(|p| ex.expr(*p).unwrap_or(AnyExpr::Compound(vec![]))).collect();
    let result = shell_expr(&cfg.result_type, "ret");

    let mut conds: BTreeMap<_, BoolExpr> = cfg.blocks.keys().map(|b| (*b, BoolExpr::False)).collect();
    conds.insert(cfg.entry, BoolExpr::True);
    let mut exit_conditions = Vec::new();
    for id in order {
        let guard = conds[&id].clone();
        if guard == BoolExpr::False {
            continue;
        }
        let block = &cfg.blocks[&id];
        for instr in &block.instrs {
            let value = ex.eval(&instr.op, instr.dest, &guard, &instr.loc);
            if let Some(d) = instr.dest {
                ex.env.insert(d, value.map(|e| AbsValue::Expr(simplify_any(&e))).unwrap_or(AbsValue::Opaque));
            }
        }
        let edges: Vec<(BoolExpr, &crate::cfg::Edge)> = match &block.terminator {
            Terminator::Jump(e) => vec![(guard.clone(), e)],
            Terminator::CondJump { cond, then_edge, else_edge } => {
                // An untracked condition still splits the paths, just without
                // any relation to the rest of the program.
                let c = ex.boolean(*cond).unwrap_or_else(|| BoolExpr::Var(format!("b{}", cfg.value(*cond).name)));
                vec![
                    (simplify_bool(&BoolExpr::and([guard.clone(), c.clone()])), then_edge),
                    (simplify_bool(&BoolExpr::and([guard.clone(), BoolExpr::not(c)])), else_edge),
                ]
            }
            Terminator::Return(r) => {
                let value = match r {
                    Some(v) => ex.expr(*v),
                    None => Some(AnyExpr::Compound(vec![])),
                };
                if let Some(body) = value.and_then(|v| equate(&result, &v)) {
                    if body != BoolExpr::True {
                        ex.constrain(&guard, body, &cfg.loc, OriginKind::Result);
                    }
                }
                exit_conditions.push(guard.clone());
                vec![]
            }
        };
        for (edge_cond, edge) in edges {
            if edge_cond == BoolExpr::False {
                continue;
            }
            let target = &cfg.blocks[&edge.target];
            for (param, arg) in target.params.iter().zip(&edge.args) {
                if let (Some(p), Some(a)) = (ex.expr(*param), ex.expr(*arg)) {
                    if let Some(body) = equate(&p, &a) {
                        ex.constrain(&edge_cond, body, &cfg.loc, OriginKind::BlockArgument);
                    }
                }
            }
            or_into(conds.get_mut(&edge.target).unwrap(), &edge_cond);
        }
    }
    FunctionSummary {
        name: cfg.name.clone(),
        args,
        result,
        constraints: ex.constraints,
        calls: ex.calls,
        exit_conditions,
        trace: ex.trace,
        warnings: ex.warnings,
        loc: cfg.loc.clone(),
    }
}

fn interface(items: &[AnyExpr], result: &AnyExpr) -> String {
    let mut parts: Vec<String> = items.iter().map(|a| a.to_string()).collect();
    if *result != AnyExpr::Compound(vec![]) {
        parts.push(result.to_string());
    }
    parts.join(", ")
}

/// Render a summary in the style `f(args, result):` followed by guarded
/// constraints and calls in execution order.
pub fn dump_summary(s: &FunctionSummary) -> String {
    let mut out = String::new();
    writeln!(out, "{}({}):", s.name, interface(&s.args, &s.result)).unwrap();
    let guard = |g: &BoolExpr| if *g == BoolExpr::True { String::new() } else { format!("[{g}] => ") };
    for item in &s.trace {
        let line = match *item {
            TraceItem::Constraint(i) => format!("{}{}", guard(&s.constraints[i].guard), s.constraints[i].body),
            TraceItem::Call(i) => {
                let call = &s.calls[i];
                format!("{}{}({})", guard(&call.guard), call.callee, interface(&call.args, &call.result))
            }
        };
        writeln!(out, "  {line}").unwrap();
    }
    out
}
