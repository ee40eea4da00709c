//! Reference interpreter. Tensors carry their shape and nothing else, which
//! is all that assertions can observe.

use std::collections::HashMap;
use std::fmt;

use thiserror::Error;

use crate::constraints::eval::broadcast_shapes;
use crate::constraints::{dim_offset, floor_div};
use crate::frontend::ast::{ArithOp, CmpOp, LogicOp};
use crate::frontend::{Expr, ExprKind, Function, Intrinsic, OpaqueOp, Program, SourceLoc, Stmt, StmtKind};

/// Default limit on loop iterations plus function calls of one run.
pub const DEFAULT_STEP_BUDGET: usize = 10_000;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ConcreteValue {
    Int(i64),
    Bool(bool),
    Shape(Vec<i64>),
    Tensor(Vec<i64>),
    Tuple(Vec<ConcreteValue>),
}

impl fmt::Display for ConcreteValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let dims = |d: &[i64]| d.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ");
        match self {
            ConcreteValue::Int(n) => write!(f, "{n}"),
            ConcreteValue::Bool(b) => write!(f, "{b}"),
            ConcreteValue::Shape(d) => write!(f, "[{}]", dims(d)),
            ConcreteValue::Tensor(d) => write!(f, "Tensor[{}]", dims(d)),
            ConcreteValue::Tuple(items) => {
                let parts: Vec<String> = items.iter().map(|v| v.to_string()).collect();
                write!(f, "({})", parts.join(", "))
            }
        }
    }
}

const UNIT: ConcreteValue = ConcreteValue::Tuple(Vec::new());

/// Why a run stopped before completing normally.
#[derive(Clone, Debug, PartialEq, Eq, Error)]
pub enum Failure {
    #[error("{0}: assertion failed")]
    Assert(SourceLoc),
    #[error("{0}: reached a shape hole")]
    Hole(SourceLoc),
    #[error("{0}: division with a negative operand")]
    NegativeDivision(SourceLoc),
    #[error("{0}: division by zero")]
    DivisionByZero(SourceLoc),
    #[error("{0}: integer overflow")]
    Overflow(SourceLoc),
    #[error("{0}: shape index out of range")]
    IndexOutOfRange(SourceLoc),
    #[error("{0}: shapes cannot be broadcast")]
    Broadcast(SourceLoc),
    #[error("{0}: negative dimension")]
    NegativeDimension(SourceLoc),
    #[error("{loc}: `{op}` cannot take these shapes")]
    Operation { loc: SourceLoc, op: String },
    #[error("step budget exceeded")]
    BudgetExceeded,
    #[error("{0}")]
    Invalid(String),
}

impl Failure {
    /// Failures that a shape check could have predicted: assertions,
    /// broadcasts, indexing and operation shape mismatches.
    pub fn is_shape_error(&self) -> bool {
        matches!(
            self,
            Failure::Assert(_) | Failure::IndexOutOfRange(_) | Failure::Broadcast(_) | Failure::Operation { .. }
        )
    }
}

enum Flow {
    Next,
    Return(ConcreteValue),
}

struct Interp<'p> {
    program: &'p Program,
    steps: usize,
    budget: usize,
}

type Scope = Vec<HashMap<String, ConcreteValue>>;

fn lookup(scope: &Scope, name: &str) -> Result<ConcreteValue, Failure> {
    scope
        .iter()
        .rev()
        .find_map(|s| s.get(name).cloned())
        .ok_or_else(|| Failure::Invalid(format!("unbound variable `{name}`")))
}

fn assign(scope: &mut Scope, name: &str, v: ConcreteValue) -> Result<(), Failure> {
    for s in scope.iter_mut().rev() {
        if let Some(slot) = s.get_mut(name) {
            *slot = v;
            return Ok(());
        }
    }
    Err(Failure::Invalid(format!("assignment to unbound `{name}`")))
}

fn int(v: ConcreteValue) -> Result<i64, Failure> {
    match v {
        ConcreteValue::Int(n) => Ok(n),
        other => Err(Failure::Invalid(format!("expected an integer, found {other}"))),
    }
}

fn boolean(v: ConcreteValue) -> Result<bool, Failure> {
    match v {
        ConcreteValue::Bool(b) => Ok(b),
        other => Err(Failure::Invalid(format!("expected a boolean, found {other}"))),
    }
}

fn dims(v: ConcreteValue) -> Result<Vec<i64>, Failure> {
    match v {
        ConcreteValue::Shape(d) | ConcreteValue::Tensor(d) => Ok(d),
        other => Err(Failure::Invalid(format!("expected a shape, found {other}"))),
    }
}

fn pair(v: ConcreteValue) -> Result<(i64, i64), Failure> {
    match v {
        ConcreteValue::Tuple(items) if items.len() == 2 => Ok((int(items[0].clone())?, int(items[1].clone())?)),
        other => Err(Failure::Invalid(format!("expected a pair, found {other}"))),
    }
}

/// Concrete shape semantics of the opaque tensor operations.
pub fn opaque_shape(op: OpaqueOp, args: &[ConcreteValue]) -> Option<Vec<i64>> {
    let t = |i: usize| match args.get(i) {
        Some(ConcreteValue::Tensor(d)) => Some(d.clone()),
        _ => None,
    };
    let window = |len: i64, k: i64, s: i64| (len >= k && k > 0 && s > 0).then(|| (len - k) / s + 1);
    match op {
        OpaqueOp::MatMul => {
            let (a, b) = (t(0)?, t(1)?);
            let (ra, rb) = (a.len(), b.len());
            if ra < 2 || ra != rb || a[..ra - 2] != b[..rb - 2] || a[ra - 1] != b[rb - 2] {
                return None;
            }
            let mut out = a[..ra - 1].to_vec();
            out.push(b[rb - 1]);
            Some(out)
        }
        OpaqueOp::Add | OpaqueOp::Sub | OpaqueOp::Mul => broadcast_shapes(&t(0)?, &t(1)?),
        OpaqueOp::Relu | OpaqueOp::Softmax => t(0),
        OpaqueOp::Transpose => Some(t(0)?.into_iter().rev().collect()),
        OpaqueOp::Flatten => {
            let a = t(0)?;
            let (first, rest) = a.split_first()?;
            Some(vec![*first, rest.iter().try_fold(1i64, |acc, d| acc.checked_mul(*d))?])
        }
        OpaqueOp::Conv2d => {
            let (x, w) = (t(0)?, t(1)?);
            let (sh, sw) = pair(args.get(2)?.clone()).ok()?;
            if x.len() != 4 || w.len() != 4 || x[3] != w[2] {
                return None;
            }
            Some(vec![x[0], window(x[1], w[0], sh)?, window(x[2], w[1], sw)?, w[3]])
        }
        OpaqueOp::MaxPool2d => {
            let x = t(0)?;
            let (kh, kw) = pair(args.get(1)?.clone()).ok()?;
            let (sh, sw) = pair(args.get(2)?.clone()).ok()?;
            if x.len() != 4 {
                return None;
            }
            Some(vec![x[0], window(x[1], kh, sh)?, window(x[2], kw, sw)?, x[3]])
        }
        OpaqueOp::Reshape => {
            let (a, ConcreteValue::Shape(s)) = (t(0)?, args.get(1)?.clone()) else { return None };
            let count = |d: &[i64]| d.iter().try_fold(1i64, |acc, x| acc.checked_mul(*x));
            (count(&a)? == count(&s)?).then_some(s)
        }
    }
}

impl<'p> Interp<'p> {
    fn step(&mut self) -> Result<(), Failure> {
        self.steps += 1;
        if self.steps > self.budget {
            Err(Failure::BudgetExceeded)
        } else {
            Ok(())
        }
    }

    fn call(&mut self, f: &'p Function, args: Vec<ConcreteValue>) -> Result<ConcreteValue, Failure> {
        self.step()?;
        if f.params.len() != args.len() {
            return Err(Failure::Invalid(format!("`{}` takes {} arguments", f.name, f.params.len())));
        }
        let frame = f.params.iter().map(|p| p.name.clone()).zip(args).collect();
        let mut scope = vec![frame];
        match self.block(&f.body, &mut scope)? {
            Flow::Return(v) => Ok(v),
            Flow::Next => Ok(UNIT),
        }
    }

    fn block(&mut self, body: &'p [Stmt], scope: &mut Scope) -> Result<Flow, Failure> {
        scope.push(HashMap::new());
        let r = self.stmts(body, scope);
        scope.pop();
        r
    }

    fn stmts(&mut self, body: &'p [Stmt], scope: &mut Scope) -> Result<Flow, Failure> {
        for s in body {
            match &s.kind {
                StmtKind::Let { name, value, .. } => {
                    let v = self.expr(value, scope)?;
                    scope.last_mut().unwrap().insert(name.clone(), v);
                }
                StmtKind::Assign { name, value } => {
                    let v = self.expr(value, scope)?;
                    assign(scope, name, v)?;
                }
                StmtKind::Assert(e) => {
                    if !boolean(self.expr(e, scope)?)? {
                        return Err(Failure::Assert(s.loc.clone()));
                    }
                }
                StmtKind::If { cond, then_body, else_body } => {
                    let flow = if boolean(self.expr(cond, scope)?)? {
                        self.block(then_body, scope)?
                    } else if let Some(b) = else_body {
                        self.block(b, scope)?
                    } else {
                        Flow::Next
                    };
                    if let Flow::Return(v) = flow {
                        return Ok(Flow::Return(v));
                    }
                }
                StmtKind::For { var, lo, hi, body } => {
                    let (lo, hi) = (int(self.expr(lo, scope)?)?, int(self.expr(hi, scope)?)?);
                    for i in lo..hi {
                        self.step()?;
                        scope.push(HashMap::from([(var.clone(), ConcreteValue::Int(i))]));
                        let flow = self.block(body, scope);
                        scope.pop();
                        if let Flow::Return(v) = flow? {
                            return Ok(Flow::Return(v));
                        }
                    }
                }
                StmtKind::Return(e) => {
                    let v = match e {
                        Some(e) => self.expr(e, scope)?,
                        None => UNIT,
                    };
                    return Ok(Flow::Return(v));
                }
                StmtKind::Expr(e) => {
                    self.expr(e, scope)?;
                }
            }
        }
        Ok(Flow::Next)
    }

    fn expr(&mut self, e: &'p Expr, scope: &mut Scope) -> Result<ConcreteValue, Failure> {
        use ConcreteValue as V;
        let loc = &e.loc;
        Ok(match &e.kind {
            ExprKind::Int(n) => V::Int(*n),
            ExprKind::Bool(b) => V::Bool(*b),
            ExprKind::Var(name) => lookup(scope, name)?,
            ExprKind::Hole => return Err(Failure::Hole(loc.clone())),
            ExprKind::Arith(op, a, b) => {
                let (a, b) = (int(self.expr(a, scope)?)?, int(self.expr(b, scope)?)?);
                let r = match op {
                    ArithOp::Add => a.checked_add(b),
                    ArithOp::Sub => a.checked_sub(b),
                    ArithOp::Mul => a.checked_mul(b),
                    ArithOp::Div => {
                        if a < 0 || b < 0 {
                            return Err(Failure::NegativeDivision(loc.clone()));
                        }
                        if b == 0 {
                            return Err(Failure::DivisionByZero(loc.clone()));
                        }
                        floor_div(a, b)
                    }
                };
                V::Int(r.ok_or_else(|| Failure::Overflow(loc.clone()))?)
            }
            ExprKind::Compare(op, a, b) => {
                let (a, b) = (self.expr(a, scope)?, self.expr(b, scope)?);
                V::Bool(match op {
                    CmpOp::Eq => a == b,
                    CmpOp::Ne => a != b,
                    CmpOp::Lt => int(a)? < int(b)?,
                    CmpOp::Le => int(a)? <= int(b)?,
                    CmpOp::Gt => int(a)? > int(b)?,
                    CmpOp::Ge => int(a)? >= int(b)?,
                })
            }
            ExprKind::Logic(op, a, b) => {
                let (a, b) = (boolean(self.expr(a, scope)?)?, boolean(self.expr(b, scope)?)?);
                V::Bool(if *op == LogicOp::And { a && b } else { a || b })
            }
            ExprKind::Not(a) => V::Bool(!boolean(self.expr(a, scope)?)?),
            ExprKind::Neg(a) => V::Int(int(self.expr(a, scope)?)?.checked_neg().ok_or_else(|| Failure::Overflow(loc.clone()))?),
            ExprKind::Call(name, args) => {
                let args = args.iter().map(|a| self.expr(a, scope)).collect::<Result<Vec<_>, _>>()?;
                self.apply(name, args, loc)?
            }
            ExprKind::Tuple(items) => V::Tuple(items.iter().map(|a| self.expr(a, scope)).collect::<Result<_, _>>()?),
            ExprKind::Proj(t, i) => match self.expr(t, scope)? {
                V::Tuple(mut items) if *i < items.len() => items.swap_remove(*i),
                other => return Err(Failure::Invalid(format!("cannot project .{i} of {other}"))),
            },
            ExprKind::ShapeLit(items) => {
                let d = items.iter().map(|a| self.expr(a, scope).and_then(int)).collect::<Result<Vec<_>, _>>()?;
                if d.iter().any(|x| *x < 0) {
                    return Err(Failure::NegativeDimension(loc.clone()));
                }
                V::Shape(d)
            }
            ExprKind::Index(s, i) => {
                let (d, i) = (dims(self.expr(s, scope)?)?, int(self.expr(i, scope)?)?);
                let at = dim_offset(d.len(), i).ok_or_else(|| Failure::IndexOutOfRange(loc.clone()))?;
                V::Int(d[at])
            }
            ExprKind::Rank(s) => V::Int(dims(self.expr(s, scope)?)?.len() as i64),
            ExprKind::Broadcast(a, b) => {
                let (a, b) = (dims(self.expr(a, scope)?)?, dims(self.expr(b, scope)?)?);
                V::Shape(broadcast_shapes(&a, &b).ok_or_else(|| Failure::Broadcast(loc.clone()))?)
            }
            ExprKind::ShapeAssert { operand, shape } => {
                let v = self.expr(operand, scope)?;
                let want = dims(self.expr(shape, scope)?)?;
                if dims(v.clone())? != want {
                    return Err(Failure::Assert(loc.clone()));
                }
                v
            }
        })
    }

    fn apply(&mut self, name: &str, args: Vec<ConcreteValue>, loc: &SourceLoc) -> Result<ConcreteValue, Failure> {
        if let Some(f) = self.program.function(name) {
            return self.call(f, args);
        }
        let Some(intr) = Intrinsic::lookup(name) else {
            return Err(Failure::Invalid(format!("unknown function `{name}`")));
        };
        let first = args.first().cloned().ok_or_else(|| Failure::Invalid(format!("`{name}` needs an argument")))?;
        Ok(match intr {
            Intrinsic::ShapeOf => ConcreteValue::Shape(dims(first)?),
            Intrinsic::Rank => ConcreteValue::Int(dims(first)?.len() as i64),
            Intrinsic::Randn => {
                let d = dims(first)?;
                if d.iter().any(|x| *x < 0) {
                    return Err(Failure::NegativeDimension(loc.clone()));
                }
                ConcreteValue::Tensor(d)
            }
            Intrinsic::Opaque(op) => ConcreteValue::Tensor(
                opaque_shape(op, &args).ok_or_else(|| Failure::Operation { loc: loc.clone(), op: name.to_string() })?,
            ),
        })
    }
}

/// Run `entry` with the given arguments.
pub fn interpret(program: &Program, entry: &str, args: Vec<ConcreteValue>) -> Result<ConcreteValue, Failure> {
    interpret_with_budget(program, entry, args, DEFAULT_STEP_BUDGET)
}

pub fn interpret_with_budget(program: &Program, entry: &str, args: Vec<ConcreteValue>, budget: usize) -> Result<ConcreteValue, Failure> {
    let f = program.function(entry).ok_or_else(|| Failure::Invalid(format!("no function named `{entry}`")))?;
    Interp { program, steps: 0, budget }.call(f, args)
}

#[cfg(test)]
mod tests;
