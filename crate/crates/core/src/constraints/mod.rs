//! The shape-constraint language: integer, boolean, shape and compound
//! expressions, guarded constraints, and the rewriting passes over them.

mod display;
mod eliminate;
pub mod eval;
mod simplify;
mod subst;

use std::collections::{BTreeMap, BTreeSet};

use thiserror::Error;

pub use crate::frontend::ast::ArithOp;
use crate::frontend::SourceLoc;
pub use eliminate::{eliminate_equalities, eliminate_tagged, Bindings};
pub use simplify::{dim_offset, floor_div, simplify_any, simplify_bool, simplify_int, simplify_shape};
pub use subst::{substitute, substitute_bool, substitute_int, substitute_shape};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RelOp {
    Gt,
    Ge,
    Lt,
    Le,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum IntExpr {
    Lit(i64),
    Var(String),
    Hole(SourceLoc),
    Rank(Box<ShapeExpr>),
    /// Dimension `index` of a shape; negative indices count from the back.
    Dim(Box<ShapeExpr>, i64),
    Arith(ArithOp, Box<IntExpr>, Box<IntExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum BoolExpr {
    True,
    False,
    Var(String),
    Not(Box<BoolExpr>),
    /// Never empty; use [`BoolExpr::and`] to build.
    And(Vec<BoolExpr>),
    /// Never empty; use [`BoolExpr::or`] to build.
    Or(Vec<BoolExpr>),
    IntEq(IntExpr, IntExpr),
    ShapeEq(ShapeExpr, ShapeExpr),
    BoolEq(Box<BoolExpr>, Box<BoolExpr>),
    IntRel(RelOp, IntExpr, IntExpr),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum ShapeExpr {
    Var(String),
    Lit(Vec<IntExpr>),
    Broadcast(Box<ShapeExpr>, Box<ShapeExpr>),
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum AnyExpr {
    Int(IntExpr),
    Bool(BoolExpr),
    Shape(ShapeExpr),
    Compound(Vec<AnyExpr>),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Sort {
    Int,
    Bool,
    Shape,
}

impl IntExpr {
    pub fn var(name: impl Into<String>) -> Self {
        IntExpr::Var(name.into())
    }

    pub fn arith(op: ArithOp, a: IntExpr, b: IntExpr) -> Self {
        IntExpr::Arith(op, Box::new(a), Box::new(b))
    }

    pub fn dim(s: ShapeExpr, index: i64) -> Self {
        IntExpr::Dim(Box::new(s), index)
    }

    pub fn rank(s: ShapeExpr) -> Self {
        IntExpr::Rank(Box::new(s))
    }
}

impl ShapeExpr {
    pub fn var(name: impl Into<String>) -> Self {
        ShapeExpr::Var(name.into())
    }

    pub fn lit(dims: impl IntoIterator<Item = i64>) -> Self {
        ShapeExpr::Lit(dims.into_iter().map(IntExpr::Lit).collect())
    }

    pub fn broadcast(a: ShapeExpr, b: ShapeExpr) -> Self {
        ShapeExpr::Broadcast(Box::new(a), Box::new(b))
    }
}

impl BoolExpr {
    pub fn and(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        let mut v: Vec<BoolExpr> = items.into_iter().collect();
        match v.len() {
            0 => BoolExpr::True,
            1 => v.pop().unwrap(),
            _ => BoolExpr::And(v),
        }
    }

    pub fn or(items: impl IntoIterator<Item = BoolExpr>) -> Self {
        let mut v: Vec<BoolExpr> = items.into_iter().collect();
        match v.len() {
            0 => BoolExpr::False,
            1 => v.pop().unwrap(),
            _ => BoolExpr::Or(v),
        }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(b: BoolExpr) -> Self {
        BoolExpr::Not(Box::new(b))
    }

    pub fn implies(a: BoolExpr, b: BoolExpr) -> Self {
        BoolExpr::or([BoolExpr::not(a), b])
    }

    /// Top-level conjuncts (the expression itself when it is not an `And`).
    pub fn conjuncts(&self) -> Vec<&BoolExpr> {
        match self {
            BoolExpr::True => vec![],
            BoolExpr::And(items) => items.iter().collect(),
            other => vec![other],
        }
    }
}

/// Equation between two values of the same structure; compounds are
/// compared componentwise. `None` when the structures differ.
pub fn equate(a: &AnyExpr, b: &AnyExpr) -> Option<BoolExpr> {
    Some(match (a, b) {
        (AnyExpr::Int(x), AnyExpr::Int(y)) => BoolExpr::IntEq(x.clone(), y.clone()),
        (AnyExpr::Bool(x), AnyExpr::Bool(y)) => BoolExpr::BoolEq(Box::new(x.clone()), Box::new(y.clone())),
        (AnyExpr::Shape(x), AnyExpr::Shape(y)) => BoolExpr::ShapeEq(x.clone(), y.clone()),
        (AnyExpr::Compound(xs), AnyExpr::Compound(ys)) if xs.len() == ys.len() => {
            BoolExpr::and(xs.iter().zip(ys).map(|(x, y)| equate(x, y)).collect::<Option<Vec<_>>>()?)
        }
        _ => return None,
    })
}

/// Free variables (with their sorts) and holes of an expression.
#[derive(Default, Debug, Clone, PartialEq)]
pub struct FreeVars {
    pub vars: BTreeMap<String, Sort>,
    pub holes: BTreeSet<SourceLoc>,
}

impl FreeVars {
    pub fn int(&mut self, e: &IntExpr) {
        match e {
            IntExpr::Lit(_) => {}
            IntExpr::Var(v) => {
                self.vars.insert(v.clone(), Sort::Int);
            }
            IntExpr::Hole(loc) => {
                self.holes.insert(loc.clone());
            }
            IntExpr::Rank(s) | IntExpr::Dim(s, _) => self.shape(s),
            IntExpr::Arith(_, a, b) => {
                self.int(a);
                self.int(b);
            }
        }
    }

    pub fn shape(&mut self, e: &ShapeExpr) {
        match e {
            ShapeExpr::Var(v) => {
                self.vars.insert(v.clone(), Sort::Shape);
            }
            ShapeExpr::Lit(dims) => dims.iter().for_each(|d| self.int(d)),
            ShapeExpr::Broadcast(a, b) => {
                self.shape(a);
                self.shape(b);
            }
        }
    }

    pub fn bool(&mut self, e: &BoolExpr) {
        match e {
            BoolExpr::True | BoolExpr::False => {}
            BoolExpr::Var(v) => {
                self.vars.insert(v.clone(), Sort::Bool);
            }
            BoolExpr::Not(b) => self.bool(b),
            BoolExpr::And(items) | BoolExpr::Or(items) => items.iter().for_each(|b| self.bool(b)),
            BoolExpr::IntEq(a, b) | BoolExpr::IntRel(_, a, b) => {
                self.int(a);
                self.int(b);
            }
            BoolExpr::ShapeEq(a, b) => {
                self.shape(a);
                self.shape(b);
            }
            BoolExpr::BoolEq(a, b) => {
                self.bool(a);
                self.bool(b);
            }
        }
    }

    pub fn any(&mut self, e: &AnyExpr) {
        match e {
            AnyExpr::Int(i) => self.int(i),
            AnyExpr::Bool(b) => self.bool(b),
            AnyExpr::Shape(s) => self.shape(s),
            AnyExpr::Compound(items) => items.iter().for_each(|i| self.any(i)),
        }
    }

    pub fn of_bool(e: &BoolExpr) -> Self {
        let mut fv = FreeVars::default();
        fv.bool(e);
        fv
    }

    pub fn of_any(e: &AnyExpr) -> Self {
        let mut fv = FreeVars::default();
        fv.any(e);
        fv
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum OriginKind {
    UserAssert,
    BlockArgument,
    /// Equation binding a function's result variable at a `return`.
    Result,
    Intrinsic,
    CallGlue,
    /// The path condition asserted by a checker query.
    PathCondition,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Origin {
    pub loc: SourceLoc,
    pub kind: OriginKind,
}

/// A boolean constraint that must hold whenever its guard (a path
/// condition) does.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct GuardedConstraint {
    pub guard: BoolExpr,
    pub body: BoolExpr,
    pub origin: Origin,
}

impl GuardedConstraint {
    pub fn new(guard: BoolExpr, body: BoolExpr, loc: SourceLoc, kind: OriginKind) -> Self {
        GuardedConstraint { guard, body, origin: Origin { loc, kind } }
    }

    pub fn free_vars(&self) -> FreeVars {
        let mut fv = FreeVars::default();
        fv.bool(&self.guard);
        fv.bool(&self.body);
        fv
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SubstError {
    #[error("variable `{name}` has sort {expected:?} but is bound to a {found} expression")]
    SortMismatch { name: String, expected: Sort, found: &'static str },
}
