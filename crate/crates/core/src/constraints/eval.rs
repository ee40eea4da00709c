//! Concrete evaluation of constraint expressions under an environment.
//!
//! Partial: division by zero, out-of-range dimensions and illegal
//! broadcasts evaluate to `None`.

use std::collections::BTreeMap;

use super::simplify::{dim_offset, fold_arith};
use super::*;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Value {
    Int(i64),
    Bool(bool),
    Shape(Vec<i64>),
    Tuple(Vec<Value>),
}

/// Variable valuation; holes are looked up under `hole@LINE:COL`.
#[derive(Clone, Debug, Default)]
pub struct Env {
    pub vars: BTreeMap<String, Value>,
}

pub fn hole_key(loc: &SourceLoc) -> String {
    format!("hole@{}:{}", loc.line, loc.column)
}

/// Broadcast two concrete shapes: trailing alignment, missing dims are 1,
/// each pair must be equal or contain a 1, the result takes the max.
pub fn broadcast_shapes(a: &[i64], b: &[i64]) -> Option<Vec<i64>> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = (k + a.len()).checked_sub(n).map_or(1, |i| a[i]);
            let y = (k + b.len()).checked_sub(n).map_or(1, |i| b[i]);
            (x == y || x == 1 || y == 1).then_some(x.max(y))
        })
        .collect()
}

impl Env {
    pub fn int(&self, e: &IntExpr) -> Option<i64> {
        match e {
            IntExpr::Lit(n) => Some(*n),
            IntExpr::Var(v) => match self.vars.get(v)? {
                Value::Int(n) => Some(*n),
                _ => None,
            },
            IntExpr::Hole(loc) => match self.vars.get(&hole_key(loc))? {
                Value::Int(n) => Some(*n),
                _ => None,
            },
            IntExpr::Rank(s) => Some(self.shape(s)?.len() as i64),
            IntExpr::Dim(s, i) => {
                let s = self.shape(s)?;
                Some(s[dim_offset(s.len(), *i)?])
            }
            IntExpr::Arith(op, a, b) => fold_arith(*op, self.int(a)?, self.int(b)?),
        }
    }

    pub fn shape(&self, e: &ShapeExpr) -> Option<Vec<i64>> {
        match e {
            ShapeExpr::Var(v) => match self.vars.get(v)? {
                Value::Shape(s) => Some(s.clone()),
                _ => None,
            },
            ShapeExpr::Lit(dims) => dims.iter().map(|d| self.int(d)).collect(),
            ShapeExpr::Broadcast(a, b) => broadcast_shapes(&self.shape(a)?, &self.shape(b)?),
        }
    }

    pub fn bool(&self, e: &BoolExpr) -> Option<bool> {
        match e {
            BoolExpr::True => Some(true),
            BoolExpr::False => Some(false),
            BoolExpr::Var(v) => match self.vars.get(v)? {
                Value::Bool(b) => Some(*b),
                _ => None,
            },
            BoolExpr::Not(b) => Some(!self.bool(b)?),
            BoolExpr::And(items) => items.iter().try_fold(true, |acc, b| Some(self.bool(b)? && acc)),
            BoolExpr::Or(items) => items.iter().try_fold(false, |acc, b| Some(self.bool(b)? || acc)),
            BoolExpr::IntEq(a, b) => Some(self.int(a)? == self.int(b)?),
            BoolExpr::ShapeEq(a, b) => Some(self.shape(a)? == self.shape(b)?),
            BoolExpr::BoolEq(a, b) => Some(self.bool(a)? == self.bool(b)?),
            BoolExpr::IntRel(op, a, b) => {
                let (a, b) = (self.int(a)?, self.int(b)?);
                Some(match op {
                    RelOp::Gt => a > b,
                    RelOp::Ge => a >= b,
                    RelOp::Lt => a < b,
                    RelOp::Le => a <= b,
                })
            }
        }
    }

    pub fn any(&self, e: &AnyExpr) -> Option<Value> {
        Some(match e {
            AnyExpr::Int(i) => Value::Int(self.int(i)?),
            AnyExpr::Bool(b) => Value::Bool(self.bool(b)?),
            AnyExpr::Shape(s) => Value::Shape(self.shape(s)?),
            AnyExpr::Compound(items) => Value::Tuple(items.iter().map(|i| self.any(i)).collect::<Option<_>>()?),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn broadcast_rules() {
        assert_eq!(broadcast_shapes(&[3, 1], &[4]), Some(vec![3, 4]));
        assert_eq!(broadcast_shapes(&[], &[2, 2]), Some(vec![2, 2]));
        assert_eq!(broadcast_shapes(&[3], &[4]), None);
    }

    #[test]
    fn partial_dims() {
        let env = Env { vars: BTreeMap::from([("s".to_string(), Value::Shape(vec![5, 6]))]) };
        assert_eq!(env.int(&IntExpr::dim(ShapeExpr::var("s"), -2)), Some(5));
        assert_eq!(env.int(&IntExpr::dim(ShapeExpr::var("s"), 2)), None);
    }
}
