use std::fmt;

use super::*;

fn arith_prec(op: ArithOp) -> u8 {
    match op {
        ArithOp::Add | ArithOp::Sub => 1,
        ArithOp::Mul | ArithOp::Div => 2,
    }
}

fn write_int(f: &mut fmt::Formatter<'_>, e: &IntExpr, min_prec: u8) -> fmt::Result {
    match e {
        IntExpr::Lit(n) => write!(f, "{n}"),
        IntExpr::Var(v) => f.write_str(v),
        IntExpr::Hole(loc) => write!(f, "____@{}:{}", loc.line, loc.column),
        IntExpr::Rank(s) => write!(f, "rank({s})"),
        IntExpr::Dim(s, i) => write!(f, "{s}[{i}]"),
        IntExpr::Arith(op, a, b) => {
            let p = arith_prec(*op);
            let sym = match op {
                ArithOp::Add => "+",
                ArithOp::Sub => "-",
                ArithOp::Mul => "*",
                ArithOp::Div => "/",
            };
            if p < min_prec {
                f.write_str("(")?;
            }
            write_int(f, a, p)?;
            write!(f, " {sym} ")?;
            write_int(f, b, p + 1)?;
            if p < min_prec {
                f.write_str(")")?;
            }
            Ok(())
        }
    }
}

impl fmt::Display for IntExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_int(f, self, 0)
    }
}

impl fmt::Display for ShapeExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ShapeExpr::Var(v) => f.write_str(v),
            ShapeExpr::Lit(dims) => {
                f.write_str("[")?;
                for (i, d) in dims.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{d}")?;
                }
                f.write_str("]")
            }
            ShapeExpr::Broadcast(a, b) => write!(f, "broadcast({a}, {b})"),
        }
    }
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
        }
    }
}

fn is_atomic(b: &BoolExpr) -> bool {
    matches!(b, BoolExpr::True | BoolExpr::False | BoolExpr::Var(_) | BoolExpr::Not(_))
}

fn write_bool_operand(f: &mut fmt::Formatter<'_>, b: &BoolExpr) -> fmt::Result {
    if is_atomic(b) {
        write!(f, "{b}")
    } else {
        write!(f, "({b})")
    }
}

impl fmt::Display for BoolExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BoolExpr::True => f.write_str("true"),
            BoolExpr::False => f.write_str("false"),
            BoolExpr::Var(v) => f.write_str(v),
            BoolExpr::Not(b) => {
                f.write_str("!")?;
                write_bool_operand(f, b)
            }
            BoolExpr::And(items) | BoolExpr::Or(items) => {
                let sep = if matches!(self, BoolExpr::And(_)) { " && " } else { " || " };
                for (i, b) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(sep)?;
                    }
                    write_bool_operand(f, b)?;
                }
                Ok(())
            }
            BoolExpr::IntEq(a, b) => write!(f, "{a} = {b}"),
            BoolExpr::ShapeEq(a, b) => write!(f, "{a} = {b}"),
            BoolExpr::BoolEq(a, b) => {
                write_bool_operand(f, a)?;
                f.write_str(" = ")?;
                write_bool_operand(f, b)
            }
            BoolExpr::IntRel(op, a, b) => write!(f, "{a} {} {b}", op.symbol()),
        }
    }
}

impl fmt::Display for AnyExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AnyExpr::Int(e) => write!(f, "{e}"),
            AnyExpr::Bool(e) => write!(f, "{e}"),
            AnyExpr::Shape(e) => write!(f, "{e}"),
            AnyExpr::Compound(items) => {
                f.write_str("(")?;
                for (i, e) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{e}")?;
                }
                if items.len() == 1 {
                    f.write_str(",")?;
                }
                f.write_str(")")
            }
        }
    }
}

impl fmt::Display for OriginKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            OriginKind::UserAssert => "assert",
            OriginKind::BlockArgument => "block argument",
            OriginKind::Result => "result",
            OriginKind::Intrinsic => "intrinsic",
            OriginKind::CallGlue => "call",
            OriginKind::PathCondition => "path condition",
        })
    }
}

impl fmt::Display for GuardedConstraint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.guard == BoolExpr::True {
            write!(f, "{}", self.body)
        } else {
            write!(f, "[{}] => {}", self.guard, self.body)
        }
    }
}
