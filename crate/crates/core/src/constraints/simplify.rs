use super::*;

/// Floor division; `None` on a zero divisor or overflow.
pub fn floor_div(a: i64, b: i64) -> Option<i64> {
    if b == 0 {
        return None;
    }
    if b > 0 {
        Some(a.div_euclid(b))
    } else {
        a.checked_neg()?.checked_div_euclid(b.checked_neg()?)
    }
}

pub fn fold_arith(op: ArithOp, a: i64, b: i64) -> Option<i64> {
    match op {
        ArithOp::Add => a.checked_add(b),
        ArithOp::Sub => a.checked_sub(b),
        ArithOp::Mul => a.checked_mul(b),
        ArithOp::Div => floor_div(a, b),
    }
}

/// Resolve position `index` of a rank-`len` shape to a zero-based offset.
pub fn dim_offset(len: usize, index: i64) -> Option<usize> {
    let len = len as i64;
    if (0..len).contains(&index) {
        Some(index as usize)
    } else if index < 0 && -index <= len {
        Some((len + index) as usize)
    } else {
        None
    }
}

pub fn simplify_int(e: &IntExpr) -> IntExpr {
    match e {
        IntExpr::Lit(_) | IntExpr::Var(_) | IntExpr::Hole(_) => e.clone(),
        IntExpr::Rank(s) => match simplify_shape(s) {
            ShapeExpr::Lit(dims) => IntExpr::Lit(dims.len() as i64),
            s => IntExpr::rank(s),
        },
        IntExpr::Dim(s, i) => match simplify_shape(s) {
            ShapeExpr::Lit(dims) => match dim_offset(dims.len(), *i) {
                Some(k) => dims[k].clone(),
                None => IntExpr::dim(ShapeExpr::Lit(dims), *i),
            },
            s => IntExpr::dim(s, *i),
        },
        IntExpr::Arith(op, a, b) => {
            let (a, b) = (simplify_int(a), simplify_int(b));
            match (op, &a, &b) {
                (_, IntExpr::Lit(x), IntExpr::Lit(y)) => match fold_arith(*op, *x, *y) {
                    Some(n) => IntExpr::Lit(n),
                    None => IntExpr::arith(*op, a, b),
                },
                (ArithOp::Add, IntExpr::Lit(0), _) => b,
                (ArithOp::Add | ArithOp::Sub, _, IntExpr::Lit(0)) => a,
                (ArithOp::Mul, IntExpr::Lit(1), _) => b,
                (ArithOp::Mul | ArithOp::Div, _, IntExpr::Lit(1)) => a,
                _ => IntExpr::arith(*op, a, b),
            }
        }
    }
}

/// Broadcast two literal shapes when every aligned pair is decidable
/// without knowing the sign of a symbolic dimension.
fn fold_broadcast(a: &[IntExpr], b: &[IntExpr]) -> Option<Vec<IntExpr>> {
    let n = a.len().max(b.len());
    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let x = (k + a.len()).checked_sub(n).map(|i| &a[i]);
        let y = (k + b.len()).checked_sub(n).map(|i| &b[i]);
        let d = match (x, y) {
            (Some(x), Some(y)) if x == y => x.clone(),
            (Some(IntExpr::Lit(x)), Some(IntExpr::Lit(y))) => {
                if *x == 1 || *y == 1 {
                    IntExpr::Lit((*x).max(*y))
                } else {
                    return None;
                }
            }
            (Some(IntExpr::Lit(d)), None) | (None, Some(IntExpr::Lit(d))) => IntExpr::Lit((*d).max(1)),
            _ => return None,
        };
        out.push(d);
    }
    Some(out)
}

pub fn simplify_shape(e: &ShapeExpr) -> ShapeExpr {
    match e {
        ShapeExpr::Var(_) => e.clone(),
        ShapeExpr::Lit(dims) => ShapeExpr::Lit(dims.iter().map(simplify_int).collect()),
        ShapeExpr::Broadcast(a, b) => {
            let (a, b) = (simplify_shape(a), simplify_shape(b));
            if let (ShapeExpr::Lit(x), ShapeExpr::Lit(y)) = (&a, &b) {
                if let Some(dims) = fold_broadcast(x, y) {
                    return ShapeExpr::Lit(dims);
                }
            }
            ShapeExpr::broadcast(a, b)
        }
    }
}

fn junction(is_and: bool, items: &[BoolExpr]) -> BoolExpr {
    let (unit, absorb) = if is_and { (BoolExpr::True, BoolExpr::False) } else { (BoolExpr::False, BoolExpr::True) };
    let mut out: Vec<BoolExpr> = Vec::new();
    for item in items {
        let item = simplify_bool(item);
        let flat = match item {
            BoolExpr::And(inner) if is_and => inner,
            BoolExpr::Or(inner) if !is_and => inner,
            other => vec![other],
        };
        for b in flat {
            if b == absorb {
                return absorb;
            }
            if b != unit && !out.contains(&b) {
                out.push(b);
            }
        }
    }
    if is_and {
        BoolExpr::and(out)
    } else {
        disjunction(out)
    }
}

fn conjuncts_of(b: &BoolExpr) -> Vec<BoolExpr> {
    match b {
        BoolExpr::And(items) => items.clone(),
        other => vec![other.clone()],
    }
}

fn complementary(a: &BoolExpr, b: &BoolExpr) -> bool {
    matches!(a, BoolExpr::Not(x) if **x == *b) || matches!(b, BoolExpr::Not(x) if **x == *a)
}

/// Normalize a flattened disjunction so that the guards of joined branches
/// collapse back to the guard before the split: complementary disjuncts
/// give `True`, `p ∧ x ∨ p ∧ ¬x` merges to `p`, `p ∨ p ∧ q` absorbs to `p`,
/// and conjuncts shared by every disjunct are factored out.
fn disjunction(items: Vec<BoolExpr>) -> BoolExpr {
    if items.is_empty() {
        return BoolExpr::False;
    }
    let mut sets: Vec<Vec<BoolExpr>> = items.iter().map(conjuncts_of).collect();
    'merge: loop {
        for i in 0..sets.len() {
            for j in 0..sets.len() {
                if i == j {
                    continue;
                }
                if sets[i].iter().all(|x| sets[j].contains(x)) {
                    sets.remove(j);
                    continue 'merge;
                }
                if sets[i].len() == sets[j].len() {
                    let only_i: Vec<&BoolExpr> = sets[i].iter().filter(|x| !sets[j].contains(x)).collect();
                    let only_j: Vec<&BoolExpr> = sets[j].iter().filter(|x| !sets[i].contains(x)).collect();
                    if let ([a], [b]) = (only_i.as_slice(), only_j.as_slice()) {
                        if complementary(a, b) {
                            let a = (*a).clone();
                            sets[i].retain(|x| *x != a);
                            sets.remove(j);
                            continue 'merge;
                        }
                    }
                }
            }
        }
        break;
    }
    if sets.iter().any(|s| s.is_empty()) {
        return BoolExpr::True;
    }
    if sets.len() == 1 {
        return BoolExpr::and(sets.pop().unwrap());
    }
    let common: Vec<BoolExpr> = sets[0].iter().filter(|x| sets[1..].iter().all(|s| s.contains(x))).cloned().collect();
    if common.is_empty() {
        return BoolExpr::or(sets.into_iter().map(BoolExpr::and).collect::<Vec<_>>());
    }
    let rests: Vec<BoolExpr> =
        sets.into_iter().map(|s| BoolExpr::and(s.into_iter().filter(|x| !common.contains(x)).collect::<Vec<_>>())).collect();
    let mut parts = common;
    parts.push(junction(false, &rests));
    junction(true, &parts)
}

pub fn simplify_bool(e: &BoolExpr) -> BoolExpr {
    match e {
        BoolExpr::True | BoolExpr::False | BoolExpr::Var(_) => e.clone(),
        BoolExpr::Not(b) => match simplify_bool(b) {
            BoolExpr::True => BoolExpr::False,
            BoolExpr::False => BoolExpr::True,
            BoolExpr::Not(inner) => *inner,
            b => BoolExpr::not(b),
        },
        BoolExpr::And(items) => junction(true, items),
        BoolExpr::Or(items) => junction(false, items),
        BoolExpr::IntEq(a, b) => {
            let (a, b) = (simplify_int(a), simplify_int(b));
            if a == b {
                BoolExpr::True
            } else {
                BoolExpr::IntEq(a, b)
            }
        }
        BoolExpr::IntRel(op, a, b) => {
            let (a, b) = (simplify_int(a), simplify_int(b));
            if a == b && matches!(op, RelOp::Ge | RelOp::Le) {
                BoolExpr::True
            } else {
                BoolExpr::IntRel(*op, a, b)
            }
        }
        BoolExpr::ShapeEq(a, b) => {
            let (a, b) = (simplify_shape(a), simplify_shape(b));
            if a == b {
                BoolExpr::True
            } else {
                BoolExpr::ShapeEq(a, b)
            }
        }
        BoolExpr::BoolEq(a, b) => {
            let (a, b) = (simplify_bool(a), simplify_bool(b));
            match (a, b) {
                (a, b) if a == b => BoolExpr::True,
                (BoolExpr::True, x) | (x, BoolExpr::True) => x,
                (BoolExpr::False, x) | (x, BoolExpr::False) => simplify_bool(&BoolExpr::not(x)),
                (a, b) => BoolExpr::BoolEq(Box::new(a), Box::new(b)),
            }
        }
    }
}

pub fn simplify_any(e: &AnyExpr) -> AnyExpr {
    match e {
        AnyExpr::Int(i) => AnyExpr::Int(simplify_int(i)),
        AnyExpr::Bool(b) => AnyExpr::Bool(simplify_bool(b)),
        AnyExpr::Shape(s) => AnyExpr::Shape(simplify_shape(s)),
        AnyExpr::Compound(items) => AnyExpr::Compound(items.iter().map(simplify_any).collect()),
    }
}
