use std::collections::BTreeMap;

use super::*;

type Map = BTreeMap<String, AnyExpr>;

fn kind_name(e: &AnyExpr) -> &'static str {
    match e {
        AnyExpr::Int(_) => "integer",
        AnyExpr::Bool(_) => "boolean",
        AnyExpr::Shape(_) => "shape",
        AnyExpr::Compound(_) => "compound",
    }
}

fn mismatch(name: &str, expected: Sort, found: &AnyExpr) -> SubstError {
    SubstError::SortMismatch { name: name.to_string(), expected, found: kind_name(found) }
}

/// Simultaneous, capture-free substitution of variables by expressions.
pub fn substitute(e: &AnyExpr, map: &Map) -> Result<AnyExpr, SubstError> {
    Ok(match e {
        AnyExpr::Int(i) => AnyExpr::Int(substitute_int(i, map)?),
        AnyExpr::Bool(b) => AnyExpr::Bool(substitute_bool(b, map)?),
        AnyExpr::Shape(s) => AnyExpr::Shape(substitute_shape(s, map)?),
        AnyExpr::Compound(items) => {
            AnyExpr::Compound(items.iter().map(|i| substitute(i, map)).collect::<Result<_, _>>()?)
        }
    })
}

pub fn substitute_int(e: &IntExpr, map: &Map) -> Result<IntExpr, SubstError> {
    Ok(match e {
        IntExpr::Lit(_) | IntExpr::Hole(_) => e.clone(),
        IntExpr::Var(v) => match map.get(v) {
            None => e.clone(),
            Some(AnyExpr::Int(r)) => r.clone(),
            Some(other) => return Err(mismatch(v, Sort::Int, other)),
        },
        IntExpr::Rank(s) => IntExpr::Rank(Box::new(substitute_shape(s, map)?)),
        IntExpr::Dim(s, i) => IntExpr::Dim(Box::new(substitute_shape(s, map)?), *i),
        IntExpr::Arith(op, a, b) => IntExpr::arith(*op, substitute_int(a, map)?, substitute_int(b, map)?),
    })
}

pub fn substitute_shape(e: &ShapeExpr, map: &Map) -> Result<ShapeExpr, SubstError> {
    Ok(match e {
        ShapeExpr::Var(v) => match map.get(v) {
            None => e.clone(),
            Some(AnyExpr::Shape(r)) => r.clone(),
            Some(other) => return Err(mismatch(v, Sort::Shape, other)),
        },
        ShapeExpr::Lit(dims) => ShapeExpr::Lit(dims.iter().map(|d| substitute_int(d, map)).collect::<Result<_, _>>()?),
        ShapeExpr::Broadcast(a, b) => ShapeExpr::broadcast(substitute_shape(a, map)?, substitute_shape(b, map)?),
    })
}

pub fn substitute_bool(e: &BoolExpr, map: &Map) -> Result<BoolExpr, SubstError> {
    let list = |items: &[BoolExpr]| items.iter().map(|b| substitute_bool(b, map)).collect::<Result<Vec<_>, _>>();
    Ok(match e {
        BoolExpr::True | BoolExpr::False => e.clone(),
        BoolExpr::Var(v) => match map.get(v) {
            None => e.clone(),
            Some(AnyExpr::Bool(r)) => r.clone(),
            Some(other) => return Err(mismatch(v, Sort::Bool, other)),
        },
        BoolExpr::Not(b) => BoolExpr::not(substitute_bool(b, map)?),
        BoolExpr::And(items) => BoolExpr::And(list(items)?),
        BoolExpr::Or(items) => BoolExpr::Or(list(items)?),
        BoolExpr::IntEq(a, b) => BoolExpr::IntEq(substitute_int(a, map)?, substitute_int(b, map)?),
        BoolExpr::IntRel(op, a, b) => BoolExpr::IntRel(*op, substitute_int(a, map)?, substitute_int(b, map)?),
        BoolExpr::ShapeEq(a, b) => BoolExpr::ShapeEq(substitute_shape(a, map)?, substitute_shape(b, map)?),
        BoolExpr::BoolEq(a, b) => {
            BoolExpr::BoolEq(Box::new(substitute_bool(a, map)?), Box::new(substitute_bool(b, map)?))
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn substitutes_shape_into_dim() {
        let e = AnyExpr::Bool(BoolExpr::IntEq(IntExpr::dim(ShapeExpr::var("s"), 0), IntExpr::Lit(10)));
        let map = Map::from([("s".to_string(), AnyExpr::Shape(ShapeExpr::lit([20, 10])))]);
        assert_eq!(substitute(&e, &map).unwrap().to_string(), "[20, 10][0] = 10");
    }

    #[test]
    fn simultaneous_not_sequential() {
        let e = AnyExpr::Int(IntExpr::arith(ArithOp::Add, IntExpr::var("a"), IntExpr::var("b")));
        let map = Map::from([
            ("a".to_string(), AnyExpr::Int(IntExpr::var("b"))),
            ("b".to_string(), AnyExpr::Int(IntExpr::var("a"))),
        ]);
        assert_eq!(substitute(&e, &map).unwrap().to_string(), "b + a");
    }

    #[test]
    fn distributes_over_compounds() {
        let e = AnyExpr::Compound(vec![AnyExpr::Int(IntExpr::var("n")), AnyExpr::Shape(ShapeExpr::var("s"))]);
        let map = Map::from([
            ("n".to_string(), AnyExpr::Int(IntExpr::Lit(3))),
            ("s".to_string(), AnyExpr::Shape(ShapeExpr::lit([1]))),
        ]);
        assert_eq!(substitute(&e, &map).unwrap().to_string(), "(3, [1])");
    }

    #[test]
    fn sort_mismatch_is_an_error() {
        let e = AnyExpr::Int(IntExpr::var("n"));
        let map = Map::from([("n".to_string(), AnyExpr::Shape(ShapeExpr::lit([1])))]);
        assert!(matches!(substitute(&e, &map), Err(SubstError::SortMismatch { expected: Sort::Int, .. })));
    }
}
