use std::collections::BTreeMap;

use super::*;

/// Eliminated variables and the expressions they were replaced by.
pub type Bindings = BTreeMap<String, AnyExpr>;

fn occurs(v: &str, e: &AnyExpr) -> bool {
    FreeVars::of_any(e).vars.contains_key(v)
}

/// A `v = e` candidate in an unconditional constraint, with its priority
/// (shapes first, then integers, then booleans).
fn candidate(body: &BoolExpr) -> Option<(u8, String, AnyExpr)> {
    let (rank, l, r) = match body {
        BoolExpr::ShapeEq(a, b) => (0, AnyExpr::Shape(a.clone()), AnyExpr::Shape(b.clone())),
        BoolExpr::IntEq(a, b) => (1, AnyExpr::Int(a.clone()), AnyExpr::Int(b.clone())),
        BoolExpr::BoolEq(a, b) => (2, AnyExpr::Bool((**a).clone()), AnyExpr::Bool((**b).clone())),
        _ => return None,
    };
    let name = |e: &AnyExpr| match e {
        AnyExpr::Shape(ShapeExpr::Var(v)) | AnyExpr::Int(IntExpr::Var(v)) | AnyExpr::Bool(BoolExpr::Var(v)) => {
            Some(v.clone())
        }
        _ => None,
    };
    let mut options = Vec::new();
    if let Some(v) = name(&l) {
        options.push((v, r.clone()));
    }
    if let Some(v) = name(&r) {
        options.push((v, l));
    }
    options.sort_by(|a, b| b.0.cmp(&a.0));
    options.into_iter().find(|(v, e)| !occurs(v, e)).map(|(v, e)| (rank, v, e))
}

/// Whether the translation of `e` carries side conditions (index bounds,
/// broadcast legality, nonzero divisors) that must survive elimination.
fn partial(e: &AnyExpr) -> bool {
    fn int(e: &IntExpr) -> bool {
        match e {
            IntExpr::Lit(_) | IntExpr::Var(_) | IntExpr::Hole(_) => false,
            IntExpr::Rank(s) => shape(s),
            IntExpr::Dim(..) => true,
            IntExpr::Arith(ArithOp::Div, a, b) => !matches!(**b, IntExpr::Lit(n) if n != 0) || int(a),
            IntExpr::Arith(_, a, b) => int(a) || int(b),
        }
    }
    fn shape(e: &ShapeExpr) -> bool {
        match e {
            ShapeExpr::Var(_) => false,
            ShapeExpr::Lit(dims) => dims.iter().any(int),
            ShapeExpr::Broadcast(..) => true,
        }
    }
    fn boolean(e: &BoolExpr) -> bool {
        match e {
            BoolExpr::True | BoolExpr::False | BoolExpr::Var(_) => false,
            BoolExpr::Not(b) => boolean(b),
            BoolExpr::And(items) | BoolExpr::Or(items) => items.iter().any(boolean),
            BoolExpr::IntEq(a, b) | BoolExpr::IntRel(_, a, b) => int(a) || int(b),
            BoolExpr::ShapeEq(a, b) => shape(a) || shape(b),
            BoolExpr::BoolEq(a, b) => boolean(a) || boolean(b),
        }
    }
    match e {
        AnyExpr::Int(i) => int(i),
        AnyExpr::Bool(b) => boolean(b),
        AnyExpr::Shape(s) => shape(s),
        AnyExpr::Compound(items) => items.iter().any(partial),
    }
}

fn apply(c: &GuardedConstraint, map: &Bindings) -> GuardedConstraint {
    let sub = |b: &BoolExpr| simplify_bool(&substitute_bool(b, map).expect("candidate sorts agree"));
    GuardedConstraint { guard: sub(&c.guard), body: sub(&c.body), origin: c.origin.clone() }
}

/// Repeatedly eliminate `v = e` equations among constraints whose guard is
/// `True`, substituting `e` for `v` everywhere else. When `e` is partial the
/// equation itself is kept, so that `v = e` still demands `e` be defined.
pub fn eliminate_equalities(constraints: Vec<GuardedConstraint>) -> (Vec<GuardedConstraint>, Bindings) {
    let (cs, bindings) = eliminate_tagged(constraints.into_iter().map(|c| ((), c)).collect());
    (cs.into_iter().map(|(_, c)| c).collect(), bindings)
}

/// [`eliminate_equalities`] over constraints carrying a tag, which is kept
/// on every constraint that survives. Conjunctions are split first, each
/// part keeping the tag of the whole.
pub fn eliminate_tagged<T: Clone>(constraints: Vec<(T, GuardedConstraint)>) -> (Vec<(T, GuardedConstraint)>, Bindings) {
    let keep = |c: &GuardedConstraint| c.body != BoolExpr::True && c.guard != BoolExpr::False;
    let mut cs: Vec<(T, GuardedConstraint)> = Vec::new();
    for (t, c) in constraints {
        let c = apply(&c, &Bindings::new());
        for body in c.body.conjuncts() {
            let part = GuardedConstraint { guard: c.guard.clone(), body: body.clone(), origin: c.origin.clone() };
            if keep(&part) {
                cs.push((t.clone(), part));
            }
        }
    }
    let mut bindings = Bindings::new();
    let mut residual: Vec<(T, GuardedConstraint)> = Vec::new();
    let mut kept_defs: Vec<AnyExpr> = Vec::new();
    loop {
        let best = cs
            .iter()
            .enumerate()
            .filter(|(_, (_, c))| c.guard == BoolExpr::True)
            .filter_map(|(i, (_, c))| candidate(&c.body).map(|(rank, v, e)| (rank, i, v, e)))
            .min_by_key(|(rank, i, _, _)| (*rank, *i));
        let Some((_, idx, v, e)) = best else { break };
        let def = cs.remove(idx);
        let step = Bindings::from([(v.clone(), e.clone())]);
        for value in bindings.values_mut() {
            *value = simplify_any(&substitute(value, &step).expect("candidate sorts agree"));
        }
        let kept = partial(&e) && !kept_defs.contains(&e);
        if kept {
            kept_defs.push(e.clone());
        }
        bindings.insert(v, e);
        cs = cs.into_iter().map(|(t, c)| (t, apply(&c, &step))).filter(|(_, c)| keep(c)).collect();
        residual = residual.into_iter().map(|(t, c)| (t, apply(&c, &step))).filter(|(_, c)| keep(c)).collect();
        if kept {
            residual.push(def);
        }
    }
    cs.extend(residual);
    (cs, bindings)
}
