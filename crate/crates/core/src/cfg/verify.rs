use std::collections::BTreeSet;

use super::*;

/// Check SSA single definition, operand typing and edge arity/typing.
pub fn verify(cfg: &FunctionCfg) -> Result<(), CfgError> {
    let err = |msg: String| CfgError::Invalid { function: cfg.name.clone(), msg };
    if !cfg.blocks.contains_key(&cfg.entry) {
        return Err(err(format!("entry block {} missing", cfg.entry)));
    }
    let mut defined = BTreeSet::new();
    let define = |v: ValueId, defined: &mut BTreeSet<ValueId>| -> Result<(), CfgError> {
        if v.0 as usize >= cfg.values.len() {
            return Err(err(format!("value {} has no info", v.0)));
        }
        if !defined.insert(v) {
            return Err(err(format!("%{} defined more than once", cfg.value(v).name)));
        }
        Ok(())
    };
    for v in cfg.fresh.keys() {
        define(*v, &mut defined)?;
    }
    for b in cfg.blocks.values() {
        for p in &b.params {
            define(*p, &mut defined)?;
        }
        for i in &b.instrs {
            if let Some(d) = i.dest {
                define(d, &mut defined)?;
            }
        }
    }

    let ty = |v: ValueId| cfg.ty(v);
    for b in cfg.blocks.values() {
        for i in &b.instrs {
            for o in i.op.operands() {
                if !defined.contains(&o) {
                    return Err(err(format!("{}: use of undefined value {}", b.id, o.0)));
                }
            }
            let bad = |what: &str| Err(err(format!("{}: ill-typed {what} at {}", b.id, i.loc)));
            let result = match &i.op {
                Op::ConstInt(_) | Op::Hole => Some(Type::Int),
                Op::ConstBool(_) => Some(Type::Bool),
                Op::Arith(_, a, c) => {
                    if *ty(*a) != Type::Int || *ty(*c) != Type::Int {
                        return bad("arithmetic");
                    }
                    Some(Type::Int)
                }
                Op::Compare(op, a, c) => {
                    let ok = ty(*a) == ty(*c)
                        && match op {
                            CmpOp::Eq | CmpOp::Ne => matches!(ty(*a), Type::Int | Type::Bool | Type::Shape),
                            _ => *ty(*a) == Type::Int,
                        };
                    if !ok {
                        return bad("comparison");
                    }
                    Some(Type::Bool)
                }
                Op::Logic(_, a, c) => {
                    if *ty(*a) != Type::Bool || *ty(*c) != Type::Bool {
                        return bad("logic op");
                    }
                    Some(Type::Bool)
                }
                Op::Not(a) | Op::Assert(a) => {
                    if *ty(*a) != Type::Bool {
                        return bad("boolean op");
                    }
                    if matches!(i.op, Op::Assert(_)) {
                        None
                    } else {
                        Some(Type::Bool)
                    }
                }
                Op::TupleMake(items) => Some(Type::Tuple(items.iter().map(|v| ty(*v).clone()).collect())),
                Op::TupleGet(t, idx) => match ty(*t) {
                    Type::Tuple(items) if *idx < items.len() => Some(items[*idx].clone()),
                    _ => return bad("tuple projection"),
                },
                Op::ShapeLit(dims) => {
                    if dims.iter().any(|d| *ty(*d) != Type::Int) {
                        return bad("shape literal");
                    }
                    Some(Type::Shape)
                }
                Op::ShapeIndex(s, idx) => {
                    if *ty(*s) != Type::Shape || *ty(*idx) != Type::Int {
                        return bad("shape index");
                    }
                    Some(Type::Int)
                }
                Op::Rank(s) => {
                    if !matches!(ty(*s), Type::Shape | Type::Tensor) {
                        return bad("rank");
                    }
                    Some(Type::Int)
                }
                Op::Broadcast(a, c) => {
                    if *ty(*a) != Type::Shape || *ty(*c) != Type::Shape {
                        return bad("broadcast");
                    }
                    Some(Type::Shape)
                }
                Op::Call(..) => i.dest.map(|d| ty(d).clone()),
            };
            if i.dest.map(|d| ty(d).clone()) != result.filter(|t| *t != Type::Unit) {
                return bad("result");
            }
        }
        for o in b.terminator.operands() {
            if !defined.contains(&o) {
                return Err(err(format!("{}: terminator uses undefined value {}", b.id, o.0)));
            }
        }
        if let Terminator::CondJump { cond, .. } = &b.terminator {
            if *ty(*cond) != Type::Bool {
                return Err(err(format!("{}: non-boolean branch condition", b.id)));
            }
        }
        if let Terminator::Return(r) = &b.terminator {
            let rt = r.map(|v| ty(v).clone()).unwrap_or(Type::Unit);
            if rt != cfg.result_type {
                return Err(err(format!("{}: returns {rt}, expected {}", b.id, cfg.result_type)));
            }
        }
        for e in b.terminator.edges() {
            let Some(target) = cfg.blocks.get(&e.target) else {
                return Err(err(format!("{}: jump to missing block {}", b.id, e.target)));
            };
            if target.params.len() != e.args.len() {
                return Err(err(format!(
                    "{}: jump to {} passes {} args, expected {}",
                    b.id,
                    e.target,
                    e.args.len(),
                    target.params.len()
                )));
            }
            for (a, p) in e.args.iter().zip(&target.params) {
                if ty(*a) != ty(*p) {
                    return Err(err(format!("{}: argument type mismatch on jump to {}", b.id, e.target)));
                }
            }
        }
    }
    Ok(())
}
