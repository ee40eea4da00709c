use std::fmt::Write;

use super::*;

fn v(cfg: &FunctionCfg, id: ValueId) -> String {
    format!("%{}", cfg.value(id).name)
}

fn list(cfg: &FunctionCfg, ids: &[ValueId]) -> String {
    ids.iter().map(|i| v(cfg, *i)).collect::<Vec<_>>().join(", ")
}

fn edge(cfg: &FunctionCfg, e: &Edge) -> String {
    if e.args.is_empty() {
        e.target.to_string()
    } else {
        format!("{}({})", e.target, list(cfg, &e.args))
    }
}

/// Render a CFG in a SIL-like textual form.
pub fn dump_cfg(cfg: &FunctionCfg) -> String {
    let mut out = String::new();
    writeln!(out, "func {} {{", cfg.name).unwrap();
    for (id, kind) in &cfg.fresh {
        let kind = match kind {
            FreshKind::LoopGuard => "loop guard",
            FreshKind::LoopCarried => "loop carried",
        };
        writeln!(out, "  // fresh {} : {} ({kind})", v(cfg, *id), cfg.ty(*id)).unwrap();
    }
    for b in cfg.blocks.values() {
        let params: Vec<String> = b.params.iter().map(|p| format!("{} : {}", v(cfg, *p), cfg.ty(*p))).collect();
        if params.is_empty() {
            writeln!(out, "{}:", b.id).unwrap();
        } else {
            writeln!(out, "{}({}):", b.id, params.join(", ")).unwrap();
        }
        for i in &b.instrs {
            out.push_str("  ");
            if let Some(d) = i.dest {
                write!(out, "{} = ", v(cfg, d)).unwrap();
            }
            let text = match &i.op {
                Op::ConstInt(n) => format!("integer_literal {n}"),
                Op::ConstBool(b) => format!("bool_literal {b}"),
                Op::Hole => format!("hole @{}:{}", i.loc.line, i.loc.column),
                Op::Arith(op, a, b) => format!("{} {}, {}", arith_name(*op), v(cfg, *a), v(cfg, *b)),
                Op::Compare(op, a, b) => format!("{} {}, {}", cmp_name(*op), v(cfg, *a), v(cfg, *b)),
                Op::Logic(op, a, b) => {
                    let n = if *op == LogicOp::And { "and" } else { "or" };
                    format!("{n} {}, {}", v(cfg, *a), v(cfg, *b))
                }
                Op::Not(a) => format!("not {}", v(cfg, *a)),
                Op::TupleMake(items) => format!("tuple ({})", list(cfg, items)),
                Op::TupleGet(t, i) => format!("tuple_extract {}, {i}", v(cfg, *t)),
                Op::ShapeLit(d) => format!("shape [{}]", list(cfg, d)),
                Op::ShapeIndex(s, i) => format!("shape_index {}, {}", v(cfg, *s), v(cfg, *i)),
                Op::Rank(s) => format!("rank {}", v(cfg, *s)),
                Op::Broadcast(a, b) => format!("broadcast {}, {}", v(cfg, *a), v(cfg, *b)),
                Op::Call(c, args) => {
                    let name = match c {
                        Callee::Function(n) => n.clone(),
                        Callee::Intrinsic(i) => format!("{i:?}").to_lowercase(),
                    };
                    format!("apply {name}({})", list(cfg, args))
                }
                Op::Assert(c) => format!("assert {}  // line {}", v(cfg, *c), i.loc.line),
            };
            writeln!(out, "{text}").unwrap();
        }
        let term = match &b.terminator {
            Terminator::Jump(e) => format!("br {}", edge(cfg, e)),
            Terminator::CondJump { cond, then_edge, else_edge } => {
                format!("cond_br {}, {}, {}", v(cfg, *cond), edge(cfg, then_edge), edge(cfg, else_edge))
            }
            Terminator::Return(None) => "return".to_string(),
            Terminator::Return(Some(r)) => format!("return {}", v(cfg, *r)),
        };
        writeln!(out, "  {term}").unwrap();
    }
    out.push_str("}\n");
    out
}

fn arith_name(op: ArithOp) -> &'static str {
    match op {
        ArithOp::Add => "add",
        ArithOp::Sub => "sub",
        ArithOp::Mul => "mul",
        ArithOp::Div => "div",
    }
}

fn cmp_name(op: CmpOp) -> &'static str {
    match op {
        CmpOp::Eq => "eq",
        CmpOp::Ne => "ne",
        CmpOp::Lt => "lt",
        CmpOp::Le => "le",
        CmpOp::Gt => "gt",
        CmpOp::Ge => "ge",
    }
}
