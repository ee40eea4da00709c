use std::fmt::Write;

use super::ast::*;

/// Render a program back to source text. Binary operators are fully
/// parenthesized so the output reparses to the same tree.
pub fn pretty_program(p: &Program) -> String {
    let mut out = String::new();
    for f in p.functions.iter().filter(|f| !f.implicit_main) {
        let params: Vec<String> = f.params.iter().map(|p| format!("{}: {}", p.name, p.ty)).collect();
        write!(out, "func {}({})", f.name, params.join(", ")).unwrap();
        if f.ret != Type::Unit {
            write!(out, " -> {}", f.ret).unwrap();
        }
        out.push_str(" {\n");
        block(&mut out, &f.body, 1);
        out.push_str("}\n\n");
    }
    for f in p.functions.iter().filter(|f| f.implicit_main) {
        block(&mut out, &f.body, 0);
    }
    out
}

fn block(out: &mut String, body: &[Stmt], depth: usize) {
    for s in body {
        stmt(out, s, depth);
    }
}

fn stmt(out: &mut String, s: &Stmt, depth: usize) {
    let pad = "    ".repeat(depth);
    out.push_str(&pad);
    match &s.kind {
        StmtKind::Let { name, mutable, ty, value } => {
            out.push_str(if *mutable { "var " } else { "let " });
            out.push_str(name);
            if let Some(t) = ty {
                write!(out, ": {t}").unwrap();
            }
            write!(out, " = {}", pretty_expr(value)).unwrap();
        }
        StmtKind::Assign { name, value } => write!(out, "{name} = {}", pretty_expr(value)).unwrap(),
        StmtKind::Assert(e) => write!(out, "assert({})", pretty_expr(e)).unwrap(),
        StmtKind::Expr(e) => out.push_str(&pretty_expr(e)),
        StmtKind::Return(None) => out.push_str("return"),
        StmtKind::Return(Some(e)) => write!(out, "return {}", pretty_expr(e)).unwrap(),
        StmtKind::If { cond, then_body, else_body } => {
            writeln!(out, "if {} {{", pretty_expr(cond)).unwrap();
            block(out, then_body, depth + 1);
            out.push_str(&pad);
            out.push('}');
            if let Some(e) = else_body {
                out.push_str(" else {\n");
                block(out, e, depth + 1);
                out.push_str(&pad);
                out.push('}');
            }
        }
        StmtKind::For { var, lo, hi, body } => {
            writeln!(out, "for {var} in {}..<{} {{", pretty_expr(lo), pretty_expr(hi)).unwrap();
            block(out, body, depth + 1);
            out.push_str(&pad);
            out.push('}');
        }
    }
    out.push('\n');
}

fn list(items: &[Expr]) -> String {
    items.iter().map(pretty_expr).collect::<Vec<_>>().join(", ")
}

pub fn pretty_expr(e: &Expr) -> String {
    match &e.kind {
        ExprKind::Int(n) => n.to_string(),
        ExprKind::Bool(b) => b.to_string(),
        ExprKind::Var(v) => v.clone(),
        ExprKind::Hole => "____".to_string(),
        ExprKind::Arith(op, a, b) => format!("({} {} {})", pretty_expr(a), op.symbol(), pretty_expr(b)),
        ExprKind::Compare(op, a, b) => format!("({} {} {})", pretty_expr(a), op.symbol(), pretty_expr(b)),
        ExprKind::Logic(op, a, b) => format!("({} {} {})", pretty_expr(a), op.symbol(), pretty_expr(b)),
        ExprKind::Not(a) => format!("(!{})", pretty_expr(a)),
        ExprKind::Neg(a) => format!("(-{})", pretty_expr(a)),
        ExprKind::Call(name, args) => format!("{name}({})", list(args)),
        ExprKind::Tuple(items) => format!("({})", list(items)),
        ExprKind::Proj(base, i) => format!("{}.{i}", pretty_expr(base)),
        ExprKind::ShapeLit(dims) => format!("[{}]", list(dims)),
        ExprKind::Index(base, idx) => format!("{}[{}]", pretty_expr(base), pretty_expr(idx)),
        ExprKind::Rank(a) => format!("{}.rank", pretty_expr(a)),
        ExprKind::Broadcast(a, b) => format!("broadcast({}, {})", pretty_expr(a), pretty_expr(b)),
        ExprKind::ShapeAssert { operand, shape } => format!("({} |-> {})", pretty_expr(operand), pretty_expr(shape)),
    }
}
