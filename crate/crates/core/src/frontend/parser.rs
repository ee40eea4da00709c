use std::sync::Arc;

use super::ast::*;
use super::lexer::{Tok, Token};
use super::FrontendError;

/// Recursive-descent parser. Top-level statements are collected into an
/// implicit `main` function appended after the explicit definitions.
pub fn parse(tokens: &[Token]) -> Result<Program, FrontendError> {
    let mut p = Parser { toks: tokens, pos: 0 };
    p.program()
}

struct Parser<'a> {
    toks: &'a [Token],
    pos: usize,
}

type PResult<T> = Result<T, FrontendError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        let i = (self.pos + n).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn loc(&self) -> SourceLoc {
        self.toks[self.pos].loc.clone()
    }

    /// True when the current token starts on the same line the previous one did.
    fn same_line(&self) -> bool {
        self.pos > 0 && self.toks[self.pos - 1].loc.line == self.toks[self.pos].loc.line
    }

    fn bump(&mut self) -> &'a Token {
        let t = &self.toks[self.pos];
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == tok {
            self.bump();
            true
        } else {
            false
        }
    }

    fn error<T>(&self, expected: &[&str]) -> PResult<T> {
        let t = &self.toks[self.pos];
        let found = match &t.tok {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(n) => format!("integer `{n}`"),
            other => other.to_string(),
        };
        Err(FrontendError::Parse {
            loc: t.loc.clone(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
            found,
        })
    }

    fn expect(&mut self, tok: Tok) -> PResult<SourceLoc> {
        if self.peek() == &tok {
            Ok(self.bump().loc.clone())
        } else {
            self.error(&[&tok.to_string()])
        }
    }

    fn ident(&mut self) -> PResult<(String, SourceLoc)> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let loc = self.bump().loc.clone();
                Ok((name, loc))
            }
            _ => self.error(&["identifier"]),
        }
    }

    fn program(&mut self) -> PResult<Program> {
        let mut functions = Vec::new();
        let mut main_body = Vec::new();
        let file: Arc<str> = self.loc().file;
        while self.peek() != &Tok::Eof {
            if self.eat(&Tok::Semi) {
                continue;
            }
            if self.peek() == &Tok::Func {
                functions.push(self.funcdef()?);
            } else {
                main_body.push(self.stmt()?);
            }
        }
        let loc = main_body.first().map(|s: &Stmt| s.loc.clone()).unwrap_or(SourceLoc::new(file, 1, 1));
        functions.push(Function {
            name: "main".to_string(),
            params: vec![],
            ret: Type::Unit,
            body: main_body,
            loc,
            implicit_main: true,
        });
        Ok(Program { functions })
    }

    fn funcdef(&mut self) -> PResult<Function> {
        let loc = self.expect(Tok::Func)?;
        let (name, _) = self.ident()?;
        self.expect(Tok::LParen)?;
        let mut params = Vec::new();
        if self.peek() != &Tok::RParen {
            loop {
                let (pname, ploc) = self.ident()?;
                self.expect(Tok::Colon)?;
                let ty = self.ty()?;
                params.push(Param { name: pname, ty, loc: ploc });
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(Tok::RParen)?;
        let ret = if self.eat(&Tok::Arrow) { self.ty()? } else { Type::Unit };
        let body = self.block()?;
        Ok(Function { name, params, ret, body, loc, implicit_main: false })
    }

    fn ty(&mut self) -> PResult<Type> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                let ty = match name.as_str() {
                    "Int" => Type::Int,
                    "Bool" => Type::Bool,
                    "Tensor" => Type::Tensor,
                    "Shape" => Type::Shape,
                    _ => return self.error(&["Int", "Bool", "Tensor", "Shape", "`(`"]),
                };
                self.bump();
                Ok(ty)
            }
            Tok::LParen => {
                self.bump();
                if self.eat(&Tok::RParen) {
                    return Ok(Type::Unit);
                }
                let mut items = vec![self.ty()?];
                while self.eat(&Tok::Comma) {
                    items.push(self.ty()?);
                }
                self.expect(Tok::RParen)?;
                if items.len() == 1 {
                    Ok(items.pop().unwrap())
                } else {
                    Ok(Type::Tuple(items))
                }
            }
            _ => self.error(&["type"]),
        }
    }

    fn block(&mut self) -> PResult<Vec<Stmt>> {
        self.expect(Tok::LBrace)?;
        let mut body = Vec::new();
        loop {
            if self.eat(&Tok::Semi) {
                continue;
            }
            if self.eat(&Tok::RBrace) {
                return Ok(body);
            }
            if self.peek() == &Tok::Eof {
                return self.error(&["`}`"]);
            }
            body.push(self.stmt()?);
        }
    }

    fn stmt(&mut self) -> PResult<Stmt> {
        let loc = self.loc();
        let kind = match self.peek().clone() {
            Tok::Let | Tok::Var => {
                let mutable = self.bump().tok == Tok::Var;
                let (name, _) = self.ident()?;
                let ty = if self.eat(&Tok::Colon) { Some(self.ty()?) } else { None };
                self.expect(Tok::Assign)?;
                let value = self.expr()?;
                StmtKind::Let { name, mutable, ty, value }
            }
            Tok::Assert => {
                self.bump();
                self.expect(Tok::LParen)?;
                let e = self.expr()?;
                self.expect(Tok::RParen)?;
                StmtKind::Assert(e)
            }
            Tok::If => return self.if_stmt(),
            Tok::For => {
                self.bump();
                let (var, _) = self.ident()?;
                self.expect(Tok::In)?;
                let lo = self.expr()?;
                self.expect(Tok::RangeExcl)?;
                let hi = self.expr()?;
                let body = self.block()?;
                StmtKind::For { var, lo, hi, body }
            }
            Tok::Return => {
                self.bump();
                let value = if matches!(self.peek(), Tok::RBrace | Tok::Semi | Tok::Eof) || !self.same_line() {
                    None
                } else {
                    Some(self.expr()?)
                };
                StmtKind::Return(value)
            }
            Tok::Ident(name) if self.peek_at(1) == &Tok::Assign => {
                self.bump();
                self.bump();
                let value = self.expr()?;
                StmtKind::Assign { name, value }
            }
            Tok::Func => return self.error(&["statement"]),
            _ => StmtKind::Expr(self.expr()?),
        };
        Ok(Stmt { kind, loc })
    }

    fn if_stmt(&mut self) -> PResult<Stmt> {
        let loc = self.expect(Tok::If)?;
        let cond = self.expr()?;
        let then_body = self.block()?;
        let else_body = if self.eat(&Tok::Else) {
            if self.peek() == &Tok::If {
                Some(vec![self.if_stmt()?])
            } else {
                Some(self.block()?)
            }
        } else {
            None
        };
        Ok(Stmt { kind: StmtKind::If { cond, then_body, else_body }, loc })
    }

    pub fn expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.or_expr()?;
        while self.peek() == &Tok::ShapeAssert {
            let loc = self.bump().loc.clone();
            let rhs = self.or_expr()?;
            lhs = Expr::new(ExprKind::ShapeAssert { operand: Box::new(lhs), shape: Box::new(rhs) }, loc);
        }
        Ok(lhs)
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.peek() == &Tok::OrOr {
            let loc = self.bump().loc.clone();
            let rhs = self.and_expr()?;
            lhs = Expr::new(ExprKind::Logic(LogicOp::Or, Box::new(lhs), Box::new(rhs)), loc);
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.cmp_expr()?;
        while self.peek() == &Tok::AndAnd {
            let loc = self.bump().loc.clone();
            let rhs = self.cmp_expr()?;
            lhs = Expr::new(ExprKind::Logic(LogicOp::And, Box::new(lhs), Box::new(rhs)), loc);
        }
        Ok(lhs)
    }

    fn cmp_expr(&mut self) -> PResult<Expr> {
        let lhs = self.add_expr()?;
        let op = match self.peek() {
            Tok::EqEq => CmpOp::Eq,
            Tok::Ne => CmpOp::Ne,
            Tok::Lt => CmpOp::Lt,
            Tok::Le => CmpOp::Le,
            Tok::Gt => CmpOp::Gt,
            Tok::Ge => CmpOp::Ge,
            _ => return Ok(lhs),
        };
        let loc = self.bump().loc.clone();
        let rhs = self.add_expr()?;
        Ok(Expr::new(ExprKind::Compare(op, Box::new(lhs), Box::new(rhs)), loc))
    }

    fn add_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.mul_expr()?;
        loop {
            let op = match self.peek() {
                Tok::Plus => ArithOp::Add,
                Tok::Minus => ArithOp::Sub,
                _ => return Ok(lhs),
            };
            let loc = self.bump().loc.clone();
            let rhs = self.mul_expr()?;
            lhs = Expr::new(ExprKind::Arith(op, Box::new(lhs), Box::new(rhs)), loc);
        }
    }

    fn mul_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Star => ArithOp::Mul,
                Tok::Slash => ArithOp::Div,
                _ => return Ok(lhs),
            };
            let loc = self.bump().loc.clone();
            let rhs = self.unary()?;
            lhs = Expr::new(ExprKind::Arith(op, Box::new(lhs), Box::new(rhs)), loc);
        }
    }

    fn unary(&mut self) -> PResult<Expr> {
        match self.peek() {
            Tok::Bang => {
                let loc = self.bump().loc.clone();
                let e = self.unary()?;
                Ok(Expr::new(ExprKind::Not(Box::new(e)), loc))
            }
            Tok::Minus => {
                let loc = self.bump().loc.clone();
                let e = self.unary()?;
                Ok(Expr::new(ExprKind::Neg(Box::new(e)), loc))
            }
            _ => self.postfix(),
        }
    }

    fn postfix(&mut self) -> PResult<Expr> {
        let mut e = self.primary()?;
        loop {
            match self.peek().clone() {
                Tok::Dot => {
                    let loc = self.bump().loc.clone();
                    match self.peek().clone() {
                        Tok::Shape => {
                            self.bump();
                            e = Expr::new(ExprKind::Call("shapeof".into(), vec![e]), loc);
                        }
                        Tok::Ident(name) if name == "rank" => {
                            self.bump();
                            e = Expr::new(ExprKind::Rank(Box::new(e)), loc);
                        }
                        Tok::Int(n) => {
                            self.bump();
                            e = Expr::new(ExprKind::Proj(Box::new(e), n as usize), loc);
                        }
                        _ => return self.error(&["`shape`", "`rank`", "tuple index"]),
                    }
                }
                Tok::LBrack if self.same_line() => {
                    let loc = self.bump().loc.clone();
                    let idx = self.expr()?;
                    self.expect(Tok::RBrack)?;
                    e = Expr::new(ExprKind::Index(Box::new(e), Box::new(idx)), loc);
                }
                _ => return Ok(e),
            }
        }
    }

    fn expr_list(&mut self, close: Tok) -> PResult<Vec<Expr>> {
        let mut items = Vec::new();
        if self.peek() != &close {
            loop {
                items.push(self.expr()?);
                if !self.eat(&Tok::Comma) {
                    break;
                }
            }
        }
        self.expect(close)?;
        Ok(items)
    }

    fn primary(&mut self) -> PResult<Expr> {
        let loc = self.loc();
        let kind = match self.peek().clone() {
            Tok::Int(n) => {
                self.bump();
                ExprKind::Int(n)
            }
            Tok::True => {
                self.bump();
                ExprKind::Bool(true)
            }
            Tok::False => {
                self.bump();
                ExprKind::Bool(false)
            }
            Tok::Hole => {
                self.bump();
                ExprKind::Hole
            }
            Tok::Ident(name) => {
                self.bump();
                if self.peek() == &Tok::LParen && self.same_line() {
                    self.bump();
                    let mut args = self.expr_list(Tok::RParen)?;
                    if name == "broadcast" && args.len() == 2 {
                        let b = args.pop().unwrap();
                        let a = args.pop().unwrap();
                        ExprKind::Broadcast(Box::new(a), Box::new(b))
                    } else {
                        ExprKind::Call(name, args)
                    }
                } else {
                    ExprKind::Var(name)
                }
            }
            Tok::LParen => {
                self.bump();
                let mut items = self.expr_list(Tok::RParen)?;
                match items.len() {
                    0 => return self.error(&["expression"]),
                    1 => return Ok(items.pop().unwrap()),
                    _ => ExprKind::Tuple(items),
                }
            }
            Tok::LBrack => {
                self.bump();
                ExprKind::ShapeLit(self.expr_list(Tok::RBrack)?)
            }
            _ => return self.error(&["expression"]),
        };
        Ok(Expr::new(kind, loc))
    }
}

#[cfg(test)]
mod tests {
    use super::super::lexer::tokenize;
    use super::*;

    fn parse_src(src: &str) -> Program {
        parse(&tokenize(src, "t.tfit").unwrap()).unwrap()
    }

    #[test]
    fn trivial_function() {
        let p = parse_src("func f() -> Int { return 1 }");
        assert_eq!(p.functions.len(), 2);
        let f = &p.functions[0];
        assert_eq!(f.name, "f");
        assert_eq!(f.ret, Type::Int);
        assert!(matches!(f.body[0].kind, StmtKind::Return(Some(Expr { kind: ExprKind::Int(1), .. }))));
        assert!(p.functions[1].implicit_main && p.functions[1].body.is_empty());
    }

    #[test]
    fn shape_assert_binds_loosest() {
        let p = parse_src("let z = (m(x)) |-> [b, 10]");
        let StmtKind::Let { value, .. } = &p.functions[0].body[0].kind else { panic!() };
        let ExprKind::ShapeAssert { operand, shape } = &value.kind else { panic!("{value:?}") };
        assert!(matches!(&operand.kind, ExprKind::Call(n, a) if n == "m" && a.len() == 1));
        assert!(matches!(&shape.kind, ExprKind::ShapeLit(d) if d.len() == 2));
    }

    #[test]
    fn precedence() {
        let p = parse_src("assert(a + b * c == d && !e || f)");
        let StmtKind::Assert(e) = &p.functions[0].body[0].kind else { panic!() };
        let ExprKind::Logic(LogicOp::Or, l, _) = &e.kind else { panic!() };
        let ExprKind::Logic(LogicOp::And, cmp, _) = &l.kind else { panic!() };
        let ExprKind::Compare(CmpOp::Eq, sum, _) = &cmp.kind else { panic!() };
        let ExprKind::Arith(ArithOp::Add, _, prod) = &sum.kind else { panic!() };
        assert!(matches!(prod.kind, ExprKind::Arith(ArithOp::Mul, _, _)));
    }

    #[test]
    fn postfix_chain() {
        let p = parse_src("let a = x.shape[-1]\nlet b = t.0.1\nlet c = y.rank");
        let body = &p.functions[0].body;
        let StmtKind::Let { value, .. } = &body[0].kind else { panic!() };
        let ExprKind::Index(base, idx) = &value.kind else { panic!() };
        assert!(matches!(&base.kind, ExprKind::Call(n, _) if n == "shapeof"));
        assert!(matches!(idx.kind, ExprKind::Neg(_)));
        let StmtKind::Let { value, .. } = &body[1].kind else { panic!() };
        assert!(matches!(&value.kind, ExprKind::Proj(inner, 1) if matches!(inner.kind, ExprKind::Proj(_, 0))));
        let StmtKind::Let { value, .. } = &body[2].kind else { panic!() };
        assert!(matches!(value.kind, ExprKind::Rank(_)));
    }

    #[test]
    fn bracket_on_new_line_starts_a_new_statement() {
        let p = parse_src("let a = x\n[1, 2]");
        assert_eq!(p.functions[0].body.len(), 2);
    }

    #[test]
    fn else_if_chains() {
        let p = parse_src("if a { } else if b { } else { assert(c) }");
        let StmtKind::If { else_body: Some(e), .. } = &p.functions[0].body[0].kind else { panic!() };
        assert!(matches!(e[0].kind, StmtKind::If { else_body: Some(_), .. }));
    }

    #[test]
    fn parse_error_reports_expected_tokens() {
        let err = parse(&tokenize("func f( { }", "t").unwrap()).unwrap_err();
        match err {
            FrontendError::Parse { loc, expected, .. } => {
                assert_eq!(loc.column, 9);
                assert_eq!(expected, vec!["identifier".to_string()]);
            }
            other => panic!("{other:?}"),
        }
    }
}
