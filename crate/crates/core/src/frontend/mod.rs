//! Lexer, parser and typechecker for `.tfit` source files.
//!
//! The language is a small statically typed imperative language over
//! integers, booleans, tensors (tracked by shape only), shapes and tuples.
//! `e |-> s` asserts that tensor `e` has shape `s` and evaluates to `e`;
//! `____` is an integer hole whose value the checker tries to infer.

pub mod ast;
pub mod lexer;
pub mod parser;
pub mod pretty;
pub mod typeck;

use thiserror::Error;

pub use ast::{Expr, ExprKind, Function, Program, SourceLoc, Stmt, StmtKind, Type};
pub use lexer::tokenize;
pub use parser::parse;
pub use typeck::{resolve_and_typecheck, Intrinsic, OpaqueOp};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FrontendError {
    #[error("{loc}: lex error: {msg}")]
    Lex { loc: SourceLoc, msg: String },
    #[error("{loc}: parse error: expected {}, found {found}", expected.join(" or "))]
    Parse { loc: SourceLoc, expected: Vec<String>, found: String },
    #[error("{loc}: {msg}")]
    Resolve { loc: SourceLoc, msg: String },
    #[error("{loc}: type error: {msg}")]
    Type { loc: SourceLoc, msg: String },
    #[error("{loc}: {msg}")]
    Arity { loc: SourceLoc, msg: String },
}

impl FrontendError {
    pub fn loc(&self) -> &SourceLoc {
        match self {
            FrontendError::Lex { loc, .. }
            | FrontendError::Parse { loc, .. }
            | FrontendError::Resolve { loc, .. }
            | FrontendError::Type { loc, .. }
            | FrontendError::Arity { loc, .. } => loc,
        }
    }
}

/// Tokenize, parse and typecheck a single source file.
pub fn parse_source(source: &str, file: &str) -> Result<Program, FrontendError> {
    let tokens = tokenize(source, file)?;
    resolve_and_typecheck(parse(&tokens)?)
}

/// Parse several files into one program namespace. Top-level statements of all
/// files are concatenated, in order, into a single implicit `main`.
pub fn parse_sources<'a>(files: impl IntoIterator<Item = (&'a str, &'a str)>) -> Result<Program, FrontendError> {
    let mut functions = Vec::new();
    let mut main: Option<Function> = None;
    for (file, source) in files {
        let prog = parse(&tokenize(source, file)?)?;
        for f in prog.functions {
            if f.implicit_main {
                match &mut main {
                    Some(m) => m.body.extend(f.body),
                    None => main = Some(f),
                }
            } else {
                functions.push(f);
            }
        }
    }
    functions.extend(main);
    resolve_and_typecheck(Program { functions })
}

/// Expand `operand |-> shape` into a temporary binding, an assertion on the
/// temporary's shape and a reference to the temporary.
pub fn desugar_shape_assert(operand: &Expr, shape: &Expr, loc: &SourceLoc, tmp: &str) -> (Stmt, Stmt, Expr) {
    let typed = |kind, ty| Expr { kind, loc: loc.clone(), ty: Some(ty) };
    let let_stmt = Stmt {
        kind: StmtKind::Let { name: tmp.to_string(), mutable: false, ty: None, value: operand.clone() },
        loc: loc.clone(),
    };
    let var = typed(ExprKind::Var(tmp.to_string()), Type::Tensor);
    let shape_of = typed(ExprKind::Call("shapeof".into(), vec![var.clone()]), Type::Shape);
    let cond = typed(
        ExprKind::Compare(ast::CmpOp::Eq, Box::new(shape_of), Box::new(shape.clone())),
        Type::Bool,
    );
    let assert_stmt = Stmt { kind: StmtKind::Assert(cond), loc: loc.clone() };
    (let_stmt, assert_stmt, var)
}
