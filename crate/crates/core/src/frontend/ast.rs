use std::fmt;
use std::sync::Arc;

/// A position in a source file. Lines and columns are 1-based.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct SourceLoc {
    pub file: Arc<str>,
    pub line: u32,
    pub column: u32,
}

impl SourceLoc {
    pub fn new(file: Arc<str>, line: u32, column: u32) -> Self {
        debug_assert!(line >= 1 && column >= 1);
        SourceLoc { file, line, column }
    }

    /// Placeholder location used when erasing positions for structural comparison.
    pub fn dummy() -> Self {
        SourceLoc { file: Arc::from(""), line: 1, column: 1 }
    }
}

impl fmt::Display for SourceLoc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}:{}", self.file, self.line, self.column)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Type {
    Int,
    Bool,
    Tensor,
    Shape,
    /// Arity is always at least 2.
    Tuple(Vec<Type>),
    Unit,
}

impl fmt::Display for Type {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Type::Int => f.write_str("Int"),
            Type::Bool => f.write_str("Bool"),
            Type::Tensor => f.write_str("Tensor"),
            Type::Shape => f.write_str("Shape"),
            Type::Unit => f.write_str("()"),
            Type::Tuple(items) => {
                f.write_str("(")?;
                for (i, t) in items.iter().enumerate() {
                    if i > 0 {
                        f.write_str(", ")?;
                    }
                    write!(f, "{t}")?;
                }
                f.write_str(")")
            }
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl ArithOp {
    pub fn symbol(self) -> &'static str {
        match self {
            ArithOp::Add => "+",
            ArithOp::Sub => "-",
            ArithOp::Mul => "*",
            ArithOp::Div => "/",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum CmpOp {
    Eq,
    Ne,
    Lt,
    Le,
    Gt,
    Ge,
}

impl CmpOp {
    pub fn symbol(self) -> &'static str {
        match self {
            CmpOp::Eq => "==",
            CmpOp::Ne => "!=",
            CmpOp::Lt => "<",
            CmpOp::Le => "<=",
            CmpOp::Gt => ">",
            CmpOp::Ge => ">=",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum LogicOp {
    And,
    Or,
}

impl LogicOp {
    pub fn symbol(self) -> &'static str {
        match self {
            LogicOp::And => "&&",
            LogicOp::Or => "||",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Expr {
    pub kind: ExprKind,
    pub loc: SourceLoc,
    /// Filled in by the typechecker.
    pub ty: Option<Type>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum ExprKind {
    Int(i64),
    Bool(bool),
    Var(String),
    /// The `____` placeholder. Always has type `Int`.
    Hole,
    Arith(ArithOp, Box<Expr>, Box<Expr>),
    Compare(CmpOp, Box<Expr>, Box<Expr>),
    Logic(LogicOp, Box<Expr>, Box<Expr>),
    Not(Box<Expr>),
    Neg(Box<Expr>),
    Call(String, Vec<Expr>),
    Tuple(Vec<Expr>),
    Proj(Box<Expr>, usize),
    ShapeLit(Vec<Expr>),
    /// `s[i]` where `s` has shape type.
    Index(Box<Expr>, Box<Expr>),
    /// `e.rank`
    Rank(Box<Expr>),
    Broadcast(Box<Expr>, Box<Expr>),
    /// `operand |-> shape`: asserts `operand.shape == shape` and yields `operand`.
    ShapeAssert { operand: Box<Expr>, shape: Box<Expr> },
}

impl Expr {
    pub fn new(kind: ExprKind, loc: SourceLoc) -> Self {
        Expr { kind, loc, ty: None }
    }

    pub fn ty(&self) -> &Type {
        self.ty.as_ref().expect("expression was not typechecked")
    }

    pub fn children(&self) -> Vec<&Expr> {
        use ExprKind::*;
        match &self.kind {
            Int(_) | Bool(_) | Var(_) | Hole => vec![],
            Arith(_, a, b) | Compare(_, a, b) | Logic(_, a, b) | Index(a, b) | Broadcast(a, b) => {
                vec![a, b]
            }
            ShapeAssert { operand, shape } => vec![operand, shape],
            Not(a) | Neg(a) | Proj(a, _) | Rank(a) => vec![a],
            Call(_, args) | Tuple(args) | ShapeLit(args) => args.iter().collect(),
        }
    }

    fn children_mut(&mut self) -> Vec<&mut Expr> {
        use ExprKind::*;
        match &mut self.kind {
            Int(_) | Bool(_) | Var(_) | Hole => vec![],
            Arith(_, a, b) | Compare(_, a, b) | Logic(_, a, b) | Index(a, b) | Broadcast(a, b) => {
                vec![a, b]
            }
            ShapeAssert { operand, shape } => vec![operand, shape],
            Not(a) | Neg(a) | Proj(a, _) | Rank(a) => vec![a],
            Call(_, args) | Tuple(args) | ShapeLit(args) => args.iter_mut().collect(),
        }
    }

    /// Pre-order walk over this expression and all subexpressions.
    pub fn walk<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        f(self);
        for c in self.children() {
            c.walk(f);
        }
    }

    fn erase(&mut self) {
        self.loc = SourceLoc::dummy();
        self.ty = None;
        for c in self.children_mut() {
            c.erase();
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Stmt {
    pub kind: StmtKind,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub enum StmtKind {
    /// `let x = e` or `var x = e`.
    Let { name: String, mutable: bool, ty: Option<Type>, value: Expr },
    Assign { name: String, value: Expr },
    Assert(Expr),
    If { cond: Expr, then_body: Vec<Stmt>, else_body: Option<Vec<Stmt>> },
    /// `for var in lo..<hi { body }`
    For { var: String, lo: Expr, hi: Expr, body: Vec<Stmt> },
    Return(Option<Expr>),
    Expr(Expr),
}

impl Stmt {
    pub fn exprs(&self) -> Vec<&Expr> {
        match &self.kind {
            StmtKind::Let { value, .. } | StmtKind::Assign { value, .. } => vec![value],
            StmtKind::Assert(e) | StmtKind::Expr(e) => vec![e],
            StmtKind::If { cond, .. } => vec![cond],
            StmtKind::For { lo, hi, .. } => vec![lo, hi],
            StmtKind::Return(e) => e.iter().collect(),
        }
    }

    pub fn nested(&self) -> Vec<&Vec<Stmt>> {
        match &self.kind {
            StmtKind::If { then_body, else_body, .. } => {
                let mut v = vec![then_body];
                v.extend(else_body.iter());
                v
            }
            StmtKind::For { body, .. } => vec![body],
            _ => vec![],
        }
    }

    fn erase(&mut self) {
        self.loc = SourceLoc::dummy();
        match &mut self.kind {
            StmtKind::Let { value, .. } | StmtKind::Assign { value, .. } => value.erase(),
            StmtKind::Assert(e) | StmtKind::Expr(e) => e.erase(),
            StmtKind::If { cond, then_body, else_body } => {
                cond.erase();
                then_body.iter_mut().for_each(Stmt::erase);
                if let Some(b) = else_body {
                    b.iter_mut().for_each(Stmt::erase);
                }
            }
            StmtKind::For { lo, hi, body, .. } => {
                lo.erase();
                hi.erase();
                body.iter_mut().for_each(Stmt::erase);
            }
            StmtKind::Return(e) => {
                if let Some(e) = e {
                    e.erase()
                }
            }
        }
    }
}

/// Visit every statement (including nested ones) in a body.
pub fn walk_stmts<'a>(body: &'a [Stmt], f: &mut impl FnMut(&'a Stmt)) {
    for s in body {
        f(s);
        for b in s.nested() {
            walk_stmts(b, f);
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Param {
    pub name: String,
    pub ty: Type,
    pub loc: SourceLoc,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Function {
    pub name: String,
    pub params: Vec<Param>,
    pub ret: Type,
    pub body: Vec<Stmt>,
    pub loc: SourceLoc,
    /// True for the function synthesized from top-level statements.
    pub implicit_main: bool,
}

impl Function {
    /// Every expression in the body, in source order.
    pub fn for_each_expr<'a>(&'a self, f: &mut impl FnMut(&'a Expr)) {
        walk_stmts(&self.body, &mut |s| {
            for e in s.exprs() {
                e.walk(f);
            }
        });
    }
}

#[derive(Clone, Debug, PartialEq, Default)]
pub struct Program {
    pub functions: Vec<Function>,
}

impl Program {
    pub fn function(&self, name: &str) -> Option<&Function> {
        self.functions.iter().find(|f| f.name == name)
    }

    /// Copy of the program with every location and type annotation reset, for
    /// structural comparison.
    pub fn erased(&self) -> Program {
        let mut p = self.clone();
        for f in &mut p.functions {
            f.loc = SourceLoc::dummy();
            for prm in &mut f.params {
                prm.loc = SourceLoc::dummy();
            }
            f.body.iter_mut().for_each(Stmt::erase);
        }
        p
    }
}
