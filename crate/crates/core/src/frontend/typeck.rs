use std::collections::HashMap;

use super::ast::*;
use super::FrontendError;

/// Built-in functions known to the frontend.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Intrinsic {
    ShapeOf,
    Rank,
    Randn,
    /// A tensor operation whose shape behavior the analysis knows nothing about.
    Opaque(OpaqueOp),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum OpaqueOp {
    MatMul,
    Add,
    Sub,
    Mul,
    Relu,
    Softmax,
    Transpose,
    Flatten,
    Conv2d,
    MaxPool2d,
    Reshape,
}

impl Intrinsic {
    pub fn lookup(name: &str) -> Option<Intrinsic> {
        use OpaqueOp::*;
        Some(match name {
            "shapeof" => Intrinsic::ShapeOf,
            "rank" => Intrinsic::Rank,
            "randn" => Intrinsic::Randn,
            "tf_matmul" => Intrinsic::Opaque(MatMul),
            "tf_add" => Intrinsic::Opaque(Add),
            "tf_sub" => Intrinsic::Opaque(Sub),
            "tf_mul" => Intrinsic::Opaque(Mul),
            "tf_relu" => Intrinsic::Opaque(Relu),
            "tf_softmax" => Intrinsic::Opaque(Softmax),
            "tf_transpose" => Intrinsic::Opaque(Transpose),
            "tf_flatten" => Intrinsic::Opaque(Flatten),
            "tf_conv2d" => Intrinsic::Opaque(Conv2d),
            "tf_maxpool2d" => Intrinsic::Opaque(MaxPool2d),
            "tf_reshape" => Intrinsic::Opaque(Reshape),
            _ => return None,
        })
    }

    /// Parameter types, or `None` for `rank`, which accepts a tensor or a shape.
    pub fn params(self) -> Option<Vec<Type>> {
        use OpaqueOp::*;
        let pair = Type::Tuple(vec![Type::Int, Type::Int]);
        Some(match self {
            Intrinsic::ShapeOf => vec![Type::Tensor],
            Intrinsic::Rank => return None,
            Intrinsic::Randn => vec![Type::Shape],
            Intrinsic::Opaque(op) => match op {
                MatMul | Add | Sub | Mul => vec![Type::Tensor, Type::Tensor],
                Conv2d => vec![Type::Tensor, Type::Tensor, pair.clone()],
                Relu | Softmax | Transpose | Flatten => vec![Type::Tensor],
                MaxPool2d => vec![Type::Tensor, pair.clone(), pair],
                Reshape => vec![Type::Tensor, Type::Shape],
            },
        })
    }

    pub fn ret(self) -> Type {
        match self {
            Intrinsic::ShapeOf => Type::Shape,
            Intrinsic::Rank => Type::Int,
            Intrinsic::Randn | Intrinsic::Opaque(_) => Type::Tensor,
        }
    }
}

struct Signature {
    params: Vec<Type>,
    ret: Type,
}

#[derive(Clone)]
struct Binding {
    ty: Type,
    mutable: bool,
}

struct Checker<'p> {
    sigs: &'p HashMap<String, Signature>,
    scopes: Vec<HashMap<String, Binding>>,
    ret: Type,
}

fn mismatch(loc: &SourceLoc, expected: &Type, found: &Type) -> FrontendError {
    FrontendError::Type { loc: loc.clone(), msg: format!("expected {expected}, found {found}") }
}

/// Resolve names and annotate every expression with its type.
pub fn resolve_and_typecheck(mut program: Program) -> Result<Program, FrontendError> {
    let mut sigs = HashMap::new();
    for f in &program.functions {
        if Intrinsic::lookup(&f.name).is_some() || f.name == "broadcast" {
            return Err(FrontendError::Resolve {
                loc: f.loc.clone(),
                msg: format!("`{}` is a built-in and cannot be redefined", f.name),
            });
        }
        let sig = Signature { params: f.params.iter().map(|p| p.ty.clone()).collect(), ret: f.ret.clone() };
        if sigs.insert(f.name.clone(), sig).is_some() {
            return Err(FrontendError::Resolve {
                loc: f.loc.clone(),
                msg: format!("duplicate definition of function `{}`", f.name),
            });
        }
    }
    for f in &mut program.functions {
        let mut scope = HashMap::new();
        for p in &f.params {
            check_type_wf(&p.ty, &p.loc)?;
            if scope.insert(p.name.clone(), Binding { ty: p.ty.clone(), mutable: false }).is_some() {
                return Err(FrontendError::Resolve {
                    loc: p.loc.clone(),
                    msg: format!("duplicate parameter `{}`", p.name),
                });
            }
        }
        check_type_wf(&f.ret, &f.loc)?;
        let mut checker = Checker { sigs: &sigs, scopes: vec![scope], ret: f.ret.clone() };
        checker.block(&mut f.body)?;
        if f.ret != Type::Unit && !always_returns(&f.body) {
            return Err(FrontendError::Type {
                loc: f.loc.clone(),
                msg: format!("function `{}` does not return a value on every path", f.name),
            });
        }
    }
    Ok(program)
}

fn check_type_wf(ty: &Type, loc: &SourceLoc) -> Result<(), FrontendError> {
    if let Type::Tuple(items) = ty {
        if items.len() < 2 {
            return Err(FrontendError::Type { loc: loc.clone(), msg: "tuples need at least two elements".into() });
        }
        for t in items {
            check_type_wf(t, loc)?;
        }
    }
    Ok(())
}

/// Whether every path through `body` ends in a `return`.
pub fn always_returns(body: &[Stmt]) -> bool {
    body.iter().any(|s| match &s.kind {
        StmtKind::Return(_) => true,
        StmtKind::If { then_body, else_body: Some(e), .. } => always_returns(then_body) && always_returns(e),
        _ => false,
    })
}

impl Checker<'_> {
    fn lookup(&self, name: &str) -> Option<&Binding> {
        self.scopes.iter().rev().find_map(|s| s.get(name))
    }

    fn declare(&mut self, name: &str, ty: Type, mutable: bool) {
        self.scopes.last_mut().unwrap().insert(name.to_string(), Binding { ty, mutable });
    }

    fn block(&mut self, body: &mut [Stmt]) -> Result<(), FrontendError> {
        self.scopes.push(HashMap::new());
        let r = body.iter_mut().try_for_each(|s| self.stmt(s));
        self.scopes.pop();
        r
    }

    fn stmt(&mut self, stmt: &mut Stmt) -> Result<(), FrontendError> {
        match &mut stmt.kind {
            StmtKind::Let { name, mutable, ty, value } => {
                let vt = self.expr(value)?;
                if vt == Type::Unit {
                    return Err(FrontendError::Type { loc: value.loc.clone(), msg: "cannot bind a unit value".into() });
                }
                if let Some(t) = ty {
                    if *t != vt {
                        return Err(mismatch(&value.loc, t, &vt));
                    }
                }
                let (name, mutable) = (name.clone(), *mutable);
                self.declare(&name, vt, mutable);
            }
            StmtKind::Assign { name, value } => {
                let vt = self.expr(value)?;
                let Some(b) = self.lookup(name) else {
                    return Err(FrontendError::Resolve { loc: stmt.loc.clone(), msg: format!("unknown identifier `{name}`") });
                };
                if !b.mutable {
                    return Err(FrontendError::Type {
                        loc: stmt.loc.clone(),
                        msg: format!("cannot assign to immutable binding `{name}`"),
                    });
                }
                if b.ty != vt {
                    return Err(mismatch(&value.loc, &b.ty, &vt));
                }
            }
            StmtKind::Assert(e) => self.expect(e, &Type::Bool)?,
            StmtKind::If { cond, then_body, else_body } => {
                self.expect(cond, &Type::Bool)?;
                self.block(then_body)?;
                if let Some(b) = else_body {
                    self.block(b)?;
                }
            }
            StmtKind::For { var, lo, hi, body } => {
                self.expect(lo, &Type::Int)?;
                self.expect(hi, &Type::Int)?;
                self.scopes.push(HashMap::new());
                let var = var.clone();
                self.declare(&var, Type::Int, false);
                let r = self.block(body);
                self.scopes.pop();
                r?;
            }
            StmtKind::Return(value) => {
                let ret = self.ret.clone();
                match value {
                    Some(e) => self.expect(e, &ret)?,
                    None if ret != Type::Unit => return Err(mismatch(&stmt.loc, &ret, &Type::Unit)),
                    None => {}
                }
            }
            StmtKind::Expr(e) => {
                self.expr(e)?;
            }
        }
        Ok(())
    }

    fn expect(&mut self, e: &mut Expr, ty: &Type) -> Result<(), FrontendError> {
        let t = self.expr(e)?;
        if &t != ty {
            return Err(mismatch(&e.loc, ty, &t));
        }
        Ok(())
    }

    fn expr(&mut self, e: &mut Expr) -> Result<Type, FrontendError> {
        let loc = e.loc.clone();
        let ty = match &mut e.kind {
            ExprKind::Int(_) | ExprKind::Hole => Type::Int,
            ExprKind::Bool(_) => Type::Bool,
            ExprKind::Var(name) => match self.lookup(name) {
                Some(b) => b.ty.clone(),
                None => {
                    return Err(FrontendError::Resolve { loc, msg: format!("unknown identifier `{name}`") });
                }
            },
            ExprKind::Arith(_, a, b) => {
                self.expect(a, &Type::Int)?;
                self.expect(b, &Type::Int)?;
                Type::Int
            }
            ExprKind::Neg(a) => {
                self.expect(a, &Type::Int)?;
                Type::Int
            }
            ExprKind::Compare(op, a, b) => {
                let ta = self.expr(a)?;
                let tb = self.expr(b)?;
                if ta != tb {
                    return Err(mismatch(&b.loc, &ta, &tb));
                }
                match op {
                    CmpOp::Eq | CmpOp::Ne => {
                        if !matches!(ta, Type::Int | Type::Bool | Type::Shape) {
                            return Err(FrontendError::Type {
                                loc,
                                msg: format!("values of type {ta} cannot be compared for equality"),
                            });
                        }
                    }
                    _ => {
                        if ta != Type::Int {
                            return Err(mismatch(&a.loc, &Type::Int, &ta));
                        }
                    }
                }
                Type::Bool
            }
            ExprKind::Logic(_, a, b) => {
                self.expect(a, &Type::Bool)?;
                self.expect(b, &Type::Bool)?;
                Type::Bool
            }
            ExprKind::Not(a) => {
                self.expect(a, &Type::Bool)?;
                Type::Bool
            }
            ExprKind::Call(name, args) => {
                let arg_tys = args.iter_mut().map(|a| self.expr(a)).collect::<Result<Vec<_>, _>>()?;
                let (params, ret) = if let Some(intr) = Intrinsic::lookup(name) {
                    match intr.params() {
                        Some(p) => (p, intr.ret()),
                        None => {
                            // rank(x): tensor or shape
                            let p = match arg_tys.first() {
                                Some(Type::Shape) => Type::Shape,
                                _ => Type::Tensor,
                            };
                            (vec![p], Type::Int)
                        }
                    }
                } else if let Some(sig) = self.sigs.get(name.as_str()) {
                    (sig.params.clone(), sig.ret.clone())
                } else {
                    return Err(FrontendError::Resolve { loc, msg: format!("unknown function `{name}`") });
                };
                if params.len() != arg_tys.len() {
                    return Err(FrontendError::Arity {
                        loc,
                        msg: format!("`{name}` takes {} argument(s) but {} were supplied", params.len(), arg_tys.len()),
                    });
                }
                for ((p, t), a) in params.iter().zip(&arg_tys).zip(args.iter()) {
                    if p != t {
                        return Err(mismatch(&a.loc, p, t));
                    }
                }
                ret
            }
            ExprKind::Tuple(items) => Type::Tuple(items.iter_mut().map(|i| self.expr(i)).collect::<Result<_, _>>()?),
            ExprKind::Proj(base, idx) => {
                let idx = *idx;
                match self.expr(base)? {
                    Type::Tuple(items) if idx < items.len() => items[idx].clone(),
                    Type::Tuple(items) => {
                        return Err(FrontendError::Type {
                            loc,
                            msg: format!("tuple index {idx} out of range for a tuple of {} elements", items.len()),
                        })
                    }
                    other => {
                        return Err(FrontendError::Type { loc, msg: format!("cannot project from a value of type {other}") })
                    }
                }
            }
            ExprKind::ShapeLit(dims) => {
                for d in dims {
                    self.expect(d, &Type::Int)?;
                }
                Type::Shape
            }
            ExprKind::Index(base, idx) => {
                self.expect(base, &Type::Shape)?;
                self.expect(idx, &Type::Int)?;
                Type::Int
            }
            ExprKind::Rank(a) => match self.expr(a)? {
                Type::Tensor | Type::Shape => Type::Int,
                other => return Err(mismatch(&a.loc, &Type::Tensor, &other)),
            },
            ExprKind::Broadcast(a, b) => {
                self.expect(a, &Type::Shape)?;
                self.expect(b, &Type::Shape)?;
                Type::Shape
            }
            ExprKind::ShapeAssert { operand, shape } => {
                self.expect(operand, &Type::Tensor)?;
                self.expect(shape, &Type::Shape)?;
                Type::Tensor
            }
        };
        e.ty = Some(ty.clone());
        Ok(ty)
    }
}
