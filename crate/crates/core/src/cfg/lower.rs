use std::collections::{BTreeMap, HashMap};

use super::*;
use crate::frontend::ast::{walk_stmts, ExprKind, Function, Program, Stmt, StmtKind};
use crate::frontend::{desugar_shape_assert, Expr};

/// Lower every function of a typechecked program.
pub fn lower_program(program: &Program) -> Vec<FunctionCfg> {
    program.functions.iter().map(lower).collect()
}

#[derive(Clone)]
struct Binding {
    value: ValueId,
}

struct Lowerer {
    cfg: FunctionCfg,
    scopes: Vec<HashMap<String, Binding>>,
    /// Block currently receiving instructions; `None` after a `return`.
    cur: Option<BlockId>,
    pending: BTreeMap<BlockId, (Vec<ValueId>, Vec<Instr>)>,
    tmp_counter: usize,
}

/// Lower a typechecked function to a CFG with block arguments. Loop-carried
/// and branch-merged variables become block parameters.
pub fn lower(function: &Function) -> FunctionCfg {
    let cfg = FunctionCfg {
        name: function.name.clone(),
        entry: BlockId(0),
        blocks: BTreeMap::new(),
        result_type: function.ret.clone(),
        values: Vec::new(),
        fresh: BTreeMap::new(),
        loc: function.loc.clone(),
    };
    let mut l = Lowerer { cfg, scopes: vec![HashMap::new()], cur: None, pending: BTreeMap::new(), tmp_counter: 0 };
    let entry = l.new_block();
    let mut params = Vec::new();
    for p in &function.params {
        let v = l.value(p.ty.clone());
        params.push(v);
        l.bind(&p.name, v);
    }
    l.pending.get_mut(&entry).unwrap().0 = params;
    l.cur = Some(entry);
    l.body(&function.body);
    if let Some(b) = l.cur {
        l.terminate(b, Terminator::Return(None));
    }
    // Blocks left open only arise when every predecessor returned.
    let open: Vec<BlockId> = l.pending.keys().copied().collect();
    for b in open {
        l.terminate(b, Terminator::Return(None));
    }
    l.cfg
}

impl Lowerer {
    fn value(&mut self, ty: Type) -> ValueId {
        let name = self.cfg.values.len().to_string();
        self.cfg.new_value(ty, name)
    }

    fn new_block(&mut self) -> BlockId {
        let id = BlockId((self.cfg.blocks.len() + self.pending.len()) as u32);
        self.pending.insert(id, (Vec::new(), Vec::new()));
        id
    }

    fn terminate(&mut self, b: BlockId, terminator: Terminator) {
        let (params, instrs) = self.pending.remove(&b).expect("block terminated twice");
        self.cfg.blocks.insert(b, Block { id: b, params, instrs, terminator });
    }

    fn emit(&mut self, op: Op, ty: Option<Type>, loc: &SourceLoc) -> Option<ValueId> {
        let dest = ty.filter(|t| *t != Type::Unit).map(|t| self.value(t));
        let cur = self.cur.expect("emitting into a terminated block");
        self.pending.get_mut(&cur).unwrap().1.push(Instr { dest, op, loc: loc.clone() });
        dest
    }

    fn bind(&mut self, name: &str, value: ValueId) {
        self.scopes.last_mut().unwrap().insert(name.to_string(), Binding { value });
    }

    fn lookup(&self, name: &str) -> ValueId {
        self.scopes.iter().rev().find_map(|s| s.get(name)).expect("unresolved name after typechecking").value
    }

    /// Rebind `name` in the scope that declared it.
    fn assign(&mut self, name: &str, value: ValueId) {
        for s in self.scopes.iter_mut().rev() {
            if let Some(b) = s.get_mut(name) {
                b.value = value;
                return;
            }
        }
        panic!("assignment to unknown variable {name}");
    }

    /// Outer variables assigned somewhere inside `bodies`, in first-assignment order.
    fn assigned_outer(&self, bodies: &[&[Stmt]]) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for body in bodies {
            walk_stmts(body, &mut |s| {
                if let StmtKind::Assign { name, .. } = &s.kind {
                    if !names.contains(name) {
                        names.push(name.clone());
                    }
                }
            });
        }
        names.retain(|n| self.scopes.iter().any(|s| s.contains_key(n)));
        names
    }

    fn body(&mut self, stmts: &[Stmt]) {
        for s in stmts {
            if self.cur.is_none() {
                // statements after a return are dead
                return;
            }
            self.stmt(s);
        }
    }

    fn scoped_body(&mut self, stmts: &[Stmt]) {
        self.scopes.push(HashMap::new());
        self.body(stmts);
        self.scopes.pop();
    }

    fn stmt(&mut self, s: &Stmt) {
        match &s.kind {
            StmtKind::Let { name, value, .. } => {
                let v = self.expr(value).expect("let of unit value");
                self.bind(name, v);
            }
            StmtKind::Assign { name, value } => {
                let v = self.expr(value).expect("assignment of unit value");
                self.assign(name, v);
            }
            StmtKind::Assert(e) => {
                let c = self.expr(e).unwrap();
                self.emit(Op::Assert(c), None, &s.loc);
            }
            StmtKind::Expr(e) => {
                self.expr(e);
            }
            StmtKind::Return(e) => {
                let v = e.as_ref().and_then(|e| self.expr(e));
                let cur = self.cur.take().unwrap();
                self.terminate(cur, Terminator::Return(v));
            }
            StmtKind::If { cond, then_body, else_body } => self.if_stmt(cond, then_body, else_body.as_deref()),
            StmtKind::For { var, lo, hi, body } => self.for_stmt(var, lo, hi, body, &s.loc),
        }
    }

    fn if_stmt(&mut self, cond: &Expr, then_body: &[Stmt], else_body: Option<&[Stmt]>) {
        let c = self.expr(cond).unwrap();
        let carried = self.assigned_outer(&[then_body, else_body.unwrap_or(&[])]);
        let before: Vec<ValueId> = carried.iter().map(|n| self.lookup(n)).collect();
        let then_b = self.new_block();
        let else_b = self.new_block();
        let cur = self.cur.take().unwrap();
        self.terminate(
            cur,
            Terminator::CondJump {
                cond: c,
                then_edge: Edge { target: then_b, args: vec![] },
                else_edge: Edge { target: else_b, args: vec![] },
            },
        );

        let mut ends = Vec::new();
        for (blk, body) in [(then_b, then_body), (else_b, else_body.unwrap_or(&[]))] {
            for (n, v) in carried.iter().zip(&before) {
                self.assign(n, *v);
            }
            self.cur = Some(blk);
            self.scoped_body(body);
            if let Some(end) = self.cur.take() {
                let vals: Vec<ValueId> = carried.iter().map(|n| self.lookup(n)).collect();
                ends.push((end, vals));
            }
        }
        if ends.is_empty() {
            return;
        }
        let join = self.new_block();
        let params: Vec<ValueId> = carried.iter().map(|n| self.cfg.ty(self.lookup(n)).clone()).collect::<Vec<_>>()
            .into_iter()
            .map(|t| self.value(t))
            .collect();
        self.pending.get_mut(&join).unwrap().0 = params.clone();
        for (end, vals) in ends {
            self.terminate(end, Terminator::Jump(Edge { target: join, args: vals }));
        }
        for (n, p) in carried.iter().zip(params) {
            self.assign(n, p);
        }
        self.cur = Some(join);
    }

    fn for_stmt(&mut self, var: &str, lo: &Expr, hi: &Expr, body: &[Stmt], loc: &SourceLoc) {
        let lo_v = self.expr(lo).unwrap();
        let hi_v = self.expr(hi).unwrap();
        let carried = self.assigned_outer(&[body]);
        let init: Vec<ValueId> = carried.iter().map(|n| self.lookup(n)).collect();

        let header = self.new_block();
        let counter = self.value(Type::Int);
        let mut header_params = vec![counter];
        for v in &init {
            let t = self.cfg.ty(*v).clone();
            header_params.push(self.value(t));
        }
        self.pending.get_mut(&header).unwrap().0 = header_params.clone();
        let pre = self.cur.take().unwrap();
        let mut entry_args = vec![lo_v];
        entry_args.extend(&init);
        self.terminate(pre, Terminator::Jump(Edge { target: header, args: entry_args }));

        self.cur = Some(header);
        let c = self.emit(Op::Compare(CmpOp::Lt, counter, hi_v), Some(Type::Bool), loc).unwrap();
        let body_b = self.new_block();
        let exit_b = self.new_block();
        let exit_params: Vec<ValueId> =
            header_params[1..].iter().map(|p| self.cfg.ty(*p).clone()).collect::<Vec<_>>().into_iter().map(|t| self.value(t)).collect();
        self.pending.get_mut(&exit_b).unwrap().0 = exit_params.clone();
        self.cur = None;
        self.terminate(
            header,
            Terminator::CondJump {
                cond: c,
                then_edge: Edge { target: body_b, args: vec![] },
                else_edge: Edge { target: exit_b, args: header_params[1..].to_vec() },
            },
        );

        for (n, p) in carried.iter().zip(&header_params[1..]) {
            self.assign(n, *p);
        }
        self.scopes.push(HashMap::new());
        self.bind(var, counter);
        self.cur = Some(body_b);
        self.scoped_body(body);
        if self.cur.is_some() {
            let one = self.emit(Op::ConstInt(1), Some(Type::Int), loc).unwrap();
            let next = self.emit(Op::Arith(ArithOp::Add, counter, one), Some(Type::Int), loc).unwrap();
            let mut args = vec![next];
            args.extend(carried.iter().map(|n| self.lookup(n)));
            let end = self.cur.take().unwrap();
            self.terminate(end, Terminator::Jump(Edge { target: header, args }));
        }
        self.scopes.pop();

        for (n, p) in carried.iter().zip(exit_params) {
            self.assign(n, p);
        }
        self.cur = Some(exit_b);
    }

    fn expr(&mut self, e: &Expr) -> Option<ValueId> {
        let ty = Some(e.ty().clone());
        let loc = &e.loc;
        match &e.kind {
            ExprKind::Int(n) => self.emit(Op::ConstInt(*n), ty, loc),
            ExprKind::Bool(b) => self.emit(Op::ConstBool(*b), ty, loc),
            ExprKind::Hole => self.emit(Op::Hole, ty, loc),
            ExprKind::Var(name) => Some(self.lookup(name)),
            ExprKind::Arith(op, a, b) => {
                let (a, b) = (self.expr(a).unwrap(), self.expr(b).unwrap());
                self.emit(Op::Arith(*op, a, b), ty, loc)
            }
            ExprKind::Neg(a) => {
                let zero = self.emit(Op::ConstInt(0), Some(Type::Int), loc).unwrap();
                let a = self.expr(a).unwrap();
                self.emit(Op::Arith(ArithOp::Sub, zero, a), ty, loc)
            }
            ExprKind::Compare(op, a, b) => {
                let (a, b) = (self.expr(a).unwrap(), self.expr(b).unwrap());
                self.emit(Op::Compare(*op, a, b), ty, loc)
            }
            ExprKind::Logic(op, a, b) => {
                let (a, b) = (self.expr(a).unwrap(), self.expr(b).unwrap());
                self.emit(Op::Logic(*op, a, b), ty, loc)
            }
            ExprKind::Not(a) => {
                let a = self.expr(a).unwrap();
                self.emit(Op::Not(a), ty, loc)
            }
            ExprKind::Call(name, args) => {
                let args: Vec<ValueId> = args.iter().map(|a| self.expr(a).unwrap()).collect();
                match Intrinsic::lookup(name) {
                    Some(Intrinsic::Rank) => self.emit(Op::Rank(args[0]), ty, loc),
                    Some(i) => self.emit(Op::Call(Callee::Intrinsic(i), args), ty, loc),
                    None => self.emit(Op::Call(Callee::Function(name.clone()), args), ty, loc),
                }
            }
            ExprKind::Tuple(items) => {
                let items = items.iter().map(|i| self.expr(i).unwrap()).collect();
                self.emit(Op::TupleMake(items), ty, loc)
            }
            ExprKind::Proj(base, i) => {
                let b = self.expr(base).unwrap();
                self.emit(Op::TupleGet(b, *i), ty, loc)
            }
            ExprKind::ShapeLit(dims) => {
                let dims = dims.iter().map(|d| self.expr(d).unwrap()).collect();
                self.emit(Op::ShapeLit(dims), ty, loc)
            }
            ExprKind::Index(base, idx) => {
                let (b, i) = (self.expr(base).unwrap(), self.expr(idx).unwrap());
                self.emit(Op::ShapeIndex(b, i), ty, loc)
            }
            ExprKind::Rank(a) => {
                let a = self.expr(a).unwrap();
                self.emit(Op::Rank(a), ty, loc)
            }
            ExprKind::Broadcast(a, b) => {
                let (a, b) = (self.expr(a).unwrap(), self.expr(b).unwrap());
                self.emit(Op::Broadcast(a, b), ty, loc)
            }
            ExprKind::ShapeAssert { operand, shape } => {
                let tmp = format!("$t{}", self.tmp_counter);
                self.tmp_counter += 1;
                let (let_stmt, assert_stmt, var) = desugar_shape_assert(operand, shape, loc, &tmp);
                self.stmt(&let_stmt);
                self.stmt(&assert_stmt);
                self.expr(&var)
            }
        }
    }
}
