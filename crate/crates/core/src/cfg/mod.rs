//! SSA control-flow graphs whose blocks take argument lists instead of phi
//! nodes, plus the loop-elimination rewrite that makes them acyclic.

mod dump;
mod loops;
mod lower;
mod verify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

use crate::frontend::ast::{ArithOp, CmpOp, LogicOp};
use crate::frontend::{Intrinsic, SourceLoc, Type};

pub use dump::dump_cfg;
pub use loops::{eliminate_loops, is_acyclic, topo_order};
pub use lower::{lower, lower_program};
pub use verify::verify;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ValueId(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct BlockId(pub u32);

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "bb{}", self.0)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ValueInfo {
    pub ty: Type,
    /// Display name, unique within the function (`4`, `4a`, `4ab`, ...).
    pub name: String,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Callee {
    Function(String),
    Intrinsic(Intrinsic),
}

#[derive(Clone, Debug, PartialEq)]
pub enum Op {
    ConstInt(i64),
    ConstBool(bool),
    Hole,
    Arith(ArithOp, ValueId, ValueId),
    Compare(CmpOp, ValueId, ValueId),
    Logic(LogicOp, ValueId, ValueId),
    Not(ValueId),
    TupleMake(Vec<ValueId>),
    TupleGet(ValueId, usize),
    ShapeLit(Vec<ValueId>),
    ShapeIndex(ValueId, ValueId),
    Rank(ValueId),
    Broadcast(ValueId, ValueId),
    Call(Callee, Vec<ValueId>),
    Assert(ValueId),
}

impl Op {
    pub fn operands(&self) -> Vec<ValueId> {
        match self {
            Op::ConstInt(_) | Op::ConstBool(_) | Op::Hole => vec![],
            Op::Arith(_, a, b)
            | Op::Compare(_, a, b)
            | Op::Logic(_, a, b)
            | Op::ShapeIndex(a, b)
            | Op::Broadcast(a, b) => vec![*a, *b],
            Op::Not(a) | Op::TupleGet(a, _) | Op::Rank(a) | Op::Assert(a) => vec![*a],
            Op::TupleMake(v) | Op::ShapeLit(v) | Op::Call(_, v) => v.clone(),
        }
    }

    pub fn map_operands(&self, f: impl Fn(ValueId) -> ValueId) -> Op {
        let m = |v: &Vec<ValueId>| v.iter().map(|x| f(*x)).collect::<Vec<_>>();
        match self {
            Op::ConstInt(_) | Op::ConstBool(_) | Op::Hole => self.clone(),
            Op::Arith(o, a, b) => Op::Arith(*o, f(*a), f(*b)),
            Op::Compare(o, a, b) => Op::Compare(*o, f(*a), f(*b)),
            Op::Logic(o, a, b) => Op::Logic(*o, f(*a), f(*b)),
            Op::ShapeIndex(a, b) => Op::ShapeIndex(f(*a), f(*b)),
            Op::Broadcast(a, b) => Op::Broadcast(f(*a), f(*b)),
            Op::Not(a) => Op::Not(f(*a)),
            Op::TupleGet(a, i) => Op::TupleGet(f(*a), *i),
            Op::Rank(a) => Op::Rank(f(*a)),
            Op::Assert(a) => Op::Assert(f(*a)),
            Op::TupleMake(v) => Op::TupleMake(m(v)),
            Op::ShapeLit(v) => Op::ShapeLit(m(v)),
            Op::Call(c, v) => Op::Call(c.clone(), m(v)),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Instr {
    pub dest: Option<ValueId>,
    pub op: Op,
    pub loc: SourceLoc,
}

/// A control transfer to `target` passing `args` as its block parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct Edge {
    pub target: BlockId,
    pub args: Vec<ValueId>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum Terminator {
    Jump(Edge),
    CondJump { cond: ValueId, then_edge: Edge, else_edge: Edge },
    Return(Option<ValueId>),
}

impl Terminator {
    pub fn edges(&self) -> Vec<&Edge> {
        match self {
            Terminator::Jump(e) => vec![e],
            Terminator::CondJump { then_edge, else_edge, .. } => vec![then_edge, else_edge],
            Terminator::Return(_) => vec![],
        }
    }

    pub fn edges_mut(&mut self) -> Vec<&mut Edge> {
        match self {
            Terminator::Jump(e) => vec![e],
            Terminator::CondJump { then_edge, else_edge, .. } => vec![then_edge, else_edge],
            Terminator::Return(_) => vec![],
        }
    }

    pub fn successors(&self) -> Vec<BlockId> {
        self.edges().into_iter().map(|e| e.target).collect()
    }

    pub fn operands(&self) -> Vec<ValueId> {
        let mut v = Vec::new();
        match self {
            Terminator::CondJump { cond, .. } => v.push(*cond),
            Terminator::Return(Some(r)) => v.push(*r),
            _ => {}
        }
        for e in self.edges() {
            v.extend(&e.args);
        }
        v
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Block {
    pub id: BlockId,
    pub params: Vec<ValueId>,
    pub instrs: Vec<Instr>,
    pub terminator: Terminator,
}

/// Why a value has no defining instruction or block parameter.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FreshKind {
    /// Replaces a loop's trip-count test; carries no information.
    LoopGuard,
    /// A loop-carried input of the second body copy.
    LoopCarried,
}

#[derive(Clone, Debug, PartialEq)]
pub struct FunctionCfg {
    pub name: String,
    pub entry: BlockId,
    pub blocks: BTreeMap<BlockId, Block>,
    pub result_type: Type,
    pub values: Vec<ValueInfo>,
    /// Values introduced by loop elimination that no instruction defines.
    pub fresh: BTreeMap<ValueId, FreshKind>,
    pub loc: SourceLoc,
}

impl FunctionCfg {
    pub fn value(&self, v: ValueId) -> &ValueInfo {
        &self.values[v.0 as usize]
    }

    pub fn ty(&self, v: ValueId) -> &Type {
        &self.value(v).ty
    }

    pub fn params(&self) -> &[ValueId] {
        &self.blocks[&self.entry].params
    }

    pub fn new_value(&mut self, ty: Type, name: String) -> ValueId {
        let id = ValueId(self.values.len() as u32);
        self.values.push(ValueInfo { ty, name });
        id
    }

    pub fn next_block_id(&self) -> BlockId {
        BlockId(self.blocks.keys().next_back().map_or(0, |b| b.0 + 1))
    }

    pub fn predecessors(&self) -> BTreeMap<BlockId, BTreeSet<BlockId>> {
        let mut preds: BTreeMap<BlockId, BTreeSet<BlockId>> = self.blocks.keys().map(|b| (*b, BTreeSet::new())).collect();
        for b in self.blocks.values() {
            for s in b.terminator.successors() {
                preds.entry(s).or_default().insert(b.id);
            }
        }
        preds
    }

    /// All instructions in block order.
    pub fn instrs(&self) -> impl Iterator<Item = &Instr> {
        self.blocks.values().flat_map(|b| b.instrs.iter())
    }

    pub fn assert_count(&self) -> usize {
        self.instrs().filter(|i| matches!(i.op, Op::Assert(_))).count()
    }
}

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CfgError {
    #[error("{loc}: irreducible control flow in `{function}`; function skipped")]
    IrreducibleLoop { function: String, loc: SourceLoc },
    #[error("loop headed by {header} in `{function}` does not have a single conditional exit")]
    UnsupportedLoop { function: String, header: BlockId },
    #[error("value %{value} defined inside a loop of `{function}` is used outside it")]
    OpenLoop { function: String, value: String },
    #[error("malformed CFG for `{function}`: {msg}")]
    Invalid { function: String, msg: String },
}
