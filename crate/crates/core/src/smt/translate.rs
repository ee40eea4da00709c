use std::collections::{BTreeMap, HashMap};

use super::sym;
use crate::constraints::{ArithOp, BoolExpr, FreeVars, IntExpr, RelOp, ShapeExpr, Sort};
use crate::frontend::SourceLoc;

/// A shape as seen by the solver: a rank term and either a dims function
/// symbol or, when the rank is statically known, the list of dim terms.
#[derive(Clone, Debug, PartialEq)]
pub enum ShapeTerm {
    Fun { dims: String, rank: String },
    List(Vec<String>),
}

impl ShapeTerm {
    pub fn rank(&self) -> String {
        match self {
            ShapeTerm::Fun { rank, .. } => rank.clone(),
            ShapeTerm::List(d) => d.len().to_string(),
        }
    }

    /// Dim at a (possibly symbolic) zero-based position. Callers guarantee
    /// the position is in range.
    fn at(&self, idx: &str) -> String {
        match self {
            ShapeTerm::Fun { dims, .. } => format!("({dims} {idx})"),
            ShapeTerm::List(d) => {
                if let Ok(k) = idx.parse::<usize>() {
                    return d.get(k).cloned().unwrap_or_else(|| "1".into());
                }
                let mut t = "1".to_string();
                for (k, term) in d.iter().enumerate().rev() {
                    t = format!("(ite (= {idx} {k}) {term} {t})");
                }
                t
            }
        }
    }

    /// Dim at position `idx` of a shape right-aligned into `len` positions;
    /// missing leading dims read as 1.
    fn aligned_at(&self, idx: &str, len: &str) -> String {
        let off = format!("(- {idx} (- {len} {}))", self.rank());
        format!("(ite (>= {off} 0) {} 1)", self.at(&off))
    }
}

pub fn shape_dims(name: &str) -> String {
    sym(&format!("{name}_dims"))
}

pub fn shape_rank(name: &str) -> String {
    sym(&format!("{name}_rank"))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct TranslateConfig {
    /// Expand shape equalities with a statically known rank into per-dim
    /// equations instead of a quantified formula.
    pub unroll_shape_eq: bool,
}

impl Default for TranslateConfig {
    fn default() -> Self {
        TranslateConfig { unroll_shape_eq: true }
    }
}

/// Translation state shared by all assertions of one script: symbol
/// declarations, definitions of auxiliary shapes, and hole symbols.
pub struct Translator {
    pub config: TranslateConfig,
    pub decls: BTreeMap<String, String>,
    /// Definitional axioms for auxiliary symbols; always satisfiable.
    pub definitions: Vec<String>,
    holes: BTreeMap<SourceLoc, String>,
    cache: HashMap<ShapeExpr, ShapeTerm>,
    counter: usize,
}

/// Assign `hole_LINE_COL` symbols, disambiguating equal positions in
/// different files.
pub fn hole_symbols<'a>(holes: impl IntoIterator<Item = &'a SourceLoc>) -> BTreeMap<SourceLoc, String> {
    let mut out = BTreeMap::new();
    let mut used: BTreeMap<String, usize> = BTreeMap::new();
    for loc in holes {
        if out.contains_key(loc) {
            continue;
        }
        let base = format!("hole_{}_{}", loc.line, loc.column);
        let n = used.entry(base.clone()).or_insert(0);
        let name = if *n == 0 { base } else { format!("{base}_{n}") };
        *n += 1;
        out.insert(loc.clone(), name);
    }
    out
}

impl Translator {
    pub fn new(config: TranslateConfig, holes: BTreeMap<SourceLoc, String>) -> Self {
        let mut t = Translator {
            config,
            decls: BTreeMap::new(),
            definitions: vec![],
            holes: BTreeMap::new(),
            cache: HashMap::new(),
            counter: 0,
        };
        for (loc, name) in holes {
            t.decls.insert(name.clone(), format!("(declare-const {name} Int)"));
            t.holes.insert(loc, name);
        }
        t
    }

    pub fn hole_symbol(&self, loc: &SourceLoc) -> Option<&str> {
        self.holes.get(loc).map(|s| s.as_str())
    }

    pub fn declare_vars(&mut self, fv: &FreeVars) {
        for (v, sort) in &fv.vars {
            match sort {
                Sort::Int => {
                    let s = sym(v);
                    self.decls.entry(s.clone()).or_insert_with(|| format!("(declare-const {s} Int)"));
                }
                Sort::Bool => {
                    let s = sym(v);
                    self.decls.entry(s.clone()).or_insert_with(|| format!("(declare-const {s} Bool)"));
                }
                Sort::Shape => self.declare_shape(v),
            }
        }
        for loc in &fv.holes {
            if !self.holes.contains_key(loc) {
                let name = format!("hole_{}_{}", loc.line, loc.column);
                let name = if self.decls.contains_key(&name) { format!("{name}_{}", self.holes.len()) } else { name };
                self.decls.insert(name.clone(), format!("(declare-const {name} Int)"));
                self.holes.insert(loc.clone(), name);
            }
        }
    }

    fn declare_shape(&mut self, name: &str) {
        let (d, r) = (shape_dims(name), shape_rank(name));
        if !self.decls.contains_key(&d) {
            self.decls.insert(d.clone(), format!("(declare-fun {d} (Int) Int)"));
            self.decls.insert(r.clone(), format!("(declare-const {r} Int)"));
            self.definitions.push(format!("(>= {r} 0)"));
        }
    }

    fn fresh_shape(&mut self, tag: &str) -> ShapeTerm {
        self.counter += 1;
        let name = format!("${tag}{}", self.counter);
        self.declare_shape(&name);
        ShapeTerm::Fun { dims: shape_dims(&name), rank: shape_rank(&name) }
    }

    /// Give a shape a dims function, introducing a defined auxiliary one for
    /// a literal.
    fn as_fun(&mut self, s: ShapeTerm) -> ShapeTerm {
        match s {
            ShapeTerm::Fun { .. } => s,
            ShapeTerm::List(dims) => {
                let f = self.fresh_shape("l");
                let mut def = vec![format!("(= {} {})", f.rank(), dims.len())];
                for (k, d) in dims.iter().enumerate() {
                    def.push(format!("(= {} {d})", f.at(&k.to_string())));
                }
                self.definitions.push(conj(def));
                f
            }
        }
    }

    pub fn int(&mut self, e: &IntExpr, asm: &mut Vec<String>) -> String {
        match e {
            IntExpr::Lit(n) => lit(*n),
            IntExpr::Var(v) => sym(v),
            IntExpr::Hole(loc) => match self.holes.get(loc) {
                Some(h) => h.clone(),
                None => {
                    let mut fv = FreeVars::default();
                    fv.holes.insert(loc.clone());
                    self.declare_vars(&fv);
                    self.holes[loc].clone()
                }
            },
            IntExpr::Rank(s) => self.shape(s, asm).rank(),
            IntExpr::Dim(s, c) => {
                let s = self.shape(s, asm);
                match &s {
                    ShapeTerm::List(d) => match crate::constraints::dim_offset(d.len(), *c) {
                        Some(k) => d[k].clone(),
                        None => {
                            asm.push("false".into());
                            "0".into()
                        }
                    },
                    ShapeTerm::Fun { rank, .. } => {
                        if *c >= 0 {
                            asm.push(format!("(< {c} {rank})"));
                            s.at(&c.to_string())
                        } else {
                            asm.push(format!("(<= {} {rank})", -c));
                            s.at(&format!("(- {rank} {})", -c))
                        }
                    }
                }
            }
            IntExpr::Arith(op, a, b) => {
                let (a, b) = (self.int(a, asm), self.int(b, asm));
                match op {
                    ArithOp::Add => format!("(+ {a} {b})"),
                    ArithOp::Sub => format!("(- {a} {b})"),
                    ArithOp::Mul => format!("(* {a} {b})"),
                    ArithOp::Div => {
                        asm.push(format!("(not (= {b} 0))"));
                        format!("(ite (>= {b} 0) (div {a} {b}) (div (- {a}) (- {b})))")
                    }
                }
            }
        }
    }

    pub fn shape(&mut self, e: &ShapeExpr, asm: &mut Vec<String>) -> ShapeTerm {
        match e {
            ShapeExpr::Var(v) => {
                self.declare_shape(v);
                ShapeTerm::Fun { dims: shape_dims(v), rank: shape_rank(v) }
            }
            ShapeExpr::Lit(dims) => ShapeTerm::List(dims.iter().map(|d| self.int(d, asm)).collect()),
            ShapeExpr::Broadcast(a, b) => {
                let (x, y) = (self.shape(a, asm), self.shape(b, asm));
                if let (ShapeTerm::List(xs), ShapeTerm::List(ys)) = (&x, &y) {
                    let n = xs.len().max(ys.len());
                    let mut out = Vec::with_capacity(n);
                    for k in 0..n {
                        let p = (k + xs.len()).checked_sub(n).map_or("1".to_string(), |i| xs[i].clone());
                        let q = (k + ys.len()).checked_sub(n).map_or("1".to_string(), |i| ys[i].clone());
                        asm.push(format!("(or (= {p} {q}) (= {p} 1) (= {q} 1))"));
                        out.push(format!("(ite (>= {p} {q}) {p} {q})"));
                    }
                    return ShapeTerm::List(out);
                }
                let r = match self.cache.get(e) {
                    Some(r) => r.clone(),
                    None => {
                        let r = self.fresh_shape("b");
                        let (rr, rx, ry) = (r.rank(), x.rank(), y.rank());
                        let (p, q) = (x.aligned_at("i", &rr), y.aligned_at("i", &rr));
                        self.definitions.push(format!(
                            "(and (= {rr} (ite (>= {rx} {ry}) {rx} {ry})) (forall ((i Int)) (=> (and (<= 0 i) (< i {rr})) (= {} (ite (>= {p} {q}) {p} {q})))))",
                            r.at("i")
                        ));
                        self.cache.insert(e.clone(), r.clone());
                        r
                    }
                };
                let rr = r.rank();
                let (p, q) = (x.aligned_at("i", &rr), y.aligned_at("i", &rr));
                asm.push(format!("(forall ((i Int)) (=> (and (<= 0 i) (< i {rr})) (or (= {p} {q}) (= {p} 1) (= {q} 1))))"));
                r
            }
        }
    }

    pub fn boolean(&mut self, e: &BoolExpr, asm: &mut Vec<String>) -> String {
        match e {
            BoolExpr::True => "true".into(),
            BoolExpr::False => "false".into(),
            BoolExpr::Var(v) => sym(v),
            BoolExpr::Not(b) => format!("(not {})", self.boolean(b, asm)),
            BoolExpr::And(items) => {
                let parts: Vec<String> = items.iter().map(|b| self.boolean(b, asm)).collect();
                format!("(and {})", parts.join(" "))
            }
            BoolExpr::Or(items) => {
                let parts: Vec<String> = items.iter().map(|b| self.boolean(b, asm)).collect();
                format!("(or {})", parts.join(" "))
            }
            BoolExpr::IntEq(a, b) => format!("(= {} {})", self.int(a, asm), self.int(b, asm)),
            BoolExpr::BoolEq(a, b) => format!("(= {} {})", self.boolean(a, asm), self.boolean(b, asm)),
            BoolExpr::IntRel(op, a, b) => {
                let op = match op {
                    RelOp::Gt => ">",
                    RelOp::Ge => ">=",
                    RelOp::Lt => "<",
                    RelOp::Le => "<=",
                };
                format!("({op} {} {})", self.int(a, asm), self.int(b, asm))
            }
            BoolExpr::ShapeEq(a, b) => {
                let (x, y) = (self.shape(a, asm), self.shape(b, asm));
                self.shape_eq(x, y)
            }
        }
    }

    fn shape_eq(&mut self, x: ShapeTerm, y: ShapeTerm) -> String {
        let known = match (&x, &y) {
            (ShapeTerm::List(d), _) | (_, ShapeTerm::List(d)) => Some(d.len()),
            _ => None,
        };
        match known {
            Some(n) if self.config.unroll_shape_eq => {
                let mut parts = vec![format!("(= {} {})", x.rank(), y.rank())];
                if let (ShapeTerm::List(a), ShapeTerm::List(b)) = (&x, &y) {
                    if a.len() != b.len() {
                        return "false".into();
                    }
                    parts.clear();
                }
                for k in 0..n {
                    let k = k.to_string();
                    parts.push(format!("(= {} {})", x.at(&k), y.at(&k)));
                }
                conj(parts)
            }
            _ => {
                let (x, y) = (self.as_fun(x), self.as_fun(y));
                format!(
                    "(and (= {} {}) (forall ((i Int)) (=> (and (<= 0 i) (< i {})) (= {} {}))))",
                    x.rank(),
                    y.rank(),
                    x.rank(),
                    x.at("i"),
                    y.at("i")
                )
            }
        }
    }

    /// `guard ∧ A_guard ⇒ body ∧ A_body`, or just the body side when the
    /// guard is trivially true.
    pub fn guarded(&mut self, guard: &BoolExpr, body: &BoolExpr) -> String {
        let mut fv = FreeVars::of_bool(guard);
        fv.bool(body);
        self.declare_vars(&fv);
        let mut ab = Vec::new();
        let b = self.boolean(body, &mut ab);
        ab.insert(0, b);
        if *guard == BoolExpr::True {
            return conj(ab);
        }
        let mut ag = Vec::new();
        let g = self.boolean(guard, &mut ag);
        ag.insert(0, g);
        format!("(=> {} {})", conj(ag), conj(ab))
    }

    /// A formula asserted outright together with its assumptions.
    pub fn formula(&mut self, b: &BoolExpr) -> String {
        self.guarded(&BoolExpr::True, b)
    }
}

fn lit(n: i64) -> String {
    if n < 0 {
        format!("(- {})", n.unsigned_abs())
    } else {
        n.to_string()
    }
}

pub fn conj(mut parts: Vec<String>) -> String {
    parts.retain(|p| p != "true");
    parts.dedup();
    match parts.len() {
        0 => "true".into(),
        1 => parts.pop().unwrap(),
        _ => format!("(and {})", parts.join(" ")),
    }
}
