//! Brute-force comparison of the broadcast encoding with a direct
//! implementation of the broadcasting rule.

use std::io::{BufRead, BufReader, Write};
use std::process::{Child, ChildStdin, ChildStdout, Command, Stdio};

use tfit::constraints::{BoolExpr, IntExpr, ShapeExpr};
use tfit::smt::{TranslateConfig, Translator};

/// Broadcast by the textbook rule: align from the right, a missing dim
/// counts as 1, dims must agree unless one is 1.
pub fn reference(a: &[i64], b: &[i64]) -> Option<Vec<i64>> {
    let n = a.len().max(b.len());
    let mut out = vec![0; n];
    for k in 1..=n {
        let x = if k <= a.len() { a[a.len() - k] } else { 1 };
        let y = if k <= b.len() { b[b.len() - k] } else { 1 };
        out[n - k] = match (x, y) {
            (x, y) if x == y => x,
            (1, y) => y,
            (x, 1) => x,
            _ => return None,
        };
    }
    Some(out)
}

/// Every shape of rank at most `max_rank` with dims in `1..=max_dim`.
pub fn all_shapes(max_rank: usize, max_dim: i64) -> Vec<Vec<i64>> {
    let mut out = vec![vec![]];
    let mut layer = vec![vec![]];
    for _ in 0..max_rank {
        layer = layer
            .iter()
            .flat_map(|s: &Vec<i64>| {
                (1..=max_dim).map(move |d| {
                    let mut t = s.clone();
                    t.push(d);
                    t
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out
}

fn lit(dims: &[i64]) -> ShapeExpr {
    ShapeExpr::Lit(dims.iter().map(|&d| IntExpr::Lit(d)).collect())
}

fn var(prefix: &str, i: usize) -> ShapeExpr {
    ShapeExpr::var(format!("s{prefix}{i}"))
}

/// Broadcast of shape variables bound to the two operands.
fn through_vars(i: usize, a: &[i64], b: &[i64]) -> BoolExpr {
    BoolExpr::And(vec![
        BoolExpr::ShapeEq(var("a", i), lit(a)),
        BoolExpr::ShapeEq(var("b", i), lit(b)),
        BoolExpr::ShapeEq(var("r", i), ShapeExpr::broadcast(var("a", i), var("b", i))),
    ])
}

/// Broadcast of the literals themselves.
fn through_literals(i: usize, a: &[i64], b: &[i64]) -> BoolExpr {
    BoolExpr::ShapeEq(var("q", i), ShapeExpr::broadcast(lit(a), lit(b)))
}

/// One z3 process answering `check-sat` for scoped scripts.
struct Incremental {
    child: Child,
    input: ChildStdin,
    output: BufReader<ChildStdout>,
}

impl Incremental {
    fn start() -> Self {
        let mut child = Command::new("z3")
            .args(["-in", "-smt2"])
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .spawn()
            .expect("z3 on PATH");
        let input = child.stdin.take().unwrap();
        let output = BufReader::new(child.stdout.take().unwrap());
        let mut z = Incremental { child, input, output };
        z.send("(set-option :print-success false)\n(set-logic UFNIA)\n");
        z
    }

    fn send(&mut self, text: &str) {
        self.input.write_all(text.as_bytes()).and_then(|_| self.input.flush()).expect("z3 accepts input");
    }

    fn check(&mut self) -> String {
        self.send("(check-sat)\n");
        let mut line = String::new();
        self.output.read_line(&mut line).expect("z3 answers");
        line.trim().to_string()
    }

    /// Declarations, definitions and `formulas` of one translator in a
    /// fresh scope; `then` runs inside the scope.
    fn scoped(&mut self, tr: &Translator, formulas: &[String], then: impl FnOnce(&mut Self) -> bool) -> bool {
        self.send("(push 1)\n");
        for d in tr.decls.values() {
            self.send(&format!("{d}\n"));
        }
        for f in tr.definitions.iter().chain(formulas) {
            self.send(&format!("(assert {f})\n"));
        }
        let ok = then(self);
        self.send("(pop 1)\n");
        ok
    }
}

impl Drop for Incremental {
    fn drop(&mut self) {
        let _ = self.input.write_all(b"(exit)\n").and_then(|_| self.input.flush());
        let _ = self.child.wait();
    }
}

/// Disagreements between the encoding and [`reference`] over all ordered
/// pairs of the given shapes, both through shape variables and directly on
/// literals.
pub fn mismatches(shapes: &[Vec<i64>], config: TranslateConfig) -> Vec<String> {
    let mut z3 = Incremental::start();
    let mut bad = Vec::new();
    for a in shapes {
        for b in shapes {
            let mut tr = Translator::new(config, Default::default());
            let defs = [tr.formula(&through_vars(0, a, b)), tr.formula(&through_literals(0, a, b))];
            let ok = match reference(a, b) {
                Some(c) => {
                    let expect = BoolExpr::And(vec![BoolExpr::ShapeEq(var("r", 0), lit(&c)), BoolExpr::ShapeEq(var("q", 0), lit(&c))]);
                    let wrong = format!("(not {})", tr.formula(&expect));
                    z3.scoped(&tr, &defs, |z| {
                        let admitted = z.check() == "sat";
                        z.send(&format!("(assert {wrong})\n"));
                        admitted && z.check() == "unsat"
                    })
                }
                None => {
                    let either = [format!("(or {})", defs.join(" "))];
                    z3.scoped(&tr, &either, |z| z.check() == "unsat")
                }
            };
            if !ok {
                bad.push(format!("broadcast({a:?}, {b:?})"));
            }
        }
    }
    bad
}
