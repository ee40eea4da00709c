//! Random loop-free programs over concrete shapes.

use rand::seq::SliceRandom;
use rand::Rng;

pub const PRELUDE: &str = "func matmul(x: Tensor, y: Tensor) -> Tensor {
  assert(x.rank == 2 && y.rank == 2)
  assert(x.shape[1] == y.shape[0])
  return tf_matmul(x, y) |-> [x.shape[0], y.shape[1]]
}

func add(a: Tensor, b: Tensor) -> Tensor {
  return tf_add(a, b) |-> broadcast(a.shape, b.shape)
}

func transpose(x: Tensor) -> Tensor {
  assert(x.rank == 2)
  return tf_transpose(x) |-> [x.shape[1], x.shape[0]]
}

func flatten(x: Tensor) -> Tensor {
  assert(x.rank == 3)
  return tf_flatten(x) |-> [x.shape[0], x.shape[1] * x.shape[2]]
}

func choose(k: Int, a: Tensor, b: Tensor) -> Tensor {
  if k > 0 {
    return a
  } else {
    return b
  }
}

func widen(x: Tensor, n: Int) -> Tensor {
  assert(x.rank == 2)
  return tf_matmul(x, randn([x.shape[1], n])) |-> [x.shape[0], n]
}
";

/// Number of lines in [`PRELUDE`]; generated statements start after it.
pub fn prelude_lines() -> usize {
    PRELUDE.lines().count()
}

struct Gen<'r, R: Rng> {
    rng: &'r mut R,
    tensors: Vec<(String, Vec<i64>)>,
    ints: Vec<(String, i64)>,
    lines: Vec<String>,
}

fn lit(dims: &[i64]) -> String {
    let parts: Vec<String> = dims.iter().map(|d| d.to_string()).collect();
    format!("[{}]", parts.join(", "))
}

fn broadcast(a: &[i64], b: &[i64]) -> Vec<i64> {
    let n = a.len().max(b.len());
    (0..n)
        .map(|k| {
            let x = if k + a.len() >= n { a[k + a.len() - n] } else { 1 };
            let y = if k + b.len() >= n { b[k + b.len() - n] } else { 1 };
            x.max(y)
        })
        .collect()
}

impl<R: Rng> Gen<'_, R> {
    fn shape(&mut self, rank: usize) -> Vec<i64> {
        (0..rank).map(|_| self.rng.gen_range(1..=4)).collect()
    }

    fn dim(&mut self) -> i64 {
        self.rng.gen_range(1..=4)
    }

    /// Usually `want`, sometimes a random nearby value.
    fn maybe(&mut self, want: i64) -> i64 {
        if self.rng.gen_bool(0.85) {
            want
        } else {
            self.dim()
        }
    }

    fn pick(&mut self, rank: Option<usize>) -> Option<(String, Vec<i64>)> {
        let c: Vec<_> = self.tensors.iter().filter(|(_, s)| rank.is_none_or(|r| s.len() == r)).cloned().collect();
        c.choose(self.rng).cloned()
    }

    fn bind(&mut self, expr: String, shape: Vec<i64>) {
        let name = format!("t{}", self.tensors.len());
        self.lines.push(format!("let {name} = {expr}"));
        self.tensors.push((name, shape));
    }

    fn statement(&mut self) {
        match self.rng.gen_range(0..11) {
            0 => {
                let r = self.rng.gen_range(1..=3);
                let s = self.shape(r);
                self.bind(format!("randn({})", lit(&s)), s);
            }
            1 => {
                let Some((a, sa)) = self.pick(Some(2)) else { return self.fresh(2) };
                let k = self.maybe(sa[1]);
                let n = self.dim();
                let other = self.tensors.iter().find(|(_, s)| s.len() == 2 && s[0] == k).cloned();
                let (b, sb) = match other {
                    Some(o) if self.rng.gen_bool(0.5) => o,
                    _ => (format!("randn({})", lit(&[k, n])), vec![k, n]),
                };
                self.bind(format!("matmul({a}, {b})"), vec![sa[0], sb[1]]);
            }
            2 => {
                let Some((a, sa)) = self.pick(None) else { return self.fresh(2) };
                let mut sb: Vec<i64> = sa.iter().map(|&d| if self.rng.gen_bool(0.3) { 1 } else { d }).collect();
                if self.rng.gen_bool(0.3) && !sb.is_empty() {
                    sb.remove(0);
                }
                if self.rng.gen_bool(0.1) {
                    sb = self.shape(sa.len());
                }
                let out = broadcast(&sa, &sb);
                self.bind(format!("add({a}, randn({}))", lit(&sb)), out);
            }
            3 => {
                let Some((a, sa)) = self.pick(Some(2)) else { return self.fresh(2) };
                self.bind(format!("transpose({a})"), vec![sa[1], sa[0]]);
            }
            4 => {
                let Some((a, sa)) = self.pick(Some(3)) else { return self.fresh(3) };
                self.bind(format!("flatten({a})"), vec![sa[0], sa[1] * sa[2]]);
            }
            5 => {
                let (Some((a, sa)), Some((b, sb))) = (self.pick(None), self.pick(None)) else { return self.fresh(1) };
                let k = self.rng.gen_range(-2..=2);
                let s = if k > 0 { sa } else { sb };
                self.bind(format!("choose({k}, {a}, {b})"), s);
            }
            6 => {
                let Some((a, sa)) = self.pick(Some(2)) else { return self.fresh(2) };
                let n = self.dim();
                self.bind(format!("widen({a}, {n})"), vec![sa[0], n]);
            }
            7 => {
                let Some((a, sa)) = self.pick(None) else { return self.fresh(1) };
                let want: Vec<i64> = sa.clone();
                let claimed: Vec<i64> = want.iter().map(|&d| self.maybe(d)).collect();
                self.bind(format!("{a} |-> {}", lit(&claimed)), want);
            }
            8 => {
                let line = self.assertion();
                self.lines.push(line);
            }
            9 => {
                let Some((a, sa)) = self.pick(None) else { return self.fresh(1) };
                if sa.is_empty() {
                    return;
                }
                let j = self.rng.gen_range(0..sa.len());
                let m = self.rng.gen_range(1..=3);
                let c = self.rng.gen_range(0..=2);
                let name = format!("n{}", self.ints.len());
                self.lines.push(format!("let {name} = {a}.shape[{j}] * {m} + {c}"));
                self.ints.push((name, sa[j] * m + c));
            }
            _ => {
                let x = self.rng.gen_range(0..=3);
                let y = self.rng.gen_range(0..=3);
                let body = self.assertion();
                self.lines.push(format!("if {x} > {y} {{"));
                self.lines.push(format!("  {body}"));
                self.lines.push("}".into());
            }
        }
    }

    fn fresh(&mut self, rank: usize) {
        let s = self.shape(rank);
        self.bind(format!("randn({})", lit(&s)), s);
    }

    fn assertion(&mut self) -> String {
        if let Some((n, v)) = self.ints.choose(self.rng).cloned() {
            if self.rng.gen_bool(0.3) {
                let w = if self.rng.gen_bool(0.8) { v } else { v + 1 };
                return format!("assert({n} == {w})");
            }
        }
        let Some((a, sa)) = self.pick(None) else { return "assert(true)".into() };
        match self.rng.gen_range(0..3) {
            0 => {
                let r = if self.rng.gen_bool(0.85) { sa.len() } else { self.rng.gen_range(1..=3) };
                format!("assert({a}.rank == {r})")
            }
            1 if !sa.is_empty() => {
                let j = self.rng.gen_range(0..sa.len()) as i64;
                let j = if self.rng.gen_bool(0.3) { j - sa.len() as i64 } else { j };
                let at = if j < 0 { sa[(sa.len() as i64 + j) as usize] } else { sa[j as usize] };
                let v = self.maybe(at);
                format!("assert({a}.shape[{j}] == {v})")
            }
            _ => {
                let claimed: Vec<i64> = sa.iter().map(|&d| self.maybe(d)).collect();
                format!("assert({a}.shape == {})", lit(&claimed))
            }
        }
    }
}

/// A program of `PRELUDE` followed by `len` random top-level statements.
pub fn program<R: Rng>(rng: &mut R, len: usize) -> String {
    let mut g = Gen { rng, tensors: vec![], ints: vec![], lines: vec![] };
    g.fresh(2);
    for _ in 0..len {
        g.statement();
    }
    format!("{PRELUDE}\n{}\n", g.lines.join("\n"))
}
