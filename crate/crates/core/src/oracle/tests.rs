use super::*;
use crate::frontend::parse_source;

fn run(src: &str) -> Result<ConcreteValue, Failure> {
    interpret(&parse_source(src, "t.tfit").unwrap(), "main", vec![])
}

const MATMUL: &str = "func matmul(x: Tensor, y: Tensor) -> Tensor {
  assert(x.shape[1] == y.shape[0])
  let r = tf_matmul(x, y)
  assert(r.shape == [x.shape[0], y.shape[1]])
  return r
}

let x = randn([20, 10])
let y = randn([30, 10])
let z = matmul(x, y)
";

fn failed_line(r: Result<ConcreteValue, Failure>) -> u32 {
    match r {
        Err(Failure::Assert(loc)) => loc.line,
        other => panic!("expected an assertion failure, got {other:?}"),
    }
}

#[test]
fn matmul_mismatch_fails_at_assert() {
    assert_eq!(failed_line(run(MATMUL)), 2);
}

#[test]
fn matmul_with_transposed_operand_succeeds() {
    assert_eq!(run(&MATMUL.replace("[30, 10]", "[10, 30]")), Ok(UNIT));
}

#[test]
fn broadcast_inside_assert() {
    assert!(run("assert(broadcast([3, 1], [1, 5]) == [3, 5])\n").is_ok());
    assert!(matches!(run("let s = broadcast([3, 2], [4])\n"), Err(Failure::Broadcast(_))));
}

#[test]
fn shape_assert_operator() {
    assert!(run("let a = randn([2, 3]) |-> [2, 3]\n").is_ok());
    assert_eq!(failed_line(run("let n = 1\nlet a = randn([2, 3]) |-> [2, 4]\n")), 2);
}

#[test]
fn function_results_and_tuples() {
    let src = "func pair(a: Int) -> (Int, Int) { return (a, a * 2) }\nlet p = pair(4)\nassert(p.1 == 8)\n";
    assert!(run(src).is_ok());
    let f = parse_source("func id(t: Tensor) -> Shape { return t.shape }", "t.tfit").unwrap();
    assert_eq!(interpret(&f, "id", vec![ConcreteValue::Tensor(vec![2, 5])]), Ok(ConcreteValue::Shape(vec![2, 5])));
}

#[test]
fn holes_and_division_errors() {
    assert!(matches!(run("let k = ____\n"), Err(Failure::Hole(_))));
    assert!(matches!(run("let k = (0 - 4) / 2\n"), Err(Failure::NegativeDivision(_))));
    assert!(matches!(run("let k = 4 / 0\n"), Err(Failure::DivisionByZero(_))));
    assert!(run("assert(7 / 2 == 3)\n").is_ok());
}

#[test]
fn loops_run_and_are_bounded() {
    let src = "var x = randn([1])\nfor i in 0..<5 {\n  x = randn([x.shape[0] * 2])\n}\nassert(x.shape[0] == 32)\n";
    assert!(run(src).is_ok());
    let p = parse_source("for i in 0..<100000 {\n  assert(true)\n}\n", "t.tfit").unwrap();
    assert_eq!(interpret(&p, "main", vec![]), Err(Failure::BudgetExceeded));
    assert!(interpret_with_budget(&p, "main", vec![], 200_000).is_ok());
}

#[test]
fn logic_evaluates_both_operands() {
    assert!(matches!(run("let s = [2]\nassert(false && s[3] == 1)\n"), Err(Failure::IndexOutOfRange(_))));
}

#[test]
fn negative_indices_count_from_the_end() {
    assert!(run("let s = [2, 3, 4]\nassert(s[-1] == 4 && s[-3] == 2)\n").is_ok());
}

#[test]
fn opaque_operations() {
    use ConcreteValue::*;
    let t = |d: &[i64]| Tensor(d.to_vec());
    assert_eq!(opaque_shape(OpaqueOp::MatMul, &[t(&[2, 3]), t(&[3, 4])]), Some(vec![2, 4]));
    assert_eq!(opaque_shape(OpaqueOp::MatMul, &[t(&[2, 3]), t(&[4, 4])]), None);
    assert_eq!(opaque_shape(OpaqueOp::Add, &[t(&[3, 1]), t(&[5])]), Some(vec![3, 5]));
    assert_eq!(opaque_shape(OpaqueOp::Flatten, &[t(&[12, 8, 8, 5])]), Some(vec![12, 320]));
    assert_eq!(opaque_shape(OpaqueOp::Transpose, &[t(&[2, 3])]), Some(vec![3, 2]));
    let s2 = Tuple(vec![Int(2), Int(2)]);
    assert_eq!(opaque_shape(OpaqueOp::Conv2d, &[t(&[12, 32, 32, 3]), t(&[2, 2, 3, 5]), s2.clone()]), Some(vec![12, 16, 16, 5]));
    assert_eq!(opaque_shape(OpaqueOp::MaxPool2d, &[t(&[12, 16, 16, 5]), s2.clone(), s2]), Some(vec![12, 8, 8, 5]));
    assert_eq!(opaque_shape(OpaqueOp::Reshape, &[t(&[4, 3]), Shape(vec![2, 6])]), Some(vec![2, 6]));
    assert_eq!(opaque_shape(OpaqueOp::Reshape, &[t(&[4, 3]), Shape(vec![5])]), None);
}
