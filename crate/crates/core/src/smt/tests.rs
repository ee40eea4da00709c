use super::*;
use crate::constraints::{BoolExpr, IntExpr, ShapeExpr};
use crate::frontend::SourceLoc;
use std::time::Duration;

fn tr() -> Translator {
    Translator::new(TranslateConfig::default(), Default::default())
}

#[test]
fn positive_dim_reads_from_front() {
    let mut t = tr();
    let mut asm = vec![];
    let term = t.int(&IntExpr::dim(ShapeExpr::var("s"), 1), &mut asm);
    assert_eq!(term, "(s_dims 1)");
    assert_eq!(asm, ["(< 1 s_rank)"]);
}

#[test]
fn negative_dim_reads_from_back() {
    let mut t = tr();
    let mut asm = vec![];
    let term = t.int(&IntExpr::dim(ShapeExpr::var("s"), -1), &mut asm);
    assert_eq!(term, "(s_dims (- s_rank 1))");
    assert_eq!(asm, ["(<= 1 s_rank)"]);
}

#[test]
fn holes_are_named_by_position() {
    let loc = SourceLoc { file: "tmp.tfit".into(), line: 2, column: 19 };
    let names = hole_symbols([&loc]);
    let mut t = Translator::new(TranslateConfig::default(), names);
    assert_eq!(t.int(&IntExpr::Hole(loc), &mut vec![]), "hole_2_19");
    assert!(t.decls.contains_key("hole_2_19"));
}

#[test]
fn shape_equality_with_known_rank_is_unrolled() {
    let mut t = tr();
    let f = t.formula(&BoolExpr::ShapeEq(ShapeExpr::var("s"), ShapeExpr::Lit(vec![IntExpr::var("a"), IntExpr::var("b")])));
    assert_eq!(f, "(and (= s_rank 2) (= (s_dims 0) a) (= (s_dims 1) b))");
}

#[test]
fn shape_equality_of_unknown_ranks_is_quantified() {
    let mut t = tr();
    let f = t.formula(&BoolExpr::ShapeEq(ShapeExpr::var("s"), ShapeExpr::var("u")));
    assert!(f.contains("forall"), "{f}");
    let mut q = Translator::new(TranslateConfig { unroll_shape_eq: false }, Default::default());
    let f = q.formula(&BoolExpr::ShapeEq(ShapeExpr::var("s"), ShapeExpr::lit([1])));
    assert!(f.contains("forall"), "{f}");
}

#[test]
fn guard_and_body_assumptions_are_scoped() {
    let mut t = tr();
    let g = BoolExpr::IntEq(IntExpr::dim(ShapeExpr::var("g"), 0), IntExpr::Lit(1));
    let b = BoolExpr::IntEq(IntExpr::dim(ShapeExpr::var("s"), 2), IntExpr::Lit(3));
    let f = t.guarded(&g, &b);
    assert_eq!(f, "(=> (and (= (g_dims 0) 1) (< 0 g_rank)) (and (= (s_dims 2) 3) (< 2 s_rank)))");
}

#[test]
fn division_is_floor_with_nonzero_divisor() {
    let mut t = tr();
    let mut asm = vec![];
    let term = t.int(&IntExpr::arith(crate::constraints::ArithOp::Div, IntExpr::var("a"), IntExpr::var("b")), &mut asm);
    assert!(term.starts_with("(ite (>= b 0) (div a b)"), "{term}");
    assert_eq!(asm, ["(not (= b 0))"]);
}

#[test]
fn symbols_are_quoted_when_needed() {
    assert_eq!(sym("s4a"), "s4a");
    assert_eq!(sym("4a"), "|4a|");
    assert_eq!(sym("a b"), "|a b|");
}

#[test]
fn lint_accepts_translated_scripts_and_rejects_unbounded_dims() {
    let mut t = tr();
    let f = t.formula(&BoolExpr::IntEq(
        IntExpr::dim(ShapeExpr::broadcast(ShapeExpr::var("x"), ShapeExpr::var("y")), -1),
        IntExpr::dim(ShapeExpr::var("x"), 0),
    ));
    let script = SmtScript::build(&t, vec![(Tag::Constraint(0), f)]);
    script.lint().unwrap();
    let mut bad = SmtScript::default();
    bad.push(Tag::Constraint(0), "(= (x_dims 3) 1)".into());
    assert!(bad.lint().is_err());
}

#[test]
fn script_layout() {
    let mut t = tr();
    let f = t.formula(&BoolExpr::IntEq(IntExpr::var("n"), IntExpr::Lit(-2)));
    let text = SmtScript::build(&t, vec![(Tag::Constraint(0), f)]).to_smtlib();
    assert!(text.contains("(set-logic UFNIA)"));
    assert!(text.contains("(declare-const n Int)"));
    assert!(text.contains("(assert (! (= n (- 2)) :named a0))"));
}

#[test]
fn model_and_core_parsing() {
    let m = solver::parse_model("(model (define-fun x () Int 4) (define-fun f ((a Int)) Int a) (define-fun b () Bool true))").unwrap();
    assert_eq!(m.len(), 1);
    assert_eq!(m["x"], 4);
    assert_eq!(solver::parse_core("(a1 a3)").unwrap(), ["a1", "a3"]);
}

#[test]
fn missing_solver_is_reported() {
    let s = Solver::new("definitely-not-a-solver-binary", Duration::from_secs(1));
    assert!(matches!(s.check(&SmtScript::default(), false, false), Err(SolverError::NotFound(..))));
}

#[test]
fn empty_script_is_sat() {
    let v = Solver::default().check(&SmtScript::default(), true, true).unwrap();
    assert_eq!(v.status, Status::Sat);
}

#[test]
fn unsat_core_names_the_conflict() {
    let mut t = tr();
    let a = t.formula(&BoolExpr::IntEq(IntExpr::var("n"), IntExpr::Lit(1)));
    let b = t.formula(&BoolExpr::IntEq(IntExpr::var("m"), IntExpr::Lit(5)));
    let c = t.formula(&BoolExpr::IntEq(IntExpr::var("n"), IntExpr::Lit(2)));
    let script = SmtScript::build(&t, vec![(Tag::Constraint(0), a), (Tag::Constraint(1), b), (Tag::Constraint(2), c)]);
    let v = Solver::default().check(&script, true, false).unwrap();
    assert_eq!(v.status, Status::Unsat);
    let mut tags: Vec<_> = v.core.iter().filter_map(|n| script.tag_of(n)).filter(|t| **t != Tag::Definition).collect();
    tags.sort_by_key(|t| format!("{t:?}"));
    assert_eq!(tags, [&Tag::Constraint(0), &Tag::Constraint(2)]);
}

#[test]
fn solver_errors_are_not_verdicts() {
    let mut script = SmtScript::default();
    script.push(Tag::Constraint(0), "(= undeclared 1)".into());
    assert!(matches!(Solver::default().check(&script, false, false), Err(SolverError::Protocol(_))));
    let failing = Solver::new("false", Duration::from_secs(2));
    assert!(matches!(failing.check(&SmtScript::default(), false, false), Err(SolverError::NonZeroExit { .. })));
}

#[test]
fn timeout_is_a_status() {
    let slow = Solver::new("sleep 5", Duration::from_millis(200));
    let v = slow.check(&SmtScript::default(), false, false).unwrap();
    assert_eq!(v.status, Status::Timeout);
}
