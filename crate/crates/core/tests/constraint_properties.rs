use std::collections::BTreeMap;

use proptest::prelude::*;
use tfit::constraints::eval::{Env, Value};
use tfit::constraints::*;
use tfit::frontend::SourceLoc;

fn arb_int() -> impl Strategy<Value = IntExpr> {
    let leaf = prop_oneof![(-4i64..12).prop_map(IntExpr::Lit), prop::sample::select(vec!["n0", "n1"]).prop_map(IntExpr::var)];
    leaf.prop_recursive(3, 24, 3, |inner| {
        prop_oneof![
            (prop::sample::select(vec![ArithOp::Add, ArithOp::Sub, ArithOp::Mul, ArithOp::Div]), inner.clone(), inner.clone())
                .prop_map(|(op, a, b)| IntExpr::arith(op, a, b)),
            shape_over(inner.clone()).prop_map(IntExpr::rank),
            (shape_over(inner), -3i64..3).prop_map(|(s, i)| IntExpr::dim(s, i)),
        ]
    })
}

fn shape_over(int: BoxedStrategy<IntExpr>) -> impl Strategy<Value = ShapeExpr> {
    let base = prop_oneof![
        prop::sample::select(vec!["s0", "s1"]).prop_map(ShapeExpr::var),
        prop::collection::vec(int, 0..3).prop_map(ShapeExpr::Lit),
    ];
    base.prop_recursive(1, 4, 2, |inner| (inner.clone(), inner).prop_map(|(a, b)| ShapeExpr::broadcast(a, b)))
}

fn arb_shape() -> impl Strategy<Value = ShapeExpr> {
    shape_over(arb_int().boxed())
}

fn arb_bool() -> impl Strategy<Value = BoolExpr> {
    let leaf = prop_oneof![
        Just(BoolExpr::True),
        Just(BoolExpr::False),
        Just(BoolExpr::Var("b0".into())),
        (arb_int(), arb_int()).prop_map(|(a, b)| BoolExpr::IntEq(a, b)),
        (arb_shape(), arb_shape()).prop_map(|(a, b)| BoolExpr::ShapeEq(a, b)),
        (prop::sample::select(vec![RelOp::Gt, RelOp::Ge, RelOp::Lt, RelOp::Le]), arb_int(), arb_int())
            .prop_map(|(op, a, b)| BoolExpr::IntRel(op, a, b)),
    ];
    leaf.prop_recursive(2, 12, 3, |inner| {
        prop_oneof![
            inner.clone().prop_map(BoolExpr::not),
            prop::collection::vec(inner.clone(), 1..4).prop_map(BoolExpr::And),
            prop::collection::vec(inner.clone(), 1..4).prop_map(BoolExpr::Or),
            (inner.clone(), inner).prop_map(|(a, b)| BoolExpr::BoolEq(Box::new(a), Box::new(b))),
        ]
    })
}

fn arb_env() -> impl Strategy<Value = Env> {
    (
        0i64..6,
        0i64..6,
        prop::collection::vec(1i64..4, 0..4),
        prop::collection::vec(1i64..4, 0..4),
        any::<bool>(),
    )
        .prop_map(|(n0, n1, s0, s1, b0)| Env {
            vars: BTreeMap::from([
                ("n0".to_string(), Value::Int(n0)),
                ("n1".to_string(), Value::Int(n1)),
                ("s0".to_string(), Value::Shape(s0)),
                ("s1".to_string(), Value::Shape(s1)),
                ("b0".to_string(), Value::Bool(b0)),
            ]),
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn folding_preserves_valuation(e in arb_bool(), env in arb_env()) {
        if let Some(v) = env.bool(&e) {
            prop_assert_eq!(env.bool(&simplify_bool(&e)), Some(v));
        }
    }

    #[test]
    fn folding_preserves_int_valuation(e in arb_int(), env in arb_env()) {
        if let Some(v) = env.int(&e) {
            prop_assert_eq!(env.int(&simplify_int(&e)), Some(v));
        }
    }

    #[test]
    fn folding_is_idempotent(e in arb_bool()) {
        let once = simplify_bool(&e);
        prop_assert_eq!(simplify_bool(&once), once);
    }

    #[test]
    fn substitution_commutes_with_evaluation(
        e in arb_bool(),
        n0 in arb_int(),
        s1 in arb_shape(),
        env in arb_env(),
    ) {
        let map = Bindings::from([
            ("n0".to_string(), AnyExpr::Int(n0.clone())),
            ("s1".to_string(), AnyExpr::Shape(s1.clone())),
        ]);
        let (Some(n0v), Some(s1v)) = (env.int(&n0), env.shape(&s1)) else { return Ok(()) };
        let mut shifted = env.clone();
        shifted.vars.insert("n0".into(), Value::Int(n0v));
        shifted.vars.insert("s1".into(), Value::Shape(s1v));
        let substituted = substitute_bool(&e, &map).unwrap();
        prop_assert_eq!(env.bool(&substituted), shifted.bool(&e));
    }

    #[test]
    fn empty_substitution_is_identity(e in arb_bool()) {
        prop_assert_eq!(substitute_bool(&e, &Bindings::new()).unwrap(), e);
    }

    #[test]
    fn elimination_is_sound_for_satisfying_environments(
        defs in prop::collection::vec((arb_int(), arb_shape()), 1..3),
        extra in prop::collection::vec(arb_bool(), 0..4),
        env in arb_env(),
    ) {
        let mut env = env;
        let mut system = Vec::new();
        let loc = SourceLoc::dummy();
        for (i, (n, s)) in defs.iter().enumerate() {
            if let (Some(nv), Some(sv)) = (env.int(n), env.shape(s)) {
                env.vars.insert(format!("t{i}"), Value::Int(nv));
                env.vars.insert(format!("u{i}"), Value::Shape(sv));
                system.push(GuardedConstraint::new(BoolExpr::True, BoolExpr::IntEq(IntExpr::var(format!("t{i}")), n.clone()), loc.clone(), OriginKind::UserAssert));
                system.push(GuardedConstraint::new(BoolExpr::True, BoolExpr::ShapeEq(s.clone(), ShapeExpr::var(format!("u{i}"))), loc.clone(), OriginKind::UserAssert));
            }
        }
        for b in extra {
            if env.bool(&b) == Some(true) {
                system.push(GuardedConstraint::new(BoolExpr::True, b, loc.clone(), OriginKind::UserAssert));
            }
        }
        let (rest, bindings) = eliminate_equalities(system);
        for c in &rest {
            prop_assert_ne!(env.bool(&c.body), Some(false), "reduced constraint {} fails", c);
        }
        for (v, e) in &bindings {
            if let Some(value) = env.any(e) {
                prop_assert_eq!(Some(&value), env.vars.get(v), "binding {} = {}", v, e);
            }
        }
    }
}
