use super::*;
use crate::rng::Rng;
use proptest::prelude::*;

fn bind(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
    pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
}

#[test]
fn parse_variance_function_shape() {
    let e = parse("x*(1-x/n)").unwrap();
    let expected = Expr::mul(
        Expr::var("x"),
        Expr::sub(Expr::int(1), Expr::div(Expr::var("x"), Expr::var("n"))),
    );
    assert_eq!(e, expected);
}

#[test]
fn power_zero_eliminates_to_one() {
    assert_eq!(parse("x^0").unwrap(), Expr::int(1));
    assert_eq!(parse("x^1").unwrap(), Expr::var("x"));
}

#[test]
fn missing_paren_reports_offset_and_expected_set() {
    let err = parse("log(1-t").unwrap_err();
    match err {
        ParseError::Syntax {
            offset, expected, ..
        } => {
            assert_eq!(offset, 7);
            assert!(expected.contains(&"`)`"));
        }
        other => panic!("expected syntax error, got {other:?}"),
    }
}

#[test]
fn dangling_operator_reports_offset() {
    let err = parse("log(1-t)/").unwrap_err();
    assert_eq!(err.offset(), 9);
}

#[test]
fn unknown_function_is_rejected() {
    let err = parse("sinh(x)").unwrap_err();
    assert!(matches!(err, ParseError::UnknownFunction { ref name, offset: 0 } if name == "sinh"));
}

#[test]
fn unary_minus_binds_looser_than_power() {
    //  -x^2 must be -(x^2)
    let e = parse("-x^2").unwrap();
    assert_eq!(e, Expr::neg(Expr::powi(Expr::var("x"), 2)));
    // and x^-2 is a valid factor
    let p = parse("x^-2").unwrap();
    assert_eq!(p, Expr::powi(Expr::var("x"), -2));
}

#[test]
fn power_is_right_associative() {
    let e = parse("x^2^3").unwrap();
    // built as x^(2^3) = x^8 after folding of the constant tower
    assert_eq!(e, Expr::powi(Expr::var("x"), 8));
}

#[test]
fn symbolic_exponent_lowers_to_exp_log() {
    let e = parse("x^n").unwrap();
    assert_eq!(
        e,
        Expr::exp(Expr::mul(Expr::var("n"), Expr::log(Expr::var("x"))))
    );
    let v = e.eval(&bind(&[("x", 2.0), ("n", 10.0)])).unwrap();
    assert!((v - 1024.0).abs() < 1e-9);
}

#[test]
fn numeric_literals_are_exact_rationals() {
    let e = parse("1.5e-3").unwrap();
    assert_eq!(e.as_constant().unwrap(), &Number::from_ratio(3, 2000));
}

#[test]
fn diff_power_rule() {
    let e = parse("x^2").unwrap();
    assert_eq!(e.diff("x"), Expr::mul(Expr::int(2), Expr::var("x")));
}

#[test]
fn diff_product_rule_matches_expansion() {
    let e = parse("x*(a*x+b)").unwrap();
    let expanded = parse("2*a*x+b").unwrap();
    let domain = DomainBox::new()
        .with("x", 0.1, 3.0)
        .with("a", 0.1, 2.0)
        .with("b", 0.1, 2.0);
    assert!(equiv_numeric(&e.diff("x"), &expanded, &domain, 32, 1e-10).unwrap());
}

#[test]
fn diff_chain_rule_log() {
    let e = parse("log(1-x)").unwrap();
    let expected = parse("-1/(1-x)").unwrap();
    let domain = DomainBox::new().with("x", -0.9, 0.9);
    assert!(equiv_numeric(&e.diff("x"), &expected, &domain, 32, 1e-10).unwrap());
}

#[test]
fn diff_of_unrelated_variable_is_zero() {
    let e = parse("x*(1-x/n)").unwrap();
    assert_eq!(e.diff("q"), Expr::int(0));
}

#[test]
fn eval_examples() {
    let e = parse("x*(1-x/n)").unwrap();
    let v = e.eval(&bind(&[("x", 1.5), ("n", 5.0)])).unwrap();
    assert!((v - 1.05).abs() < 1e-15);

    assert_eq!(parse("exp(0)").unwrap(), Expr::int(1));

    let log = parse("log(x)").unwrap();
    match log.eval(&bind(&[("x", 0.0)])) {
        Err(EvalError::Domain { subtree, .. }) => assert_eq!(subtree, "log(x)"),
        other => panic!("expected domain error, got {other:?}"),
    }
}

#[test]
fn eval_unbound_variable() {
    let e = parse("x+y").unwrap();
    assert_eq!(
        e.eval(&bind(&[("x", 1.0)])),
        Err(EvalError::UnboundVariable { name: "y".into() })
    );
}

#[test]
fn division_by_zero_points_at_subtree() {
    let e = parse("1/(1-x)").unwrap();
    match e.eval(&bind(&[("x", 1.0)])) {
        Err(EvalError::Domain { what, subtree }) => {
            assert!(what.contains("division"));
            assert_eq!(subtree, "1/(1-x)");
        }
        other => panic!("expected domain error, got {other:?}"),
    }
}

#[test]
fn equiv_accepts_algebraic_identity() {
    let a = parse("(x+1)^2").unwrap();
    let b = parse("x^2+2*x+1").unwrap();
    let domain = DomainBox::new().with("x", 0.0, 10.0);
    assert!(equiv_numeric(&a, &b, &domain, 32, 1e-10).unwrap());
}

#[test]
fn equiv_rejects_small_perturbation() {
    let a = parse("x").unwrap();
    let b = parse("x+1e-3").unwrap();
    let domain = DomainBox::new().with("x", 0.0, 1.0);
    assert!(!equiv_numeric(&a, &b, &domain, 32, 1e-10).unwrap());
}

#[test]
fn equiv_fails_when_domain_never_valid() {
    let a = parse("log(-1-x^2)").unwrap();
    let b = parse("x").unwrap();
    let domain = DomainBox::new().with("x", 0.0, 1.0);
    assert!(equiv_numeric(&a, &b, &domain, 8, 1e-10).is_err());
}

#[test]
fn subst_is_simultaneous() {
    // x -> x/2 must not cascade into the substituted tree.
    let e = parse("x+x").unwrap();
    let mut map = BTreeMap::new();
    map.insert("x".to_string(), parse("x/2").unwrap());
    let s = e.subst(&map);
    let v = s.eval(&bind(&[("x", 4.0)])).unwrap();
    assert!((v - 4.0).abs() < 1e-15);
}

#[test]
fn variables_are_collected() {
    let e = parse("x*(1-x/n)+exp(z)").unwrap();
    let vars: Vec<_> = e.variables().into_iter().collect();
    assert_eq!(vars, vec!["n".to_string(), "x".to_string(), "z".to_string()]);
}

// ---------------------------------------------------------------------------
// Randomized invariants
// ---------------------------------------------------------------------------

/// Pre-fold tree description, evaluated by an interpreter that performs no
/// folding at all; the oracle for "constant folding never changes results".
#[derive(Debug, Clone)]
enum Spec {
    Const(i32, i32),
    Var(usize),
    Add(Box<Spec>, Box<Spec>),
    Sub(Box<Spec>, Box<Spec>),
    Mul(Box<Spec>, Box<Spec>),
    Div(Box<Spec>, Box<Spec>),
    Pow(Box<Spec>, i8),
    Exp(Box<Spec>),
    Log(Box<Spec>),
    Sqrt(Box<Spec>),
    Neg(Box<Spec>),
}

const SPEC_VARS: [&str; 3] = ["x", "y", "z"];

impl Spec {
    fn eval(&self, point: &[f64; 3]) -> Option<f64> {
        let v = match self {
            Spec::Const(n, d) => *n as f64 / *d as f64,
            Spec::Var(i) => point[*i],
            Spec::Add(a, b) => a.eval(point)? + b.eval(point)?,
            Spec::Sub(a, b) => a.eval(point)? - b.eval(point)?,
            Spec::Mul(a, b) => a.eval(point)? * b.eval(point)?,
            Spec::Div(a, b) => {
                let den = b.eval(point)?;
                if den == 0.0 {
                    return None;
                }
                a.eval(point)? / den
            }
            Spec::Pow(a, e) => {
                let base = a.eval(point)?;
                if base == 0.0 && *e < 0 {
                    return None;
                }
                base.powi(*e as i32)
            }
            Spec::Exp(a) => a.eval(point)?.exp(),
            Spec::Log(a) => {
                let v = a.eval(point)?;
                if v <= 0.0 {
                    return None;
                }
                v.ln()
            }
            Spec::Sqrt(a) => {
                let v = a.eval(point)?;
                if v < 0.0 {
                    return None;
                }
                v.sqrt()
            }
            Spec::Neg(a) => -a.eval(point)?,
        };
        v.is_finite().then_some(v)
    }

    fn build(&self) -> Expr {
        match self {
            Spec::Const(n, d) => Expr::ratio(*n as i64, *d as i64),
            Spec::Var(i) => Expr::var(SPEC_VARS[*i]),
            Spec::Add(a, b) => Expr::add(a.build(), b.build()),
            Spec::Sub(a, b) => Expr::sub(a.build(), b.build()),
            Spec::Mul(a, b) => Expr::mul(a.build(), b.build()),
            Spec::Div(a, b) => Expr::div(a.build(), b.build()),
            Spec::Pow(a, e) => Expr::powi(a.build(), *e as i64),
            Spec::Exp(a) => Expr::exp(a.build()),
            Spec::Log(a) => Expr::log(a.build()),
            Spec::Sqrt(a) => Expr::sqrt(a.build()),
            Spec::Neg(a) => Expr::neg(a.build()),
        }
    }
}

fn spec_strategy() -> impl Strategy<Value = Spec> {
    let leaf = prop_oneof![
        (-6i32..=6, 1i32..=4).prop_map(|(n, d)| Spec::Const(n, d)),
        (0usize..3).prop_map(Spec::Var),
    ];
    leaf.prop_recursive(4, 48, 3, |inner| {
        prop_oneof![
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Spec::Add(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Spec::Sub(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Spec::Mul(a.into(), b.into())),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Spec::Div(a.into(), b.into())),
            (inner.clone(), -3i8..=3).prop_map(|(a, e)| Spec::Pow(a.into(), e)),
            inner.clone().prop_map(|a| Spec::Exp(a.into())),
            inner.clone().prop_map(|a| Spec::Log(a.into())),
            inner.clone().prop_map(|a| Spec::Sqrt(a.into())),
            inner.prop_map(|a| Spec::Neg(a.into())),
        ]
    })
}

proptest! {
    /// Constructors only ever fold; they never change (defined) values.
    #[test]
    fn folding_never_changes_eval(spec in spec_strategy(), seed in 0u64..1u64 << 48) {
        let expr = spec.build();
        let mut rng = Rng::seed_from(seed);
        for _ in 0..8 {
            let point = [
                rng.uniform(0.1, 2.0),
                rng.uniform(0.1, 2.0),
                rng.uniform(0.1, 2.0),
            ];
            if let Some(reference) = spec.eval(&point) {
                if reference.abs() > 1e12 {
                    continue;
                }
                let bindings = bind(&[
                    ("x", point[0]),
                    ("y", point[1]),
                    ("z", point[2]),
                ]);
                let got = expr
                    .eval(&bindings)
                    .expect("folded expression must evaluate wherever the raw tree does");
                prop_assert!(
                    (got - reference).abs() <= 1e-9 * (1.0 + reference.abs()),
                    "folded {} != raw {}",
                    got,
                    reference
                );
            }
        }
    }

    /// parse . print has a fixed point after one application.
    #[test]
    fn parse_print_is_idempotent(spec in spec_strategy()) {
        let expr = spec.build();
        let once = parse(&expr.to_string()).expect("printed form must reparse");
        let twice = parse(&once.to_string()).expect("reprinted form must reparse");
        prop_assert_eq!(once, twice);
    }
}

#[test]
fn derivative_matches_finite_differences() {
    let cases = [
        "x*(1-x/n)",
        "x^3/n^2-x",
        "exp(x*(exp(-1/2)-1))",
        "log(1+x/n)",
        "sqrt(x)*exp(-x)",
        "x^2/n",
        "(x+1)/(x+2)",
        "x*exp(x)/(1+x^2)",
    ];
    let mut rng = Rng::seed_from(2024);
    for text in cases {
        let e = parse(text).unwrap();
        let de = e.diff("x");
        for _ in 0..10 {
            let x = rng.uniform(0.3, 2.5);
            let n = rng.uniform(3.0, 6.0);
            let h = 1e-5 * (1.0 + x.abs());
            let at = |xv: f64| e.eval(&bind(&[("x", xv), ("n", n)])).unwrap();
            let fd = (at(x + h) - at(x - h)) / (2.0 * h);
            let sym = de.eval(&bind(&[("x", x), ("n", n)])).unwrap();
            assert!(
                (sym - fd).abs() <= 1e-6 * (1.0 + sym.abs()),
                "{text}: symbolic {sym} vs finite difference {fd}"
            );
        }
    }
}

#[test]
fn printed_rational_reparses_exactly() {
    let e = Expr::ratio(-21, 20);
    let p = parse(&e.to_string()).unwrap();
    assert_eq!(p, e);
}
