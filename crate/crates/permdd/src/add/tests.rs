use super::*;
use proptest::prelude::*;

fn mgr(n: usize) -> AddManager {
    AddManager::new(VariableOrder::identity(n))
}

/// Expression trees evaluated directly, independent of the diagram engine.
#[derive(Clone, Debug)]
enum Expr {
    Const(i64),
    Var(usize),
    Sum(Box<Expr>, Box<Expr>),
    Prod(Box<Expr>, Box<Expr>),
    Ite(Vec<usize>, Box<Expr>, Box<Expr>),
    Abstract(Box<Expr>, usize),
}

// i128 is ample: depth-4 expressions over single-digit constants stay far
// below its range even through nested products and abstractions.
fn eval_expr(e: &Expr, tau: u32) -> i128 {
    match e {
        Expr::Const(v) => *v as i128,
        Expr::Var(i) => ((tau >> i) & 1) as i128,
        Expr::Sum(a, b) => eval_expr(a, tau) + eval_expr(b, tau),
        Expr::Prod(a, b) => eval_expr(a, tau) * eval_expr(b, tau),
        Expr::Ite(xors, g, h) => {
            let parity = xors.iter().map(|i| (tau >> i) & 1).sum::<u32>() & 1;
            if parity == 1 {
                eval_expr(g, tau)
            } else {
                eval_expr(h, tau)
            }
        }
        Expr::Abstract(a, x) => {
            let bit = 1u32 << x;
            eval_expr(a, tau & !bit) + eval_expr(a, tau | bit)
        }
    }
}

fn build_add(m: &mut AddManager, e: &Expr) -> AddRef {
    match e {
        Expr::Const(v) => m.constant(*v).unwrap(),
        Expr::Var(i) => m.variable(Var(*i as u32)).unwrap(),
        Expr::Sum(a, b) => {
            let (fa, fb) = (build_add(m, a), build_add(m, b));
            m.sum(fa, fb).unwrap()
        }
        Expr::Prod(a, b) => {
            let (fa, fb) = (build_add(m, a), build_add(m, b));
            m.product(fa, fb).unwrap()
        }
        Expr::Ite(xors, g, h) => {
            let vars: Vec<Var> = xors.iter().map(|&i| Var(i as u32)).collect();
            let c = m.xor_all(&vars).unwrap();
            let (fg, fh) = (build_add(m, g), build_add(m, h));
            m.ite(c, fg, fh).unwrap()
        }
        Expr::Abstract(a, x) => {
            let fa = build_add(m, a);
            m.abstract_sum(fa, Var(*x as u32)).unwrap()
        }
    }
}

fn arb_expr(nvars: usize) -> impl Strategy<Value = Expr> {
    let leaf = prop_oneof![
        (-9i64..10).prop_map(Expr::Const),
        (0..nvars).prop_map(Expr::Var),
    ];
    leaf.prop_recursive(4, 24, 3, move |inner| {
        prop_oneof![
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Sum(Box::new(a), Box::new(b))),
            (inner.clone(), inner.clone())
                .prop_map(|(a, b)| Expr::Prod(Box::new(a), Box::new(b))),
            (
                proptest::sample::subsequence((0..nvars).collect::<Vec<_>>(), 1..=nvars),
                inner.clone(),
                inner.clone()
            )
                .prop_map(|(xs, g, h)| Expr::Ite(xs, Box::new(g), Box::new(h))),
            (inner, 0..nvars).prop_map(|(a, x)| Expr::Abstract(Box::new(a), x)),
        ]
    })
}

fn all_taus(nvars: usize) -> impl Iterator<Item = u32> {
    0..(1u32 << nvars)
}

fn tau_vars(tau: u32, nvars: usize) -> Vec<Var> {
    (0..nvars as u32).filter(|i| (tau >> i) & 1 == 1).map(Var).collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    /// Exhaustive semantic agreement with the direct evaluator over 12 vars.
    #[test]
    fn add_matches_expr_oracle(e in arb_expr(12)) {
        let mut m = mgr(12);
        let f = build_add(&mut m, &e);
        m.check_invariants(f);
        for tau in all_taus(12) {
            let expected = BigInt::from(eval_expr(&e, tau));
            prop_assert_eq!(m.evaluate(f, &tau_vars(tau, 12)), expected);
        }
    }

    /// Equal node id exactly when the denoted functions are equal.
    #[test]
    fn canonicity(e1 in arb_expr(5), e2 in arb_expr(5)) {
        let mut m = mgr(5);
        let f1 = build_add(&mut m, &e1);
        let f2 = build_add(&mut m, &e2);
        let same_fn = all_taus(5).all(|t| eval_expr(&e1, t) == eval_expr(&e2, t));
        prop_assert_eq!(f1.root() == f2.root(), same_fn);
    }

    /// Operator laws checked pointwise against previously built operands.
    #[test]
    fn pointwise_operator_semantics(e1 in arb_expr(5), e2 in arb_expr(5), x in 0usize..5) {
        let mut m = mgr(5);
        let f = build_add(&mut m, &e1);
        let g = build_add(&mut m, &e2);
        let s = m.sum(f, g).unwrap();
        let p = m.product(f, g).unwrap();
        let a = m.abstract_sum(f, Var(x as u32)).unwrap();
        for tau in all_taus(5) {
            let tv = tau_vars(tau, 5);
            let (ef, eg) = (m.evaluate(f, &tv), m.evaluate(g, &tv));
            prop_assert_eq!(m.evaluate(s, &tv), &ef + &eg);
            prop_assert_eq!(m.evaluate(p, &tv), &ef * &eg);
            let bit = 1u32 << x;
            let lo = m.evaluate(f, &tau_vars(tau & !bit, 5));
            let hi = m.evaluate(f, &tau_vars(tau | bit, 5));
            prop_assert_eq!(m.evaluate(a, &tv), lo + hi);
        }
    }

    /// Early abstraction: abstracting x out of f*g equals (abstract x f)*g
    /// as the identical node, whenever x does not occur in g.
    #[test]
    fn early_abstraction_theorem(e1 in arb_expr(4), e2 in arb_expr(4), x in 0usize..4) {
        // Shift g's variables into 4..8 so x (drawn from f's block) avoids g.
        fn shift(e: &Expr, by: usize) -> Expr {
            match e {
                Expr::Const(v) => Expr::Const(*v),
                Expr::Var(i) => Expr::Var(i + by),
                Expr::Sum(a, b) => Expr::Sum(Box::new(shift(a, by)), Box::new(shift(b, by))),
                Expr::Prod(a, b) => Expr::Prod(Box::new(shift(a, by)), Box::new(shift(b, by))),
                Expr::Ite(xs, g, h) => Expr::Ite(
                    xs.iter().map(|i| i + by).collect(),
                    Box::new(shift(g, by)),
                    Box::new(shift(h, by)),
                ),
                Expr::Abstract(a, v) => Expr::Abstract(Box::new(shift(a, by)), v + by),
            }
        }
        let mut m = mgr(8);
        let f = build_add(&mut m, &e1);
        let g = build_add(&mut m, &shift(&e2, 4));
        let x = Var(x as u32);
        let fg = m.product(f, g).unwrap();
        let lhs = m.abstract_sum(fg, x).unwrap();
        let fa = m.abstract_sum(f, x).unwrap();
        let rhs = m.product(fa, g).unwrap();
        prop_assert_eq!(lhs.root(), rhs.root());
    }
}

#[test]
fn constants_are_hash_consed() {
    let mut m = mgr(2);
    let a = m.constant(0).unwrap();
    let b = m.constant(0).unwrap();
    assert_eq!(a.root(), b.root());
    let c = m.constant(-1).unwrap();
    let d = m.constant(1).unwrap();
    assert_ne!(c.root(), d.root());
    assert_eq!(m.evaluate(a, &[]), BigInt::zero());
    let five = m.constant(5).unwrap();
    assert_eq!(m.evaluate(five, &[]), BigInt::from(5));
}

#[test]
fn variable_shape_and_semantics() {
    let mut m = mgr(3);
    let x1 = m.variable(Var(0)).unwrap();
    assert_eq!(m.evaluate(x1, &[Var(0)]), BigInt::one());
    assert_eq!(m.evaluate(x1, &[]), BigInt::zero());
    assert_eq!(m.node_count(x1), (1, 2));
    assert_eq!(m.evaluate(x1, &[Var(1)]), BigInt::zero());
    assert!(matches!(m.variable(Var(7)), Err(AddError::UnknownVariable(_))));
}

#[test]
fn sum_and_product_identities() {
    let mut m = mgr(4);
    let x1 = m.variable(Var(0)).unwrap();
    let x2 = m.variable(Var(1)).unwrap();
    let s = m.sum(x1, x2).unwrap();
    assert_eq!(m.evaluate(s, &[Var(0), Var(1)]), BigInt::from(2));
    let zero = m.constant(0).unwrap();
    let one = m.constant(1).unwrap();
    let s0 = m.sum(s, zero).unwrap();
    assert_eq!(s0.root(), s.root());
    let p1 = m.product(s, one).unwrap();
    assert_eq!(p1.root(), s.root());
    let p0 = m.product(s, zero).unwrap();
    assert_eq!(p0.root(), zero.root());
}

#[test]
fn ite_basics() {
    let mut m = mgr(2);
    let x1 = m.variable(Var(0)).unwrap();
    let two = m.constant(2).unwrap();
    let seven = m.constant(7).unwrap();
    let f = m.ite(x1, two, seven).unwrap();
    assert_eq!(m.evaluate(f, &[Var(0)]), BigInt::from(2));
    assert_eq!(m.evaluate(f, &[]), BigInt::from(7));

    let one = m.constant(1).unwrap();
    let g = m.ite(one, two, seven).unwrap();
    assert_eq!(g.root(), two.root());

    let parity = m.xor_all(&[Var(0), Var(1)]).unwrap();
    let neg = m.constant(-1).unwrap();
    let pos = m.constant(1).unwrap();
    let sign = m.ite(parity, neg, pos).unwrap();
    assert_eq!(m.evaluate(sign, &[Var(0)]), BigInt::from(-1));
    assert_eq!(m.evaluate(sign, &[]), BigInt::from(1));

    let err = m.ite(two, x1, seven);
    assert!(matches!(err, Err(AddError::NotBoolean { .. })));
}

#[test]
fn abstract_sum_basics() {
    let mut m = mgr(2);
    let x1 = m.variable(Var(0)).unwrap();
    let a = m.abstract_sum(x1, Var(0)).unwrap();
    let one = m.constant(1).unwrap();
    assert_eq!(a.root(), one.root());

    let three = m.constant(3).unwrap();
    let doubled = m.abstract_sum(three, Var(0)).unwrap();
    let six = m.constant(6).unwrap();
    assert_eq!(doubled.root(), six.root());
}

#[test]
fn xor_all_shape() {
    let mut m = mgr(4);
    let one_var = m.xor_all(&[Var(0)]).unwrap();
    assert_eq!(m.evaluate(one_var, &[Var(0)]), BigInt::one());
    let two_vars = m.xor_all(&[Var(0), Var(1)]).unwrap();
    assert_eq!(m.evaluate(two_vars, &[Var(0), Var(1)]), BigInt::zero());
    let four = m.xor_all(&[Var(0), Var(1), Var(2), Var(3)]).unwrap();
    assert_eq!(m.node_count(four).0, 7);
    assert!(matches!(
        m.xor_all(&[Var(0), Var(0)]),
        Err(AddError::DuplicateVariable(_))
    ));
    assert!(matches!(m.xor_all(&[]), Err(AddError::EmptyVariableList)));
}

#[test]
fn node_counters_track_peak() {
    let mut m = mgr(6);
    assert_eq!(m.live_nodes(), 2);
    let mut f = m.variable(Var(0)).unwrap();
    for i in 1..6 {
        let v = m.variable(Var(i)).unwrap();
        f = m.sum(f, v).unwrap();
    }
    assert!(m.peak_nodes() >= m.live_nodes());
    assert!(m.total_created() >= m.live_nodes());
    let before = m.total_created();
    m.reset();
    assert_eq!(m.live_nodes(), 2);
    assert!(m.peak_nodes() >= m.live_nodes());
    assert_eq!(m.total_created(), before + 2);
}

#[test]
fn node_budget_is_an_error() {
    let mut m = AddManager::with_limits(
        VariableOrder::identity(8),
        Limits {
            node_budget: 6,
            deadline: None,
        },
    );
    let mut r = Ok(());
    let mut f = m.constant(1).unwrap();
    for i in 0..8 {
        let v = match m.variable(Var(i)) {
            Ok(v) => v,
            Err(e) => {
                r = Err(e);
                break;
            }
        };
        match m.sum(f, v) {
            Ok(s) => f = s,
            Err(e) => {
                r = Err(e);
                break;
            }
        }
    }
    assert!(matches!(r, Err(AddError::NodeBudgetExceeded { budget: 6 })));
}

#[test]
fn deadline_in_the_past_times_out() {
    let mut m = AddManager::with_limits(
        VariableOrder::identity(12),
        Limits {
            node_budget: DEFAULT_NODE_BUDGET,
            deadline: Some(Instant::now() - std::time::Duration::from_millis(1)),
        },
    );
    assert_eq!(m.check_deadline(), Err(AddError::TimedOut));
    // The periodic tick fires inside long apply chains as well.
    let mut g = m.variable(Var(0)).unwrap();
    for i in 1..12 {
        let v = m.variable(Var(i)).unwrap();
        g = m.sum(g, v).unwrap();
    }
    let mut f = g;
    let mut err = None;
    for _ in 0..256 {
        match m.product(f, g) {
            Ok(p) => f = p,
            Err(e) => {
                err = Some(e);
                break;
            }
        }
    }
    assert_eq!(err, Some(AddError::TimedOut));
}

#[test]
fn dot_dump_mentions_every_reachable_node() {
    let mut m = mgr(2);
    let x1 = m.variable(Var(0)).unwrap();
    let x2 = m.variable(Var(1)).unwrap();
    let s = m.sum(x1, x2).unwrap();
    let mut out = Vec::new();
    write_dot(&m, s, &mut out).unwrap();
    let text = String::from_utf8(out).unwrap();
    assert!(text.starts_with("digraph add {"));
    assert!(text.contains("style=solid"));
    assert!(text.contains("style=dotted"));
    let (internal, terminal) = m.node_count(s);
    let node_lines = text.lines().filter(|l| l.contains("label=") && !l.contains("->")).count();
    assert_eq!(node_lines, internal + terminal);
}

#[test]
fn foreign_manager_handles_panic() {
    let mut m1 = mgr(2);
    let mut m2 = mgr(2);
    let f = m1.variable(Var(0)).unwrap();
    let g = m2.variable(Var(1)).unwrap();
    let r = std::panic::catch_unwind(std::panic::AssertUnwindSafe(|| {
        let _ = m1.sum(f, g);
    }));
    assert!(r.is_err());
}
