use std::collections::BTreeSet;

use dgl_core::semantics::{
    adjoint_eval_term, central_difference, check_lemma9, eval_qff, eval_term, sample_variation, unchecked_mismatch,
    Interpretation, Outcome, SemError, State,
};
use dgl_core::{parse_formula, parse_subst, parse_term, Symbol, USubst, VarSet, Variable};
use num_rational::BigRational;

fn q(n: i64) -> BigRational {
    BigRational::from_integer(n.into())
}

fn st(pairs: &[(&str, i64)]) -> State {
    pairs.iter().map(|(n, v)| (*n, *v)).collect()
}

fn square() -> Interpretation {
    Interpretation::new().function(Symbol::function("f", 1), &parse_term(".^2").unwrap()).unwrap()
}

#[test]
fn term_values() {
    let i = Interpretation::new();
    assert_eq!(eval_term(&i, &st(&[("x", 3)]), &parse_term("x+1").unwrap()).unwrap(), q(3 + 1));
    let x = 2i64;
    assert_eq!(eval_term(&square(), &st(&[("x", x)]), &parse_term("f(x)*x").unwrap()).unwrap(), q(x.pow(2) * x));
}

#[test]
fn differential_values() {
    let i = Interpretation::new();
    let (x, y, dx, dy) = (1i64, 2i64, 5i64, 7i64);
    let nu = st(&[("x", x), ("y", y), ("x'", dx), ("y'", dy)]);
    let d = parse_term("(x*y)'").unwrap();
    let got = eval_term(&i, &nu, &d).unwrap();
    assert_eq!(got, q(y * dx + x * dy));
    let inner = parse_term("x*y").unwrap();
    let h = q(1);
    let by_difference = central_difference(&i, &inner, &Variable::new("x"), &nu, &h).unwrap() * q(dx)
        + central_difference(&i, &inner, &Variable::new("y"), &nu, &h).unwrap() * q(dy);
    assert_eq!(got, by_difference);
}

#[test]
fn formula_values() {
    let i = Interpretation::new();
    assert!(eval_qff(&i, &st(&[("x", 1)]), &parse_formula("x>=1 & !(x>=2)").unwrap()).unwrap());
    let i = Interpretation::new().predicate(Symbol::predicate("p", 1), &parse_formula(".>=0").unwrap()).unwrap();
    assert!(!eval_qff(&i, &st(&[("x", -1)]), &parse_formula("p(x)").unwrap()).unwrap());
    let e = eval_qff(&i, &State::new(), &parse_formula("<a>true").unwrap()).unwrap_err();
    assert!(matches!(e, SemError::Unsupported(_)));
}

#[test]
fn adjoint_values() {
    let s = parse_subst("f() ~> -x").unwrap();
    let i = Interpretation::new();
    let omega = st(&[("x", 4)]);
    for nu in [st(&[("x", 9)]), st(&[("x", -3), ("y", 1)])] {
        assert_eq!(adjoint_eval_term(&s, &i, &omega, &nu, &parse_term("f()").unwrap()).unwrap(), q(-4));
    }
    let t = parse_term("x*y+f()").unwrap();
    let nu = st(&[("x", 2), ("y", 5)]);
    assert_eq!(adjoint_eval_term(&USubst::new(), &i, &omega, &nu, &t).err(), eval_term(&i, &nu, &t).err());
    let s = parse_subst("f(.) ~> .^2").unwrap();
    let y = 3i64;
    let got = adjoint_eval_term(&s, &i, &st(&[("x", 7)]), &st(&[("y", y)]), &parse_term("f(y)").unwrap()).unwrap();
    assert_eq!(got, q(y * y));
}

#[test]
fn variations() {
    let universe: BTreeSet<Variable> = ["x", "y", "z"].iter().map(|n| Variable::new(n)).collect();
    let omega = st(&[("x", 1), ("y", 2), ("z", 3)]);
    assert_eq!(sample_variation(&omega, &VarSet::empty(), &universe, 1), omega);
    let only_x: BTreeSet<Variable> = ["y", "z"].iter().map(|n| Variable::new(n)).collect();
    let u: VarSet = [Variable::new("x")].into_iter().collect();
    for seed in 0..20 {
        assert!(sample_variation(&omega, &u, &universe, seed).agrees_on(&omega, &only_x));
    }
    let all_but_y = VarSet::all().difference(&[Variable::new("y")].into_iter().collect());
    let keep: BTreeSet<Variable> = [Variable::new("y")].into_iter().collect();
    let moved = (0..20).filter(|&s| sample_variation(&omega, &all_but_y, &universe, s) != omega).count();
    for seed in 0..20 {
        assert!(sample_variation(&omega, &all_but_y, &universe, seed).agrees_on(&omega, &keep));
    }
    assert!(moved > 0);
}

#[test]
fn substitution_lemma_examples() {
    let i = square();
    let s = parse_subst("f() ~> -x").unwrap();
    assert!(check_lemma9(&s, &VarSet::empty(), &parse_term("f()+x").unwrap(), &i, 100, 1).passed());
    let s = parse_subst("f(.) ~> .^2").unwrap();
    let u: VarSet = [Variable::new("y")].into_iter().collect();
    assert!(check_lemma9(&s, &u, &parse_term("f(x)*y").unwrap(), &i, 1000, 2).passed());

    let s = parse_subst("f() ~> x").unwrap();
    let u: VarSet = [Variable::new("x")].into_iter().collect();
    let r = check_lemma9(&s, &u, &parse_term("f()").unwrap(), &i, 10, 3);
    assert!(matches!(r.outcome, Outcome::Precondition(_)));
    let (omega, nu) = (st(&[("x", 0)]), st(&[("x", 1)]));
    let m = unchecked_mismatch(&s, &i, &omega, &nu, &parse_term("f()").unwrap()).unwrap();
    assert_eq!(m, Some((q(1), q(0))));
}
