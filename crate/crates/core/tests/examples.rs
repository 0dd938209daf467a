use dgl_core::church::{admissible, church_formula};
use dgl_core::statics::{bv_game, fv_formula, fv_game, fv_term, mbv_game, occurring_vars, signature};
use dgl_core::syntax::{is_well_formed, well_formed, ViolationKind};
use dgl_core::{
    parse_formula, parse_game, parse_subst, parse_term, pretty, subst_game, subst_term, us, Expr, Formula, Game,
    Symbol, Term, USubst, VarSet, Variable,
};

fn vs(names: &[&str]) -> VarSet {
    names
        .iter()
        .map(|n| match n.strip_suffix('\'') {
            Some(b) => Variable::prime(b),
            None => Variable::new(n),
        })
        .collect()
}

fn t(s: &str) -> Term {
    parse_term(s).unwrap()
}

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn g(s: &str) -> Game {
    parse_game(s).unwrap()
}

#[test]
fn well_formedness() {
    assert!(is_well_formed(Expr::Game(&g("x:=x+1"))));
    let dd = Term::differential(Term::Var(Variable::prime("x")));
    assert!(well_formed(Expr::Term(&dd)).iter().any(|v| v.kind == ViolationKind::NestedDifferential));
    let e = parse_game("{x'=y*z &d y in (y>=0 & x>=0) & z in (z<=1)}").unwrap_err();
    assert!(e.to_string().contains("x"), "{e}");
}

#[test]
fn parsing() {
    let phi = f("<v:=f()> p(v) <-> p(f())");
    let want = Formula::equiv(
        Formula::diamond(Game::assign(Variable::new("v"), Term::apply0("f")), Formula::pred1("p", Term::var("v"))),
        Formula::pred1("p", Term::apply0("f")),
    );
    assert_eq!(phi, want);
    assert_eq!(t("x+0"), Term::plus(Term::var("x"), Term::int(0)));
    let ode = g("{x'=x^2, y'=z*y*y & true}");
    assert_eq!(
        ode,
        Game::ode(
            vec![
                (Variable::new("x"), Term::power(Term::var("x"), 2)),
                (Variable::new("y"), Term::times(Term::times(Term::var("z"), Term::var("y")), Term::var("y"))),
            ],
            Formula::True,
        )
    );
    assert!(parse_subst("").unwrap().is_empty());
}

#[test]
fn substitution_files() {
    let s = parse_subst("p(.) ~> [{x'=.}] x>=0 ; f() ~> -x").unwrap();
    assert_eq!(s.len(), 2);
    assert_eq!(s.cached_fv(&Symbol::predicate("p", 1)), Some(&vs(&["x"])));
    let s = parse_subst("f(.) ~> .^2 ; a(.) ~> z*y").unwrap();
    assert_eq!(s.cached_fv(&Symbol::function("a", 1)), Some(&vs(&["y", "z"])));
}

#[test]
fn printing() {
    assert_eq!(t("x+1").to_string(), "x+1");
    let d = Formula::diamond(Game::dual(Game::symbol("a")), Formula::pred0("p"));
    assert_eq!(pretty(Expr::Formula(&d)), "<{a}^d>p()");
}

#[test]
fn free_and_bound() {
    assert_eq!(fv_term(&t("-x")), vs(&["x"]));
    assert_eq!(fv_term(&t("(x*y)'")), vs(&["x", "y", "x'", "y'"]));
    assert_eq!(fv_term(&t("5")), VarSet::empty());
    assert_eq!(fv_formula(&f("[{x'=.}]x>=0")), vs(&["x"]));
    assert_eq!(fv_formula(&f("\\exists x x>=y")), vs(&["y"]));
    assert_eq!(fv_formula(&f("<x:=1>x>=y")), vs(&["y"]));
    let a = g("{x:=x+1; {x'=-x}}*");
    assert_eq!((fv_game(&a), bv_game(&a)), (vs(&["x"]), vs(&["x", "x'"])));
    let o = g("{x'=x^2, y'=z*x^2*y}");
    assert_eq!((fv_game(&o), bv_game(&o)), (vs(&["x", "y", "z"]), vs(&["x", "x'", "y", "y'"])));
    assert_eq!(mbv_game(&g("a ++ x:=1")), VarSet::empty());
    let sig = signature(Expr::Formula(&f("<v:=f()>p(v)")));
    assert_eq!(sig.into_iter().collect::<Vec<_>>(), vec![Symbol::function("f", 0), Symbol::predicate("p", 1)]);
    assert_eq!(occurring_vars(Expr::Formula(&f("\\exists x x>=0"))).len(), 1);
    assert!(signature(Expr::Term(&t("x+1"))).is_empty());
}

#[test]
fn onepass_terms_and_games() {
    let s = parse_subst("f() ~> -x").unwrap();
    assert_eq!(subst_term(&s, &VarSet::empty(), &t("f()")).unwrap(), t("-x"));
    let c = subst_term(&s, &vs(&["x", "x'"]), &t("f()")).unwrap_err();
    assert_eq!(c.clash().unwrap().witness, vs(&["x"]));
    let id = USubst::new();
    assert_eq!(subst_term(&id, &VarSet::all(), &t("f()*x")).unwrap(), t("f()*x"));
    assert_eq!(subst_game(&id, &VarSet::empty(), &g("x:=x+1")).unwrap().out_taboo, vs(&["x"]));
    let s = parse_subst("a ~> {x:=1}").unwrap();
    let r = subst_game(&s, &vs(&["y"]), &g("a")).unwrap();
    assert_eq!((r.game, r.out_taboo), (g("x:=1"), vs(&["x", "y"])));
    let s = parse_subst("p() ~> x>=0").unwrap();
    assert!(us(&s, &f("<a>p()")).unwrap_err().clash().unwrap().taboo.is_all());
}

#[test]
fn reference_engine() {
    let s = parse_subst("f() ~> -x").unwrap();
    let e = t("f()*2");
    let bad = admissible(&s, &vs(&["x", "x'"]), Expr::Term(&e));
    assert_eq!(bad, vec![(Symbol::function("f", 0), vs(&["x"]))]);
    assert!(admissible(&s, &vs(&["x"]), Expr::Term(&t("y+1"))).is_empty());
    let s = parse_subst("p(.) ~> [{x'=.}]x>=0").unwrap();
    assert!(admissible(&s, &vs(&["v"]), Expr::Formula(&f("p(v)"))).is_empty());

    let phi = f("<v:=f()>p(v) <-> p(f())");
    let clash = parse_subst("p(.) ~> [{x'=.}]x>=0 ; f() ~> -x").unwrap();
    let c = church_formula(&clash, &phi).unwrap_err();
    assert_eq!(c.clash().unwrap().operator, Some("differential equation"));
    let sound = parse_subst("p(.) ~> [{x:=x+.; {x'=.}}*](x+.>=0) ; f() ~> -v").unwrap();
    assert_eq!(church_formula(&sound, &phi).unwrap(), us(&sound, &phi).unwrap());
}

#[test]
fn seq_family_engines_agree() {
    use dgl_core::bench::{gen_family, Family};
    let (s, phi) = gen_family(Family::Seq, 1);
    assert_eq!(phi, f("<x:=x+1>p(x)"));
    let (s3, phi3) = gen_family(Family::Seq, 3);
    assert_eq!(us(&s3, &phi3).unwrap(), church_formula(&s3, &phi3).unwrap());
    assert_eq!(s, s3);
}
