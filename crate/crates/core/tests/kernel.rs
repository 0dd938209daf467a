use dgl_core::church::church_formula;
use dgl_core::gen::{Gen, Shape};
use dgl_core::kernel::script::{check_proof, RENAMING, STUTTER};
use dgl_core::kernel::{
    axiom, rename_formula, renaming_premise, rule, uniform_rename, AxiomId, ProofError, ProvedRule, RenameError,
    RuleId, Theorem,
};
use dgl_core::{parse_formula, parse_subst, parse_term, us, Expr, Expression, Formula, Variable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn f(s: &str) -> Formula {
    parse_formula(s).unwrap()
}

fn var(s: &str) -> Variable {
    Variable::new(s)
}

#[test]
fn stored_axioms() {
    assert_eq!(axiom(AxiomId::Test), &f("<?q()>p() <-> q() & p()"));
    assert_eq!(axiom(AxiomId::Iterate), &f("<{a}*><c>true <-> <c>true | <a><{a}*><c>true"));
    assert_eq!(axiom(AxiomId::Box), &f("[a]<c>true <-> !<a>!<c>true"));
    for id in AxiomId::ALL {
        assert_eq!(AxiomId::from_name(id.name()), Some(id));
    }
    assert_eq!(rule(RuleId::M).premises.len(), 1);
}

#[test]
fn us_on_compose_matches_reference() {
    let s = parse_subst("a ~> {x:=1} ; b ~> {?x>=0} ; c ~> {?x>=0}").unwrap();
    let th = Theorem::axiom(AxiomId::Compose).us(&s).unwrap();
    let reference = church_formula(&s, axiom(AxiomId::Compose)).unwrap();
    assert_eq!(th.formula(), &reference);
    assert_eq!(th.formula(), &f("<x:=1; ?x>=0><?x>=0>true <-> <x:=1><?x>=0><?x>=0>true"));
}

#[test]
fn us_on_the_substitution_example() {
    let base = Theorem::oracle(f("<v:=f()>p(v) <-> p(f())")).unwrap();
    let sound = parse_subst("p(.) ~> [{x:=x+.; {x'=.}}*](x+.>=0) ; f() ~> -v").unwrap();
    let th = base.us(&sound).unwrap();
    assert_eq!(th.formula(), &f("<v:=-v>[{x:=x+v; {x'=v}}*]x+v>=0 <-> [{x:=x+-v; {x'=-v}}*]x+-v>=0"));
    let clash = parse_subst("p(.) ~> [{x'=.}]x>=0 ; f() ~> -x").unwrap();
    assert!(matches!(base.us(&clash), Err(ProofError::Subst(_))));
}

#[test]
fn uniform_substitution_of_rules() {
    let s = parse_subst("a ~> {x:=x+1} ; c ~> {?x>=0} ; d ~> {?x>=1}").unwrap();
    let m = ProvedRule::usr(RuleId::M, &s).unwrap();
    assert_eq!(m.inference().premises, vec![f("<?x>=0>true -> <?x>=1>true")]);
    assert_eq!(m.inference().conclusion, f("<x:=x+1><?x>=0>true -> <x:=x+1><?x>=1>true"));
    let prem = Theorem::oracle(f("<?x>=0>true -> <?x>=1>true")).unwrap();
    let concl = m.infer(&[&prem]).unwrap();
    assert_eq!(concl.formula(), &m.inference().conclusion);
    let wrong = Theorem::oracle(f("<?x>=1>true -> <?x>=0>true")).unwrap();
    assert!(m.infer(&[&wrong]).is_err());
    assert!(m.infer(&[]).is_err());

    let s = parse_subst("c ~> {?p(x)}").unwrap();
    assert!(ProvedRule::usr(RuleId::Fp, &s).is_ok());
    let s = parse_subst("p() ~> x>=0 ; c ~> {?p()}").unwrap();
    let fp = ProvedRule::usr(RuleId::Fp, &s).unwrap();
    assert!(fp.inference().conclusion.to_string().contains("?p()"));
}

#[test]
fn native_rules() {
    let imp = Theorem::oracle(f("x>=0 -> x>=-1")).unwrap();
    let ante = Theorem::oracle(f("x>=0")).unwrap();
    assert_eq!(Theorem::mp(&imp, &ante).unwrap().formula(), &f("x>=-1"));
    let other = Theorem::oracle(f("x>=1")).unwrap();
    assert!(matches!(Theorem::mp(&imp, &other), Err(ProofError::AntecedentMismatch { .. })));
    let sq = Theorem::oracle(f("x^2>=0")).unwrap();
    assert_eq!(sq.allgen(&var("x")).unwrap().formula(), &f("\\forall x x^2>=0"));
    assert_eq!(Theorem::mp(&imp, &ante).unwrap().assumptions().len(), 2);
}

#[test]
fn renaming() {
    assert_eq!(rename_formula(&f("<x:=x+1>x>=0"), &var("x"), &var("y")).unwrap(), f("<y:=y+1>y>=0"));
    let t = parse_term("x*y'").unwrap();
    assert_eq!(
        uniform_rename(Expr::Term(&t), &var("x"), &var("y")).unwrap(),
        Expression::Term(parse_term("y*x'").unwrap())
    );
    assert!(matches!(rename_formula(&f("<a>x>=0"), &var("x"), &var("y")), Err(RenameError::GameSymbol(_))));
}

#[test]
fn bound_renaming() {
    let target = f("z>=1 -> <x:=z+1>x>=2");
    let premise = renaming_premise(&var("y"), &target).unwrap();
    assert_eq!(premise, f("z>=1 -> <y:=z+1><y':=x'>y>=2"));
    let th = Theorem::oracle(premise).unwrap();
    assert_eq!(th.br(&var("y"), target.clone()).unwrap().formula(), &target);
    let clash = f("z>=1 -> <x:=z+1>x>=y");
    assert!(matches!(renaming_premise(&var("y"), &clash), Err(ProofError::RenamingSideCondition(_))));
    let boxed = f("z>=1 -> [x:=z+1]x>=2");
    let p = renaming_premise(&var("y"), &boxed).unwrap();
    assert_eq!(p, f("z>=1 -> [y:=z+1][y':=x']y>=2"));
    assert!(Theorem::oracle(p).unwrap().br(&var("y"), boxed).is_ok());
}

#[test]
fn bundled_scripts() {
    let r = check_proof(STUTTER);
    assert!(r.accepted, "{r}");
    assert_eq!(r.derived.last().unwrap().1, f("x>=0 <-> <x:=x>x>=0"));
    assert!(!r.oracle.is_empty());
    let r = check_proof(RENAMING);
    assert!(r.accepted, "{r}");
}

#[test]
fn axioms_engines_agree_on_random_substitutions() {
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let mut defined = 0;
    for _ in 0..1000 {
        let s = Gen::new(&mut rng, Shape::default()).subst(3);
        for id in AxiomId::ALL {
            let a = axiom(id);
            match (us(&s, a), church_formula(&s, a)) {
                (Ok(x), Ok(y)) => {
                    assert_eq!(x, y);
                    defined += 1;
                }
                (Err(_), Ok(y)) => panic!("only the reference engine defined {y}"),
                _ => {}
            }
        }
    }
    assert!(defined > 1000);
}
