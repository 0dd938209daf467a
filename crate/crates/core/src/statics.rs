//! Syntactic free, bound and must-bound variables, signatures and occurrences.
//!
//! These are computable over-approximations of the semantic variable
//! dependencies. Game symbols may read and write anything, so their free and
//! bound variables are all variables.

use std::collections::BTreeSet;

use crate::syntax::{Expr, Formula, Game, Symbol, Term, Variable};
use crate::varset::VarSet;

/// Free-variable precision. `Coarse` drops the must-bound refinement for
/// sequential composition and modalities.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum FvMode {
    #[default]
    Precise,
    Coarse,
}

/// Static information about a game.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct StaticInfo {
    pub fv: VarSet,
    pub bv: VarSet,
    pub mbv: VarSet,
}

pub fn fv_term(t: &Term) -> VarSet {
    let mut out = BTreeSet::new();
    collect_fv_term(t, &mut out);
    VarSet::Finite(out)
}

fn collect_fv_term(t: &Term, out: &mut BTreeSet<Variable>) {
    match t {
        Term::Var(v) => {
            out.insert(v.clone());
        }
        Term::Number(_) | Term::Apply(_, None) => {}
        Term::Apply(_, Some(a)) | Term::Neg(a) | Term::Power(a, _) => collect_fv_term(a, out),
        Term::Plus(a, b) | Term::Minus(a, b) | Term::Times(a, b) => {
            collect_fv_term(a, out);
            collect_fv_term(b, out);
        }
        Term::Differential(a) => {
            let mut inner = BTreeSet::new();
            collect_fv_term(a, &mut inner);
            for v in inner {
                if let Some(d) = v.differential() {
                    out.insert(d);
                }
                out.insert(v);
            }
        }
    }
}

pub fn fv_formula(f: &Formula) -> VarSet {
    fv_formula_with(f, FvMode::Precise)
}

pub fn fv_formula_with(f: &Formula, mode: FvMode) -> VarSet {
    match f {
        Formula::True | Formula::False => VarSet::empty(),
        Formula::Cmp(_, a, b) => {
            let mut out = BTreeSet::new();
            collect_fv_term(a, &mut out);
            collect_fv_term(b, &mut out);
            VarSet::Finite(out)
        }
        Formula::Pred(_, None) => VarSet::empty(),
        Formula::Pred(_, Some(a)) => fv_term(a),
        Formula::Not(a) => fv_formula_with(a, mode),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            let mut r = fv_formula_with(a, mode);
            r.union_with(&fv_formula_with(b, mode));
            r
        }
        Formula::Exists(x, a) | Formula::Forall(x, a) => fv_formula_with(a, mode).without(x),
        Formula::Diamond(g, a) | Formula::Box(g, a) => {
            let info = game_info_with(g, mode);
            let post = fv_formula_with(a, mode);
            let mut r = info.fv;
            match mode {
                FvMode::Precise => r.union_with(&post.difference(&info.mbv)),
                FvMode::Coarse => r.union_with(&post),
            }
            r
        }
    }
}

pub fn fv_game(g: &Game) -> VarSet {
    game_info(g).fv
}

pub fn bv_game(g: &Game) -> VarSet {
    let mut out = VarSet::empty();
    collect_bv(g, &mut out);
    out
}

fn collect_bv(g: &Game, out: &mut VarSet) {
    if out.is_all() {
        return;
    }
    match g {
        Game::Symbol(_) => *out = VarSet::all(),
        Game::Assign(x, _) => out.insert(x.clone()),
        Game::Ode(eqs, _) => {
            for (x, _) in eqs {
                out.insert(x.clone());
                out.insert(x.differential().expect("ode lhs is a plain variable"));
            }
        }
        Game::Test(_) => {}
        Game::Choice(a, b) | Game::Compose(a, b) => {
            collect_bv(a, out);
            collect_bv(b, out);
        }
        Game::Loop(a) | Game::Dual(a) => collect_bv(a, out),
        Game::DiffGame(dg) => out.union_with(&diffgame_bound(&dg.eqs, &dg.y, &dg.z)),
    }
}

/// `{x, x', y, y', z, z'}` for every listed `x`.
pub(crate) fn diffgame_bound(eqs: &[(Variable, Term)], y: &Variable, z: &Variable) -> VarSet {
    let mut s = BTreeSet::new();
    for v in eqs.iter().map(|(x, _)| x).chain([y, z]) {
        s.insert(v.clone());
        if let Some(d) = v.differential() {
            s.insert(d);
        }
    }
    VarSet::Finite(s)
}

pub fn mbv_game(g: &Game) -> VarSet {
    match g {
        Game::Symbol(_) | Game::Test(_) | Game::Loop(_) => VarSet::empty(),
        Game::Assign(x, _) => VarSet::singleton(x.clone()),
        Game::Ode(..) | Game::DiffGame(_) => bv_game(g),
        Game::Choice(a, b) => mbv_game(a).intersect(&mbv_game(b)),
        Game::Compose(a, b) => mbv_game(a).union(&mbv_game(b)),
        Game::Dual(a) => mbv_game(a),
    }
}

pub fn game_info(g: &Game) -> StaticInfo {
    game_info_with(g, FvMode::Precise)
}

/// Free, bound and must-bound variables of `g` in one traversal.
pub fn game_info_with(g: &Game, mode: FvMode) -> StaticInfo {
    match g {
        Game::Symbol(_) => StaticInfo { fv: VarSet::all(), bv: VarSet::all(), mbv: VarSet::empty() },
        Game::Assign(x, t) => {
            StaticInfo { fv: fv_term(t), bv: VarSet::singleton(x.clone()), mbv: VarSet::singleton(x.clone()) }
        }
        Game::Ode(eqs, dom) => {
            let mut fv = fv_formula_with(dom, mode);
            for (x, t) in eqs {
                fv.insert(x.clone());
                fv.union_with(&fv_term(t));
            }
            let bv = bv_game(g);
            StaticInfo { fv, mbv: bv.clone(), bv }
        }
        Game::Test(f) => StaticInfo { fv: fv_formula_with(f, mode), bv: VarSet::empty(), mbv: VarSet::empty() },
        Game::Choice(a, b) => {
            let a = game_info_with(a, mode);
            let b = game_info_with(b, mode);
            StaticInfo { fv: a.fv.union(&b.fv), bv: a.bv.union(&b.bv), mbv: a.mbv.intersect(&b.mbv) }
        }
        Game::Compose(a, b) => {
            let a = game_info_with(a, mode);
            let b = game_info_with(b, mode);
            let mut fv = a.fv;
            match mode {
                FvMode::Precise => fv.union_with(&b.fv.difference(&a.mbv)),
                FvMode::Coarse => fv.union_with(&b.fv),
            }
            StaticInfo { fv, bv: a.bv.union(&b.bv), mbv: a.mbv.union(&b.mbv) }
        }
        Game::Loop(a) => {
            let a = game_info_with(a, mode);
            StaticInfo { fv: a.fv, bv: a.bv, mbv: VarSet::empty() }
        }
        Game::Dual(a) => game_info_with(a, mode),
        Game::DiffGame(dg) => {
            let mut fv = fv_formula_with(&dg.y_set, mode);
            fv.union_with(&fv_formula_with(&dg.z_set, mode));
            for (x, t) in &dg.eqs {
                fv.insert(x.clone());
                fv.union_with(&fv_term(t));
            }
            let bv = diffgame_bound(&dg.eqs, &dg.y, &dg.z);
            StaticInfo { fv, mbv: bv.clone(), bv }
        }
    }
}

pub fn fv(e: Expr<'_>) -> VarSet {
    match e {
        Expr::Term(t) => fv_term(t),
        Expr::Formula(f) => fv_formula(f),
        Expr::Game(g) => fv_game(g),
    }
}

/// All function, predicate and game symbols occurring in `e` (including the dot).
pub fn signature(e: Expr<'_>) -> BTreeSet<Symbol> {
    let mut out = BTreeSet::new();
    let mut v = SymbolCollector { out: &mut out };
    v.expr(e);
    out
}

struct SymbolCollector<'a> {
    out: &'a mut BTreeSet<Symbol>,
}

impl SymbolCollector<'_> {
    fn expr(&mut self, e: Expr<'_>) {
        match e {
            Expr::Term(t) => self.term(t),
            Expr::Formula(f) => self.formula(f),
            Expr::Game(g) => self.game(g),
        }
    }

    fn term(&mut self, t: &Term) {
        match t {
            Term::Var(_) | Term::Number(_) => {}
            Term::Apply(s, arg) => {
                if !self.out.contains(s) {
                    self.out.insert(s.clone());
                }
                if let Some(a) = arg {
                    self.term(a);
                }
            }
            Term::Neg(a) | Term::Power(a, _) | Term::Differential(a) => self.term(a),
            Term::Plus(a, b) | Term::Minus(a, b) | Term::Times(a, b) => {
                self.term(a);
                self.term(b);
            }
        }
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Cmp(_, a, b) => {
                self.term(a);
                self.term(b);
            }
            Formula::Pred(s, arg) => {
                if !self.out.contains(s) {
                    self.out.insert(s.clone());
                }
                if let Some(a) = arg {
                    self.term(a);
                }
            }
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => self.formula(a),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                self.formula(a);
                self.formula(b);
            }
            Formula::Diamond(g, a) | Formula::Box(g, a) => {
                self.game(g);
                self.formula(a);
            }
        }
    }

    fn game(&mut self, g: &Game) {
        match g {
            Game::Symbol(s) => {
                if !self.out.contains(s) {
                    self.out.insert(s.clone());
                }
            }
            Game::Assign(_, t) => self.term(t),
            Game::Ode(eqs, dom) => {
                for (_, t) in eqs {
                    self.term(t);
                }
                self.formula(dom);
            }
            Game::Test(f) => self.formula(f),
            Game::Choice(a, b) | Game::Compose(a, b) => {
                self.game(a);
                self.game(b);
            }
            Game::Loop(a) | Game::Dual(a) => self.game(a),
            Game::DiffGame(dg) => {
                for (_, t) in &dg.eqs {
                    self.term(t);
                }
                self.formula(&dg.y_set);
                self.formula(&dg.z_set);
            }
        }
    }
}

/// Every variable occurring anywhere in `e`, free or bound. A differential
/// `(θ)'` also counts the differential variables it implicitly reads.
pub fn occurring_vars(e: Expr<'_>) -> BTreeSet<Variable> {
    let mut out = BTreeSet::new();
    occ_expr(e, &mut out);
    out
}

fn occ_expr(e: Expr<'_>, out: &mut BTreeSet<Variable>) {
    match e {
        Expr::Term(t) => occ_term(t, out),
        Expr::Formula(f) => occ_formula(f, out),
        Expr::Game(g) => occ_game(g, out),
    }
}

fn occ_term(t: &Term, out: &mut BTreeSet<Variable>) {
    match t {
        Term::Differential(_) => {
            if let VarSet::Finite(s) = fv_term(t) {
                out.extend(s);
            }
        }
        _ => collect_fv_term(t, out),
    }
}

fn occ_formula(f: &Formula, out: &mut BTreeSet<Variable>) {
    match f {
        Formula::True | Formula::False | Formula::Pred(_, None) => {}
        Formula::Cmp(_, a, b) => {
            occ_term(a, out);
            occ_term(b, out);
        }
        Formula::Pred(_, Some(a)) => occ_term(a, out),
        Formula::Not(a) => occ_formula(a, out),
        Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
            occ_formula(a, out);
            occ_formula(b, out);
        }
        Formula::Exists(x, a) | Formula::Forall(x, a) => {
            out.insert(x.clone());
            occ_formula(a, out);
        }
        Formula::Diamond(g, a) | Formula::Box(g, a) => {
            occ_game(g, out);
            occ_formula(a, out);
        }
    }
}

fn occ_game(g: &Game, out: &mut BTreeSet<Variable>) {
    match g {
        Game::Symbol(_) => {}
        Game::Assign(x, t) => {
            out.insert(x.clone());
            occ_term(t, out);
        }
        Game::Ode(eqs, dom) => {
            for (x, t) in eqs {
                out.insert(x.clone());
                out.extend(x.differential());
                occ_term(t, out);
            }
            occ_formula(dom, out);
        }
        Game::Test(f) => occ_formula(f, out),
        Game::Choice(a, b) | Game::Compose(a, b) => {
            occ_game(a, out);
            occ_game(b, out);
        }
        Game::Loop(a) | Game::Dual(a) => occ_game(a, out),
        Game::DiffGame(dg) => {
            if let VarSet::Finite(s) = diffgame_bound(&dg.eqs, &dg.y, &dg.z) {
                out.extend(s);
            }
            for (_, t) in &dg.eqs {
                occ_term(t, out);
            }
            occ_formula(&dg.y_set, out);
            occ_formula(&dg.z_set, out);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_game, parse_term};

    fn vs(names: &[&str]) -> VarSet {
        names
            .iter()
            .map(|n| match n.strip_suffix('\'') {
                Some(b) => Variable::prime(b),
                None => Variable::new(n),
            })
            .collect()
    }

    #[test]
    fn term_free_variables() {
        assert_eq!(fv_term(&parse_term("-x").unwrap()), vs(&["x"]));
        assert_eq!(fv_term(&parse_term("(x*y)'").unwrap()), vs(&["x", "y", "x'", "y'"]));
        assert_eq!(fv_term(&parse_term("5").unwrap()), VarSet::empty());
        assert_eq!(fv_term(&parse_term("f(.)+g()").unwrap()), VarSet::empty());
    }

    #[test]
    fn formula_free_variables() {
        assert_eq!(fv_formula(&parse_formula("[{x'=.}]x>=0").unwrap()), vs(&["x"]));
        assert_eq!(fv_formula(&parse_formula("\\exists x x>=y").unwrap()), vs(&["y"]));
        assert_eq!(fv_formula(&parse_formula("<x:=1>x>=y").unwrap()), vs(&["y"]));
        assert_eq!(fv_formula_with(&parse_formula("<x:=1>x>=y").unwrap(), FvMode::Coarse), vs(&["x", "y"]));
        assert_eq!(fv_formula(&parse_formula("<a>x>=y").unwrap()), VarSet::all());
    }

    #[test]
    fn loop_free_and_bound() {
        let g = parse_game("{x:=x+1; {x'=-x}}*").unwrap();
        let info = game_info(&g);
        assert_eq!(info.fv, vs(&["x"]));
        assert_eq!(info.bv, vs(&["x", "x'"]));
        assert_eq!(info.mbv, VarSet::empty());
    }

    #[test]
    fn ode_free_and_bound() {
        let g = parse_game("{x'=x^2, y'=z*x^2*y}").unwrap();
        assert_eq!(bv_game(&g), vs(&["x", "x'", "y", "y'"]));
        assert_eq!(fv_game(&g), vs(&["x", "y", "z"]));
        assert_eq!(mbv_game(&g), bv_game(&g));
    }

    #[test]
    fn choice_with_symbol_has_no_must_bound() {
        let g = parse_game("a ++ x:=1").unwrap();
        assert_eq!(mbv_game(&g), VarSet::empty());
        assert_eq!(bv_game(&g), VarSet::all());
        assert_eq!(game_info(&g).mbv, VarSet::empty());
    }

    #[test]
    fn sequential_refinement() {
        let g = parse_game("x:=x+1; {x'=-x}").unwrap();
        assert_eq!(fv_game(&g), vs(&["x"]));
        let g = parse_game("y:=1; x:=y+z").unwrap();
        assert_eq!(fv_game(&g), vs(&["z"]));
        assert_eq!(game_info_with(&g, FvMode::Coarse).fv, vs(&["y", "z"]));
    }

    #[test]
    fn diffgame_sets() {
        let g = parse_game("{x'=y*z &d y in (y<=1) & z in (z<=1)}").unwrap();
        assert_eq!(bv_game(&g), vs(&["x", "x'", "y", "y'", "z", "z'"]));
        assert_eq!(fv_game(&g), vs(&["x", "y", "z"]));
    }

    #[test]
    fn signatures_and_occurrences() {
        let f = parse_formula("<v:=f()>p(v)").unwrap();
        let sig: Vec<String> = signature(Expr::Formula(&f)).iter().map(|s| s.name().to_string()).collect();
        assert_eq!(sig, vec!["f", "p"]);
        assert!(signature(Expr::Term(&parse_term("x+1").unwrap())).is_empty());
        let occ = occurring_vars(Expr::Formula(&parse_formula("\\exists x x>=0").unwrap()));
        assert_eq!(occ.into_iter().collect::<VarSet>(), vs(&["x"]));
    }
}
