//! One-pass uniform substitution: a single sweep that carries the taboo set
//! (variables that replacements must not mention free) and checks it only at
//! replacement sites. Games return the taboo that holds after them.

use crate::statics::{bv_game, diffgame_bound, signature};
use crate::syntax::{DiffGame, Formula, Game, Symbol, Term};
use crate::usubst::{ClashInfo, DotSite, DotSubst, Lookup, SubstError, TabooedGame, USubst};
use crate::varset::VarSet;

/// How loops compute their taboo.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub enum LoopMode {
    /// First pass finds the output taboo, second pass runs under it.
    #[default]
    TwoPass,
    /// Add the bound variables of the substituted body up front; one pass.
    BoundVars,
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Options {
    pub loop_mode: LoopMode,
}

/// Work counters.
#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Stats {
    pub nodes: u64,
    pub assign_visits: u64,
    pub site_checks: u64,
}

impl Stats {
    fn add(&mut self, o: &Stats) {
        self.nodes += o.nodes;
        self.assign_visits += o.assign_visits;
        self.site_checks += o.site_checks;
    }
}

type R<T> = Result<T, SubstError>;

pub struct OnePass<'s, L: Lookup = USubst> {
    sigma: &'s L,
    opts: Options,
    stats: Stats,
}

impl<'s, L: Lookup> OnePass<'s, L> {
    pub fn new(sigma: &'s L) -> Self {
        OnePass { sigma, opts: Options::default(), stats: Stats::default() }
    }

    pub fn with_options(sigma: &'s L, opts: Options) -> Self {
        OnePass { sigma, opts, stats: Stats::default() }
    }

    pub fn stats(&self) -> Stats {
        self.stats
    }

    pub fn term(&mut self, u: &VarSet, t: &Term) -> R<Term> {
        self.t(u, t).map_err(SubstError::finish)
    }

    pub fn formula(&mut self, u: &VarSet, f: &Formula) -> R<Formula> {
        self.f(u, f).map_err(SubstError::finish)
    }

    pub fn game(&mut self, u: &VarSet, g: &Game) -> R<TabooedGame> {
        self.g(u, g).map(|(game, out_taboo)| TabooedGame { game, out_taboo }).map_err(SubstError::finish)
    }

    fn check(&mut self, key: &Symbol, fv: &VarSet, u: &VarSet) -> R<()> {
        self.stats.site_checks += 1;
        if fv.disjoint(u) {
            Ok(())
        } else {
            Err(SubstError::Clash(Box::new(ClashInfo::new(key.clone(), fv, u))))
        }
    }

    /// `{. ↦ arg}` applied to a replacement under the empty taboo.
    fn dot_apply<T>(
        &mut self,
        site: &Symbol,
        orig_arg: &Term,
        arg: Term,
        run: impl FnOnce(&mut OnePass<'_, DotSubst>) -> R<T>,
    ) -> R<T> {
        let ds = DotSubst::new(arg);
        let mut inner = OnePass { sigma: &ds, opts: self.opts, stats: Stats::default() };
        let r = run(&mut inner);
        self.stats.add(&inner.stats);
        r.map_err(|e| self.blame(site, orig_arg, e))
    }

    fn blame(&self, site: &Symbol, orig_arg: &Term, e: SubstError) -> SubstError {
        match e {
            SubstError::Clash(mut c) => {
                let culprits = signature(crate::syntax::Expr::Term(orig_arg))
                    .into_iter()
                    .filter(|s| self.sigma.key_fv(s).is_some_and(|fv| !fv.disjoint(&c.witness)))
                    .collect();
                let mut inner_path = std::mem::take(&mut c.path);
                inner_path.reverse();
                c.dot_site = Some(DotSite { site: site.clone(), inner_path, culprits });
                SubstError::Clash(c)
            }
            other => other.finish(),
        }
    }

    fn t(&mut self, u: &VarSet, t: &Term) -> R<Term> {
        self.stats.nodes += 1;
        let sigma = self.sigma;
        Ok(match t {
            Term::Var(_) | Term::Number(_) => t.clone(),
            Term::Apply(f, arg) => match sigma.function(f) {
                None => match arg {
                    None => t.clone(),
                    Some(a) => Term::Apply(f.clone(), Some(Box::new(self.t(u, a).map_err(|e| e.at(0))?))),
                },
                Some((repl, fv)) => {
                    let arg_star = match arg {
                        Some(a) => Some(self.t(u, a).map_err(|e| e.at(0))?),
                        None => None,
                    };
                    self.check(f, fv, u)?;
                    match (arg_star, arg) {
                        (Some(a), Some(orig)) => self.dot_apply(f, orig, a, |p| p.t(&VarSet::empty(), repl))?,
                        _ => repl.clone(),
                    }
                }
            },
            Term::Plus(a, b) => Term::plus(self.t(u, a).map_err(|e| e.at(0))?, self.t(u, b).map_err(|e| e.at(1))?),
            Term::Minus(a, b) => Term::minus(self.t(u, a).map_err(|e| e.at(0))?, self.t(u, b).map_err(|e| e.at(1))?),
            Term::Times(a, b) => Term::times(self.t(u, a).map_err(|e| e.at(0))?, self.t(u, b).map_err(|e| e.at(1))?),
            Term::Neg(a) => Term::neg(self.t(u, a).map_err(|e| e.at(0))?),
            Term::Power(a, n) => Term::power(self.t(u, a).map_err(|e| e.at(0))?, *n),
            Term::Differential(a) => Term::differential(self.t(&VarSet::all(), a).map_err(|e| e.at(0))?),
        })
    }

    fn f(&mut self, u: &VarSet, f: &Formula) -> R<Formula> {
        self.stats.nodes += 1;
        let sigma = self.sigma;
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Cmp(op, a, b) => {
                Formula::Cmp(*op, self.t(u, a).map_err(|e| e.at(0))?, self.t(u, b).map_err(|e| e.at(1))?)
            }
            Formula::Pred(p, arg) => match sigma.predicate(p) {
                None => match arg {
                    None => f.clone(),
                    Some(a) => Formula::Pred(p.clone(), Some(Box::new(self.t(u, a).map_err(|e| e.at(0))?))),
                },
                Some((repl, fv)) => {
                    let arg_star = match arg {
                        Some(a) => Some(self.t(u, a).map_err(|e| e.at(0))?),
                        None => None,
                    };
                    self.check(p, fv, u)?;
                    match (arg_star, arg) {
                        (Some(a), Some(orig)) => self.dot_apply(p, orig, a, |q| q.f(&VarSet::empty(), repl))?,
                        _ => repl.clone(),
                    }
                }
            },
            Formula::Not(a) => Formula::not(self.f(u, a).map_err(|e| e.at(0))?),
            Formula::And(a, b) => Formula::and(self.f(u, a).map_err(|e| e.at(0))?, self.f(u, b).map_err(|e| e.at(1))?),
            Formula::Or(a, b) => Formula::or(self.f(u, a).map_err(|e| e.at(0))?, self.f(u, b).map_err(|e| e.at(1))?),
            Formula::Imply(a, b) => {
                Formula::imply(self.f(u, a).map_err(|e| e.at(0))?, self.f(u, b).map_err(|e| e.at(1))?)
            }
            Formula::Equiv(a, b) => {
                Formula::equiv(self.f(u, a).map_err(|e| e.at(0))?, self.f(u, b).map_err(|e| e.at(1))?)
            }
            Formula::Exists(x, a) => {
                let ux = u.clone().with(x.clone());
                Formula::exists(x.clone(), self.f(&ux, a).map_err(|e| e.at(0))?)
            }
            Formula::Forall(x, a) => {
                let ux = u.clone().with(x.clone());
                Formula::forall(x.clone(), self.f(&ux, a).map_err(|e| e.at(0))?)
            }
            Formula::Diamond(g, a) => {
                let (gs, v) = self.g(u, g).map_err(|e| e.at(0))?;
                Formula::diamond(gs, self.f(&v, a).map_err(|e| e.at(1))?)
            }
            Formula::Box(g, a) => {
                let (gs, v) = self.g(u, g).map_err(|e| e.at(0))?;
                Formula::boxed(gs, self.f(&v, a).map_err(|e| e.at(1))?)
            }
        })
    }

    fn g(&mut self, u: &VarSet, g: &Game) -> R<(Game, VarSet)> {
        self.stats.nodes += 1;
        match g {
            Game::Symbol(a) => match self.sigma.game(a) {
                Some((repl, bv)) => Ok((repl.clone(), u.union(bv))),
                None => Ok((g.clone(), VarSet::all())),
            },
            Game::Assign(x, t) => {
                self.stats.assign_visits += 1;
                let ts = self.t(u, t).map_err(|e| e.at(0))?;
                Ok((Game::assign(x.clone(), ts), u.clone().with(x.clone())))
            }
            Game::Ode(eqs, dom) => {
                let mut up = u.clone();
                for (x, _) in eqs {
                    up.insert(x.clone());
                    if let Some(d) = x.differential() {
                        up.insert(d);
                    }
                }
                let mut out = Vec::with_capacity(eqs.len());
                for (i, (x, t)) in eqs.iter().enumerate() {
                    out.push((x.clone(), self.t(&up, t).map_err(|e| e.at(i))?));
                }
                let d = self.f(&up, dom).map_err(|e| e.at(eqs.len()))?;
                Ok((Game::ode(out, d), up))
            }
            Game::Test(f) => Ok((Game::test(self.f(u, f).map_err(|e| e.at(0))?), u.clone())),
            Game::Choice(a, b) => {
                let (a, v) = self.g(u, a).map_err(|e| e.at(0))?;
                let (b, w) = self.g(u, b).map_err(|e| e.at(1))?;
                Ok((Game::choice(a, b), v.union(&w)))
            }
            Game::Compose(a, b) => {
                let (a, v) = self.g(u, a).map_err(|e| e.at(0))?;
                let (b, w) = self.g(&v, b).map_err(|e| e.at(1))?;
                Ok((Game::compose(a, b), w))
            }
            Game::Loop(a) => self.looped(u, a),
            Game::Dual(a) => {
                let (a, v) = self.g(u, a).map_err(|e| e.at(0))?;
                Ok((Game::dual(a), v))
            }
            Game::DiffGame(dg) => self.diffgame(u, dg),
        }
    }

    fn looped(&mut self, u: &VarSet, body: &Game) -> R<(Game, VarSet)> {
        let w = match self.opts.loop_mode {
            LoopMode::TwoPass => self.g(u, body).map_err(|e| e.at(0))?.1,
            LoopMode::BoundVars => u.union(&substituted_bv(self.sigma, body)),
        };
        let (b, v) = self.g(&w, body).map_err(|e| e.at(0))?;
        if v != w {
            return Err(SubstError::FixpointViolation { first: w, second: v, path: Vec::new() });
        }
        Ok((Game::repeat(b), v))
    }

    /// Differential games: every listed `x, x'` and both controls with their
    /// differentials become taboo before anything inside is substituted.
    pub(crate) fn diffgame(&mut self, u: &VarSet, dg: &DiffGame) -> R<(Game, VarSet)> {
        let ub = u.union(&diffgame_bound(&dg.eqs, &dg.y, &dg.z));
        let mut eqs = Vec::with_capacity(dg.eqs.len());
        for (i, (x, t)) in dg.eqs.iter().enumerate() {
            eqs.push((x.clone(), self.t(&ub, t).map_err(|e| e.at(i))?));
        }
        let n = dg.eqs.len();
        let y_set = self.f(&ub, &dg.y_set).map_err(|e| e.at(n))?;
        let z_set = self.f(&ub, &dg.z_set).map_err(|e| e.at(n + 1))?;
        let out = DiffGame { eqs, y: dg.y.clone(), y_set: Box::new(y_set), z: dg.z.clone(), z_set: Box::new(z_set) };
        Ok((Game::DiffGame(out), ub))
    }
}

/// `bv(σ(α))` without substituting: game symbols contribute the bound
/// variables of their replacements, everything else its own.
pub fn substituted_bv<L: Lookup>(sigma: &L, g: &Game) -> VarSet {
    match g {
        Game::Symbol(a) => match sigma.game(a) {
            Some((_, bv)) => bv.clone(),
            None => VarSet::all(),
        },
        Game::Choice(a, b) | Game::Compose(a, b) => {
            let mut s = substituted_bv(sigma, a);
            if !s.is_all() {
                s.union_with(&substituted_bv(sigma, b));
            }
            s
        }
        Game::Loop(a) | Game::Dual(a) => substituted_bv(sigma, a),
        _ => bv_game(g),
    }
}

pub fn subst_term(sigma: &USubst, u: &VarSet, t: &Term) -> R<Term> {
    OnePass::new(sigma).term(u, t)
}

pub fn subst_formula(sigma: &USubst, u: &VarSet, f: &Formula) -> R<Formula> {
    OnePass::new(sigma).formula(u, f)
}

pub fn subst_game(sigma: &USubst, u: &VarSet, g: &Game) -> R<TabooedGame> {
    OnePass::new(sigma).game(u, g)
}

/// Uniform substitution without initial taboos.
pub fn us(sigma: &USubst, f: &Formula) -> R<Formula> {
    subst_formula(sigma, &VarSet::empty(), f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_game, parse_subst, parse_term};
    use crate::syntax::Variable;

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
    fn nullary_function() {
        let s = parse_subst("f() ~> -x").unwrap();
        let t = parse_term("f()").unwrap();
        assert_eq!(subst_term(&s, &VarSet::empty(), &t).unwrap(), parse_term("-x").unwrap());
        let e = subst_term(&s, &vs(&["x", "x'"]), &t).unwrap_err();
        assert_eq!(e.clash().unwrap().witness, vs(&["x"]));
        let id = USubst::new();
        assert_eq!(subst_term(&id, &VarSet::all(), &t).unwrap(), t);
    }

    #[test]
    fn clash_inside_replacement() {
        let s = parse_subst("p(.) ~> [{x'=.}]x>=0 ; f() ~> -x").unwrap();
        let f = parse_formula("<v:=f()>p(v) <-> p(f())").unwrap();
        let e = us(&s, &f).unwrap_err();
        let c = e.clash().unwrap();
        assert!(c.key.is_dot());
        assert_eq!(c.taboo, vs(&["x", "x'"]));
        assert_eq!(c.witness, vs(&["x"]));
        assert_eq!(c.path, vec![1]);
        let d = c.dot_site.as_ref().unwrap();
        assert_eq!(d.culprits, vec![Symbol::function("f", 0)]);
        assert!(c.to_string().contains("f()"));
    }

    #[test]
    fn sound_instance() {
        let s = parse_subst("p(.) ~> [{x:=x+.; {x'=.}}*](x+.>=0) ; f() ~> -v").unwrap();
        let f = parse_formula("<v:=f()>p(v) <-> p(f())").unwrap();
        let r = us(&s, &f).unwrap();
        let expect = parse_formula("<v:=-v>[{x:=x+v; {x'=v}}*]x+v>=0 <-> [{x:=x+-v; {x'=-v}}*]x+-v>=0").unwrap();
        assert_eq!(r, expect);
    }

    #[test]
    fn ode_clash_and_fix() {
        let f = parse_formula("<{x'=f(x), y'=a(x)*y}>x>=1 <-> <{x'=f(x)}>x>=1").unwrap();
        let s = parse_subst("f(.) ~> .^2 ; a(.) ~> z*y").unwrap();
        let e = us(&s, &f).unwrap_err();
        let c = e.clash().unwrap();
        assert_eq!(c.key, Symbol::function("a", 1));
        assert_eq!(c.witness, vs(&["y"]));
        assert_eq!(c.taboo, vs(&["x", "x'", "y", "y'"]));
        let s = parse_subst("f(.) ~> .^2 ; a(.) ~> z*.^2").unwrap();
        let r = us(&s, &f).unwrap();
        assert_eq!(r, parse_formula("<{x'=x^2, y'=z*x^2*y}>x>=1 <-> <{x'=x^2}>x>=1").unwrap());
    }

    #[test]
    fn game_cases() {
        let id = USubst::new();
        let r = subst_game(&id, &VarSet::empty(), &parse_game("x:=x+1").unwrap()).unwrap();
        assert_eq!(r.out_taboo, vs(&["x"]));
        let s = parse_subst("a ~> {x:=1}").unwrap();
        let r = subst_game(&s, &vs(&["y"]), &parse_game("a").unwrap()).unwrap();
        assert_eq!(r.game, parse_game("x:=1").unwrap());
        assert_eq!(r.out_taboo, vs(&["x", "y"]));
        let r = subst_game(&id, &VarSet::empty(), &parse_game("b").unwrap()).unwrap();
        assert!(r.out_taboo.is_all());
    }

    #[test]
    fn loop_with_dot() {
        let ds = DotSubst::new(Term::var("v"));
        let g = parse_game("{x:=x+.; {x'=.}}*").unwrap();
        for mode in [LoopMode::TwoPass, LoopMode::BoundVars] {
            let mut e = OnePass::with_options(&ds, Options { loop_mode: mode });
            let r = e.game(&VarSet::empty(), &g).unwrap();
            assert_eq!(r.out_taboo, vs(&["x", "x'"]));
            assert_eq!(r.game, parse_game("{x:=x+v; {x'=v}}*").unwrap());
        }
    }

    #[test]
    fn game_symbol_taboo_blocks_later_sites() {
        let s = parse_subst("p() ~> x>=0").unwrap();
        let e = us(&s, &parse_formula("<a>p()").unwrap()).unwrap_err();
        assert!(e.clash().unwrap().taboo.is_all());
    }

    #[test]
    fn nested_loops_double_work() {
        let g = parse_game("{{x:=x+1}*}*").unwrap();
        let id = USubst::new();
        let mut e = OnePass::new(&id);
        e.game(&VarSet::empty(), &g).unwrap();
        assert_eq!(e.stats().assign_visits, 4);
    }
}
