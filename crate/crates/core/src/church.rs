//! Reference substitution in the classical style: substitute homomorphically
//! and check admissibility at every binding operator, recomputing bound
//! variables and signatures each time.

use crate::statics::{bv_game, diffgame_bound, signature};
use crate::syntax::{DiffGame, Expr, Formula, Game, Symbol, Term};
use crate::usubst::{ClashInfo, DotSite, DotSubst, Lookup, SubstError, USubst};
use crate::varset::VarSet;

type R<T> = Result<T, SubstError>;

/// Keys of `sigma` occurring in `e` whose replacements mention a variable
/// of `u`, with the offending variables. Empty means `sigma` is
/// `u`-admissible for `e`.
pub fn admissible<L: Lookup>(sigma: &L, u: &VarSet, e: Expr<'_>) -> Vec<(Symbol, VarSet)> {
    let mut out = Vec::new();
    for s in signature(e) {
        if let Some(fv) = sigma.key_fv(&s) {
            if !fv.disjoint(u) {
                out.push((s.clone(), fv.intersect(u)));
            }
        }
    }
    out
}

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct ChurchStats {
    pub nodes: u64,
    pub admissibility_checks: u64,
}

pub struct Church<'s, L: Lookup = USubst> {
    sigma: &'s L,
    stats: ChurchStats,
}

impl<'s, L: Lookup> Church<'s, L> {
    pub fn new(sigma: &'s L) -> Self {
        Church { sigma, stats: ChurchStats::default() }
    }

    pub fn stats(&self) -> ChurchStats {
        self.stats
    }

    pub fn term(&mut self, t: &Term) -> R<Term> {
        self.t(t).map_err(SubstError::finish)
    }

    pub fn formula(&mut self, f: &Formula) -> R<Formula> {
        self.f(f).map_err(SubstError::finish)
    }

    pub fn game(&mut self, g: &Game) -> R<Game> {
        self.g(g).map_err(SubstError::finish)
    }

    fn require(&mut self, op: &'static str, u: &VarSet, e: Expr<'_>) -> R<()> {
        self.stats.admissibility_checks += 1;
        match admissible(self.sigma, u, e).into_iter().next() {
            None => Ok(()),
            Some((key, _)) => {
                let fv = self.sigma.key_fv(&key).expect("bound key").clone();
                let mut c = ClashInfo::new(key, &fv, u);
                c.operator = Some(op);
                Err(SubstError::Clash(Box::new(c)))
            }
        }
    }

    fn dot_apply<T>(
        &mut self,
        site: &Symbol,
        orig_arg: &Term,
        arg: Term,
        run: impl FnOnce(&mut Church<'_, DotSubst>) -> R<T>,
    ) -> R<T> {
        let ds = DotSubst::new(arg);
        let mut inner = Church { sigma: &ds, stats: ChurchStats::default() };
        let r = run(&mut inner);
        self.stats.nodes += inner.stats.nodes;
        self.stats.admissibility_checks += inner.stats.admissibility_checks;
        r.map_err(|e| match e {
            SubstError::Clash(mut c) => {
                let culprits = signature(Expr::Term(orig_arg))
                    .into_iter()
                    .filter(|s| self.sigma.key_fv(s).is_some_and(|fv| !fv.disjoint(&c.witness)))
                    .collect();
                let mut inner_path = std::mem::take(&mut c.path);
                inner_path.reverse();
                c.dot_site = Some(DotSite { site: site.clone(), inner_path, culprits });
                SubstError::Clash(c)
            }
            other => other.finish(),
        })
    }

    fn t(&mut self, t: &Term) -> R<Term> {
        self.stats.nodes += 1;
        let sigma = self.sigma;
        Ok(match t {
            Term::Var(_) | Term::Number(_) => t.clone(),
            Term::Apply(f, arg) => {
                let arg_star = match arg {
                    Some(a) => Some(self.t(a).map_err(|e| e.at(0))?),
                    None => None,
                };
                match (sigma.function(f), arg_star, arg) {
                    (Some((repl, _)), Some(a), Some(orig)) => self.dot_apply(f, orig, a, |c| c.t(repl))?,
                    (Some((repl, _)), _, _) => repl.clone(),
                    (None, a, _) => Term::Apply(f.clone(), a.map(Box::new)),
                }
            }
            Term::Plus(a, b) => Term::plus(self.t(a).map_err(|e| e.at(0))?, self.t(b).map_err(|e| e.at(1))?),
            Term::Minus(a, b) => Term::minus(self.t(a).map_err(|e| e.at(0))?, self.t(b).map_err(|e| e.at(1))?),
            Term::Times(a, b) => Term::times(self.t(a).map_err(|e| e.at(0))?, self.t(b).map_err(|e| e.at(1))?),
            Term::Neg(a) => Term::neg(self.t(a).map_err(|e| e.at(0))?),
            Term::Power(a, n) => Term::power(self.t(a).map_err(|e| e.at(0))?, *n),
            Term::Differential(a) => {
                self.require("differential", &VarSet::all(), Expr::Term(a))?;
                Term::differential(self.t(a).map_err(|e| e.at(0))?)
            }
        })
    }

    fn f(&mut self, f: &Formula) -> R<Formula> {
        self.stats.nodes += 1;
        let sigma = self.sigma;
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Cmp(op, a, b) => {
                Formula::Cmp(*op, self.t(a).map_err(|e| e.at(0))?, self.t(b).map_err(|e| e.at(1))?)
            }
            Formula::Pred(p, arg) => {
                let arg_star = match arg {
                    Some(a) => Some(self.t(a).map_err(|e| e.at(0))?),
                    None => None,
                };
                match (sigma.predicate(p), arg_star, arg) {
                    (Some((repl, _)), Some(a), Some(orig)) => self.dot_apply(p, orig, a, |c| c.f(repl))?,
                    (Some((repl, _)), _, _) => repl.clone(),
                    (None, a, _) => Formula::Pred(p.clone(), a.map(Box::new)),
                }
            }
            Formula::Not(a) => Formula::not(self.f(a).map_err(|e| e.at(0))?),
            Formula::And(a, b) => Formula::and(self.f(a).map_err(|e| e.at(0))?, self.f(b).map_err(|e| e.at(1))?),
            Formula::Or(a, b) => Formula::or(self.f(a).map_err(|e| e.at(0))?, self.f(b).map_err(|e| e.at(1))?),
            Formula::Imply(a, b) => Formula::imply(self.f(a).map_err(|e| e.at(0))?, self.f(b).map_err(|e| e.at(1))?),
            Formula::Equiv(a, b) => Formula::equiv(self.f(a).map_err(|e| e.at(0))?, self.f(b).map_err(|e| e.at(1))?),
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                self.require("quantifier", &VarSet::singleton(x.clone()), Expr::Formula(a))?;
                let body = self.f(a).map_err(|e| e.at(0))?;
                if matches!(f, Formula::Exists(..)) {
                    Formula::exists(x.clone(), body)
                } else {
                    Formula::forall(x.clone(), body)
                }
            }
            Formula::Diamond(g, a) | Formula::Box(g, a) => {
                let gs = self.g(g).map_err(|e| e.at(0))?;
                self.require("modality", &bv_game(&gs), Expr::Formula(a))?;
                let post = self.f(a).map_err(|e| e.at(1))?;
                if matches!(f, Formula::Diamond(..)) {
                    Formula::diamond(gs, post)
                } else {
                    Formula::boxed(gs, post)
                }
            }
        })
    }

    fn g(&mut self, g: &Game) -> R<Game> {
        self.stats.nodes += 1;
        Ok(match g {
            Game::Symbol(a) => match self.sigma.game(a) {
                Some((repl, _)) => repl.clone(),
                None => g.clone(),
            },
            Game::Assign(x, t) => Game::assign(x.clone(), self.t(t).map_err(|e| e.at(0))?),
            Game::Ode(eqs, dom) => {
                let b = bv_game(g);
                let mut out = Vec::with_capacity(eqs.len());
                for (i, (x, t)) in eqs.iter().enumerate() {
                    self.require("differential equation", &b, Expr::Term(t)).map_err(|e| e.at(i))?;
                    out.push((x.clone(), self.t(t).map_err(|e| e.at(i))?));
                }
                self.require("differential equation", &b, Expr::Formula(dom)).map_err(|e| e.at(eqs.len()))?;
                Game::ode(out, self.f(dom).map_err(|e| e.at(eqs.len()))?)
            }
            Game::Test(f) => Game::test(self.f(f).map_err(|e| e.at(0))?),
            Game::Choice(a, b) => Game::choice(self.g(a).map_err(|e| e.at(0))?, self.g(b).map_err(|e| e.at(1))?),
            Game::Compose(a, b) => {
                let a = self.g(a).map_err(|e| e.at(0))?;
                self.require("sequential composition", &bv_game(&a), Expr::Game(b))?;
                Game::compose(a, self.g(b).map_err(|e| e.at(1))?)
            }
            Game::Loop(a) => {
                let body = self.g(a).map_err(|e| e.at(0))?;
                self.require("loop", &bv_game(&body), Expr::Game(a))?;
                Game::repeat(body)
            }
            Game::Dual(a) => Game::dual(self.g(a).map_err(|e| e.at(0))?),
            Game::DiffGame(dg) => Game::DiffGame(self.diffgame(dg)?),
        })
    }

    fn diffgame(&mut self, dg: &DiffGame) -> R<DiffGame> {
        let b = diffgame_bound(&dg.eqs, &dg.y, &dg.z);
        let op = "differential game";
        let mut eqs = Vec::with_capacity(dg.eqs.len());
        for (i, (x, t)) in dg.eqs.iter().enumerate() {
            self.require(op, &b, Expr::Term(t)).map_err(|e| e.at(i))?;
            eqs.push((x.clone(), self.t(t).map_err(|e| e.at(i))?));
        }
        let n = dg.eqs.len();
        self.require(op, &b, Expr::Formula(&dg.y_set)).map_err(|e| e.at(n))?;
        let y_set = self.f(&dg.y_set).map_err(|e| e.at(n))?;
        self.require(op, &b, Expr::Formula(&dg.z_set)).map_err(|e| e.at(n + 1))?;
        let z_set = self.f(&dg.z_set).map_err(|e| e.at(n + 1))?;
        Ok(DiffGame { eqs, y: dg.y.clone(), y_set: Box::new(y_set), z: dg.z.clone(), z_set: Box::new(z_set) })
    }
}

pub fn church_term(sigma: &USubst, t: &Term) -> R<Term> {
    Church::new(sigma).term(t)
}

pub fn church_formula(sigma: &USubst, f: &Formula) -> R<Formula> {
    Church::new(sigma).formula(f)
}

pub fn church_game(sigma: &USubst, g: &Game) -> R<Game> {
    Church::new(sigma).game(g)
}
