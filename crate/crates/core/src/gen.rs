//! Random well-formed terms, formulas, games and substitutions.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::seq::SliceRandom;
use rand::Rng;

use crate::semantics::Interpretation;
use crate::syntax::{CmpOp, DiffGame, Formula, Game, Symbol, Term, Variable};
use crate::usubst::{Replacement, USubst};
use crate::varset::VarSet;

pub const VARIABLES: [&str; 5] = ["x", "y", "z", "v", "w"];
pub const FUNCTIONS: [&str; 2] = ["f", "g"];
pub const PREDICATES: [&str; 2] = ["p", "q"];
pub const GAMES: [&str; 3] = ["a", "b", "c"];

/// What a generated expression may contain.
#[derive(Clone, Debug)]
pub struct Shape {
    pub vars: Vec<&'static str>,
    pub primes: bool,
    pub differentials: bool,
    pub symbols: bool,
    pub dot: bool,
    pub modal: bool,
    pub max_power: u32,
    pub diffgames: bool,
}

impl Default for Shape {
    fn default() -> Self {
        Shape {
            vars: VARIABLES.to_vec(),
            primes: true,
            differentials: true,
            symbols: true,
            dot: false,
            modal: true,
            max_power: 3,
            diffgames: true,
        }
    }
}

impl Shape {
    /// Polynomial terms only: no differential variables, no modalities.
    pub fn arithmetic() -> Self {
        Shape { primes: false, modal: false, diffgames: false, max_power: 2, ..Shape::default() }
    }
}

pub struct Gen<'r, R: Rng> {
    pub rng: &'r mut R,
    pub shape: Shape,
}

impl<'r, R: Rng> Gen<'r, R> {
    pub fn new(rng: &'r mut R, shape: Shape) -> Self {
        Gen { rng, shape }
    }

    fn with<T>(&mut self, shape: Shape, f: impl FnOnce(&mut Self) -> T) -> T {
        let saved = std::mem::replace(&mut self.shape, shape);
        let out = f(self);
        self.shape = saved;
        out
    }

    pub fn plain_var(&mut self) -> Variable {
        Variable::new(self.shape.vars.choose(self.rng).copied().unwrap_or("k"))
    }

    pub fn var(&mut self) -> Variable {
        let v = self.plain_var();
        if self.shape.primes && self.rng.gen_bool(0.15) {
            v.differential().expect("plain")
        } else {
            v
        }
    }

    fn number(&mut self) -> Term {
        let n: i64 = self.rng.gen_range(0..=5);
        if self.rng.gen_bool(0.2) {
            let d: i64 = self.rng.gen_range(2..=4);
            Term::Number(BigRational::new(BigInt::from(n), BigInt::from(d)))
        } else {
            Term::int(n)
        }
    }

    fn leaf(&mut self) -> Term {
        let mut opts = vec![0, 1];
        if self.shape.vars.is_empty() {
            opts = vec![1];
        }
        if self.shape.dot {
            opts.extend([2, 2]);
        }
        if self.shape.symbols {
            opts.push(3);
        }
        match *opts.choose(self.rng).expect("nonempty") {
            0 => Term::Var(self.var()),
            1 => self.number(),
            2 => Term::dot(),
            _ => Term::apply0(FUNCTIONS.choose(self.rng).expect("nonempty")),
        }
    }

    pub fn term(&mut self, depth: u32) -> Term {
        if depth == 0 || self.rng.gen_bool(0.25) {
            return self.leaf();
        }
        let d = depth - 1;
        match self.rng.gen_range(0..8) {
            0 => Term::plus(self.term(d), self.term(d)),
            1 => Term::minus(self.term(d), self.term(d)),
            2 => Term::times(self.term(d), self.term(d)),
            3 => Term::neg(self.term(d)),
            4 => {
                let n = self.rng.gen_range(0..=self.shape.max_power);
                Term::power(self.term(d), n)
            }
            5 if self.shape.symbols => Term::apply1(FUNCTIONS.choose(self.rng).expect("nonempty"), self.term(d)),
            6 if self.shape.differentials => {
                let inner = Shape { primes: false, differentials: false, dot: false, ..self.shape.clone() };
                Term::differential(self.with(inner, |g| g.term(d)))
            }
            _ => Term::plus(self.leaf(), self.term(d)),
        }
    }

    fn cmp(&mut self) -> CmpOp {
        *[CmpOp::Geq, CmpOp::Gt, CmpOp::Leq, CmpOp::Lt, CmpOp::Eq, CmpOp::Neq].choose(self.rng).expect("nonempty")
    }

    fn atom(&mut self, depth: u32) -> Formula {
        let td = depth.min(3);
        match self.rng.gen_range(0..6) {
            0 => {
                if self.rng.gen_bool(0.5) {
                    Formula::True
                } else {
                    Formula::False
                }
            }
            1 if self.shape.symbols => Formula::pred0(PREDICATES.choose(self.rng).expect("nonempty")),
            2 if self.shape.symbols => {
                let p = PREDICATES.choose(self.rng).expect("nonempty");
                Formula::pred1(p, self.term(td))
            }
            _ => Formula::cmp(self.cmp(), self.term(td), self.term(td)),
        }
    }

    pub fn formula(&mut self, depth: u32) -> Formula {
        if depth == 0 || self.rng.gen_bool(0.15) {
            return self.atom(depth);
        }
        let d = depth - 1;
        let modal = self.shape.modal;
        match self.rng.gen_range(0..10) {
            0 => Formula::not(self.formula(d)),
            1 => Formula::and(self.formula(d), self.formula(d)),
            2 => Formula::or(self.formula(d), self.formula(d)),
            3 => Formula::imply(self.formula(d), self.formula(d)),
            4 => Formula::equiv(self.formula(d), self.formula(d)),
            5 if modal => Formula::exists(self.plain_var(), self.formula(d)),
            6 if modal => Formula::forall(self.plain_var(), self.formula(d)),
            7 | 8 if modal => Formula::diamond(self.game(d), self.formula(d)),
            9 if modal => Formula::boxed(self.game(d), self.formula(d)),
            _ => self.atom(depth),
        }
    }

    /// Quantifier-free, modality-free formula.
    pub fn qff(&mut self, depth: u32) -> Formula {
        let shape = Shape { modal: false, ..self.shape.clone() };
        self.with(shape, |g| g.formula(depth))
    }

    fn ode(&mut self, depth: u32) -> (Vec<(Variable, Term)>, Formula) {
        let mut lhs: Vec<&str> = self.shape.vars.clone();
        lhs.shuffle(self.rng);
        let k = self.rng.gen_range(1..=2.min(lhs.len().max(1)));
        let rhs_shape = Shape { primes: false, differentials: false, ..self.shape.clone() };
        let eqs = lhs
            .iter()
            .take(k)
            .map(|x| (Variable::new(x), self.with(rhs_shape.clone(), |g| g.term(depth.min(3)))))
            .collect();
        let dom = if self.rng.gen_bool(0.5) {
            Formula::True
        } else {
            self.with(Shape { modal: false, ..rhs_shape }, |g| g.formula(depth.min(2)))
        };
        (eqs, dom)
    }

    fn diffgame(&mut self, depth: u32) -> Game {
        let mut pool: Vec<&'static str> = self.shape.vars.clone();
        pool.shuffle(self.rng);
        if pool.len() < 3 {
            return Game::assign(Variable::new(pool.first().copied().unwrap_or("k")), Term::int(0));
        }
        let (y, z, x) = (pool[0], pool[1], pool[2]);
        let rhs_shape = Shape { primes: false, differentials: false, ..self.shape.clone() };
        let rhs = self.with(rhs_shape.clone(), |g| g.term(depth.min(3)));
        let set = |g: &mut Self, c: &'static str| {
            let s = Shape { vars: vec![c], modal: false, ..rhs_shape.clone() };
            g.with(s, |g| g.formula(depth.min(2)))
        };
        let y_set = set(self, y);
        let z_set = set(self, z);
        Game::DiffGame(DiffGame {
            eqs: vec![(Variable::new(x), rhs)],
            y: Variable::new(y),
            y_set: Box::new(y_set),
            z: Variable::new(z),
            z_set: Box::new(z_set),
        })
    }

    pub fn game(&mut self, depth: u32) -> Game {
        if depth == 0 || self.rng.gen_bool(0.15) {
            return self.atomic_game(depth);
        }
        let d = depth - 1;
        match self.rng.gen_range(0..6) {
            0 => Game::choice(self.game(d), self.game(d)),
            1 | 2 => Game::compose(self.game(d), self.game(d)),
            3 => Game::repeat(self.game(d)),
            4 => Game::dual(self.game(d)),
            _ => self.atomic_game(depth),
        }
    }

    fn atomic_game(&mut self, depth: u32) -> Game {
        match self.rng.gen_range(0..7) {
            0 if self.shape.symbols => Game::symbol(GAMES.choose(self.rng).expect("nonempty")),
            1 if !self.shape.vars.is_empty() => {
                let (eqs, dom) = self.ode(depth);
                Game::ode(eqs, dom)
            }
            2 => Game::test(self.formula(depth.min(3))),
            3 if self.shape.diffgames && self.rng.gen_bool(0.3) => self.diffgame(depth),
            _ => {
                let t = self.term(depth.min(3));
                Game::assign(self.var(), t)
            }
        }
    }

    /// A replacement for `key`. Half the time its free variables come from
    /// the main pool (likely to clash), otherwise from outside it.
    pub fn replacement(&mut self, key: &Symbol, depth: u32) -> Replacement {
        let clash_prone = self.rng.gen_bool(0.5);
        let vars = if clash_prone { self.shape.vars.clone() } else { vec!["k"] };
        let dot = key.arity() == 1;
        let s = Shape { vars, dot, diffgames: false, ..self.shape.clone() };
        match key.kind() {
            crate::syntax::SymbolKind::Function => Replacement::Term(self.with(s, |g| g.term(depth))),
            crate::syntax::SymbolKind::Predicate => Replacement::Formula(self.with(s, |g| g.formula(depth))),
            crate::syntax::SymbolKind::Game => {
                let s = Shape { vars: self.shape.vars.clone(), dot: false, ..s };
                Replacement::Game(self.with(s, |g| g.game(depth)))
            }
        }
    }

    /// A random substitution over the symbol pools.
    pub fn subst(&mut self, depth: u32) -> USubst {
        let mut keys: Vec<Symbol> = Vec::new();
        for f in FUNCTIONS {
            keys.push(Symbol::function(f, 0));
            keys.push(Symbol::function(f, 1));
        }
        for p in PREDICATES {
            keys.push(Symbol::predicate(p, 0));
            keys.push(Symbol::predicate(p, 1));
        }
        for a in GAMES {
            keys.push(Symbol::game(a));
        }
        let mut s = USubst::new();
        for k in keys {
            if self.rng.gen_bool(0.45) {
                let r = self.replacement(&k, depth);
                let _ = s.insert(k, r);
            }
        }
        s
    }

    /// A random finite set of pool variables and their differentials.
    pub fn taboo(&mut self) -> VarSet {
        let mut u = VarSet::empty();
        for v in self.shape.vars.clone() {
            if self.rng.gen_bool(0.3) {
                u.insert(Variable::new(v));
            }
            if self.rng.gen_bool(0.15) {
                u.insert(Variable::prime(v));
            }
        }
        u
    }

    /// A random subset of a finite `u`.
    pub fn subset(&mut self, u: &VarSet) -> VarSet {
        match u.finite_members() {
            Some(m) => m.iter().filter(|_| self.rng.gen_bool(0.5)).cloned().collect(),
            None => VarSet::empty(),
        }
    }

    /// Polynomial interpretations for every function and predicate symbol of
    /// the pools.
    pub fn interpretation(&mut self) -> Interpretation {
        let dot_shape = Shape {
            vars: Vec::new(),
            primes: false,
            differentials: false,
            symbols: false,
            dot: true,
            modal: false,
            max_power: 2,
            diffgames: false,
        };
        let closed = Shape { dot: false, ..dot_shape.clone() };
        let mut i = Interpretation::new();
        for f in FUNCTIONS {
            let c = self.with(closed.clone(), |g| g.term(2));
            let d = self.with(dot_shape.clone(), |g| g.term(3));
            i = i
                .function(Symbol::function(f, 0), &c)
                .expect("closed term")
                .function(Symbol::function(f, 1), &d)
                .expect("dot term");
        }
        for p in PREDICATES {
            let c = self.with(closed.clone(), |g| g.formula(2));
            let d = self.with(dot_shape.clone(), |g| g.formula(2));
            i = i
                .predicate(Symbol::predicate(p, 0), &c)
                .expect("closed formula")
                .predicate(Symbol::predicate(p, 1), &d)
                .expect("dot formula");
        }
        i
    }

    /// A substitution on function and predicate symbols whose replacements
    /// are evaluable: polynomial terms and quantifier-free formulas.
    pub fn arithmetic_subst(&mut self, depth: u32) -> USubst {
        let shape = Shape { modal: false, differentials: false, ..Shape::arithmetic() };
        self.with(shape, |g| {
            let full = g.subst(depth);
            let mut s = USubst::new();
            for (k, r) in full.iter() {
                if !matches!(r, Replacement::Game(_)) {
                    let _ = s.insert(k.clone(), r.clone());
                }
            }
            s
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::syntax::{is_well_formed, Expr};
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn generated_expressions_are_well_formed() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let mut g = Gen::new(&mut rng, Shape::default());
        for d in 0..=7 {
            for _ in 0..200 {
                let f = g.formula(d);
                assert!(is_well_formed(Expr::Formula(&f)), "{f}");
                let a = g.game(d);
                assert!(is_well_formed(Expr::Game(&a)), "{a}");
            }
        }
    }

    #[test]
    fn substitutions_have_entries() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let mut g = Gen::new(&mut rng, Shape::default());
        let nonempty = (0..50).filter(|_| !g.subst(3).is_empty()).count();
        assert!(nonempty > 40);
        let _ = g.interpretation();
    }
}
