//! Exact evaluation of terms and quantifier-free formulas over rational
//! states, with polynomial interpretations of function symbols.
//!
//! Differentials are evaluated by symbolic differentiation. Adjoint
//! interpretations fold a substitution into the interpretation by
//! evaluating replacements at a fixed anchor state.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::onepass::{subst_formula, subst_term};
use crate::statics::{occurring_vars, signature};
use crate::syntax::{CmpOp, Expr, Formula, Symbol, SymbolKind, Term, Variable};
use crate::usubst::{Lookup, SubstError, USubst};
use crate::varset::VarSet;

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum SemError {
    #[error("symbol {0} is not interpreted")]
    Uninterpreted(Symbol),
    #[error("interpretation of {symbol} is not a dot-{what}: {reason}")]
    BadInterpretation { symbol: Symbol, what: &'static str, reason: String },
    #[error("cannot evaluate {0}")]
    Unsupported(&'static str),
    #[error("differential of a term mentioning the differential variable {0}")]
    NestedDifferential(Variable),
}

type R<T> = Result<T, SemError>;

fn rat(n: i64) -> BigRational {
    BigRational::from_integer(BigInt::from(n))
}

/// A total map from variables to rationals, zero where not listed.
#[derive(Clone, PartialEq, Eq, Default)]
pub struct State(BTreeMap<Variable, BigRational>);

impl State {
    pub fn new() -> Self {
        State::default()
    }

    pub fn get(&self, v: &Variable) -> BigRational {
        self.0.get(v).cloned().unwrap_or_else(BigRational::zero)
    }

    pub fn set(&mut self, v: Variable, r: BigRational) {
        if r.is_zero() {
            self.0.remove(&v);
        } else {
            self.0.insert(v, r);
        }
    }

    pub fn with(mut self, v: Variable, r: BigRational) -> Self {
        self.set(v, r);
        self
    }

    /// Explicit (nonzero) entries.
    pub fn iter(&self) -> impl Iterator<Item = (&Variable, &BigRational)> {
        self.0.iter()
    }

    /// Agreement on every variable of `vars`.
    pub fn agrees_on(&self, other: &State, vars: &BTreeSet<Variable>) -> bool {
        vars.iter().all(|v| self.get(v) == other.get(v))
    }
}

impl<S: AsRef<str>> FromIterator<(S, i64)> for State {
    fn from_iter<I: IntoIterator<Item = (S, i64)>>(it: I) -> Self {
        let mut s = State::new();
        for (name, n) in it {
            let name = name.as_ref();
            let v = match name.strip_suffix('\'') {
                Some(b) => Variable::prime(b),
                None => Variable::new(name),
            };
            s.set(v, rat(n));
        }
        s
    }
}

impl fmt::Debug for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (i, (v, r)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{v}={r}")?;
        }
        f.write_str("}")
    }
}

fn dot_var() -> Variable {
    Variable::new(".")
}

type Monomial = BTreeMap<Variable, u32>;

/// Multivariate polynomial with rational coefficients.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct Poly(BTreeMap<Monomial, BigRational>);

impl Poly {
    pub fn zero() -> Self {
        Poly::default()
    }

    pub fn constant(c: BigRational) -> Self {
        let mut p = Poly::zero();
        p.add_term(Monomial::new(), c);
        p
    }

    pub fn var(v: Variable) -> Self {
        let mut m = Monomial::new();
        m.insert(v, 1);
        let mut p = Poly::zero();
        p.add_term(m, BigRational::one());
        p
    }

    fn add_term(&mut self, m: Monomial, c: BigRational) {
        if c.is_zero() {
            return;
        }
        let e = self.0.entry(m).or_insert_with(BigRational::zero);
        *e += c;
        if e.is_zero() {
            self.0.retain(|_, c| !c.is_zero());
        }
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_empty()
    }

    pub fn variables(&self) -> BTreeSet<Variable> {
        self.0.keys().flat_map(|m| m.keys().cloned()).collect()
    }

    pub fn degree(&self) -> u32 {
        self.0.keys().map(|m| m.values().sum()).max().unwrap_or(0)
    }

    pub fn add(&self, o: &Poly) -> Poly {
        let mut p = self.clone();
        for (m, c) in &o.0 {
            p.add_term(m.clone(), c.clone());
        }
        p
    }

    pub fn neg(&self) -> Poly {
        Poly(self.0.iter().map(|(m, c)| (m.clone(), -c)).collect())
    }

    pub fn sub(&self, o: &Poly) -> Poly {
        self.add(&o.neg())
    }

    pub fn mul(&self, o: &Poly) -> Poly {
        let mut p = Poly::zero();
        for (m1, c1) in &self.0 {
            for (m2, c2) in &o.0 {
                let mut m = m1.clone();
                for (v, e) in m2 {
                    *m.entry(v.clone()).or_insert(0) += e;
                }
                p.add_term(m, c1 * c2);
            }
        }
        p
    }

    pub fn pow(&self, n: u32) -> Poly {
        let mut acc = Poly::constant(BigRational::one());
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = acc.mul(&base);
            }
            n >>= 1;
            if n > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    pub fn derivative(&self, v: &Variable) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.0 {
            if let Some(&e) = m.get(v) {
                let mut m = m.clone();
                if e == 1 {
                    m.remove(v);
                } else {
                    m.insert(v.clone(), e - 1);
                }
                p.add_term(m, c * rat(e as i64));
            }
        }
        p
    }

    pub fn eval(&self, s: &State) -> BigRational {
        let mut sum = BigRational::zero();
        for (m, c) in &self.0 {
            let mut t = c.clone();
            for (v, e) in m {
                t *= num_traits::pow(s.get(v), *e as usize);
            }
            sum += t;
        }
        sum
    }

    /// Replace `v` by `q` everywhere.
    pub fn compose(&self, v: &Variable, q: &Poly) -> Poly {
        let mut p = Poly::zero();
        let mut powers: BTreeMap<u32, Poly> = BTreeMap::new();
        for (m, c) in &self.0 {
            let mut rest = m.clone();
            let e = rest.remove(v).unwrap_or(0);
            let mut t = Poly::zero();
            t.add_term(rest, c.clone());
            if e > 0 {
                let qe = powers.entry(e).or_insert_with(|| q.pow(e));
                t = t.mul(qe);
            }
            p = p.add(&t);
        }
        p
    }

    /// Fix every variable except `keep` to its value in `s`.
    pub fn anchor(&self, s: &State, keep: &Variable) -> Poly {
        let mut p = Poly::zero();
        for (m, c) in &self.0 {
            let mut c = c.clone();
            let mut rest = Monomial::new();
            for (v, e) in m {
                if v == keep {
                    rest.insert(v.clone(), *e);
                } else {
                    c *= num_traits::pow(s.get(v), *e as usize);
                }
            }
            p.add_term(rest, c);
        }
        p
    }

    /// `Σ v' · ∂p/∂v` over the state variables of `p`.
    pub fn total_differential(&self) -> R<Poly> {
        let mut out = Poly::zero();
        for v in self.variables() {
            if v == dot_var() {
                continue;
            }
            let vp = v.differential().ok_or_else(|| SemError::NestedDifferential(v.clone()))?;
            out = out.add(&Poly::var(vp).mul(&self.derivative(&v)));
        }
        Ok(out)
    }
}

/// Quantifier-free formula over polynomial comparisons with zero.
#[derive(Clone, PartialEq, Eq, Debug)]
enum Qff {
    Const(bool),
    Cmp(CmpOp, Poly),
    Not(Box<Qff>),
    And(Box<Qff>, Box<Qff>),
    Or(Box<Qff>, Box<Qff>),
    Imply(Box<Qff>, Box<Qff>),
    Equiv(Box<Qff>, Box<Qff>),
}

fn compare(op: CmpOp, a: &BigRational, b: &BigRational) -> bool {
    match op {
        CmpOp::Geq => a >= b,
        CmpOp::Gt => a > b,
        CmpOp::Leq => a <= b,
        CmpOp::Lt => a < b,
        CmpOp::Eq => a == b,
        CmpOp::Neq => a != b,
    }
}

impl Qff {
    fn eval(&self, s: &State) -> bool {
        match self {
            Qff::Const(b) => *b,
            Qff::Cmp(op, p) => compare(*op, &p.eval(s), &BigRational::zero()),
            Qff::Not(a) => !a.eval(s),
            Qff::And(a, b) => a.eval(s) && b.eval(s),
            Qff::Or(a, b) => a.eval(s) || b.eval(s),
            Qff::Imply(a, b) => !a.eval(s) || b.eval(s),
            Qff::Equiv(a, b) => a.eval(s) == b.eval(s),
        }
    }
}

/// Polynomial meanings for function symbols and quantifier-free meanings
/// for predicate symbols, each in terms of the dot.
#[derive(Clone, Debug, Default)]
pub struct Interpretation {
    functions: BTreeMap<Symbol, Poly>,
    predicates: BTreeMap<Symbol, Qff>,
}

fn dot_only(symbol: &Symbol, what: &'static str, e: Expr<'_>) -> R<()> {
    let bad = |reason: String| SemError::BadInterpretation { symbol: symbol.clone(), what, reason };
    if let Some(v) = occurring_vars(e).into_iter().next() {
        return Err(bad(format!("mentions variable {v}")));
    }
    for s in signature(e) {
        if !s.is_dot() {
            return Err(bad(format!("mentions symbol {s}")));
        }
        if symbol.arity() == 0 {
            return Err(bad("nullary symbol with a dot".into()));
        }
    }
    Ok(())
}

impl Interpretation {
    pub fn new() -> Self {
        Interpretation::default()
    }

    /// Interpret `f` as the polynomial dot-term `body`.
    pub fn function(mut self, f: Symbol, body: &Term) -> R<Self> {
        dot_only(&f, "term", Expr::Term(body))?;
        let p = self.term_poly(body)?;
        self.functions.insert(f, p);
        Ok(self)
    }

    /// Interpret `p` as the quantifier-free dot-formula `body`.
    pub fn predicate(mut self, p: Symbol, body: &Formula) -> R<Self> {
        dot_only(&p, "formula", Expr::Formula(body))?;
        let q = self.qff(body, &State::new())?;
        self.predicates.insert(p, q);
        Ok(self)
    }

    pub fn interprets(&self, s: &Symbol) -> bool {
        self.functions.contains_key(s) || self.predicates.contains_key(s)
    }

    fn apply(&self, f: &Symbol, arg: Option<Poly>) -> R<Poly> {
        let body = self.functions.get(f).ok_or_else(|| SemError::Uninterpreted(f.clone()))?;
        Ok(match arg {
            Some(a) => body.compose(&dot_var(), &a),
            None => body.clone(),
        })
    }

    fn term_poly(&self, t: &Term) -> R<Poly> {
        Ok(match t {
            Term::Var(v) => Poly::var(v.clone()),
            Term::Number(n) => Poly::constant(n.clone()),
            Term::Apply(s, _) if s.is_dot() => Poly::var(dot_var()),
            Term::Apply(f, arg) => {
                let a = match arg {
                    Some(a) => Some(self.term_poly(a)?),
                    None => None,
                };
                self.apply(f, a)?
            }
            Term::Plus(a, b) => self.term_poly(a)?.add(&self.term_poly(b)?),
            Term::Minus(a, b) => self.term_poly(a)?.sub(&self.term_poly(b)?),
            Term::Times(a, b) => self.term_poly(a)?.mul(&self.term_poly(b)?),
            Term::Neg(a) => self.term_poly(a)?.neg(),
            Term::Power(a, n) => self.term_poly(a)?.pow(*n),
            Term::Differential(a) => self.term_poly(a)?.total_differential()?,
        })
    }

    /// Compile a quantifier-free formula, fixing all state variables to
    /// `anchor`; only the dot stays symbolic.
    fn qff(&self, f: &Formula, anchor: &State) -> R<Qff> {
        let b = |x: &Formula| self.qff(x, anchor).map(Box::new);
        Ok(match f {
            Formula::True => Qff::Const(true),
            Formula::False => Qff::Const(false),
            Formula::Cmp(op, a, c) => {
                Qff::Cmp(*op, self.term_poly(a)?.sub(&self.term_poly(c)?).anchor(anchor, &dot_var()))
            }
            Formula::Pred(p, arg) => {
                let body = self.predicates.get(p).ok_or_else(|| SemError::Uninterpreted(p.clone()))?;
                match arg {
                    None => body.clone(),
                    Some(a) => {
                        let a = self.term_poly(a)?.anchor(anchor, &dot_var());
                        substitute_qff(body, &a)
                    }
                }
            }
            Formula::Not(a) => Qff::Not(b(a)?),
            Formula::And(x, y) => Qff::And(b(x)?, b(y)?),
            Formula::Or(x, y) => Qff::Or(b(x)?, b(y)?),
            Formula::Imply(x, y) => Qff::Imply(b(x)?, b(y)?),
            Formula::Equiv(x, y) => Qff::Equiv(b(x)?, b(y)?),
            Formula::Exists(..) | Formula::Forall(..) => return Err(SemError::Unsupported("quantifier")),
            Formula::Diamond(..) | Formula::Box(..) => return Err(SemError::Unsupported("modality")),
        })
    }

    /// The adjoint interpretation: each symbol bound by `sigma` denotes the
    /// value of its replacement at `omega`, as a function of the dot.
    pub fn adjoint(&self, sigma: &USubst, omega: &State) -> R<Interpretation> {
        let mut out = self.clone();
        for k in sigma.keys() {
            if k.kind() == SymbolKind::Game {
                continue;
            }
            // A bare application reads both ways; at least one reading must
            // evaluate.
            let mut first_err = None;
            let mut any = false;
            let fsym = Symbol::function(k.name(), k.arity());
            if let Some((t, _)) = sigma.function(&fsym) {
                match self.term_poly(t) {
                    Ok(p) => {
                        any = true;
                        out.functions.insert(fsym, p.anchor(omega, &dot_var()));
                    }
                    Err(e) => first_err = Some(e),
                }
            }
            let psym = Symbol::predicate(k.name(), k.arity());
            if let Some((f, _)) = sigma.predicate(&psym) {
                match self.qff(f, omega) {
                    Ok(q) => {
                        any = true;
                        out.predicates.insert(psym, q);
                    }
                    Err(e) => first_err = first_err.or(Some(e)),
                }
            }
            if let (false, Some(e)) = (any, first_err) {
                return Err(e);
            }
        }
        Ok(out)
    }
}

fn substitute_qff(q: &Qff, a: &Poly) -> Qff {
    let s = |x: &Qff| Box::new(substitute_qff(x, a));
    match q {
        Qff::Const(b) => Qff::Const(*b),
        Qff::Cmp(op, p) => Qff::Cmp(*op, p.compose(&dot_var(), a)),
        Qff::Not(x) => Qff::Not(s(x)),
        Qff::And(x, y) => Qff::And(s(x), s(y)),
        Qff::Or(x, y) => Qff::Or(s(x), s(y)),
        Qff::Imply(x, y) => Qff::Imply(s(x), s(y)),
        Qff::Equiv(x, y) => Qff::Equiv(s(x), s(y)),
    }
}

/// Value of `t` in state `nu`.
pub fn eval_term(i: &Interpretation, nu: &State, t: &Term) -> R<BigRational> {
    Ok(match t {
        Term::Var(v) => nu.get(v),
        Term::Number(n) => n.clone(),
        Term::Apply(s, _) if s.is_dot() => return Err(SemError::Uninterpreted(s.clone())),
        Term::Apply(f, arg) => {
            let body = i.functions.get(f).ok_or_else(|| SemError::Uninterpreted(f.clone()))?;
            let mut s = State::new();
            if let Some(a) = arg {
                s.set(dot_var(), eval_term(i, nu, a)?);
            }
            body.eval(&s)
        }
        Term::Plus(a, b) => eval_term(i, nu, a)? + eval_term(i, nu, b)?,
        Term::Minus(a, b) => eval_term(i, nu, a)? - eval_term(i, nu, b)?,
        Term::Times(a, b) => eval_term(i, nu, a)? * eval_term(i, nu, b)?,
        Term::Neg(a) => -eval_term(i, nu, a)?,
        Term::Power(a, n) => num_traits::pow(eval_term(i, nu, a)?, *n as usize),
        Term::Differential(_) => i.term_poly(t)?.eval(nu),
    })
}

/// Truth value of a quantifier-free, modality-free formula.
pub fn eval_qff(i: &Interpretation, nu: &State, f: &Formula) -> R<bool> {
    Ok(match f {
        Formula::True => true,
        Formula::False => false,
        Formula::Cmp(op, a, b) => compare(*op, &eval_term(i, nu, a)?, &eval_term(i, nu, b)?),
        Formula::Pred(p, arg) => {
            let body = i.predicates.get(p).ok_or_else(|| SemError::Uninterpreted(p.clone()))?;
            let mut s = State::new();
            if let Some(a) = arg {
                s.set(dot_var(), eval_term(i, nu, a)?);
            }
            body.eval(&s)
        }
        Formula::Not(a) => !eval_qff(i, nu, a)?,
        Formula::And(a, b) => eval_qff(i, nu, a)? && eval_qff(i, nu, b)?,
        Formula::Or(a, b) => eval_qff(i, nu, a)? || eval_qff(i, nu, b)?,
        Formula::Imply(a, b) => !eval_qff(i, nu, a)? || eval_qff(i, nu, b)?,
        Formula::Equiv(a, b) => eval_qff(i, nu, a)? == eval_qff(i, nu, b)?,
        Formula::Exists(..) | Formula::Forall(..) => return Err(SemError::Unsupported("quantifier")),
        Formula::Diamond(..) | Formula::Box(..) => return Err(SemError::Unsupported("modality")),
    })
}

pub fn adjoint_eval_term(sigma: &USubst, i: &Interpretation, omega: &State, nu: &State, t: &Term) -> R<BigRational> {
    eval_term(&i.adjoint(sigma, omega)?, nu, t)
}

pub fn adjoint_eval_qff(sigma: &USubst, i: &Interpretation, omega: &State, nu: &State, f: &Formula) -> R<bool> {
    eval_qff(&i.adjoint(sigma, omega)?, nu, f)
}

/// Partial derivative of `t` with respect to `v`, as a polynomial.
pub fn partial_derivative(i: &Interpretation, t: &Term, v: &Variable) -> R<Poly> {
    Ok(i.term_poly(t)?.derivative(v))
}

/// Polynomial denoted by `t` under `i`.
pub fn term_poly(i: &Interpretation, t: &Term) -> R<Poly> {
    i.term_poly(t)
}

/// Rational with numerator and denominator in `[-9, 9]`.
pub fn small_rational<G: Rng>(rng: &mut G) -> BigRational {
    let n: i64 = rng.gen_range(-9..=9);
    let mut d: i64 = 0;
    while d == 0 {
        d = rng.gen_range(-9..=9);
    }
    BigRational::new(BigInt::from(n), BigInt::from(d))
}

pub fn random_state<G: Rng>(universe: &BTreeSet<Variable>, rng: &mut G) -> State {
    let mut s = State::new();
    for v in universe {
        s.set(v.clone(), small_rational(rng));
    }
    s
}

/// A state agreeing with `omega` outside `u`, resampled on the members of
/// `u` within `universe` (a cofinite `u` is cut down to the universe).
pub fn sample_variation(omega: &State, u: &VarSet, universe: &BTreeSet<Variable>, seed: u64) -> State {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    variation(omega, u, universe, &mut rng)
}

fn variation<G: Rng>(omega: &State, u: &VarSet, universe: &BTreeSet<Variable>, rng: &mut G) -> State {
    let mut nu = omega.clone();
    let mut members: BTreeSet<Variable> = universe.iter().filter(|v| u.contains(v)).cloned().collect();
    if let Some(fin) = u.finite_members() {
        members.extend(fin.iter().cloned());
    }
    members.extend(omega.iter().map(|(v, _)| v.clone()).filter(|v| u.contains(v)));
    for v in members {
        nu.set(v, small_rational(rng));
    }
    nu
}

#[derive(Clone, PartialEq, Debug)]
pub enum Outcome {
    Pass,
    /// The substitution clashed, so there is nothing to compare.
    Precondition(SubstError),
    Counterexample {
        omega: State,
        nu: State,
        substituted: String,
        adjoint: String,
    },
    Error(SemError),
}

#[derive(Clone, PartialEq, Debug)]
pub struct Report {
    pub trials: usize,
    pub outcome: Outcome,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.outcome == Outcome::Pass
    }
}

fn universe_of(sigma: &USubst, e: Expr<'_>, u: &VarSet) -> BTreeSet<Variable> {
    let mut vars = occurring_vars(e);
    for (_, r) in sigma.iter() {
        vars.extend(occurring_vars(r.as_expr()));
    }
    if let Some(fin) = u.finite_members() {
        vars.extend(fin.iter().cloned());
    }
    let primes: Vec<Variable> = vars.iter().filter_map(Variable::differential).collect();
    vars.extend(primes);
    vars
}

fn check<T: PartialEq + fmt::Display>(
    sigma: &USubst,
    u: &VarSet,
    e: Expr<'_>,
    trials: usize,
    seed: u64,
    lhs: impl Fn(&State) -> R<T>,
    rhs: impl Fn(&State, &State) -> R<T>,
) -> Report {
    let universe = universe_of(sigma, e, u);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for n in 0..trials {
        let omega = random_state(&universe, &mut rng);
        let nu = variation(&omega, u, &universe, &mut rng);
        let (a, b) = match (lhs(&nu), rhs(&omega, &nu)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(e), _) | (_, Err(e)) => return Report { trials: n, outcome: Outcome::Error(e) },
        };
        if a != b {
            return Report {
                trials: n + 1,
                outcome: Outcome::Counterexample { omega, nu, substituted: a.to_string(), adjoint: b.to_string() },
            };
        }
    }
    Report { trials, outcome: Outcome::Pass }
}

/// Compare the substituted term at `U`-variations `ν` of `ω` with the
/// original term under the adjoint anchored at `ω`.
pub fn check_lemma9(sigma: &USubst, u: &VarSet, t: &Term, i: &Interpretation, trials: usize, seed: u64) -> Report {
    let st = match subst_term(sigma, u, t) {
        Ok(st) => st,
        Err(e) => return Report { trials: 0, outcome: Outcome::Precondition(e) },
    };
    check(
        sigma,
        u,
        Expr::Term(t),
        trials,
        seed,
        |nu| eval_term(i, nu, &st),
        |omega, nu| adjoint_eval_term(sigma, i, omega, nu, t),
    )
}

/// The same comparison for quantifier-free, modality-free formulas.
pub fn check_lemma10_qff(
    sigma: &USubst,
    u: &VarSet,
    f: &Formula,
    i: &Interpretation,
    trials: usize,
    seed: u64,
) -> Report {
    let sf = match subst_formula(sigma, u, f) {
        Ok(sf) => sf,
        Err(e) => return Report { trials: 0, outcome: Outcome::Precondition(e) },
    };
    check(
        sigma,
        u,
        Expr::Formula(f),
        trials,
        seed,
        |nu| eval_qff(i, nu, &sf),
        |omega, nu| adjoint_eval_qff(sigma, i, omega, nu, f),
    )
}

/// Evaluate `t` with `adjoint` ignoring the substitution's clash check, to
/// show what goes wrong without it.
pub fn unchecked_mismatch(
    sigma: &USubst,
    i: &Interpretation,
    omega: &State,
    nu: &State,
    t: &Term,
) -> R<Option<(BigRational, BigRational)>> {
    let st = crate::onepass::subst_term(sigma, &VarSet::empty(), t)
        .map_err(|_| SemError::Unsupported("clash even with empty taboo"))?;
    let a = eval_term(i, nu, &st)?;
    let b = adjoint_eval_term(sigma, i, omega, nu, t)?;
    Ok(if a == b { None } else { Some((a, b)) })
}

/// Central difference quotient of `t` in direction `v` at `nu`.
pub fn central_difference(i: &Interpretation, t: &Term, v: &Variable, nu: &State, h: &BigRational) -> R<BigRational> {
    let mut up = nu.clone();
    up.set(v.clone(), nu.get(v) + h);
    let mut down = nu.clone();
    down.set(v.clone(), nu.get(v) - h);
    Ok((eval_term(i, &up, t)? - eval_term(i, &down, t)?) / (h * rat(2)))
}

/// Error bound for the central difference of a polynomial along `v`:
/// `Σ_{k odd, k≥3} |p⁽ᵏ⁾(ν)|/k!`, so that the error is at most this times `h²`.
pub fn central_difference_bound(p: &Poly, v: &Variable, nu: &State) -> BigRational {
    let mut bound = BigRational::zero();
    let mut d = p.derivative(v);
    let mut fact = BigRational::one();
    let mut k = 1u32;
    while !d.is_zero() {
        if k >= 3 && k % 2 == 1 {
            bound += d.eval(nu).abs() / &fact;
        }
        k += 1;
        fact *= rat(k as i64);
        d = d.derivative(v);
    }
    bound
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_subst, parse_term};

    fn st(pairs: &[(&str, i64)]) -> State {
        pairs.iter().map(|(n, v)| (*n, *v)).collect()
    }

    fn interp() -> Interpretation {
        Interpretation::new()
            .function(Symbol::function("f", 1), &parse_term(".^2").unwrap())
            .unwrap()
            .predicate(Symbol::predicate("p", 1), &parse_formula(".>=0").unwrap())
            .unwrap()
    }

    #[test]
    fn term_values() {
        let i = interp();
        assert_eq!(eval_term(&i, &st(&[("x", 3)]), &parse_term("x+1").unwrap()).unwrap(), rat(4));
        assert_eq!(eval_term(&i, &st(&[("x", 2)]), &parse_term("f(x)*x").unwrap()).unwrap(), rat(8));
        let nu = st(&[("x", 1), ("y", 2), ("x'", 5), ("y'", 7)]);
        assert_eq!(eval_term(&i, &nu, &parse_term("(x*y)'").unwrap()).unwrap(), rat(17));
        assert_eq!(eval_term(&i, &nu, &parse_term("(f(x+y))'").unwrap()).unwrap(), rat(2 * 3 * 12));
    }

    #[test]
    fn formula_values() {
        let i = interp();
        assert!(eval_qff(&i, &st(&[("x", 1)]), &parse_formula("x>=1 & !x>=2").unwrap()).unwrap());
        assert!(!eval_qff(&i, &st(&[("x", -1)]), &parse_formula("p(x)").unwrap()).unwrap());
        assert_eq!(
            eval_qff(&i, &State::new(), &parse_formula("<a>true").unwrap()),
            Err(SemError::Unsupported("modality"))
        );
    }

    #[test]
    fn interpretations_are_dot_only() {
        assert!(Interpretation::new().function(Symbol::function("f", 1), &parse_term(".+x").unwrap()).is_err());
        assert!(Interpretation::new().function(Symbol::function("f", 0), &parse_term(".").unwrap()).is_err());
        assert!(Interpretation::new().function(Symbol::function("f", 1), &parse_term("g(.)").unwrap()).is_err());
        let e = eval_term(&Interpretation::new(), &State::new(), &parse_term("g()").unwrap());
        assert_eq!(e, Err(SemError::Uninterpreted(Symbol::function("g", 0))));
    }

    #[test]
    fn adjoint_examples() {
        let i = interp();
        let s = parse_subst("f() ~> -x").unwrap();
        let omega = st(&[("x", 4)]);
        for nu in [State::new(), st(&[("x", 9)])] {
            assert_eq!(adjoint_eval_term(&s, &i, &omega, &nu, &parse_term("f()").unwrap()).unwrap(), rat(-4));
        }
        let t = parse_term("f(x)*x+y").unwrap();
        let nu = st(&[("x", 2), ("y", 1)]);
        assert_eq!(adjoint_eval_term(&USubst::new(), &i, &omega, &nu, &t).unwrap(), eval_term(&i, &nu, &t).unwrap());
        let s = parse_subst("f(.) ~> .^2").unwrap();
        let t = parse_term("f(y)").unwrap();
        assert_eq!(adjoint_eval_term(&s, &i, &omega, &st(&[("y", 3)]), &t).unwrap(), rat(9));
    }

    #[test]
    fn variations() {
        let omega = st(&[("x", 1), ("y", 2), ("z", 3)]);
        let universe: BTreeSet<Variable> = ["x", "y", "z"].iter().map(|n| Variable::new(n)).collect();
        assert_eq!(sample_variation(&omega, &VarSet::empty(), &universe, 7), omega);
        for seed in 0..50 {
            let nu = sample_variation(&omega, &VarSet::singleton(Variable::new("x")), &universe, seed);
            assert_eq!(nu.get(&Variable::new("y")), rat(2));
            assert_eq!(nu.get(&Variable::new("z")), rat(3));
        }
        let u = VarSet::all().without(&Variable::new("y"));
        let changed = (0..50).any(|seed| {
            let nu = sample_variation(&omega, &u, &universe, seed);
            assert_eq!(nu.get(&Variable::new("y")), rat(2));
            nu.get(&Variable::new("x")) != rat(1)
        });
        assert!(changed);
    }

    #[test]
    fn lemma9_examples() {
        let i = interp().function(Symbol::function("f", 0), &parse_term("1").unwrap()).unwrap();
        let s = parse_subst("f() ~> -x").unwrap();
        assert!(check_lemma9(&s, &VarSet::empty(), &parse_term("f()+x").unwrap(), &i, 100, 1).passed());
        let s = parse_subst("f(.) ~> .^2").unwrap();
        let u = VarSet::singleton(Variable::new("y"));
        assert!(check_lemma9(&s, &u, &parse_term("f(x)*y").unwrap(), &i, 1000, 2).passed());
        let s = parse_subst("f() ~> x").unwrap();
        let u = VarSet::singleton(Variable::new("x"));
        let r = check_lemma9(&s, &u, &parse_term("f()").unwrap(), &i, 10, 3);
        assert!(matches!(r.outcome, Outcome::Precondition(_)));
        let m = unchecked_mismatch(&s, &i, &st(&[("x", 0)]), &st(&[("x", 1)]), &parse_term("f()").unwrap()).unwrap();
        assert_eq!(m, Some((rat(1), rat(0))));
    }

    #[test]
    fn lemma10_fragment() {
        let i = interp();
        let s = parse_subst("p(.) ~> .>=x ; f(.) ~> .*y").unwrap();
        let f = parse_formula("p(f(z)) -> z>=0 | p(z)").unwrap();
        assert!(check_lemma10_qff(&s, &VarSet::singleton(Variable::new("w")), &f, &i, 500, 4).passed());
    }

    #[test]
    fn differentiation_against_central_differences() {
        let i = interp();
        let h = BigRational::new(BigInt::one(), BigInt::from(1u64 << 16));
        let x = Variable::new("x");
        for src in ["x^3*y-2*x", "f(x+y)*x", "(x-1)^5+x^2", "7"] {
            let t = parse_term(src).unwrap();
            let nu = st(&[("x", 3), ("y", -2)]);
            let p = term_poly(&i, &t).unwrap();
            let sym = partial_derivative(&i, &t, &x).unwrap().eval(&nu);
            let num = central_difference(&i, &t, &x, &nu, &h).unwrap();
            let err = (sym - num).abs();
            assert!(err <= central_difference_bound(&p, &x, &nu) * &h * &h, "{src}");
        }
    }

    #[test]
    fn coincidence_on_free_variables() {
        let i = interp();
        let t = parse_term("(x*f(y))'+z").unwrap();
        let fv = crate::statics::fv_term(&t);
        let nu = st(&[("x", 1), ("y", 2), ("z", 3), ("x'", 4), ("y'", 5), ("w", 9)]);
        let omega = nu.clone().with(Variable::new("w"), rat(-1)).with(Variable::new("z'"), rat(2));
        assert!(!fv.contains(&Variable::new("w")));
        assert_eq!(eval_term(&i, &nu, &t).unwrap(), eval_term(&i, &omega, &t).unwrap());
    }
}
