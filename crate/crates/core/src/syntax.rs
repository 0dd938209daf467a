//! Abstract syntax of terms, formulas and hybrid games.

use std::fmt;
use std::sync::Arc;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::Signed;

use crate::statics;
use crate::varset::VarSet;

/// A plain variable `x` or its differential variable `x'`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Variable {
    name: Arc<str>,
    primed: bool,
}

impl Variable {
    pub fn new(name: &str) -> Self {
        Variable { name: Arc::from(name), primed: false }
    }

    pub fn prime(name: &str) -> Self {
        Variable { name: Arc::from(name), primed: true }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn is_differential(&self) -> bool {
        self.primed
    }

    /// `x` for both `x` and `x'`.
    pub fn base(&self) -> Variable {
        Variable { name: self.name.clone(), primed: false }
    }

    /// `x'` for `x`. Differential variables have no differential of their own.
    pub fn differential(&self) -> Option<Variable> {
        if self.primed {
            None
        } else {
            Some(Variable { name: self.name.clone(), primed: true })
        }
    }

    pub fn has_valid_name(&self) -> bool {
        let mut cs = self.name.chars();
        matches!(cs.next(), Some(c) if c.is_ascii_alphabetic()) && cs.all(|c| c.is_ascii_alphanumeric() || c == '_')
    }
}

impl fmt::Display for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)?;
        if self.primed {
            f.write_str("'")?;
        }
        Ok(())
    }
}

impl fmt::Debug for Variable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub enum SymbolKind {
    Function,
    Predicate,
    Game,
}

impl fmt::Display for SymbolKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SymbolKind::Function => "function",
            SymbolKind::Predicate => "predicate",
            SymbolKind::Game => "game",
        })
    }
}

pub const DOT_NAME: &str = ".";

/// Function, predicate or game symbol. Identity includes the arity.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Symbol {
    kind: SymbolKind,
    name: Arc<str>,
    arity: u8,
}

impl Symbol {
    pub fn function(name: &str, arity: u8) -> Self {
        Symbol { kind: SymbolKind::Function, name: Arc::from(name), arity }
    }

    pub fn predicate(name: &str, arity: u8) -> Self {
        Symbol { kind: SymbolKind::Predicate, name: Arc::from(name), arity }
    }

    pub fn game(name: &str) -> Self {
        Symbol { kind: SymbolKind::Game, name: Arc::from(name), arity: 0 }
    }

    /// The reserved nullary function symbol marking argument positions.
    pub fn dot() -> Self {
        Symbol::function(DOT_NAME, 0)
    }

    pub fn is_dot(&self) -> bool {
        self.kind == SymbolKind::Function && &*self.name == DOT_NAME
    }

    pub fn kind(&self) -> SymbolKind {
        self.kind
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn arity(&self) -> u8 {
        self.arity
    }
}

impl fmt::Display for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            SymbolKind::Game => f.write_str(&self.name),
            _ if self.is_dot() => f.write_str("."),
            _ if self.arity == 0 => write!(f, "{}()", self.name),
            _ => write!(f, "{}(.)", self.name),
        }
    }
}

impl fmt::Debug for Symbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Term {
    Var(Variable),
    Number(BigRational),
    /// Function application; `None` for nullary symbols (including the dot).
    Apply(Symbol, Option<Box<Term>>),
    Plus(Box<Term>, Box<Term>),
    Minus(Box<Term>, Box<Term>),
    Times(Box<Term>, Box<Term>),
    Neg(Box<Term>),
    Power(Box<Term>, u32),
    Differential(Box<Term>),
}

#[derive(Clone, Copy, PartialEq, Eq, Hash, Debug)]
pub enum CmpOp {
    Geq,
    Gt,
    Leq,
    Lt,
    Eq,
    Neq,
}

impl CmpOp {
    pub fn as_str(self) -> &'static str {
        match self {
            CmpOp::Geq => ">=",
            CmpOp::Gt => ">",
            CmpOp::Leq => "<=",
            CmpOp::Lt => "<",
            CmpOp::Eq => "=",
            CmpOp::Neq => "!=",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Formula {
    True,
    False,
    Cmp(CmpOp, Term, Term),
    Pred(Symbol, Option<Box<Term>>),
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Imply(Box<Formula>, Box<Formula>),
    Equiv(Box<Formula>, Box<Formula>),
    Exists(Variable, Box<Formula>),
    Forall(Variable, Box<Formula>),
    Diamond(Box<Game>, Box<Formula>),
    Box(Box<Game>, Box<Formula>),
}

/// A differential game `x'=θ &d y in Y & z in Z`: Demon controls `y`, Angel `z`.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct DiffGame {
    pub eqs: Vec<(Variable, Term)>,
    pub y: Variable,
    pub y_set: Box<Formula>,
    pub z: Variable,
    pub z_set: Box<Formula>,
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Game {
    Symbol(Symbol),
    Assign(Variable, Term),
    Ode(Vec<(Variable, Term)>, Box<Formula>),
    Test(Box<Formula>),
    Choice(Box<Game>, Box<Game>),
    Compose(Box<Game>, Box<Game>),
    Loop(Box<Game>),
    Dual(Box<Game>),
    DiffGame(DiffGame),
}

/// Borrowed view over any of the three syntactic categories.
#[derive(Clone, Copy, Debug)]
pub enum Expr<'a> {
    Term(&'a Term),
    Formula(&'a Formula),
    Game(&'a Game),
}

/// Owned counterpart of [`Expr`].
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum Expression {
    Term(Term),
    Formula(Formula),
    Game(Game),
}

impl Expression {
    pub fn as_expr(&self) -> Expr<'_> {
        match self {
            Expression::Term(t) => Expr::Term(t),
            Expression::Formula(f) => Expr::Formula(f),
            Expression::Game(g) => Expr::Game(g),
        }
    }
}

// ---------------------------------------------------------------------------
// construction helpers

impl Term {
    pub fn var(name: &str) -> Term {
        Term::Var(Variable::new(name))
    }

    pub fn int(n: i64) -> Term {
        Term::Number(BigRational::from_integer(BigInt::from(n)))
    }

    pub fn dot() -> Term {
        Term::Apply(Symbol::dot(), None)
    }

    pub fn apply0(name: &str) -> Term {
        Term::Apply(Symbol::function(name, 0), None)
    }

    pub fn apply1(name: &str, arg: Term) -> Term {
        Term::Apply(Symbol::function(name, 1), Some(Box::new(arg)))
    }

    pub fn plus(a: Term, b: Term) -> Term {
        Term::Plus(Box::new(a), Box::new(b))
    }

    pub fn minus(a: Term, b: Term) -> Term {
        Term::Minus(Box::new(a), Box::new(b))
    }

    pub fn times(a: Term, b: Term) -> Term {
        Term::Times(Box::new(a), Box::new(b))
    }

    pub fn neg(a: Term) -> Term {
        Term::Neg(Box::new(a))
    }

    pub fn power(a: Term, n: u32) -> Term {
        Term::Power(Box::new(a), n)
    }

    pub fn differential(a: Term) -> Term {
        Term::Differential(Box::new(a))
    }

    /// Number of AST nodes.
    pub fn size(&self) -> usize {
        match self {
            Term::Var(_) | Term::Number(_) | Term::Apply(_, None) => 1,
            Term::Apply(_, Some(a)) | Term::Neg(a) | Term::Power(a, _) | Term::Differential(a) => 1 + a.size(),
            Term::Plus(a, b) | Term::Minus(a, b) | Term::Times(a, b) => 1 + a.size() + b.size(),
        }
    }
}

impl Formula {
    pub fn cmp(op: CmpOp, a: Term, b: Term) -> Formula {
        Formula::Cmp(op, a, b)
    }

    pub fn geq(a: Term, b: Term) -> Formula {
        Formula::Cmp(CmpOp::Geq, a, b)
    }

    pub fn pred0(name: &str) -> Formula {
        Formula::Pred(Symbol::predicate(name, 0), None)
    }

    pub fn pred1(name: &str, arg: Term) -> Formula {
        Formula::Pred(Symbol::predicate(name, 1), Some(Box::new(arg)))
    }

    pub fn not(a: Formula) -> Formula {
        Formula::Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn imply(a: Formula, b: Formula) -> Formula {
        Formula::Imply(Box::new(a), Box::new(b))
    }

    pub fn equiv(a: Formula, b: Formula) -> Formula {
        Formula::Equiv(Box::new(a), Box::new(b))
    }

    pub fn exists(x: Variable, a: Formula) -> Formula {
        Formula::Exists(x, Box::new(a))
    }

    pub fn forall(x: Variable, a: Formula) -> Formula {
        Formula::Forall(x, Box::new(a))
    }

    pub fn diamond(g: Game, a: Formula) -> Formula {
        Formula::Diamond(Box::new(g), Box::new(a))
    }

    pub fn boxed(g: Game, a: Formula) -> Formula {
        Formula::Box(Box::new(g), Box::new(a))
    }

    pub fn size(&self) -> usize {
        match self {
            Formula::True | Formula::False | Formula::Pred(_, None) => 1,
            Formula::Cmp(_, a, b) => 1 + a.size() + b.size(),
            Formula::Pred(_, Some(a)) => 1 + a.size(),
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => 1 + a.size(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                1 + a.size() + b.size()
            }
            Formula::Diamond(g, a) | Formula::Box(g, a) => 1 + g.size() + a.size(),
        }
    }

    /// True when no quantifier or modality occurs.
    pub fn is_first_order_free(&self) -> bool {
        match self {
            Formula::True | Formula::False | Formula::Cmp(..) | Formula::Pred(..) => true,
            Formula::Not(a) => a.is_first_order_free(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                a.is_first_order_free() && b.is_first_order_free()
            }
            Formula::Exists(..) | Formula::Forall(..) | Formula::Diamond(..) | Formula::Box(..) => false,
        }
    }
}

impl Game {
    pub fn symbol(name: &str) -> Game {
        Game::Symbol(Symbol::game(name))
    }

    pub fn assign(x: Variable, t: Term) -> Game {
        Game::Assign(x, t)
    }

    pub fn test(f: Formula) -> Game {
        Game::Test(Box::new(f))
    }

    pub fn ode(eqs: Vec<(Variable, Term)>, domain: Formula) -> Game {
        Game::Ode(eqs, Box::new(domain))
    }

    pub fn choice(a: Game, b: Game) -> Game {
        Game::Choice(Box::new(a), Box::new(b))
    }

    pub fn compose(a: Game, b: Game) -> Game {
        Game::Compose(Box::new(a), Box::new(b))
    }

    pub fn repeat(a: Game) -> Game {
        Game::Loop(Box::new(a))
    }

    pub fn dual(a: Game) -> Game {
        Game::Dual(Box::new(a))
    }

    pub fn size(&self) -> usize {
        match self {
            Game::Symbol(_) => 1,
            Game::Assign(_, t) => 1 + t.size(),
            Game::Ode(eqs, dom) => 1 + eqs.iter().map(|(_, t)| t.size()).sum::<usize>() + dom.size(),
            Game::Test(f) => 1 + f.size(),
            Game::Choice(a, b) | Game::Compose(a, b) => 1 + a.size() + b.size(),
            Game::Loop(a) | Game::Dual(a) => 1 + a.size(),
            Game::DiffGame(dg) => {
                1 + dg.eqs.iter().map(|(_, t)| t.size()).sum::<usize>() + dg.y_set.size() + dg.z_set.size()
            }
        }
    }
}

impl Expr<'_> {
    pub fn size(&self) -> usize {
        match self {
            Expr::Term(t) => t.size(),
            Expr::Formula(f) => f.size(),
            Expr::Game(g) => g.size(),
        }
    }
}

// ---------------------------------------------------------------------------
// well-formedness

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum ViolationKind {
    BadVariableName(Variable),
    /// `(θ)'` where θ mentions a differential variable or another differential.
    NestedDifferential,
    ArityMismatch(Symbol),
    WrongSymbolKind(Symbol),
    NegativeLiteral,
    QuantifiedDifferential(Variable),
    OdeLhsDifferential(Variable),
    OdeDuplicateLhs(Variable),
    ControlNotFree {
        control: Variable,
        offending: Variable,
    },
    ControlsNotDistinct(Variable),
    ControlDifferential(Variable),
    ControlSetNotQuantifierFree(Variable),
}

impl fmt::Display for ViolationKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ViolationKind::BadVariableName(v) => write!(f, "invalid variable name `{v}`"),
            ViolationKind::NestedDifferential => {
                f.write_str("differential of a term mentioning differential variables")
            }
            ViolationKind::ArityMismatch(s) => write!(f, "arity mismatch for symbol {s}"),
            ViolationKind::WrongSymbolKind(s) => {
                write!(f, "{} symbol `{}` in the wrong position", s.kind(), s.name())
            }
            ViolationKind::NegativeLiteral => f.write_str("negative number literal (use negation)"),
            ViolationKind::QuantifiedDifferential(v) => {
                write!(f, "quantifier over differential variable {v}")
            }
            ViolationKind::OdeLhsDifferential(v) => {
                write!(f, "differential equation for differential variable {v}")
            }
            ViolationKind::OdeDuplicateLhs(v) => write!(f, "duplicate differential equation for {v}"),
            ViolationKind::ControlNotFree { control, offending } => {
                write!(f, "control set for {control} mentions {offending}")
            }
            ViolationKind::ControlsNotDistinct(v) => write!(f, "controls coincide ({v})"),
            ViolationKind::ControlDifferential(v) => write!(f, "control {v} is a differential variable"),
            ViolationKind::ControlSetNotQuantifierFree(v) => {
                write!(f, "control set for {v} has quantifiers or modalities")
            }
        }
    }
}

/// An invariant violation and the child-index path to the offending node.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Violation {
    pub path: Vec<usize>,
    pub kind: ViolationKind,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "at ")?;
        if self.path.is_empty() {
            write!(f, "root")?;
        } else {
            for (i, p) in self.path.iter().enumerate() {
                if i > 0 {
                    write!(f, ".")?;
                }
                write!(f, "{p}")?;
            }
        }
        write!(f, ": {}", self.kind)
    }
}

struct WfChecker {
    path: Vec<usize>,
    out: Vec<Violation>,
}

impl WfChecker {
    fn report(&mut self, kind: ViolationKind) {
        self.out.push(Violation { path: self.path.clone(), kind });
    }

    fn child<F: FnOnce(&mut Self)>(&mut self, i: usize, f: F) {
        self.path.push(i);
        f(self);
        self.path.pop();
    }

    fn var(&mut self, v: &Variable) {
        if !v.has_valid_name() {
            self.report(ViolationKind::BadVariableName(v.clone()));
        }
    }

    fn symbol(&mut self, s: &Symbol, kind: SymbolKind, has_arg: bool) {
        if s.kind() != kind {
            self.report(ViolationKind::WrongSymbolKind(s.clone()));
        }
        if (s.arity() == 1) != has_arg || s.arity() > 1 || (s.is_dot() && has_arg) {
            self.report(ViolationKind::ArityMismatch(s.clone()));
        }
    }

    fn term(&mut self, t: &Term) {
        match t {
            Term::Var(v) => self.var(v),
            Term::Number(n) => {
                if n.is_negative() {
                    self.report(ViolationKind::NegativeLiteral);
                }
            }
            Term::Apply(s, arg) => {
                self.symbol(s, SymbolKind::Function, arg.is_some());
                if let Some(a) = arg {
                    self.child(0, |c| c.term(a));
                }
            }
            Term::Plus(a, b) | Term::Minus(a, b) | Term::Times(a, b) => {
                self.child(0, |c| c.term(a));
                self.child(1, |c| c.term(b));
            }
            Term::Neg(a) | Term::Power(a, _) => self.child(0, |c| c.term(a)),
            Term::Differential(a) => {
                let fv = statics::fv_term(a);
                let has_diff = match fv.finite_members() {
                    Some(s) => s.iter().any(|v| v.is_differential()),
                    None => true,
                };
                if has_diff {
                    self.report(ViolationKind::NestedDifferential);
                }
                self.child(0, |c| c.term(a));
            }
        }
    }

    fn formula(&mut self, f: &Formula) {
        match f {
            Formula::True | Formula::False => {}
            Formula::Cmp(_, a, b) => {
                self.child(0, |c| c.term(a));
                self.child(1, |c| c.term(b));
            }
            Formula::Pred(s, arg) => {
                self.symbol(s, SymbolKind::Predicate, arg.is_some());
                if let Some(a) = arg {
                    self.child(0, |c| c.term(a));
                }
            }
            Formula::Not(a) => self.child(0, |c| c.formula(a)),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                self.child(0, |c| c.formula(a));
                self.child(1, |c| c.formula(b));
            }
            Formula::Exists(x, a) | Formula::Forall(x, a) => {
                self.var(x);
                if x.is_differential() {
                    self.report(ViolationKind::QuantifiedDifferential(x.clone()));
                }
                self.child(0, |c| c.formula(a));
            }
            Formula::Diamond(g, a) | Formula::Box(g, a) => {
                self.child(0, |c| c.game(g));
                self.child(1, |c| c.formula(a));
            }
        }
    }

    fn ode_lhs(&mut self, eqs: &[(Variable, Term)]) {
        for (i, (x, t)) in eqs.iter().enumerate() {
            self.var(x);
            if x.is_differential() {
                self.report(ViolationKind::OdeLhsDifferential(x.clone()));
            }
            if eqs[..i].iter().any(|(y, _)| y == x) {
                self.report(ViolationKind::OdeDuplicateLhs(x.clone()));
            }
            self.child(i, |c| c.term(t));
        }
    }

    fn game(&mut self, g: &Game) {
        match g {
            Game::Symbol(s) => self.symbol(s, SymbolKind::Game, false),
            Game::Assign(x, t) => {
                self.var(x);
                self.child(0, |c| c.term(t));
            }
            Game::Ode(eqs, dom) => {
                self.ode_lhs(eqs);
                self.child(eqs.len(), |c| c.formula(dom));
            }
            Game::Test(f) => self.child(0, |c| c.formula(f)),
            Game::Choice(a, b) | Game::Compose(a, b) => {
                self.child(0, |c| c.game(a));
                self.child(1, |c| c.game(b));
            }
            Game::Loop(a) | Game::Dual(a) => self.child(0, |c| c.game(a)),
            Game::DiffGame(dg) => {
                self.ode_lhs(&dg.eqs);
                let n = dg.eqs.len();
                for v in [&dg.y, &dg.z] {
                    self.var(v);
                    if v.is_differential() {
                        self.report(ViolationKind::ControlDifferential(v.clone()));
                    }
                }
                if dg.y == dg.z {
                    self.report(ViolationKind::ControlsNotDistinct(dg.y.clone()));
                }
                for (i, (ctl, set)) in [(&dg.y, &dg.y_set), (&dg.z, &dg.z_set)].into_iter().enumerate() {
                    self.child(n + i, |c| {
                        let fv = statics::fv_formula(set);
                        let offending = match &fv {
                            VarSet::Finite(s) => s.iter().find(|v| *v != ctl).cloned(),
                            VarSet::Cofinite(_) => Some(ctl.differential().unwrap_or_else(|| ctl.clone())),
                        };
                        if let Some(o) = offending {
                            c.report(ViolationKind::ControlNotFree { control: ctl.clone(), offending: o });
                        }
                        c.formula(set);
                    });
                }
            }
        }
    }
}

/// Every invariant violation in `e`, in preorder.
pub fn well_formed(e: Expr<'_>) -> Vec<Violation> {
    let mut c = WfChecker { path: Vec::new(), out: Vec::new() };
    match e {
        Expr::Term(t) => c.term(t),
        Expr::Formula(f) => c.formula(f),
        Expr::Game(g) => c.game(g),
    }
    c.out
}

pub fn is_well_formed(e: Expr<'_>) -> bool {
    well_formed(e).is_empty()
}
