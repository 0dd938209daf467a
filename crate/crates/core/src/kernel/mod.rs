//! Proof kernel: concrete axioms, uniform substitution as a proof rule,
//! modus ponens, generalisation and bound renaming.
//!
//! A [`Theorem`] can only be obtained through the functions in this module,
//! so holding one means it was derived.

use std::fmt;
use std::sync::OnceLock;

use thiserror::Error;

use crate::onepass::subst_formula;
use crate::parse::parse_formula;
use crate::statics::occurring_vars;
use crate::syntax::{well_formed, DiffGame, Expr, Expression, Formula, Game, Term, Variable, Violation};
use crate::usubst::{SubstError, USubst};
use crate::varset::VarSet;

pub mod mutate;
pub mod script;

pub use script::{check_proof, Report, ScriptError};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum AxiomId {
    Box,
    AssignEq,
    Ds,
    Test,
    Choice,
    Compose,
    Iterate,
    Dual,
}

impl AxiomId {
    pub const ALL: [AxiomId; 8] = [
        AxiomId::Box,
        AxiomId::AssignEq,
        AxiomId::Ds,
        AxiomId::Test,
        AxiomId::Choice,
        AxiomId::Compose,
        AxiomId::Iterate,
        AxiomId::Dual,
    ];

    pub fn name(self) -> &'static str {
        match self {
            AxiomId::Box => "box",
            AxiomId::AssignEq => "assign_eq",
            AxiomId::Ds => "DS",
            AxiomId::Test => "test",
            AxiomId::Choice => "choice",
            AxiomId::Compose => "compose",
            AxiomId::Iterate => "iterate",
            AxiomId::Dual => "dual",
        }
    }

    pub fn from_name(s: &str) -> Option<AxiomId> {
        AxiomId::ALL.into_iter().find(|a| a.name() == s)
    }

    fn text(self) -> &'static str {
        match self {
            AxiomId::Box => "[a]<c>true <-> !<a>!<c>true",
            AxiomId::AssignEq => "<x:=f()><c>true <-> \\exists x (x=f() & <c>true)",
            AxiomId::Ds => "<{x'=f()}><c>true <-> \\exists t (t>=0 & <x:=x+f()*t><x':=f()><c>true)",
            AxiomId::Test => "<{?q()}>p() <-> q() & p()",
            AxiomId::Choice => "<a ++ b><c>true <-> <a><c>true | <b><c>true",
            AxiomId::Compose => "<a; b><c>true <-> <a><b><c>true",
            AxiomId::Iterate => "<{a}*><c>true <-> <c>true | <a><{a}*><c>true",
            AxiomId::Dual => "<{a}^d><c>true <-> !<a>!<c>true",
        }
    }
}

impl fmt::Display for AxiomId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Debug, Hash)]
pub enum RuleId {
    M,
    Fp,
}

impl RuleId {
    pub const ALL: [RuleId; 2] = [RuleId::M, RuleId::Fp];

    pub fn name(self) -> &'static str {
        match self {
            RuleId::M => "M",
            RuleId::Fp => "FP",
        }
    }

    pub fn from_name(s: &str) -> Option<RuleId> {
        RuleId::ALL.into_iter().find(|r| r.name() == s)
    }

    fn text(self) -> (&'static str, &'static str) {
        match self {
            RuleId::M => ("<c>true -> <d>true", "<a><c>true -> <a><d>true"),
            RuleId::Fp => ("<c>true | <a><d>true -> <d>true", "<{a}*><c>true -> <d>true"),
        }
    }
}

impl fmt::Display for RuleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Premises over a conclusion.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Inference {
    pub premises: Vec<Formula>,
    pub conclusion: Formula,
}

impl fmt::Display for Inference {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, p) in self.premises.iter().enumerate() {
            if i > 0 {
                f.write_str("   ")?;
            }
            write!(f, "{p}")?;
        }
        write!(f, "  /  {}", self.conclusion)
    }
}

fn fixed(text: &str) -> Formula {
    parse_formula(text).expect("built-in formula parses")
}

/// The stored formula of an axiom.
pub fn axiom(id: AxiomId) -> &'static Formula {
    static AXIOMS: OnceLock<Vec<Formula>> = OnceLock::new();
    let all = AXIOMS.get_or_init(|| AxiomId::ALL.iter().map(|a| fixed(a.text())).collect());
    &all[id as usize]
}

/// The stored inference of an axiomatic rule.
pub fn rule(id: RuleId) -> &'static Inference {
    static RULES: OnceLock<Vec<Inference>> = OnceLock::new();
    let all = RULES.get_or_init(|| {
        RuleId::ALL
            .iter()
            .map(|r| {
                let (p, c) = r.text();
                Inference { premises: vec![fixed(p)], conclusion: fixed(c) }
            })
            .collect()
    });
    &all[id as usize]
}

#[derive(Clone, PartialEq, Debug, Error)]
pub enum ProofError {
    #[error("unknown axiom {0}")]
    UnknownAxiom(String),
    #[error("unknown rule {0}")]
    UnknownRule(String),
    #[error("substitution failed: {0}")]
    Subst(#[from] SubstError),
    #[error("{0} is not an implication")]
    NotImplication(Formula),
    #[error("antecedent {expected} does not match {found}")]
    AntecedentMismatch { expected: Formula, found: Formula },
    #[error("rule needs {expected} premises, got {found}")]
    PremiseCount { expected: usize, found: usize },
    #[error("premise {index} should be {expected} but is {found}")]
    PremiseMismatch { index: usize, expected: Formula, found: Formula },
    #[error("cannot quantify over {0}")]
    BadQuantifier(Variable),
    #[error("{0} is not of the form p -> <x:=e>q or p -> [x:=e]q")]
    RenamingShape(Formula),
    #[error("{0} must be a plain variable different from the assigned one")]
    RenamingVariable(Variable),
    #[error("renamed variable {0} already occurs in the postcondition")]
    RenamingSideCondition(Variable),
    #[error("renaming premise should be {expected} but is {found}")]
    RenamingPremise { expected: Formula, found: Formula },
    #[error(transparent)]
    Rename(#[from] RenameError),
    #[error("ill-formed formula: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    IllFormed(Vec<Violation>),
}

/// A derived formula together with the oracle assumptions it rests on.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Theorem {
    formula: Formula,
    assumptions: Vec<Formula>,
}

fn merge(a: &[Formula], b: &[Formula]) -> Vec<Formula> {
    let mut out = a.to_vec();
    for f in b {
        if !out.contains(f) {
            out.push(f.clone());
        }
    }
    out
}

impl Theorem {
    pub fn formula(&self) -> &Formula {
        &self.formula
    }

    /// Oracle formulas this theorem depends on, in order of first use.
    pub fn assumptions(&self) -> &[Formula] {
        &self.assumptions
    }

    pub fn axiom(id: AxiomId) -> Theorem {
        Theorem { formula: axiom(id).clone(), assumptions: Vec::new() }
    }

    /// A trusted fact of the base logic. Recorded as an assumption.
    pub fn oracle(f: Formula) -> Result<Theorem, ProofError> {
        check_wf(&f)?;
        Ok(Theorem { assumptions: vec![f.clone()], formula: f })
    }

    /// Uniform substitution with empty taboo at the top.
    pub fn us(&self, sigma: &USubst) -> Result<Theorem, ProofError> {
        let formula = subst_formula(sigma, &VarSet::empty(), &self.formula)?;
        Ok(Theorem { formula, assumptions: self.assumptions.clone() })
    }

    pub fn mp(imp: &Theorem, ante: &Theorem) -> Result<Theorem, ProofError> {
        match &imp.formula {
            Formula::Imply(a, b) => {
                if **a != ante.formula {
                    return Err(ProofError::AntecedentMismatch {
                        expected: (**a).clone(),
                        found: ante.formula.clone(),
                    });
                }
                Ok(Theorem { formula: (**b).clone(), assumptions: merge(&imp.assumptions, &ante.assumptions) })
            }
            other => Err(ProofError::NotImplication(other.clone())),
        }
    }

    pub fn allgen(&self, x: &Variable) -> Result<Theorem, ProofError> {
        if x.is_differential() {
            return Err(ProofError::BadQuantifier(x.clone()));
        }
        Ok(Theorem { formula: Formula::forall(x.clone(), self.formula.clone()), assumptions: self.assumptions.clone() })
    }

    /// Bound renaming: from `φ -> <y:=θ><y':=x'>ψ(x↦y)` conclude
    /// `φ -> <x:=θ>ψ` (and likewise for boxes), where `y` is `fresh`.
    pub fn br(&self, fresh: &Variable, target: Formula) -> Result<Theorem, ProofError> {
        check_wf(&target)?;
        let expected = renaming_premise(fresh, &target)?;
        if expected != self.formula {
            return Err(ProofError::RenamingPremise { expected, found: self.formula.clone() });
        }
        Ok(Theorem { formula: target, assumptions: self.assumptions.clone() })
    }
}

fn check_wf(f: &Formula) -> Result<(), ProofError> {
    let v = well_formed(Expr::Formula(f));
    if v.is_empty() {
        Ok(())
    } else {
        Err(ProofError::IllFormed(v))
    }
}

/// The premise that bound renaming needs for `target`.
pub fn renaming_premise(fresh: &Variable, target: &Formula) -> Result<Formula, ProofError> {
    let shape = || ProofError::RenamingShape(target.clone());
    let (phi, m) = match target {
        Formula::Imply(phi, m) => (phi, m),
        _ => return Err(shape()),
    };
    let (diamond, game, psi) = match &**m {
        Formula::Diamond(g, psi) => (true, g, psi),
        Formula::Box(g, psi) => (false, g, psi),
        _ => return Err(shape()),
    };
    let (x, theta) = match &**game {
        Game::Assign(x, theta) => (x, theta),
        _ => return Err(shape()),
    };
    if x.is_differential() {
        return Err(shape());
    }
    let fresh_d = match fresh.differential() {
        Some(d) if fresh != x => d,
        _ => return Err(ProofError::RenamingVariable(fresh.clone())),
    };
    let occ = occurring_vars(Expr::Formula(psi));
    for v in [fresh, &fresh_d] {
        if occ.contains(v) {
            return Err(ProofError::RenamingSideCondition(v.clone()));
        }
    }
    let renamed = rename_formula(psi, x, fresh)?;
    let x_d = x.differential().expect("plain variable");
    let wrap = |g: Game, f: Formula| if diamond { Formula::diamond(g, f) } else { Formula::boxed(g, f) };
    let inner = wrap(Game::assign(fresh_d, Term::Var(x_d)), renamed);
    Ok(Formula::imply((**phi).clone(), wrap(Game::assign(fresh.clone(), theta.clone()), inner)))
}

/// Apply a derived axiomatic rule with taboo all variables to every premise
/// and the conclusion.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ProvedRule {
    inference: Inference,
}

impl ProvedRule {
    pub fn usr(id: RuleId, sigma: &USubst) -> Result<ProvedRule, ProofError> {
        let r = rule(id);
        let all = VarSet::all();
        let premises = r.premises.iter().map(|p| subst_formula(sigma, &all, p)).collect::<Result<Vec<_>, _>>()?;
        let conclusion = subst_formula(sigma, &all, &r.conclusion)?;
        Ok(ProvedRule { inference: Inference { premises, conclusion } })
    }

    pub fn inference(&self) -> &Inference {
        &self.inference
    }

    pub fn infer(&self, premises: &[&Theorem]) -> Result<Theorem, ProofError> {
        let want = &self.inference.premises;
        if want.len() != premises.len() {
            return Err(ProofError::PremiseCount { expected: want.len(), found: premises.len() });
        }
        let mut assumptions = Vec::new();
        for (index, (w, p)) in want.iter().zip(premises).enumerate() {
            if *w != p.formula {
                return Err(ProofError::PremiseMismatch { index, expected: w.clone(), found: p.formula.clone() });
            }
            assumptions = merge(&assumptions, &p.assumptions);
        }
        Ok(Theorem { formula: self.inference.conclusion.clone(), assumptions })
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum RenameError {
    #[error("cannot rename inside game symbol {0}")]
    GameSymbol(String),
    #[error("can only rename plain variables, got {0}")]
    Differential(Variable),
}

struct Swap<'a> {
    x: &'a Variable,
    y: &'a Variable,
}

impl Swap<'_> {
    fn var(&self, v: &Variable) -> Variable {
        let b = v.base();
        let to = if b == *self.x {
            self.y
        } else if b == *self.y {
            self.x
        } else {
            return v.clone();
        };
        if v.is_differential() {
            to.differential().expect("plain")
        } else {
            to.clone()
        }
    }

    fn term(&self, t: &Term) -> Term {
        match t {
            Term::Var(v) => Term::Var(self.var(v)),
            Term::Number(_) => t.clone(),
            Term::Apply(f, arg) => Term::Apply(f.clone(), arg.as_ref().map(|a| Box::new(self.term(a)))),
            Term::Plus(a, b) => Term::plus(self.term(a), self.term(b)),
            Term::Minus(a, b) => Term::minus(self.term(a), self.term(b)),
            Term::Times(a, b) => Term::times(self.term(a), self.term(b)),
            Term::Neg(a) => Term::neg(self.term(a)),
            Term::Power(a, n) => Term::power(self.term(a), *n),
            Term::Differential(a) => Term::differential(self.term(a)),
        }
    }

    fn formula(&self, f: &Formula) -> Result<Formula, RenameError> {
        Ok(match f {
            Formula::True | Formula::False => f.clone(),
            Formula::Cmp(op, a, b) => Formula::Cmp(*op, self.term(a), self.term(b)),
            Formula::Pred(p, arg) => Formula::Pred(p.clone(), arg.as_ref().map(|a| Box::new(self.term(a)))),
            Formula::Not(a) => Formula::not(self.formula(a)?),
            Formula::And(a, b) => Formula::and(self.formula(a)?, self.formula(b)?),
            Formula::Or(a, b) => Formula::or(self.formula(a)?, self.formula(b)?),
            Formula::Imply(a, b) => Formula::imply(self.formula(a)?, self.formula(b)?),
            Formula::Equiv(a, b) => Formula::equiv(self.formula(a)?, self.formula(b)?),
            Formula::Exists(v, a) => Formula::exists(self.var(v), self.formula(a)?),
            Formula::Forall(v, a) => Formula::forall(self.var(v), self.formula(a)?),
            Formula::Diamond(g, a) => Formula::diamond(self.game(g)?, self.formula(a)?),
            Formula::Box(g, a) => Formula::boxed(self.game(g)?, self.formula(a)?),
        })
    }

    fn game(&self, g: &Game) -> Result<Game, RenameError> {
        Ok(match g {
            Game::Symbol(a) => return Err(RenameError::GameSymbol(a.name().to_string())),
            Game::Assign(v, t) => Game::assign(self.var(v), self.term(t)),
            Game::Ode(eqs, dom) => {
                Game::ode(eqs.iter().map(|(v, t)| (self.var(v), self.term(t))).collect(), self.formula(dom)?)
            }
            Game::Test(f) => Game::test(self.formula(f)?),
            Game::Choice(a, b) => Game::choice(self.game(a)?, self.game(b)?),
            Game::Compose(a, b) => Game::compose(self.game(a)?, self.game(b)?),
            Game::Loop(a) => Game::repeat(self.game(a)?),
            Game::Dual(a) => Game::dual(self.game(a)?),
            Game::DiffGame(d) => Game::DiffGame(DiffGame {
                eqs: d.eqs.iter().map(|(v, t)| (self.var(v), self.term(t))).collect(),
                y: self.var(&d.y),
                y_set: Box::new(self.formula(&d.y_set)?),
                z: self.var(&d.z),
                z_set: Box::new(self.formula(&d.z_set)?),
            }),
        })
    }
}

fn swap<'a>(x: &'a Variable, y: &'a Variable) -> Result<Swap<'a>, RenameError> {
    for v in [x, y] {
        if v.is_differential() {
            return Err(RenameError::Differential(v.clone()));
        }
    }
    Ok(Swap { x, y })
}

/// Exchange `x` with `y` and `x'` with `y'` everywhere, bound positions
/// included. Game symbols cannot be renamed.
pub fn uniform_rename(e: Expr<'_>, x: &Variable, y: &Variable) -> Result<Expression, RenameError> {
    let s = swap(x, y)?;
    Ok(match e {
        Expr::Term(t) => Expression::Term(s.term(t)),
        Expr::Formula(f) => Expression::Formula(s.formula(f)?),
        Expr::Game(g) => Expression::Game(s.game(g)?),
    })
}

pub fn rename_formula(f: &Formula, x: &Variable, y: &Variable) -> Result<Formula, RenameError> {
    swap(x, y)?.formula(f)
}
