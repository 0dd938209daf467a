//! Uniform substitutions, clash diagnostics and the lookup interface shared
//! by both substitution engines.

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use crate::statics::{bv_game, fv_formula, fv_game, fv_term, signature};
use crate::syntax::{Expr, Formula, Game, Symbol, SymbolKind, Term};
use crate::varset::VarSet;

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Replacement {
    Term(Term),
    Formula(Formula),
    Game(Game),
}

impl Replacement {
    pub fn as_expr(&self) -> Expr<'_> {
        match self {
            Replacement::Term(t) => Expr::Term(t),
            Replacement::Formula(f) => Expr::Formula(f),
            Replacement::Game(g) => Expr::Game(g),
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            Replacement::Term(_) => "term",
            Replacement::Formula(_) => "formula",
            Replacement::Game(_) => "game",
        }
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
struct Entry {
    repl: Replacement,
    fv: VarSet,
    bv: VarSet,
    /// Predicate reading of a bare application such as `q(.)`.
    alt: Option<Formula>,
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum BindingError {
    #[error("duplicate key {0}")]
    DuplicateKey(Symbol),
    #[error("key {key} is a {expected} symbol but is bound to a {found}")]
    KindMismatch { key: Symbol, expected: SymbolKind, found: &'static str },
    #[error("replacement for nullary key {0} mentions the dot")]
    DotInNullary(Symbol),
    #[error("game replacement for {0} mentions the dot")]
    DotInGame(Symbol),
    #[error("the dot cannot be substituted for explicitly")]
    DotKey,
}

/// A finite map from symbols to replacements with cached free variables.
///
/// A replacement that is a bare application `g(θ)` reads as a term and as a
/// formula, so such a binding serves both function and predicate sites.
#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct USubst {
    entries: BTreeMap<Symbol, Entry>,
    aliases: BTreeMap<Symbol, Symbol>,
}

fn class(s: &Symbol) -> u8 {
    match s.kind() {
        SymbolKind::Game => 1,
        _ => 0,
    }
}

impl USubst {
    pub fn new() -> Self {
        USubst::default()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    fn occupied(&self, key: &Symbol) -> bool {
        self.entries
            .keys()
            .chain(self.aliases.keys())
            .any(|k| class(k) == class(key) && k.name() == key.name() && k.arity() == key.arity())
    }

    pub fn insert(&mut self, key: Symbol, repl: Replacement) -> Result<(), BindingError> {
        if key.is_dot() {
            return Err(BindingError::DotKey);
        }
        if self.occupied(&key) {
            return Err(BindingError::DuplicateKey(key));
        }
        let expected = match &repl {
            Replacement::Term(_) => SymbolKind::Function,
            Replacement::Formula(_) => SymbolKind::Predicate,
            Replacement::Game(_) => SymbolKind::Game,
        };
        if key.kind() != expected {
            return Err(BindingError::KindMismatch { expected: key.kind(), key, found: repl.kind_name() });
        }
        let has_dot = signature(repl.as_expr()).contains(&Symbol::dot());
        if has_dot && matches!(repl, Replacement::Game(_)) {
            return Err(BindingError::DotInGame(key));
        }
        if has_dot && key.arity() == 0 {
            return Err(BindingError::DotInNullary(key));
        }
        let (key, repl, alt) = match repl {
            Replacement::Formula(Formula::Pred(g, arg)) if !g.is_dot() => {
                let fkey = Symbol::function(key.name(), key.arity());
                let t = Term::Apply(Symbol::function(g.name(), g.arity()), arg.clone());
                (fkey, Replacement::Term(t), Some(Formula::Pred(g, arg)))
            }
            Replacement::Term(Term::Apply(g, arg)) if !g.is_dot() => {
                let f = Formula::Pred(Symbol::predicate(g.name(), g.arity()), arg.clone());
                (key, Replacement::Term(Term::Apply(g, arg)), Some(f))
            }
            r => (key, r, None),
        };
        if alt.is_some() {
            self.aliases.insert(Symbol::predicate(key.name(), key.arity()), key.clone());
        }
        let (fv, bv) = match &repl {
            Replacement::Term(t) => (fv_term(t), VarSet::empty()),
            Replacement::Formula(f) => (fv_formula(f), VarSet::empty()),
            Replacement::Game(g) => (fv_game(g), bv_game(g)),
        };
        self.entries.insert(key, Entry { repl, fv, bv, alt });
        Ok(())
    }

    pub fn with(mut self, key: Symbol, repl: Replacement) -> Result<Self, BindingError> {
        self.insert(key, repl)?;
        Ok(self)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Symbol, &Replacement)> {
        self.entries.iter().map(|(k, e)| (k, &e.repl))
    }

    pub fn keys(&self) -> impl Iterator<Item = &Symbol> {
        self.entries.keys()
    }

    fn entry(&self, s: &Symbol) -> Option<&Entry> {
        self.entries.get(s).or_else(|| self.aliases.get(s).and_then(|k| self.entries.get(k)))
    }

    pub fn replacement(&self, s: &Symbol) -> Option<&Replacement> {
        self.entry(s).map(|e| &e.repl)
    }

    /// Cached free variables of the replacement bound to `s`.
    pub fn cached_fv(&self, s: &Symbol) -> Option<&VarSet> {
        self.entry(s).map(|e| &e.fv)
    }

    /// Recompute every cached set and compare.
    pub fn cache_is_consistent(&self) -> bool {
        self.entries.values().all(|e| match &e.repl {
            Replacement::Term(t) => e.fv == fv_term(t),
            Replacement::Formula(f) => e.fv == fv_formula(f),
            Replacement::Game(g) => e.fv == fv_game(g) && e.bv == bv_game(g),
        })
    }
}

/// Replacement lookup used by the engines.
pub trait Lookup {
    fn function(&self, f: &Symbol) -> Option<(&Term, &VarSet)>;
    fn predicate(&self, p: &Symbol) -> Option<(&Formula, &VarSet)>;
    /// Game replacement together with its bound variables.
    fn game(&self, a: &Symbol) -> Option<(&Game, &VarSet)>;

    /// Free variables of the replacement for a function or predicate key.
    fn key_fv(&self, s: &Symbol) -> Option<&VarSet> {
        match s.kind() {
            SymbolKind::Function => self.function(s).map(|(_, fv)| fv),
            SymbolKind::Predicate => self.predicate(s).map(|(_, fv)| fv),
            SymbolKind::Game => None,
        }
    }
}

impl Lookup for USubst {
    fn function(&self, f: &Symbol) -> Option<(&Term, &VarSet)> {
        match self.entries.get(f) {
            Some(Entry { repl: Replacement::Term(t), fv, .. }) => Some((t, fv)),
            _ => None,
        }
    }

    fn predicate(&self, p: &Symbol) -> Option<(&Formula, &VarSet)> {
        match self.entry(p) {
            Some(Entry { repl: Replacement::Formula(f), fv, .. }) if p.kind() == SymbolKind::Predicate => Some((f, fv)),
            Some(Entry { alt: Some(f), fv, .. }) if p.kind() == SymbolKind::Predicate => Some((f, fv)),
            _ => None,
        }
    }

    fn game(&self, a: &Symbol) -> Option<(&Game, &VarSet)> {
        match self.entries.get(a) {
            Some(Entry { repl: Replacement::Game(g), bv, .. }) => Some((g, bv)),
            _ => None,
        }
    }
}

/// The single-entry substitution `{. ↦ θ}` used at replacement sites.
pub struct DotSubst {
    dot: Symbol,
    arg: Term,
    fv: VarSet,
}

impl DotSubst {
    pub fn new(arg: Term) -> Self {
        let fv = fv_term(&arg);
        DotSubst { dot: Symbol::dot(), arg, fv }
    }
}

impl Lookup for DotSubst {
    fn function(&self, f: &Symbol) -> Option<(&Term, &VarSet)> {
        if *f == self.dot {
            Some((&self.arg, &self.fv))
        } else {
            None
        }
    }

    fn predicate(&self, _: &Symbol) -> Option<(&Formula, &VarSet)> {
        None
    }

    fn game(&self, _: &Symbol) -> Option<(&Game, &VarSet)> {
        None
    }
}

/// Where a clash at a dot position happened: inside the replacement for
/// `site`, and which substituted symbols brought in the offending variables.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct DotSite {
    pub site: Symbol,
    pub inner_path: Vec<usize>,
    pub culprits: Vec<Symbol>,
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct ClashInfo {
    pub key: Symbol,
    pub replacement_fv: VarSet,
    pub taboo: VarSet,
    pub witness: VarSet,
    pub path: Vec<usize>,
    pub dot_site: Option<DotSite>,
    /// Operator whose admissibility check failed (reference engine only).
    pub operator: Option<&'static str>,
}

impl ClashInfo {
    pub fn new(key: Symbol, replacement_fv: &VarSet, taboo: &VarSet) -> Self {
        ClashInfo {
            key,
            witness: replacement_fv.intersect(taboo),
            replacement_fv: replacement_fv.clone(),
            taboo: taboo.clone(),
            path: Vec::new(),
            dot_site: None,
            operator: None,
        }
    }
}

fn write_path(f: &mut fmt::Formatter<'_>, p: &[usize]) -> fmt::Result {
    if p.is_empty() {
        return f.write_str("root");
    }
    for (i, x) in p.iter().enumerate() {
        if i > 0 {
            f.write_str(".")?;
        }
        write!(f, "{x}")?;
    }
    Ok(())
}

impl fmt::Display for ClashInfo {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("clash at ")?;
        write_path(f, &self.path)?;
        if let Some(op) = self.operator {
            write!(f, " ({op})")?;
        }
        match &self.dot_site {
            Some(d) => {
                write!(f, ": argument of {} substituted for . at ", d.site)?;
                write_path(f, &d.inner_path)?;
                f.write_str(" in its replacement")?;
                if !d.culprits.is_empty() {
                    f.write_str(" (brought in by ")?;
                    for (i, c) in d.culprits.iter().enumerate() {
                        if i > 0 {
                            f.write_str(", ")?;
                        }
                        write!(f, "{c}")?;
                    }
                    f.write_str(")")?;
                }
            }
            None => write!(f, ": replacement for {}", self.key)?,
        }
        write!(f, "; free {} taboo {} witness {}", self.replacement_fv, self.taboo, self.witness)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum SubstError {
    #[error("{0}")]
    Clash(Box<ClashInfo>),
    #[error("loop taboo is not a fixpoint: first pass {first}, second pass {second}")]
    FixpointViolation { first: VarSet, second: VarSet, path: Vec<usize> },
}

impl SubstError {
    pub fn clash(&self) -> Option<&ClashInfo> {
        match self {
            SubstError::Clash(c) => Some(c),
            _ => None,
        }
    }

    /// Record one more path step while unwinding (paths are built leaf first).
    pub(crate) fn at(mut self, i: usize) -> Self {
        match &mut self {
            SubstError::Clash(c) => c.path.push(i),
            SubstError::FixpointViolation { path, .. } => path.push(i),
        }
        self
    }

    pub(crate) fn finish(mut self) -> Self {
        match &mut self {
            SubstError::Clash(c) => c.path.reverse(),
            SubstError::FixpointViolation { path, .. } => path.reverse(),
        }
        self
    }
}

/// Substituted game with its output taboo.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct TabooedGame {
    pub game: Game,
    pub out_taboo: VarSet,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_formula, parse_term};

    #[test]
    fn kind_and_dot_checks() {
        let mut s = USubst::new();
        let e = s.insert(Symbol::game("a"), Replacement::Term(Term::var("x")));
        assert!(matches!(e, Err(BindingError::KindMismatch { .. })));
        let e = s.insert(Symbol::function("f", 0), Replacement::Term(Term::dot()));
        assert_eq!(e, Err(BindingError::DotInNullary(Symbol::function("f", 0))));
        s.insert(Symbol::function("f", 1), Replacement::Term(parse_term(".^2").unwrap())).unwrap();
        let e = s.insert(Symbol::predicate("f", 1), Replacement::Formula(Formula::True));
        assert!(matches!(e, Err(BindingError::DuplicateKey(_))));
        assert!(s.cache_is_consistent());
    }

    #[test]
    fn bare_application_serves_both_kinds() {
        let mut s = USubst::new();
        s.insert(Symbol::predicate("p", 1), Replacement::Formula(parse_formula("q(.)").unwrap())).unwrap();
        let (f, _) = s.predicate(&Symbol::predicate("p", 1)).unwrap();
        assert_eq!(*f, parse_formula("q(.)").unwrap());
        assert!(s.function(&Symbol::function("p", 1)).is_some());
    }
}
