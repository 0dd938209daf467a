//! Finite-or-cofinite variable sets.
//!
//! Taboo sets must be able to say "every variable", which is the cofinite set
//! with no exclusions. Representing the complement keeps every set finite in
//! memory without fixing a universe of variables up front.

use std::collections::BTreeSet;
use std::fmt;

use crate::syntax::Variable;

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub enum VarSet {
    /// Exactly the listed variables.
    Finite(BTreeSet<Variable>),
    /// All variables except the listed ones.
    Cofinite(BTreeSet<Variable>),
}

impl Default for VarSet {
    fn default() -> Self {
        VarSet::empty()
    }
}

impl VarSet {
    pub fn empty() -> Self {
        VarSet::Finite(BTreeSet::new())
    }

    /// The set of all variables.
    pub fn all() -> Self {
        VarSet::Cofinite(BTreeSet::new())
    }

    pub fn singleton(v: Variable) -> Self {
        let mut s = BTreeSet::new();
        s.insert(v);
        VarSet::Finite(s)
    }

    pub fn from_vars<I: IntoIterator<Item = Variable>>(vars: I) -> Self {
        VarSet::Finite(vars.into_iter().collect())
    }

    pub fn is_all(&self) -> bool {
        matches!(self, VarSet::Cofinite(s) if s.is_empty())
    }

    pub fn is_empty(&self) -> bool {
        matches!(self, VarSet::Finite(s) if s.is_empty())
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, VarSet::Finite(_))
    }

    pub fn contains(&self, v: &Variable) -> bool {
        match self {
            VarSet::Finite(s) => s.contains(v),
            VarSet::Cofinite(s) => !s.contains(v),
        }
    }

    /// Finite members, or `None` for a cofinite set.
    pub fn finite_members(&self) -> Option<&BTreeSet<Variable>> {
        match self {
            VarSet::Finite(s) => Some(s),
            VarSet::Cofinite(_) => None,
        }
    }

    pub fn insert(&mut self, v: Variable) {
        match self {
            VarSet::Finite(s) => {
                s.insert(v);
            }
            VarSet::Cofinite(s) => {
                s.remove(&v);
            }
        }
    }

    pub fn remove(&mut self, v: &Variable) {
        match self {
            VarSet::Finite(s) => {
                s.remove(v);
            }
            VarSet::Cofinite(s) => {
                s.insert(v.clone());
            }
        }
    }

    pub fn with(mut self, v: Variable) -> Self {
        self.insert(v);
        self
    }

    pub fn without(mut self, v: &Variable) -> Self {
        self.remove(v);
        self
    }

    pub fn complement(&self) -> Self {
        match self {
            VarSet::Finite(s) => VarSet::Cofinite(s.clone()),
            VarSet::Cofinite(s) => VarSet::Finite(s.clone()),
        }
    }

    pub fn union(&self, other: &VarSet) -> VarSet {
        use VarSet::*;
        match (self, other) {
            (Finite(a), Finite(b)) => {
                if a.len() < b.len() {
                    let mut r = b.clone();
                    r.extend(a.iter().cloned());
                    Finite(r)
                } else {
                    let mut r = a.clone();
                    r.extend(b.iter().cloned());
                    Finite(r)
                }
            }
            // all \ a  ∪  b  =  all \ (a ∖ b)
            (Cofinite(a), Finite(b)) | (Finite(b), Cofinite(a)) => {
                Cofinite(a.iter().filter(|v| !b.contains(v)).cloned().collect())
            }
            (Cofinite(a), Cofinite(b)) => Cofinite(a.intersection(b).cloned().collect()),
        }
    }

    /// In-place union, cheap when `other` is small.
    pub fn union_with(&mut self, other: &VarSet) {
        match (&mut *self, other) {
            (VarSet::Finite(a), VarSet::Finite(b)) => a.extend(b.iter().cloned()),
            (VarSet::Cofinite(a), VarSet::Finite(b)) => {
                for v in b {
                    a.remove(v);
                }
            }
            _ => *self = self.union(other),
        }
    }

    pub fn intersect(&self, other: &VarSet) -> VarSet {
        use VarSet::*;
        match (self, other) {
            (Finite(a), Finite(b)) => Finite(a.intersection(b).cloned().collect()),
            (Cofinite(a), Finite(b)) | (Finite(b), Cofinite(a)) => {
                Finite(b.iter().filter(|v| !a.contains(v)).cloned().collect())
            }
            (Cofinite(a), Cofinite(b)) => Cofinite(a.union(b).cloned().collect()),
        }
    }

    pub fn difference(&self, other: &VarSet) -> VarSet {
        self.intersect(&other.complement())
    }

    pub fn disjoint(&self, other: &VarSet) -> bool {
        use VarSet::*;
        match (self, other) {
            (Finite(a), Finite(b)) => {
                let (small, big) = if a.len() <= b.len() { (a, b) } else { (b, a) };
                !small.iter().any(|v| big.contains(v))
            }
            (Cofinite(a), Finite(b)) | (Finite(b), Cofinite(a)) => b.iter().all(|v| a.contains(v)),
            // two cofinite sets always share infinitely many variables
            (Cofinite(_), Cofinite(_)) => false,
        }
    }

    pub fn is_subset(&self, other: &VarSet) -> bool {
        use VarSet::*;
        match (self, other) {
            (Finite(a), Finite(b)) => a.is_subset(b),
            (Finite(a), Cofinite(b)) => a.is_disjoint(b),
            (Cofinite(_), Finite(_)) => false,
            (Cofinite(a), Cofinite(b)) => b.is_subset(a),
        }
    }
}

impl FromIterator<Variable> for VarSet {
    fn from_iter<I: IntoIterator<Item = Variable>>(iter: I) -> Self {
        VarSet::Finite(iter.into_iter().collect())
    }
}

fn write_list(f: &mut fmt::Formatter<'_>, s: &BTreeSet<Variable>) -> fmt::Result {
    f.write_str("{")?;
    for (i, v) in s.iter().enumerate() {
        if i > 0 {
            f.write_str(",")?;
        }
        write!(f, "{v}")?;
    }
    f.write_str("}")
}

impl fmt::Display for VarSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VarSet::Finite(s) => write_list(f, s),
            VarSet::Cofinite(s) if s.is_empty() => f.write_str("all"),
            VarSet::Cofinite(s) => {
                f.write_str("all\\")?;
                write_list(f, s)
            }
        }
    }
}
