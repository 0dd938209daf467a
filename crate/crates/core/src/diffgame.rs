//! Differential games `{x'=θ &d y in (Y) & z in (Z)}`: side checks on the
//! control sets and substitution.

use std::fmt;

use crate::onepass::OnePass;
use crate::statics::fv_formula;
use crate::syntax::{DiffGame, Formula, Variable, Violation, ViolationKind};
use crate::usubst::{SubstError, TabooedGame, USubst};
use crate::varset::VarSet;

/// A well-definedness assumption that cannot be checked syntactically.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Obligation {
    pub control: Variable,
    pub set: Formula,
}

impl fmt::Display for Obligation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "assumed: {{{} | {}}} is compact", self.control, self.set)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Default)]
pub struct DiffGameReport {
    pub violations: Vec<Violation>,
    pub obligations: Vec<Obligation>,
}

/// Control sets must only mention their own control and be first-order
/// without quantifiers. Compactness is returned as an obligation.
pub fn diffgame_checks(g: &DiffGame) -> DiffGameReport {
    let mut r = DiffGameReport::default();
    let n = g.eqs.len();
    for (i, (ctl, set)) in [(&g.y, &g.y_set), (&g.z, &g.z_set)].into_iter().enumerate() {
        let path = vec![n + i];
        match fv_formula(set) {
            VarSet::Finite(s) => {
                for v in s.iter().filter(|v| *v != ctl) {
                    r.violations.push(Violation {
                        path: path.clone(),
                        kind: ViolationKind::ControlNotFree { control: ctl.clone(), offending: v.clone() },
                    });
                }
            }
            VarSet::Cofinite(_) => r.violations.push(Violation {
                path: path.clone(),
                kind: ViolationKind::ControlNotFree { control: ctl.clone(), offending: ctl.clone() },
            }),
        }
        if !set.is_first_order_free() {
            r.violations.push(Violation { path, kind: ViolationKind::ControlSetNotQuantifierFree(ctl.clone()) });
        }
        r.obligations.push(Obligation { control: ctl.clone(), set: (**set).clone() });
    }
    r
}

pub fn subst_diffgame(sigma: &USubst, u: &VarSet, g: &DiffGame) -> Result<TabooedGame, SubstError> {
    let mut e = OnePass::new(sigma);
    e.game(u, &crate::syntax::Game::DiffGame(g.clone()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse::{parse_game, parse_subst};
    use crate::syntax::Game;

    fn dg(src: &str) -> DiffGame {
        match parse_game(src).unwrap() {
            Game::DiffGame(d) => d,
            _ => panic!("not a differential game"),
        }
    }

    fn ubar() -> VarSet {
        ["x", "y", "z"].iter().flat_map(|n| [Variable::new(n), Variable::prime(n)]).collect()
    }

    #[test]
    fn bounded_control_set() {
        let r = diffgame_checks(&dg("{x'=y*z &d y in (-1<=y & y<=1) & z in (z<=1)}"));
        assert!(r.violations.is_empty());
        assert_eq!(r.obligations.len(), 2);
        let r = diffgame_checks(&dg("{x'=y &d y in (y>=0) & z in (z<=1)}"));
        assert!(r.violations.is_empty());
    }

    #[test]
    fn control_set_mentioning_state() {
        let g = DiffGame {
            z_set: Box::new(crate::parse::parse_formula("z<=x").unwrap()),
            ..dg("{x'=y*z &d y in (y<=1) & z in (z<=1)}")
        };
        let r = diffgame_checks(&g);
        assert_eq!(r.violations.len(), 1);
        assert_eq!(r.violations[0].path, vec![2]);
    }

    #[test]
    fn substitution_extends_taboo() {
        let s = parse_subst("f(.) ~> .^2").unwrap();
        let r = subst_diffgame(&s, &VarSet::empty(), &dg("{x'=f(x)*y*z &d y in (y<=1) & z in (z<=1)}")).unwrap();
        assert_eq!(r.game, parse_game("{x'=x^2*y*z &d y in (y<=1) & z in (z<=1)}").unwrap());
        assert_eq!(r.out_taboo, ubar());
        let id = USubst::new();
        let g = dg("{x'=y &d y in (y<=1) & z in (z<=1)}");
        let r = subst_diffgame(&id, &VarSet::empty(), &g).unwrap();
        assert_eq!(r.game, Game::DiffGame(g));
        assert_eq!(r.out_taboo, ubar());
    }

    #[test]
    fn control_set_replacement_clashes_on_taboo() {
        let g = dg("{x'=y &d y in (p(y)) & z in (z<=1)}");
        let s = parse_subst("p(.) ~> .>=w").unwrap();
        assert!(subst_diffgame(&s, &VarSet::empty(), &g).is_ok());
        assert!(subst_diffgame(&s, &VarSet::singleton(Variable::new("w")), &g).is_err());
        let s = parse_subst("p(.) ~> .>=x").unwrap();
        assert!(subst_diffgame(&s, &VarSet::empty(), &g).is_err());
    }
}
