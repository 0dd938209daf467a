//! Differential testing of the one-pass engine against the reference engine,
//! and randomized checks of the taboo bookkeeping.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::church::church_formula;
use crate::gen::{Gen, Shape};
use crate::onepass::subst_game;
use crate::print::pretty_subst;
use crate::statics::bv_game;
use crate::syntax::{Formula, Game};
use crate::usubst::USubst;
use crate::varset::VarSet;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Disagreement {
    /// One-pass succeeded where the reference engine clashed.
    OnePassOnly,
    /// The reference engine succeeded where one-pass clashed.
    ChurchOnly,
    /// Both succeeded with different results.
    Unequal,
}

#[derive(Clone, Debug)]
pub struct Repro {
    pub trial: usize,
    pub kind: Disagreement,
    pub sigma: String,
    pub input: String,
}

#[derive(Clone, Debug, Default)]
pub struct FuzzStats {
    pub trials: usize,
    pub both_defined: usize,
    pub both_clash: usize,
    /// One-pass defined, reference clashed. Expected to happen.
    pub onepass_only: usize,
    pub church_only: usize,
    pub unequal: usize,
    pub repros: Vec<Repro>,
}

impl FuzzStats {
    pub fn sound(&self) -> bool {
        self.church_only == 0 && self.unequal == 0
    }
}

/// Compare the two engines on one instance.
pub fn compare(sigma: &USubst, phi: &Formula) -> Result<Option<bool>, Disagreement> {
    let one = crate::onepass::us(sigma, phi);
    let church = church_formula(sigma, phi);
    match (one, church) {
        (Ok(a), Ok(b)) if a == b => Ok(Some(true)),
        (Ok(_), Ok(_)) => Err(Disagreement::Unequal),
        (Ok(_), Err(_)) => Ok(Some(false)),
        (Err(_), Ok(_)) => Err(Disagreement::ChurchOnly),
        (Err(_), Err(_)) => Ok(None),
    }
}

pub fn fuzz(trials: usize, seed: u64, max_depth: u32) -> FuzzStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = FuzzStats { trials, ..FuzzStats::default() };
    for trial in 0..trials {
        let depth = rng.gen_range(1..=max_depth);
        let mut g = Gen::new(&mut rng, Shape::default());
        let phi = g.formula(depth);
        let sigma = g.subst(3);
        match compare(&sigma, &phi) {
            Ok(Some(true)) => stats.both_defined += 1,
            Ok(None) => stats.both_clash += 1,
            outcome => {
                let kind = match outcome {
                    Err(k) => k,
                    _ => Disagreement::OnePassOnly,
                };
                match kind {
                    Disagreement::OnePassOnly => stats.onepass_only += 1,
                    Disagreement::ChurchOnly => stats.church_only += 1,
                    Disagreement::Unequal => stats.unequal += 1,
                }
                stats.repros.push(Repro { trial, kind, sigma: pretty_subst(&sigma), input: phi.to_string() });
            }
        }
    }
    stats
}

/// Outcome of the taboo checks on one game.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TabooCheck {
    Clash,
    Ok,
    Violation(String),
}

/// Output taboo covers the input taboo and the bound variables of the result.
pub fn check_monotone(sigma: &USubst, u: &VarSet, g: &Game) -> TabooCheck {
    match subst_game(sigma, u, g) {
        Err(_) => TabooCheck::Clash,
        Ok(r) => {
            if !u.is_subset(&r.out_taboo) {
                TabooCheck::Violation(format!("out taboo {} misses input taboo {}", r.out_taboo, u))
            } else if !bv_game(&r.game).is_subset(&r.out_taboo) {
                TabooCheck::Violation(format!("out taboo {} misses bv {}", r.out_taboo, bv_game(&r.game)))
            } else {
                TabooCheck::Ok
            }
        }
    }
}

/// Shrinking the input taboo keeps the result defined and unchanged.
pub fn check_antimonotone(sigma: &USubst, u: &VarSet, smaller: &VarSet, g: &Game) -> TabooCheck {
    let Ok(full) = subst_game(sigma, u, g) else { return TabooCheck::Clash };
    match subst_game(sigma, smaller, g) {
        Err(e) => TabooCheck::Violation(format!("undefined under {smaller}: {e}")),
        Ok(r) if r.game != full.game => TabooCheck::Violation(format!("{} differs from {}", r.game, full.game)),
        Ok(_) => TabooCheck::Ok,
    }
}

/// For a loop, running again from the output taboo reproduces the output.
pub fn check_loop_fixpoint(sigma: &USubst, u: &VarSet, body: &Game) -> TabooCheck {
    let g = Game::repeat(body.clone());
    let Ok(first) = subst_game(sigma, u, &g) else { return TabooCheck::Clash };
    match subst_game(sigma, &first.out_taboo, &g) {
        Err(e) => TabooCheck::Violation(format!("rerun clashed: {e}")),
        Ok(r) if r.game != first.game || r.out_taboo != first.out_taboo => {
            TabooCheck::Violation(format!("rerun gave ({}, {})", r.game, r.out_taboo))
        }
        Ok(_) => TabooCheck::Ok,
    }
}

/// Counts of a randomized taboo check run.
#[derive(Clone, Debug, Default)]
pub struct TabooStats {
    pub defined: usize,
    pub clashes: usize,
    pub violations: Vec<String>,
}

impl TabooStats {
    fn record(&mut self, c: TabooCheck) {
        match c {
            TabooCheck::Ok => self.defined += 1,
            TabooCheck::Clash => self.clashes += 1,
            TabooCheck::Violation(v) => self.violations.push(v),
        }
    }
}

pub enum TabooProperty {
    Monotone,
    Antimonotone,
    LoopFixpoint,
}

pub fn check_taboo_property(prop: TabooProperty, trials: usize, seed: u64) -> TabooStats {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut stats = TabooStats::default();
    for _ in 0..trials {
        let depth = rng.gen_range(1..=6);
        let mut g = Gen::new(&mut rng, Shape::default());
        let game = g.game(depth);
        let sigma = g.subst(2);
        let u = g.taboo();
        let c = match prop {
            TabooProperty::Monotone => check_monotone(&sigma, &u, &game),
            TabooProperty::Antimonotone => {
                let sub = g.subset(&u);
                match check_antimonotone(&sigma, &u, &VarSet::empty(), &game) {
                    TabooCheck::Ok => check_antimonotone(&sigma, &u, &sub, &game),
                    other => other,
                }
            }
            TabooProperty::LoopFixpoint => check_loop_fixpoint(&sigma, &u, &game),
        };
        stats.record(c);
    }
    stats
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn small_fuzz_run_is_sound() {
        let s = fuzz(500, 1, 5);
        assert!(s.sound(), "{:?}", s.repros.iter().find(|r| r.kind != Disagreement::OnePassOnly));
        assert!(s.both_defined > 0 && s.both_clash > 0);
    }

    #[test]
    fn taboo_properties_hold() {
        for p in [TabooProperty::Monotone, TabooProperty::Antimonotone, TabooProperty::LoopFixpoint] {
            let s = check_taboo_property(p, 300, 2);
            assert!(s.violations.is_empty(), "{:?}", s.violations.first());
            assert!(s.defined > 30);
        }
    }
}
