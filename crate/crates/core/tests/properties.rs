use dgl_core::church::church_formula;
use dgl_core::gen::{Gen, Shape};
use dgl_core::onepass::{LoopMode, OnePass, Options};
use dgl_core::statics::bv_game;
use dgl_core::{parse_formula, parse_game, parse_subst, parse_term, subst_formula, us, USubst, VarSet};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn printing_round_trips(seed in any::<u64>(), depth in 0u32..=7) {
        let mut r = rng(seed);
        let mut g = Gen::new(&mut r, Shape::default());
        let t = g.term(depth);
        prop_assert_eq!(parse_term(&t.to_string()).unwrap(), t);
        let f = g.formula(depth);
        prop_assert_eq!(parse_formula(&f.to_string()).unwrap(), f);
        let a = g.game(depth);
        prop_assert_eq!(parse_game(&a.to_string()).unwrap(), a);
        let s = g.subst(3);
        prop_assert_eq!(parse_subst(&dgl_core::print::pretty_subst(&s)).unwrap(), s);
    }

    #[test]
    fn identity_substitution(seed in any::<u64>(), depth in 0u32..=6) {
        let mut r = rng(seed);
        let mut g = Gen::new(&mut r, Shape::default());
        let f = g.formula(depth);
        prop_assert_eq!(subst_formula(&USubst::new(), &VarSet::all(), &f).unwrap(), f);
    }

    #[test]
    fn cached_free_variables(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = Gen::new(&mut r, Shape::default()).subst(4);
        prop_assert!(s.cache_is_consistent());
    }

    #[test]
    fn reference_defined_implies_onepass_equal(seed in any::<u64>(), depth in 1u32..=6) {
        let mut r = rng(seed);
        let mut g = Gen::new(&mut r, Shape::default());
        let f = g.formula(depth);
        let s = g.subst(3);
        if let Ok(reference) = church_formula(&s, &f) {
            prop_assert_eq!(us(&s, &f).unwrap(), reference);
        }
    }

    #[test]
    fn smaller_taboo_same_formula(seed in any::<u64>(), depth in 1u32..=6) {
        let mut r = rng(seed);
        let mut g = Gen::new(&mut r, Shape::default());
        let f = g.formula(depth);
        let s = g.subst(3);
        let u = g.taboo();
        if let Ok(out) = subst_formula(&s, &u, &f) {
            let sub = g.subset(&u);
            prop_assert_eq!(subst_formula(&s, &sub, &f).unwrap(), out);
        }
    }

    #[test]
    fn loop_modes_agree(seed in any::<u64>(), depth in 1u32..=5) {
        let mut r = rng(seed);
        let mut g = Gen::new(&mut r, Shape::default());
        let body = g.game(depth);
        let s = g.subst(2);
        let u = g.taboo();
        let a = dgl_core::Game::repeat(body);
        let two = OnePass::with_options(&s, Options { loop_mode: LoopMode::TwoPass }).game(&u, &a);
        let bv = OnePass::with_options(&s, Options { loop_mode: LoopMode::BoundVars }).game(&u, &a);
        match (two, bv) {
            (Ok(x), Ok(y)) => {
                prop_assert_eq!(&x.game, &y.game);
                prop_assert_eq!(&x.out_taboo, &y.out_taboo);
                prop_assert!(bv_game(&x.game).is_subset(&x.out_taboo));
            }
            (Err(_), Err(_)) => {}
            (x, y) => prop_assert!(false, "modes disagree: {:?} vs {:?}", x.is_ok(), y.is_ok()),
        }
    }
}
