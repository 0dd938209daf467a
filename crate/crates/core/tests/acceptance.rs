//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any fails.

use std::time::{Duration, Instant};

use dgl_core::bench::{fit_slope, measure, Engine, Family};
use dgl_core::fuzz::{check_taboo_property, fuzz, Disagreement, TabooProperty};
use dgl_core::gen::{Gen, Shape};
use dgl_core::kernel::mutate::mutants;
use dgl_core::kernel::script::{check_proof, RENAMING, STUTTER};
use dgl_core::semantics::{check_lemma10_qff, check_lemma9, Outcome};
use dgl_core::syntax::Expr;
use dgl_core::{parse_formula, parse_game, parse_subst, parse_term, pretty, us, VarSet, Variable};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

type Check = Result<String, String>;

fn vs(names: &[&str]) -> VarSet {
    names
        .iter()
        .map(|n| match n.strip_suffix('\'') {
            Some(b) => Variable::prime(b),
            None => Variable::new(n),
        })
        .collect()
}

fn ensure(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn worked_examples() -> Check {
    let start = Instant::now();
    let ode = parse_formula("<{x'=f(x), y'=a(x)*y}>x>=1 <-> <{x'=f(x)}>x>=1").map_err(|e| e.to_string())?;
    let bad = parse_subst("f(.) ~> .^2 ; a(.) ~> z*y").map_err(|e| e.to_string())?;
    let e = us(&bad, &ode).err().ok_or("a(.) ~> z*y did not clash")?;
    let c = e.clash().ok_or("not a clash")?;
    ensure(c.witness == vs(&["y"]), format!("witness {}", c.witness))?;
    let good = parse_subst("f(.) ~> .^2 ; a(.) ~> z*.^2").map_err(|e| e.to_string())?;
    let r = us(&good, &ode).map_err(|e| e.to_string())?;
    let want = parse_formula("<{x'=x^2, y'=z*x^2*y}>x>=1 <-> <{x'=x^2}>x>=1").map_err(|e| e.to_string())?;
    ensure(r == want, format!("got {r}"))?;

    let phi = parse_formula("<v:=f()>p(v) <-> p(f())").map_err(|e| e.to_string())?;
    let clash = parse_subst("p(.) ~> [{x'=.}]x>=0 ; f() ~> -x").map_err(|e| e.to_string())?;
    let e = us(&clash, &phi).err().ok_or("clash example was accepted")?;
    let c = e.clash().ok_or("not a clash")?;
    ensure(c.dot_site.is_some() && c.key.is_dot(), "clash not at the dot site")?;
    ensure(c.taboo == vs(&["x", "x'"]), format!("taboo {}", c.taboo))?;

    let sound = parse_subst("p(.) ~> [{x:=x+.; {x'=.}}*](x+.>=0) ; f() ~> -v").map_err(|e| e.to_string())?;
    let r = us(&sound, &phi).map_err(|e| e.to_string())?;
    let text = pretty(Expr::Formula(&r));
    let want = "<v:=-v>[{x:=x+v; {x'=v}}*]x+v>=0 <-> [{x:=x+-v; {x'=-v}}*]x+-v>=0";
    ensure(text == want, format!("printed {text}"))?;
    let el = start.elapsed();
    ensure(el < Duration::from_secs(1), format!("took {el:?}"))?;
    Ok(format!("3 examples in {el:?}"))
}

fn differential_oracle() -> Check {
    let start = Instant::now();
    let s = fuzz(10_000, 0xD6C, 7);
    if let Some(r) = s.repros.iter().find(|r| r.kind != Disagreement::OnePassOnly) {
        return Err(format!("{:?} on sigma `{}` input `{}`", r.kind, r.sigma, r.input));
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(120), format!("took {el:?}"))?;
    Ok(format!(
        "{} trials: {} both defined, {} both clash, {} one-pass only, {:?}",
        s.trials, s.both_defined, s.both_clash, s.onepass_only, el
    ))
}

fn taboo_suite(p: TabooProperty, what: &str) -> Check {
    let s = check_taboo_property(p, 12_000, 0x7AB);
    if let Some(v) = s.violations.first() {
        return Err(format!("{} violations, first: {v}", s.violations.len()));
    }
    ensure(s.defined >= 1000, format!("only {} defined instances", s.defined))?;
    Ok(format!("{} defined {what}, {} clashes", s.defined, s.clashes))
}

fn semantic_oracle() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let (mut terms, mut formulas, mut seed) = (0usize, 0usize, 0u64);
    while terms < 10_000 || formulas < 5_000 {
        seed += 1;
        if seed > 200_000 {
            return Err(format!("ran out of defined instances at {terms}/{formulas}"));
        }
        let mut g = Gen::new(&mut rng, Shape::arithmetic());
        let i = g.interpretation();
        let sigma = g.arithmetic_subst(2);
        let u = g.taboo();
        let t = g.term(4);
        let f = g.qff(3);
        let r = check_lemma9(&sigma, &u, &t, &i, 2, seed);
        match r.outcome {
            Outcome::Pass => terms += r.trials,
            Outcome::Precondition(_) => {}
            o => return Err(format!("term {t} under {u} with {}: {o:?}", dgl_core::print::pretty_subst(&sigma))),
        }
        if formulas < 5_000 {
            let r = check_lemma10_qff(&sigma, &u, &f, &i, 2, seed);
            match r.outcome {
                Outcome::Pass => formulas += r.trials,
                Outcome::Precondition(_) => {}
                o => return Err(format!("formula {f} under {u}: {o:?}")),
            }
        }
    }
    Ok(format!("{terms} term instances, {formulas} formula instances"))
}

fn kernel_replay() -> Check {
    for (name, script) in [("stuttering", STUTTER), ("renaming", RENAMING)] {
        let r = check_proof(script);
        ensure(r.accepted, format!("{name} rejected: {r}"))?;
        let ms = mutants(script, 50, 7);
        ensure(ms.len() == 50, format!("only {} mutants of {name}", ms.len()))?;
        for m in ms {
            ensure(
                !check_proof(&m.script).accepted,
                format!("{name} mutant accepted: {} => {}", m.original, m.mutated),
            )?;
        }
    }
    Ok("2 scripts accepted, 100 mutants rejected".into())
}

fn scaling() -> Check {
    let start = Instant::now();
    let mut out = Vec::new();
    for engine in [Engine::OnePass, Engine::Church] {
        let pts: Vec<(f64, f64)> = (8..=15)
            .map(|k| {
                let r = measure(Family::Seq, 1 << k, engine, 5);
                (r.nodes_out as f64, r.median_ns as f64)
            })
            .collect();
        let fit = fit_slope(&pts).map_err(|e| e.to_string())?;
        let ok = match engine {
            Engine::OnePass => fit.slope <= 1.25,
            Engine::Church => fit.slope >= 1.6,
        };
        ensure(ok && fit.r2 >= 0.98, format!("{engine} slope {:.2} r2 {:.3}", fit.slope, fit.r2))?;
        out.push(format!("{engine} slope {:.2} (r2 {:.3})", fit.slope, fit.r2));
    }
    let el = start.elapsed();
    ensure(el < Duration::from_secs(180), format!("took {el:?}"))?;
    Ok(format!("{}, {el:?}", out.join(", ")))
}

fn round_trip() -> Check {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut g = Gen::new(&mut rng, Shape::default());
    for n in 0..10_000u32 {
        let d = n % 8;
        match n % 3 {
            0 => {
                let t = g.term(d);
                let back = parse_term(&t.to_string()).map_err(|e| format!("{t}: {e}"))?;
                ensure(back == t, format!("term {t}"))?;
            }
            1 => {
                let f = g.formula(d);
                let back = parse_formula(&f.to_string()).map_err(|e| format!("{f}: {e}"))?;
                ensure(back == f, format!("formula {f}"))?;
            }
            _ => {
                let a = g.game(d);
                let back = parse_game(&a.to_string()).map_err(|e| format!("{a}: {e}"))?;
                ensure(back == a, format!("game {a}"))?;
            }
        }
    }
    let sigma = g.subst(3);
    let back = parse_subst(&dgl_core::print::pretty_subst(&sigma)).map_err(|e| e.to_string())?;
    ensure(back == sigma, "substitution")?;
    Ok("10000 terms, formulas and games".into())
}

type Criterion = (&'static str, fn() -> Check);

fn main() {
    let criteria: [Criterion; 9] = [
        ("1 worked examples", worked_examples),
        ("2 differential oracle", differential_oracle),
        ("3 taboo covers input and bound variables", || taboo_suite(TabooProperty::Monotone, "games")),
        ("4 antimonotone taboo", || taboo_suite(TabooProperty::Antimonotone, "games")),
        ("5 loop fixpoint", || taboo_suite(TabooProperty::LoopFixpoint, "loops")),
        ("6 substitution lemma, exact arithmetic", semantic_oracle),
        ("7 kernel replay and mutants", kernel_replay),
        ("8 seq family scaling", scaling),
        ("9 print/parse round trip", round_trip),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let mut failed = 0;
    for (name, f) in criteria {
        if !filter.is_empty() && !filter.iter().any(|w| name.contains(w.as_str())) {
            continue;
        }
        match f() {
            Ok(detail) => println!("PASS criterion {name}: {detail}"),
            Err(why) => {
                failed += 1;
                println!("FAIL criterion {name}: {why}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
