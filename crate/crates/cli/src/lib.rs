//! The `dgl` command line.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use dgl_core::bench::{fit_slope, measure, Engine, Family, CSV_HEADER};
use dgl_core::church::Church;
use dgl_core::fuzz::{fuzz, Disagreement};
use dgl_core::gen::{Gen, Shape};
use dgl_core::kernel::script::check_proof;
use dgl_core::onepass::{LoopMode, OnePass, Options};
use dgl_core::semantics::{check_lemma10_qff, check_lemma9, Outcome};
use dgl_core::statics::{bv_game, fv_formula, fv_game, fv_term};
use dgl_core::{parse_formula, parse_game, parse_subst, parse_term, Expression, SubstError, Term, USubst, VarSet};

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_CLASH: i32 = 2;
pub const EXIT_USAGE: i32 = 64;
pub const EXIT_FILE: i32 = 66;

#[derive(Parser, Debug)]
#[command(name = "dgl", version, about = "Uniform substitution for differential game logic")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum EngineArg {
    Onepass,
    Church,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum LoopOpt {
    Bv,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum Kind {
    Auto,
    Term,
    Formula,
    Game,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum FamilyArg {
    Seq,
    Binder,
    Loop,
}

#[derive(Clone, Copy, Debug, ValueEnum, PartialEq)]
enum BenchEngine {
    Onepass,
    Church,
    Both,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Apply a substitution.
    Subst {
        #[arg(long)]
        sigma: PathBuf,
        #[arg(long)]
        input: PathBuf,
        /// Comma-separated variables, or `all`.
        #[arg(long)]
        taboo: Option<String>,
        #[arg(long, value_enum, default_value = "onepass")]
        engine: EngineArg,
        #[arg(long = "loop-opt", value_enum)]
        loop_opt: Option<LoopOpt>,
        #[arg(long, value_enum, default_value = "auto")]
        kind: Kind,
    },
    /// Free variables (and bound variables of games).
    Fv {
        /// A file, or the expression itself.
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value = "auto")]
        kind: Kind,
    },
    /// Bound variables of a game.
    Bv {
        #[arg(long)]
        input: String,
        #[arg(long, value_enum, default_value = "auto")]
        kind: Kind,
    },
    /// Check a proof script.
    Check { script: PathBuf },
    /// Compare the one-pass and reference engines on random inputs.
    Fuzz {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 7)]
        depth: u32,
        /// Where definedness mismatches are written.
        #[arg(long, default_value = "fuzz-repros")]
        out: PathBuf,
    },
    /// Check substituted against adjoint evaluation on random instances.
    Oracle {
        #[arg(long, default_value_t = 1000)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// State pairs per instance.
        #[arg(long, default_value_t = 2)]
        states: usize,
    },
    /// Time the engines on a scaling family and print CSV.
    Bench {
        #[arg(long, value_enum, default_value = "seq")]
        family: FamilyArg,
        #[arg(long, value_enum, default_value = "both")]
        engine: BenchEngine,
        /// Smallest n is 2^min_exp.
        #[arg(long, default_value_t = 8)]
        min_exp: u32,
        #[arg(long, default_value_t = 15)]
        max_exp: u32,
        #[arg(long, default_value_t = 5)]
        reps: usize,
        /// Also print the fitted log-log slope per engine on stderr.
        #[arg(long)]
        fit: bool,
    },
}

struct Io<'a> {
    out: &'a mut dyn Write,
    err: &'a mut dyn Write,
}

macro_rules! say {
    ($w:expr, $($t:tt)*) => {{
        let _ = writeln!($w, $($t)*);
    }};
}

struct Fail(i32, String);

type Res = Result<i32, Fail>;

fn read(path: &Path) -> Result<String, Fail> {
    fs::read_to_string(path).map_err(|e| Fail(EXIT_FILE, format!("{}: {e}", path.display())))
}

fn parse_expr(text: &str, kind: Kind) -> Result<Expression, Fail> {
    let text = text.trim();
    let err = |e: dgl_core::ParseError| Fail(EXIT_ERROR, e.to_string());
    match kind {
        Kind::Term => parse_term(text).map(Expression::Term).map_err(err),
        Kind::Formula => parse_formula(text).map(Expression::Formula).map_err(err),
        Kind::Game => parse_game(text).map(Expression::Game).map_err(err),
        Kind::Auto => match parse_formula(text) {
            Ok(f) => Ok(Expression::Formula(f)),
            Err(first) => parse_game(text)
                .map(Expression::Game)
                .or_else(|_| parse_term(text).map(Expression::Term))
                .map_err(|_| err(first)),
        },
    }
}

fn parse_taboo(list: &str) -> Result<VarSet, Fail> {
    if list.trim() == "all" {
        return Ok(VarSet::all());
    }
    let mut u = VarSet::empty();
    for item in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        match parse_term(item) {
            Ok(Term::Var(v)) => u.insert(v),
            _ => return Err(Fail(EXIT_USAGE, format!("not a variable in --taboo: `{item}`"))),
        }
    }
    Ok(u)
}

fn subst_failed(io: &mut Io, e: SubstError) -> Res {
    match e.clash() {
        Some(c) => {
            say!(io.out, "{c}");
            Ok(EXIT_CLASH)
        }
        None => Err(Fail(EXIT_ERROR, e.to_string())),
    }
}

fn cmd_subst(
    io: &mut Io,
    sigma: &Path,
    input: &Path,
    taboo: Option<&str>,
    engine: EngineArg,
    loop_opt: Option<LoopOpt>,
    kind: Kind,
) -> Res {
    let sigma_text = read(sigma)?;
    let input_text = read(input)?;
    let s: USubst =
        parse_subst(sigma_text.trim()).map_err(|e| Fail(EXIT_ERROR, format!("{}: {e}", sigma.display())))?;
    let expr = parse_expr(&input_text, kind).map_err(|Fail(c, m)| Fail(c, format!("{}: {m}", input.display())))?;
    let u = taboo.map(parse_taboo).transpose()?;
    match engine {
        EngineArg::Church => {
            if u.is_some() || loop_opt.is_some() {
                return Err(Fail(EXIT_USAGE, "--taboo and --loop-opt need --engine onepass".into()));
            }
            let mut e = Church::new(&s);
            let r = match &expr {
                Expression::Term(t) => e.term(t).map(|t| t.to_string()),
                Expression::Formula(f) => e.formula(f).map(|f| f.to_string()),
                Expression::Game(g) => e.game(g).map(|g| g.to_string()),
            };
            match r {
                Ok(text) => {
                    say!(io.out, "{text}");
                    Ok(EXIT_OK)
                }
                Err(e) => subst_failed(io, e),
            }
        }
        EngineArg::Onepass => {
            let u = u.unwrap_or_else(VarSet::empty);
            let loop_mode = if loop_opt.is_some() { LoopMode::BoundVars } else { LoopMode::TwoPass };
            let mut e = OnePass::with_options(&s, Options { loop_mode });
            let r = match &expr {
                Expression::Term(t) => e.term(&u, t).map(|t| t.to_string()),
                Expression::Formula(f) => e.formula(&u, f).map(|f| f.to_string()),
                Expression::Game(g) => e.game(&u, g).map(|r| format!("{}\ntaboo={}", r.game, r.out_taboo)),
            };
            match r {
                Ok(text) => {
                    say!(io.out, "{text}");
                    Ok(EXIT_OK)
                }
                Err(e) => subst_failed(io, e),
            }
        }
    }
}

fn input_text(arg: &str) -> Result<String, Fail> {
    let p = Path::new(arg);
    if p.is_file() {
        read(p)
    } else {
        Ok(arg.to_string())
    }
}

fn cmd_vars(io: &mut Io, input: &str, kind: Kind, bound_only: bool) -> Res {
    let expr = parse_expr(&input_text(input)?, kind)?;
    match (&expr, bound_only) {
        (Expression::Game(g), false) => say!(io.out, "fv={} bv={}", fv_game(g), bv_game(g)),
        (Expression::Game(g), true) => say!(io.out, "bv={}", bv_game(g)),
        (Expression::Formula(f), false) => say!(io.out, "fv={}", fv_formula(f)),
        (Expression::Term(t), false) => say!(io.out, "fv={}", fv_term(t)),
        (_, true) => return Err(Fail(EXIT_ERROR, "bound variables are defined for games".into())),
    }
    Ok(EXIT_OK)
}

fn cmd_check(io: &mut Io, script: &Path) -> Res {
    let text = read(script)?;
    let r = check_proof(&text);
    say!(io.out, "{r}");
    Ok(if r.accepted { EXIT_OK } else { EXIT_ERROR })
}

fn cmd_fuzz(io: &mut Io, trials: usize, seed: u64, depth: u32, out: &Path) -> Res {
    if !(1..=7).contains(&depth) {
        return Err(Fail(EXIT_USAGE, "--depth must be between 1 and 7".into()));
    }
    let s = fuzz(trials, seed, depth);
    say!(
        io.out,
        "trials={} both_defined={} both_clash={} onepass_only={} church_only={} unequal={}",
        s.trials,
        s.both_defined,
        s.both_clash,
        s.onepass_only,
        s.church_only,
        s.unequal
    );
    if !s.repros.is_empty() {
        fs::create_dir_all(out).map_err(|e| Fail(EXIT_FILE, format!("{}: {e}", out.display())))?;
    }
    for r in &s.repros {
        let tag = match r.kind {
            Disagreement::OnePassOnly => "onepass-only",
            Disagreement::ChurchOnly => "church-only",
            Disagreement::Unequal => "unequal",
        };
        let stem = out.join(format!("{tag}-{seed}-{}", r.trial));
        let write = |ext: &str, body: &str| {
            let p = stem.with_extension(ext);
            fs::write(&p, format!("{body}\n")).map_err(|e| Fail(EXIT_FILE, format!("{}: {e}", p.display())))
        };
        write("dgl", &r.input)?;
        write("sig", &r.sigma)?;
        say!(io.out, "{tag}: {}", stem.with_extension("dgl").display());
    }
    Ok(if s.unequal > 0 { EXIT_ERROR } else { EXIT_OK })
}

fn cmd_oracle(io: &mut Io, trials: usize, seed: u64, states: usize) -> Res {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut terms, mut formulas, mut skipped) = (0usize, 0usize, 0usize);
    for n in 0..trials {
        let mut g = Gen::new(&mut rng, Shape::arithmetic());
        let i = g.interpretation();
        let sigma = g.arithmetic_subst(2);
        let u = g.taboo();
        let t = g.term(4);
        let f = g.qff(3);
        let instance = seed.wrapping_add(n as u64);
        for (what, r) in [
            ("term", check_lemma9(&sigma, &u, &t, &i, states, instance)),
            ("formula", check_lemma10_qff(&sigma, &u, &f, &i, states, instance)),
        ] {
            match r.outcome {
                Outcome::Pass if what == "term" => terms += r.trials,
                Outcome::Pass => formulas += r.trials,
                Outcome::Precondition(_) => skipped += 1,
                o => {
                    say!(io.out, "{what} instance {n} failed: {o:?}");
                    return Ok(EXIT_ERROR);
                }
            }
        }
    }
    say!(io.out, "term_checks={terms} formula_checks={formulas} clashed={skipped} violations=0");
    Ok(EXIT_OK)
}

fn cmd_bench(
    io: &mut Io,
    family: FamilyArg,
    engine: BenchEngine,
    min_exp: u32,
    max_exp: u32,
    reps: usize,
    fit: bool,
) -> Res {
    if min_exp > max_exp || max_exp > 20 {
        return Err(Fail(EXIT_USAGE, "need --min-exp <= --max-exp <= 20".into()));
    }
    let family = match family {
        FamilyArg::Seq => Family::Seq,
        FamilyArg::Binder => Family::Binder,
        FamilyArg::Loop => Family::Loop,
    };
    let engines: Vec<Engine> = match engine {
        BenchEngine::Onepass => vec![Engine::OnePass],
        BenchEngine::Church => vec![Engine::Church],
        BenchEngine::Both => vec![Engine::OnePass, Engine::Church],
    };
    say!(io.out, "{CSV_HEADER}");
    for e in engines {
        let mut pts = Vec::new();
        for k in min_exp..=max_exp {
            let r = measure(family, 1usize << k, e, reps.max(1));
            say!(io.out, "{}", r.csv());
            pts.push((r.nodes_out as f64, r.median_ns as f64));
        }
        if fit {
            match fit_slope(&pts) {
                Ok(f) => say!(io.err, "{family} {e}: slope {:.3} r2 {:.4}", f.slope, f.r2),
                Err(err) => say!(io.err, "{family} {e}: {err}"),
            }
        }
    }
    Ok(EXIT_OK)
}

/// Run the command line `argv` (including the program name) and return the
/// exit code.
pub fn run_cli<I, S>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = S>,
    S: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let w: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(w, "{}", e.render());
            return code;
        }
    };
    let mut io = Io { out, err };
    let r = match cli.cmd {
        Cmd::Subst { sigma, input, taboo, engine, loop_opt, kind } => {
            cmd_subst(&mut io, &sigma, &input, taboo.as_deref(), engine, loop_opt, kind)
        }
        Cmd::Fv { input, kind } => cmd_vars(&mut io, &input, kind, false),
        Cmd::Bv { input, kind } => cmd_vars(&mut io, &input, kind, true),
        Cmd::Check { script } => cmd_check(&mut io, &script),
        Cmd::Fuzz { trials, seed, depth, out } => cmd_fuzz(&mut io, trials, seed, depth, &out),
        Cmd::Oracle { trials, seed, states } => cmd_oracle(&mut io, trials, seed, states),
        Cmd::Bench { family, engine, min_exp, max_exp, reps, fit } => {
            cmd_bench(&mut io, family, engine, min_exp, max_exp, reps, fit)
        }
    };
    match r {
        Ok(code) => code,
        Err(Fail(code, msg)) => {
            say!(io.err, "dgl: {msg}");
            code
        }
    }
}
