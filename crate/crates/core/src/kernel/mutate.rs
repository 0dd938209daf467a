//! Single-point mutations of the formulas and substitutions in a proof
//! script. A sound checker must reject every mutant of a tight script.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::parse::{parse_formula, parse_subst};
use crate::print::pretty_subst;
use crate::syntax::{CmpOp, Formula, Game, Term, Variable};
use crate::usubst::{Replacement, USubst};

#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Mutant {
    /// 1-based line of the mutated argument.
    pub line: usize,
    pub original: String,
    pub mutated: String,
    pub script: String,
}

struct Point {
    target: usize,
    seen: usize,
}

impl Point {
    fn hit(&mut self) -> bool {
        let h = self.seen == self.target;
        self.seen += 1;
        h
    }

    fn term(&mut self, t: &mut Term) {
        match t {
            Term::Number(n) => {
                if self.hit() {
                    *n += num_rational::BigRational::from_integer(1.into());
                }
            }
            Term::Var(v) => {
                if self.hit() {
                    let name = if v.name() == "w" { "u" } else { "w" };
                    *v = if v.is_differential() { Variable::prime(name) } else { Variable::new(name) };
                }
            }
            Term::Apply(_, arg) => {
                if let Some(a) = arg {
                    self.term(a);
                }
            }
            Term::Plus(a, b) | Term::Minus(a, b) | Term::Times(a, b) => {
                self.term(a);
                self.term(b);
            }
            Term::Neg(a) | Term::Power(a, _) | Term::Differential(a) => self.term(a),
        }
    }

    fn formula(&mut self, f: &mut Formula) {
        match f {
            Formula::True | Formula::False => {
                if self.hit() {
                    *f = if *f == Formula::True { Formula::False } else { Formula::True };
                }
            }
            Formula::Cmp(op, a, b) => {
                if self.hit() {
                    *op = match op {
                        CmpOp::Geq => CmpOp::Gt,
                        CmpOp::Gt => CmpOp::Geq,
                        CmpOp::Leq => CmpOp::Lt,
                        CmpOp::Lt => CmpOp::Leq,
                        CmpOp::Eq => CmpOp::Neq,
                        CmpOp::Neq => CmpOp::Eq,
                    };
                }
                self.term(a);
                self.term(b);
            }
            Formula::Pred(_, arg) => {
                if let Some(a) = arg {
                    self.term(a);
                }
            }
            Formula::Not(a) | Formula::Exists(_, a) | Formula::Forall(_, a) => self.formula(a),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Imply(a, b) | Formula::Equiv(a, b) => {
                self.formula(a);
                self.formula(b);
            }
            Formula::Diamond(g, a) | Formula::Box(g, a) => {
                self.game(g);
                self.formula(a);
            }
        }
    }

    fn game(&mut self, g: &mut Game) {
        match g {
            Game::Symbol(_) => {}
            Game::Assign(_, t) => self.term(t),
            Game::Ode(eqs, dom) => {
                for (_, t) in eqs.iter_mut() {
                    self.term(t);
                }
                self.formula(dom);
            }
            Game::Test(f) => self.formula(f),
            Game::Choice(a, b) | Game::Compose(a, b) => {
                self.game(a);
                self.game(b);
            }
            Game::Loop(a) | Game::Dual(a) => self.game(a),
            Game::DiffGame(d) => {
                for (_, t) in d.eqs.iter_mut() {
                    self.term(t);
                }
                self.formula(&mut d.y_set);
                self.formula(&mut d.z_set);
            }
        }
    }

    fn replacement(&mut self, r: &mut Replacement) {
        match r {
            Replacement::Term(t) => self.term(t),
            Replacement::Formula(f) => self.formula(f),
            Replacement::Game(g) => self.game(g),
        }
    }
}

fn count<T>(x: &T, visit: impl Fn(&mut Point, &mut T)) -> usize
where
    T: Clone,
{
    let mut p = Point { target: usize::MAX, seen: 0 };
    visit(&mut p, &mut x.clone());
    p.seen
}

fn mutate_formula<G: Rng>(src: &str, rng: &mut G) -> Option<String> {
    let f = parse_formula(src).ok()?;
    let n = count(&f, |p, f| p.formula(f));
    if n == 0 {
        return None;
    }
    let mut m = f.clone();
    Point { target: rng.gen_range(0..n), seen: 0 }.formula(&mut m);
    let out = m.to_string();
    (parse_formula(&out).ok()? != f).then_some(out)
}

fn mutate_subst<G: Rng>(src: &str, rng: &mut G) -> Option<String> {
    let s = parse_subst(src).ok()?;
    let mut entries: Vec<_> = s.iter().map(|(k, r)| (k.clone(), r.clone())).collect();
    let total: usize = entries.iter().map(|(_, r)| count(r, |p, r| p.replacement(r))).sum();
    if total == 0 {
        return None;
    }
    let mut p = Point { target: rng.gen_range(0..total), seen: 0 };
    for (_, r) in entries.iter_mut() {
        p.replacement(r);
    }
    let mut out = USubst::new();
    for (k, r) in entries {
        out.insert(k, r).ok()?;
    }
    let text = pretty_subst(&out);
    (parse_subst(&text).ok()? != s).then_some(text)
}

struct Site {
    line: usize,
    start: usize,
    end: usize,
    subst: bool,
}

fn sites(script: &str) -> Vec<Site> {
    let mut out = Vec::new();
    for (i, line) in script.lines().enumerate() {
        let code = match line.find('#') {
            Some(c) if !line[..c].contains('"') => &line[..c],
            _ => line,
        };
        let words: Vec<&str> = code.split_whitespace().collect();
        let subst = matches!(words.get(3), Some(&"us") | Some(&"usr"));
        let mut from = 0;
        while let Some(a) = code[from..].find('"') {
            let start = from + a + 1;
            let Some(len) = code[start..].find('"') else { break };
            out.push(Site { line: i, start, end: start + len, subst });
            from = start + len + 1;
        }
    }
    out
}

/// Up to `n` distinct mutants, each changing one formula or substitution
/// argument at one point.
pub fn mutants(script: &str, n: usize, seed: u64) -> Vec<Mutant> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let sites = sites(script);
    let lines: Vec<&str> = script.lines().collect();
    let mut out: Vec<Mutant> = Vec::new();
    let mut attempts = 0;
    while out.len() < n && attempts < n * 100 {
        attempts += 1;
        let Some(site) = sites.choose(&mut rng) else { break };
        let line = lines[site.line];
        let original = &line[site.start..site.end];
        let mutated = if site.subst { mutate_subst(original, &mut rng) } else { mutate_formula(original, &mut rng) };
        let Some(mutated) = mutated else { continue };
        let new_line = format!("{}{}{}", &line[..site.start], mutated, &line[site.end..]);
        let mut text: Vec<&str> = lines.clone();
        text[site.line] = &new_line;
        let script = text.join("\n");
        if out.iter().any(|m| m.script == script) {
            continue;
        }
        out.push(Mutant { line: site.line + 1, original: original.to_string(), mutated, script });
    }
    out
}
