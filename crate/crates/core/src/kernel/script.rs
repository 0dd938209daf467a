//! Proof scripts: one step per line.
//!
//! ```text
//! # comment
//! let ax = axiom assign_eq
//! let s = us ax "f() ~> z+1 ; c ~> {?x>=0}"
//! let r = usr M "a ~> {x:=1} ; c ~> {?true} ; d ~> {?true}"
//! let t = infer r p1
//! let m = mp imp ante
//! let g = allgen m x
//! let b = br prem x "z>=1 -> <y:=z+1>y>=2"
//! let o = oracle "x^2>=0"
//! qed "formula"
//! ```

use std::collections::BTreeMap;
use std::fmt;

use thiserror::Error;

use super::{AxiomId, ProofError, ProvedRule, RuleId, Theorem};
use crate::parse::{parse_formula, parse_subst, ParseError};
use crate::syntax::{Formula, Variable};

#[derive(Clone, PartialEq, Debug, Error)]
pub enum ScriptErrorKind {
    #[error("malformed step: {0}")]
    Syntax(String),
    #[error("unknown step {0}")]
    UnknownName(String),
    #[error("step {0} is defined twice")]
    Duplicate(String),
    #[error("step {0} is a rule, not a theorem")]
    NotTheorem(String),
    #[error("step {0} is a theorem, not a rule")]
    NotRule(String),
    #[error("cannot parse argument: {0}")]
    Parse(#[from] ParseError),
    #[error(transparent)]
    Proof(#[from] ProofError),
    #[error("script has no qed")]
    MissingQed,
    #[error("qed claims {claimed} but the last step derived {derived}")]
    QedMismatch { claimed: Formula, derived: Formula },
    #[error("nothing derived before qed")]
    Empty,
    #[error("text after qed")]
    AfterQed,
}

#[derive(Clone, PartialEq, Debug, Error)]
#[error("line {line} (step {step}): {kind}")]
pub struct ScriptError {
    pub line: usize,
    pub step: usize,
    pub kind: ScriptErrorKind,
}

#[derive(Clone, PartialEq, Debug)]
pub struct Report {
    pub accepted: bool,
    pub derived: Vec<(String, Formula)>,
    /// Every oracle formula used, in order: trusted, not checked.
    pub oracle: Vec<Formula>,
    pub error: Option<ScriptError>,
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (name, phi) in &self.derived {
            writeln!(f, "{name}: {phi}")?;
        }
        for o in &self.oracle {
            writeln!(f, "assumed (oracle): {o}")?;
        }
        match &self.error {
            None => write!(f, "accepted"),
            Some(e) => write!(f, "rejected: {e}"),
        }
    }
}

enum Value {
    Thm(Theorem),
    Rule(ProvedRule),
}

#[derive(Debug, PartialEq)]
enum Tok {
    Word(String),
    Quoted(String),
}

fn tokenize(line: &str) -> Result<Vec<Tok>, String> {
    let mut out = Vec::new();
    let mut cs = line.chars().peekable();
    while let Some(&c) = cs.peek() {
        if c.is_whitespace() {
            cs.next();
        } else if c == '#' {
            break;
        } else if c == '"' {
            cs.next();
            let mut s = String::new();
            loop {
                match cs.next() {
                    Some('"') => break,
                    Some(c) => s.push(c),
                    None => return Err("unterminated string".into()),
                }
            }
            out.push(Tok::Quoted(s));
        } else {
            let mut s = String::new();
            while let Some(&c) = cs.peek() {
                if c.is_whitespace() || c == '"' || c == '#' {
                    break;
                }
                s.push(c);
                cs.next();
            }
            out.push(Tok::Word(s));
        }
    }
    Ok(out)
}

struct Checker {
    env: BTreeMap<String, Value>,
    report: Report,
    last: Option<Formula>,
}

type K<T> = Result<T, ScriptErrorKind>;

fn word(t: Option<&Tok>, what: &str) -> K<String> {
    match t {
        Some(Tok::Word(w)) => Ok(w.clone()),
        _ => Err(ScriptErrorKind::Syntax(format!("expected {what}"))),
    }
}

fn quoted(t: Option<&Tok>, what: &str) -> K<String> {
    match t {
        Some(Tok::Quoted(q)) => Ok(q.clone()),
        _ => Err(ScriptErrorKind::Syntax(format!("expected quoted {what}"))),
    }
}

fn done(rest: &[Tok]) -> K<()> {
    if rest.is_empty() {
        Ok(())
    } else {
        Err(ScriptErrorKind::Syntax("too many arguments".into()))
    }
}

impl Checker {
    fn thm(&self, name: &str) -> K<&Theorem> {
        match self.env.get(name) {
            Some(Value::Thm(t)) => Ok(t),
            Some(Value::Rule(_)) => Err(ScriptErrorKind::NotTheorem(name.into())),
            None => Err(ScriptErrorKind::UnknownName(name.into())),
        }
    }

    fn rule(&self, name: &str) -> K<&ProvedRule> {
        match self.env.get(name) {
            Some(Value::Rule(r)) => Ok(r),
            Some(Value::Thm(_)) => Err(ScriptErrorKind::NotRule(name.into())),
            None => Err(ScriptErrorKind::UnknownName(name.into())),
        }
    }

    fn step(&self, kind: &str, args: &[Tok]) -> K<Value> {
        let a = |i: usize| args.get(i);
        Ok(match kind {
            "axiom" => {
                let id = word(a(0), "axiom name")?;
                done(&args[1..])?;
                let id = AxiomId::from_name(&id).ok_or(ProofError::UnknownAxiom(id))?;
                Value::Thm(Theorem::axiom(id))
            }
            "us" => {
                let t = self.thm(&word(a(0), "step")?)?;
                let s = parse_subst(&quoted(a(1), "substitution")?)?;
                done(&args[2..])?;
                Value::Thm(t.us(&s)?)
            }
            "usr" => {
                let id = word(a(0), "rule name")?;
                let s = parse_subst(&quoted(a(1), "substitution")?)?;
                done(&args[2..])?;
                let id = RuleId::from_name(&id).ok_or(ProofError::UnknownRule(id))?;
                Value::Rule(ProvedRule::usr(id, &s)?)
            }
            "infer" => {
                let r = self.rule(&word(a(0), "rule step")?)?;
                let premises = args[1..]
                    .iter()
                    .map(|t| word(Some(t), "step").and_then(|n| self.thm(&n)))
                    .collect::<K<Vec<_>>>()?;
                Value::Thm(r.infer(&premises)?)
            }
            "mp" => {
                let imp = self.thm(&word(a(0), "step")?)?;
                let ante = self.thm(&word(a(1), "step")?)?;
                done(&args[2..])?;
                Value::Thm(Theorem::mp(imp, ante)?)
            }
            "allgen" => {
                let t = self.thm(&word(a(0), "step")?)?;
                let x = variable(&word(a(1), "variable")?);
                done(&args[2..])?;
                Value::Thm(t.allgen(&x)?)
            }
            "br" => {
                let t = self.thm(&word(a(0), "step")?)?;
                let y = variable(&word(a(1), "variable")?);
                let target = parse_formula(&quoted(a(2), "formula")?)?;
                done(&args[3..])?;
                Value::Thm(t.br(&y, target)?)
            }
            "oracle" => {
                let f = parse_formula(&quoted(a(0), "formula")?)?;
                done(&args[1..])?;
                Value::Thm(Theorem::oracle(f)?)
            }
            other => return Err(ScriptErrorKind::Syntax(format!("unknown step kind {other}"))),
        })
    }

    fn line(&mut self, toks: &[Tok]) -> K<Option<Formula>> {
        match toks {
            [Tok::Word(q), rest @ ..] if q == "qed" => {
                let claimed = parse_formula(&quoted(rest.first(), "formula")?)?;
                done(&rest[1..])?;
                let derived = self.last.clone().ok_or(ScriptErrorKind::Empty)?;
                if derived != claimed {
                    return Err(ScriptErrorKind::QedMismatch { claimed, derived });
                }
                Ok(Some(claimed))
            }
            [Tok::Word(l), Tok::Word(name), Tok::Word(eq), Tok::Word(kind), args @ ..] if l == "let" && eq == "=" => {
                if self.env.contains_key(name) {
                    return Err(ScriptErrorKind::Duplicate(name.clone()));
                }
                let v = self.step(kind, args)?;
                if let Value::Thm(t) = &v {
                    self.report.derived.push((name.clone(), t.formula().clone()));
                    if kind == "oracle" {
                        self.report.oracle.push(t.formula().clone());
                    }
                    self.last = Some(t.formula().clone());
                }
                self.env.insert(name.clone(), v);
                Ok(None)
            }
            _ => Err(ScriptErrorKind::Syntax("expected `let NAME = STEP ...` or `qed \"...\"`".into())),
        }
    }
}

fn variable(s: &str) -> Variable {
    match s.strip_suffix('\'') {
        Some(b) => Variable::prime(b),
        None => Variable::new(s),
    }
}

/// Check every step in order. Accepted iff all steps check and `qed`
/// matches the last derived formula.
pub fn check_proof(text: &str) -> Report {
    let mut c = Checker {
        env: BTreeMap::new(),
        report: Report { accepted: false, derived: Vec::new(), oracle: Vec::new(), error: None },
        last: None,
    };
    let mut step = 0;
    let mut qed = false;
    let fail = |line: usize, step: usize, kind: ScriptErrorKind, r: &mut Report| {
        r.error = Some(ScriptError { line, step, kind });
    };
    for (i, raw) in text.lines().enumerate() {
        let toks = match tokenize(raw) {
            Ok(t) => t,
            Err(e) => {
                fail(i + 1, step + 1, ScriptErrorKind::Syntax(e), &mut c.report);
                return c.report;
            }
        };
        if toks.is_empty() {
            continue;
        }
        step += 1;
        if qed {
            fail(i + 1, step, ScriptErrorKind::AfterQed, &mut c.report);
            return c.report;
        }
        match c.line(&toks) {
            Ok(Some(_)) => qed = true,
            Ok(None) => {}
            Err(kind) => {
                fail(i + 1, step, kind, &mut c.report);
                return c.report;
            }
        }
    }
    if !qed {
        let n = text.lines().count();
        fail(n, step + 1, ScriptErrorKind::MissingQed, &mut c.report);
        return c.report;
    }
    c.report.accepted = true;
    c.report
}

/// Derivation of `x>=0 <-> <x:=x>x>=0`.
pub const STUTTER: &str = include_str!("../../fixtures/stutter.dglp");

/// Derivations of `<y:=θ>ψ` and `[y:=θ]ψ` by renaming `y` to a fresh `x`.
pub const RENAMING: &str = include_str!("../../fixtures/renaming.dglp");
