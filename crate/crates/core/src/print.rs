//! Canonical printer with minimal parentheses. `parse(pretty(e)) == e`.

use std::fmt::{self, Write};

use num_rational::BigRational;

use crate::syntax::{Expr, Formula, Game, Term};
use crate::usubst::{Replacement, USubst};

// term levels
const SUM: u8 = 1;
const PRODUCT: u8 = 2;
const UNARY: u8 = 3;
const POSTFIX: u8 = 4;

// formula levels
const EQUIV: u8 = 1;
const IMPLY: u8 = 2;
const OR: u8 = 3;
const AND: u8 = 4;
const PREFIX: u8 = 5;

// game levels
const CHOICE: u8 = 1;
const SEQ: u8 = 2;
const ATOM: u8 = 3;

fn number(out: &mut String, n: &BigRational) {
    if n.is_integer() {
        let _ = write!(out, "{}", n.numer());
    } else {
        let _ = write!(out, "{}/{}", n.numer(), n.denom());
    }
}

fn term_level(t: &Term) -> u8 {
    match t {
        Term::Plus(..) | Term::Minus(..) => SUM,
        Term::Times(..) => PRODUCT,
        Term::Neg(_) => UNARY,
        _ => POSTFIX,
    }
}

pub(crate) fn term(out: &mut String, t: &Term, min: u8) {
    let paren = term_level(t) < min;
    if paren {
        out.push('(');
    }
    match t {
        Term::Var(v) => {
            let _ = write!(out, "{v}");
        }
        Term::Number(n) => number(out, n),
        Term::Apply(s, arg) => {
            if s.is_dot() {
                out.push('.');
            } else {
                out.push_str(s.name());
                out.push('(');
                if let Some(a) = arg {
                    term(out, a, SUM);
                }
                out.push(')');
            }
        }
        Term::Plus(a, b) | Term::Minus(a, b) => {
            term(out, a, SUM);
            out.push(if matches!(t, Term::Plus(..)) { '+' } else { '-' });
            term(out, b, PRODUCT);
        }
        Term::Times(a, b) => {
            term(out, a, PRODUCT);
            out.push('*');
            term(out, b, UNARY);
        }
        Term::Neg(a) => {
            out.push('-');
            term(out, a, UNARY);
        }
        Term::Power(a, n) => {
            term(out, a, POSTFIX);
            let _ = write!(out, "^{n}");
        }
        Term::Differential(a) => {
            out.push('(');
            term(out, a, SUM);
            out.push_str(")'");
        }
    }
    if paren {
        out.push(')');
    }
}

fn formula_level(f: &Formula) -> u8 {
    match f {
        Formula::Equiv(..) => EQUIV,
        Formula::Imply(..) => IMPLY,
        Formula::Or(..) => OR,
        Formula::And(..) => AND,
        _ => PREFIX,
    }
}

pub(crate) fn formula(out: &mut String, f: &Formula, min: u8) {
    let paren = formula_level(f) < min;
    if paren {
        out.push('(');
    }
    match f {
        Formula::True => out.push_str("true"),
        Formula::False => out.push_str("false"),
        Formula::Cmp(op, a, b) => {
            term(out, a, SUM);
            out.push_str(op.as_str());
            term(out, b, SUM);
        }
        Formula::Pred(s, arg) => {
            out.push_str(s.name());
            out.push('(');
            if let Some(a) = arg {
                term(out, a, SUM);
            }
            out.push(')');
        }
        Formula::Not(a) => {
            out.push('!');
            formula(out, a, PREFIX);
        }
        Formula::And(a, b) => binary(out, a, " & ", b, AND, PREFIX),
        Formula::Or(a, b) => binary(out, a, " | ", b, OR, AND),
        Formula::Imply(a, b) => binary(out, a, " -> ", b, OR, IMPLY),
        Formula::Equiv(a, b) => binary(out, a, " <-> ", b, EQUIV, IMPLY),
        Formula::Exists(x, a) | Formula::Forall(x, a) => {
            let q = if matches!(f, Formula::Exists(..)) { "\\exists " } else { "\\forall " };
            let _ = write!(out, "{q}{x} ");
            formula(out, a, PREFIX);
        }
        Formula::Diamond(g, a) => {
            out.push('<');
            game(out, g, CHOICE, true);
            out.push('>');
            formula(out, a, PREFIX);
        }
        Formula::Box(g, a) => {
            out.push('[');
            game(out, g, CHOICE, false);
            out.push(']');
            formula(out, a, PREFIX);
        }
    }
    if paren {
        out.push(')');
    }
}

fn binary(out: &mut String, a: &Formula, op: &str, b: &Formula, la: u8, lb: u8) {
    formula(out, a, la);
    out.push_str(op);
    formula(out, b, lb);
}

fn game_level(g: &Game) -> u8 {
    match g {
        Game::Choice(..) => CHOICE,
        Game::Compose(..) => SEQ,
        _ => ATOM,
    }
}

/// `guard` is set when the game ends right before the `>` of a diamond; a
/// trailing test is braced there so its formula cannot swallow the `>`.
pub(crate) fn game(out: &mut String, g: &Game, min: u8, guard: bool) {
    let paren = game_level(g) < min;
    let guard = guard && !paren;
    if paren {
        out.push('{');
    }
    match g {
        Game::Symbol(s) => out.push_str(s.name()),
        Game::Assign(x, t) => {
            let _ = write!(out, "{x}:=");
            term(out, t, SUM);
        }
        Game::Ode(eqs, dom) => {
            out.push('{');
            equations(out, eqs);
            if **dom != Formula::True {
                out.push_str(" & ");
                formula(out, dom, EQUIV);
            }
            out.push('}');
        }
        Game::DiffGame(dg) => {
            out.push('{');
            equations(out, &dg.eqs);
            let _ = write!(out, " &d {} in (", dg.y);
            formula(out, &dg.y_set, EQUIV);
            let _ = write!(out, ") & {} in (", dg.z);
            formula(out, &dg.z_set, EQUIV);
            out.push_str(")}");
        }
        Game::Test(f) => {
            if guard {
                out.push_str("{?");
                formula(out, f, EQUIV);
                out.push('}');
            } else {
                out.push('?');
                formula(out, f, EQUIV);
            }
        }
        Game::Choice(a, b) => {
            game(out, a, SEQ, false);
            out.push_str(" ++ ");
            game(out, b, CHOICE, guard);
        }
        Game::Compose(a, b) => {
            game(out, a, ATOM, false);
            out.push_str("; ");
            game(out, b, SEQ, guard);
        }
        Game::Loop(a) => {
            out.push('{');
            game(out, a, CHOICE, false);
            out.push_str("}*");
        }
        Game::Dual(a) => {
            out.push('{');
            game(out, a, CHOICE, false);
            out.push_str("}^d");
        }
    }
    if paren {
        out.push('}');
    }
}

fn equations(out: &mut String, eqs: &[(crate::syntax::Variable, Term)]) {
    for (i, (x, t)) in eqs.iter().enumerate() {
        if i > 0 {
            out.push_str(", ");
        }
        let _ = write!(out, "{x}'=");
        term(out, t, SUM);
    }
}

pub fn pretty(e: Expr<'_>) -> String {
    let mut s = String::new();
    match e {
        Expr::Term(t) => term(&mut s, t, SUM),
        Expr::Formula(f) => formula(&mut s, f, EQUIV),
        Expr::Game(g) => game(&mut s, g, CHOICE, false),
    }
    s
}

pub fn pretty_subst(sigma: &USubst) -> String {
    let mut s = String::new();
    for (i, (k, r)) in sigma.iter().enumerate() {
        if i > 0 {
            s.push_str(" ; ");
        }
        let _ = write!(s, "{k} ~> ");
        match r {
            Replacement::Term(t) => term(&mut s, t, SUM),
            Replacement::Formula(f) => formula(&mut s, f, EQUIV),
            Replacement::Game(g) => {
                s.push('{');
                game(&mut s, g, CHOICE, false);
                s.push('}');
            }
        }
    }
    s
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(Expr::Term(self)))
    }
}

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(Expr::Formula(self)))
    }
}

impl fmt::Display for Game {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(Expr::Game(self)))
    }
}

impl fmt::Display for USubst {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty_subst(self))
    }
}

impl fmt::Display for crate::syntax::Expression {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&pretty(self.as_expr()))
    }
}
