//! Concrete syntax: lexer and recursive-descent parser.
//!
//! Terms: `x`, `x'`, numbers (`3`, `3/4`, `1.5`), `.`, `f()`, `f(θ)`, `-θ`,
//! `θ^n`, `(θ)'`, `*`, `+`, `-`. Formulas: comparisons `>= > <= < = !=`,
//! `p()`, `p(θ)`, `true`, `false`, `!`, `&`, `|`, `->`, `<->`,
//! `\exists x`, `\forall x`, `<α>φ`, `[α]φ`. Games: `a`, `x:=θ`, `?φ`,
//! `{x'=θ, y'=η & ψ}`, `{x'=θ &d y in (Y) & z in (Z)}`, `{α}*`, `{α}^d`,
//! `α;β`, `α++β`. Substitutions: `f(.) ~> θ ; p() ~> φ ; a ~> {α}`.
//! `#` starts a comment that runs to the end of the line.

use std::collections::BTreeSet;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{ToPrimitive, Zero};
use thiserror::Error;

use crate::syntax::{well_formed, CmpOp, DiffGame, Expr, Expression, Formula, Game, Symbol, Term, Variable, Violation};
use crate::usubst::{BindingError, Replacement, USubst};

/// Byte range into the parsed text.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct SourceSpan {
    pub start: usize,
    pub end: usize,
}

impl fmt::Display for SourceSpan {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}..{}", self.start, self.end)
    }
}

#[derive(Clone, PartialEq, Eq, Debug, Error)]
pub enum ParseError {
    #[error("syntax error at {span}: expected {}, found {found}", list(.expected))]
    Syntax { span: SourceSpan, expected: BTreeSet<String>, found: String },
    #[error("ill-formed: {}", .0.iter().map(|v| v.to_string()).collect::<Vec<_>>().join("; "))]
    WellFormed(Vec<Violation>),
    #[error("at {span}: {source}")]
    Binding { span: SourceSpan, source: BindingError },
}

fn list(s: &BTreeSet<String>) -> String {
    s.iter().cloned().collect::<Vec<_>>().join(" or ")
}

impl ParseError {
    pub fn span(&self) -> Option<SourceSpan> {
        match self {
            ParseError::Syntax { span, .. } | ParseError::Binding { span, .. } => Some(*span),
            ParseError::WellFormed(_) => None,
        }
    }
}

#[derive(Clone, PartialEq, Debug)]
enum Tok {
    Ident(String),
    Num(BigRational),
    Exists,
    Forall,
    True,
    False,
    In,
    LParen,
    RParen,
    LBrace,
    RBrace,
    LBrack,
    RBrack,
    Lt,
    Gt,
    Le,
    Ge,
    Eq,
    Ne,
    Plus,
    Minus,
    Star,
    Caret,
    Prime,
    Dot,
    Comma,
    Semi,
    Choice,
    Assign,
    Bang,
    Amp,
    Bar,
    Arrow,
    Equiv,
    Question,
    Maps,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Num(n) => format!("number `{n}`"),
            Tok::Eof => "end of input".into(),
            t => format!("`{}`", t.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::Exists => "\\exists",
            Tok::Forall => "\\forall",
            Tok::True => "true",
            Tok::False => "false",
            Tok::In => "in",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Le => "<=",
            Tok::Ge => ">=",
            Tok::Eq => "=",
            Tok::Ne => "!=",
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Caret => "^",
            Tok::Prime => "'",
            Tok::Dot => ".",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Choice => "++",
            Tok::Assign => ":=",
            Tok::Bang => "!",
            Tok::Amp => "&",
            Tok::Bar => "|",
            Tok::Arrow => "->",
            Tok::Equiv => "<->",
            Tok::Question => "?",
            Tok::Maps => "~>",
            Tok::Ident(_) | Tok::Num(_) | Tok::Eof => "",
        }
    }
}

struct Lexed {
    tok: Tok,
    span: SourceSpan,
}

fn lex(src: &str) -> Result<Vec<Lexed>, ParseError> {
    let b = src.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let err = |start: usize, end: usize, what: &str| ParseError::Syntax {
        span: SourceSpan { start, end },
        expected: [what.to_string()].into_iter().collect(),
        found: format!("`{}`", &src[start..end]),
    };
    while i < b.len() {
        let c = b[i];
        if c.is_ascii_whitespace() {
            i += 1;
            continue;
        }
        if c == b'#' {
            while i < b.len() && b[i] != b'\n' {
                i += 1;
            }
            continue;
        }
        let start = i;
        let next = |k: usize| b.get(i + k).copied().unwrap_or(0);
        let (tok, len) = if c.is_ascii_alphabetic() {
            let mut j = i + 1;
            while j < b.len() && (b[j].is_ascii_alphanumeric() || b[j] == b'_') {
                j += 1;
            }
            let word = &src[i..j];
            let t = match word {
                "true" => Tok::True,
                "false" => Tok::False,
                "in" => Tok::In,
                _ => Tok::Ident(word.to_string()),
            };
            (t, j - i)
        } else if c.is_ascii_digit() {
            let mut j = i;
            while j < b.len() && b[j].is_ascii_digit() {
                j += 1;
            }
            let whole: BigInt = src[i..j].parse().expect("digits");
            let mut value = BigRational::from_integer(whole);
            if j + 1 < b.len() && b[j] == b'/' && b[j + 1].is_ascii_digit() {
                let mut k = j + 1;
                while k < b.len() && b[k].is_ascii_digit() {
                    k += 1;
                }
                let den: BigInt = src[j + 1..k].parse().expect("digits");
                if den.is_zero() {
                    return Err(err(i, k, "nonzero denominator"));
                }
                value /= BigRational::from_integer(den);
                j = k;
            } else if j + 1 < b.len() && b[j] == b'.' && b[j + 1].is_ascii_digit() {
                let mut k = j + 1;
                while k < b.len() && b[k].is_ascii_digit() {
                    k += 1;
                }
                let frac: BigInt = src[j + 1..k].parse().expect("digits");
                let scale = num_traits::pow(BigInt::from(10), k - j - 1);
                value += BigRational::new(frac, scale);
                j = k;
            }
            (Tok::Num(value), j - i)
        } else if c == b'\\' {
            let mut j = i + 1;
            while j < b.len() && b[j].is_ascii_alphabetic() {
                j += 1;
            }
            match &src[i + 1..j] {
                "exists" => (Tok::Exists, j - i),
                "forall" => (Tok::Forall, j - i),
                _ => return Err(err(i, j.max(i + 1), "\\exists or \\forall")),
            }
        } else {
            match (c, next(1), next(2)) {
                (b'<', b'-', b'>') => (Tok::Equiv, 3),
                (b'<', b'=', _) => (Tok::Le, 2),
                (b'>', b'=', _) => (Tok::Ge, 2),
                (b'!', b'=', _) => (Tok::Ne, 2),
                (b'-', b'>', _) => (Tok::Arrow, 2),
                (b'+', b'+', _) => (Tok::Choice, 2),
                (b':', b'=', _) => (Tok::Assign, 2),
                (b'~', b'>', _) => (Tok::Maps, 2),
                (b'<', _, _) => (Tok::Lt, 1),
                (b'>', _, _) => (Tok::Gt, 1),
                (b'=', _, _) => (Tok::Eq, 1),
                (b'!', _, _) => (Tok::Bang, 1),
                (b'+', _, _) => (Tok::Plus, 1),
                (b'-', _, _) => (Tok::Minus, 1),
                (b'*', _, _) => (Tok::Star, 1),
                (b'^', _, _) => (Tok::Caret, 1),
                (b'\'', _, _) => (Tok::Prime, 1),
                (b'.', _, _) => (Tok::Dot, 1),
                (b',', _, _) => (Tok::Comma, 1),
                (b';', _, _) => (Tok::Semi, 1),
                (b'(', _, _) => (Tok::LParen, 1),
                (b')', _, _) => (Tok::RParen, 1),
                (b'{', _, _) => (Tok::LBrace, 1),
                (b'}', _, _) => (Tok::RBrace, 1),
                (b'[', _, _) => (Tok::LBrack, 1),
                (b']', _, _) => (Tok::RBrack, 1),
                (b'&', _, _) => (Tok::Amp, 1),
                (b'|', _, _) => (Tok::Bar, 1),
                (b'?', _, _) => (Tok::Question, 1),
                _ => {
                    let w = src[i..].chars().next().map_or(1, |ch| ch.len_utf8());
                    return Err(err(i, i + w, "a token"));
                }
            }
        };
        i += len;
        out.push(Lexed { tok, span: SourceSpan { start, end: i } });
    }
    out.push(Lexed { tok: Tok::Eof, span: SourceSpan { start: b.len(), end: b.len() } });
    Ok(out)
}

struct Fail;

type P<T> = Result<T, Fail>;

struct Parser {
    toks: Vec<Lexed>,
    pos: usize,
    furthest: usize,
    expected: BTreeSet<String>,
    /// Set while re-parsing the game of `<α>` so that `>` closes the modality
    /// instead of being read as a comparison.
    no_gt: bool,
}

impl Parser {
    fn new(src: &str) -> Result<Self, ParseError> {
        Ok(Parser { toks: lex(src)?, pos: 0, furthest: 0, expected: BTreeSet::new(), no_gt: false })
    }

    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn peek_at(&self, k: usize) -> &Tok {
        let i = (self.pos + k).min(self.toks.len() - 1);
        &self.toks[i].tok
    }

    fn bump(&mut self) {
        if self.pos + 1 < self.toks.len() {
            self.pos += 1;
        }
    }

    fn fail(&mut self, what: &str) -> Fail {
        if self.pos > self.furthest {
            self.furthest = self.pos;
            self.expected.clear();
        }
        if self.pos == self.furthest {
            self.expected.insert(what.to_string());
        }
        Fail
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> P<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.fail(&format!("`{}`", t.text())))
        }
    }

    fn error(&self) -> ParseError {
        let l = &self.toks[self.furthest];
        ParseError::Syntax { span: l.span, expected: self.expected.clone(), found: l.tok.describe() }
    }

    fn scoped<T>(&mut self, no_gt: bool, f: impl FnOnce(&mut Self) -> P<T>) -> P<T> {
        let old = self.no_gt;
        self.no_gt = no_gt;
        let r = f(self);
        self.no_gt = old;
        r
    }

    fn end(&mut self) -> P<()> {
        if *self.peek() == Tok::Eof {
            Ok(())
        } else {
            Err(self.fail("end of input"))
        }
    }

    fn ident(&mut self) -> P<String> {
        if let Tok::Ident(s) = self.peek() {
            let s = s.clone();
            self.bump();
            Ok(s)
        } else {
            Err(self.fail("identifier"))
        }
    }

    fn variable(&mut self) -> P<Variable> {
        let name = self.ident()?;
        if self.eat(&Tok::Prime) {
            Ok(Variable::prime(&name))
        } else {
            Ok(Variable::new(&name))
        }
    }

    // ---------------------------------------------------------------- terms

    fn term(&mut self) -> P<Term> {
        let mut l = self.product()?;
        loop {
            if self.eat(&Tok::Plus) {
                l = Term::plus(l, self.product()?);
            } else if self.eat(&Tok::Minus) {
                l = Term::minus(l, self.product()?);
            } else {
                return Ok(l);
            }
        }
    }

    fn product(&mut self) -> P<Term> {
        let mut l = self.unary()?;
        while self.eat(&Tok::Star) {
            l = Term::times(l, self.unary()?);
        }
        Ok(l)
    }

    fn unary(&mut self) -> P<Term> {
        if self.eat(&Tok::Minus) {
            Ok(Term::neg(self.unary()?))
        } else {
            self.postfix()
        }
    }

    fn postfix(&mut self) -> P<Term> {
        let (mut t, mut paren) = self.atom()?;
        loop {
            match (self.peek(), self.peek_at(1)) {
                (Tok::Caret, Tok::Num(n)) if n.is_integer() => {
                    let Some(e) = n.to_integer().to_u32() else {
                        self.bump();
                        return Err(self.fail("exponent below 2^32"));
                    };
                    self.bump();
                    self.bump();
                    t = Term::power(t, e);
                    paren = false;
                }
                (Tok::Prime, _) if paren => {
                    self.bump();
                    t = Term::differential(t);
                    paren = false;
                }
                _ => return Ok(t),
            }
        }
    }

    /// Returns the atom and whether it was a parenthesised group.
    fn atom(&mut self) -> P<(Term, bool)> {
        match self.peek().clone() {
            Tok::Num(n) => {
                self.bump();
                Ok((Term::Number(n), false))
            }
            Tok::Dot => {
                self.bump();
                Ok((Term::dot(), false))
            }
            Tok::Ident(name) => {
                if *self.peek_at(1) == Tok::LParen {
                    self.bump();
                    self.bump();
                    let arg = self.argument()?;
                    let arity = u8::from(arg.is_some());
                    Ok((Term::Apply(Symbol::function(&name, arity), arg), false))
                } else {
                    Ok((Term::Var(self.variable()?), false))
                }
            }
            Tok::LParen => {
                self.bump();
                let t = self.scoped(false, |p| p.term())?;
                self.expect(Tok::RParen)?;
                Ok((t, true))
            }
            _ => Err(self.fail("term")),
        }
    }

    /// After `(`: optional argument then `)`.
    fn argument(&mut self) -> P<Option<Box<Term>>> {
        if self.eat(&Tok::RParen) {
            return Ok(None);
        }
        let a = self.scoped(false, |p| p.term())?;
        self.expect(Tok::RParen)?;
        Ok(Some(Box::new(a)))
    }

    // ------------------------------------------------------------- formulas

    fn formula(&mut self) -> P<Formula> {
        let mut l = self.imply()?;
        while self.eat(&Tok::Equiv) {
            l = Formula::equiv(l, self.imply()?);
        }
        Ok(l)
    }

    fn imply(&mut self) -> P<Formula> {
        let l = self.disj()?;
        if self.eat(&Tok::Arrow) {
            Ok(Formula::imply(l, self.imply()?))
        } else {
            Ok(l)
        }
    }

    fn disj(&mut self) -> P<Formula> {
        let mut l = self.conj()?;
        while self.eat(&Tok::Bar) {
            l = Formula::or(l, self.conj()?);
        }
        Ok(l)
    }

    fn conj(&mut self) -> P<Formula> {
        let mut l = self.funary()?;
        while self.eat(&Tok::Amp) {
            l = Formula::and(l, self.funary()?);
        }
        Ok(l)
    }

    fn funary(&mut self) -> P<Formula> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.funary()?))
            }
            Tok::Exists | Tok::Forall => {
                let ex = *self.peek() == Tok::Exists;
                self.bump();
                let x = self.variable()?;
                let body = self.funary()?;
                Ok(if ex { Formula::exists(x, body) } else { Formula::forall(x, body) })
            }
            Tok::Lt => {
                self.bump();
                let start = self.pos;
                let first = self.scoped(false, |p| p.game());
                let g = match first {
                    Ok(g) if *self.peek() == Tok::Gt => g,
                    _ => {
                        self.pos = start;
                        self.scoped(true, |p| p.game())?
                    }
                };
                self.expect(Tok::Gt)?;
                Ok(Formula::diamond(g, self.funary()?))
            }
            Tok::LBrack => {
                self.bump();
                let g = self.scoped(false, |p| p.game())?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::boxed(g, self.funary()?))
            }
            _ => self.fprimary(),
        }
    }

    fn comparison(&mut self) -> P<Formula> {
        let l = self.term()?;
        let op = match self.peek() {
            Tok::Ge if !self.no_gt => CmpOp::Geq,
            Tok::Gt if !self.no_gt => CmpOp::Gt,
            Tok::Le => CmpOp::Leq,
            Tok::Lt => CmpOp::Lt,
            Tok::Eq => CmpOp::Eq,
            Tok::Ne => CmpOp::Neq,
            _ => return Err(self.fail("comparison operator")),
        };
        self.bump();
        let r = self.term()?;
        Ok(Formula::cmp(op, l, r))
    }

    fn fprimary(&mut self) -> P<Formula> {
        let start = self.pos;
        if let Ok(f) = self.comparison() {
            return Ok(f);
        }
        self.pos = start;
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::False)
            }
            Tok::Ident(name) if *self.peek_at(1) == Tok::LParen => {
                self.bump();
                self.bump();
                let arg = self.argument()?;
                let arity = u8::from(arg.is_some());
                Ok(Formula::Pred(Symbol::predicate(&name, arity), arg))
            }
            Tok::LParen => {
                self.bump();
                let f = self.scoped(false, |p| p.formula())?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            _ => Err(self.fail("formula")),
        }
    }

    // ---------------------------------------------------------------- games

    fn game(&mut self) -> P<Game> {
        let mut parts = vec![self.seq()?];
        while self.eat(&Tok::Choice) {
            parts.push(self.seq()?);
        }
        Ok(fold_right(parts, Game::choice))
    }

    fn seq(&mut self) -> P<Game> {
        let mut parts = vec![self.gpostfix()?];
        while self.eat(&Tok::Semi) {
            parts.push(self.gpostfix()?);
        }
        Ok(fold_right(parts, Game::compose))
    }

    fn gpostfix(&mut self) -> P<Game> {
        let mut g = self.gprimary()?;
        loop {
            match (self.peek(), self.peek_at(1)) {
                (Tok::Star, _) => {
                    self.bump();
                    g = Game::repeat(g);
                }
                (Tok::Caret, Tok::Ident(d)) if d == "d" => {
                    self.bump();
                    self.bump();
                    g = Game::dual(g);
                }
                _ => return Ok(g),
            }
        }
    }

    fn gprimary(&mut self) -> P<Game> {
        match self.peek().clone() {
            Tok::LBrace => {
                self.bump();
                let is_ode = matches!(self.peek(), Tok::Ident(_))
                    && *self.peek_at(1) == Tok::Prime
                    && *self.peek_at(2) == Tok::Eq;
                let g = if is_ode { self.scoped(false, |p| p.ode())? } else { self.scoped(false, |p| p.game())? };
                self.expect(Tok::RBrace)?;
                Ok(g)
            }
            Tok::Question => {
                self.bump();
                Ok(Game::test(self.formula()?))
            }
            Tok::Ident(name) => {
                let assign = *self.peek_at(1) == Tok::Assign
                    || (*self.peek_at(1) == Tok::Prime && *self.peek_at(2) == Tok::Assign);
                if assign {
                    let x = self.variable()?;
                    self.expect(Tok::Assign)?;
                    Ok(Game::assign(x, self.term()?))
                } else {
                    self.bump();
                    Ok(Game::symbol(&name))
                }
            }
            _ => Err(self.fail("game")),
        }
    }

    /// Body of `{x'=θ, ... & ψ}` or of a differential game, without braces.
    fn ode(&mut self) -> P<Game> {
        let mut eqs = Vec::new();
        loop {
            let x = Variable::new(&self.ident()?);
            self.expect(Tok::Prime)?;
            self.expect(Tok::Eq)?;
            eqs.push((x, self.term()?));
            if !self.eat(&Tok::Comma) {
                break;
            }
        }
        let is_game = *self.peek() == Tok::Amp
            && matches!(self.peek_at(1), Tok::Ident(d) if d == "d")
            && matches!(self.peek_at(2), Tok::Ident(_))
            && *self.peek_at(3) == Tok::In;
        if is_game {
            self.bump();
            self.bump();
            let (y, y_set) = self.control()?;
            self.expect(Tok::Amp)?;
            let (z, z_set) = self.control()?;
            return Ok(Game::DiffGame(DiffGame { eqs, y, y_set: Box::new(y_set), z, z_set: Box::new(z_set) }));
        }
        let dom = if self.eat(&Tok::Amp) { self.formula()? } else { Formula::True };
        Ok(Game::ode(eqs, dom))
    }

    /// `y in (Y)`
    fn control(&mut self) -> P<(Variable, Formula)> {
        let v = self.variable()?;
        self.expect(Tok::In)?;
        self.expect(Tok::LParen)?;
        let f = self.formula()?;
        self.expect(Tok::RParen)?;
        Ok((v, f))
    }
}

fn fold_right(mut parts: Vec<Game>, f: fn(Game, Game) -> Game) -> Game {
    let mut acc = parts.pop().expect("nonempty");
    while let Some(p) = parts.pop() {
        acc = f(p, acc);
    }
    acc
}

fn run<T>(src: &str, f: impl FnOnce(&mut Parser) -> P<T>) -> Result<T, ParseError> {
    let mut p = Parser::new(src)?;
    match f(&mut p).and_then(|t| p.end().map(|_| t)) {
        Ok(t) => Ok(t),
        Err(Fail) => Err(p.error()),
    }
}

fn checked<T>(t: T, e: impl for<'a> Fn(&'a T) -> Expr<'a>) -> Result<T, ParseError> {
    let v = well_formed(e(&t));
    if v.is_empty() {
        Ok(t)
    } else {
        Err(ParseError::WellFormed(v))
    }
}

pub fn parse_term(src: &str) -> Result<Term, ParseError> {
    checked(run(src, |p| p.term())?, |t| Expr::Term(t))
}

pub fn parse_formula(src: &str) -> Result<Formula, ParseError> {
    checked(run(src, |p| p.formula())?, |t| Expr::Formula(t))
}

pub fn parse_game(src: &str) -> Result<Game, ParseError> {
    checked(run(src, |p| p.game())?, |t| Expr::Game(t))
}

/// Which category an expression text should be parsed as.
#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub enum ExprKind {
    Term,
    Formula,
    Game,
}

/// Parse as the requested kind, or try formula, game and term in turn.
pub fn parse_expression(src: &str, kind: Option<ExprKind>) -> Result<Expression, ParseError> {
    match kind {
        Some(ExprKind::Term) => parse_term(src).map(Expression::Term),
        Some(ExprKind::Formula) => parse_formula(src).map(Expression::Formula),
        Some(ExprKind::Game) => parse_game(src).map(Expression::Game),
        None => parse_formula(src)
            .map(Expression::Formula)
            .or_else(|e| parse_game(src).map(Expression::Game).map_err(|_| e.clone()))
            .or_else(|e| parse_term(src).map(Expression::Term).map_err(|_| e)),
    }
}

/// Parse `key ~> replacement` bindings separated by `;`.
pub fn parse_subst(src: &str) -> Result<USubst, ParseError> {
    let mut p = Parser::new(src)?;
    let mut sigma = USubst::new();
    loop {
        if *p.peek() == Tok::Eof {
            break;
        }
        let key_start = p.toks[p.pos].span.start;
        let binding = p.binding();
        let (name, arity, repl) = match binding {
            Ok(b) => b,
            Err(Fail) => return Err(p.error()),
        };
        let span = SourceSpan { start: key_start, end: p.toks[p.pos.saturating_sub(1)].span.end };
        let violations = well_formed(repl.as_expr());
        if !violations.is_empty() {
            return Err(ParseError::WellFormed(violations));
        }
        let key = match (&repl, arity) {
            (Replacement::Game(_), None) => Symbol::game(&name),
            (Replacement::Formula(_), Some(a)) => Symbol::predicate(&name, a),
            (Replacement::Term(_), Some(a)) => Symbol::function(&name, a),
            (r, None) => {
                let source = BindingError::KindMismatch {
                    key: Symbol::game(&name),
                    expected: crate::syntax::SymbolKind::Game,
                    found: r.kind_name(),
                };
                return Err(ParseError::Binding { span, source });
            }
            (Replacement::Game(_), Some(a)) => {
                let source = BindingError::KindMismatch {
                    key: Symbol::function(&name, a),
                    expected: crate::syntax::SymbolKind::Function,
                    found: "game",
                };
                return Err(ParseError::Binding { span, source });
            }
        };
        sigma.insert(key, repl).map_err(|source| ParseError::Binding { span, source })?;
        if !p.eat(&Tok::Semi) {
            if p.end().is_err() {
                return Err(p.error());
            }
            break;
        }
    }
    Ok(sigma)
}

impl Parser {
    /// One binding; the arity is `None` for a bare (game) key.
    fn binding(&mut self) -> P<(String, Option<u8>, Replacement)> {
        let name = self.ident()?;
        let arity = if self.eat(&Tok::LParen) {
            if self.eat(&Tok::RParen) {
                Some(0)
            } else {
                self.expect(Tok::Dot)?;
                self.expect(Tok::RParen)?;
                Some(1)
            }
        } else {
            None
        };
        self.expect(Tok::Maps)?;
        let start = self.pos;
        let stop = |p: &Parser| matches!(p.peek(), Tok::Semi | Tok::Eof);
        if let Ok(t) = self.term() {
            if stop(self) {
                return Ok((name, arity, Replacement::Term(t)));
            }
        }
        self.pos = start;
        if let Ok(f) = self.formula() {
            if stop(self) {
                return Ok((name, arity, Replacement::Formula(f)));
            }
        }
        self.pos = start;
        let g = self.gpostfix()?;
        if !stop(self) {
            return Err(self.fail("`;`"));
        }
        Ok((name, arity, Replacement::Game(g)))
    }
}
