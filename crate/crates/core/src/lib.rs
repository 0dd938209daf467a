//! Uniform substitution for differential game logic.
//!
//! Syntax, static semantics, a one-pass substitution engine, a reference
//! engine that checks admissibility operator by operator, an exact semantic
//! oracle for terms and a small proof kernel.

#![allow(clippy::result_large_err, clippy::should_implement_trait)]

pub mod bench;
pub mod church;
pub mod diffgame;
pub mod fuzz;
pub mod gen;
pub mod kernel;
pub mod onepass;
pub mod parse;
pub mod print;
pub mod semantics;
pub mod statics;
pub mod syntax;
pub mod usubst;
pub mod varset;

pub use onepass::{subst_formula, subst_game, subst_term, us};
pub use parse::{parse_formula, parse_game, parse_subst, parse_term, ParseError};
pub use print::pretty;
pub use syntax::{Expr, Expression, Formula, Game, Symbol, Term, Variable};
pub use usubst::{ClashInfo, SubstError, USubst};
pub use varset::VarSet;
