//! Scaling families, timing and log-log slope fitting.

use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use thiserror::Error;

use crate::church::Church;
use crate::onepass::OnePass;
use crate::syntax::{Formula, Game, Symbol, Term, Variable};
use crate::usubst::{Replacement, USubst};
use crate::varset::VarSet;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    Seq,
    Binder,
    Loop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Engine {
    OnePass,
    Church,
}

#[derive(Debug, Error, PartialEq)]
pub enum BenchError {
    #[error("unknown family `{0}` (expected seq, binder or loop)")]
    UnknownFamily(String),
    #[error("unknown engine `{0}` (expected onepass or church)")]
    UnknownEngine(String),
    #[error("need at least 6 points, got {0}")]
    TooFewPoints(usize),
    #[error("points span {0:.2} decades, need 2")]
    NarrowRange(f64),
    #[error("nonpositive value in fit data")]
    Nonpositive,
}

impl FromStr for Family {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "seq" => Ok(Family::Seq),
            "binder" => Ok(Family::Binder),
            "loop" => Ok(Family::Loop),
            _ => Err(BenchError::UnknownFamily(s.to_string())),
        }
    }
}

impl fmt::Display for Family {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Family::Seq => "seq",
            Family::Binder => "binder",
            Family::Loop => "loop",
        })
    }
}

impl FromStr for Engine {
    type Err = BenchError;
    fn from_str(s: &str) -> Result<Self, BenchError> {
        match s {
            "onepass" => Ok(Engine::OnePass),
            "church" => Ok(Engine::Church),
            _ => Err(BenchError::UnknownEngine(s.to_string())),
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Engine::OnePass => "onepass",
            Engine::Church => "church",
        })
    }
}

fn p_of(t: Term) -> Formula {
    Formula::pred1("p", t)
}

/// The substitution and input formula of family member `n`.
pub fn gen_family(family: Family, n: usize) -> (USubst, Formula) {
    let x = || Term::var("x");
    let mut sigma = USubst::new();
    sigma
        .insert(Symbol::predicate("p", 1), Replacement::Formula(Formula::geq(Term::dot(), Term::int(0))))
        .expect("fresh key");
    let phi = match family {
        Family::Seq => {
            let step = || Game::assign(Variable::new("x"), Term::plus(x(), Term::int(1)));
            let mut g = step();
            for _ in 1..n {
                g = Game::compose(step(), g);
            }
            Formula::diamond(g, p_of(x()))
        }
        Family::Binder => {
            let mut f = p_of(Term::var("x1"));
            for i in (1..=n).rev() {
                f = Formula::exists(Variable::new(&format!("x{i}")), f);
            }
            f
        }
        Family::Loop => {
            let mut g = Game::assign(Variable::new("x"), Term::plus(x(), Term::int(1)));
            for _ in 0..n {
                g = Game::repeat(g);
            }
            Formula::diamond(g, p_of(x()))
        }
    };
    (sigma, phi)
}

/// Run `f` on a thread with a 1 GiB stack, for deeply nested inputs.
pub fn with_big_stack<T: Send>(f: impl FnOnce() -> T + Send) -> T {
    std::thread::scope(|s| {
        std::thread::Builder::new()
            .stack_size(1 << 30)
            .spawn_scoped(s, f)
            .expect("spawn thread")
            .join()
            .unwrap_or_else(|e| std::panic::resume_unwind(e))
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct BenchRecord {
    pub family: Family,
    pub n: usize,
    pub nodes_in: usize,
    pub nodes_out: usize,
    pub engine: Engine,
    pub median_ns: u128,
    pub clash: bool,
}

pub const CSV_HEADER: &str = "family,n,nodes_in,nodes_out,engine,median_ns,clash";

impl BenchRecord {
    pub fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{}",
            self.family, self.n, self.nodes_in, self.nodes_out, self.engine, self.median_ns, self.clash
        )
    }
}

fn run(engine: Engine, sigma: &USubst, phi: &Formula) -> Option<Formula> {
    match engine {
        Engine::OnePass => OnePass::new(sigma).formula(&VarSet::empty(), phi).ok(),
        Engine::Church => Church::new(sigma).formula(phi).ok(),
    }
}

/// Median wall time of `reps` runs after one discarded warmup.
pub fn measure(family: Family, n: usize, engine: Engine, reps: usize) -> BenchRecord {
    with_big_stack(|| {
        let (sigma, phi) = gen_family(family, n);
        let warm = run(engine, &sigma, &phi);
        let nodes_out = warm.as_ref().map_or(0, |f| f.size());
        drop(warm);
        let mut times = Vec::with_capacity(reps);
        for _ in 0..reps.max(1) {
            let start = Instant::now();
            let out = run(engine, &sigma, &phi);
            times.push(start.elapsed().as_nanos());
            drop(out);
        }
        times.sort_unstable();
        BenchRecord {
            family,
            n,
            nodes_in: phi.size(),
            nodes_out,
            engine,
            median_ns: times[times.len() / 2],
            clash: nodes_out == 0,
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Fit {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
}

/// Least-squares fit of log t against log n.
pub fn fit_slope(points: &[(f64, f64)]) -> Result<Fit, BenchError> {
    if points.len() < 6 {
        return Err(BenchError::TooFewPoints(points.len()));
    }
    if points.iter().any(|&(n, t)| n <= 0.0 || t <= 0.0) {
        return Err(BenchError::Nonpositive);
    }
    let xs: Vec<f64> = points.iter().map(|p| p.0.log10()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.log10()).collect();
    let span = xs.iter().cloned().fold(f64::MIN, f64::max) - xs.iter().cloned().fold(f64::MAX, f64::min);
    if span < 2.0 {
        return Err(BenchError::NarrowRange(span));
    }
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let syy: f64 = ys.iter().map(|y| (y - my).powi(2)).sum();
    let slope = sxy / sxx;
    let r2 = if syy == 0.0 { 1.0 } else { sxy * sxy / (sxx * syy) };
    Ok(Fit { slope, intercept: my - slope * mx, r2 })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(f: impl Fn(f64) -> f64) -> Vec<(f64, f64)> {
        (8..=15).map(|k| 2f64.powi(k)).map(|n| (n, f(n))).collect()
    }

    #[test]
    fn slope_self_test() {
        let lin = fit_slope(&pts(|n| 3.0 * n)).unwrap();
        assert!((lin.slope - 1.0).abs() <= 0.01 && lin.r2 > 0.999);
        let quad = fit_slope(&pts(|n| 0.5 * n * n)).unwrap();
        assert!((quad.slope - 2.0).abs() <= 0.01);
    }

    #[test]
    fn fit_needs_range() {
        assert_eq!(fit_slope(&pts(|n| n)[..5]), Err(BenchError::TooFewPoints(5)));
        let narrow: Vec<_> = (1..=6).map(|i| (i as f64 * 10.0, i as f64)).collect();
        assert!(matches!(fit_slope(&narrow), Err(BenchError::NarrowRange(_))));
    }

    #[test]
    fn families() {
        let (s, f) = gen_family(Family::Seq, 3);
        assert_eq!(f.to_string(), "<x:=x+1; x:=x+1; x:=x+1>p(x)");
        assert_eq!(crate::onepass::us(&s, &f).unwrap().to_string(), "<x:=x+1; x:=x+1; x:=x+1>x>=0");
        let (_, f) = gen_family(Family::Binder, 2);
        assert_eq!(f.to_string(), "\\exists x1 \\exists x2 p(x1)");
        let (s, f) = gen_family(Family::Loop, 2);
        let mut e = OnePass::new(&s);
        e.formula(&VarSet::empty(), &f).unwrap();
        assert_eq!(e.stats().assign_visits, 4);
    }

    #[test]
    fn deep_inputs() {
        let r = measure(Family::Seq, 20000, Engine::OnePass, 1);
        assert!(!r.clash && r.nodes_out > r.nodes_in);
    }
}
