//! Closed-form criteria for permutation and single-cycle polynomials, and
//! rational maps with unit denominators.

mod rational;

use crate::arith::{DynMap, IntPoly, Modulus, OddPrime};
use crate::error::{Error, Result};
use crate::graph::{enumerate_level, DEFAULT_BUDGET};

pub use rational::{analyze_rational, surrogate_eval, surrogate_poly, RationalAnalysis, RationalMap, RationalStep};

fn require_level(n: u32) -> Result<()> {
    if n == 0 {
        return Err(Error::Precondition("level must be at least 1".into()));
    }
    Ok(())
}

/// Whether `f mod p^n` is a bijection, by the mod-`p` criterion: `f mod p`
/// permutes `Z/pZ` and, for `n >= 2`, `f'` has no root mod `p`.
pub fn is_permutation(f: &IntPoly, p: OddPrime, n: u32) -> Result<bool> {
    require_level(n)?;
    let m = Modulus::new(p.get());
    let fp = f.reduced(m);
    let mut seen = vec![false; p.get() as usize];
    for x in 0..p.get() {
        let y = fp.eval(x) as usize;
        if std::mem::replace(&mut seen[y], true) {
            return Ok(false);
        }
    }
    if n == 1 {
        return Ok(true);
    }
    let df = f.derivative(1).reduced(m);
    Ok((0..p.get()).all(|x| df.eval(x) != 0))
}

/// The level that decides the single-cycle property at level `n`: `2` for
/// `p > 3`, `3` for `p = 3`, or `n` itself below that.
pub fn single_cycle_criterion_level(p: OddPrime, n: u32) -> u32 {
    let deciding = if p.get() == 3 { 3 } else { 2 };
    n.min(deciding)
}

/// Whether `f mod p^n` is one cycle through all `p^n` residues, decided at
/// [`single_cycle_criterion_level`].
pub fn is_single_cycle(f: &IntPoly, p: OddPrime, n: u32) -> Result<bool> {
    require_level(n)?;
    single_cycle_at(f, p, single_cycle_criterion_level(p, n), DEFAULT_BUDGET)
}

/// Exhaustive bijectivity of `map mod p^n`.
pub fn bijective_at<M: DynMap + ?Sized>(map: &M, p: OddPrime, n: u32, budget: u64) -> Result<bool> {
    let d = enumerate_level(map, p, n, budget)?;
    Ok(d.tail_point_count == 0 && d.undefined_point_count == 0)
}

/// Exhaustive check that `map mod p^n` is a single `p^n`-cycle.
pub fn single_cycle_at<M: DynMap + ?Sized>(map: &M, p: OddPrime, n: u32, budget: u64) -> Result<bool> {
    let d = enumerate_level(map, p, n, budget)?;
    Ok(d.cycles.len() == 1 && d.cycles[0].length() == p.pow_or_err(n)?)
}
