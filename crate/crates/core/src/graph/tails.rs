use std::collections::BTreeMap;

use super::enumerate_level;
use crate::arith::{DynMap, IntPoly, Modulus, OddPrime, StepMap};
use crate::error::{Error, Result};

/// Fiber and tail data for the level-`n` cycle over one critical mod-`p`
/// cycle.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TailStats {
    pub level: u32,
    /// Representative of the level-`n` cycle lying over the class.
    pub cycle_rep: u64,
    /// Length of the mod-`p` cycle through the class.
    pub base_length: u64,
    pub max_tail_length: u64,
    /// Fiber size -> number of fibers, over points of the requested class.
    pub preimage_histogram: BTreeMap<u64, u64>,
    /// `Some(matches)` when the second derivative is a unit at the class,
    /// `None` when the expected shape does not apply.
    pub shape_matches: Option<bool>,
}

impl TailStats {
    pub fn within_tail_bound(&self, p: OddPrime) -> bool {
        (self.max_tail_length as i128) <= tail_bound(p, self.level, self.base_length)
    }
}

/// `p + (n - 2) k`, the longest tail over a critical `k`-cycle at level `n`.
pub fn tail_bound(p: OddPrime, n: u32, k: u64) -> i128 {
    p.get() as i128 + (n as i128 - 2) * k as i128
}

/// Expected fiber histogram on one class when `f' = 0` and `f''` is a unit:
/// `p^(n-2j-1)(p-1)/2` fibers of size `2p^j` for `1 <= j < n/2`, plus one
/// fiber of size `p^floor(n/2)`.
pub fn expected_fiber_histogram(p: OddPrime, n: u32) -> BTreeMap<u64, u64> {
    let q = p.get();
    let mut out = BTreeMap::new();
    let mut j = 1;
    while 2 * j < n {
        *out.entry(2 * q.pow(j)).or_insert(0) += q.pow(n - 2 * j - 1) * (q - 1) / 2;
        j += 1;
    }
    *out.entry(q.pow(n / 2)).or_insert(0) += 1;
    out
}

/// Fiber sizes of `f mod p^n` on the residues `= class (mod p)`, and the
/// longest tail feeding the cycle above the class.
pub fn tail_analysis(f: &IntPoly, p: OddPrime, n: u32, class: u64, budget: u64) -> Result<TailStats> {
    if n == 0 || class >= p.get() {
        return Err(Error::Precondition(format!(
            "need level >= 1 and a class below p, got level {n} and class {class}"
        )));
    }
    let step1 = f.at(Modulus::new(p.get()));
    let mut k = 0;
    let mut x = class;
    loop {
        x = step1.apply(x).expect("polynomial");
        k += 1;
        if x == class {
            break;
        }
        if k > p.get() {
            return Err(Error::Precondition(format!("class {class} is not periodic mod {p}")));
        }
    }
    if step1.derivative(class) != Some(0) {
        return Err(Error::Precondition(format!("f' is a unit at class {class}")));
    }

    let decomp = enumerate_level(f, p, n, budget)?;
    let pm = p.get();
    let (idx, cycle) = decomp
        .cycles
        .iter()
        .enumerate()
        .find(|(_, c)| {
            let mut y = c.representative() % pm;
            (0..k).any(|_| {
                let hit = y == class;
                y = step1.apply(y).expect("polynomial");
                hit
            })
        })
        .ok_or_else(|| Error::Internal("no cycle above a periodic class".into()))?;

    let modn = p.pow_or_err(n)?;
    let stepn = f.at(Modulus::new(modn));
    let mut fibers: BTreeMap<u64, u64> = BTreeMap::new();
    let mut x = class;
    while x < modn {
        *fibers.entry(stepn.apply(x).expect("polynomial")).or_insert(0) += 1;
        x += pm;
    }
    let mut preimage_histogram = BTreeMap::new();
    for size in fibers.into_values() {
        *preimage_histogram.entry(size).or_insert(0) += 1;
    }

    let second = Modulus::new(pm).reduce_big(&f.hasse(2).eval(&class.into()));
    let shape_matches = (second != 0).then(|| preimage_histogram == expected_fiber_histogram(p, n));

    Ok(TailStats {
        level: n,
        cycle_rep: cycle.representative(),
        base_length: k,
        max_tail_length: decomp.max_tail_lengths[idx],
        preimage_histogram,
        shape_matches,
    })
}
