//! Linearization data of a cycle and the four lift behaviors.

mod engine;

use std::fmt;

use crate::arith::{mult_order, OddPrime, Valuation};
use crate::graph::Cycle;

pub use engine::{Engine, Lift};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Classification {
    /// One lift of length `pk`.
    Grows,
    /// `p` lifts of length `k`.
    Splits,
    /// One lift of length `k` and `(p-1)/d` of length `kd`.
    PartiallySplits(u64),
    /// One lift of length `k`; everything else over the cycle is a tail.
    GrowsTails,
}

impl Classification {
    pub fn name(self) -> &'static str {
        match self {
            Classification::Grows => "Grows",
            Classification::Splits => "Splits",
            Classification::PartiallySplits(_) => "PartiallySplits",
            Classification::GrowsTails => "GrowsTails",
        }
    }

    pub fn order(self) -> Option<u64> {
        match self {
            Classification::PartiallySplits(d) => Some(d),
            _ => None,
        }
    }

    /// Child lengths this behavior produces from a `k`-cycle, ascending.
    pub fn child_lengths(self, p: OddPrime, k: u64) -> Vec<u64> {
        let p = p.get();
        match self {
            Classification::Grows => vec![p * k],
            Classification::Splits => vec![k; p as usize],
            Classification::GrowsTails => vec![k],
            Classification::PartiallySplits(d) => {
                let mut v = vec![k];
                v.extend(std::iter::repeat(k * d).take(((p - 1) / d) as usize));
                v
            }
        }
    }
}

impl fmt::Display for Classification {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Classification::PartiallySplits(d) => write!(f, "PartiallySplits(d={d})"),
            c => f.write_str(c.name()),
        }
    }
}

/// `(a_n, b_n)` of a `k`-cycle at level `n`, reduced to the parts that do
/// not depend on the chosen starting point.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LinearData {
    pub level: u32,
    pub length: u64,
    /// `(f^k)'(x_1) mod p^n`.
    pub a: u64,
    pub a_mod_p: u64,
    /// `b_n mod p^min(A, n)`.
    pub b_val: u64,
    /// `min(ord_p(a_n - 1), n)`.
    pub big_a: Valuation,
    /// `min(ord_p(b_n), n)`.
    pub big_b: Valuation,
    /// `b_n mod p^n` at the point the data was computed from. Depends on
    /// that point beyond `p^A`.
    pub(crate) b_full: u64,
    pub(crate) point: u64,
}

impl LinearData {
    /// `b_n mod p`. Only meaningful as an invariant when `a = 1 (mod p)`.
    pub fn b_mod_p(&self, p: OddPrime) -> u64 {
        self.b_full % p.get()
    }

    /// `b_n mod p^n` from the point the data was computed at.
    pub fn b_at_point(&self) -> u64 {
        self.b_full
    }

    /// The residue the data was computed from.
    pub fn point(&self) -> u64 {
        self.point
    }
}

/// Lift behavior from `(a mod p, b mod p)`.
pub fn classify(lin: &LinearData, p: OddPrime) -> Classification {
    match lin.a_mod_p {
        0 => Classification::GrowsTails,
        1 if lin.b_mod_p(p) == 0 => Classification::Splits,
        1 => Classification::Grows,
        a => Classification::PartiallySplits(mult_order(a, p).expect("a is a unit")),
    }
}

/// The behavior whose lift pattern is exactly `child_lengths`, if any.
pub fn lift_pattern(p: OddPrime, k: u64, child_lengths: &[u64]) -> Option<Classification> {
    let mut got = child_lengths.to_vec();
    got.sort_unstable();
    let candidates = [Classification::Grows, Classification::Splits, Classification::GrowsTails]
        .into_iter()
        .chain(
            (2..p.get())
                .filter(|d| (p.get() - 1) % d == 0)
                .map(Classification::PartiallySplits),
        );
    candidates.into_iter().find(|c| c.child_lengths(p, k) == got)
}

/// A cycle with its linearization and behavior.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CycleNode {
    pub cycle: Cycle,
    pub lin: LinearData,
    pub classification: Classification,
}
