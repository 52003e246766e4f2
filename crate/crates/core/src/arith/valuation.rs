use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::Zero;

use super::prime::OddPrime;

/// A `p`-adic valuation capped at some level.
///
/// `saturated` means `p^value` divides the input and nothing more is claimed;
/// zero is always saturated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Valuation {
    pub value: u32,
    pub saturated: bool,
}

impl Valuation {
    pub fn exact(value: u32) -> Self {
        Valuation { value, saturated: false }
    }

    pub fn saturated(cap: u32) -> Self {
        Valuation { value: cap, saturated: true }
    }

    /// The valuation is known to be strictly below `bound`.
    pub fn is_below(self, bound: u32) -> bool {
        !self.saturated && self.value < bound
    }
}

impl fmt::Display for Valuation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.saturated {
            write!(f, ">={}", self.value)
        } else {
            write!(f, "{}", self.value)
        }
    }
}

/// Largest `e <= cap` with `p^e | v`.
pub fn ord_p(v: &BigInt, p: OddPrime, cap: u32) -> Valuation {
    ord_p_biguint(v.magnitude(), p, cap)
}

pub fn ord_p_biguint(v: &BigUint, p: OddPrime, cap: u32) -> Valuation {
    let pb = BigUint::from(p.get());
    let mut v = v.clone();
    for e in 0..cap {
        if v.is_zero() {
            return Valuation::saturated(cap);
        }
        let (q, r) = v.div_rem(&pb);
        if !r.is_zero() {
            return Valuation::exact(e);
        }
        v = q;
    }
    Valuation::saturated(cap)
}

pub fn ord_p_u64(mut v: u64, p: OddPrime, cap: u32) -> Valuation {
    let p = p.get();
    for e in 0..cap {
        if v == 0 {
            return Valuation::saturated(cap);
        }
        if v % p != 0 {
            return Valuation::exact(e);
        }
        v /= p;
    }
    Valuation::saturated(cap)
}
