//! Coefficient rings used for exact and modular evaluation.
//!
//! Hot loops (level sweeps, child expansion) run in [`Modulus`], a word-sized
//! `Z/mZ` with `m < 2^63`. Valuations that need more digits than a word holds
//! fall back to [`BigModulus`]; exact Taylor data at integer points uses
//! [`Integers`].

use std::fmt::Debug;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub trait Ring {
    type Elem: Clone + PartialEq + Debug;

    fn zero(&self) -> Self::Elem;
    fn one(&self) -> Self::Elem;
    fn from_int(&self, v: &BigInt) -> Self::Elem;
    fn from_u64(&self, v: u64) -> Self::Elem;
    fn add(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn sub(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn mul(&self, a: &Self::Elem, b: &Self::Elem) -> Self::Elem;
    fn is_zero(&self, a: &Self::Elem) -> bool;
    /// Multiplicative inverse, if `a` is a unit.
    fn inv(&self, a: &Self::Elem) -> Option<Self::Elem>;
    /// Canonical integer representative.
    fn to_int(&self, a: &Self::Elem) -> BigInt;
}

/// `Z/mZ` for `1 <= m < 2^63`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Modulus {
    m: u64,
}

impl Modulus {
    pub fn new(m: u64) -> Self {
        assert!(m >= 1 && m < 1 << 63, "modulus {m} outside 1..2^63");
        Modulus { m }
    }

    #[inline]
    pub fn get(self) -> u64 {
        self.m
    }

    #[inline]
    pub fn reduce(self, v: u64) -> u64 {
        v % self.m
    }

    pub fn reduce_i128(self, v: i128) -> u64 {
        v.rem_euclid(self.m as i128) as u64
    }

    pub fn reduce_big(self, v: &BigInt) -> u64 {
        let m = BigInt::from(self.m);
        v.mod_floor(&m).to_u64().expect("reduced value fits")
    }

    #[inline]
    pub fn add(self, a: u64, b: u64) -> u64 {
        let s = a + b;
        if s >= self.m {
            s - self.m
        } else {
            s
        }
    }

    #[inline]
    pub fn sub(self, a: u64, b: u64) -> u64 {
        if a >= b {
            a - b
        } else {
            a + self.m - b
        }
    }

    #[inline]
    pub fn mul(self, a: u64, b: u64) -> u64 {
        if self.m <= 1 << 32 {
            a * b % self.m
        } else {
            ((a as u128 * b as u128) % self.m as u128) as u64
        }
    }

    pub fn pow(self, mut base: u64, mut exp: u64) -> u64 {
        let mut acc = 1 % self.m;
        base %= self.m;
        while exp > 0 {
            if exp & 1 == 1 {
                acc = self.mul(acc, base);
            }
            base = self.mul(base, base);
            exp >>= 1;
        }
        acc
    }

    /// Inverse by the extended Euclidean algorithm.
    pub fn inverse(self, a: u64) -> Option<u64> {
        let (mut r0, mut r1) = (self.m as i128, (a % self.m) as i128);
        let (mut s0, mut s1) = (0i128, 1i128);
        while r1 != 0 {
            let q = r0 / r1;
            (r0, r1) = (r1, r0 - q * r1);
            (s0, s1) = (s1, s0 - q * s1);
        }
        (r0 == 1).then(|| self.reduce_i128(s0))
    }
}

impl Ring for Modulus {
    type Elem = u64;

    fn zero(&self) -> u64 {
        0
    }
    fn one(&self) -> u64 {
        1 % self.m
    }
    fn from_int(&self, v: &BigInt) -> u64 {
        self.reduce_big(v)
    }
    fn from_u64(&self, v: u64) -> u64 {
        self.reduce(v)
    }
    fn add(&self, a: &u64, b: &u64) -> u64 {
        Modulus::add(*self, *a, *b)
    }
    fn sub(&self, a: &u64, b: &u64) -> u64 {
        Modulus::sub(*self, *a, *b)
    }
    fn mul(&self, a: &u64, b: &u64) -> u64 {
        Modulus::mul(*self, *a, *b)
    }
    fn is_zero(&self, a: &u64) -> bool {
        *a == 0
    }
    fn inv(&self, a: &u64) -> Option<u64> {
        self.inverse(*a)
    }
    fn to_int(&self, a: &u64) -> BigInt {
        BigInt::from(*a)
    }
}

/// `Z/mZ` for arbitrary `m >= 1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BigModulus {
    m: BigUint,
}

impl BigModulus {
    pub fn new(m: BigUint) -> Self {
        assert!(!m.is_zero());
        BigModulus { m }
    }

    pub fn get(&self) -> &BigUint {
        &self.m
    }
}

impl Ring for BigModulus {
    type Elem = BigUint;

    fn zero(&self) -> BigUint {
        BigUint::zero()
    }
    fn one(&self) -> BigUint {
        BigUint::one() % &self.m
    }
    fn from_int(&self, v: &BigInt) -> BigUint {
        let m = BigInt::from_biguint(Sign::Plus, self.m.clone());
        v.mod_floor(&m).to_biguint().expect("nonnegative")
    }
    fn from_u64(&self, v: u64) -> BigUint {
        BigUint::from(v) % &self.m
    }
    fn add(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a + b) % &self.m
    }
    fn sub(&self, a: &BigUint, b: &BigUint) -> BigUint {
        if a >= b {
            a - b
        } else {
            &self.m - (b - a) % &self.m
        }
        .mod_floor(&self.m)
    }
    fn mul(&self, a: &BigUint, b: &BigUint) -> BigUint {
        (a * b) % &self.m
    }
    fn is_zero(&self, a: &BigUint) -> bool {
        a.is_zero()
    }
    fn inv(&self, a: &BigUint) -> Option<BigUint> {
        let m = BigInt::from_biguint(Sign::Plus, self.m.clone());
        let a = BigInt::from_biguint(Sign::Plus, a.clone());
        let ext = a.extended_gcd(&m);
        ext.gcd
            .is_one()
            .then(|| ext.x.mod_floor(&m).to_biguint().expect("nonnegative"))
    }
    fn to_int(&self, a: &BigUint) -> BigInt {
        BigInt::from_biguint(Sign::Plus, a.clone())
    }
}

/// The integers, for exact arithmetic.
#[derive(Debug, Clone, Copy, Default)]
pub struct Integers;

impl Ring for Integers {
    type Elem = BigInt;

    fn zero(&self) -> BigInt {
        BigInt::zero()
    }
    fn one(&self) -> BigInt {
        BigInt::one()
    }
    fn from_int(&self, v: &BigInt) -> BigInt {
        v.clone()
    }
    fn from_u64(&self, v: u64) -> BigInt {
        BigInt::from(v)
    }
    fn add(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a + b
    }
    fn sub(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a - b
    }
    fn mul(&self, a: &BigInt, b: &BigInt) -> BigInt {
        a * b
    }
    fn is_zero(&self, a: &BigInt) -> bool {
        a.is_zero()
    }
    fn inv(&self, a: &BigInt) -> Option<BigInt> {
        (a.abs().is_one()).then(|| a.clone())
    }
    fn to_int(&self, a: &BigInt) -> BigInt {
        a.clone()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_modulus_arithmetic() {
        let m = Modulus::new(25);
        assert_eq!(m.mul(7, 8), 6);
        assert_eq!(m.sub(3, 7), 21);
        assert_eq!(m.inverse(2), Some(13));
        assert_eq!(m.inverse(5), None);
        assert_eq!(m.pow(2, 20), 1);
        assert_eq!(m.reduce_big(&BigInt::from(-1)), 24);
    }

    #[test]
    fn wide_modulus_uses_128_bit_products() {
        let m = Modulus::new((1 << 62) + 1);
        let a = (1 << 62) - 5;
        let expect = ((a as u128 * a as u128) % m.get() as u128) as u64;
        assert_eq!(m.mul(a, a), expect);
    }

    #[test]
    fn big_modulus_matches_word_modulus() {
        let w = Modulus::new(3u64.pow(20));
        let b = BigModulus::new(BigUint::from(3u64.pow(20)));
        for (x, y) in [(5u64, 7u64), (3_000_000_000, 1_234_567_890), (0, 17)] {
            let (xw, yw) = (w.reduce(x), w.reduce(y));
            let (xb, yb) = (b.from_u64(x), b.from_u64(y));
            assert_eq!(BigUint::from(Ring::mul(&w, &xw, &yw)), b.mul(&xb, &yb));
            assert_eq!(BigUint::from(Ring::sub(&w, &xw, &yw)), b.sub(&xb, &yb));
            assert_eq!(w.inv(&xw).map(BigUint::from), b.inv(&xb));
        }
    }
}
