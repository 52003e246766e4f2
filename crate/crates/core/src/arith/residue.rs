use std::fmt;

use super::poly::IntPoly;
use super::prime::OddPrime;
use super::ring::Modulus;
use crate::error::{Error, Result};

/// An element of `Z/p^nZ`, stored as its least nonnegative representative.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Residue {
    value: u64,
    p: OddPrime,
    level: u32,
}

impl Residue {
    pub fn new(value: u64, p: OddPrime, level: u32) -> Result<Self> {
        let modulus = p.pow_or_err(level)?;
        if value >= modulus {
            return Err(Error::ResidueOutOfRange { value, modulus });
        }
        Ok(Residue { value, p, level })
    }

    /// Reduces an arbitrary integer into `Z/p^nZ`.
    pub fn reduce(value: u64, p: OddPrime, level: u32) -> Result<Self> {
        let modulus = p.pow_or_err(level)?;
        Ok(Residue { value: value % modulus, p, level })
    }

    pub fn value(self) -> u64 {
        self.value
    }

    pub fn prime(self) -> OddPrime {
        self.p
    }

    pub fn level(self) -> u32 {
        self.level
    }

    pub fn modulus(self) -> Modulus {
        Modulus::new(self.p.pow(self.level).expect("checked at construction"))
    }

    /// Projection to a lower level.
    pub fn project(self, level: u32) -> Residue {
        assert!(level <= self.level);
        let m = self.p.pow(level).expect("below current level");
        Residue { value: self.value % m, p: self.p, level }
    }
}

impl fmt::Display for Residue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} (mod {}^{})", self.value, self.p, self.level)
    }
}

/// `f(x)` in `Z/p^nZ`.
pub fn eval_mod(f: &IntPoly, x: Residue) -> Residue {
    let m = x.modulus();
    Residue { value: f.reduced(m).eval(x.value), ..x }
}

/// `f^k(x)` in `Z/p^nZ`, one evaluation per step.
pub fn iterate_eval(f: &IntPoly, x: Residue, k: u64) -> Residue {
    assert!(k >= 1, "iterate count must be positive");
    let fm = f.reduced(x.modulus());
    let mut v = x.value;
    for _ in 0..k {
        v = fm.eval(v);
    }
    Residue { value: v, ..x }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(v: u64, p: u64, n: u32) -> Residue {
        Residue::new(v, OddPrime::new(p).unwrap(), n).unwrap()
    }

    #[test]
    fn eval_examples() {
        assert_eq!(eval_mod(&IntPoly::from_i64s(&[1, 0, 1]), r(2, 3, 2)).value(), 5);
        assert_eq!(eval_mod(&IntPoly::zero(), r(7, 3, 2)).value(), 0);
        let quintic = IntPoly::from_i64s(&[2, 1, 3, 1, 3, 2]);
        assert_eq!(eval_mod(&quintic, r(0, 3, 4)).value(), 2);
        assert_eq!(eval_mod(&IntPoly::from_i64s(&[-1]), r(0, 5, 1)).value(), 4);
    }

    #[test]
    fn iterate_examples() {
        assert_eq!(iterate_eval(&IntPoly::from_i64s(&[1, 1]), r(0, 5, 1), 5).value(), 0);
        assert_eq!(iterate_eval(&IntPoly::from_i64s(&[0, 0, 1]), r(2, 5, 1), 2).value(), 1);
        for k in 1..6 {
            assert_eq!(iterate_eval(&IntPoly::identity(), r(17, 7, 2), k).value(), 17);
        }
    }

    #[test]
    fn level_zero_is_trivial() {
        let z = r(0, 3, 0);
        assert_eq!(eval_mod(&IntPoly::from_i64s(&[5, 1]), z).value(), 0);
        assert!(Residue::new(1, OddPrime::new(3).unwrap(), 0).is_err());
    }
}
