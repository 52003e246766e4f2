use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_traits::{One, Signed, Zero};

use super::ring::{Modulus, Ring};
use crate::error::Error;

/// A polynomial with exact integer coefficients, constant term first.
///
/// Coefficients are never reduced in place; reduction happens where the
/// polynomial is evaluated.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct IntPoly {
    coeffs: Vec<BigInt>,
}

impl IntPoly {
    pub fn new(mut coeffs: Vec<BigInt>) -> Self {
        while coeffs.last().is_some_and(Zero::is_zero) {
            coeffs.pop();
        }
        IntPoly { coeffs }
    }

    pub fn from_i64s(coeffs: &[i64]) -> Self {
        Self::new(coeffs.iter().map(|&c| BigInt::from(c)).collect())
    }

    pub fn zero() -> Self {
        IntPoly { coeffs: Vec::new() }
    }

    /// The monomial `x`.
    pub fn identity() -> Self {
        Self::from_i64s(&[0, 1])
    }

    pub fn coeffs(&self) -> &[BigInt] {
        &self.coeffs
    }

    /// Coefficient of `x^i` (zero beyond the degree).
    pub fn coeff(&self, i: usize) -> BigInt {
        self.coeffs.get(i).cloned().unwrap_or_default()
    }

    /// `None` for the zero polynomial.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn eval(&self, x: &BigInt) -> BigInt {
        let mut acc = BigInt::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn eval_in<R: Ring>(&self, ring: &R, x: &R::Elem) -> R::Elem {
        let mut acc = ring.zero();
        for c in self.coeffs.iter().rev() {
            acc = ring.add(&ring.mul(&acc, x), &ring.from_int(c));
        }
        acc
    }

    /// Formal derivative of the given order.
    pub fn derivative(&self, order: usize) -> IntPoly {
        let mut out = self.clone();
        for _ in 0..order {
            out = IntPoly::new(
                out.coeffs
                    .iter()
                    .enumerate()
                    .skip(1)
                    .map(|(i, c)| c * BigInt::from(i))
                    .collect(),
            );
        }
        out
    }

    /// The `i`-th Hasse derivative, `f^(i) / i!`, with coefficients
    /// `C(j, i) * a_j` on `x^(j-i)`.
    pub fn hasse(&self, i: usize) -> IntPoly {
        if i == 0 {
            return self.clone();
        }
        IntPoly::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(i)
                .map(|(j, c)| c * binomial(j, i))
                .collect(),
        )
    }

    /// Coefficients `c_0..=c_order` of `f(x + y)` as a polynomial in `y`.
    ///
    /// Computed by repeated synthetic division, so only ring operations are
    /// needed.
    pub fn taylor_at<R: Ring>(&self, ring: &R, x: &R::Elem, order: usize) -> Vec<R::Elem> {
        let mut work: Vec<R::Elem> = self.coeffs.iter().map(|c| ring.from_int(c)).collect();
        let mut out = Vec::with_capacity(order + 1);
        for _ in 0..=order {
            if work.is_empty() {
                out.push(ring.zero());
                continue;
            }
            // Divide by (X - x): quotient stays in `work`, remainder is the
            // next Taylor coefficient.
            let mut carry = ring.zero();
            for c in work.iter_mut().rev() {
                let v = ring.add(c, &ring.mul(&carry, x));
                *c = carry;
                carry = v;
            }
            work.pop();
            out.push(carry);
        }
        out
    }

    pub fn mul(&self, other: &IntPoly) -> IntPoly {
        if self.is_zero() || other.is_zero() {
            return IntPoly::zero();
        }
        let mut out = vec![BigInt::zero(); self.coeffs.len() + other.coeffs.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] += a * b;
            }
        }
        IntPoly::new(out)
    }

    pub fn pow(&self, mut exp: u64) -> IntPoly {
        let mut acc = IntPoly::from_i64s(&[1]);
        let mut base = self.clone();
        while exp > 0 {
            if exp & 1 == 1 {
                acc = acc.mul(&base);
            }
            exp >>= 1;
            if exp > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Composition `self(other(x))`.
    pub fn compose(&self, other: &IntPoly) -> IntPoly {
        let mut acc = IntPoly::zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(other).add(&IntPoly::new(vec![c.clone()]));
        }
        acc
    }

    pub fn add(&self, other: &IntPoly) -> IntPoly {
        let n = self.coeffs.len().max(other.coeffs.len());
        IntPoly::new((0..n).map(|i| self.coeff(i) + other.coeff(i)).collect())
    }

    /// Coefficients reduced into `[0, m)` for fast word-sized evaluation.
    pub fn reduced(&self, m: Modulus) -> ModPoly {
        ModPoly {
            coeffs: self.coeffs.iter().map(|c| m.reduce_big(c)).collect(),
            m,
        }
    }

    /// Comma-separated coefficients, constant term first.
    pub fn to_csv(&self) -> String {
        if self.coeffs.is_empty() {
            return "0".into();
        }
        self.coeffs.iter().map(ToString::to_string).collect::<Vec<_>>().join(",")
    }
}

impl FromStr for IntPoly {
    type Err = Error;

    /// Parses `2,1,3` as `2 + x + 3x^2`.
    fn from_str(s: &str) -> Result<Self, Error> {
        let coeffs = s
            .split(',')
            .map(|t| {
                let t = t.trim();
                let digits = t.strip_prefix(['+', '-']).unwrap_or(t);
                if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
                    return Err(Error::Precondition(format!("bad coefficient {t:?}")));
                }
                t.parse::<BigInt>()
                    .map_err(|e| Error::Precondition(format!("bad coefficient {t:?}: {e}")))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Ok(IntPoly::new(coeffs))
    }
}

impl fmt::Display for IntPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "0");
        }
        let mut first = true;
        for (i, c) in self.coeffs.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let neg = c.is_negative();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { '-' } else { '+' })?;
            }
            first = false;
            let a = c.abs();
            match (i, a.is_one()) {
                (0, _) => write!(f, "{a}")?,
                (1, true) => write!(f, "x")?,
                (1, false) => write!(f, "{a}x")?,
                (_, true) => write!(f, "x^{i}")?,
                (_, false) => write!(f, "{a}x^{i}")?,
            }
        }
        Ok(())
    }
}

pub(crate) fn binomial(n: usize, k: usize) -> BigInt {
    let mut acc = BigInt::one();
    for i in 0..k {
        acc = acc * BigInt::from(n - i) / BigInt::from(i + 1);
    }
    acc
}

/// A polynomial with coefficients reduced modulo a word-sized modulus.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModPoly {
    coeffs: Vec<u64>,
    m: Modulus,
}

impl ModPoly {
    #[inline]
    pub fn eval(&self, x: u64) -> u64 {
        let m = self.m;
        let mut acc = 0u64;
        for &c in self.coeffs.iter().rev() {
            acc = m.add(m.mul(acc, x), c);
        }
        acc
    }

    pub fn modulus(&self) -> Modulus {
        self.m
    }

    /// True when every coefficient reduced to zero.
    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ring::Integers;
    use proptest::prelude::*;

    fn p(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    #[test]
    fn derivatives() {
        assert_eq!(p(&[0, 0, 0, 1]).derivative(1), p(&[0, 0, 3]));
        assert_eq!(p(&[0, 0, 0, 1]).derivative(3), p(&[6]));
        assert_eq!(p(&[7]).derivative(1), IntPoly::zero());
    }

    #[test]
    fn hasse_derivatives() {
        assert_eq!(p(&[0, 0, 0, 0, 0, 1]).hasse(2), p(&[0, 0, 0, 10]));
        assert_eq!(p(&[0, 0, 1]).hasse(2), p(&[1]));
        let f = p(&[2, 1, 3, 1, 3, 2]);
        assert_eq!(f.hasse(0), f);
        assert_eq!(f.hasse(1), f.derivative(1));
    }

    #[test]
    fn trims_and_parses() {
        assert_eq!(p(&[1, 2, 0, 0]).degree(), Some(1));
        assert_eq!(IntPoly::zero().degree(), None);
        assert_eq!("2,1,3,1,3,2".parse::<IntPoly>().unwrap(), p(&[2, 1, 3, 1, 3, 2]));
        assert_eq!(" -4, +1 ".parse::<IntPoly>().unwrap(), p(&[-4, 1]));
        assert!("1,,2".parse::<IntPoly>().is_err());
        assert!("1,x".parse::<IntPoly>().is_err());
        assert_eq!(p(&[2, 1, 3, 1, 3, 2]).to_string(), "2 + x + 3x^2 + x^3 + 3x^4 + 2x^5");
        assert_eq!(p(&[0, -1, 0, 1]).to_string(), "-x + x^3");
    }

    #[test]
    fn compose_and_pow() {
        let f = p(&[1, 1]);
        assert_eq!(f.pow(2), p(&[1, 2, 1]));
        assert_eq!(p(&[0, 0, 1]).compose(&f), p(&[1, 2, 1]));
    }

    fn small_poly() -> impl Strategy<Value = IntPoly> {
        prop::collection::vec(-9i64..=9, 0..=9).prop_map(|c| IntPoly::from_i64s(&c))
    }

    proptest! {
        // f(x + y) == sum_i hasse(f, i)(x) * y^i, both sides exact.
        #[test]
        fn taylor_identity(f in small_poly(), x in -9i64..=9, y in -9i64..=9) {
            let (xb, yb) = (BigInt::from(x), BigInt::from(y));
            let lhs = f.eval(&(&xb + &yb));
            let mut rhs = BigInt::zero();
            let mut ypow = BigInt::one();
            for i in 0..=f.degree().unwrap_or(0) {
                rhs += f.hasse(i).eval(&xb) * &ypow;
                ypow *= &yb;
            }
            prop_assert_eq!(lhs, rhs);
        }

        #[test]
        fn synthetic_taylor_matches_hasse(f in small_poly(), x in -9i64..=9) {
            let xb = BigInt::from(x);
            let order = f.degree().unwrap_or(0) + 1;
            let jet = f.taylor_at(&Integers, &xb, order);
            for (i, c) in jet.iter().enumerate() {
                prop_assert_eq!(c, &f.hasse(i).eval(&xb));
            }
        }

        #[test]
        fn reduced_eval_matches_exact(f in small_poly(), x in 0u64..1000, m in 1u64..5000) {
            let m = Modulus::new(m);
            let exact = f.eval(&BigInt::from(x));
            prop_assert_eq!(f.reduced(m).eval(m.reduce(x)), m.reduce_big(&exact));
        }
    }
}
