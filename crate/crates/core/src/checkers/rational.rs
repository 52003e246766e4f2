use std::fmt;

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_traits::{One, Zero};

use crate::arith::{DynMap, IntPoly, ModPoly, Modulus, OddPrime, Ring, StepMap};
use crate::error::{Error, Result};
use crate::predictor::{analyze, AnalyzeOptions, AnalyzedTree};

/// `num / den` with integer coefficients, defined where `den` is a unit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalMap {
    pub num: IntPoly,
    pub den: IntPoly,
}

impl RationalMap {
    pub fn new(num: IntPoly, den: IntPoly) -> Result<Self> {
        if den.is_zero() {
            return Err(Error::Precondition("denominator is the zero polynomial".into()));
        }
        Ok(RationalMap { num, den })
    }

    /// Residues mod `p` where the denominator vanishes.
    pub fn poles_mod_p(&self, p: OddPrime) -> Vec<u64> {
        let g = self.den.reduced(Modulus::new(p.get()));
        (0..p.get()).filter(|&x| g.eval(x) == 0).collect()
    }
}

impl fmt::Display for RationalMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}) / ({})", self.num, self.den)
    }
}

/// `(p, e)` with `p^e = m` and `e` maximal.
fn prime_power_base(m: u64) -> Option<(u64, u32)> {
    (1..=63u32).rev().find_map(|e| {
        let r = (m as f64).powf(1.0 / e as f64).round() as u64;
        (r.saturating_sub(1)..=r + 1).find(|&c| c >= 2 && c.checked_pow(e) == Some(m)).map(|c| (c, e))
    })
}

/// Evaluation of a rational map mod `p^e` through the surrogate
/// `num * den^(phi(p^e) - 1)`.
pub struct RationalStep {
    m: Modulus,
    p: u64,
    exp: u64,
    num: ModPoly,
    den: ModPoly,
    dnum: ModPoly,
    dden: ModPoly,
}

impl RationalStep {
    fn inverse(&self, g: u64) -> Option<u64> {
        (g % self.p != 0).then(|| self.m.pow(g, self.exp))
    }
}

impl StepMap for RationalStep {
    fn modulus(&self) -> Modulus {
        self.m
    }

    fn apply(&self, x: u64) -> Option<u64> {
        if self.m.get() == 1 {
            return Some(0);
        }
        let inv = self.inverse(self.den.eval(x))?;
        Some(self.m.mul(self.num.eval(x), inv))
    }

    fn derivative(&self, x: u64) -> Option<u64> {
        if self.m.get() == 1 {
            return Some(0);
        }
        let m = self.m;
        let g = self.den.eval(x);
        let inv = self.inverse(g)?;
        let top = m.sub(m.mul(g, self.dnum.eval(x)), m.mul(self.num.eval(x), self.dden.eval(x)));
        Some(m.mul(top, m.mul(inv, inv)))
    }
}

impl DynMap for RationalMap {
    type Step = RationalStep;

    fn at(&self, m: Modulus) -> RationalStep {
        let (p, exp) = match prime_power_base(m.get()) {
            Some((p, _)) => (p, m.get() / p * (p - 1) - 1),
            None => (1, 0),
        };
        RationalStep {
            m,
            p,
            exp,
            num: self.num.reduced(m),
            den: self.den.reduced(m),
            dnum: self.num.derivative(1).reduced(m),
            dden: self.den.derivative(1).reduced(m),
        }
    }

    fn jet<R: Ring>(&self, ring: &R, x: &R::Elem, order: usize) -> Option<Vec<R::Elem>> {
        let a = self.num.taylor_at(ring, x, order);
        let b = self.den.taylor_at(ring, x, order);
        let inv = ring.inv(&b[0])?;
        let mut q: Vec<R::Elem> = Vec::with_capacity(order + 1);
        for i in 0..=order {
            let mut acc = a[i].clone();
            for j in 1..=i {
                acc = ring.sub(&acc, &ring.mul(&b[j], &q[i - j]));
            }
            q.push(ring.mul(&acc, &inv));
        }
        Some(q)
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

fn totient_of_square_level(p: OddPrime, n: u32) -> Option<u128> {
    let pe = (p.get() as u128).checked_pow(2 * n)?;
    Some(pe - pe / p.get() as u128)
}

/// `num * den^(phi(p^(2n)) - 1)` as an explicit integer polynomial. Its
/// degree grows like `p^(2n)`, so it is refused above `degree_budget`.
pub fn surrogate_poly(h: &RationalMap, p: OddPrime, n: u32, degree_budget: u128) -> Result<IntPoly> {
    let exp = totient_of_square_level(p, n).map(|t| t - 1);
    let dg = h.den.degree().unwrap_or(0) as u128;
    let df = h.num.degree().unwrap_or(0) as u128;
    let degree = exp.and_then(|e| e.checked_mul(dg)).and_then(|v| v.checked_add(df)).unwrap_or(u128::MAX);
    let exp = match exp {
        Some(e) if degree <= degree_budget => e,
        _ => return Err(Error::DegreeTooLarge { degree, budget: degree_budget }),
    };
    let exp = u64::try_from(exp).map_err(|_| Error::DegreeTooLarge { degree, budget: degree_budget })?;
    Ok(h.num.mul(&h.den.pow(exp)))
}

/// The surrogate evaluated at `x` mod `p^(2n)` without expanding it.
pub fn surrogate_eval(h: &RationalMap, p: OddPrime, n: u32, x: &BigInt) -> BigUint {
    let m = p.pow_big(2 * n);
    let mi = BigInt::from(m.clone());
    let red = |v: BigInt| v.mod_floor(&mi).to_biguint().expect("nonnegative");
    let phi = &m - &m / p.get();
    let exp = if phi.is_zero() { BigUint::zero() } else { phi - BigUint::one() };
    let g = red(h.den.eval(x));
    (red(h.num.eval(x)) * g.modpow(&exp, &m)) % &m
}

#[derive(Debug, Clone)]
pub struct RationalAnalysis {
    pub tree: AnalyzedTree,
    /// Residues mod `p` where the denominator vanishes; nothing over them is
    /// explored.
    pub bad_reduction: Vec<u64>,
}

/// [`analyze`] for a rational map, flagging the residue classes the map is
/// undefined on.
pub fn analyze_rational(h: &RationalMap, p: OddPrime, opts: AnalyzeOptions) -> Result<RationalAnalysis> {
    let tree = analyze(h, p, opts)?;
    Ok(RationalAnalysis { tree, bad_reduction: h.poles_mod_p(p) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::BigModulus;
    use crate::graph::{enumerate_level, DEFAULT_BUDGET};

    fn pr(p: u64) -> OddPrime {
        OddPrime::new(p).unwrap()
    }

    fn poly(c: &[i64]) -> IntPoly {
        IntPoly::from_i64s(c)
    }

    #[test]
    fn prime_powers() {
        assert_eq!(prime_power_base(3u64.pow(20)), Some((3, 20)));
        assert_eq!(prime_power_base(7), Some((7, 1)));
        assert_eq!(prime_power_base(1_000_000_007), Some((1_000_000_007, 1)));
    }

    #[test]
    fn reciprocal_surrogate() {
        let h = RationalMap::new(poly(&[1]), poly(&[0, 1])).unwrap();
        let s = surrogate_poly(&h, pr(3), 1, 100).unwrap();
        assert_eq!(s, poly(&[0, 0, 0, 0, 0, 1]));
        assert!(matches!(surrogate_poly(&h, pr(3), 4, 100), Err(Error::DegreeTooLarge { .. })));
        let id = RationalMap::new(poly(&[0, 1]), poly(&[1])).unwrap();
        assert_eq!(surrogate_poly(&id, pr(5), 2, 10).unwrap(), poly(&[0, 1]));
    }

    #[test]
    fn surrogate_value_example() {
        let h = RationalMap::new(poly(&[1, 0, 1]), poly(&[0, 1])).unwrap();
        let v = surrogate_eval(&h, pr(5), 1, &BigInt::from(2));
        assert_eq!(v, BigUint::from(15u32));
    }

    #[test]
    fn reciprocal_mod_3_has_two_fixed_points() {
        let h = RationalMap::new(poly(&[1]), poly(&[0, 1])).unwrap();
        let d = enumerate_level(&h, pr(3), 1, DEFAULT_BUDGET).unwrap();
        let reps: Vec<u64> = d.cycles.iter().map(|c| c.representative()).collect();
        assert_eq!(reps, vec![1, 2]);
        assert_eq!(d.undefined_point_count, 1);
        assert_eq!(h.poles_mod_p(pr(3)), vec![0]);
    }

    #[test]
    fn quotient_rule_matches_jet() {
        let h = RationalMap::new(poly(&[1, 2, 0, 3]), poly(&[2, 1, 1])).unwrap();
        let p = pr(5);
        let step = h.at(Modulus::new(5u64.pow(6)));
        let ring = BigModulus::new(p.pow_big(6));
        for x in [1u64, 3, 7, 101, 4000] {
            let Some(d) = step.derivative(x) else { continue };
            let jet = h.jet(&ring, &BigUint::from(x), 1).unwrap();
            assert_eq!(BigUint::from(d), jet[1]);
            assert_eq!(BigUint::from(step.apply(x).unwrap()), jet[0]);
        }
    }
}
