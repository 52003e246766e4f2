//! Self-maps of `Z_p` that the engine can iterate: integer polynomials, and
//! (in `checkers`) rational maps with unit denominators.

use super::poly::{IntPoly, ModPoly};
use super::ring::{Modulus, Ring};

/// A map that can be reduced modulo `p^n` and expanded in Taylor series.
pub trait DynMap: Sync {
    type Step: StepMap;

    /// The map and its derivative, ready for word-sized evaluation mod `m`.
    fn at(&self, m: Modulus) -> Self::Step;

    /// Taylor coefficients `c_0..=c_order` of `map(x + y)`; `None` where the
    /// map is undefined.
    fn jet<R: Ring>(&self, ring: &R, x: &R::Elem, order: usize) -> Option<Vec<R::Elem>>;

    fn label(&self) -> String;
}

pub trait StepMap: Sync {
    fn modulus(&self) -> Modulus;
    fn apply(&self, x: u64) -> Option<u64>;
    fn derivative(&self, x: u64) -> Option<u64>;
}

pub struct PolyStep {
    f: ModPoly,
    df: ModPoly,
}

impl StepMap for PolyStep {
    fn modulus(&self) -> Modulus {
        self.f.modulus()
    }

    #[inline]
    fn apply(&self, x: u64) -> Option<u64> {
        Some(self.f.eval(x))
    }

    #[inline]
    fn derivative(&self, x: u64) -> Option<u64> {
        Some(self.df.eval(x))
    }
}

impl DynMap for IntPoly {
    type Step = PolyStep;

    fn at(&self, m: Modulus) -> PolyStep {
        PolyStep { f: self.reduced(m), df: self.derivative(1).reduced(m) }
    }

    fn jet<R: Ring>(&self, ring: &R, x: &R::Elem, order: usize) -> Option<Vec<R::Elem>> {
        Some(self.taylor_at(ring, x, order))
    }

    fn label(&self) -> String {
        self.to_string()
    }
}

/// Truncated product of two series (index = power of `y`).
pub(crate) fn series_mul<R: Ring>(ring: &R, a: &[R::Elem], b: &[R::Elem], order: usize) -> Vec<R::Elem> {
    let mut out = vec![ring.zero(); order + 1];
    for (i, x) in a.iter().enumerate().take(order + 1) {
        if ring.is_zero(x) {
            continue;
        }
        for (j, y) in b.iter().enumerate().take(order + 1 - i) {
            out[i + j] = ring.add(&out[i + j], &ring.mul(x, y));
        }
    }
    out
}

/// Taylor expansion of the `k`-th iterate at `x`.
///
/// Returns `(f^k(x), s)` with `s[0] = 0` and
/// `f^k(x + y) = f^k(x) + s[1] y + ... + s[order] y^order` up to `y^(order+1)`. Each step composes the truncated series
/// of `f` at the current orbit point, so no iterate is ever expanded
/// symbolically.
pub fn iterate_jet<M: DynMap + ?Sized, R: Ring>(
    map: &M,
    ring: &R,
    x: &R::Elem,
    k: u64,
    order: usize,
) -> Option<(R::Elem, Vec<R::Elem>)> {
    let mut value = x.clone();
    let mut series = vec![ring.zero(); order + 1];
    if order >= 1 {
        series[1] = ring.one();
    }
    for _ in 0..k {
        let jet = map.jet(ring, &value, order)?;
        let mut next = vec![ring.zero(); order + 1];
        let mut power = series.clone();
        for c in jet.iter().skip(1) {
            for (n, t) in next.iter_mut().zip(&power) {
                *n = ring.add(n, &ring.mul(c, t));
            }
            power = series_mul(ring, &power, &series, order);
        }
        value = jet[0].clone();
        series = next;
    }
    Some((value, series))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::ring::Integers;
    use num_bigint::BigInt;

    #[test]
    fn iterate_jet_matches_symbolic_composition() {
        let f = IntPoly::from_i64s(&[1, -2, 0, 1]);
        let f3 = f.compose(&f).compose(&f);
        for x in -3i64..=3 {
            let xb = BigInt::from(x);
            let (v, s) = iterate_jet(&f, &Integers, &xb, 3, 4).unwrap();
            assert_eq!(v, f3.eval(&xb));
            for (i, c) in s.iter().enumerate().skip(1) {
                assert_eq!(c, &f3.hasse(i).eval(&xb), "x={x} i={i}");
            }
        }
    }

    #[test]
    fn modular_jet_is_reduction_of_exact_jet() {
        let f = IntPoly::from_i64s(&[2, 1, 3, 1, 3, 2]);
        let m = Modulus::new(3u64.pow(9));
        let (ve, se) = iterate_jet(&f, &Integers, &BigInt::from(5), 4, 3).unwrap();
        let (vm, sm) = iterate_jet(&f, &m, &5u64, 4, 3).unwrap();
        assert_eq!(vm, m.reduce_big(&ve));
        for (a, b) in sm.iter().zip(&se) {
            assert_eq!(*a, m.reduce_big(b));
        }
    }
}
