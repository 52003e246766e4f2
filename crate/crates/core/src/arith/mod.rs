//! Exact integer and modular arithmetic.

mod map;
mod order;
mod poly;
mod prime;
mod residue;
mod ring;
mod valuation;

pub use map::{iterate_jet, DynMap, PolyStep, StepMap};
pub use order::{mult_order, residue_order};
pub use poly::{IntPoly, ModPoly};
pub use prime::OddPrime;
pub use residue::{eval_mod, iterate_eval, Residue};
pub use ring::{BigModulus, Integers, Modulus, Ring};
pub use valuation::{ord_p, ord_p_biguint, ord_p_u64, Valuation};

#[cfg(test)]
mod tests {
    use super::*;
    use num_bigint::BigInt;
    use proptest::prelude::*;

    proptest! {
        // f(x + p^n t) == f(x) + p^n t f'(x)  (mod p^2n)
        #[test]
        fn first_order_congruence(
            c in prop::collection::vec(-50i64..50, 1..7),
            x in 0u64..10_000,
            t in 0u64..10_000,
            pi in 0usize..3,
            n in 1u32..6,
        ) {
            let p = OddPrime::new([3, 5, 7][pi]).unwrap();
            let f = IntPoly::from_i64s(&c);
            let pn = p.pow(n).unwrap();
            let m = Modulus::new(p.pow(2 * n).unwrap());
            let lhs = f.eval(&BigInt::from(x + pn * t));
            let rhs = f.eval(&BigInt::from(x))
                + BigInt::from(pn) * BigInt::from(t) * f.derivative(1).eval(&BigInt::from(x));
            prop_assert_eq!(m.reduce_big(&lhs), m.reduce_big(&rhs));
        }
    }
}
