use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive, Zero};

use super::{classify, CycleNode, LinearData};
use crate::arith::{iterate_jet, ord_p_u64, BigModulus, DynMap, Modulus, OddPrime, StepMap};
use crate::error::{Error, Result};
use crate::graph::{enumerate_level, Cycle, MEMBER_CAP};

/// A map bound to a prime, with word-sized reductions cached for every
/// `p^e < 2^63`.
pub struct Engine<'a, M: DynMap + ?Sized> {
    map: &'a M,
    p: OddPrime,
    steps: Vec<M::Step>,
}

/// One cycle of the first-return map on the fiber over `x_1`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Lift {
    /// Offsets `t` with `x_1 + p^n t` on this lift, in return-map order
    /// starting from the smallest.
    pub offsets: Vec<u64>,
    pub cycle: Cycle,
}

impl<'a, M: DynMap + ?Sized> Engine<'a, M> {
    pub fn new(map: &'a M, p: OddPrime) -> Self {
        let steps = (0..)
            .map_while(|e| p.pow(e))
            .map(|m| map.at(Modulus::new(m)))
            .collect();
        Engine { map, p, steps }
    }

    pub fn map(&self) -> &'a M {
        self.map
    }

    pub fn prime(&self) -> OddPrime {
        self.p
    }

    /// Largest `e` with `p^e` word-sized.
    pub fn word_exponent(&self) -> u32 {
        self.steps.len() as u32 - 1
    }

    /// The map reduced mod `p^e`, when that modulus is word-sized.
    pub fn step(&self, e: u32) -> Option<&M::Step> {
        self.steps.get(e as usize)
    }

    fn step_or_err(&self, e: u32) -> Result<&M::Step> {
        self.step(e).ok_or(Error::PrecisionExceeded { p: self.p.get(), level: e })
    }

    /// `(f^k(x), (f^k)'(x))` mod `p^e`.
    pub fn iterate_at(&self, e: u32, x: &BigUint, k: u64) -> Result<(BigUint, BigUint)> {
        if let (Some(step), Some(x)) = (self.step(e), x.to_u64()) {
            let (v, d) = walk(step, step.modulus().reduce(x), k)?;
            return Ok((v.into(), d.into()));
        }
        let ring = BigModulus::new(self.p.pow_big(e));
        let x = x % ring.get();
        let (v, s) = iterate_jet(self.map, &ring, &x, k, 1)
            .ok_or_else(|| Error::Pole(x.to_u64().unwrap_or(u64::MAX)))?;
        Ok((v, s[1].clone()))
    }

    /// Linearization of the `k`-cycle through `x` at level `n`, computed at
    /// `x` itself.
    pub fn lin_at(&self, n: u32, x: u64, k: u64) -> Result<LinearData> {
        if n == 0 {
            return Err(Error::Precondition("linearization needs level >= 1".into()));
        }
        let p = self.p;
        let pn = p.pow_or_err(n)?;
        let not_cycle = || Error::NotACycle { rep: x, length: k, level: n };
        let (a_full, b_full) = if let Some(step) = self.step(2 * n) {
            let m = step.modulus();
            let (g, dg) = walk(step, x, k)?;
            let diff = m.sub(g, x);
            if diff % pn != 0 {
                return Err(not_cycle());
            }
            (dg % pn, diff / pn)
        } else {
            let (g, dg) = self.iterate_at(2 * n, &BigUint::from(x), k)?;
            let m = self.p.pow_big(2 * n);
            let diff = (g + &m - BigUint::from(x)) % &m;
            let pnb = BigUint::from(pn);
            if !(&diff % &pnb).is_zero() {
                return Err(not_cycle());
            }
            let a = (dg % &pnb).to_u64().expect("below p^n");
            (a, (diff / &pnb).to_u64().expect("below p^n"))
        };
        let big_a = ord_p_u64((a_full + pn - 1) % pn, p, n);
        let big_b = ord_p_u64(b_full, p, n);
        let b_val = b_full % p.pow(big_a.value.min(n)).expect("below p^n");
        Ok(LinearData {
            level: n,
            length: k,
            a: a_full,
            a_mod_p: a_full % p.get(),
            b_val,
            big_a,
            big_b,
            b_full,
            point: x,
        })
    }

    /// Linearization at the cycle's representative.
    pub fn compute_lin(&self, cycle: &Cycle) -> Result<LinearData> {
        self.lin_at(cycle.level(), cycle.representative(), cycle.length())
    }

    pub fn node(&self, cycle: Cycle) -> Result<CycleNode> {
        let lin = self.compute_lin(&cycle)?;
        let classification = classify(&lin, self.p);
        Ok(CycleNode { cycle, lin, classification })
    }

    /// The level-1 cycles, by exhaustive enumeration of `Z/pZ`.
    pub fn level_one(&self, budget: u64) -> Result<Vec<CycleNode>> {
        enumerate_level(self.map, self.p, 1, budget)?
            .cycles
            .into_iter()
            .map(|c| self.node(c))
            .collect()
    }

    /// Cycles of `f mod p^(n+1)` over the `k`-cycle through `x1`, found by
    /// walking the `p` points `x1 + p^n t` for `k` steps each.
    pub fn lift_fiber(&self, n: u32, x1: u64, k: u64) -> Result<Vec<Lift>> {
        let p = self.p.get();
        let pn = self.p.pow_or_err(n)?;
        let step = self.step_or_err(n + 1)?;
        let keep = k <= MEMBER_CAP;
        let mut phi = Vec::with_capacity(p as usize);
        let mut lows = Vec::with_capacity(p as usize);
        let mut walks: Vec<Vec<u64>> = Vec::new();
        for t in 0..p {
            let mut v = x1 + pn * t;
            let mut low = v;
            let mut seen = Vec::new();
            for _ in 0..k {
                if keep {
                    seen.push(v);
                }
                low = low.min(v);
                v = step.apply(v).ok_or(Error::Pole(v))?;
            }
            if v % pn != x1 {
                return Err(Error::NotACycle { rep: x1, length: k, level: n });
            }
            phi.push((v / pn) as u32);
            lows.push(low);
            walks.push(seen);
        }
        let orbits = crate::graph::sweep_cycles(p as u32, |t| phi[t as usize]);
        let mut out: Vec<Lift> = orbits
            .into_iter()
            .map(|orbit| {
                let start = (0..orbit.len()).min_by_key(|&i| orbit[i]).expect("nonempty");
                let offsets: Vec<u64> =
                    orbit[start..].iter().chain(&orbit[..start]).map(|&t| t as u64).collect();
                let len = k * offsets.len() as u64;
                let cycle = if keep && len <= MEMBER_CAP {
                    let members = offsets.iter().flat_map(|&t| walks[t as usize].iter().copied()).collect();
                    Cycle::from_members(n + 1, members)
                } else {
                    let rep = offsets.iter().map(|&t| lows[t as usize]).min().expect("nonempty");
                    Cycle::from_rep(n + 1, rep, len)
                };
                Lift { offsets, cycle }
            })
            .collect();
        out.sort_by_key(|l| l.cycle.representative());
        Ok(out)
    }

    /// Children of a node, ascending by representative, without global
    /// enumeration.
    pub fn expand_children(&self, node: &CycleNode) -> Result<Vec<CycleNode>> {
        let c = &node.cycle;
        self.lift_fiber(c.level(), c.representative(), c.length())?
            .into_iter()
            .map(|l| self.node(l.cycle))
            .collect()
    }

    /// Checks `a_{n+1} = a_n^r` and
    /// `p b_{n+1} = t (a_n^r - 1) + b_n (1 + a_n + ... + a_n^(r-1))`, both
    /// mod `p^n`, for the lift at offset `t` of the `k`-cycle through `x1`
    /// whose length is `k r`.
    pub fn chain_congruences(&self, n: u32, x1: u64, k: u64, t: u64, r: u64) -> Result<(bool, bool)> {
        let pn = BigInt::from(self.p.pow_or_err(n)?);
        let parent = self.lin_at(n, x1, k)?;
        let y = x1 + self.p.pow_or_err(n)? * t;
        let child = self.lin_at(n + 1, y, k * r)?;
        let a = BigInt::from(parent.a);
        let b = BigInt::from(parent.b_full);
        let modp = |v: BigInt| ((v % &pn) + &pn) % &pn;
        let mut ar = BigInt::one();
        let mut geom = BigInt::zero();
        for _ in 0..r {
            geom = modp(geom + &ar);
            ar = modp(ar * &a);
        }
        let a_ok = modp(BigInt::from(child.a)) == ar;
        let lhs = modp(BigInt::from(self.p.get()) * BigInt::from(child.b_full));
        let rhs = modp(BigInt::from(t) * (&ar - 1) + b * geom);
        Ok((a_ok, lhs == rhs))
    }
}

fn walk<S: StepMap>(step: &S, x: u64, k: u64) -> Result<(u64, u64)> {
    let m = step.modulus();
    let mut v = x;
    let mut d = m.reduce(1);
    for _ in 0..k {
        d = m.mul(d, step.derivative(v).ok_or(Error::Pole(v))?);
        v = step.apply(v).ok_or(Error::Pole(v))?;
    }
    Ok((v, d))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::IntPoly;
    use crate::cycletree::{lift_pattern, Classification};
    use crate::graph::{build_tree_bruteforce, DEFAULT_BUDGET};
    use proptest::prelude::*;

    fn pr(p: u64) -> OddPrime {
        OddPrime::new(p).unwrap()
    }

    #[test]
    fn translation_grows() {
        let f = IntPoly::from_i64s(&[1, 1]);
        let e = Engine::new(&f, pr(5));
        let lin = e.compute_lin(&Cycle::from_rep(1, 0, 5)).unwrap();
        assert_eq!((lin.a, lin.b_full), (1, 1));
        assert!(lin.big_a.saturated && lin.big_a.value == 1);
        assert_eq!(lin.big_b.value, 0);
        assert_eq!(classify(&lin, pr(5)), Classification::Grows);
    }

    #[test]
    fn identity_splits_saturated() {
        let f = IntPoly::identity();
        let e = Engine::new(&f, pr(7));
        for n in 1..5 {
            let lin = e.lin_at(n, 3, 1).unwrap();
            assert!(lin.big_a.saturated && lin.big_b.saturated);
            assert_eq!((lin.big_a.value, lin.big_b.value), (n, n));
            assert_eq!(classify(&lin, pr(7)), Classification::Splits);
        }
    }

    #[test]
    fn quintic_nine_cycle() {
        let f = IntPoly::from_i64s(&[2, 1, 3, 1, 3, 2]);
        let e = Engine::new(&f, pr(3));
        let lin = e.lin_at(4, 0, 9).unwrap();
        assert_eq!(lin.big_a, crate::arith::Valuation::exact(3));
        assert_eq!(lin.big_b, crate::arith::Valuation::saturated(4));
    }

    #[test]
    fn not_a_cycle() {
        let f = IntPoly::from_i64s(&[1, 1]);
        let e = Engine::new(&f, pr(3));
        assert!(matches!(e.lin_at(2, 0, 3), Err(Error::NotACycle { .. })));
    }

    #[test]
    fn wide_path_agrees_with_word_path() {
        let f = IntPoly::from_i64s(&[2, 1, 3, 1, 3, 2]);
        let e = Engine::new(&f, pr(3));
        for x in [0u64, 5, 17] {
            let (g, d) = e.iterate_at(30, &BigUint::from(x), 7).unwrap();
            let ring = BigModulus::new(pr(3).pow_big(50));
            let (gb, sb) = iterate_jet(&f, &ring, &BigUint::from(x), 7, 1).unwrap();
            let m = pr(3).pow_big(30);
            assert_eq!(g, gb % &m);
            assert_eq!(d, &sb[1] % &m);
        }
    }

    fn check_against_oracle(f: &IntPoly, p: OddPrime, max_level: u32) {
        let oracle = build_tree_bruteforce(f, p, max_level, DEFAULT_BUDGET).unwrap();
        let e = Engine::new(f, p);
        for level in 1..max_level {
            for &id in oracle.level(level) {
                let o = oracle.node(id);
                let node = e.node(o.cycle.clone()).unwrap();
                let kids = e.expand_children(&node).unwrap();
                let want: Vec<_> = oracle.children(id).map(|c| c.cycle.clone()).collect();
                let got: Vec<_> = kids.iter().map(|c| c.cycle.clone()).collect();
                assert_eq!(got, want, "f={f} p={p} level={level}");
                let lens: Vec<_> = got.iter().map(Cycle::length).collect();
                assert_eq!(lift_pattern(p, o.cycle.length(), &lens), Some(node.classification));
            }
        }
    }

    #[test]
    fn expansion_matches_oracle_examples() {
        check_against_oracle(&IntPoly::from_i64s(&[2, 1, 3, 1, 3, 2]), pr(3), 6);
        check_against_oracle(&IntPoly::from_i64s(&[0, 0, 1]), pr(5), 4);
        check_against_oracle(&IntPoly::from_i64s(&[0, 1, 3]), pr(3), 6);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn expansion_matches_oracle(
            c in prop::collection::vec(0i64..49, 1..7),
            pi in 0usize..3,
        ) {
            let p = pr([3, 5, 7][pi]);
            let q = (p.get() * p.get()) as i64;
            let c: Vec<i64> = c.into_iter().map(|v| v % q).collect();
            let levels = [5, 4, 3][pi];
            check_against_oracle(&IntPoly::from_i64s(&c), p, levels);
        }

        #[test]
        fn representative_independence(
            c in prop::collection::vec(0i64..25, 1..7),
            pi in 0usize..2,
        ) {
            let p = pr([3, 5][pi]);
            let f = IntPoly::from_i64s(&c);
            let oracle = build_tree_bruteforce(&f, p, 4, DEFAULT_BUDGET).unwrap();
            let e = Engine::new(&f, p);
            for level in 1..=4 {
                for &id in oracle.level(level) {
                    let cyc = &oracle.node(id).cycle;
                    let base = e.compute_lin(cyc).unwrap();
                    // Rotating scales b by f'(x_1) and shifts it by a
                    // multiple of a - 1, so only min(A, B) survives.
                    for &x in cyc.members().unwrap() {
                        let other = e.lin_at(level, x, cyc.length()).unwrap();
                        prop_assert_eq!(other.a, base.a);
                        prop_assert_eq!(other.big_a, base.big_a);
                        if base.a_mod_p != 0 {
                            prop_assert_eq!(
                                other.big_b.value.min(other.big_a.value),
                                base.big_b.value.min(base.big_a.value)
                            );
                            prop_assert_eq!(
                                other.big_b.value < other.big_a.value,
                                base.big_b.value < base.big_a.value
                            );
                        }
                    }
                    // Moving within the class mod p^n keeps b mod p^A.
                    let pn = p.pow(level).unwrap();
                    for s in 1..p.get() {
                        let x = cyc.representative() + pn * s;
                        let other = e.lin_at(level, x, cyc.length()).unwrap();
                        prop_assert_eq!(other.a, base.a);
                        prop_assert_eq!(other.big_b.value.min(base.big_a.value), base.big_b.value.min(base.big_a.value));
                        prop_assert_eq!(other.b_val, base.b_val);
                    }
                }
            }
        }

        #[test]
        fn chain_congruences_hold(
            c in prop::collection::vec(0i64..49, 1..7),
            pi in 0usize..3,
        ) {
            let p = pr([3, 5, 7][pi]);
            let f = IntPoly::from_i64s(&c);
            let e = Engine::new(&f, p);
            let mut frontier = e.level_one(DEFAULT_BUDGET).unwrap();
            for _ in 1..4 {
                let mut next = Vec::new();
                for node in &frontier {
                    let c = &node.cycle;
                    for lift in e.lift_fiber(c.level(), c.representative(), c.length()).unwrap() {
                        let r = lift.offsets.len() as u64;
                        let t = lift.offsets[0];
                        let (a_ok, b_ok) = e
                            .chain_congruences(c.level(), c.representative(), c.length(), t, r)
                            .unwrap();
                        prop_assert!(a_ok && b_ok);
                        next.push(e.node(lift.cycle).unwrap());
                    }
                }
                frontier = next;
            }
        }
    }
}
