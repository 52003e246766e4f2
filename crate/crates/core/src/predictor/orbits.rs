use std::collections::BTreeSet;

use num_bigint::BigInt;

use super::analyze::{AnalyzedNode, AnalyzedTree};
use super::{PredictedShape, Rule};
use crate::arith::{DynMap, Integers, OddPrime};

/// Why a periodic-orbit length is known to occur.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum WitnessKind {
    /// A split chain whose exceptional lift repeats forever.
    RecurringSplit,
    /// A partially splitting chain.
    PartialSplit,
    /// The single cycle over a critical cycle.
    Tails,
    /// An exact integer point with `f^k(x) = x`.
    IntegerPoint,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrbitWitness {
    pub length: u64,
    /// Node in the analyzed tree where the chain is certified.
    pub node: usize,
    pub kind: WitnessKind,
    pub point: Option<BigInt>,
}

/// Lengths of `p`-adic periodic orbits visible in an analyzed tree.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct OrbitReport {
    pub confirmed: BTreeSet<u64>,
    /// Lengths of chains that were constant as far as explored but carry no
    /// certificate.
    pub stable_so_far: BTreeSet<u64>,
    /// No periodic orbit can be longer than this.
    pub bound: u64,
    pub undetermined_chains: usize,
    pub witnesses: Vec<OrbitWitness>,
}

/// Largest possible orbit length: `9` for `p = 3`, otherwise `p(p-1)`.
pub fn orbit_bound(p: OddPrime) -> u64 {
    let p = p.get();
    if p == 3 {
        9
    } else {
        p * (p - 1)
    }
}

const WITNESS_BITS: u64 = 4096;

/// An integer `x` with `f^k(x) = x` among the two smallest-magnitude lifts
/// of `rep mod p^level`.
pub fn exact_periodic_point<M: DynMap + ?Sized>(
    map: &M,
    p: OddPrime,
    level: u32,
    rep: u64,
    k: u64,
) -> Option<BigInt> {
    let rep = BigInt::from(rep);
    let candidates = [rep.clone(), rep - BigInt::from(p.pow_big(level))];
    candidates.into_iter().find(|alpha| {
        let mut x = alpha.clone();
        for _ in 0..k {
            match map.jet(&Integers, &x, 0) {
                Some(v) if v[0].bits() <= WITNESS_BITS => x = v[0].clone(),
                _ => return false,
            }
        }
        &x == alpha
    })
}

impl OrbitReport {
    pub(crate) fn from_tree<M: DynMap + ?Sized>(map: &M, tree: &AnalyzedTree) -> Self {
        let p = tree.prime;
        let mut report = OrbitReport { bound: orbit_bound(p), ..Default::default() };
        let same_kind_parent = |n: &AnalyzedNode, rule: Rule| {
            n.parent.map(|q| tree.node(q)).is_some_and(|q| {
                q.prediction.map(|pr| pr.rule) == Some(rule) && q.length() == n.length()
            })
        };

        for n in tree.nodes.iter().skip(1) {
            let Some(pr) = n.prediction else { continue };
            let kind = match (pr.rule, pr.shape) {
                (Rule::SplitExceptional, PredictedShape::SplitsThenGrows { .. }) => Some(WitnessKind::RecurringSplit),
                (Rule::PartialStationary, _) => Some(WitnessKind::PartialSplit),
                (Rule::Tails, _) => Some(WitnessKind::Tails),
                _ => None,
            };
            if let Some(kind) = kind {
                if !same_kind_parent(n, pr.rule) {
                    report.confirmed.insert(n.length());
                    report.witnesses.push(OrbitWitness { length: n.length(), node: n.id, kind, point: None });
                }
            }
        }

        let mut unconfirmed = BTreeSet::new();
        for leaf in tree.leaves() {
            let Some(pr) = leaf.prediction else { continue };
            if !pr.shape.is_undetermined() {
                continue;
            }
            report.undetermined_chains += 1;
            let stationary = leaf.parent.is_some_and(|q| q != 0 && tree.node(q).length() == leaf.length());
            if !stationary {
                continue;
            }
            match exact_periodic_point(map, p, leaf.level(), leaf.cycle.representative(), leaf.length()) {
                Some(x) => {
                    if report.confirmed.insert(leaf.length()) {
                        report.witnesses.push(OrbitWitness {
                            length: leaf.length(),
                            node: leaf.id,
                            kind: WitnessKind::IntegerPoint,
                            point: Some(x),
                        });
                    }
                }
                None => {
                    unconfirmed.insert(leaf.length());
                }
            }
        }
        report.stable_so_far = unconfirmed.difference(&report.confirmed).copied().collect();
        report
    }
}
