use num_bigint::{BigInt, BigUint};

use super::orbits::exact_periodic_point;
use crate::arith::{iterate_jet, ord_p_biguint, BigModulus, DynMap, Ring, Valuation};
use crate::cycletree::{Classification, CycleNode, Engine};
use crate::error::{Error, Result};

/// Both sides of `min(ord(h(y) - y) - n, nd) = min(ord(h'(y) - 1), nd)` at a
/// `kd`-lift `y` of a partially splitting `k`-cycle at level `n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorollarySample {
    pub level: u32,
    pub parent_rep: u64,
    pub rep: u64,
    pub k: u64,
    pub d: u64,
    pub lhs: u32,
    pub rhs: u32,
}

impl CorollarySample {
    pub fn holds(&self) -> bool {
        self.lhs == self.rhs
    }
}

/// Divisibility of `h^(i)(alpha)`, `2 <= i <= d`, by `h'(alpha) - 1` at an
/// exact periodic point, checked mod `p^precision`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PropositionSample {
    pub alpha: BigInt,
    pub k: u64,
    pub d: u64,
    pub precision: u32,
    /// `ord_p(h'(alpha) - 1)`, capped at `precision`.
    pub m: Valuation,
    /// Smallest valuation among `h^(i)(alpha)/i!`, `2 <= i <= d`.
    pub least: Valuation,
}

impl PropositionSample {
    pub fn holds(&self) -> bool {
        self.least.saturated || (!self.m.saturated && self.least.value >= self.m.value)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CorollaryReport {
    pub samples: Vec<CorollarySample>,
    pub propositions: Vec<PropositionSample>,
    /// Inputs that were not partially splitting.
    pub skipped: usize,
}

impl CorollaryReport {
    pub fn failures(&self) -> usize {
        self.samples.iter().filter(|s| !s.holds()).count()
            + self.propositions.iter().filter(|s| !s.holds()).count()
    }

    pub fn merge(&mut self, other: CorollaryReport) {
        self.samples.extend(other.samples);
        self.propositions.extend(other.propositions);
        self.skipped += other.skipped;
    }
}

/// Evaluates the identity on every `kd`-lift of each partially splitting
/// node, and the divisibility statement wherever the node's chain has an
/// integer periodic point.
pub fn check_corollaries<M: DynMap + ?Sized>(engine: &Engine<'_, M>, nodes: &[CycleNode]) -> Result<CorollaryReport> {
    let p = engine.prime();
    let mut report = CorollaryReport::default();
    for node in nodes {
        let Classification::PartiallySplits(d) = node.classification else {
            report.skipped += 1;
            continue;
        };
        let n = node.cycle.level();
        let k = node.cycle.length();
        let nd = u32::try_from(n as u64 * d).map_err(|_| Error::Precondition("level too deep".into()))?;
        let prec = n + nd;
        for lift in engine.lift_fiber(n, node.cycle.representative(), k)? {
            if lift.cycle.length() != k * d {
                continue;
            }
            let y = lift.cycle.representative();
            let (hy, dh) = engine.iterate_at(prec, &BigUint::from(y), k * d)?;
            let m = p.pow_big(prec);
            let diff = (hy + &m - (BigUint::from(y) % &m)) % &m;
            let lhs = ord_p_biguint(&diff, p, prec).value.saturating_sub(n).min(nd);
            let rhs = ord_p_biguint(&((dh + &m - 1u32) % &m), p, nd).value.min(nd);
            report.samples.push(CorollarySample { level: n, parent_rep: node.cycle.representative(), rep: y, k, d, lhs, rhs });
        }
        if let Some(alpha) = exact_periodic_point(engine.map(), p, n, node.cycle.representative(), k) {
            report.propositions.push(proposition_at(engine.map(), p, alpha, k, d, 4 * n + 8)?);
        }
    }
    Ok(report)
}

fn proposition_at<M: DynMap + ?Sized>(
    map: &M,
    p: crate::arith::OddPrime,
    alpha: BigInt,
    k: u64,
    d: u64,
    precision: u32,
) -> Result<PropositionSample> {
    let ring = BigModulus::new(p.pow_big(precision));
    let x = ring.from_int(&alpha);
    let (_, c) = iterate_jet(map, &ring, &x, k * d, d as usize).ok_or_else(|| Error::Pole(0))?;
    let m = ord_p_biguint(&ring.sub(&c[1], &ring.one()), p, precision);
    let least = c[2..]
        .iter()
        .map(|v| ord_p_biguint(v, p, precision))
        .min_by_key(|v| (v.value, v.saturated))
        .unwrap_or(Valuation::saturated(precision));
    Ok(PropositionSample { alpha, k, d, precision, m, least })
}
