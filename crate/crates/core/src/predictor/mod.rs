//! Predicted shapes of infinite subtrees, and the exploration driver.

mod analyze;
mod corollary;
mod orbits;
mod separation;
mod verify;

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use num_traits::ToPrimitive;

use crate::arith::{iterate_jet, ord_p_biguint, DynMap, Modulus, OddPrime};
use crate::cycletree::{Classification, CycleNode, Engine};
use crate::error::{Error, Result};

pub use analyze::{analyze, AnalyzeOptions, AnalyzedNode, AnalyzedTree};
pub use corollary::{check_corollaries, CorollaryReport, CorollarySample, PropositionSample};
pub use orbits::{exact_periodic_point, orbit_bound, OrbitReport, OrbitWitness, WitnessKind};
pub use separation::{separation_analysis, SeparationAnalysis, SeparationPrediction, SplitCount};
pub use verify::{
    check_shape, lift_law_violations, observed_splits, verify_map, verify_tree, RuleTally, VerifyOptions,
    VerifyReport,
};

/// Which lifts a split-then-grow count applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scope {
    AllLifts,
    /// Every lift except the one that repeats the parent's behavior.
    AllButOneLift,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum UndeterminedReason {
    /// Both `A` and `B` are saturated at the node's level.
    Case3AB,
    /// A `Case3AB` leaf on a chain whose length has stopped changing.
    PathologicalSuspect,
    /// A `kd`-lift of a partially splitting cycle with `e >= nd`.
    PartialSplitHorizon,
}

/// Behavior of the whole subtree below a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PredictedShape {
    /// The node grows, and so does every descendant.
    GrowsForever,
    /// A level-1 node for `p = 3` whose unique lift splits.
    GrowsThenSplits,
    /// The node splits; each lift in scope splits `s` more times, counting
    /// itself, and its descendants then grow forever.
    SplitsThenGrows { s: u32, scope: Scope },
    /// The node partially splits with order `d`, and so does its
    /// same-length lift, forever.
    StationaryPartialSplit { d: u64 },
    /// A single `k`-cycle at every deeper level, with tails of length at
    /// most `tail_bound` at this level.
    TailsForever { k: u64, tail_bound: u64 },
    /// Every descendant through `beyond_level` keeps the node's length;
    /// nothing is claimed past it.
    Undetermined { beyond_level: u32, reason: UndeterminedReason },
}

impl PredictedShape {
    pub fn kind(&self) -> &'static str {
        match self {
            PredictedShape::GrowsForever => "GrowsForever",
            PredictedShape::GrowsThenSplits => "GrowsThenSplits",
            PredictedShape::SplitsThenGrows { .. } => "SplitsThenGrows",
            PredictedShape::StationaryPartialSplit { .. } => "StationaryPartialSplit",
            PredictedShape::TailsForever { .. } => "TailsForever",
            PredictedShape::Undetermined { .. } => "Undetermined",
        }
    }

    pub fn is_undetermined(&self) -> bool {
        matches!(self, PredictedShape::Undetermined { .. })
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scope::AllLifts => "AllLifts",
            Scope::AllButOneLift => "AllButOneLift",
        })
    }
}

impl fmt::Display for UndeterminedReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            UndeterminedReason::Case3AB => "Case3AB",
            UndeterminedReason::PathologicalSuspect => "PathologicalSuspect",
            UndeterminedReason::PartialSplitHorizon => "PartialSplitHorizon",
        })
    }
}

impl fmt::Display for PredictedShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PredictedShape::SplitsThenGrows { s, scope } => write!(f, "SplitsThenGrows(s={s}, {scope})"),
            PredictedShape::StationaryPartialSplit { d } => write!(f, "StationaryPartialSplit(d={d})"),
            PredictedShape::TailsForever { k, tail_bound } => write!(f, "TailsForever(k={k}, tail<={tail_bound})"),
            PredictedShape::Undetermined { beyond_level, reason } => {
                write!(f, "Undetermined(beyond={beyond_level}, {reason})")
            }
            other => f.write_str(other.kind()),
        }
    }
}

/// The rule that produced a prediction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Rule {
    /// Growth at level two or deeper persists.
    Growth,
    /// Growth at level one persists for `p > 3`.
    GrowthLevelOne,
    /// Growth at level one for `p = 3`, decided by `b` against `c`.
    GrowthMod3,
    /// Splitting with `B < A`.
    SplitBelow,
    /// Splitting with `A <= B` and `A < n`: one exceptional lift.
    SplitExceptional,
    /// Splitting with `A, B` saturated.
    SplitSaturated,
    /// Partial splitting: the same-length lift repeats.
    PartialStationary,
    /// `kd`-lifts of a partially splitting cycle, from `e`.
    PartialLift,
    /// Tails over a critical cycle.
    Tails,
}

impl Rule {
    pub const ALL: [Rule; 9] = [
        Rule::Growth,
        Rule::GrowthLevelOne,
        Rule::GrowthMod3,
        Rule::SplitBelow,
        Rule::SplitExceptional,
        Rule::SplitSaturated,
        Rule::PartialStationary,
        Rule::PartialLift,
        Rule::Tails,
    ];

    pub fn code(self) -> &'static str {
        match self {
            Rule::Growth => "G",
            Rule::GrowthLevelOne => "G1",
            Rule::GrowthMod3 => "G1-3",
            Rule::SplitBelow => "S",
            Rule::SplitExceptional => "S2",
            Rule::SplitSaturated => "S3",
            Rule::PartialStationary => "P",
            Rule::PartialLift => "P-lift",
            Rule::Tails => "T",
        }
    }
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.code())
    }
}

impl FromStr for Rule {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Rule::ALL
            .into_iter()
            .find(|r| r.code().eq_ignore_ascii_case(s))
            .ok_or_else(|| Error::Precondition(format!("unknown rule {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Prediction {
    pub shape: PredictedShape,
    pub rule: Rule,
}

/// What `predict` may know beyond the node itself.
#[derive(Debug, Clone, Copy, Default)]
pub struct PredictContext<'a> {
    pub parent: Option<&'a CycleNode>,
    /// Deliberately corrupts one rule's output (harness self-test).
    pub fault: Option<Rule>,
}

/// Shape of the subtree below `node`.
pub fn predict<M: DynMap + ?Sized>(
    engine: &Engine<'_, M>,
    node: &CycleNode,
    ctx: PredictContext<'_>,
) -> Result<Prediction> {
    let mut out = predict_clean(engine, node, ctx.parent)?;
    if ctx.fault == Some(out.rule) {
        out.shape = corrupt(out.shape);
    }
    Ok(out)
}

fn corrupt(shape: PredictedShape) -> PredictedShape {
    use PredictedShape::*;
    match shape {
        GrowsForever => SplitsThenGrows { s: 0, scope: Scope::AllLifts },
        GrowsThenSplits => GrowsForever,
        SplitsThenGrows { s, scope } => SplitsThenGrows { s: s + 1, scope },
        StationaryPartialSplit { d } => StationaryPartialSplit { d: d + 1 },
        TailsForever { k, tail_bound } => TailsForever { k: k + 1, tail_bound },
        Undetermined { beyond_level, reason } => Undetermined { beyond_level: beyond_level + 1, reason },
    }
}

fn predict_clean<M: DynMap + ?Sized>(
    engine: &Engine<'_, M>,
    node: &CycleNode,
    parent: Option<&CycleNode>,
) -> Result<Prediction> {
    let p = engine.prime();
    let lin = &node.lin;
    let n = lin.level;
    let k = lin.length;
    let found = |shape, rule| Ok(Prediction { shape, rule });

    match node.classification {
        Classification::GrowsTails => {
            let bound = p.get() as i128 + (n as i128 - 2) * k as i128;
            return found(
                PredictedShape::TailsForever { k, tail_bound: bound.max(0) as u64 },
                Rule::Tails,
            );
        }
        Classification::PartiallySplits(d) => {
            return found(PredictedShape::StationaryPartialSplit { d }, Rule::PartialStationary);
        }
        _ => {}
    }

    let lift = match parent {
        Some(par) => match par.classification {
            Classification::PartiallySplits(d) if k == par.lin.length * d => {
                Some(partial_lift(engine, node, par.lin.level, d)?)
            }
            _ => None,
        },
        None => None,
    };
    if let Some(shape) = lift.filter(|s| !s.is_undetermined()) {
        return found(shape, Rule::PartialLift);
    }

    let fallback = match node.classification {
        Classification::Grows if n >= 2 => Prediction { shape: PredictedShape::GrowsForever, rule: Rule::Growth },
        Classification::Grows if p.get() > 3 => {
            Prediction { shape: PredictedShape::GrowsForever, rule: Rule::GrowthLevelOne }
        }
        Classification::Grows => {
            let c = second_coefficient_mod_p(engine, node)?;
            let shape = if lin.b_mod_p(p) == c {
                PredictedShape::GrowsThenSplits
            } else {
                PredictedShape::GrowsForever
            };
            Prediction { shape, rule: Rule::GrowthMod3 }
        }
        Classification::Splits => split_rule(node),
        _ => unreachable!("handled above"),
    };

    if let (
        Some(h @ PredictedShape::Undetermined { beyond_level: hl, .. }),
        PredictedShape::Undetermined { beyond_level: sl, .. },
    ) = (lift, fallback.shape)
    {
        if hl > sl {
            return found(h, Rule::PartialLift);
        }
    }
    Ok(fallback)
}

fn split_rule(node: &CycleNode) -> Prediction {
    let lin = &node.lin;
    let n = lin.level;
    let (a, b) = (lin.big_a, lin.big_b);
    if b.is_below(n) && (a.saturated || b.value < a.value) {
        Prediction {
            shape: PredictedShape::SplitsThenGrows { s: b.value - 1, scope: Scope::AllLifts },
            rule: Rule::SplitBelow,
        }
    } else if a.is_below(n) {
        Prediction {
            shape: PredictedShape::SplitsThenGrows { s: a.value - 1, scope: Scope::AllButOneLift },
            rule: Rule::SplitExceptional,
        }
    } else {
        Prediction {
            shape: PredictedShape::Undetermined { beyond_level: 2 * n, reason: UndeterminedReason::Case3AB },
            rule: Rule::SplitSaturated,
        }
    }
}

/// `hasse(f^k, 2)` at the node's representative, mod `p`.
fn second_coefficient_mod_p<M: DynMap + ?Sized>(engine: &Engine<'_, M>, node: &CycleNode) -> Result<u64> {
    let m = Modulus::new(engine.prime().get());
    let x = m.reduce(node.cycle.representative());
    let (_, s) = iterate_jet(engine.map(), &m, &x, node.cycle.length(), 2)
        .ok_or(Error::Pole(node.cycle.representative()))?;
    Ok(s[2])
}

/// `min(ord_p(h'(y) - 1), n d)` for `h = f^(kd)` at the representative of
/// a `kd`-lift whose parent sits at level `n`.
pub fn partial_lift_exponent<M: DynMap + ?Sized>(
    engine: &Engine<'_, M>,
    node: &CycleNode,
    parent_level: u32,
    d: u64,
) -> Result<crate::arith::Valuation> {
    let cap = (parent_level as u64 * d).min(u32::MAX as u64) as u32;
    let p = engine.prime();
    let (_, dh) = engine.iterate_at(cap, &BigUint::from(node.cycle.representative()), node.cycle.length())?;
    let m = p.pow_big(cap);
    let v = (dh + &m - 1u32) % &m;
    Ok(ord_p_biguint(&v, p, cap))
}

fn partial_lift<M: DynMap + ?Sized>(
    engine: &Engine<'_, M>,
    node: &CycleNode,
    parent_level: u32,
    d: u64,
) -> Result<PredictedShape> {
    let e = partial_lift_exponent(engine, node, parent_level, d)?;
    Ok(if e.saturated {
        let nd = (parent_level as u64 * d).to_u32().unwrap_or(u32::MAX);
        PredictedShape::Undetermined {
            beyond_level: parent_level.saturating_add(nd),
            reason: UndeterminedReason::PartialSplitHorizon,
        }
    } else if e.value <= 1 {
        PredictedShape::GrowsForever
    } else {
        PredictedShape::SplitsThenGrows { s: e.value - 2, scope: Scope::AllLifts }
    })
}

/// Whether the shape pins down the entire subtree below the node.
pub fn is_closed(shape: &PredictedShape, node: &CycleNode, p: OddPrime) -> bool {
    match shape {
        PredictedShape::GrowsForever
        | PredictedShape::SplitsThenGrows { .. }
        | PredictedShape::TailsForever { .. } => true,
        PredictedShape::GrowsThenSplits | PredictedShape::Undetermined { .. } => false,
        PredictedShape::StationaryPartialSplit { d } => partial_chain_settled(node, *d, p),
    }
}

/// `ord_p(a^d - 1) < n`: every deeper `kd`-lift has the same exponent.
pub fn partial_chain_settled(node: &CycleNode, d: u64, p: OddPrime) -> bool {
    let n = node.lin.level;
    let m = Modulus::new(p.pow(n).expect("level fits"));
    let ad = m.pow(node.lin.a, d);
    crate::arith::ord_p_u64(m.sub(ad, 1), p, n).is_below(n)
}
