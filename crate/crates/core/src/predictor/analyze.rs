use rayon::prelude::*;

use super::orbits::OrbitReport;
use super::{is_closed, predict, PredictContext, PredictedShape, Prediction, Rule, UndeterminedReason};
use crate::arith::{DynMap, Modulus, OddPrime};
use crate::cycletree::{Classification, CycleNode, Engine, LinearData, Lift};
use crate::error::{Error, Result};
use crate::graph::{Cycle, DEFAULT_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnalyzeOptions {
    /// Deepest level that may be materialized.
    pub max_level: u32,
    /// Cap on the total number of cycle points created.
    pub budget: u64,
    /// Every node below this level is expanded regardless of prediction.
    pub detail_level: u32,
    /// Deepening rounds allowed along one branch.
    pub max_deepen: u32,
    pub fault: Option<Rule>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        AnalyzeOptions { max_level: 6, budget: DEFAULT_BUDGET, detail_level: 3, max_deepen: 3, fault: None }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AnalyzedNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Ascending by representative.
    pub children: Vec<usize>,
    pub cycle: Cycle,
    /// `None` only for the level-0 root.
    pub lin: Option<LinearData>,
    pub classification: Option<Classification>,
    pub prediction: Option<Prediction>,
    /// Return-map offsets over the parent's representative.
    pub offsets: Vec<u64>,
    /// The lift that repeats its parent's split behavior.
    pub exceptional: bool,
    pub expanded: bool,
    window_end: u32,
    rounds: u32,
}

impl AnalyzedNode {
    pub fn level(&self) -> u32 {
        self.cycle.level()
    }

    pub fn length(&self) -> u64 {
        self.cycle.length()
    }

    pub fn shape(&self) -> Option<PredictedShape> {
        self.prediction.map(|p| p.shape)
    }

    pub fn cycle_node(&self) -> Option<CycleNode> {
        Some(CycleNode {
            cycle: self.cycle.clone(),
            lin: self.lin.clone()?,
            classification: self.classification?,
        })
    }

    fn new(id: usize, parent: Option<usize>, node: Option<(CycleNode, Prediction)>, cycle: Cycle) -> Self {
        let (lin, classification, prediction) = match node {
            Some((n, pr)) => (Some(n.lin), Some(n.classification), Some(pr)),
            None => (None, None, None),
        };
        AnalyzedNode {
            id,
            parent,
            children: Vec::new(),
            cycle,
            lin,
            classification,
            prediction,
            offsets: Vec::new(),
            exceptional: false,
            expanded: false,
            window_end: 0,
            rounds: 0,
        }
    }
}

#[derive(Debug, Clone)]
pub struct AnalyzedTree {
    pub prime: OddPrime,
    pub label: String,
    pub max_level: u32,
    /// `nodes[0]` is the level-0 root.
    pub nodes: Vec<AnalyzedNode>,
    /// Every leaf carries a prediction that fixes its whole subtree.
    pub determined: bool,
    pub budget_exhausted: bool,
    pub points_used: u64,
    pub orbits: OrbitReport,
}

impl AnalyzedTree {
    pub fn node(&self, id: usize) -> &AnalyzedNode {
        &self.nodes[id]
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &AnalyzedNode> {
        self.nodes[id].children.iter().map(move |&c| &self.nodes[c])
    }

    pub fn leaves(&self) -> impl Iterator<Item = &AnalyzedNode> {
        self.nodes.iter().skip(1).filter(|n| !n.expanded)
    }

    pub fn at_level(&self, level: u32) -> impl Iterator<Item = &AnalyzedNode> {
        self.nodes.iter().filter(move |n| n.level() == level)
    }

    pub fn is_leaf_closed(&self, node: &AnalyzedNode) -> bool {
        match (node.prediction, node.cycle_node()) {
            (Some(pr), Some(cn)) => is_closed(&pr.shape, &cn, self.prime),
            _ => false,
        }
    }
}

struct Expansion {
    children: Vec<(Lift, CycleNode, Prediction)>,
    exceptional: Option<usize>,
}

fn expand_one<M: DynMap + ?Sized>(
    engine: &Engine<'_, M>,
    parent: &CycleNode,
    parent_rule: Option<Rule>,
    fault: Option<Rule>,
) -> Result<Expansion> {
    let c = &parent.cycle;
    let lifts = engine.lift_fiber(c.level(), c.representative(), c.length())?;
    let mut children = Vec::with_capacity(lifts.len());
    for lift in lifts {
        let node = engine.node(lift.cycle.clone())?;
        let pr = predict(engine, &node, PredictContext { parent: Some(parent), fault })?;
        let bare = Cycle::from_rep(lift.cycle.level(), lift.cycle.representative(), lift.cycle.length());
        children.push((Lift { offsets: lift.offsets, cycle: bare }, node, pr));
    }
    let exceptional = if parent_rule == Some(Rule::SplitExceptional) {
        Some(exceptional_lift(engine.prime(), parent, &children)?)
    } else {
        None
    };
    Ok(Expansion { children, exceptional })
}

/// Index of the repeating lift of a node with `A <= B`, `A < n`, found
/// both from the children's `B` and from the offset `z = -v/u (mod p)`
/// with `a - 1 = p^A u`, `b = p^A v`.
fn exceptional_lift(
    p: OddPrime,
    parent: &CycleNode,
    children: &[(Lift, CycleNode, Prediction)],
) -> Result<usize> {
    let lin = &parent.lin;
    let big_a = lin.big_a.value;
    let structural: Vec<usize> = children
        .iter()
        .enumerate()
        .filter(|(_, (_, c, _))| c.lin.big_b.value >= big_a)
        .map(|(i, _)| i)
        .collect();

    let pn = p.pow(lin.level).expect("level fits");
    let pa = p.pow(big_a).expect("below level");
    let mp = Modulus::new(p.get());
    let u = mp.reduce(((lin.a + pn - 1) % pn) / pa);
    let v = mp.reduce(lin.b_at_point() / pa);
    let z = mp.mul(mp.sub(0, v), mp.inverse(u).ok_or_else(|| Error::Internal("a - 1 has wrong valuation".into()))?);
    let by_formula = children.iter().position(|(l, _, _)| l.offsets.contains(&z));

    match (structural.as_slice(), by_formula) {
        ([i], Some(j)) if *i == j => Ok(j),
        _ => Err(Error::Internal(format!(
            "exceptional lift mismatch at level {} rep {}: by B {:?}, by offset z={} {:?}",
            lin.level,
            parent.cycle.representative(),
            structural,
            z,
            by_formula
        ))),
    }
}

/// Explores the cycle-lift tree of `map` and annotates every node.
pub fn analyze<M: DynMap + ?Sized>(map: &M, p: OddPrime, opts: AnalyzeOptions) -> Result<AnalyzedTree> {
    let engine = Engine::new(map, p);
    let deepest = opts.max_level.min(engine.word_exponent());
    let mut nodes = vec![AnalyzedNode::new(0, None, None, Cycle::root())];
    nodes[0].expanded = true;
    let mut budget_exhausted = false;

    if p.get() > opts.budget {
        budget_exhausted = true;
    }
    let mut points_used = p.get();
    let mut frontier = Vec::new();
    if !budget_exhausted && deepest >= 1 {
        for cn in engine.level_one(opts.budget)? {
            let pr = predict(&engine, &cn, PredictContext { parent: None, fault: opts.fault })?;
            let id = nodes.len();
            let bare = Cycle::from_rep(1, cn.cycle.representative(), cn.cycle.length());
            nodes.push(AnalyzedNode::new(id, Some(0), Some((cn, pr)), bare));
            nodes[0].children.push(id);
            frontier.push(id);
        }
    }

    for level in 1..deepest {
        let mut chosen = Vec::new();
        for &id in &frontier {
            if budget_exhausted {
                break;
            }
            if !wants_expansion(&mut nodes[id], level, opts) {
                continue;
            }
            let cost = nodes[id].length().saturating_mul(p.get());
            if points_used.saturating_add(cost) > opts.budget {
                budget_exhausted = true;
                break;
            }
            points_used += cost;
            chosen.push(id);
        }

        let jobs: Vec<(usize, CycleNode, Option<Rule>)> = chosen
            .iter()
            .map(|&id| (id, nodes[id].cycle_node().expect("non-root"), nodes[id].prediction.map(|p| p.rule)))
            .collect();
        let results: Vec<Result<Expansion>> = jobs
            .par_iter()
            .map(|(_, cn, rule)| expand_one(&engine, cn, *rule, opts.fault))
            .collect();

        let mut next = Vec::new();
        for ((id, _, _), res) in jobs.into_iter().zip(results) {
            let exp = res?;
            let (window_end, rounds) = (nodes[id].window_end, nodes[id].rounds);
            nodes[id].expanded = true;
            for (i, (lift, cn, pr)) in exp.children.into_iter().enumerate() {
                let cid = nodes.len();
                let mut child = AnalyzedNode::new(cid, Some(id), Some((cn, pr)), lift.cycle);
                child.offsets = lift.offsets;
                child.exceptional = exp.exceptional == Some(i);
                child.window_end = window_end;
                child.rounds = rounds;
                nodes.push(child);
                nodes[id].children.push(cid);
                next.push(cid);
            }
        }
        frontier = next;
    }

    mark_pathological(&mut nodes);
    let mut tree = AnalyzedTree {
        prime: p,
        label: map.label(),
        max_level: opts.max_level,
        nodes,
        determined: false,
        budget_exhausted,
        points_used,
        orbits: OrbitReport::default(),
    };
    tree.determined = !budget_exhausted
        && tree.nodes.len() > 1
        && tree.leaves().all(|n| tree.is_leaf_closed(n));
    tree.orbits = OrbitReport::from_tree(map, &tree);
    Ok(tree)
}

fn wants_expansion(node: &mut AnalyzedNode, level: u32, opts: AnalyzeOptions) -> bool {
    let Some(pr) = node.prediction else { return false };
    if level < opts.detail_level {
        return true;
    }
    match pr.shape {
        PredictedShape::GrowsThenSplits => true,
        PredictedShape::StationaryPartialSplit { .. } => true,
        PredictedShape::SplitsThenGrows { scope: super::Scope::AllButOneLift, .. } => true,
        PredictedShape::Undetermined { beyond_level, .. } => {
            if level < node.window_end {
                true
            } else if node.rounds < opts.max_deepen {
                node.rounds += 1;
                node.window_end = beyond_level;
                true
            } else {
                false
            }
        }
        _ => false,
    }
}

fn mark_pathological(nodes: &mut [AnalyzedNode]) {
    for i in 1..nodes.len() {
        let Some(parent) = nodes[i].parent else { continue };
        let same_length = parent != 0 && nodes[parent].length() == nodes[i].length();
        let node = &mut nodes[i];
        if node.expanded || !same_length {
            continue;
        }
        if let Some(Prediction {
            shape: PredictedShape::Undetermined { reason: reason @ UndeterminedReason::Case3AB, .. },
            ..
        }) = node.prediction.as_mut()
        {
            *reason = UndeterminedReason::PathologicalSuspect;
        }
    }
}
