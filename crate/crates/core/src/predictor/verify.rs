use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::analyze::{analyze, AnalyzeOptions, AnalyzedTree};
use super::separation::SplitCount;
use super::{PredictedShape, Rule, Scope};
use crate::arith::{DynMap, Modulus, OddPrime};
use crate::cycletree::{lift_pattern, Engine};
use crate::error::Result;
use crate::graph::{build_tree_bruteforce, Cycle, OracleTree, DEFAULT_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VerifyOptions {
    pub max_level: u32,
    pub budget: u64,
    pub fault: Option<Rule>,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions { max_level: 6, budget: DEFAULT_BUDGET, fault: None }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct RuleTally {
    pub checked: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub rules: BTreeMap<Rule, RuleTally>,
    /// Node, edge and classification comparisons against the oracle.
    pub structure: RuleTally,
    /// First few mismatch descriptions.
    pub mismatches: Vec<String>,
    pub oracle_nodes: usize,
    pub analyzed_nodes: usize,
}

const KEPT_MISMATCHES: usize = 50;

impl VerifyReport {
    pub fn failures(&self) -> u64 {
        self.structure.failed + self.rules.values().map(|t| t.failed).sum::<u64>()
    }

    pub fn is_clean(&self) -> bool {
        self.failures() == 0
    }

    fn record(&mut self, rule: Option<Rule>, outcome: std::result::Result<(), String>) {
        let tally = match rule {
            Some(r) => self.rules.entry(r).or_default(),
            None => &mut self.structure,
        };
        tally.checked += 1;
        if let Err(msg) = outcome {
            tally.failed += 1;
            if self.mismatches.len() < KEPT_MISMATCHES {
                let tag = rule.map_or("structure", Rule::code);
                self.mismatches.push(format!("[{tag}] {msg}"));
            }
        }
    }

    pub fn merge(&mut self, other: &VerifyReport) {
        for (r, t) in &other.rules {
            let e = self.rules.entry(*r).or_default();
            e.checked += t.checked;
            e.failed += t.failed;
        }
        self.structure.checked += other.structure.checked;
        self.structure.failed += other.structure.failed;
        for m in &other.mismatches {
            if self.mismatches.len() < KEPT_MISMATCHES {
                self.mismatches.push(m.clone());
            }
        }
        self.oracle_nodes += other.oracle_nodes;
        self.analyzed_nodes += other.analyzed_nodes;
    }
}

/// Oracle to `max_level`, analysis fully expanded to the same depth, and a
/// comparison of both.
pub fn verify_map<M: DynMap + ?Sized>(map: &M, p: OddPrime, opts: VerifyOptions) -> Result<VerifyReport> {
    let oracle = build_tree_bruteforce(map, p, opts.max_level, opts.budget)?;
    let tree = analyze(
        map,
        p,
        AnalyzeOptions {
            max_level: opts.max_level,
            detail_level: opts.max_level,
            budget: opts.budget.saturating_mul(opts.max_level.max(1) as u64),
            fault: opts.fault,
            ..AnalyzeOptions::default()
        },
    )?;
    Ok(verify_tree(map, &tree, &oracle))
}

/// Compares every analyzed node with the oracle and checks its prediction
/// on the oracle subtree.
pub fn verify_tree<M: DynMap + ?Sized>(map: &M, tree: &AnalyzedTree, oracle: &OracleTree) -> VerifyReport {
    let engine = Engine::new(map, tree.prime);
    let p = tree.prime;
    let index: HashMap<(u32, u64), usize> =
        oracle.nodes.iter().map(|n| ((n.cycle.level(), n.cycle.representative()), n.id)).collect();
    let mut report = VerifyReport { oracle_nodes: oracle.nodes.len(), analyzed_nodes: tree.nodes.len(), ..Default::default() };
    let mut matched = vec![None; tree.nodes.len()];
    matched[0] = (oracle.root_level() == 0).then_some(0);

    for node in tree.nodes.iter().skip(1) {
        if node.level() > oracle.max_level {
            continue;
        }
        let Some(&oid) = index.get(&(node.level(), node.cycle.representative())) else {
            report.record(None, Err(format!("{}@{} rep {} missing from oracle", node.length(), node.level(), node.cycle.representative())));
            continue;
        };
        matched[node.id] = Some(oid);
        let on = oracle.node(oid);
        let parent_ok = node.parent.map(|q| matched[q]) == Some(on.parent);
        let outcome = if on.cycle.length() != node.length() {
            Err(format!("rep {} at level {}: length {} vs oracle {}", node.cycle.representative(), node.level(), node.length(), on.cycle.length()))
        } else if !parent_ok {
            Err(format!("rep {} at level {}: parent differs from oracle", node.cycle.representative(), node.level()))
        } else {
            Ok(())
        };
        report.record(None, outcome);

        if node.expanded && node.level() < oracle.max_level {
            let mine: BTreeSet<u64> = tree.children(node.id).map(|c| c.cycle.representative()).collect();
            let theirs: BTreeSet<u64> = oracle.children(oid).map(|c| c.cycle.representative()).collect();
            report.record(
                None,
                if mine == theirs { Ok(()) } else { Err(format!("children of {}@{} differ", node.length(), node.level())) },
            );
        }
        if node.level() < oracle.max_level {
            let lens: Vec<u64> = oracle.children(oid).map(|c| c.cycle.length()).collect();
            let want = lift_pattern(p, node.length(), &lens);
            report.record(
                None,
                if want == node.classification {
                    Ok(())
                } else {
                    Err(format!(
                        "{}@{} rep {}: classified {:?}, oracle lifts {:?}",
                        node.length(),
                        node.level(),
                        node.cycle.representative(),
                        node.classification,
                        lens
                    ))
                },
            );
            if let Some(pr) = node.prediction {
                let outcome = check_shape(&engine, oracle, oid, &pr.shape)
                    .map_err(|e| format!("{}@{} rep {} {}: {e}", node.length(), node.level(), node.cycle.representative(), pr.shape));
                report.record(Some(pr.rule), outcome);
            }
        }
    }
    report
}

struct View<'o> {
    oracle: &'o OracleTree,
    p: u64,
}

impl View<'_> {
    fn horizon(&self, id: usize) -> bool {
        self.oracle.node(id).cycle.level() >= self.oracle.max_level
    }

    fn len(&self, id: usize) -> u64 {
        self.oracle.node(id).cycle.length()
    }

    fn label(&self, id: usize) -> String {
        let c = &self.oracle.node(id).cycle;
        format!("{}@{} rep {}", c.length(), c.level(), c.representative())
    }

    fn lens(&self, id: usize) -> Vec<u64> {
        self.oracle.children(id).map(|c| c.cycle.length()).collect()
    }

    fn grows(&self, id: usize) -> std::result::Result<(), String> {
        if self.horizon(id) || self.lens(id) == [self.p * self.len(id)] {
            Ok(())
        } else {
            Err(format!("{} should grow, lifts {:?}", self.label(id), self.lens(id)))
        }
    }

    fn splits(&self, id: usize) -> std::result::Result<(), String> {
        let k = self.len(id);
        let l = self.lens(id);
        if self.horizon(id) || (l.len() as u64 == self.p && l.iter().all(|&c| c == k)) {
            Ok(())
        } else {
            Err(format!("{} should split, lifts {l:?}", self.label(id)))
        }
    }

    fn grows_forever(&self, id: usize) -> std::result::Result<(), String> {
        self.grows(id)?;
        for c in &self.oracle.node(id).children {
            self.grows_forever(*c)?;
        }
        Ok(())
    }

    /// Splits `s` generations, counting `id`, then grows forever.
    fn splits_then_grows(&self, id: usize, s: u32) -> std::result::Result<(), String> {
        if s == 0 {
            return self.grows_forever(id);
        }
        self.splits(id)?;
        for c in &self.oracle.node(id).children {
            self.splits_then_grows(*c, s - 1)?;
        }
        Ok(())
    }

    fn same_length_through(&self, id: usize, k: u64, last: u32) -> std::result::Result<(), String> {
        let node = self.oracle.node(id);
        if node.cycle.level() > last {
            return Ok(());
        }
        if node.cycle.length() != k {
            return Err(format!("{} should have length {k} through level {last}", self.label(id)));
        }
        for c in &node.children {
            self.same_length_through(*c, k, last)?;
        }
        Ok(())
    }
}

/// Checks a predicted shape for oracle node `id` against everything the
/// oracle shows below it.
pub fn check_shape<M: DynMap + ?Sized>(
    engine: &Engine<'_, M>,
    oracle: &OracleTree,
    id: usize,
    shape: &PredictedShape,
) -> std::result::Result<(), String> {
    let v = View { oracle, p: oracle.prime.get() };
    let node = oracle.node(id);
    let k = node.cycle.length();
    match *shape {
        PredictedShape::GrowsForever => v.grows_forever(id),
        PredictedShape::GrowsThenSplits => {
            v.grows(id)?;
            node.children.iter().try_for_each(|&c| v.splits(c))
        }
        PredictedShape::SplitsThenGrows { s, scope: Scope::AllLifts } => {
            v.splits(id)?;
            node.children.iter().try_for_each(|&c| v.splits_then_grows(c, s))
        }
        PredictedShape::SplitsThenGrows { s, scope: Scope::AllButOneLift } => exceptional_chain(engine, &v, id, s),
        PredictedShape::StationaryPartialSplit { d } => {
            let mut cur = id;
            while !v.horizon(cur) {
                let kc = v.len(cur);
                let mut l = v.lens(cur);
                l.sort_unstable();
                let mut want = vec![kc];
                want.extend(std::iter::repeat(kc * d).take(((v.p - 1) / d) as usize));
                if kc != k || l != want {
                    return Err(format!("{} should partially split with d={d}, lifts {l:?}", v.label(cur)));
                }
                cur = *oracle.node(cur).children.iter().find(|&&c| v.len(c) == k).expect("checked above");
            }
            Ok(())
        }
        PredictedShape::TailsForever { k: pk, tail_bound } => {
            if pk != k {
                return Err(format!("{} predicted tails over a {pk}-cycle", v.label(id)));
            }
            let mut cur = id;
            loop {
                let c = oracle.node(cur);
                let level = c.cycle.level() as i128;
                let bound = crate::graph::tail_bound(oracle.prime, c.cycle.level(), k);
                let claimed = if cur == id { tail_bound as i128 } else { bound };
                if (c.max_tail_length as i128) > claimed.min(bound) {
                    return Err(format!("{} has tail {} > bound {} at level {level}", v.label(cur), c.max_tail_length, claimed));
                }
                if v.horizon(cur) {
                    return Ok(());
                }
                if v.lens(cur) != [k] {
                    return Err(format!("{} should have one {k}-cycle lift, got {:?}", v.label(cur), v.lens(cur)));
                }
                cur = c.children[0];
            }
        }
        PredictedShape::Undetermined { beyond_level, .. } => v.same_length_through(id, k, beyond_level),
    }
}

/// The node splits; the lift at offset `z = -v/u` repeats this, and every
/// other lift splits `s` generations then grows.
fn exceptional_chain<M: DynMap + ?Sized>(
    engine: &Engine<'_, M>,
    v: &View<'_>,
    id: usize,
    s: u32,
) -> std::result::Result<(), String> {
    let mut cur = id;
    loop {
        if v.horizon(cur) {
            return Ok(());
        }
        v.splits(cur)?;
        let c = &v.oracle.node(cur).cycle;
        let z = exceptional_offset(engine, c).map_err(|e| format!("{}: {e}", v.label(cur)))?;
        let n = c.level();
        let pn = engine.prime().pow(n).expect("oracle level fits");
        let target = z.1 + pn * z.0;
        let exc = v
            .oracle
            .find(n + 1, target)
            .map(|o| o.id)
            .ok_or_else(|| format!("{}: no lift through {target}", v.label(cur)))?;
        for &ch in &v.oracle.node(cur).children {
            if ch != exc {
                v.splits_then_grows(ch, s)?;
            }
        }
        cur = exc;
    }
}

/// `(z, x1)`: the offset of the repeating lift above the point `x1` the
/// linearization is computed at.
fn exceptional_offset<M: DynMap + ?Sized>(engine: &Engine<'_, M>, c: &Cycle) -> std::result::Result<(u64, u64), String> {
    let lin = engine.compute_lin(c).map_err(|e| e.to_string())?;
    let p = engine.prime();
    if !lin.big_a.is_below(lin.level) || lin.big_b.value < lin.big_a.value {
        return Err(format!("not in the exceptional-split case (A={}, B={})", lin.big_a, lin.big_b));
    }
    let pn = p.pow(lin.level).expect("level fits");
    let pa = p.pow(lin.big_a.value).expect("below level");
    let mp = Modulus::new(p.get());
    let u = mp.reduce(((lin.a + pn - 1) % pn) / pa);
    let w = mp.reduce(lin.b_at_point() / pa);
    let inv = mp.inverse(u).ok_or("a - 1 has the wrong valuation")?;
    Ok((mp.mul(mp.sub(0, w), inv), lin.point()))
}

/// Split generations below oracle node `id`, counting `id`, along every
/// path until a growth step; `None` marks a path that does neither.
pub fn observed_splits(oracle: &OracleTree, id: usize) -> BTreeSet<Option<SplitCount>> {
    let v = View { oracle, p: oracle.prime.get() };
    let mut out = BTreeSet::new();
    walk_splits(&v, id, 0, &mut out);
    out
}

fn walk_splits(v: &View<'_>, id: usize, depth: u32, out: &mut BTreeSet<Option<SplitCount>>) {
    if v.horizon(id) {
        out.insert(Some(SplitCount::AtLeast(depth)));
        return;
    }
    let k = v.len(id);
    let lens = v.lens(id);
    if lens == [v.p * k] {
        out.insert(Some(SplitCount::Exact(depth)));
    } else if lens.len() as u64 == v.p && lens.iter().all(|&c| c == k) {
        for &c in &v.oracle.node(id).children {
            walk_splits(v, c, depth + 1, out);
        }
    } else {
        out.insert(None);
    }
}

/// Oracle nodes at levels `>= 1` whose child lengths fit none of the four
/// lift patterns.
pub fn lift_law_violations(oracle: &OracleTree) -> Vec<String> {
    oracle
        .nodes
        .iter()
        .filter(|n| (1..oracle.max_level).contains(&n.cycle.level()))
        .filter_map(|n| {
            let lens: Vec<u64> = oracle.children(n.id).map(|c| c.cycle.length()).collect();
            lift_pattern(oracle.prime, n.cycle.length(), &lens)
                .is_none()
                .then(|| format!("{}@{} rep {}: lifts {lens:?}", n.cycle.length(), n.cycle.level(), n.cycle.representative()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::IntPoly;

    fn pr(p: u64) -> OddPrime {
        OddPrime::new(p).unwrap()
    }

    fn opts(max_level: u32) -> VerifyOptions {
        VerifyOptions { max_level, ..Default::default() }
    }

    #[test]
    fn clean_examples() {
        for (c, p, l) in [
            (vec![1, 1], 3, 5),
            (vec![0, 1], 5, 3),
            (vec![0, 0, 1], 5, 4),
            (vec![0, 1, 3], 3, 6),
            (vec![2, 1, 3, 1, 3, 2], 3, 6),
            (vec![3, 1, 1], 3, 5),
        ] {
            let r = verify_map(&IntPoly::from_i64s(&c), pr(p), opts(l)).unwrap();
            assert!(r.is_clean(), "{c:?} mod {p}: {:?}", r.mismatches);
            assert!(r.structure.checked > 0);
        }
    }

    #[test]
    fn injected_fault_is_caught() {
        let f = IntPoly::from_i64s(&[1, 1]);
        let r = verify_map(&f, pr(5), VerifyOptions { max_level: 3, fault: Some(Rule::Growth), ..Default::default() }).unwrap();
        assert!(r.rules[&Rule::Growth].failed > 0);
    }

    #[test]
    fn pathological_chain_counts() {
        let f = IntPoly::from_i64s(&[0, 1, 3]);
        let oracle = build_tree_bruteforce(&f, pr(3), 6, DEFAULT_BUDGET).unwrap();
        // Separates from 0 at level 2: splits once, then grows.
        let id = oracle.find(2, 3).unwrap().id;
        assert_eq!(observed_splits(&oracle, id), BTreeSet::from([Some(SplitCount::Exact(1))]));
    }

    #[test]
    fn corpus_obeys_lift_law() {
        for c in [vec![0, 0, 1], vec![2, 1, 3, 1, 3, 2], vec![0, 1]] {
            let o = build_tree_bruteforce(&IntPoly::from_i64s(&c), pr(3), 5, DEFAULT_BUDGET).unwrap();
            let v = lift_law_violations(&o);
            assert!(v.is_empty(), "{c:?}: {v:?}");
        }
    }
}
