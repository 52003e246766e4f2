//! Brute-force oracle: exhaustive cycle/tail enumeration of `f mod p^n`.

mod sweep;
mod tails;

use crate::arith::{DynMap, Modulus, OddPrime, StepMap};
use crate::error::{Error, Result};
use sweep::{sweep, Sweep, NONE};

pub use tails::{expected_fiber_histogram, tail_analysis, tail_bound, TailStats};

/// Default number of points a single sweep may touch.
pub const DEFAULT_BUDGET: u64 = 10_000_000;

/// Cycles longer than this keep only their representative.
pub const MEMBER_CAP: u64 = 1 << 16;

/// A cycle of `f mod p^level`, identified by its smallest member.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cycle {
    level: u32,
    length: u64,
    representative: u64,
    members: Option<Vec<u64>>,
}

impl Cycle {
    /// Builds a cycle from its member set (any order).
    pub fn from_members(level: u32, mut members: Vec<u64>) -> Self {
        assert!(!members.is_empty());
        members.sort_unstable();
        let length = members.len() as u64;
        let representative = members[0];
        let members = (length <= MEMBER_CAP).then_some(members);
        Cycle { level, length, representative, members }
    }

    /// A cycle known only by representative and length.
    pub fn from_rep(level: u32, representative: u64, length: u64) -> Self {
        Cycle { level, length, representative, members: None }
    }

    /// The level-0 cycle: the single point of `Z/1Z`.
    pub fn root() -> Self {
        Cycle::from_members(0, vec![0])
    }

    pub fn level(&self) -> u32 {
        self.level
    }

    pub fn length(&self) -> u64 {
        self.length
    }

    pub fn representative(&self) -> u64 {
        self.representative
    }

    /// Sorted members, if stored.
    pub fn members(&self) -> Option<&[u64]> {
        self.members.as_deref()
    }

    /// Members in orbit order starting at the representative, verifying
    /// that the walk closes after exactly `length` steps.
    pub fn orbit<S: StepMap>(&self, step: &S) -> Result<Vec<u64>> {
        let not_cycle = || Error::NotACycle {
            rep: self.representative,
            length: self.length,
            level: self.level,
        };
        let mut out = Vec::with_capacity(self.length as usize);
        let mut x = self.representative;
        for _ in 0..self.length {
            out.push(x);
            x = step.apply(x).ok_or_else(not_cycle)?;
            if x == self.representative && (out.len() as u64) < self.length {
                return Err(not_cycle());
            }
        }
        if x != self.representative {
            return Err(not_cycle());
        }
        Ok(out)
    }

    /// Sorted members, re-walking the orbit when they were not stored.
    pub fn sorted_members<M: DynMap + ?Sized>(&self, map: &M, p: OddPrime) -> Result<Vec<u64>> {
        if let Some(m) = &self.members {
            return Ok(m.clone());
        }
        let step = map.at(Modulus::new(p.pow_or_err(self.level)?));
        let mut m = self.orbit(&step)?;
        m.sort_unstable();
        Ok(m)
    }
}

/// All cycles of one level plus the count of points off cycles.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LevelDecomposition {
    pub level: u32,
    /// Ascending by representative.
    pub cycles: Vec<Cycle>,
    pub tail_point_count: u64,
    /// Points whose orbit reaches a pole (always 0 for polynomials).
    pub undefined_point_count: u64,
    /// Longest tail feeding each cycle, parallel to `cycles`.
    pub max_tail_lengths: Vec<u64>,
}

/// The region of `Z/p^level` lying over a fixed cycle at a lower level.
struct Fiber<'a> {
    base: &'a [u64],
    base_mod: u64,
}

impl Fiber<'_> {
    fn size(&self, p: OddPrime, base_level: u32, level: u32) -> Option<u64> {
        p.pow(level - base_level)?.checked_mul(self.base.len() as u64)
    }

    fn residue(&self, idx: u32) -> u64 {
        let n = self.base.len() as u64;
        let idx = idx as u64;
        self.base[(idx % n) as usize] + self.base_mod * (idx / n)
    }

    fn index(&self, x: u64) -> Option<u32> {
        let i = self.base.binary_search(&(x % self.base_mod)).ok()?;
        Some((i as u64 + self.base.len() as u64 * (x / self.base_mod)) as u32)
    }
}

/// Cycles of a self-map of `0..size`, each in orbit order.
pub(crate) fn sweep_cycles(size: u32, succ: impl FnMut(u32) -> u32) -> Vec<Vec<u32>> {
    sweep(size, succ).cycles
}

fn check_budget(required: Option<u64>, budget: u64) -> Result<u64> {
    match required {
        Some(r) if r <= budget && r < u32::MAX as u64 => Ok(r),
        Some(r) => Err(Error::BudgetExceeded { required: r, budget }),
        None => Err(Error::BudgetExceeded { required: u64::MAX, budget }),
    }
}

fn sweep_fiber<M: DynMap + ?Sized>(
    map: &M,
    p: OddPrime,
    fiber: &Fiber<'_>,
    size: u64,
    level: u32,
) -> Result<Sweep> {
    let step = map.at(Modulus::new(p.pow_or_err(level)?));
    let mut escaped = false;
    let s = sweep(size as u32, |i| {
        match step.apply(fiber.residue(i)) {
            None => NONE,
            Some(y) => fiber.index(y).unwrap_or_else(|| {
                escaped = true;
                NONE
            }),
        }
    });
    if escaped {
        return Err(Error::Precondition("base set is not invariant under the map".into()));
    }
    Ok(s)
}

fn decompose(s: &Sweep, fiber: &Fiber<'_>, level: u32) -> (Vec<Cycle>, Vec<u64>, Vec<usize>) {
    let depths = s.max_depth_per_cycle();
    let mut cycles: Vec<(Cycle, u64, usize)> = s
        .cycles
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let members = c.iter().map(|&v| fiber.residue(v)).collect();
            (Cycle::from_members(level, members), depths[i] as u64, i)
        })
        .collect();
    cycles.sort_by_key(|(c, _, _)| c.representative);
    let mut out = Vec::with_capacity(cycles.len());
    let mut tails = Vec::with_capacity(cycles.len());
    let mut sweep_ids = Vec::with_capacity(cycles.len());
    for (c, t, i) in cycles {
        out.push(c);
        tails.push(t);
        sweep_ids.push(i);
    }
    (out, tails, sweep_ids)
}

/// Enumerates every cycle and tail point of `map mod p^n`.
pub fn enumerate_level<M: DynMap + ?Sized>(
    map: &M,
    p: OddPrime,
    n: u32,
    budget: u64,
) -> Result<LevelDecomposition> {
    let size = check_budget(p.pow(n), budget)?;
    let base = [0u64];
    let fiber = Fiber { base: &base, base_mod: 1 };
    let s = sweep_fiber(map, p, &fiber, size, n)?;
    let (cycles, max_tail_lengths, _) = decompose(&s, &fiber, n);
    Ok(LevelDecomposition {
        level: n,
        cycles,
        tail_point_count: s.tail_points(),
        undefined_point_count: s.undefined_points(),
        max_tail_lengths,
    })
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleNode {
    pub id: usize,
    pub parent: Option<usize>,
    /// Ascending by representative.
    pub children: Vec<usize>,
    pub cycle: Cycle,
    /// Longest tail feeding this cycle within the swept region.
    pub max_tail_length: u64,
}

/// The cycle-lift tree computed by exhaustive enumeration.
#[derive(Debug, Clone)]
pub struct OracleTree {
    pub prime: OddPrime,
    pub max_level: u32,
    /// `nodes[0]` is the root; every node's id is its index.
    pub nodes: Vec<OracleNode>,
    /// Node ids per level, offset by the root level.
    levels: Vec<Vec<usize>>,
    root_level: u32,
    /// Tail and undefined point counts per level (root level first).
    pub tail_counts: Vec<(u64, u64)>,
}

impl OracleTree {
    pub fn root(&self) -> &OracleNode {
        &self.nodes[0]
    }

    pub fn root_level(&self) -> u32 {
        self.root_level
    }

    pub fn node(&self, id: usize) -> &OracleNode {
        &self.nodes[id]
    }

    /// Ids of nodes at `level`, ascending by representative.
    pub fn level(&self, level: u32) -> &[usize] {
        level
            .checked_sub(self.root_level)
            .and_then(|i| self.levels.get(i as usize))
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn children(&self, id: usize) -> impl Iterator<Item = &OracleNode> {
        self.nodes[id].children.iter().map(move |&c| &self.nodes[c])
    }

    /// The node at `level` whose cycle contains `x mod p^level`.
    pub fn find(&self, level: u32, x: u64) -> Option<&OracleNode> {
        let m = self.prime.pow(level)?;
        let x = x % m;
        self.level(level).iter().map(|&i| &self.nodes[i]).find(|n| match n.cycle.members() {
            Some(ms) => ms.binary_search(&x).is_ok(),
            None => false,
        })
    }
}

/// Full tree from the level-0 root up to `max_level`.
pub fn build_tree_bruteforce<M: DynMap + ?Sized>(
    map: &M,
    p: OddPrime,
    max_level: u32,
    budget: u64,
) -> Result<OracleTree> {
    build_subtree_bruteforce(map, p, &Cycle::root(), max_level, budget)
}

/// The subtree below `base`, enumerating only the residues lying over it.
///
/// Each level costs `|base| * p^(level - base.level)` points, so deep chains
/// over a short cycle stay cheap.
pub fn build_subtree_bruteforce<M: DynMap + ?Sized>(
    map: &M,
    p: OddPrime,
    base: &Cycle,
    max_level: u32,
    budget: u64,
) -> Result<OracleTree> {
    let j = base.level();
    if max_level < j {
        return Err(Error::Precondition(format!(
            "max level {max_level} is below the base level {j}"
        )));
    }
    let members = base.sorted_members(map, p)?;
    let fiber_mod = p.pow_or_err(j)?;
    let mut nodes = vec![OracleNode {
        id: 0,
        parent: None,
        children: Vec::new(),
        cycle: base.clone(),
        max_tail_length: 0,
    }];
    let mut levels = vec![vec![0usize]];
    let mut tail_counts = vec![(0u64, 0u64)];
    // Domain index at the previous level -> node id.
    let mut prev_owner: Vec<u32> = vec![0; members.len()];

    for level in j + 1..=max_level {
        let fiber = Fiber { base: &members, base_mod: fiber_mod };
        let size = check_budget(fiber.size(p, j, level), budget)?;
        let s = sweep_fiber(map, p, &fiber, size, level)?;
        let (cycles, tails, sweep_ids) = decompose(&s, &fiber, level);
        let prev_mod = p.pow_or_err(level - 1)?;
        let mut owner = vec![NONE; size as usize];
        let mut ids = Vec::with_capacity(cycles.len());

        for ((cycle, tail), sid) in cycles.into_iter().zip(tails).zip(sweep_ids) {
            let id = nodes.len();
            let mut parent = None;
            for &v in &s.cycles[sid] {
                owner[v as usize] = id as u32;
                let x = fiber.residue(v) % prev_mod;
                let pi = fiber.index(x).expect("projection stays in the fiber");
                let pid = prev_owner[pi as usize];
                match parent {
                    _ if pid == NONE => {
                        return Err(Error::Internal(format!(
                            "cycle at level {level} projects off the cycles of level {}",
                            level - 1
                        )))
                    }
                    None => parent = Some(pid as usize),
                    Some(q) if q != pid as usize => {
                        return Err(Error::Internal(format!(
                            "cycle at level {level} projects onto two parents"
                        )))
                    }
                    Some(_) => {}
                }
            }
            let parent = parent.expect("cycles are nonempty");
            nodes[parent].children.push(id);
            nodes.push(OracleNode { id, parent: Some(parent), children: Vec::new(), cycle, max_tail_length: tail });
            ids.push(id);
        }
        levels.push(ids);
        tail_counts.push((s.tail_points(), s.undefined_points()));
        prev_owner = owner;
    }
    Ok(OracleTree { prime: p, max_level, nodes, levels, root_level: j, tail_counts })
}
