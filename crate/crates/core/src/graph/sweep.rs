//! Dense functional-graph sweep over `0..size`.

pub(crate) const NONE: u32 = u32::MAX;

const UNSEEN: u8 = 0;
const ON_PATH: u8 = 1;
const DONE: u8 = 2;

/// Result of one sweep. Indices are positions in the swept domain.
pub(crate) struct Sweep {
    /// Cycles in discovery order, each in orbit order starting at the point
    /// where it was entered.
    pub cycles: Vec<Vec<u32>>,
    /// Cycle reached from each point, `NONE` if the orbit hits an undefined
    /// point.
    pub root: Vec<u32>,
    /// Steps to reach the cycle (0 on the cycle).
    pub depth: Vec<u32>,
}

impl Sweep {
    pub fn tail_points(&self) -> u64 {
        self.depth
            .iter()
            .zip(&self.root)
            .filter(|&(&d, &r)| d > 0 && r != NONE)
            .count() as u64
    }

    pub fn undefined_points(&self) -> u64 {
        self.root.iter().filter(|&&r| r == NONE).count() as u64
    }

    pub fn max_depth_per_cycle(&self) -> Vec<u32> {
        let mut out = vec![0u32; self.cycles.len()];
        for (&r, &d) in self.root.iter().zip(&self.depth) {
            if r != NONE {
                out[r as usize] = out[r as usize].max(d);
            }
        }
        out
    }
}

/// Classifies every point of `0..size` under `succ` (returning `NONE` where
/// the map is undefined). Each point is pushed on a walk exactly once.
pub(crate) fn sweep(size: u32, mut succ: impl FnMut(u32) -> u32) -> Sweep {
    let n = size as usize;
    let mut state = vec![UNSEEN; n];
    let mut root = vec![NONE; n];
    let mut depth = vec![0u32; n];
    let mut next = vec![NONE; n];
    let mut cycles = Vec::new();
    let mut path: Vec<u32> = Vec::new();

    for start in 0..size {
        if state[start as usize] != UNSEEN {
            continue;
        }
        path.clear();
        let mut y = start;
        // Walk until the orbit leaves the unseen region.
        let stop = loop {
            if y == NONE {
                break NONE;
            }
            match state[y as usize] {
                UNSEEN => {
                    state[y as usize] = ON_PATH;
                    path.push(y);
                    let s = succ(y);
                    next[y as usize] = s;
                    y = s;
                }
                _ => break y,
            }
        };

        let mut upto = path.len();
        if stop != NONE && state[stop as usize] == ON_PATH {
            let pos = path.iter().rposition(|&v| v == stop).expect("on current path");
            let id = cycles.len() as u32;
            let members = path[pos..].to_vec();
            for &v in &members {
                root[v as usize] = id;
                depth[v as usize] = 0;
                state[v as usize] = DONE;
            }
            cycles.push(members);
            upto = pos;
        }
        for &v in path[..upto].iter().rev() {
            let s = next[v as usize];
            if s == NONE || root[s as usize] == NONE {
                root[v as usize] = NONE;
            } else {
                root[v as usize] = root[s as usize];
                depth[v as usize] = depth[s as usize] + 1;
            }
            state[v as usize] = DONE;
        }
    }
    Sweep { cycles, root, depth }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rho_shapes() {
        // 0 -> 1 -> 2 -> 3 -> 1, 4 -> 0, 5 -> 5, 6 -> undefined, 7 -> 6
        let table = [1, 2, 3, 1, 0, 5, NONE, 6];
        let s = sweep(8, |x| table[x as usize]);
        assert_eq!(s.cycles.len(), 2);
        let mut c0 = s.cycles[0].clone();
        c0.sort();
        assert_eq!(c0, vec![1, 2, 3]);
        assert_eq!(s.cycles[1], vec![5]);
        assert_eq!(s.depth[4], 2);
        assert_eq!(s.depth[0], 1);
        assert_eq!(s.tail_points(), 2);
        assert_eq!(s.undefined_points(), 2);
        assert_eq!(s.max_depth_per_cycle(), vec![2, 0]);
    }
}
