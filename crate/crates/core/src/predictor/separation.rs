use std::fmt;

use num_bigint::BigInt;
use num_traits::{One, ToPrimitive, Zero};

use crate::arith::{iterate_jet, mult_order, ord_p, IntPoly, Integers, Modulus, OddPrime};
use crate::error::{Error, Result};

/// Highest Taylor coefficient of `h` computed when the series is not complete.
const MAX_ORDER: usize = 40;
const MAX_BITS: u64 = 1 << 16;

/// Number of consecutive split generations, counting the separating cycle.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum SplitCount {
    Exact(u32),
    AtLeast(u32),
}

impl SplitCount {
    /// Whether an observation is consistent with this prediction.
    pub fn admits(self, observed: SplitCount) -> bool {
        match (self, observed) {
            (SplitCount::Exact(s), SplitCount::Exact(o)) => s == o,
            (SplitCount::Exact(s), SplitCount::AtLeast(o)) => o <= s,
            (SplitCount::AtLeast(s), SplitCount::Exact(o)) => o >= s,
            (SplitCount::AtLeast(_), SplitCount::AtLeast(_)) => true,
        }
    }

    pub fn lower_bound(self) -> u32 {
        match self {
            SplitCount::Exact(s) | SplitCount::AtLeast(s) => s,
        }
    }
}

impl fmt::Display for SplitCount {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SplitCount::Exact(s) => write!(f, "{s}"),
            SplitCount::AtLeast(s) => write!(f, ">={s}"),
        }
    }
}

/// Behavior of the cycles that leave the orbit of `alpha` at level `n + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SeparationPrediction {
    /// `ord_p(y - alpha)` for the separating points `y`.
    pub n: u32,
    pub splits: SplitCount,
    /// Exactness came from the closed-form rule rather than the full series.
    pub by_rule: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparationAnalysis {
    pub alpha: BigInt,
    pub k: u64,
    /// Order of `(f^k)'(alpha)` mod `p`.
    pub d: u64,
    /// `h'(alpha)` for `h = f^(kd)`.
    pub multiplier: BigInt,
    pub pathological: bool,
    /// `ord_p(h'(alpha) - 1)`, or `ord_p` of the `ell`-th Taylor coefficient
    /// when `h'(alpha) = 1`.
    pub m: u32,
    /// Least `i >= 2` with a nonzero `i`-th Taylor coefficient, when
    /// `h'(alpha) = 1`.
    pub ell: Option<usize>,
    /// `h^(i)(alpha)/i!` for `i = 0..=order`.
    pub coefficients: Vec<BigInt>,
    /// Every nonzero coefficient of `h` at `alpha` is known.
    pub complete: bool,
    pub predictions: Vec<SeparationPrediction>,
}

impl SeparationAnalysis {
    pub fn prediction(&self, n: u32) -> Option<SplitCount> {
        self.predictions.iter().find(|s| s.n == n).map(|s| s.splits)
    }
}

fn exact_ord(v: &BigInt, p: OddPrime) -> u32 {
    let cap = v.bits().min(u32::MAX as u64 - 1) as u32 + 1;
    ord_p(v, p, cap).value
}

/// Split counts for chains separating from the periodic point `alpha` of
/// length `k`, for separation levels `n + 1` with `1 <= n <= max_n`.
pub fn separation_analysis(f: &IntPoly, p: OddPrime, alpha: &BigInt, k: u64, max_n: u32) -> Result<SeparationAnalysis> {
    if k == 0 {
        return Err(Error::Precondition("orbit length must be positive".into()));
    }
    let mut x = alpha.clone();
    for _ in 0..k {
        x = f.eval(&x);
        if x.bits() > MAX_BITS {
            return Err(Error::NotPeriodic(format!("orbit of {alpha} escapes")));
        }
    }
    if &x != alpha {
        return Err(Error::NotPeriodic(format!("f^{k}({alpha}) = {x}")));
    }
    let (_, g) = iterate_jet(f, &Integers, alpha, k, 1).expect("polynomials have no poles");
    let mp = Modulus::new(p.get());
    let a = mp.reduce_big(&g[1]);
    if a == 0 {
        return Err(Error::DerivativeDivisibleByP);
    }
    let d = mult_order(a, p)?;

    let deg = f.degree().unwrap_or(0) as u128;
    let deg_h = (k as u128)
        .checked_mul(d as u128)
        .and_then(|e| u32::try_from(e).ok())
        .and_then(|e| deg.checked_pow(e))
        .unwrap_or(u128::MAX);
    let order = deg_h.min(MAX_ORDER as u128) as usize;
    let complete = deg_h <= MAX_ORDER as u128;
    let (_, c) = iterate_jet(f, &Integers, alpha, k * d, order.max(1)).expect("polynomials have no poles");
    let multiplier = c[1].clone();

    let (pathological, m, ell) = if !multiplier.is_one() {
        (false, exact_ord(&(&multiplier - 1), p), None)
    } else {
        match (2..c.len()).find(|&i| !c[i].is_zero()) {
            Some(l) => (true, exact_ord(&c[l], p), Some(l)),
            None if complete => return Err(Error::LinearIdentity),
            None => return Err(Error::OrderSearchExhausted(order)),
        }
    };

    let mut shifted = c.clone();
    shifted[1] -= 1;
    let term_vals: Vec<(usize, u32)> = (1..shifted.len())
        .filter(|&i| !shifted[i].is_zero())
        .map(|i| (i, exact_ord(&shifted[i], p)))
        .collect();

    let mut predictions = Vec::new();
    for n in 1..=max_n {
        let by_rule = rule_count(n, d as u32, m, ell);
        let by_series = series_count(n, &term_vals, complete, shifted.len());
        let splits = match (by_rule, by_series) {
            (SplitCount::Exact(r), SplitCount::Exact(s)) if r != s => {
                return Err(Error::Internal(format!(
                    "separation at n={n}: rule gives {r}, series gives {s}"
                )))
            }
            (r @ SplitCount::Exact(_), _) => r,
            (_, s @ SplitCount::Exact(_)) => s,
            (r, s) => SplitCount::AtLeast(r.lower_bound().max(s.lower_bound())),
        };
        predictions.push(SeparationPrediction { n, splits, by_rule: matches!(by_rule, SplitCount::Exact(_)) });
    }

    Ok(SeparationAnalysis {
        alpha: alpha.clone(),
        k,
        d,
        multiplier,
        pathological,
        m,
        ell,
        coefficients: c,
        complete,
        predictions,
    })
}

fn rule_count(n: u32, d: u32, m: u32, ell: Option<usize>) -> SplitCount {
    match ell {
        None if n * d > m => SplitCount::Exact(m - 1),
        None => SplitCount::AtLeast(n * d - 1),
        Some(l) if n > m => SplitCount::Exact(n * (l as u32 - 1) + m - 1),
        Some(l) => SplitCount::AtLeast(n * l as u32 - 1),
    }
}

/// From `h(y) - y = sum (c_i - [i = 1]) t^i` with `ord_p(t) = n`: a unique
/// smallest term valuation is the valuation of the sum.
fn series_count(n: u32, terms: &[(usize, u32)], complete: bool, known: usize) -> SplitCount {
    let unknown = (!complete).then(|| (known as u64) * n as u64);
    let vals: Vec<u64> = terms.iter().map(|&(i, v)| v as u64 + i as u64 * n as u64).collect();
    let least = vals.iter().copied().min();
    let to_splits = |v: u64| (v - n as u64 - 1).to_u32().unwrap_or(u32::MAX);
    match (least, unknown) {
        (Some(v), u) if vals.iter().filter(|&&w| w == v).count() == 1 && u.map_or(true, |u| v < u) => {
            SplitCount::Exact(to_splits(v))
        }
        (Some(v), Some(u)) => SplitCount::AtLeast(to_splits(v.min(u))),
        (Some(v), None) => SplitCount::AtLeast(to_splits(v)),
        (None, Some(u)) => SplitCount::AtLeast(to_splits(u)),
        (None, None) => SplitCount::AtLeast(u32::MAX),
    }
}
