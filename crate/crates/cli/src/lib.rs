//! Command-line front end: argument parsing, dispatch and exit codes.

pub mod render;

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::json;

use cycletree::arith::{IntPoly, OddPrime};
use cycletree::checkers::{bijective_at, is_permutation, is_single_cycle, single_cycle_at, RationalMap};
use cycletree::graph::{tail_analysis, tail_bound, DEFAULT_BUDGET};
use cycletree::predictor::{analyze, verify_map, AnalyzeOptions, AnalyzedTree, Rule, VerifyOptions, VerifyReport};
use cycletree::Error;

use render::TreeDoc;

pub const EXIT_MISMATCH: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;

#[derive(Debug, Parser)]
#[command(name = "cycletree", version, about = "Cycle-lift trees of polynomial and rational maps mod p^n")]
pub struct Cli {
    /// Worker threads; output does not depend on this.
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Explore the tree and annotate every node with its predicted subtree.
    Analyze(AnalyzeArgs),
    /// Compare predictions against the brute-force oracle.
    Verify(VerifyArgs),
    /// Permutation criterion against brute force, for levels 1..=level.
    Permcheck(CheckArgs),
    /// Single-cycle criterion against brute force, for levels 1..=level.
    Cyclecheck(CheckArgs),
    /// Tail lengths and fiber sizes over one residue class mod p.
    Tails(TailsArgs),
    /// Periodic orbit lengths in Z_p.
    Orbits(AnalyzeArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Json,
    Dot,
}

#[derive(Debug, Args)]
pub struct MapArgs {
    #[arg(long)]
    pub prime: u64,
    /// Coefficients, constant term first: `2,1,3` is 2 + x + 3x^2.
    #[arg(long, allow_hyphen_values = true)]
    pub poly: Option<String>,
    /// Denominator coefficients; makes the map poly/den.
    #[arg(long, allow_hyphen_values = true)]
    pub den: Option<String>,
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 6)]
    pub max_level: u32,
    /// Total cycle points the exploration may create.
    #[arg(long, env = "CYCLETREE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Levels below this are expanded in full.
    #[arg(long)]
    pub detail_level: Option<u32>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 6)]
    pub max_level: u32,
    #[arg(long, env = "CYCLETREE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
    /// Check this many random polynomials instead of `--poly`.
    #[arg(long)]
    pub random: Option<usize>,
    /// Maximum degree of random polynomials.
    #[arg(long, default_value_t = 4)]
    pub degree: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
    /// Corrupt one rule's predictions (harness self-test).
    #[arg(long, hide = true)]
    pub inject_fault: Option<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long, default_value_t = 3)]
    pub level: u32,
    #[arg(long, env = "CYCLETREE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

#[derive(Debug, Args)]
pub struct TailsArgs {
    #[command(flatten)]
    pub map: MapArgs,
    #[arg(long)]
    pub level: u32,
    /// Residue class mod p.
    #[arg(long)]
    pub class: u64,
    #[arg(long, env = "CYCLETREE_BUDGET", default_value_t = DEFAULT_BUDGET)]
    pub budget: u64,
}

/// A failed command: what to print and how to exit.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::BudgetExceeded { .. } => EXIT_BUDGET,
            _ => EXIT_USAGE,
        };
        Failure { code, message: e.to_string() }
    }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

/// Stdout text and exit code of a successful run.
pub struct Outcome {
    pub stdout: String,
    pub code: u8,
}

enum Map {
    Poly(IntPoly),
    Rational(RationalMap),
}

impl MapArgs {
    fn prime(&self) -> Result<OddPrime, Failure> {
        Ok(OddPrime::new(self.prime)?)
    }

    fn parse(&self) -> Result<Map, Failure> {
        let num: IntPoly = self.poly.as_deref().ok_or_else(|| usage("--poly is required"))?.parse()?;
        match &self.den {
            None => Ok(Map::Poly(num)),
            Some(d) => Ok(Map::Rational(RationalMap::new(num, d.parse()?)?)),
        }
    }

    fn polynomial(&self) -> Result<IntPoly, Failure> {
        match self.parse()? {
            Map::Poly(f) => Ok(f),
            Map::Rational(_) => Err(usage("this command takes a polynomial; drop --den")),
        }
    }

    fn csv(&self) -> (String, Option<String>) {
        let norm = |s: &str| s.parse::<IntPoly>().map(|f| f.to_csv()).unwrap_or_else(|_| s.to_string());
        (norm(self.poly.as_deref().unwrap_or("0")), self.den.as_deref().map(norm))
    }
}

fn fault(name: &Option<String>) -> Result<Option<Rule>, Failure> {
    name.as_deref().map(|s| s.parse::<Rule>()).transpose().map_err(Failure::from)
}

/// Evaluates `$body` with `$m` bound to the concrete map.
macro_rules! with_map {
    ($map:expr, |$m:ident| $body:expr) => {
        match $map {
            Map::Poly(ref $m) => $body,
            Map::Rational(ref $m) => $body,
        }
    };
}

pub fn run(cli: Cli) -> Result<Outcome, Failure> {
    if let Some(n) = cli.threads {
        // A second call in the same process only fails if the pool exists.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n.max(1)).build_global();
    }
    match cli.command {
        Command::Analyze(a) => cmd_analyze(&a),
        Command::Verify(v) => cmd_verify(&v),
        Command::Permcheck(c) => cmd_check(&c, false),
        Command::Cyclecheck(c) => cmd_check(&c, true),
        Command::Tails(t) => cmd_tails(&t),
        Command::Orbits(a) => cmd_orbits(&a),
    }
}

fn analyze_tree(a: &AnalyzeArgs) -> Result<AnalyzedTree, Failure> {
    let p = a.map.prime()?;
    let map = a.map.parse()?;
    let opts = AnalyzeOptions {
        max_level: a.max_level,
        budget: a.budget,
        detail_level: a.detail_level.unwrap_or(AnalyzeOptions::default().detail_level).min(a.max_level),
        fault: fault(&a.inject_fault)?,
        ..Default::default()
    };
    Ok(with_map!(map, |m| analyze(m, p, opts))?)
}

fn cmd_analyze(a: &AnalyzeArgs) -> Result<Outcome, Failure> {
    let tree = analyze_tree(a)?;
    let (poly, den) = a.map.csv();
    let stdout = match a.format {
        Format::Text => render::text(&tree),
        Format::Json => TreeDoc::new(&tree, poly, den).to_json(),
        Format::Dot => render::dot(&tree),
    };
    Ok(Outcome { stdout, code: if tree.budget_exhausted { EXIT_BUDGET } else { 0 } })
}

fn cmd_orbits(a: &AnalyzeArgs) -> Result<Outcome, Failure> {
    let tree = analyze_tree(a)?;
    let o = &tree.orbits;
    let stdout = match a.format {
        Format::Json => {
            let witnesses: Vec<_> = o
                .witnesses
                .iter()
                .map(|w| {
                    let n = tree.node(w.node);
                    json!({
                        "length": w.length,
                        "level": n.level(),
                        "rep": n.cycle.representative(),
                        "kind": format!("{:?}", w.kind),
                        "point": w.point.as_ref().map(ToString::to_string),
                    })
                })
                .collect();
            let v = json!({
                "prime": tree.prime.get(),
                "confirmed": o.confirmed,
                "stableSoFar": o.stable_so_far,
                "bound": o.bound,
                "undeterminedChains": o.undetermined_chains,
                "witnesses": witnesses,
            });
            serde_json::to_string_pretty(&v).expect("plain JSON values serialize") + "\n"
        }
        _ => {
            let mut s = String::new();
            let _ = writeln!(s, "confirmed: {:?}", o.confirmed);
            let _ = writeln!(s, "stable so far: {:?}", o.stable_so_far);
            let _ = writeln!(s, "bound: {}", o.bound);
            let _ = writeln!(s, "undetermined chains: {}", o.undetermined_chains);
            for w in &o.witnesses {
                let n = tree.node(w.node);
                let _ = write!(s, "  length {} at {}@{} rep {} ({:?})", w.length, n.length(), n.level(), n.cycle.representative(), w.kind);
                if let Some(x) = &w.point {
                    let _ = write!(s, " point {x}");
                }
                s.push('\n');
            }
            s
        }
    };
    Ok(Outcome { stdout, code: if tree.budget_exhausted { EXIT_BUDGET } else { 0 } })
}

/// The polynomials a random sweep checks, fixed by the seed alone.
pub fn random_polys(p: u64, count: usize, degree: usize, seed: u64) -> Vec<IntPoly> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let q = (p * p) as i64;
    (0..count)
        .map(|_| {
            let deg = rng.gen_range(1..=degree.max(1));
            let c: Vec<i64> = (0..=deg).map(|_| rng.gen_range(0..q)).collect();
            IntPoly::from_i64s(&c)
        })
        .collect()
}

fn verify_text(report: &VerifyReport, maps: usize) -> String {
    let mut s = format!(
        "maps: {maps}, oracle nodes: {}, analyzed nodes: {}\n",
        report.oracle_nodes, report.analyzed_nodes
    );
    let _ = writeln!(s, "{:<8} {:>10} {:>8}", "rule", "checked", "failed");
    for (r, t) in &report.rules {
        let _ = writeln!(s, "{:<8} {:>10} {:>8}", r.code(), t.checked, t.failed);
    }
    let _ = writeln!(s, "{:<8} {:>10} {:>8}", "tree", report.structure.checked, report.structure.failed);
    for m in &report.mismatches {
        let _ = writeln!(s, "mismatch: {m}");
    }
    let _ = writeln!(s, "mismatches: {}", report.failures());
    s
}

fn cmd_verify(v: &VerifyArgs) -> Result<Outcome, Failure> {
    let p = v.map.prime()?;
    let opts = VerifyOptions { max_level: v.max_level, budget: v.budget, fault: fault(&v.inject_fault)? };
    let (report, maps) = match v.random {
        Some(count) => {
            if v.map.poly.is_some() {
                return Err(usage("--random and --poly are exclusive"));
            }
            let polys = random_polys(p.get(), count, v.degree, v.seed);
            let reports = polys
                .par_iter()
                .map(|f| {
                    verify_map(f, p, opts).map(|mut r| {
                        for m in &mut r.mismatches {
                            *m = format!("[{}] {m}", f.to_csv());
                        }
                        r
                    })
                })
                .collect::<Result<Vec<_>, _>>()?;
            let mut total = VerifyReport::default();
            for r in &reports {
                total.merge(r);
            }
            (total, count)
        }
        None => {
            let map = v.map.parse()?;
            (with_map!(map, |m| verify_map(m, p, opts))?, 1)
        }
    };
    let stdout = match v.format {
        Format::Json => {
            let rules: BTreeMap<&str, _> = report
                .rules
                .iter()
                .map(|(r, t)| (r.code(), json!({"checked": t.checked, "failed": t.failed})))
                .collect();
            let out = json!({
                "prime": p.get(),
                "maps": maps,
                "oracleNodes": report.oracle_nodes,
                "analyzedNodes": report.analyzed_nodes,
                "rules": rules,
                "structure": {"checked": report.structure.checked, "failed": report.structure.failed},
                "mismatches": report.mismatches,
                "failures": report.failures(),
            });
            serde_json::to_string_pretty(&out).expect("plain JSON values serialize") + "\n"
        }
        _ => verify_text(&report, maps),
    };
    Ok(Outcome { stdout, code: if report.is_clean() { 0 } else { EXIT_MISMATCH } })
}

fn cmd_check(c: &CheckArgs, cycle: bool) -> Result<Outcome, Failure> {
    let p = c.map.prime()?;
    let f = c.map.polynomial()?;
    let what = if cycle { "single cycle" } else { "permutation" };
    let mut s = format!("{what} of {f} mod {}^n\n{:<4} {:>10} {:>12} {:>6}\n", p, "n", "criterion", "brute force", "agree");
    let mut agree_all = true;
    for n in 1..=c.level {
        let (crit, brute) = if cycle {
            (is_single_cycle(&f, p, n)?, single_cycle_at(&f, p, n, c.budget)?)
        } else {
            (is_permutation(&f, p, n)?, bijective_at(&f, p, n, c.budget)?)
        };
        agree_all &= crit == brute;
        let _ = writeln!(s, "{n:<4} {crit:>10} {brute:>12} {:>6}", if crit == brute { "yes" } else { "NO" });
    }
    Ok(Outcome { stdout: s, code: if agree_all { 0 } else { EXIT_MISMATCH } })
}

fn cmd_tails(t: &TailsArgs) -> Result<Outcome, Failure> {
    let p = t.map.prime()?;
    let f = t.map.polynomial()?;
    let st = tail_analysis(&f, p, t.level, t.class, t.budget)?;
    let mut s = format!("class {} of {f} mod {}^{}\n", t.class, p, t.level);
    let _ = writeln!(s, "cycle: length {} (mod p), representative {}", st.base_length, st.cycle_rep);
    let _ = writeln!(s, "max tail length: {} (bound {})", st.max_tail_length, tail_bound(p, t.level, st.base_length));
    let _ = writeln!(s, "fiber size -> fibers:");
    for (size, count) in &st.preimage_histogram {
        let _ = writeln!(s, "  {size}: {count}");
    }
    let _ = writeln!(
        s,
        "expected shape: {}",
        match st.shape_matches {
            Some(true) => "matches",
            Some(false) => "DIFFERS",
            None => "not applicable",
        }
    );
    let ok = st.within_tail_bound(p) && st.shape_matches != Some(false);
    Ok(Outcome { stdout: s, code: if ok { 0 } else { EXIT_MISMATCH } })
}

/// Parses the process arguments and runs; the binary's whole body.
pub fn main_entry() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(out) => {
            print!("{}", out.stdout);
            ExitCode::from(out.code)
        }
        Err(f) => {
            eprintln!("error: {}", f.message);
            ExitCode::from(f.code)
        }
    }
}
