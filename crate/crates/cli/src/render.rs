//! Text, JSON and DOT renderings of an analyzed tree.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use cycletree::arith::Valuation;
use cycletree::cycletree::Classification;
use cycletree::predictor::{AnalyzedNode, AnalyzedTree, PredictedShape, Rule};

/// The JSON document for one analyzed tree.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct TreeDoc {
    pub prime: u64,
    /// Numerator coefficients, constant term first.
    pub poly: String,
    /// Denominator coefficients for a rational map.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub den: Option<String>,
    pub max_level: u32,
    pub determined: bool,
    pub nodes: Vec<NodeDoc>,
    pub orbits: OrbitDoc,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct NodeDoc {
    pub id: usize,
    pub parent: Option<usize>,
    pub level: u32,
    pub length: u64,
    pub rep: u64,
    pub class: Option<String>,
    #[serde(rename = "A")]
    pub a: Option<u32>,
    #[serde(rename = "B")]
    pub b: Option<u32>,
    #[serde(rename = "Asat")]
    pub a_sat: Option<bool>,
    #[serde(rename = "Bsat")]
    pub b_sat: Option<bool>,
    pub d: Option<u64>,
    pub prediction: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct OrbitDoc {
    pub confirmed: Vec<u64>,
    pub stable_so_far: Vec<u64>,
    pub bound: u64,
}

impl TreeDoc {
    pub fn new(tree: &AnalyzedTree, poly: String, den: Option<String>) -> Self {
        TreeDoc {
            prime: tree.prime.get(),
            poly,
            den,
            max_level: tree.max_level,
            determined: tree.determined,
            nodes: tree.nodes.iter().map(NodeDoc::new).collect(),
            orbits: OrbitDoc {
                confirmed: tree.orbits.confirmed.iter().copied().collect(),
                stable_so_far: tree.orbits.stable_so_far.iter().copied().collect(),
                bound: tree.orbits.bound,
            },
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("tree documents always serialize") + "\n"
    }

    pub fn from_json(s: &str) -> serde_json::Result<Self> {
        serde_json::from_str(s)
    }
}

impl NodeDoc {
    fn new(n: &AnalyzedNode) -> Self {
        let lin = n.lin.as_ref();
        NodeDoc {
            id: n.id,
            parent: n.parent,
            level: n.level(),
            length: n.length(),
            rep: n.cycle.representative(),
            class: n.classification.map(|c| c.to_string()),
            a: lin.map(|l| l.big_a.value),
            b: lin.map(|l| l.big_b.value),
            a_sat: lin.map(|l| l.big_a.saturated),
            b_sat: lin.map(|l| l.big_b.saturated),
            d: n.classification.and_then(Classification::order),
            prediction: n.shape().map(|s| s.to_string()),
        }
    }
}

/// `=v`, or `>=v` when the valuation hit its cap.
fn val(v: Valuation) -> String {
    format!("{}{}", if v.saturated { ">=" } else { "=" }, v.value)
}

/// Indented tree, one node per line, followed by the orbit report.
pub fn text(tree: &AnalyzedTree) -> String {
    let mut out = format!("map {} over Z/{}^n, levels 1..={}\n", tree.label, tree.prime, tree.max_level);
    let mut stack: Vec<usize> = tree.node(0).children.iter().rev().copied().collect();
    while let Some(id) = stack.pop() {
        let n = tree.node(id);
        let indent = "  ".repeat(n.level() as usize - 1);
        let _ = write!(out, "{indent}{}@{} rep {}", n.length(), n.level(), n.cycle.representative());
        if let (Some(c), Some(l)) = (n.classification, n.lin.as_ref()) {
            let _ = write!(out, " {c} A{} B{}", val(l.big_a), val(l.big_b));
        }
        if let Some(pr) = n.prediction {
            let _ = write!(out, " -> {} [{}]", pr.shape, pr.rule);
            if let (Rule::PartialLift, PredictedShape::SplitsThenGrows { s, .. }) = (pr.rule, pr.shape) {
                let _ = write!(out, " e={}", s + 2);
            }
        }
        if n.exceptional {
            out.push_str(" (exceptional lift)");
        }
        out.push('\n');
        stack.extend(n.children.iter().rev());
    }
    let o = &tree.orbits;
    let _ = writeln!(out, "orbit lengths confirmed: {:?}", o.confirmed);
    let _ = writeln!(out, "orbit lengths stable so far: {:?}", o.stable_so_far);
    let _ = writeln!(out, "orbit length bound: {}", o.bound);
    if tree.budget_exhausted {
        let _ = writeln!(out, "budget exhausted after {} points: tree is partial", tree.points_used);
    }
    let _ = writeln!(out, "determined: {}", if tree.determined { "yes" } else { "no" });
    out
}

/// `digraph` with one node per cycle and one edge per lift.
pub fn dot(tree: &AnalyzedTree) -> String {
    let mut out = String::from("digraph cycletree {\n  node [shape=box];\n");
    for n in &tree.nodes {
        let class = n.classification.map_or_else(|| "root".to_string(), |c| c.to_string());
        let _ = writeln!(out, "  n{} [label=\"{}@{} [{}]\"];", n.id, n.length(), n.level(), class);
    }
    for n in &tree.nodes {
        if let Some(p) = n.parent {
            let _ = writeln!(out, "  n{p} -> n{};", n.id);
        }
    }
    out.push_str("}\n");
    out
}
