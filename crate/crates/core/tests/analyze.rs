use proptest::prelude::*;

use cycletree::arith::{IntPoly, OddPrime};
use cycletree::cycletree::Classification;
use cycletree::graph::{build_tree_bruteforce, DEFAULT_BUDGET};
use cycletree::predictor::{analyze, verify_tree, AnalyzeOptions, PredictedShape, Rule, Scope, UndeterminedReason};

fn pr(p: u64) -> OddPrime {
    OddPrime::new(p).unwrap()
}

fn opts(max_level: u32) -> AnalyzeOptions {
    AnalyzeOptions { max_level, detail_level: max_level, ..Default::default() }
}

#[test]
fn translation_grows_forever() {
    let f = IntPoly::from_i64s(&[1, 1]);
    let t = analyze(&f, pr(3), opts(5)).unwrap();
    for n in 1..=5 {
        let level: Vec<_> = t.at_level(n).collect();
        assert_eq!(level.len(), 1);
        assert_eq!(level[0].length(), 3u64.pow(n));
        assert_eq!(level[0].shape(), Some(PredictedShape::GrowsForever));
    }
    assert!(t.determined);
    assert!(t.orbits.confirmed.is_empty() && t.orbits.stable_so_far.is_empty());
}

#[test]
fn level_two_growth_at_five() {
    let f = IntPoly::from_i64s(&[1, 1]);
    let t = analyze(&f, pr(5), opts(2)).unwrap();
    let n = t.at_level(2).next().unwrap();
    assert_eq!(n.prediction.map(|p| (p.shape, p.rule)), Some((PredictedShape::GrowsForever, Rule::Growth)));
}

#[test]
fn quintic_has_nine_cycle() {
    let f = IntPoly::from_i64s(&[2, 1, 3, 1, 3, 2]);
    let t = analyze(&f, pr(3), AnalyzeOptions::default()).unwrap();
    assert!(t.orbits.confirmed.contains(&9));
}

#[test]
fn identity_is_never_determined() {
    let t = analyze(&IntPoly::identity(), pr(5), opts(3)).unwrap();
    assert!(!t.determined);
    for n in t.nodes.iter().skip(1) {
        let lin = n.lin.as_ref().unwrap();
        assert_eq!(n.classification, Some(Classification::Splits));
        assert!(lin.big_a.saturated && lin.big_b.saturated);
        let Some(PredictedShape::Undetermined { reason, .. }) = n.shape() else { panic!("{:?}", n.shape()) };
        // Leaves on the stationary chains are flagged as suspected pathological.
        let want = if n.level() == 3 { UndeterminedReason::PathologicalSuspect } else { UndeterminedReason::Case3AB };
        assert_eq!(reason, want);
    }
}

#[test]
fn one_exceptional_lift_when_a_is_one() {
    // 6x fixes 0 with a = 6: A = 1 and B saturated at every level.
    let f = IntPoly::from_i64s(&[0, 6]);
    let t = analyze(&f, pr(5), opts(5)).unwrap();
    let n3 = t.at_level(3).find(|n| n.cycle.representative() == 0).unwrap();
    let want = PredictedShape::SplitsThenGrows { s: 0, scope: Scope::AllButOneLift };
    assert_eq!(n3.prediction.map(|p| (p.shape, p.rule)), Some((want, Rule::SplitExceptional)));
    let kids: Vec<_> = t.children(n3.id).collect();
    assert_eq!(kids.iter().filter(|c| c.exceptional).count(), 1);
    assert!(kids.iter().filter(|c| !c.exceptional).all(|c| c.classification == Some(Classification::Grows)));
    let oracle = build_tree_bruteforce(&f, pr(5), 5, DEFAULT_BUDGET).unwrap();
    assert!(verify_tree(&f, &t, &oracle).is_clean());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    // Explored nodes coincide with the oracle's, and every prediction holds
    // as far as the oracle reaches.
    #[test]
    fn analysis_agrees_with_oracle(p in prop::sample::select(vec![3u64, 5, 7]), c in prop::collection::vec(-50i64..50, 2..7)) {
        let f = IntPoly::from_i64s(&c);
        let level = if p == 3 { 6 } else { 4 };
        let t = analyze(&f, pr(p), opts(level)).unwrap();
        let oracle = build_tree_bruteforce(&f, pr(p), level, DEFAULT_BUDGET).unwrap();
        let r = verify_tree(&f, &t, &oracle);
        prop_assert!(r.is_clean(), "{:?}", r.mismatches);
        prop_assert_eq!(t.nodes.len(), oracle.nodes.len());
    }
}
