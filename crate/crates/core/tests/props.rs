//! Cross-module invariants, checked by seeded sweeps and differential
//! comparison against the naive reference evaluator.

mod common;

use common::{naive, profile, random_model};
use futura_core::formula::{parse, Formula, Fragment};
use futura_core::model::validate;
use futura_core::oracle::{check_equiv, random_formula, RandomProfile, Scale};
use futura_core::reduction::{clauses_to_formula, elim_announce, normal_form, simplify};
use futura_core::semantics::{holds, update, UpdateOutcome};

use proptest::prelude::*;

fn all_fragment_profiles() -> Vec<RandomProfile> {
    [Fragment::Pc, Fragment::X, Fragment::XAnnounce, Fragment::Xa, Fragment::Xl]
        .into_iter()
        .map(|frag| profile(frag, &["p", "q", "r_2"], 14, 4))
        .collect()
}

#[test]
fn print_parse_round_trip_over_ten_thousand_formulas() {
    let mut checked = 0usize;
    for prof in all_fragment_profiles() {
        for seed in 0..2_100 {
            let f = random_formula(&prof, seed);
            let printed = f.to_string();
            let reparsed = parse(&printed)
                .unwrap_or_else(|e| panic!("reparse of `{printed}` failed: {e}"));
            assert_eq!(reparsed, f, "round trip of `{printed}`");
            checked += 1;
        }
    }
    assert!(checked >= 10_000);
}

#[test]
fn sigma_equals_horizon_on_the_announcement_fragment() {
    let prof = profile(Fragment::XAnnounce, &["p", "q"], 12, 6);
    for seed in 0..3_000 {
        let f = random_formula(&prof, seed);
        assert_eq!(f.sigma().unwrap(), f.horizon(), "{f}");
    }
}

#[test]
fn classification_is_the_smallest_fragment() {
    for prof in all_fragment_profiles() {
        for seed in 0..500 {
            let f = random_formula(&prof, seed);
            let frag = f.fragment();
            // membership in every fragment above the computed one
            assert!(frag.within(Fragment::Xl));
            // and in none of the fragments it claims to exceed
            match frag {
                Fragment::Pc => assert!(!f.contains_next() && !f.contains_all() && !f.contains_upd()),
                Fragment::X => assert!(f.contains_next() && !f.contains_all() && !f.contains_upd()),
                Fragment::XAnnounce => assert!(f.contains_upd() && !f.contains_all()),
                Fragment::Xa => assert!(f.contains_all() && !f.contains_upd()),
                Fragment::Xl => assert!(f.contains_all() && f.contains_upd()),
            }
        }
    }
}

/// The engine against the literal-clause evaluator, over random models
/// and random formulas of every fragment.
#[test]
fn engine_matches_the_naive_evaluator() {
    let mut dissent = 0usize;
    let mut checked = 0usize;
    for (model_seed, depth) in (0..60).map(|s| (s, 2 + (s as usize % 2))) {
        let m = random_model(&["p", "q"], depth, model_seed * 7 + 1);
        assert!(validate(&m.to_raw()).is_empty());
        let timelines: Vec<_> = m.timelines().collect();
        for prof in all_fragment_profiles() {
            for seed in 0..24 {
                let f = random_formula(&prof, seed * 31 + model_seed);
                let h = f.horizon() as usize;
                if h > m.depth() {
                    continue;
                }
                for tl in &timelines {
                    for i in 0..=(m.depth() - h) {
                        let fast = holds(&m, tl, i, &f).unwrap();
                        let slow = naive::holds(&m, tl, i, &f);
                        if fast != slow {
                            dissent += 1;
                            eprintln!("divergence: {f} at i={i} on {}", tl.id_nodes(&m).join(","));
                        }
                        checked += 1;
                    }
                }
            }
        }
    }
    assert!(checked > 10_000, "only {checked} comparisons ran");
    assert_eq!(dissent, 0);
}

/// The update engine against the literal update definition.
#[test]
fn update_matches_the_naive_update() {
    let prof = profile(Fragment::XAnnounce, &["p", "q"], 9, 2);
    for model_seed in 0..40 {
        let m = random_model(&["p", "q"], 3, model_seed * 13 + 5);
        for seed in 0..30 {
            let f = random_formula(&prof, seed);
            let sigma = f.sigma().unwrap() as usize;
            for w in 0..m.node_count() {
                if m.node_depth(w) + sigma > m.depth() {
                    continue;
                }
                let fast = update(&m, w, &f).unwrap();
                let slow = naive::update(&m, w, &f);
                match (fast, slow) {
                    (UpdateOutcome::Undefined, None) => {}
                    (UpdateOutcome::Defined { model, .. }, Some(expected)) => {
                        assert_eq!(model, expected, "update with {f} at {}", m.id_of(w));
                    }
                    (got, want) => panic!(
                        "definedness mismatch for {f} at {}: {:?} vs naive {:?}",
                        m.id_of(w),
                        got,
                        want.map(|_| "defined")
                    ),
                }
            }
        }
    }
}

/// Truth is untouched by random extension below the horizon.
#[test]
fn extension_independence_of_truth() {
    let profs = all_fragment_profiles();
    for model_seed in 0..30 {
        let m = random_model(&["p", "q"], 2, model_seed + 100);
        let extended = m.extend_random(2, model_seed * 3 + 9);
        for prof in &profs {
            for seed in 0..20 {
                let f = random_formula(prof, seed + 400);
                let h = f.horizon() as usize;
                if h > m.depth() {
                    continue;
                }
                for tl_big in extended.timelines() {
                    // old node indices survive extension unchanged
                    let prefix: Vec<usize> = tl_big.nodes()[..=m.depth()].to_vec();
                    let tl_small = futura_core::model::Timeline::new(&m, prefix).unwrap();
                    for i in 0..=(m.depth() - h) {
                        assert_eq!(
                            holds(&m, &tl_small, i, &f).unwrap(),
                            holds(&extended, &tl_big, i, &f).unwrap(),
                            "{f} at {i} changed under extension"
                        );
                    }
                }
            }
        }
    }
}

#[test]
fn exists_desugaring_evaluates_as_its_definition() {
    // E f and ~A~f are the same tree, so this is a desugaring soundness
    // spot check rather than a semantic theorem
    let prof = profile(Fragment::Xl, &["p"], 8, 2);
    for seed in 0..200 {
        let f = random_formula(&prof, seed);
        assert_eq!(
            Formula::ex(f.clone()),
            Formula::not(Formula::all(Formula::not(f)))
        );
    }
}

#[test]
fn state_formulas_of_the_straightforward_kinds_are_path_independent() {
    // atoms, T, and A-rooted formulas; announcement-rooted state formulas
    // are excluded deliberately (well-givenness can depend on the path)
    let m = random_model(&["p", "q"], 3, 77);
    let prof = profile(Fragment::Xl, &["p", "q"], 8, 3);
    for seed in 0..150 {
        let f = Formula::all(random_formula(&prof, seed));
        let h = f.horizon() as usize;
        if h > m.depth() {
            continue;
        }
        for i in 0..=(m.depth() - h) {
            let mut values = std::collections::BTreeSet::new();
            for tl in m.timelines() {
                values.insert((tl.at(i), holds(&m, &tl, i, &f).unwrap()));
            }
            // per node, a single truth value
            let nodes: std::collections::BTreeSet<usize> =
                values.iter().map(|(n, _)| *n).collect();
            assert_eq!(values.len(), nodes.len(), "{f} varies along paths");
        }
    }
}

#[test]
fn normal_form_is_equivalent_and_well_shaped() {
    let prof = profile(Fragment::X, &["p", "q"], 10, 2);
    for seed in 0..150 {
        let f = random_formula(&prof, seed);
        let clauses = normal_form(&f).unwrap();
        for c in &clauses {
            assert!(c.pc.fragment().within(Fragment::Pc), "pc part {} escaped PC", c.pc);
            assert!(c.x.fragment().within(Fragment::X), "x part {} escaped X", c.x);
        }
        let rebuilt = clauses_to_formula(&clauses);
        let scale = Scale::new(vec!["p".into(), "q".into()], 2, f.horizon().max(1) as usize);
        let v = check_equiv(&f, &rebuilt, &scale).unwrap();
        assert!(!v.is_counterexample(), "{f} != {rebuilt}");
    }
}

#[test]
fn announcement_elimination_is_equivalent() {
    let prof = profile(Fragment::XAnnounce, &["p", "q"], 10, 2);
    for seed in 0..150 {
        let f = random_formula(&prof, seed);
        let cleared = elim_announce(&f).unwrap();
        assert!(cleared.fragment().within(Fragment::X));
        let scale = Scale::new(vec!["p".into(), "q".into()], 2, f.horizon().max(1) as usize);
        let v = check_equiv(&f, &cleared, &scale).unwrap();
        assert!(!v.is_counterexample(), "{f} != {cleared}");
    }
}

#[test]
fn simplifier_preserves_equivalence() {
    let prof = profile(Fragment::Xl, &["p"], 12, 2);
    for seed in 0..150 {
        let f = random_formula(&prof, seed);
        let s = simplify(&f);
        let scale = Scale::new(vec!["p".into()], 2, f.horizon().max(1) as usize);
        let v = check_equiv(&f, &s, &scale).unwrap();
        assert!(!v.is_counterexample(), "simplify broke {f} -> {s}");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    /// Parser totality: arbitrary ASCII input never panics.
    #[test]
    fn parser_never_panics(input in "[ -~]{0,40}") {
        let _ = parse(&input);
    }

    /// Seed-driven round trip under proptest's exploration.
    #[test]
    fn round_trip_seeded(seed in any::<u64>()) {
        let prof = profile(Fragment::Xl, &["p", "q"], 16, 8);
        let f = random_formula(&prof, seed);
        prop_assert_eq!(parse(&f.to_string()).unwrap(), f);
    }

    /// Model files survive a save/load cycle.
    #[test]
    fn model_json_round_trip(seed in any::<u64>()) {
        let m = random_model(&["p", "q"], 2 + (seed % 3) as usize, seed);
        let text = futura_core::model::model_to_json(&m);
        let back = futura_core::model::model_from_json(&text).unwrap();
        prop_assert_eq!(back, m);
    }
}
