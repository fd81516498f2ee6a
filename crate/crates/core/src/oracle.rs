//! Brute-force bounded checking: validity, entailment and equivalence
//! over every enumerated model at a given scale.
//!
//! A verdict is never a proof: `NoCounterexampleAtScale` names its bound.
//! Counterexamples are re-verified through the public semantics before
//! being returned.

use rayon::prelude::*;
use serde::ser::SerializeStruct;
use serde::{Serialize, Serializer};
use thiserror::Error;

use crate::formula::{Formula, Fragment};
use crate::model::{count_models, enumerate_models, Timeline, TreeModel};
use crate::semantics::{compile, holds, CompiledFormula, Evaluator};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// How many possible futures a bounded check explores: the model
/// alphabet, the branching bound, and the uniform depth.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Scale {
    pub atoms: Vec<String>,
    pub max_branch: u32,
    pub depth: usize,
}

impl Scale {
    pub fn new(mut atoms: Vec<String>, max_branch: u32, depth: usize) -> Scale {
        atoms.sort();
        atoms.dedup();
        Scale {
            atoms,
            max_branch,
            depth,
        }
    }

    /// The smallest scale that still exercises branching beyond the
    /// formulas' sight: their own atoms (capped at two), branching 2,
    /// depth one past the largest horizon.
    pub fn default_for<'f>(formulas: impl IntoIterator<Item = &'f Formula>) -> Scale {
        let mut atoms = std::collections::BTreeSet::new();
        let mut horizon = 0;
        for f in formulas {
            atoms.extend(f.atoms());
            horizon = horizon.max(f.horizon() as usize);
        }
        Scale::new(
            atoms.into_iter().take(2).collect(),
            2,
            horizon + 1,
        )
    }

    /// Number of models this scale enumerates; `None` when astronomically
    /// many.
    pub fn model_count(&self) -> Option<u128> {
        count_models(self.atoms.len(), self.max_branch, self.depth)
    }
}

impl std::fmt::Display for Scale {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "atoms {{{}}}, branch <= {}, depth {}",
            self.atoms.join(","),
            self.max_branch,
            self.depth
        )
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ScaleError {
    #[error("scale depth {depth} is smaller than the largest formula horizon {horizon}")]
    HorizonTooLarge { horizon: usize, depth: usize },
}

/// Outcome of a bounded check: either exhaustion of the scale, or a
/// concrete `(model, timeline, position)` witness.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Verdict {
    NoCounterexampleAtScale {
        scale: Scale,
        models_checked: u128,
    },
    Counterexample {
        scale: Scale,
        model: TreeModel,
        branch: Vec<String>,
        index: usize,
    },
}

impl Verdict {
    pub fn is_counterexample(&self) -> bool {
        matches!(self, Verdict::Counterexample { .. })
    }
}

impl Serialize for Verdict {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Verdict::NoCounterexampleAtScale {
                scale,
                models_checked,
            } => {
                let mut s = serializer.serialize_struct("Verdict", 3)?;
                s.serialize_field("verdict", "no-counterexample-at-scale")?;
                s.serialize_field("scale", scale)?;
                s.serialize_field("models_checked", &models_checked.to_string())?;
                s.end()
            }
            Verdict::Counterexample {
                scale,
                model,
                branch,
                index,
            } => {
                let mut s = serializer.serialize_struct("Verdict", 5)?;
                s.serialize_field("verdict", "counterexample")?;
                s.serialize_field("scale", scale)?;
                s.serialize_field("model", &model.to_raw())?;
                s.serialize_field("branch", branch)?;
                s.serialize_field("index", index)?;
                s.end()
            }
        }
    }
}

const BATCH: usize = 512;

/// Exhaustively check `f` at every admissible `(model, timeline, index)`
/// of the scale.
pub fn check_valid(f: &Formula, scale: &Scale) -> Result<Verdict, ScaleError> {
    check_entails(&[], f, scale)
}

/// Search for an admissible point satisfying every premise but not the
/// conclusion.
///
/// The model stream is scanned in batches that workers check in
/// parallel; the reported counterexample is always the first in
/// enumeration order, so the verdict does not depend on thread timing.
pub fn check_entails(
    premises: &[Formula],
    conclusion: &Formula,
    scale: &Scale,
) -> Result<Verdict, ScaleError> {
    let horizon = premises
        .iter()
        .chain([conclusion])
        .map(|f| f.horizon() as usize)
        .max()
        .unwrap_or(0);
    if horizon > scale.depth {
        return Err(ScaleError::HorizonTooLarge {
            horizon,
            depth: scale.depth,
        });
    }

    let compiled_premises: Vec<CompiledFormula> =
        premises.iter().map(|p| compile(p, &scale.atoms)).collect();
    let compiled_conclusion = compile(conclusion, &scale.atoms);

    let mut stream = enumerate_models(&scale.atoms, scale.max_branch, scale.depth);
    let mut models_checked: u128 = 0;
    loop {
        let batch: Vec<TreeModel> = stream.by_ref().take(BATCH).collect();
        if batch.is_empty() {
            return Ok(Verdict::NoCounterexampleAtScale {
                scale: scale.clone(),
                models_checked,
            });
        }
        let hit = batch.par_iter().find_map_first(|m| {
            refute_on_model(m, &compiled_premises, &compiled_conclusion, horizon)
                .map(|(tl, i)| (m, tl, i))
        });
        if let Some((model, timeline, index)) = hit {
            verify_witness(model, &timeline, index, premises, conclusion);
            return Ok(Verdict::Counterexample {
                scale: scale.clone(),
                branch: timeline.id_nodes(model),
                model: model.clone(),
                index,
            });
        }
        models_checked += batch.len() as u128;
    }
}

/// Validity of the biconditional.
pub fn check_equiv(f: &Formula, g: &Formula, scale: &Scale) -> Result<Verdict, ScaleError> {
    check_valid(&Formula::iff(f.clone(), g.clone()), scale)
}

fn refute_on_model(
    model: &TreeModel,
    premises: &[CompiledFormula],
    conclusion: &CompiledFormula,
    horizon: usize,
) -> Option<(Timeline, usize)> {
    let mut premise_evs: Vec<Evaluator> =
        premises.iter().map(|c| Evaluator::new(model, c)).collect();
    let mut conclusion_ev = Evaluator::new(model, conclusion);
    for timeline in model.timelines() {
        'position: for i in 0..=(model.depth() - horizon) {
            for ev in premise_evs.iter_mut() {
                if !ev.holds(&timeline, i).expect("admissible by construction") {
                    continue 'position;
                }
            }
            if !conclusion_ev
                .holds(&timeline, i)
                .expect("admissible by construction")
            {
                return Some((timeline, i));
            }
        }
    }
    None
}

/// A verdict is never trusted without re-evaluation: the witness must
/// reproduce under the public semantics entry point.
fn verify_witness(
    model: &TreeModel,
    timeline: &Timeline,
    index: usize,
    premises: &[Formula],
    conclusion: &Formula,
) {
    for p in premises {
        assert!(
            holds(model, timeline, index, p).expect("witness admissible"),
            "counterexample failed re-verification: premise {p} does not hold"
        );
    }
    assert!(
        !holds(model, timeline, index, conclusion).expect("witness admissible"),
        "counterexample failed re-verification: conclusion {conclusion} holds"
    );
}

// ---------------------------------------------------------------------
// Random formulas
// ---------------------------------------------------------------------

/// Shape of the random formulas a fuzzing run draws.
#[derive(Debug, Clone)]
pub struct RandomProfile {
    pub max_size: usize,
    pub fragment: Fragment,
    pub atoms: Vec<String>,
    /// Resample until the horizon fits, when set.
    pub max_horizon: Option<u32>,
}

/// Deterministic per seed, across runs and platforms. Announcement
/// guards are always drawn `A`-free, whatever the target fragment.
pub fn random_formula(profile: &RandomProfile, seed: u64) -> Formula {
    assert!(profile.max_size >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..10_000 {
        let f = gen(&mut rng, profile.max_size, profile.fragment, &profile.atoms);
        debug_assert!(f.size() <= profile.max_size);
        if profile
            .max_horizon
            .map(|cap| f.horizon() <= cap)
            .unwrap_or(true)
        {
            return f;
        }
    }
    // pathological cap; fall back to a leaf
    leaf(&mut rng, &profile.atoms)
}

fn leaf(rng: &mut ChaCha8Rng, atoms: &[String]) -> Formula {
    if atoms.is_empty() || rng.gen_range(0..6) == 0 {
        Formula::Top
    } else {
        Formula::atom(atoms[rng.gen_range(0..atoms.len())].clone())
    }
}

fn gen(rng: &mut ChaCha8Rng, budget: usize, fragment: Fragment, atoms: &[String]) -> Formula {
    if budget <= 1 {
        return leaf(rng, atoms);
    }
    let next_ok = fragment != Fragment::Pc;
    let binary_ok = budget >= 3; // both operands need a constructor each
    let upd_ok = matches!(fragment, Fragment::XAnnounce | Fragment::Xl) && binary_ok;
    let all_ok = matches!(fragment, Fragment::Xa | Fragment::Xl);
    let choices: &[(u32, u8)] = &[
        (2, 0), // leaf
        (3, 1), // not
        (if binary_ok { 3 } else { 0 }, 2), // and
        (if next_ok { 3 } else { 0 }, 3),
        (if all_ok { 2 } else { 0 }, 4),
        (if upd_ok { 2 } else { 0 }, 5),
    ];
    let total: u32 = choices.iter().map(|(w, _)| w).sum();
    let mut pick = rng.gen_range(0..total);
    let mut kind = 0u8;
    for (w, k) in choices {
        if pick < *w {
            kind = *k;
            break;
        }
        pick -= w;
    }
    match kind {
        0 => leaf(rng, atoms),
        1 => Formula::not(gen(rng, budget - 1, fragment, atoms)),
        2 => {
            let left = rng.gen_range(1..=budget - 2);
            Formula::and(
                gen(rng, left, fragment, atoms),
                gen(rng, budget - 1 - left, fragment, atoms),
            )
        }
        3 => Formula::next(gen(rng, budget - 1, fragment, atoms)),
        4 => Formula::all(gen(rng, budget - 1, fragment, atoms)),
        _ => {
            let guard_budget = rng.gen_range(1..=budget - 2);
            let guard_fragment = match fragment {
                Fragment::XAnnounce | Fragment::Xl => Fragment::XAnnounce,
                other => other,
            };
            let guard = gen(rng, guard_budget, guard_fragment, atoms);
            let body = gen(rng, budget - 1 - guard_budget, fragment, atoms);
            Formula::upd(guard, body).expect("guard drawn A-free")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn f(text: &str) -> Formula {
        parse(text).unwrap()
    }

    fn atoms(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn top_is_valid() {
        let scale = Scale::new(atoms(&["p"]), 2, 1);
        let v = check_valid(&f("T"), &scale).unwrap();
        match v {
            Verdict::NoCounterexampleAtScale { models_checked, .. } => {
                assert_eq!(models_checked, 12)
            }
            _ => panic!("T refuted"),
        }
    }

    #[test]
    fn excluded_future_middle_holds_at_scale() {
        let scale = Scale::new(atoms(&["p"]), 2, 2);
        let v = check_valid(&f("X p | X ~p"), &scale).unwrap();
        assert!(!v.is_counterexample());
    }

    #[test]
    fn settled_future_is_refuted() {
        let scale = Scale::default_for([&f("A X s | A X ~s")]);
        let v = check_valid(&f("A X s | A X ~s"), &scale).unwrap();
        assert!(v.is_counterexample());
    }

    #[test]
    fn counterexamples_are_deterministic() {
        let scale = Scale::new(atoms(&["p"]), 2, 2);
        let a = check_valid(&f("X p"), &scale).unwrap();
        let b = check_valid(&f("X p"), &scale).unwrap();
        assert_eq!(a, b);
        assert!(a.is_counterexample());
    }

    #[test]
    fn self_entailment() {
        let phi = f("[X p] A X p");
        let scale = Scale::default_for([&phi]);
        let v = check_entails(std::slice::from_ref(&phi), &phi, &scale).unwrap();
        assert!(!v.is_counterexample());
    }

    #[test]
    fn sea_battle_entailment_is_refuted() {
        let premises = vec![f("X s | X ~s"), f("[X s] A X s"), f("[X ~s] A X ~s")];
        let conclusion = f("A X s | A X ~s");
        let scale = Scale::new(atoms(&["s"]), 2, 2);
        let v = check_entails(&premises, &conclusion, &scale).unwrap();
        assert!(v.is_counterexample());
    }

    #[test]
    fn scale_error_when_horizon_exceeds_depth() {
        let scale = Scale::new(atoms(&["p"]), 2, 1);
        assert!(matches!(
            check_valid(&f("X X p"), &scale),
            Err(ScaleError::HorizonTooLarge { .. })
        ));
    }

    #[test]
    fn equivalence_of_identical_formulas() {
        let scale = Scale::new(atoms(&["p"]), 2, 2);
        let v = check_equiv(&f("X p"), &f("X p"), &scale).unwrap();
        assert!(!v.is_counterexample());
    }

    #[test]
    fn next_p_differs_from_next_not_p() {
        let scale = Scale::new(atoms(&["p"]), 2, 2);
        let v = check_equiv(&f("X p"), &f("X ~p"), &scale).unwrap();
        assert!(v.is_counterexample());
    }

    #[test]
    fn split_merge_equivalence_at_scale() {
        let scale = Scale::new(atoms(&["p", "q", "r"]), 2, 2);
        let v = check_equiv(&f("[p & X q] r"), &f("[p][X q] r"), &scale).unwrap();
        assert!(!v.is_counterexample());
    }

    #[test]
    fn default_scale_caps_atoms_and_extends_depth() {
        let phi = f("X (p & q & r)");
        let scale = Scale::default_for([&phi]);
        assert_eq!(scale.atoms.len(), 2);
        assert_eq!(scale.depth, 2);
        assert_eq!(scale.max_branch, 2);
    }

    #[test]
    fn random_formula_is_deterministic() {
        let profile = RandomProfile {
            max_size: 10,
            fragment: Fragment::Xl,
            atoms: atoms(&["p", "q"]),
            max_horizon: Some(2),
        };
        for seed in 0..50 {
            let a = random_formula(&profile, seed);
            let b = random_formula(&profile, seed);
            assert_eq!(a, b);
            assert!(a.size() <= 10);
            assert!(a.horizon() <= 2);
        }
    }

    #[test]
    fn random_formula_respects_fragment() {
        let profile = RandomProfile {
            max_size: 12,
            fragment: Fragment::XAnnounce,
            atoms: atoms(&["p"]),
            max_horizon: None,
        };
        for seed in 0..200 {
            let g = random_formula(&profile, seed);
            assert!(!g.contains_all(), "{g}");
        }
    }

    #[test]
    fn random_formula_of_size_one_is_a_leaf() {
        let profile = RandomProfile {
            max_size: 1,
            fragment: Fragment::Xl,
            atoms: atoms(&["p"]),
            max_horizon: None,
        };
        for seed in 0..20 {
            let g = random_formula(&profile, seed);
            assert!(matches!(g, Formula::Atom(_) | Formula::Top));
        }
    }

    #[test]
    fn verdict_serializes_with_scale() {
        let scale = Scale::new(atoms(&["p"]), 2, 2);
        let v = check_valid(&f("X p"), &scale).unwrap();
        let json = serde_json::to_value(&v).unwrap();
        assert_eq!(json["verdict"], "counterexample");
        assert!(json["model"]["nodes"].is_object());
        assert!(json["branch"].is_array());
        assert_eq!(json["scale"]["depth"], 2);
    }
}
