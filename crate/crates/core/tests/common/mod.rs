//! Shared test support: a deliberately naive reference evaluator and
//! sampling helpers.
//!
//! The reference evaluator follows the truth clauses and the update
//! definition literally — whole timelines, materialized restricted
//! models, no sight-depth shortcuts, no caches — so it shares nothing
//! with the production evaluation path beyond the model type.

#![allow(dead_code)]

use std::collections::BTreeSet;

use futura_core::formula::Formula;
use futura_core::model::{Timeline, TreeModel};
use futura_core::oracle::RandomProfile;
use futura_core::Fragment;

pub mod naive {
    use super::*;

    /// Truth by the seven clauses, verbatim. Callers must keep
    /// `i + horizon(f) <= depth`.
    pub fn holds(m: &TreeModel, tl: &Timeline, i: usize, f: &Formula) -> bool {
        match f {
            Formula::Atom(name) => m.atoms_of(tl.at(i)).any(|a| a == name),
            Formula::Top => true,
            Formula::Not(g) => !holds(m, tl, i, g),
            Formula::And(l, r) => holds(m, tl, i, l) && holds(m, tl, i, r),
            Formula::Next(g) => holds(m, tl, i + 1, g),
            Formula::All(g) => m
                .paths_from(tl.at(i))
                .all(|rho| holds(m, &tl.splice(i, &rho), i, g)),
            Formula::Upd(guard, body) => match update(m, tl.at(i), guard) {
                None => true,
                Some(updated) => {
                    let ids = tl.id_nodes(m);
                    match Timeline::from_ids(&updated, &ids) {
                        // the timeline left the updated model: not well given
                        Err(_) => true,
                        Ok(tl2) => holds(&updated, &tl2, i, body),
                    }
                }
            },
        }
    }

    /// The update definition scanned literally: a future state of `w`
    /// survives iff some full timeline through `w` and it satisfies the
    /// guard at `w`. `None` when the guard is not achievable at `w`.
    pub fn update(m: &TreeModel, w: usize, guard: &Formula) -> Option<TreeModel> {
        let i_w = m.node_depth(w);
        let satisfying: Vec<Timeline> = m
            .timelines()
            .filter(|t| t.nodes().contains(&w))
            .filter(|t| holds(m, t, i_w, guard))
            .collect();
        if satisfying.is_empty() {
            return None;
        }
        let keep: BTreeSet<usize> = (0..m.node_count())
            .filter(|&x| {
                !m.is_strict_ancestor(w, x)
                    || satisfying.iter().any(|t| t.nodes().contains(&x))
            })
            .collect();
        Some(m.restrict(&keep).expect("the survivors form a model"))
    }
}

/// A root-only model carrying the given alphabet; the seed for random
/// tree growth.
pub fn seed_model(atoms: &[&str], root_label: u64) -> TreeModel {
    use futura_core::model::{RawModel, RawNode};
    let root_atoms: Vec<String> = atoms
        .iter()
        .enumerate()
        .filter(|(i, _)| root_label & (1 << i) != 0)
        .map(|(_, a)| a.to_string())
        .collect();
    let raw = RawModel {
        root: "n0".into(),
        depth: 0,
        nodes: [(
            "n0".to_string(),
            RawNode {
                atoms: root_atoms,
                children: vec![],
            },
        )]
        .into_iter()
        .collect(),
    };
    let names: Vec<String> = atoms.iter().map(|s| s.to_string()).collect();
    TreeModel::from_raw(&raw)
        .unwrap()
        .with_alphabet(&names)
        .unwrap()
}

/// Random model of the given depth over the alphabet, deterministic per
/// seed.
pub fn random_model(atoms: &[&str], depth: usize, seed: u64) -> TreeModel {
    seed_model(atoms, seed % (1u64 << atoms.len().max(1) as u32)).extend_random(depth, seed)
}

pub fn profile(fragment: Fragment, atoms: &[&str], max_size: usize, max_horizon: u32) -> RandomProfile {
    RandomProfile {
        max_size,
        fragment,
        atoms: atoms.iter().map(|s| s.to_string()).collect(),
        max_horizon: Some(max_horizon),
    }
}

/// Deduplicated stream of seeded random formulas.
pub fn corpus(profile: &RandomProfile, count: usize) -> Vec<Formula> {
    let mut seen = BTreeSet::new();
    let mut out = Vec::with_capacity(count);
    let mut seed = 0u64;
    while out.len() < count {
        let f = futura_core::oracle::random_formula(profile, seed);
        seed += 1;
        if seen.insert(f.to_string()) {
            out.push(f);
        }
        assert!(seed < 1_000_000, "corpus generation stalled");
    }
    out
}
