//! Exhaustive enumeration of small models in a fixed canonical order.
//!
//! Every uniform-depth ordered tree with branching factors in
//! `1..=max_branch` and every atom labeling over the given alphabet
//! appears exactly once. Sibling subtrees may coincide: enumeration is
//! over ordered trees, a deliberate superset of enumeration up to
//! isomorphism.

use std::collections::VecDeque;

use super::TreeModel;

/// Number of models `enumerate_models` will yield, by the recurrence
/// `c(0) = 2^k`, `c(d) = 2^k * sum_{b=1..=B} c(d-1)^b`. `None` on
/// overflow.
pub fn count_models(num_atoms: usize, max_branch: u32, depth: usize) -> Option<u128> {
    let labels = 1u128.checked_shl(num_atoms as u32)?;
    let mut c: u128 = labels;
    for _ in 0..depth {
        let mut sum: u128 = 0;
        let mut power: u128 = 1;
        for _ in 0..max_branch {
            power = power.checked_mul(c)?;
            sum = sum.checked_add(power)?;
        }
        c = labels.checked_mul(sum)?;
    }
    Some(c)
}

/// Stream of all models at the given scale, canonically ordered.
///
/// The order is an odometer over per-node `(label, branching, children)`
/// choices: within each node the children configurations cycle fastest
/// (rightmost child first), then the branching factor, then the label.
pub fn enumerate_models(
    atoms: &[String],
    max_branch: u32,
    depth: usize,
) -> ModelEnumerator {
    assert!(max_branch >= 1, "max_branch must be at least 1");
    assert!(depth >= 1, "depth must be at least 1");
    assert!(atoms.len() <= 32, "enumeration alphabet too large");
    ModelEnumerator {
        atoms: atoms.to_vec(),
        n_labels: 1u64 << atoms.len(),
        max_branch,
        depth,
        state: SubtreeState::minimal(depth),
        started: false,
        exhausted: false,
    }
}

#[derive(Debug, Clone)]
struct SubtreeState {
    label: u64,
    children: Vec<SubtreeState>,
}

impl SubtreeState {
    fn minimal(depth: usize) -> SubtreeState {
        SubtreeState {
            label: 0,
            children: if depth == 0 {
                Vec::new()
            } else {
                vec![SubtreeState::minimal(depth - 1)]
            },
        }
    }

    /// Advance to the next configuration; on overflow, reset to minimal
    /// and return false (carry).
    fn advance(&mut self, depth: usize, n_labels: u64, max_branch: u32) -> bool {
        if depth > 0 {
            for idx in (0..self.children.len()).rev() {
                if self.children[idx].advance(depth - 1, n_labels, max_branch) {
                    return true;
                }
            }
            if (self.children.len() as u32) < max_branch {
                let b = self.children.len() + 1;
                self.children = (0..b).map(|_| SubtreeState::minimal(depth - 1)).collect();
                return true;
            }
            self.children = vec![SubtreeState::minimal(depth - 1)];
        }
        self.label += 1;
        if self.label < n_labels {
            true
        } else {
            self.label = 0;
            false
        }
    }
}

pub struct ModelEnumerator {
    atoms: Vec<String>,
    n_labels: u64,
    max_branch: u32,
    depth: usize,
    state: SubtreeState,
    started: bool,
    exhausted: bool,
}

impl ModelEnumerator {
    fn build(&self) -> TreeModel {
        let mut child_counts = Vec::new();
        let mut atom_mask = Vec::new();
        let mut queue: VecDeque<&SubtreeState> = VecDeque::new();
        queue.push_back(&self.state);
        while let Some(node) = queue.pop_front() {
            child_counts.push(node.children.len() as u32);
            atom_mask.push(node.label);
            queue.extend(node.children.iter());
        }
        TreeModel::from_bfs_parts(None, &child_counts, atom_mask, self.atoms.clone(), self.depth)
    }
}

impl Iterator for ModelEnumerator {
    type Item = TreeModel;

    fn next(&mut self) -> Option<TreeModel> {
        if self.exhausted {
            return None;
        }
        if !self.started {
            self.started = true;
            return Some(self.build());
        }
        if self
            .state
            .advance(self.depth, self.n_labels, self.max_branch)
        {
            Some(self.build())
        } else {
            self.exhausted = true;
            None
        }
    }
}

#[cfg(test)]
mod tests {
    use std::collections::HashSet;

    use super::*;
    use crate::model::validate;

    fn atoms(names: &[&str]) -> Vec<String> {
        names.iter().map(|s| s.to_string()).collect()
    }

    #[test]
    fn twelve_models_for_one_atom_branch_two_depth_one() {
        let got = enumerate_models(&atoms(&["p"]), 2, 1).count();
        assert_eq!(got, 12);
        assert_eq!(count_models(1, 2, 1), Some(12));
    }

    #[test]
    fn single_model_when_nothing_varies() {
        let got: Vec<_> = enumerate_models(&atoms(&[]), 1, 2).collect();
        assert_eq!(got.len(), 1);
        assert_eq!(got[0].node_count(), 3);
    }

    #[test]
    fn four_models_for_one_atom_chain() {
        assert_eq!(enumerate_models(&atoms(&["p"]), 1, 1).count(), 4);
        assert_eq!(count_models(1, 1, 1), Some(4));
    }

    #[test]
    fn counts_match_generation_and_no_duplicates() {
        // the spec's sweep: atoms <= 1, branching <= 2, depth <= 2
        for k in 0..=1usize {
            let names = if k == 0 { atoms(&[]) } else { atoms(&["p"]) };
            for max_branch in 1..=2 {
                for depth in 1..=2 {
                    let mut seen = HashSet::new();
                    let mut generated = 0u128;
                    for m in enumerate_models(&names, max_branch, depth) {
                        generated += 1;
                        assert!(validate(&m.to_raw()).is_empty());
                        let key = crate::model::model_to_json(&m);
                        assert!(seen.insert(key), "duplicate model");
                    }
                    assert_eq!(
                        Some(generated),
                        count_models(k, max_branch, depth),
                        "count mismatch at k={k} b={max_branch} d={depth}"
                    );
                }
            }
        }
    }

    #[test]
    fn two_atom_depth_two_count() {
        assert_eq!(count_models(2, 2, 2), Some(25_920));
        assert_eq!(enumerate_models(&atoms(&["p", "q"]), 2, 2).count(), 25_920);
    }

    #[test]
    fn enumeration_is_deterministic() {
        let a: Vec<_> = enumerate_models(&atoms(&["p"]), 2, 2)
            .map(|m| crate::model::model_to_json(&m))
            .collect();
        let b: Vec<_> = enumerate_models(&atoms(&["p"]), 2, 2)
            .map(|m| crate::model::model_to_json(&m))
            .collect();
        assert_eq!(a, b);
    }
}
