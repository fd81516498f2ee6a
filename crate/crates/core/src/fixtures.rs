//! Small canonical models used by tests, benchmarks and the demo.

use std::collections::BTreeMap;

use crate::model::{RawModel, RawNode, TreeModel};

fn raw(root: &str, depth: usize, nodes: &[(&str, &[&str], &[&str])]) -> RawModel {
    let nodes: BTreeMap<String, RawNode> = nodes
        .iter()
        .map(|(id, atoms, children)| {
            (
                id.to_string(),
                RawNode {
                    atoms: atoms.iter().map(|a| a.to_string()).collect(),
                    children: children.iter().map(|c| c.to_string()).collect(),
                },
            )
        })
        .collect();
    RawModel {
        root: root.to_string(),
        depth,
        nodes,
    }
}

/// The running example model: a branching tree over atoms `p`, `q`, `r`,
/// truncated to uniform depth 3. Padding nodes `u1`, `u2`, `s1` stand in
/// for the elided subtrees below `u` and `s`.
///
/// ```text
/// w0{q} -> u{p}  -> u1{} -> u2{}
///       -> w1{q} -> w2{q} -> w3{q}
///                         -> v{r}
///                -> s{r}  -> s1{}
/// ```
pub fn figure_one_model() -> TreeModel {
    TreeModel::from_raw(&raw(
        "w0",
        3,
        &[
            ("w0", &["q"], &["u", "w1"]),
            ("u", &["p"], &["u1"]),
            ("u1", &[], &["u2"]),
            ("u2", &[], &[]),
            ("w1", &["q"], &["w2", "s"]),
            ("w2", &["q"], &["w3", "v"]),
            ("w3", &["q"], &[]),
            ("v", &["r"], &[]),
            ("s", &["r"], &["s1"]),
            ("s1", &[], &[]),
        ],
    ))
    .expect("fixture is valid")
}

/// What remains of [`figure_one_model`] after updating at `w0` with
/// `X q & X X ~r`: the `u` and `s` subtrees are gone.
pub fn figure_two_model() -> TreeModel {
    TreeModel::from_raw(&raw(
        "w0",
        3,
        &[
            ("w0", &["q"], &["w1"]),
            ("w1", &["q"], &["w2"]),
            ("w2", &["q"], &["w3", "v"]),
            ("w3", &["q"], &[]),
            ("v", &["r"], &[]),
        ],
    ))
    .expect("fixture is valid")
}

/// The two-branch future of the sea-battle puzzle: tomorrow either brings
/// a battle (`s`) or not, padded to uniform depth 2.
pub fn sea_battle_model() -> TreeModel {
    TreeModel::from_raw(&raw(
        "w0",
        2,
        &[
            ("w0", &[], &["u1", "u2"]),
            ("u1", &["s"], &["v1"]),
            ("u2", &[], &["v2"]),
            ("v1", &[], &[]),
            ("v2", &[], &[]),
        ],
    ))
    .expect("fixture is valid")
}
