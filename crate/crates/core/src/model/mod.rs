//! Finite depth-`D` prefixes of serial trees, and the paths through them.
//!
//! An infinite serial tree is represented by its truncation to a uniform
//! leaf depth `D`: every leaf sits exactly `D` steps below the root, and
//! the model stands for any serial extension below the leaves. Evaluation
//! is only permitted when a formula cannot see past depth `D`, which makes
//! the truncation faithful.

mod enumerate;
mod json;

pub use enumerate::{count_models, enumerate_models, ModelEnumerator};
pub use json::{model_from_json, model_to_json};

use std::collections::{BTreeMap, BTreeSet};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Maximum distinct atoms per model; valuations are stored as one `u64`
/// bitmask per node.
pub const MAX_ATOMS: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ModelError {
    #[error("invalid model: {}", format_violations(.0))]
    Invalid(Vec<Violation>),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("state `{0}` has no successor")]
    NotSerial(String),
    #[error("restriction failed: {0}")]
    Restriction(String),
    #[error("bad timeline: {0}")]
    Timeline(String),
    #[error("model uses more than {MAX_ATOMS} atoms")]
    TooManyAtoms,
    #[error("malformed model file: {0}")]
    Malformed(String),
}

fn format_violations(violations: &[Violation]) -> String {
    violations
        .iter()
        .map(|v| v.to_string())
        .collect::<Vec<_>>()
        .join("; ")
}

/// A single invariant violation found by [`validate`].
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Violation {
    #[error("root `{0}` is not a declared node")]
    UnknownRoot(String),
    #[error("unreachable node `{0}`")]
    UnreachableNode(String),
    #[error("node `{parent}` references unknown child `{child}`")]
    UnknownChild { parent: String, child: String },
    #[error("node `{0}` has more than one parent")]
    MultipleParents(String),
    #[error("root `{0}` appears as a child")]
    RootHasParent(String),
    #[error("non-uniform leaf depth: `{node}` is a leaf at depth {depth}, expected {expected}")]
    NonUniformLeafDepth {
        node: String,
        depth: usize,
        expected: usize,
    },
    #[error("more than {MAX_ATOMS} distinct atoms")]
    TooManyAtoms,
}

/// Raw, unchecked model exactly as it appears in model files. This is the
/// staging form: [`validate`] reports its defects and
/// [`TreeModel::from_raw`] normalizes it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RawModel {
    pub root: String,
    pub depth: usize,
    pub nodes: BTreeMap<String, RawNode>,
}

#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct RawNode {
    #[serde(default)]
    pub atoms: Vec<String>,
    #[serde(default)]
    pub children: Vec<String>,
}

/// Check every `TreeModel` invariant on a raw model. Returns the empty
/// list when the model is well formed.
pub fn validate(raw: &RawModel) -> Vec<Violation> {
    let mut violations = Vec::new();

    if !raw.nodes.contains_key(&raw.root) {
        violations.push(Violation::UnknownRoot(raw.root.clone()));
        return violations;
    }

    let mut parent_count: BTreeMap<&str, usize> = BTreeMap::new();
    for (id, node) in &raw.nodes {
        for child in &node.children {
            if !raw.nodes.contains_key(child) {
                violations.push(Violation::UnknownChild {
                    parent: id.clone(),
                    child: child.clone(),
                });
                continue;
            }
            *parent_count.entry(child.as_str()).or_default() += 1;
        }
    }
    for (child, count) in &parent_count {
        if *count > 1 {
            violations.push(Violation::MultipleParents(child.to_string()));
        }
    }
    if parent_count.contains_key(raw.root.as_str()) {
        violations.push(Violation::RootHasParent(raw.root.clone()));
    }

    // Reachability and leaf depths, walking only sane edges.
    let mut depth_of: BTreeMap<&str, usize> = BTreeMap::new();
    let mut queue = std::collections::VecDeque::new();
    depth_of.insert(raw.root.as_str(), 0);
    queue.push_back(raw.root.as_str());
    while let Some(id) = queue.pop_front() {
        let depth = depth_of[id];
        for child in &raw.nodes[id].children {
            if raw.nodes.contains_key(child) && !depth_of.contains_key(child.as_str()) {
                depth_of.insert(child.as_str(), depth + 1);
                queue.push_back(child.as_str());
            }
        }
    }
    for (id, node) in &raw.nodes {
        match depth_of.get(id.as_str()) {
            None => violations.push(Violation::UnreachableNode(id.clone())),
            Some(&depth) => {
                if node.children.is_empty() && depth != raw.depth {
                    violations.push(Violation::NonUniformLeafDepth {
                        node: id.clone(),
                        depth,
                        expected: raw.depth,
                    });
                }
                if depth > raw.depth {
                    violations.push(Violation::NonUniformLeafDepth {
                        node: id.clone(),
                        depth,
                        expected: raw.depth,
                    });
                }
            }
        }
    }

    let alphabet: BTreeSet<&str> = raw
        .nodes
        .values()
        .flat_map(|n| n.atoms.iter().map(|a| a.as_str()))
        .collect();
    if alphabet.len() > MAX_ATOMS {
        violations.push(Violation::TooManyAtoms);
    }

    violations.sort_by_key(|v| v.to_string());
    violations.dedup();
    violations
}

/// Node identifiers. Enumerated and unfolded models use positional ids
/// `n0, n1, ...` in breadth-first order and skip storing the strings.
#[derive(Debug, Clone)]
enum IdScheme {
    Generated,
    Named(Vec<String>),
}

/// A uniform-depth truncation of a serial tree: ordered tree plus a
/// per-node atom valuation. Nodes are indexed in breadth-first order with
/// the root at index 0, so the children of any node form a contiguous
/// index range. Immutable after construction.
#[derive(Debug, Clone)]
pub struct TreeModel {
    ids: IdScheme,
    /// `first_child[i]..first_child[i + 1]` are the children of node `i`.
    first_child: Vec<u32>,
    parent: Vec<u32>,
    depth_of: Vec<u16>,
    atom_mask: Vec<u64>,
    atom_names: Vec<String>,
    depth: usize,
}

impl PartialEq for TreeModel {
    /// Node-for-node equality: ids, tree structure and per-node
    /// valuations. Alphabets are compared by content, not declaration, so
    /// a restriction that drops an atom's last occurrence still equals a
    /// model built without that atom.
    fn eq(&self, other: &Self) -> bool {
        self.depth == other.depth
            && self.first_child == other.first_child
            && (0..self.node_count()).all(|i| {
                self.id_of(i) == other.id_of(i)
                    && self.atoms_of(i).eq(other.atoms_of(i))
            })
    }
}

impl Eq for TreeModel {}

impl TreeModel {
    /// Validate and normalize a raw model.
    pub fn from_raw(raw: &RawModel) -> Result<TreeModel, ModelError> {
        let violations = validate(raw);
        if !violations.is_empty() {
            return Err(ModelError::Invalid(violations));
        }
        let atom_names: Vec<String> = raw
            .nodes
            .values()
            .flat_map(|n| n.atoms.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        let atom_index: BTreeMap<&str, usize> = atom_names
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();

        // Breadth-first renumbering, preserving child order.
        let mut order: Vec<&str> = vec![raw.root.as_str()];
        let mut cursor = 0;
        while cursor < order.len() {
            let id = order[cursor];
            cursor += 1;
            for child in &raw.nodes[id].children {
                order.push(child.as_str());
            }
        }

        let child_counts: Vec<u32> = order
            .iter()
            .map(|id| raw.nodes[*id].children.len() as u32)
            .collect();
        let atom_mask: Vec<u64> = order
            .iter()
            .map(|id| {
                raw.nodes[*id]
                    .atoms
                    .iter()
                    .fold(0u64, |m, a| m | 1 << atom_index[a.as_str()])
            })
            .collect();
        let ids: Vec<String> = order.iter().map(|s| s.to_string()).collect();
        Ok(TreeModel::from_bfs_parts(
            Some(ids),
            &child_counts,
            atom_mask,
            atom_names,
            raw.depth,
        ))
    }

    /// Internal constructor for generators that already produce
    /// breadth-first layouts.
    pub(crate) fn from_bfs_parts(
        ids: Option<Vec<String>>,
        child_counts: &[u32],
        atom_mask: Vec<u64>,
        atom_names: Vec<String>,
        depth: usize,
    ) -> TreeModel {
        let n = child_counts.len();
        let mut first_child = Vec::with_capacity(n + 1);
        let mut acc = 1u32;
        first_child.push(acc);
        for &c in child_counts {
            acc += c;
            first_child.push(acc);
        }
        debug_assert_eq!(acc as usize, n);
        let mut parent = vec![0u32; n];
        let mut depth_of = vec![0u16; n];
        for i in 0..n {
            for c in first_child[i]..first_child[i + 1] {
                parent[c as usize] = i as u32;
                depth_of[c as usize] = depth_of[i] + 1;
            }
        }
        TreeModel {
            ids: match ids {
                Some(v) => IdScheme::Named(v),
                None => IdScheme::Generated,
            },
            first_child,
            parent,
            depth_of,
            atom_mask,
            atom_names,
            depth,
        }
    }

    pub fn node_count(&self) -> usize {
        self.parent.len()
    }

    /// Uniform leaf depth `D`.
    pub fn depth(&self) -> usize {
        self.depth
    }

    /// Root index; always 0.
    pub fn root(&self) -> usize {
        0
    }

    pub fn id_of(&self, node: usize) -> String {
        match &self.ids {
            IdScheme::Generated => format!("n{node}"),
            IdScheme::Named(names) => names[node].clone(),
        }
    }

    pub fn node_index(&self, id: &str) -> Option<usize> {
        match &self.ids {
            IdScheme::Generated => {
                let rest = id.strip_prefix('n')?;
                let idx: usize = rest.parse().ok()?;
                // Reject non-canonical spellings like "n01".
                if idx.to_string() != rest || idx >= self.node_count() {
                    None
                } else {
                    Some(idx)
                }
            }
            IdScheme::Named(names) => names.iter().position(|n| n == id),
        }
    }

    pub fn children(&self, node: usize) -> std::ops::Range<usize> {
        self.first_child[node] as usize..self.first_child[node + 1] as usize
    }

    pub fn parent(&self, node: usize) -> Option<usize> {
        if node == 0 {
            None
        } else {
            Some(self.parent[node] as usize)
        }
    }

    pub fn node_depth(&self, node: usize) -> usize {
        self.depth_of[node] as usize
    }

    pub fn is_leaf(&self, node: usize) -> bool {
        self.children(node).is_empty()
    }

    /// Alphabet of the model, sorted.
    pub fn atom_names(&self) -> &[String] {
        &self.atom_names
    }

    /// Valuation of a node as a bitmask over [`TreeModel::atom_names`].
    pub fn atom_mask(&self, node: usize) -> u64 {
        self.atom_mask[node]
    }

    pub fn atoms_of(&self, node: usize) -> impl Iterator<Item = &str> {
        let mask = self.atom_mask[node];
        self.atom_names
            .iter()
            .enumerate()
            .filter(move |(i, _)| mask & (1 << i) != 0)
            .map(|(_, name)| name.as_str())
    }

    /// True if `ancestor` lies strictly above `node` on its history.
    pub fn is_strict_ancestor(&self, ancestor: usize, node: usize) -> bool {
        let mut cur = node;
        while let Some(p) = self.parent(cur) {
            if p == ancestor {
                return true;
            }
            cur = p;
        }
        false
    }

    /// The unique root-to-node sequence, inclusive of both ends.
    pub fn history(&self, node: usize) -> Vec<usize> {
        let mut out = Vec::with_capacity(self.node_depth(node) + 1);
        let mut cur = node;
        out.push(cur);
        while let Some(p) = self.parent(cur) {
            out.push(p);
            cur = p;
        }
        out.reverse();
        out
    }

    /// All descending node-to-leaf sequences starting at `node`.
    pub fn paths_from(&self, node: usize) -> PathsFrom<'_> {
        assert!(node < self.node_count(), "node index out of range");
        PathsFrom {
            model: self,
            stack: vec![node],
            path: Vec::new(),
            done: false,
        }
    }

    /// All root-to-leaf branches, in canonical (depth-first) order.
    pub fn timelines(&self) -> impl Iterator<Item = Timeline> + '_ {
        self.paths_from(0).map(|branch| Timeline { branch })
    }

    /// Restriction to `keep`. Requires the root to be kept and the removed
    /// set to be closed under children; the result must again be a model.
    pub fn restrict(&self, keep: &BTreeSet<usize>) -> Result<TreeModel, ModelError> {
        if !keep.contains(&0) {
            return Err(ModelError::Restriction(format!(
                "root `{}` is not kept",
                self.id_of(0)
            )));
        }
        for node in 0..self.node_count() {
            if !keep.contains(&node) {
                for child in self.children(node) {
                    if keep.contains(&child) {
                        return Err(ModelError::Restriction(format!(
                            "removed set is not closed under children: `{}` is removed but its child `{}` is kept",
                            self.id_of(node),
                            self.id_of(child)
                        )));
                    }
                }
            }
        }
        let model = self.restrict_unchecked(keep);
        // the survivors must still form a uniform-depth serial prefix
        let violations = validate(&model.to_raw());
        if violations.is_empty() {
            Ok(model)
        } else {
            Err(ModelError::Restriction(format!(
                "result is not a model: {}",
                format_violations(&violations)
            )))
        }
    }

    pub(crate) fn restrict_unchecked(&self, keep: &BTreeSet<usize>) -> TreeModel {
        // Kept nodes in original BFS order remain in BFS order.
        let order: Vec<usize> = (0..self.node_count()).filter(|n| keep.contains(n)).collect();
        let child_counts: Vec<u32> = order
            .iter()
            .map(|&n| self.children(n).filter(|c| keep.contains(c)).count() as u32)
            .collect();
        let atom_mask: Vec<u64> = order.iter().map(|&n| self.atom_mask[n]).collect();
        let ids: Vec<String> = order.iter().map(|&n| self.id_of(n)).collect();
        TreeModel::from_bfs_parts(
            Some(ids),
            &child_counts,
            atom_mask,
            self.atom_names.clone(),
            self.depth,
        )
    }

    /// The submodel generated by `node`: that node, everything below it,
    /// and nothing else, re-rooted with depth shrunk accordingly.
    pub fn generated_submodel(&self, node: usize) -> TreeModel {
        assert!(node < self.node_count(), "node index out of range");
        let mut order = vec![node];
        let mut cursor = 0;
        while cursor < order.len() {
            let n = order[cursor];
            cursor += 1;
            order.extend(self.children(n));
        }
        let child_counts: Vec<u32> = order
            .iter()
            .map(|&n| self.children(n).len() as u32)
            .collect();
        let atom_mask = order.iter().map(|&n| self.atom_mask[n]).collect();
        let ids = order.iter().map(|&n| self.id_of(n)).collect();
        TreeModel::from_bfs_parts(
            Some(ids),
            &child_counts,
            atom_mask,
            self.atom_names.clone(),
            self.depth - self.node_depth(node),
        )
    }

    /// Deepen the model by `extra` levels, attaching seeded-random
    /// subtrees (branching 1..=2, labels over the model's alphabet) below
    /// every old leaf. Existing nodes and valuations are untouched.
    pub fn extend_random(&self, extra: usize, seed: u64) -> TreeModel {
        if extra == 0 {
            return self.clone();
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let label_space = 1u128 << self.atom_names.len().min(MAX_ATOMS);

        let mut child_counts: Vec<u32> = (0..self.node_count())
            .map(|n| self.children(n).len() as u32)
            .collect();
        let mut atom_mask = self.atom_mask.clone();
        let mut names: Vec<String> = (0..self.node_count()).map(|n| self.id_of(n)).collect();
        let taken: BTreeSet<String> = names.iter().cloned().collect();

        let mut fresh = 0usize;
        let mut fresh_id = || loop {
            let candidate = format!("e{fresh}");
            fresh += 1;
            if !taken.contains(&candidate) {
                return candidate;
            }
        };

        // Grow level by level so the breadth-first layout stays valid.
        let mut frontier: Vec<usize> = (0..self.node_count())
            .filter(|&n| self.is_leaf(n))
            .collect();
        for _ in 0..extra {
            let mut next_frontier = Vec::new();
            for &leaf in &frontier {
                let branching = rng.gen_range(1..=2u32);
                child_counts[leaf] = branching;
                for _ in 0..branching {
                    let idx = child_counts.len();
                    child_counts.push(0);
                    atom_mask.push((rng.gen_range(0..label_space)) as u64);
                    names.push(fresh_id());
                    next_frontier.push(idx);
                }
            }
            frontier = next_frontier;
        }
        TreeModel::from_bfs_parts(
            Some(names),
            &child_counts,
            atom_mask,
            self.atom_names.clone(),
            self.depth + extra,
        )
    }

    /// Same model over a wider alphabet. Atom domains are global, so a
    /// model may declare atoms no node carries; random extension then
    /// draws labels from the declared alphabet.
    pub fn with_alphabet(&self, atoms: &[String]) -> Result<TreeModel, ModelError> {
        let mut names: Vec<String> = atoms.to_vec();
        names.extend(self.atom_names.iter().cloned());
        names.sort();
        names.dedup();
        if names.len() > MAX_ATOMS {
            return Err(ModelError::TooManyAtoms);
        }
        let atom_mask = (0..self.node_count())
            .map(|n| {
                self.atoms_of(n).fold(0u64, |m, a| {
                    m | 1 << names.iter().position(|x| x == a).unwrap()
                })
            })
            .collect();
        let mut out = self.clone();
        out.atom_mask = atom_mask;
        out.atom_names = names;
        Ok(out)
    }

    /// Export to the raw file form.
    pub fn to_raw(&self) -> RawModel {
        let nodes = (0..self.node_count())
            .map(|n| {
                (
                    self.id_of(n),
                    RawNode {
                        atoms: self.atoms_of(n).map(str::to_string).collect(),
                        children: self.children(n).map(|c| self.id_of(c)).collect(),
                    },
                )
            })
            .collect();
        RawModel {
            root: self.id_of(0),
            depth: self.depth,
            nodes,
        }
    }
}

/// Iterator over descending node-to-leaf sequences (depth-first, children
/// in order).
pub struct PathsFrom<'m> {
    model: &'m TreeModel,
    stack: Vec<usize>,
    path: Vec<usize>,
    done: bool,
}

impl Iterator for PathsFrom<'_> {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        loop {
            // Descend along first children to the next leaf.
            let cur = *self.stack.last()?;
            self.path.push(cur);
            if self.model.is_leaf(cur) {
                let out = self.path.clone();
                self.advance();
                return Some(out);
            }
            self.stack.push(self.model.children(cur).start);
        }
    }
}

impl PathsFrom<'_> {
    fn advance(&mut self) {
        // Backtrack to the deepest node with an unvisited right sibling.
        loop {
            let Some(cur) = self.stack.pop() else {
                self.done = true;
                return;
            };
            self.path.pop();
            let Some(&parent) = self.stack.last() else {
                self.done = true;
                return;
            };
            let siblings = self.model.children(parent);
            if cur + 1 < siblings.end {
                self.stack.push(cur + 1);
                return;
            }
        }
    }
}

/// A root-to-leaf branch: the finite stand-in for a timeline of the
/// underlying infinite tree. Indexing follows the paper's conventions:
/// position `i` is the `i+1`-th node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Timeline {
    branch: Vec<usize>,
}

impl Timeline {
    /// Build from node indices, checking that it is a root-to-leaf branch
    /// of `model`.
    pub fn new(model: &TreeModel, branch: Vec<usize>) -> Result<Timeline, ModelError> {
        if branch.first() != Some(&model.root()) {
            return Err(ModelError::Timeline("must start at the root".into()));
        }
        for pair in branch.windows(2) {
            if model.parent(pair[1]) != Some(pair[0]) {
                return Err(ModelError::Timeline(format!(
                    "`{}` is not a child of `{}`",
                    model.id_of(pair[1]),
                    model.id_of(pair[0])
                )));
            }
        }
        let last = *branch.last().unwrap();
        if !model.is_leaf(last) {
            return Err(ModelError::Timeline(format!(
                "`{}` is not a leaf",
                model.id_of(last)
            )));
        }
        Ok(Timeline { branch })
    }

    /// Build from node ids.
    pub fn from_ids(model: &TreeModel, ids: &[String]) -> Result<Timeline, ModelError> {
        let branch = ids
            .iter()
            .map(|id| {
                model
                    .node_index(id)
                    .ok_or_else(|| ModelError::UnknownNode(id.clone()))
            })
            .collect::<Result<Vec<_>, _>>()?;
        Timeline::new(model, branch)
    }

    /// Position access: the node at position `i`.
    pub fn at(&self, i: usize) -> usize {
        self.branch[i]
    }

    pub fn len(&self) -> usize {
        self.branch.len()
    }

    pub fn is_empty(&self) -> bool {
        self.branch.is_empty()
    }

    /// The prefix up to and including position `i`.
    pub fn prefix(&self, i: usize) -> &[usize] {
        &self.branch[..=i]
    }

    /// The suffix from position `i` on.
    pub fn suffix(&self, i: usize) -> &[usize] {
        &self.branch[i..]
    }

    pub fn nodes(&self) -> &[usize] {
        &self.branch
    }

    /// Concatenation of a history with a descending path that starts at
    /// the history's last node: the history contributes everything before
    /// the junction, the path everything from it on.
    pub fn concat(history: &[usize], path: &[usize]) -> Timeline {
        debug_assert_eq!(history.last(), path.first());
        let mut branch = Vec::with_capacity(history.len() + path.len() - 1);
        branch.extend_from_slice(&history[..history.len() - 1]);
        branch.extend_from_slice(path);
        Timeline { branch }
    }

    /// `prefix(i)` concatenated with a path starting at the node at
    /// position `i`: the timeline obtained by rerouting the future.
    pub fn splice(&self, i: usize, path: &[usize]) -> Timeline {
        Timeline::concat(self.prefix(i), path)
    }

    pub fn id_nodes(&self, model: &TreeModel) -> Vec<String> {
        self.branch.iter().map(|&n| model.id_of(n)).collect()
    }
}

/// A finite serial directed graph with an initial state: the compact
/// generator for serial trees by unfolding.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct KripkeSpec {
    pub initial: String,
    /// state -> successor states; must be nonempty for every state.
    pub edges: BTreeMap<String, Vec<String>>,
    /// state -> atoms true there.
    pub atoms: BTreeMap<String, BTreeSet<String>>,
}

impl KripkeSpec {
    pub fn check_serial(&self) -> Result<(), ModelError> {
        if !self.edges.contains_key(&self.initial) {
            return Err(ModelError::UnknownNode(self.initial.clone()));
        }
        for (state, succs) in &self.edges {
            if succs.is_empty() {
                return Err(ModelError::NotSerial(state.clone()));
            }
            for succ in succs {
                if !self.edges.contains_key(succ) {
                    return Err(ModelError::UnknownNode(succ.clone()));
                }
            }
        }
        Ok(())
    }

    /// Unfold into the tree of paths of length `depth` from the initial
    /// state. Nodes take their state's valuation; ids are positional.
    pub fn unfold(&self, depth: usize) -> Result<TreeModel, ModelError> {
        self.check_serial()?;
        let atom_names: Vec<String> = self
            .atoms
            .values()
            .flat_map(|set| set.iter().cloned())
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect();
        if atom_names.len() > MAX_ATOMS {
            return Err(ModelError::TooManyAtoms);
        }
        let atom_index: BTreeMap<&str, usize> = atom_names
            .iter()
            .enumerate()
            .map(|(i, a)| (a.as_str(), i))
            .collect();
        let mask_of = |state: &str| -> u64 {
            self.atoms
                .get(state)
                .map(|set| {
                    set.iter()
                        .fold(0u64, |m, a| m | 1 << atom_index[a.as_str()])
                })
                .unwrap_or(0)
        };

        // Breadth-first unfolding: the queue order is the node order.
        let mut states: Vec<&str> = vec![self.initial.as_str()];
        let mut level: Vec<usize> = vec![0];
        let mut child_counts: Vec<u32> = Vec::new();
        let mut cursor = 0;
        while cursor < states.len() {
            let state = states[cursor];
            let d = level[cursor];
            cursor += 1;
            if d == depth {
                child_counts.push(0);
                continue;
            }
            let succs = &self.edges[state];
            child_counts.push(succs.len() as u32);
            for succ in succs {
                states.push(succ);
                level.push(d + 1);
            }
        }
        let atom_mask = states.iter().map(|s| mask_of(s)).collect();
        Ok(TreeModel::from_bfs_parts(
            None,
            &child_counts,
            atom_mask,
            atom_names,
            depth,
        ))
    }
}
