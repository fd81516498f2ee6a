//! Truth evaluation at `(model, timeline, position)`, achievability, and
//! the announcement update of the underlying paper's Definition 2.
//!
//! The evaluator works over *views*: immutable alive-node masks layered
//! on a base model, so that updating never copies the tree. A formula is
//! first compiled against the model alphabet; evaluation then only needs
//! the current node plus the next `horizon` timeline nodes (its
//! *window*), which is what makes depth-truncated models faithful.
//!
//! Updating at `w` with guard `phi` (sight depth `n`) decides survival by
//! scanning the distance-`n` descendants of `w`: all timelines through
//! such a descendant share their first `n` steps after `w`, hence agree
//! on the guard, so one evaluation per descendant settles a whole bundle
//! of timelines, and nodes deeper than `n` inherit survival from their
//! distance-`n` ancestor.

use std::collections::BTreeSet;

use smallvec::SmallVec;
use thiserror::Error;

use crate::formula::{Formula, FragmentError};
use crate::model::{ModelError, Timeline, TreeModel};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    /// The formula can see past the truncation depth; evaluation is
    /// refused rather than silently truncated.
    #[error(
        "horizon exceeded: position {position} + horizon {horizon} > model depth {depth}"
    )]
    HorizonExceeded {
        position: usize,
        horizon: usize,
        depth: usize,
    },
    #[error("timeline does not belong to the model: {0}")]
    TimelineMismatch(String),
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Result of updating a model at a node with an achievable guard, or the
/// marker that the guard was not achievable there.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum UpdateOutcome {
    Defined {
        model: TreeModel,
        /// Exactly the deleted future nodes, by id. Derived data for
        /// display; never an input.
        removed: BTreeSet<String>,
    },
    /// The guard is not achievable at the node, so no updated model
    /// exists.
    Undefined,
}

impl UpdateOutcome {
    pub fn is_defined(&self) -> bool {
        matches!(self, UpdateOutcome::Defined { .. })
    }
}

/// Truth of `f` at position `i` of `timeline`.
///
/// `A` quantifies over the alive descending paths from the current node,
/// spliced onto the timeline's history; `[phi] psi` is vacuously true
/// when the update is undefined or the timeline does not survive it.
pub fn holds(
    model: &TreeModel,
    timeline: &Timeline,
    i: usize,
    f: &Formula,
) -> Result<bool, EvalError> {
    let compiled = compile(f, model.atom_names());
    let mut ev = Evaluator::new(model, &compiled);
    ev.holds(timeline, i)
}

/// True iff some timeline through `node` satisfies `f` at `node`. The
/// guard must be `A`-free.
pub fn achievable(model: &TreeModel, node: usize, f: &Formula) -> Result<bool, EvalError> {
    let compiled = compile_guard(f, model)?;
    check_node_horizon(model, node, compiled.root_horizon())?;
    let mut ev = Evaluator::new(model, &compiled);
    Ok(ev.achievable_at(BASE_VIEW, node))
}

/// The announcement update: deletes every future node of `node` through
/// which no `f`-satisfying timeline passes.
pub fn update(model: &TreeModel, node: usize, f: &Formula) -> Result<UpdateOutcome, EvalError> {
    let compiled = compile_guard(f, model)?;
    check_node_horizon(model, node, compiled.root_horizon())?;
    let mut ev = Evaluator::new(model, &compiled);
    match ev.update_at(BASE_VIEW, node) {
        None => Ok(UpdateOutcome::Undefined),
        Some(view) => {
            let alive = ev.view_mask(view).clone();
            let keep: BTreeSet<usize> =
                (0..model.node_count()).filter(|&n| alive.contains(n)).collect();
            let removed = (0..model.node_count())
                .filter(|&n| !alive.contains(n))
                .map(|n| model.id_of(n))
                .collect();
            let updated = model.restrict_unchecked(&keep);
            debug_assert!(crate::model::validate(&updated.to_raw()).is_empty());
            Ok(UpdateOutcome::Defined {
                model: updated,
                removed,
            })
        }
    }
}

/// True iff the update is defined and every node of `timeline` survives
/// it: the timeline remains a path of the updated model.
pub fn well_given(
    model: &TreeModel,
    node: usize,
    f: &Formula,
    timeline: &Timeline,
) -> Result<bool, EvalError> {
    let compiled = compile_guard(f, model)?;
    check_node_horizon(model, node, compiled.root_horizon())?;
    check_timeline(model, timeline)?;
    let mut ev = Evaluator::new(model, &compiled);
    match ev.update_at(BASE_VIEW, node) {
        None => Ok(false),
        Some(view) => {
            let mask = ev.view_mask(view);
            Ok(timeline.nodes().iter().all(|&n| mask.contains(n)))
        }
    }
}

fn compile_guard(f: &Formula, model: &TreeModel) -> Result<CompiledFormula, EvalError> {
    if f.contains_all() {
        return Err(FragmentError {
            formula: f.to_string(),
            required: crate::formula::Fragment::XAnnounce,
            reason: "guards of achievability and update may not contain A".into(),
        }
        .into());
    }
    Ok(compile(f, model.atom_names()))
}

fn check_node_horizon(model: &TreeModel, node: usize, horizon: usize) -> Result<(), EvalError> {
    if node >= model.node_count() {
        return Err(ModelError::UnknownNode(format!("#{node}")).into());
    }
    let position = model.node_depth(node);
    if position + horizon > model.depth() {
        return Err(EvalError::HorizonExceeded {
            position,
            horizon,
            depth: model.depth(),
        });
    }
    Ok(())
}

fn check_timeline(model: &TreeModel, timeline: &Timeline) -> Result<(), EvalError> {
    let nodes = timeline.nodes();
    let bad = |msg: String| Err(EvalError::TimelineMismatch(msg));
    if nodes.len() != model.depth() + 1 {
        return bad(format!(
            "length {} does not match depth {}",
            nodes.len(),
            model.depth()
        ));
    }
    if nodes[0] != model.root() {
        return bad("does not start at the root".into());
    }
    for pair in nodes.windows(2) {
        if pair[1] >= model.node_count() || model.parent(pair[1]) != Some(pair[0]) {
            return bad(format!("#{} is not a child of #{}", pair[1], pair[0]));
        }
    }
    Ok(())
}

// ---------------------------------------------------------------------
// Compiled formulas
// ---------------------------------------------------------------------

#[derive(Debug, Clone, Copy)]
enum COp {
    /// Resolved against the model alphabet; an atom absent from the
    /// alphabet compiles to mask 0 (everywhere false).
    Atom(u64),
    Top,
    Not(u32),
    And(u32, u32),
    Next(u32),
    All(u32),
    Upd(u32, u32),
}

/// A formula flattened to postorder ops with per-op horizons and dense
/// numbering of the `Upd`/`All` ops for cache addressing.
pub(crate) struct CompiledFormula {
    ops: Vec<COp>,
    horizon: Vec<u32>,
    /// Dense index per op; `u32::MAX` when the op is not of that kind.
    upd_slot: Vec<u32>,
    all_slot: Vec<u32>,
    n_upd: usize,
    n_all: usize,
}

pub(crate) fn compile(f: &Formula, alphabet: &[String]) -> CompiledFormula {
    let mut c = CompiledFormula {
        ops: Vec::new(),
        horizon: Vec::new(),
        upd_slot: Vec::new(),
        all_slot: Vec::new(),
        n_upd: 0,
        n_all: 0,
    };
    compile_into(f, alphabet, &mut c);
    c
}

fn compile_into(f: &Formula, alphabet: &[String], c: &mut CompiledFormula) -> u32 {
    let (op, horizon) = match f {
        Formula::Atom(name) => {
            let bit = alphabet
                .iter()
                .position(|a| a == name)
                .map(|i| 1u64 << i)
                .unwrap_or(0);
            (COp::Atom(bit), 0)
        }
        Formula::Top => (COp::Top, 0),
        Formula::Not(g) => {
            let a = compile_into(g, alphabet, c);
            (COp::Not(a), c.horizon[a as usize])
        }
        Formula::And(l, r) => {
            let a = compile_into(l, alphabet, c);
            let b = compile_into(r, alphabet, c);
            (
                COp::And(a, b),
                c.horizon[a as usize].max(c.horizon[b as usize]),
            )
        }
        Formula::Next(g) => {
            let a = compile_into(g, alphabet, c);
            (COp::Next(a), c.horizon[a as usize] + 1)
        }
        Formula::All(g) => {
            let a = compile_into(g, alphabet, c);
            (COp::All(a), c.horizon[a as usize])
        }
        Formula::Upd(guard, body) => {
            let a = compile_into(guard, alphabet, c);
            let b = compile_into(body, alphabet, c);
            (
                COp::Upd(a, b),
                c.horizon[a as usize].max(c.horizon[b as usize]),
            )
        }
    };
    let idx = c.ops.len() as u32;
    c.upd_slot.push(match op {
        COp::Upd(..) => {
            c.n_upd += 1;
            (c.n_upd - 1) as u32
        }
        _ => u32::MAX,
    });
    c.all_slot.push(match op {
        COp::All(_) => {
            c.n_all += 1;
            (c.n_all - 1) as u32
        }
        _ => u32::MAX,
    });
    c.ops.push(op);
    c.horizon.push(horizon);
    idx
}

impl CompiledFormula {
    fn root(&self) -> u32 {
        (self.ops.len() - 1) as u32
    }

    pub(crate) fn root_horizon(&self) -> usize {
        self.horizon[self.root() as usize] as usize
    }
}

// ---------------------------------------------------------------------
// Node masks
// ---------------------------------------------------------------------

/// Set of node indices, one bit per node. Models small enough for the
/// oracle fit in a single word.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct NodeMask {
    words: SmallVec<[u64; 1]>,
}

impl NodeMask {
    fn full(n: usize) -> NodeMask {
        let n_words = n.div_ceil(64).max(1);
        let mut words = SmallVec::from_elem(u64::MAX, n_words);
        let used = n % 64;
        if used != 0 {
            *words.last_mut().unwrap() = (1u64 << used) - 1;
        }
        if n == 0 {
            words[0] = 0;
        }
        NodeMask { words }
    }

    fn empty(n: usize) -> NodeMask {
        NodeMask {
            words: SmallVec::from_elem(0, n.div_ceil(64).max(1)),
        }
    }

    pub(crate) fn contains(&self, i: usize) -> bool {
        self.words[i / 64] & (1 << (i % 64)) != 0
    }

    fn set(&mut self, i: usize) {
        self.words[i / 64] |= 1 << (i % 64);
    }

    /// `self &= !other`
    fn subtract(&mut self, other: &NodeMask) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w &= !o;
        }
    }

    /// `self |= a & b`
    fn union_intersection(&mut self, a: &NodeMask, b: &NodeMask) {
        for ((w, x), y) in self.words.iter_mut().zip(&a.words).zip(&b.words) {
            *w |= x & y;
        }
    }

    /// `self |= other`
    fn union_with(&mut self, other: &NodeMask) {
        for (w, o) in self.words.iter_mut().zip(&other.words) {
            *w |= o;
        }
    }
}

// ---------------------------------------------------------------------
// Evaluator
// ---------------------------------------------------------------------

pub(crate) const BASE_VIEW: u32 = 0;

const SLOT_UNKNOWN: u32 = u32::MAX;
const SLOT_UNDEFINED: u32 = u32::MAX - 1;

struct ViewCaches {
    /// `(upd_slot, node) -> SLOT_UNKNOWN | SLOT_UNDEFINED | view id`
    upd: Vec<u32>,
    /// `(all_slot, node) -> 0 unknown | 1 false | 2 true`
    all: Vec<u8>,
}

/// Reusable evaluation session for one `(model, formula)` pair. Caches
/// updates and `A`-subformula truths per node, which is sound because a
/// tree node has a unique history.
pub(crate) struct Evaluator<'a> {
    model: &'a TreeModel,
    compiled: &'a CompiledFormula,
    /// `subtree[n]` = n plus all its descendants.
    subtree: Vec<NodeMask>,
    views: Vec<NodeMask>,
    caches: Vec<ViewCaches>,
    window_buf: Vec<usize>,
}

impl<'a> Evaluator<'a> {
    pub(crate) fn new(model: &'a TreeModel, compiled: &'a CompiledFormula) -> Evaluator<'a> {
        let n = model.node_count();
        // children always carry larger breadth-first indices, so a single
        // reverse pass suffices
        let mut subtree = vec![NodeMask::empty(n); n];
        for node in (0..n).rev() {
            let mut mask = NodeMask::empty(n);
            mask.set(node);
            for child in model.children(node) {
                mask.union_with(&subtree[child]);
            }
            subtree[node] = mask;
        }
        let mut ev = Evaluator {
            model,
            compiled,
            subtree,
            views: Vec::with_capacity(4),
            caches: Vec::with_capacity(4),
            window_buf: Vec::with_capacity(8),
        };
        ev.push_view(NodeMask::full(n));
        ev
    }

    fn push_view(&mut self, mask: NodeMask) -> u32 {
        let id = self.views.len() as u32;
        self.views.push(mask);
        let n = self.model.node_count();
        self.caches.push(ViewCaches {
            upd: vec![SLOT_UNKNOWN; self.compiled.n_upd * n],
            all: vec![0; self.compiled.n_all * n],
        });
        id
    }

    pub(crate) fn view_mask(&self, view: u32) -> &NodeMask {
        &self.views[view as usize]
    }

    /// Truth at a position of a full timeline; the public entry point.
    pub(crate) fn holds(&mut self, timeline: &Timeline, i: usize) -> Result<bool, EvalError> {
        check_timeline(self.model, timeline)?;
        let h = self.compiled.root_horizon();
        if i + h > self.model.depth() {
            return Err(EvalError::HorizonExceeded {
                position: i,
                horizon: h,
                depth: self.model.depth(),
            });
        }
        let window = &timeline.nodes()[i + 1..=i + h];
        Ok(self.eval(BASE_VIEW, timeline.at(i), window, self.compiled.root()))
    }

    /// Invariants: every `window` node is alive in `view`, descends from
    /// `node` in an unbroken chain, and `window.len() >= horizon(op)`.
    fn eval(&mut self, view: u32, node: usize, window: &[usize], op: u32) -> bool {
        match self.compiled.ops[op as usize] {
            COp::Atom(bit) => self.model.atom_mask(node) & bit != 0,
            COp::Top => true,
            COp::Not(a) => !self.eval(view, node, window, a),
            COp::And(a, b) => {
                self.eval(view, node, window, a) && self.eval(view, node, window, b)
            }
            COp::Next(a) => self.eval(view, window[0], &window[1..], a),
            COp::All(a) => {
                let slot = self.compiled.all_slot[op as usize] as usize;
                let key = slot * self.model.node_count() + node;
                match self.caches[view as usize].all[key] {
                    1 => false,
                    2 => true,
                    _ => {
                        let h = self.compiled.horizon[a as usize] as usize;
                        let value = self.forall_windows(view, node, h, a);
                        self.caches[view as usize].all[key] = if value { 2 } else { 1 };
                        value
                    }
                }
            }
            COp::Upd(guard, body) => {
                let sigma = self.compiled.horizon[guard as usize] as usize;
                match self.update_op(view, node, op, guard) {
                    // not achievable: not well given, trivially true
                    None => true,
                    Some(updated) => {
                        let mask = &self.views[updated as usize];
                        let survives = window[..sigma].iter().all(|&x| mask.contains(x));
                        if !survives {
                            // the timeline leaves the updated model
                            true
                        } else {
                            self.eval(updated, node, window, body)
                        }
                    }
                }
            }
        }
    }

    /// `A`-quantification: conjunction over all alive descending windows.
    fn forall_windows(&mut self, view: u32, node: usize, len: usize, op: u32) -> bool {
        if len == 0 {
            return self.eval(view, node, &[], op);
        }
        let mark = self.window_buf.len();
        let result = self.windows_all(view, node, node, len, mark, op);
        self.window_buf.truncate(mark);
        result
    }

    fn windows_all(
        &mut self,
        view: u32,
        origin: usize,
        node: usize,
        remaining: usize,
        mark: usize,
        op: u32,
    ) -> bool {
        if remaining == 0 {
            let window: SmallVec<[usize; 8]> =
                SmallVec::from_slice(&self.window_buf[mark..]);
            return self.eval(view, origin, &window, op);
        }
        for child in self.model.children(node) {
            if !self.views[view as usize].contains(child) {
                continue;
            }
            self.window_buf.push(child);
            let ok = self.windows_all(view, origin, child, remaining - 1, mark, op);
            self.window_buf.pop();
            if !ok {
                return false;
            }
        }
        true
    }

    /// Guard achievability at a node within a view: some window satisfies
    /// the guard.
    pub(crate) fn achievable_at(&mut self, view: u32, node: usize) -> bool {
        let root = self.compiled.root();
        let sigma = self.compiled.horizon[root as usize] as usize;
        !self.forall_negated(view, node, sigma, root)
    }

    fn forall_negated(&mut self, view: u32, node: usize, len: usize, op: u32) -> bool {
        // "no window satisfies op": reuse the forall walker on negation
        if len == 0 {
            return !self.eval(view, node, &[], op);
        }
        let mark = self.window_buf.len();
        let result = self.windows_none(view, node, node, len, mark, op);
        self.window_buf.truncate(mark);
        result
    }

    fn windows_none(
        &mut self,
        view: u32,
        origin: usize,
        node: usize,
        remaining: usize,
        mark: usize,
        op: u32,
    ) -> bool {
        if remaining == 0 {
            let window: SmallVec<[usize; 8]> =
                SmallVec::from_slice(&self.window_buf[mark..]);
            return !self.eval(view, origin, &window, op);
        }
        for child in self.model.children(node) {
            if !self.views[view as usize].contains(child) {
                continue;
            }
            self.window_buf.push(child);
            let none = self.windows_none(view, origin, child, remaining - 1, mark, op);
            self.window_buf.pop();
            if !none {
                return false;
            }
        }
        true
    }

    /// Update within a view at a node, for the guard child of `upd_op`.
    /// Returns the updated view, or `None` when the guard is not
    /// achievable there.
    fn update_op(&mut self, view: u32, node: usize, upd_op: u32, guard: u32) -> Option<u32> {
        let slot = self.compiled.upd_slot[upd_op as usize] as usize;
        let key = slot * self.model.node_count() + node;
        match self.caches[view as usize].upd[key] {
            SLOT_UNKNOWN => {
                let result = self.compute_update(view, node, guard);
                self.caches[view as usize].upd[key] = result.unwrap_or(SLOT_UNDEFINED);
                result
            }
            SLOT_UNDEFINED => None,
            cached => Some(cached),
        }
    }

    /// Uncached update entry point used by the public `update` and
    /// `achievable` wrappers, which compile the guard as the root.
    pub(crate) fn update_at(&mut self, view: u32, node: usize) -> Option<u32> {
        let root = self.compiled.root();
        self.compute_update(view, node, root)
    }

    fn compute_update(&mut self, view: u32, node: usize, guard: u32) -> Option<u32> {
        let sigma = self.compiled.horizon[guard as usize] as usize;
        if sigma == 0 {
            // No future node can be cut by a sight-0 guard: all timelines
            // through a node share its present. Achievable means true.
            return if self.eval(view, node, &[], guard) {
                Some(view)
            } else {
                None
            };
        }
        let mut survivors = self.views[view as usize].clone();
        survivors.subtract(&self.subtree[node]);
        survivors.set(node);

        let mark = self.window_buf.len();
        let achievable = self.mark_survivors(view, node, node, sigma, mark, guard, &mut survivors);
        self.window_buf.truncate(mark);

        if !achievable {
            return None;
        }
        Some(self.push_view(survivors))
    }

    /// Walk the alive distance-`sigma` windows below the update node; for
    /// each guard-satisfying window keep its nodes and the whole alive
    /// subtree under its endpoint. Returns whether any window satisfied
    /// the guard.
    fn mark_survivors(
        &mut self,
        view: u32,
        origin: usize,
        node: usize,
        remaining: usize,
        mark: usize,
        guard: u32,
        survivors: &mut NodeMask,
    ) -> bool {
        if remaining == 0 {
            let window: SmallVec<[usize; 8]> =
                SmallVec::from_slice(&self.window_buf[mark..]);
            if self.eval(view, origin, &window, guard) {
                for &x in window.iter() {
                    survivors.set(x);
                }
                let endpoint = *window.last().unwrap();
                survivors.union_intersection(
                    &self.subtree[endpoint],
                    &self.views[view as usize],
                );
                return true;
            }
            return false;
        }
        let mut any = false;
        for child in self.model.children(node) {
            if !self.views[view as usize].contains(child) {
                continue;
            }
            self.window_buf.push(child);
            if self.mark_survivors(view, origin, child, remaining - 1, mark, guard, survivors) {
                any = true;
            }
            self.window_buf.pop();
        }
        any
    }
}
