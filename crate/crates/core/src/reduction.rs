//! Source-to-source elimination of the announcement operator.
//!
//! The pipeline compiles the full language into the announcement-free
//! `XA` fragment: guards are first cleared of their own announcements
//! (every `[a] b` with `X`-only parts is equivalent to `a -> b`), brought
//! into a conjunction of clauses `pc | X x`, split into nested
//! single-clause announcements, and pushed through the body by six
//! reduction axioms until they die at atoms. Every step is recorded in a
//! replayable trace of whole-formula snapshots.

use std::fmt;

use serde::Serialize;
use thiserror::Error;

use crate::formula::{Formula, Fragment, FragmentError};

/// Node budget for normal forms and intermediate results; conjunctive
/// normal forms can be exponential.
pub const SIZE_LIMIT: usize = 10_000;

/// Hard cap on pipeline steps; a diagnostic backstop, not a tuning knob.
pub const STEP_LIMIT: usize = 200_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReductionError {
    #[error(transparent)]
    Fragment(#[from] FragmentError),
    #[error("formula exceeded the size ceiling ({size} > {limit} nodes)")]
    SizeLimit { size: usize, limit: usize },
    #[error("reduction exceeded {limit} steps")]
    StepLimit { limit: usize },
}

/// Named rewrite rules. The lemma/axiom numbering follows the reduction
/// calculus: six push axioms, the conjunction split and its merge
/// converse, plus the two whole-guard preparations.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RuleName {
    /// Replace every `[a] b` inside the guard by `a -> b`, bottom-up.
    ElimAnnounce,
    /// Replace the guard by its clause normal form.
    NormalForm,
    /// `[phi & psi] chi  ->  [phi][psi] chi`
    Split,
    /// `[phi][psi] chi  ->  [phi & [phi] psi] chi`; the converse of
    /// `Split`. Valid, exposed for completeness, and never chosen by the
    /// deterministic pipeline.
    Merge,
    /// `[phi] p  ->  (phi -> p)`
    Axiom1,
    /// `[phi] T  ->  T`
    Axiom2,
    /// `[phi] ~psi  ->  (phi -> ~[phi] psi)`
    Axiom3,
    /// `[phi] (psi & chi)  ->  ([phi] psi & [phi] chi)`
    Axiom4,
    /// `[pc | X psi] X chi  ->  ((pc -> X chi) & (~pc -> X [psi] chi))`,
    /// guarded: the disjunct left of `X` must be propositional.
    Axiom5,
    /// `[phi] A psi  ->  (phi -> A [phi] psi)`
    Axiom6,
}

impl fmt::Display for RuleName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            RuleName::ElimAnnounce => "elim-announce",
            RuleName::NormalForm => "normal-form",
            RuleName::Split => "split",
            RuleName::Merge => "merge",
            RuleName::Axiom1 => "axiom1",
            RuleName::Axiom2 => "axiom2",
            RuleName::Axiom3 => "axiom3",
            RuleName::Axiom4 => "axiom4",
            RuleName::Axiom5 => "axiom5",
            RuleName::Axiom6 => "axiom6",
        };
        f.write_str(name)
    }
}

/// One pipeline step: the whole formula before and after.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct RewriteStep {
    pub rule: RuleName,
    #[serde(serialize_with = "ser_formula")]
    pub before: Formula,
    #[serde(serialize_with = "ser_formula")]
    pub after: Formula,
}

fn ser_formula<S: serde::Serializer>(f: &Formula, s: S) -> Result<S::Ok, S::Error> {
    s.serialize_str(&f.to_string())
}

/// Ordered, chained trace: the `after` of each step is the `before` of
/// the next. `phase_starts` marks the step indices at which the pipeline
/// turned to a fresh announcement; the termination measure strictly
/// decreases across those boundaries.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct RewriteTrace {
    pub steps: Vec<RewriteStep>,
    pub phase_starts: Vec<usize>,
}

impl fmt::Display for RewriteTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for step in &self.steps {
            writeln!(f, "{}: {} ==> {}", step.rule, step.before, step.after)?;
        }
        Ok(())
    }
}

/// One conjunct of the clause normal form, denoting `pc | X x`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NormalClause {
    /// Propositional part: no `X`, `A` or announcement.
    pub pc: Formula,
    /// Part under the `X`: no `A` or announcement.
    pub x: Formula,
}

impl NormalClause {
    pub fn to_formula(&self) -> Formula {
        Formula::or(self.pc.clone(), Formula::next(self.x.clone()))
    }
}

/// Termination measure of the pipeline: the sum of guard sight depths
/// over all announcement occurrences, then the total size of the
/// announcement subterms. Strictly lexicographically decreasing across
/// phases.
pub fn announce_measure(f: &Formula) -> (u64, u64) {
    fn walk(f: &Formula, acc: &mut (u64, u64)) {
        match f {
            Formula::Atom(_) | Formula::Top => {}
            Formula::Not(g) | Formula::Next(g) | Formula::All(g) => walk(g, acc),
            Formula::And(l, r) => {
                walk(l, acc);
                walk(r, acc);
            }
            Formula::Upd(guard, body) => {
                acc.0 += guard.horizon() as u64;
                acc.1 += f.size() as u64;
                walk(guard, acc);
                walk(body, acc);
            }
        }
    }
    let mut acc = (0, 0);
    walk(f, &mut acc);
    acc
}

// ---------------------------------------------------------------------
// Simplification
// ---------------------------------------------------------------------

/// The fixed safe simplifier: double negation, `T`-units and
/// `~T`-absorption for `&`. Together these also discharge the sugar-level
/// facts `~T | x = x` and `(~T -> x) = T` on desugared trees. Every rule
/// preserves equivalence outright.
pub fn simplify(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Top => f.clone(),
        Formula::Not(g) => match simplify(g) {
            Formula::Not(inner) => *inner,
            s => Formula::not(s),
        },
        Formula::And(l, r) => {
            let l = simplify(l);
            let r = simplify(r);
            let is_bot = |x: &Formula| matches!(x, Formula::Not(g) if **g == Formula::Top);
            if is_bot(&l) || is_bot(&r) {
                Formula::bot()
            } else if l == Formula::Top {
                r
            } else if r == Formula::Top {
                l
            } else {
                Formula::and(l, r)
            }
        }
        Formula::Next(g) => Formula::next(simplify(g)),
        Formula::All(g) => Formula::all(simplify(g)),
        Formula::Upd(guard, body) => {
            Formula::Upd(Box::new(simplify(guard)), Box::new(simplify(body)))
        }
    }
}

// ---------------------------------------------------------------------
// Guard preparation: announcement elimination and normal form
// ---------------------------------------------------------------------

/// Eliminate announcements from an `A`-free formula: bottom-up, each
/// `[a] b` whose parts are already announcement-free becomes `a -> b`.
pub fn elim_announce(f: &Formula) -> Result<Formula, ReductionError> {
    if f.contains_all() {
        return Err(FragmentError {
            formula: f.to_string(),
            required: Fragment::XAnnounce,
            reason: "announcement elimination is defined on A-free formulas".into(),
        }
        .into());
    }
    Ok(elim_rec(f))
}

fn elim_rec(f: &Formula) -> Formula {
    match f {
        Formula::Atom(_) | Formula::Top => f.clone(),
        Formula::Not(g) => Formula::not(elim_rec(g)),
        Formula::And(l, r) => Formula::and(elim_rec(l), elim_rec(r)),
        Formula::Next(g) => Formula::next(elim_rec(g)),
        Formula::All(_) => unreachable!("checked A-free"),
        Formula::Upd(guard, body) => Formula::imp(elim_rec(guard), elim_rec(body)),
    }
}

/// Literal universe for the clause conversion: plain atoms and opaque
/// `X`-blocks.
#[derive(Debug, Clone, PartialEq, Eq)]
enum Lit {
    Atom(String),
    XBlock(Formula),
}

/// Clause normal form of an `X`-fragment formula: a conjunction of
/// `pc | X x` clauses equivalent to the input.
///
/// `X` distributes over the propositional connectives (next states are
/// unique along a path), so the formula is a propositional combination
/// of atoms and maximal `X`-blocks; conjunctive normal form over that
/// alphabet gives the clauses, with the `X`-literals of each clause
/// merged under a single `X`.
pub fn normal_form(f: &Formula) -> Result<Vec<NormalClause>, ReductionError> {
    let fragment = f.fragment();
    if !fragment.within(Fragment::X) {
        return Err(FragmentError {
            formula: f.to_string(),
            required: Fragment::X,
            reason: "normal form is defined on the X fragment".into(),
        }
        .into());
    }

    let mut lits: Vec<Lit> = Vec::new();
    let mut intern = |lit: Lit| -> usize {
        match lits.iter().position(|l| *l == lit) {
            Some(i) => i,
            None => {
                lits.push(lit);
                lits.len() - 1
            }
        }
    };

    // clauses of (sign, literal); true = positive occurrence
    let clauses = cnf(f, true, &mut intern)?;

    let mut out: Vec<Vec<(bool, usize)>> = Vec::new();
    'clause: for mut clause in clauses {
        clause.sort();
        clause.dedup();
        for pair in clause.windows(2) {
            if pair[0].1 == pair[1].1 && pair[0].0 != pair[1].0 {
                continue 'clause; // tautological clause
            }
        }
        if !out.contains(&clause) {
            out.push(clause);
        }
    }
    out.sort();

    if out.is_empty() {
        // the formula is a tautology
        return Ok(vec![NormalClause {
            pc: Formula::Top,
            x: Formula::bot(),
        }]);
    }

    let rebuilt = out
        .into_iter()
        .map(|clause| {
            let mut pc_lits = Vec::new();
            let mut x_lits = Vec::new();
            for (positive, idx) in clause {
                match &lits[idx] {
                    Lit::Atom(name) => {
                        let a = Formula::atom(name.clone());
                        pc_lits.push(if positive { a } else { Formula::not(a) });
                    }
                    Lit::XBlock(g) => {
                        x_lits.push(if positive { g.clone() } else { Formula::not(g.clone()) });
                    }
                }
            }
            NormalClause {
                pc: disjoin(pc_lits),
                x: disjoin(x_lits),
            }
        })
        .collect();
    Ok(rebuilt)
}

fn disjoin(mut parts: Vec<Formula>) -> Formula {
    match parts.len() {
        0 => Formula::bot(),
        _ => {
            let mut acc = parts.remove(0);
            for p in parts {
                acc = Formula::or(acc, p);
            }
            acc
        }
    }
}

/// The clause conjunction as a single formula, nested to the right so a
/// split peels the first clause.
pub fn clauses_to_formula(clauses: &[NormalClause]) -> Formula {
    let mut it = clauses.iter().rev();
    let mut acc = it.next().expect("at least one clause").to_formula();
    for c in it {
        acc = Formula::and(c.to_formula(), acc);
    }
    acc
}

type CnfClauses = Vec<Vec<(bool, usize)>>;

fn cnf(
    f: &Formula,
    positive: bool,
    intern: &mut impl FnMut(Lit) -> usize,
) -> Result<CnfClauses, ReductionError> {
    let result = match (f, positive) {
        (Formula::Top, true) => vec![],
        (Formula::Top, false) => vec![vec![]],
        (Formula::Atom(name), sign) => {
            vec![vec![(sign, intern(Lit::Atom(name.clone())))]]
        }
        (Formula::Next(g), sign) => {
            vec![vec![(sign, intern(Lit::XBlock((**g).clone())))]]
        }
        (Formula::Not(g), sign) => cnf(g, !sign, intern)?,
        (Formula::And(l, r), true) => {
            let mut a = cnf(l, true, intern)?;
            a.extend(cnf(r, true, intern)?);
            a
        }
        (Formula::And(l, r), false) => {
            // ~(l & r) = ~l | ~r: distribute
            let a = cnf(l, false, intern)?;
            let b = cnf(r, false, intern)?;
            let mut product = Vec::with_capacity(a.len() * b.len());
            for ca in &a {
                for cb in &b {
                    let mut merged = ca.clone();
                    merged.extend(cb.iter().cloned());
                    product.push(merged);
                }
            }
            product
        }
        (Formula::All(_) | Formula::Upd(..), _) => unreachable!("checked X fragment"),
    };
    let size: usize = result.iter().map(|c| c.len() + 1).sum();
    if size > SIZE_LIMIT {
        return Err(ReductionError::SizeLimit {
            size,
            limit: SIZE_LIMIT,
        });
    }
    Ok(result)
}

// ---------------------------------------------------------------------
// Rules and the single-step driver
// ---------------------------------------------------------------------

/// Match a desugared disjunction `~(~l & ~r)`.
fn match_or(f: &Formula) -> Option<(&Formula, &Formula)> {
    if let Formula::Not(inner) = f {
        if let Formula::And(nl, nr) = &**inner {
            if let (Formula::Not(l), Formula::Not(r)) = (&**nl, &**nr) {
                return Some((l, r));
            }
        }
    }
    None
}

/// Read a guard as a clause `pc | X x`. Degenerate shapes count: a
/// propositional guard is the clause `pc | X ~T`, a bare `X x` guard the
/// clause `~T | X x`.
fn clause_parts(guard: &Formula) -> Option<(Formula, Formula)> {
    if guard.fragment() == Fragment::Pc {
        return Some((guard.clone(), Formula::bot()));
    }
    if let Formula::Next(x) = guard {
        return Some((Formula::bot(), (**x).clone()));
    }
    if let Some((l, r)) = match_or(guard) {
        if l.fragment() == Fragment::Pc {
            if let Formula::Next(x) = r {
                return Some((l.clone(), (**x).clone()));
            }
        }
    }
    None
}

/// Apply one named rule at the root of `f`, if it matches there. Pure
/// pattern application: no simplification, no recursion.
pub fn apply_rule(rule: RuleName, f: &Formula) -> Option<Formula> {
    let Formula::Upd(guard, body) = f else {
        return None;
    };
    let guard = (**guard).clone();
    match rule {
        RuleName::Axiom1 => match &**body {
            Formula::Atom(_) => Some(Formula::imp(guard, (**body).clone())),
            _ => None,
        },
        RuleName::Axiom2 => match &**body {
            Formula::Top => Some(Formula::Top),
            _ => None,
        },
        RuleName::Axiom3 => match &**body {
            Formula::Not(psi) => Some(Formula::imp(
                guard.clone(),
                Formula::not(Formula::Upd(Box::new(guard), psi.clone())),
            )),
            _ => None,
        },
        RuleName::Axiom4 => match &**body {
            Formula::And(psi, chi) => Some(Formula::and(
                Formula::Upd(Box::new(guard.clone()), psi.clone()),
                Formula::Upd(Box::new(guard), chi.clone()),
            )),
            _ => None,
        },
        RuleName::Axiom5 => match &**body {
            Formula::Next(chi) => {
                let (pc, x) = clause_parts(&guard)?;
                // the side condition is what keeps this axiom sound
                if pc.fragment() != Fragment::Pc {
                    return None;
                }
                Some(Formula::and(
                    Formula::imp(pc.clone(), Formula::next((**chi).clone())),
                    Formula::imp(
                        Formula::not(pc),
                        Formula::next(Formula::Upd(Box::new(x), chi.clone())),
                    ),
                ))
            }
            _ => None,
        },
        RuleName::Axiom6 => match &**body {
            Formula::All(psi) => Some(Formula::imp(
                guard.clone(),
                Formula::all(Formula::Upd(Box::new(guard), psi.clone())),
            )),
            _ => None,
        },
        RuleName::Split => match &guard {
            Formula::And(phi, psi) => Some(Formula::Upd(
                phi.clone(),
                Box::new(Formula::Upd(psi.clone(), body.clone())),
            )),
            _ => None,
        },
        RuleName::Merge => match &**body {
            Formula::Upd(psi, chi) => Some(Formula::Upd(
                Box::new(Formula::and(
                    guard.clone(),
                    Formula::Upd(Box::new(guard), psi.clone()),
                )),
                chi.clone(),
            )),
            _ => None,
        },
        RuleName::ElimAnnounce => {
            if guard.contains_upd() {
                let cleared = elim_announce(&guard).ok()?;
                Some(Formula::Upd(Box::new(cleared), body.clone()))
            } else {
                None
            }
        }
        RuleName::NormalForm => {
            let clauses = normal_form(&guard).ok()?;
            Some(Formula::Upd(
                Box::new(clauses_to_formula(&clauses)),
                body.clone(),
            ))
        }
    }
}

/// Path step into a formula. The redex search never descends into
/// guards: guard announcements are cleared wholesale.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dir {
    NotIn,
    AndL,
    AndR,
    NextIn,
    AllIn,
    UpdBody,
}

fn find_redex(f: &Formula, path: &mut Vec<Dir>) -> bool {
    match f {
        Formula::Atom(_) | Formula::Top => false,
        Formula::Not(g) => descend(g, Dir::NotIn, path),
        Formula::Next(g) => descend(g, Dir::NextIn, path),
        Formula::All(g) => descend(g, Dir::AllIn, path),
        Formula::And(l, r) => descend(l, Dir::AndL, path) || descend(r, Dir::AndR, path),
        Formula::Upd(_, body) => {
            if body.contains_upd() {
                descend(body, Dir::UpdBody, path)
            } else {
                true
            }
        }
    }
}

fn descend(g: &Formula, dir: Dir, path: &mut Vec<Dir>) -> bool {
    path.push(dir);
    if find_redex(g, path) {
        true
    } else {
        path.pop();
        false
    }
}

fn subformula_at<'f>(f: &'f Formula, path: &[Dir]) -> &'f Formula {
    let mut cur = f;
    for dir in path {
        cur = match (cur, dir) {
            (Formula::Not(g), Dir::NotIn)
            | (Formula::Next(g), Dir::NextIn)
            | (Formula::All(g), Dir::AllIn)
            | (Formula::And(g, _), Dir::AndL)
            | (Formula::And(_, g), Dir::AndR)
            | (Formula::Upd(_, g), Dir::UpdBody) => g,
            _ => unreachable!("stale path"),
        };
    }
    cur
}

fn replace_at(f: &Formula, path: &[Dir], new: Formula) -> Formula {
    match path.split_first() {
        None => new,
        Some((dir, rest)) => match (f, dir) {
            (Formula::Not(g), Dir::NotIn) => Formula::not(replace_at(g, rest, new)),
            (Formula::Next(g), Dir::NextIn) => Formula::next(replace_at(g, rest, new)),
            (Formula::All(g), Dir::AllIn) => Formula::all(replace_at(g, rest, new)),
            (Formula::And(l, r), Dir::AndL) => {
                Formula::and(replace_at(l, rest, new), (**r).clone())
            }
            (Formula::And(l, r), Dir::AndR) => {
                Formula::and((**l).clone(), replace_at(r, rest, new))
            }
            (Formula::Upd(guard, body), Dir::UpdBody) => {
                Formula::Upd(guard.clone(), Box::new(replace_at(body, rest, new)))
            }
            _ => unreachable!("stale path"),
        },
    }
}

/// Choose the rule for a redex `[guard] body` (body announcement-free).
fn policy(redex: &Formula) -> Result<(Formula, RuleName), ReductionError> {
    let Formula::Upd(guard, body) = redex else {
        unreachable!("redex is always an announcement");
    };
    debug_assert!(!body.contains_upd());
    if guard.contains_upd() {
        return Ok((
            apply_rule(RuleName::ElimAnnounce, redex).expect("guard has announcements"),
            RuleName::ElimAnnounce,
        ));
    }
    let rule = match &**body {
        Formula::Atom(_) => RuleName::Axiom1,
        Formula::Top => RuleName::Axiom2,
        Formula::Not(_) => RuleName::Axiom3,
        Formula::And(..) => RuleName::Axiom4,
        Formula::All(_) => RuleName::Axiom6,
        Formula::Next(_) => {
            if clause_parts(guard).is_some() {
                RuleName::Axiom5
            } else if matches!(**guard, Formula::And(..)) {
                RuleName::Split
            } else {
                // guard must first be brought into clause shape
                let clauses = normal_form(guard)?;
                return Ok((
                    Formula::Upd(Box::new(clauses_to_formula(&clauses)), body.clone()),
                    RuleName::NormalForm,
                ));
            }
        }
        Formula::Upd(..) => unreachable!("body is announcement-free"),
    };
    Ok((apply_rule(rule, redex).expect("policy matched the shape"), rule))
}

/// Apply exactly one named rule at the innermost-leftmost redex: the
/// leftmost announcement whose body contains no announcement, reached
/// without entering guards. `None` when no rule applies (in particular
/// when the formula is already announcement-free).
pub fn rewrite_step(f: &Formula) -> Option<(Formula, RuleName)> {
    let mut path = Vec::new();
    if !find_redex(f, &mut path) {
        return None;
    }
    let redex = subformula_at(f, &path);
    // the standalone step applies only the named lemma/axiom rules;
    // guard preparation is the pipeline's job
    for rule in [
        RuleName::Axiom1,
        RuleName::Axiom2,
        RuleName::Axiom3,
        RuleName::Axiom4,
        RuleName::Axiom6,
        RuleName::Axiom5,
        RuleName::Split,
    ] {
        if let Some(new) = apply_rule(rule, redex) {
            return Some((replace_at(f, &path, new), rule));
        }
    }
    None
}

/// Compile a formula into the announcement-free `XA` fragment.
///
/// Per phase the pipeline picks the leftmost announcement with an
/// announcement-free body, clears its guard (`ElimAnnounce`), normalizes
/// it when an `X` body demands clause shape (`NormalForm`), splits clause
/// conjunctions, and pushes single clauses inward by the axioms until
/// they reach atoms — including the shallower announcements spawned when
/// a clause crosses an `X`. Introduced constants are cleaned by the safe
/// simplifier after each step, locally to the rewritten subformula.
pub fn reduce_to_xa(f: &Formula) -> Result<(Formula, RewriteTrace), ReductionError> {
    let mut g = f.clone();
    let mut trace = RewriteTrace::default();
    let mut path = Vec::new();
    while find_redex(&g, &mut path) {
        trace.phase_starts.push(trace.steps.len());
        // Everything this phase does happens strictly inside `path`:
        // rewrites replace subformulas of the redex region and the local
        // simplifier never touches the surrounding context.
        loop {
            if trace.steps.len() >= STEP_LIMIT {
                return Err(ReductionError::StepLimit { limit: STEP_LIMIT });
            }
            let region = subformula_at(&g, &path);
            if !region.contains_upd() {
                break;
            }
            let mut local = Vec::new();
            let found = find_redex(region, &mut local);
            debug_assert!(found);
            let full: Vec<Dir> = path.iter().chain(local.iter()).copied().collect();
            let redex = subformula_at(&g, &full);
            let (rewritten, rule) = policy(redex)?;
            let next = replace_at(&g, &full, simplify(&rewritten));
            if next.size() > SIZE_LIMIT {
                return Err(ReductionError::SizeLimit {
                    size: next.size(),
                    limit: SIZE_LIMIT,
                });
            }
            trace.steps.push(RewriteStep {
                rule,
                before: g,
                after: next.clone(),
            });
            g = next;
        }
        path.clear();
    }
    debug_assert!(!g.contains_upd());
    Ok((g, trace))
}
