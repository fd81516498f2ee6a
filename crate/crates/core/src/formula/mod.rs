//! Formula language: AST, parser, printer, depth measures and fragment
//! classification.
//!
//! The core language has seven constructors: atoms, `T`, `~`, `&`, the
//! temporal `X`, the path quantifier `A` and the announcement `[psi] phi`.
//! Everything else (`|`, `->`, `<->`, `E`, falsum) is sugar eliminated at
//! construction time, so the semantics only ever sees the seven cores.

mod parser;
mod printer;

pub use parser::{parse, ParseError};

use std::collections::BTreeSet;
use std::fmt;

use thiserror::Error;

/// An XL formula. Announcement guards are restricted to the `A`-free
/// fragment; use [`Formula::upd`] to construct announcements safely.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Formula {
    /// Atomic proposition, named `[a-z][a-z0-9_]*`.
    Atom(String),
    /// Verum.
    Top,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    /// `X phi`: phi holds at the next moment of the current timeline.
    Next(Box<Formula>),
    /// `A phi`: phi holds no matter how the future unfolds from here.
    All(Box<Formula>),
    /// `[psi] phi`: given psi, phi holds. The guard must be `A`-free.
    Upd(Box<Formula>, Box<Formula>),
}

/// Raised when an operation demands a smaller fragment than the formula
/// inhabits, e.g. `sigma` on a formula containing `A`.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("formula `{formula}` is not in fragment {required}: {reason}")]
pub struct FragmentError {
    pub formula: String,
    pub required: Fragment,
    pub reason: String,
}

/// The sub-language lattice. `Pc ⊂ X ⊂ XAnnounce ⊂ Xl` and
/// `X ⊂ Xa ⊂ Xl`; `XAnnounce` and `Xa` are incomparable.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Fragment {
    /// Propositional calculus: atoms, `T`, `~`, `&`.
    Pc,
    /// `Pc` plus `X`.
    X,
    /// `X` plus announcements; no `A`. The admissible guard language.
    XAnnounce,
    /// `X` plus `A`; no announcements. Target of the reduction.
    Xa,
    /// The full language.
    Xl,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Fragment::Pc => "PC",
            Fragment::X => "X",
            Fragment::XAnnounce => "X[.]",
            Fragment::Xa => "XA",
            Fragment::Xl => "XL",
        };
        write!(f, "{name}")
    }
}

impl Fragment {
    /// Membership test: does a formula of fragment `self` also belong to
    /// `other`? This is the lattice order.
    pub fn within(self, other: Fragment) -> bool {
        use Fragment::*;
        match (self, other) {
            (a, b) if a == b => true,
            (Pc, _) => true,
            (X, Pc) => false,
            (X, _) => true,
            (XAnnounce, Xl) => true,
            (Xa, Xl) => true,
            _ => false,
        }
    }
}

impl Formula {
    pub fn atom(name: impl Into<String>) -> Self {
        Formula::Atom(name.into())
    }

    pub fn top() -> Self {
        Formula::Top
    }

    /// Falsum, desugared as `~T`.
    pub fn bot() -> Self {
        Formula::not(Formula::Top)
    }

    pub fn not(f: Formula) -> Self {
        Formula::Not(Box::new(f))
    }

    pub fn and(l: Formula, r: Formula) -> Self {
        Formula::And(Box::new(l), Box::new(r))
    }

    /// `l | r`, desugared as `~(~l & ~r)`.
    pub fn or(l: Formula, r: Formula) -> Self {
        Formula::not(Formula::and(Formula::not(l), Formula::not(r)))
    }

    /// `l -> r`, desugared as `~(l & ~r)`.
    pub fn imp(l: Formula, r: Formula) -> Self {
        Formula::not(Formula::and(l, Formula::not(r)))
    }

    /// `l <-> r`, desugared as `(l -> r) & (r -> l)`.
    pub fn iff(l: Formula, r: Formula) -> Self {
        Formula::and(
            Formula::imp(l.clone(), r.clone()),
            Formula::imp(r, l),
        )
    }

    pub fn next(f: Formula) -> Self {
        Formula::Next(Box::new(f))
    }

    pub fn all(f: Formula) -> Self {
        Formula::All(Box::new(f))
    }

    /// `E phi`, desugared as `~A~phi`.
    pub fn ex(f: Formula) -> Self {
        Formula::not(Formula::all(Formula::not(f)))
    }

    /// Announcement `[announce] body`. Fails if the guard contains `A`.
    pub fn upd(announce: Formula, body: Formula) -> Result<Self, FragmentError> {
        if announce.contains_all() {
            return Err(FragmentError {
                formula: announce.to_string(),
                required: Fragment::XAnnounce,
                reason: "announcement guards may not contain A".into(),
            });
        }
        Ok(Formula::Upd(Box::new(announce), Box::new(body)))
    }

    /// Number of constructors in the (desugared) tree.
    pub fn size(&self) -> usize {
        match self {
            Formula::Atom(_) | Formula::Top => 1,
            Formula::Not(f) | Formula::Next(f) | Formula::All(f) => 1 + f.size(),
            Formula::And(l, r) | Formula::Upd(l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn contains_all(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Top => false,
            Formula::Not(f) | Formula::Next(f) => f.contains_all(),
            Formula::All(_) => true,
            Formula::And(l, r) | Formula::Upd(l, r) => l.contains_all() || r.contains_all(),
        }
    }

    pub fn contains_upd(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Top => false,
            Formula::Not(f) | Formula::Next(f) | Formula::All(f) => f.contains_upd(),
            Formula::And(l, r) => l.contains_upd() || r.contains_upd(),
            Formula::Upd(..) => true,
        }
    }

    pub fn contains_next(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Top => false,
            Formula::Not(f) | Formula::All(f) => f.contains_next(),
            Formula::Next(_) => true,
            Formula::And(l, r) | Formula::Upd(l, r) => l.contains_next() || r.contains_next(),
        }
    }

    /// Atom names occurring in the formula, sorted.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Atom(name) => {
                out.insert(name.clone());
            }
            Formula::Top => {}
            Formula::Not(f) | Formula::Next(f) | Formula::All(f) => f.collect_atoms(out),
            Formula::And(l, r) | Formula::Upd(l, r) => {
                l.collect_atoms(out);
                r.collect_atoms(out);
            }
        }
    }

    /// Sight depth of an `A`-free formula: how many steps ahead it can see.
    ///
    /// `p` and `T` see 0; `~` and `&` take the maximum of their parts;
    /// `X` adds one; `[psi] phi` sees as far as the further of the two.
    pub fn sigma(&self) -> Result<u32, FragmentError> {
        if self.contains_all() {
            return Err(FragmentError {
                formula: self.to_string(),
                required: Fragment::XAnnounce,
                reason: "sigma is only defined on A-free formulas".into(),
            });
        }
        Ok(self.horizon())
    }

    /// Extension of sight depth to the full language: `A` contributes
    /// nothing because it quantifies over futures without advancing the
    /// position. Agrees with [`Formula::sigma`] on `A`-free formulas.
    pub fn horizon(&self) -> u32 {
        match self {
            Formula::Atom(_) | Formula::Top => 0,
            Formula::Not(f) | Formula::All(f) => f.horizon(),
            Formula::And(l, r) => l.horizon().max(r.horizon()),
            Formula::Next(f) => f.horizon() + 1,
            Formula::Upd(announce, body) => announce.horizon().max(body.horizon()),
        }
    }

    /// Smallest fragment containing the formula.
    pub fn fragment(&self) -> Fragment {
        let a = self.contains_all();
        let u = self.contains_upd();
        let x = self.contains_next();
        match (a, u, x) {
            (false, false, false) => Fragment::Pc,
            (false, false, true) => Fragment::X,
            (false, true, _) => Fragment::XAnnounce,
            (true, false, _) => Fragment::Xa,
            (true, true, _) => Fragment::Xl,
        }
    }

    /// State/temporal classification. `p`, `T` and `A phi` are state
    /// formulas; `X phi` is temporal; `[psi] phi` is temporal exactly when
    /// `phi` is; `~` inherits from its operand and `&` is state iff both
    /// conjuncts are.
    pub fn is_state(&self) -> bool {
        match self {
            Formula::Atom(_) | Formula::Top | Formula::All(_) => true,
            Formula::Not(f) => f.is_state(),
            Formula::And(l, r) => l.is_state() && r.is_state(),
            Formula::Next(_) => false,
            Formula::Upd(_, body) => body.is_state(),
        }
    }

    /// Smallest fragment plus the state flag, in one call.
    pub fn classify(&self) -> (Fragment, bool) {
        (self.fragment(), self.is_state())
    }
}
