//! futura: a branching-time logic with a model-shrinking update operator.
//!
//! The library covers the whole pipeline:
//!
//! * [`formula`] — the language `XL` (`X`, `A`, announcements `[psi] phi`),
//!   parser, printer, sight-depth measures, fragment classification;
//! * [`model`] — uniform-depth truncations of serial trees, timelines,
//!   Kripke unfolding, exhaustive enumeration, model files;
//! * [`semantics`] — truth at `(model, timeline, position)`, achievability,
//!   and the announcement update that shrinks models;
//! * [`reduction`] — source-to-source compilation eliminating the
//!   announcement operator, with an audit trace;
//! * [`oracle`] — brute-force bounded validity, entailment and
//!   equivalence checks, plus seeded random formula generation.

pub mod fixtures;
pub mod formula;
pub mod model;
pub mod oracle;
pub mod reduction;
pub mod semantics;

pub use formula::{parse, Formula, Fragment, FragmentError, ParseError};
pub use model::{KripkeSpec, ModelError, RawModel, TreeModel, Timeline, Violation};
pub use oracle::{RandomProfile, Scale, ScaleError, Verdict};
pub use reduction::{NormalClause, ReductionError, RewriteTrace, RuleName};
pub use semantics::{EvalError, UpdateOutcome};
