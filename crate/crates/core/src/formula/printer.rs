//! Precedence-aware printer. Output is core-only (no sugar is
//! reconstructed) and reparses to a structurally identical AST.

use std::fmt;

use super::Formula;

impl fmt::Display for Formula {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write_formula(self, f)
    }
}

fn write_formula(formula: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::And(l, r) => {
            // `&` is left-associative: the left child stays bare, a
            // right-nested conjunction needs parentheses.
            write_formula(l, f)?;
            f.write_str(" & ")?;
            write_operand(r, f)
        }
        _ => write_operand(formula, f),
    }
}

fn write_operand(formula: &Formula, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    match formula {
        Formula::Atom(name) => f.write_str(name),
        Formula::Top => f.write_str("T"),
        Formula::Not(inner) => {
            f.write_str("~")?;
            write_operand(inner, f)
        }
        Formula::Next(inner) => {
            f.write_str("X ")?;
            write_operand(inner, f)
        }
        Formula::All(inner) => {
            f.write_str("A ")?;
            write_operand(inner, f)
        }
        Formula::Upd(announce, body) => {
            write!(f, "[{announce}] ")?;
            write_operand(body, f)
        }
        Formula::And(..) => {
            f.write_str("(")?;
            write_formula(formula, f)?;
            f.write_str(")")
        }
    }
}
