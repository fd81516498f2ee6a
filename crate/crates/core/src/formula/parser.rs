//! Recursive-descent parser for the ASCII formula grammar.
//!
//! ```text
//! formula := iff
//! iff     := imp ('<->' iff)?          right-associative
//! imp     := or  ('->' imp)?           right-associative
//! or      := and ('|' and)*            left-associative
//! and     := unary ('&' unary)*        left-associative
//! unary   := '~' unary | 'X' unary | 'A' unary | 'E' unary
//!          | '[' formula ']' unary | primary
//! primary := ident | 'T' | '(' formula ')'
//! ident   := [a-z][a-z0-9_]*
//! ```
//!
//! Whitespace is insignificant; input must be ASCII. `|`, `->`, `<->`,
//! `E` desugar at parse time, so the returned AST uses only the seven
//! core constructors.

use thiserror::Error;

use super::Formula;

/// Syntax error with the byte offset of the offending token.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("syntax error at byte {position}: {message}")]
pub struct ParseError {
    pub position: usize,
    pub message: String,
}

/// Parse a formula; the result is desugared.
pub fn parse(text: &str) -> Result<Formula, ParseError> {
    let tokens = lex(text)?;
    let mut parser = Parser { tokens, pos: 0 };
    let formula = parser.iff()?;
    parser.expect_end()?;
    Ok(formula)
}

#[derive(Debug, Clone, PartialEq)]
enum Tok {
    Ident(String),
    Top,
    Tilde,
    Amp,
    Pipe,
    Arrow,
    DoubleArrow,
    NextOp,
    AllOp,
    ExOp,
    LBracket,
    RBracket,
    LParen,
    RParen,
}

fn lex(text: &str) -> Result<Vec<(usize, Tok)>, ParseError> {
    let bytes = text.as_bytes();
    let mut out = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let b = bytes[i];
        if !b.is_ascii() {
            return Err(ParseError {
                position: i,
                message: "non-ASCII input".into(),
            });
        }
        match b {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'~' => {
                out.push((i, Tok::Tilde));
                i += 1;
            }
            b'&' => {
                out.push((i, Tok::Amp));
                i += 1;
            }
            b'|' => {
                out.push((i, Tok::Pipe));
                i += 1;
            }
            b'[' => {
                out.push((i, Tok::LBracket));
                i += 1;
            }
            b']' => {
                out.push((i, Tok::RBracket));
                i += 1;
            }
            b'(' => {
                out.push((i, Tok::LParen));
                i += 1;
            }
            b')' => {
                out.push((i, Tok::RParen));
                i += 1;
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    out.push((i, Tok::Arrow));
                    i += 2;
                } else {
                    return Err(ParseError {
                        position: i,
                        message: "expected `->`".into(),
                    });
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'-') && bytes.get(i + 2) == Some(&b'>') {
                    out.push((i, Tok::DoubleArrow));
                    i += 3;
                } else {
                    return Err(ParseError {
                        position: i,
                        message: "expected `<->`".into(),
                    });
                }
            }
            b'T' => {
                out.push((i, Tok::Top));
                i += 1;
            }
            b'X' => {
                out.push((i, Tok::NextOp));
                i += 1;
            }
            b'A' => {
                out.push((i, Tok::AllOp));
                i += 1;
            }
            b'E' => {
                out.push((i, Tok::ExOp));
                i += 1;
            }
            b'a'..=b'z' => {
                let start = i;
                i += 1;
                while i < bytes.len()
                    && (bytes[i].is_ascii_lowercase()
                        || bytes[i].is_ascii_digit()
                        || bytes[i] == b'_')
                {
                    i += 1;
                }
                out.push((start, Tok::Ident(text[start..i].to_string())));
            }
            _ => {
                return Err(ParseError {
                    position: i,
                    message: format!("unexpected character `{}`", b as char),
                });
            }
        }
    }
    Ok(out)
}

struct Parser {
    tokens: Vec<(usize, Tok)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.tokens.get(self.pos).map(|(_, t)| t)
    }

    fn here(&self) -> usize {
        self.tokens
            .get(self.pos)
            .map(|(p, _)| *p)
            .unwrap_or_else(|| {
                self.tokens.last().map(|(p, _)| p + 1).unwrap_or(0)
            })
    }

    fn bump(&mut self) -> Option<Tok> {
        let tok = self.tokens.get(self.pos).map(|(_, t)| t.clone());
        self.pos += 1;
        tok
    }

    fn eat(&mut self, tok: &Tok) -> bool {
        if self.peek() == Some(tok) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, tok: Tok, what: &str) -> Result<(), ParseError> {
        if self.eat(&tok) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn expect_end(&mut self) -> Result<(), ParseError> {
        if self.pos == self.tokens.len() {
            Ok(())
        } else {
            Err(self.error("trailing input after formula".into()))
        }
    }

    fn error(&self, message: String) -> ParseError {
        ParseError {
            position: self.here(),
            message,
        }
    }

    fn iff(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.imp()?;
        if self.eat(&Tok::DoubleArrow) {
            let rhs = self.iff()?;
            Ok(Formula::iff(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn imp(&mut self) -> Result<Formula, ParseError> {
        let lhs = self.or()?;
        if self.eat(&Tok::Arrow) {
            let rhs = self.imp()?;
            Ok(Formula::imp(lhs, rhs))
        } else {
            Ok(lhs)
        }
    }

    fn or(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.and()?;
        while self.eat(&Tok::Pipe) {
            let rhs = self.and()?;
            lhs = Formula::or(lhs, rhs);
        }
        Ok(lhs)
    }

    fn and(&mut self) -> Result<Formula, ParseError> {
        let mut lhs = self.unary()?;
        while self.eat(&Tok::Amp) {
            let rhs = self.unary()?;
            lhs = Formula::and(lhs, rhs);
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> Result<Formula, ParseError> {
        match self.peek() {
            Some(Tok::Tilde) => {
                self.pos += 1;
                Ok(Formula::not(self.unary()?))
            }
            Some(Tok::NextOp) => {
                self.pos += 1;
                Ok(Formula::next(self.unary()?))
            }
            Some(Tok::AllOp) => {
                self.pos += 1;
                Ok(Formula::all(self.unary()?))
            }
            Some(Tok::ExOp) => {
                self.pos += 1;
                Ok(Formula::ex(self.unary()?))
            }
            Some(Tok::LBracket) => {
                let guard_pos = self.here();
                self.pos += 1;
                let announce = self.iff()?;
                self.expect(Tok::RBracket, "`]` closing the announcement")?;
                let body = self.unary()?;
                Formula::upd(announce, body).map_err(|e| ParseError {
                    position: guard_pos,
                    message: e.reason,
                })
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Formula, ParseError> {
        let pos = self.here();
        match self.bump() {
            Some(Tok::Ident(name)) => Ok(Formula::Atom(name)),
            Some(Tok::Top) => Ok(Formula::Top),
            Some(Tok::LParen) => {
                let inner = self.iff()?;
                self.expect(Tok::RParen, "`)`")?;
                Ok(inner)
            }
            other => Err(ParseError {
                position: pos,
                message: match other {
                    Some(_) => "expected a formula".into(),
                    None => "unexpected end of input".into(),
                },
            }),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(text: &str) -> Formula {
        parse(text).unwrap()
    }

    #[test]
    fn excluded_future_middle_desugars() {
        let s = Formula::atom("s");
        let expected = Formula::or(
            Formula::next(s.clone()),
            Formula::next(Formula::not(s)),
        );
        assert_eq!(p("X s | X ~s"), expected);
    }

    #[test]
    fn announcement_with_prefix_chain_body() {
        let s = Formula::atom("s");
        let expected = Formula::upd(
            Formula::next(s.clone()),
            Formula::all(Formula::next(s)),
        )
        .unwrap();
        assert_eq!(p("[X s] A X s"), expected);
    }

    #[test]
    fn and_binds_tighter_than_imp() {
        let expected = Formula::imp(
            Formula::and(Formula::atom("p"), Formula::atom("q")),
            Formula::atom("r"),
        );
        assert_eq!(p("p & q -> r"), expected);
    }

    #[test]
    fn prefix_binds_tighter_than_and() {
        let expected = Formula::and(
            Formula::not(Formula::atom("p")),
            Formula::next(Formula::atom("q")),
        );
        assert_eq!(p("~p & X q"), expected);
    }

    #[test]
    fn imp_is_right_associative() {
        let expected = Formula::imp(
            Formula::atom("p"),
            Formula::imp(Formula::atom("q"), Formula::atom("r")),
        );
        assert_eq!(p("p -> q -> r"), expected);
    }

    #[test]
    fn and_is_left_associative() {
        let expected = Formula::and(
            Formula::and(Formula::atom("p"), Formula::atom("q")),
            Formula::atom("r"),
        );
        assert_eq!(p("p & q & r"), expected);
    }

    #[test]
    fn parens_override_precedence() {
        let expected = Formula::and(
            Formula::atom("p"),
            Formula::imp(Formula::atom("q"), Formula::atom("r")),
        );
        assert_eq!(p("p & (q -> r)"), expected);
    }

    #[test]
    fn exists_desugars_to_not_all_not() {
        let expected = Formula::ex(Formula::atom("p"));
        assert_eq!(p("E p"), expected);
        assert!(matches!(p("E p"), Formula::Not(_)));
    }

    #[test]
    fn identifiers_allow_digits_and_underscore() {
        assert_eq!(p("sea_battle2"), Formula::atom("sea_battle2"));
    }

    #[test]
    fn announcement_guard_with_all_is_rejected() {
        let err = parse("[A p] q").unwrap_err();
        assert_eq!(err.position, 0);
        assert!(err.message.contains("may not contain A"));
    }

    #[test]
    fn announcement_guard_with_ex_is_rejected() {
        // E desugars through A, so it is banned in guards too.
        assert!(parse("[E p] q").is_err());
    }

    #[test]
    fn error_positions_point_at_offender() {
        let err = parse("p & & q").unwrap_err();
        assert_eq!(err.position, 4);
        let err = parse("p @ q").unwrap_err();
        assert_eq!(err.position, 2);
    }

    #[test]
    fn trailing_input_is_an_error() {
        assert!(parse("p q").is_err());
    }

    #[test]
    fn unclosed_announcement_is_an_error() {
        assert!(parse("[p q").is_err());
    }

    #[test]
    fn empty_input_is_an_error() {
        let err = parse("").unwrap_err();
        assert!(err.message.contains("end of input"));
    }

    #[test]
    fn non_ascii_is_rejected() {
        assert!(parse("p ∧ q").is_err());
    }
}
