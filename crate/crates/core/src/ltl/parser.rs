//! Recursive-descent parser for the LTL surface syntax.
//!
//! Precedence, loosest to tightest: `->`, `|`, `&`, `U`/`R`, unary
//! (`!`, `X`, `F`, `G`, `<>`, `[]`). `U` and `R` are right-associative,
//! as is `->`. `#` starts a comment that runs to end of line. Both
//! letter-style (`F`, `G`) and bracket-style (`<>`, `[]`) aliases are
//! accepted; `&&` and `||` are synonyms for `&` and `|`.

use super::Ltl;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LtlParseError {
    #[error("syntax error at byte {offset}: found {found}, expected {}", expected.join(", "))]
    Syntax {
        offset: usize,
        found: String,
        expected: Vec<String>,
    },
    #[error("unknown operator {text:?} at byte {offset}")]
    UnknownOperator { offset: usize, text: String },
}

#[derive(Debug, Clone, PartialEq, Eq)]
enum Tok {
    Atom(String),
    True,
    False,
    Not,
    And,
    Or,
    Implies,
    Next,
    Until,
    Release,
    Eventually,
    Always,
    LParen,
    RParen,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Atom(a) => format!("atom {a:?}"),
            Tok::True => "`true`".into(),
            Tok::False => "`false`".into(),
            Tok::Not => "`!`".into(),
            Tok::And => "`&`".into(),
            Tok::Or => "`|`".into(),
            Tok::Implies => "`->`".into(),
            Tok::Next => "`X`".into(),
            Tok::Until => "`U`".into(),
            Tok::Release => "`R`".into(),
            Tok::Eventually => "`F`".into(),
            Tok::Always => "`G`".into(),
            Tok::LParen => "`(`".into(),
            Tok::RParen => "`)`".into(),
            Tok::Eof => "end of input".into(),
        }
    }
}

fn is_atom_char(c: u8) -> bool {
    c.is_ascii_alphanumeric() || c == b'_' || c == b'@'
}

fn tokenize(text: &str) -> Result<Vec<(Tok, usize)>, LtlParseError> {
    let bytes = text.as_bytes();
    let mut toks = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        let c = bytes[i];
        match c {
            b' ' | b'\t' | b'\r' | b'\n' => i += 1,
            b'#' => {
                while i < bytes.len() && bytes[i] != b'\n' {
                    i += 1;
                }
            }
            b'(' => {
                toks.push((Tok::LParen, i));
                i += 1;
            }
            b')' => {
                toks.push((Tok::RParen, i));
                i += 1;
            }
            b'!' => {
                toks.push((Tok::Not, i));
                i += 1;
            }
            b'&' => {
                toks.push((Tok::And, i));
                i += if bytes.get(i + 1) == Some(&b'&') { 2 } else { 1 };
            }
            b'|' => {
                toks.push((Tok::Or, i));
                i += if bytes.get(i + 1) == Some(&b'|') { 2 } else { 1 };
            }
            b'-' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Implies, i));
                    i += 2;
                } else {
                    return Err(LtlParseError::UnknownOperator {
                        offset: i,
                        text: "-".into(),
                    });
                }
            }
            b'<' => {
                if bytes.get(i + 1) == Some(&b'>') {
                    toks.push((Tok::Eventually, i));
                    i += 2;
                } else {
                    return Err(LtlParseError::UnknownOperator {
                        offset: i,
                        text: "<".into(),
                    });
                }
            }
            b'[' => {
                if bytes.get(i + 1) == Some(&b']') {
                    toks.push((Tok::Always, i));
                    i += 2;
                } else {
                    return Err(LtlParseError::UnknownOperator {
                        offset: i,
                        text: "[".into(),
                    });
                }
            }
            c if is_atom_char(c) => {
                let start = i;
                while i < bytes.len() && is_atom_char(bytes[i]) {
                    i += 1;
                }
                let word = &text[start..i];
                let tok = match word {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "U" => Tok::Until,
                    "R" => Tok::Release,
                    "X" => Tok::Next,
                    "F" => Tok::Eventually,
                    "G" => Tok::Always,
                    _ => Tok::Atom(word.to_string()),
                };
                toks.push((tok, start));
            }
            other => {
                return Err(LtlParseError::UnknownOperator {
                    offset: i,
                    text: (other as char).to_string(),
                });
            }
        }
    }
    toks.push((Tok::Eof, text.len()));
    Ok(toks)
}

struct Parser {
    toks: Vec<(Tok, usize)>,
    pos: usize,
}

impl Parser {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].0
    }

    fn offset(&self) -> usize {
        self.toks[self.pos].1
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].0.clone();
        self.pos += 1;
        t
    }

    fn err(&self, expected: &[&str]) -> LtlParseError {
        LtlParseError::Syntax {
            offset: self.offset(),
            found: self.peek().describe(),
            expected: expected.iter().map(|s| s.to_string()).collect(),
        }
    }

    // implies := or ('->' implies)?
    fn implies(&mut self) -> Result<Ltl, LtlParseError> {
        let lhs = self.or()?;
        if *self.peek() == Tok::Implies {
            self.bump();
            let rhs = self.implies()?;
            return Ok(Ltl::implies(lhs, rhs));
        }
        Ok(lhs)
    }

    // or := and ('|' and)*
    fn or(&mut self) -> Result<Ltl, LtlParseError> {
        let mut lhs = self.and()?;
        while *self.peek() == Tok::Or {
            self.bump();
            let rhs = self.and()?;
            lhs = Ltl::or(lhs, rhs);
        }
        Ok(lhs)
    }

    // and := until ('&' until)*
    fn and(&mut self) -> Result<Ltl, LtlParseError> {
        let mut lhs = self.until()?;
        while *self.peek() == Tok::And {
            self.bump();
            let rhs = self.until()?;
            lhs = Ltl::and(lhs, rhs);
        }
        Ok(lhs)
    }

    // until := unary (('U' | 'R') until)?   (right-associative)
    fn until(&mut self) -> Result<Ltl, LtlParseError> {
        let lhs = self.unary()?;
        match self.peek() {
            Tok::Until => {
                self.bump();
                let rhs = self.until()?;
                Ok(Ltl::until(lhs, rhs))
            }
            Tok::Release => {
                self.bump();
                let rhs = self.until()?;
                Ok(Ltl::release(lhs, rhs))
            }
            _ => Ok(lhs),
        }
    }

    fn unary(&mut self) -> Result<Ltl, LtlParseError> {
        match self.peek() {
            Tok::Not => {
                self.bump();
                Ok(Ltl::not(self.unary()?))
            }
            Tok::Next => {
                self.bump();
                Ok(Ltl::next(self.unary()?))
            }
            Tok::Eventually => {
                self.bump();
                Ok(Ltl::eventually(self.unary()?))
            }
            Tok::Always => {
                self.bump();
                Ok(Ltl::always(self.unary()?))
            }
            _ => self.primary(),
        }
    }

    fn primary(&mut self) -> Result<Ltl, LtlParseError> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Ltl::True)
            }
            Tok::False => {
                self.bump();
                Ok(Ltl::False)
            }
            Tok::Atom(a) => {
                self.bump();
                Ok(Ltl::Atom(a))
            }
            Tok::LParen => {
                self.bump();
                let inner = self.implies()?;
                if *self.peek() != Tok::RParen {
                    return Err(self.err(&["`)`"]));
                }
                self.bump();
                Ok(inner)
            }
            _ => Err(self.err(&["atom", "`true`", "`false`", "`!`", "`X`", "`F`", "`G`", "`(`"])),
        }
    }
}

/// Parse LTL formula text into an AST.
pub fn parse_ltl(text: &str) -> Result<Ltl, LtlParseError> {
    let toks = tokenize(text)?;
    let mut p = Parser { toks, pos: 0 };
    let f = p.implies()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(&["end of input", "binary operator"]));
    }
    Ok(f)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_gfa() {
        let f = parse_ltl("G F a").unwrap();
        assert_eq!(f, Ltl::always(Ltl::eventually(Ltl::atom("a"))));
    }

    #[test]
    fn parses_until_with_boolean_rhs() {
        let f = parse_ltl("a U (b & !c)").unwrap();
        assert_eq!(
            f,
            Ltl::until(
                Ltl::atom("a"),
                Ltl::and(Ltl::atom("b"), Ltl::not(Ltl::atom("c")))
            )
        );
    }

    #[test]
    fn missing_operand_reports_end_of_input() {
        let err = parse_ltl("a U").unwrap_err();
        match err {
            LtlParseError::Syntax {
                offset,
                found,
                expected,
            } => {
                assert_eq!(offset, 3);
                assert!(found.contains("end of input"));
                assert!(!expected.is_empty());
            }
            other => panic!("expected syntax error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_operator_is_reported_with_offset() {
        let err = parse_ltl("a = b").unwrap_err();
        assert_eq!(
            err,
            LtlParseError::UnknownOperator {
                offset: 2,
                text: "=".into()
            }
        );
    }

    #[test]
    fn until_is_right_associative() {
        let f = parse_ltl("a U b U c").unwrap();
        assert_eq!(
            f,
            Ltl::until(Ltl::atom("a"), Ltl::until(Ltl::atom("b"), Ltl::atom("c")))
        );
    }

    #[test]
    fn precedence_unary_until_and_or_implies() {
        // !a U b  ==  (!a) U b; a & b U c == a & (b U c); a | b & c == a | (b & c)
        assert_eq!(
            parse_ltl("!a U b").unwrap(),
            Ltl::until(Ltl::not(Ltl::atom("a")), Ltl::atom("b"))
        );
        assert_eq!(
            parse_ltl("a & b U c").unwrap(),
            Ltl::and(Ltl::atom("a"), Ltl::until(Ltl::atom("b"), Ltl::atom("c")))
        );
        assert_eq!(
            parse_ltl("a | b & c").unwrap(),
            Ltl::or(Ltl::atom("a"), Ltl::and(Ltl::atom("b"), Ltl::atom("c")))
        );
        assert_eq!(
            parse_ltl("a -> b -> c").unwrap(),
            Ltl::implies(Ltl::atom("a"), Ltl::implies(Ltl::atom("b"), Ltl::atom("c")))
        );
    }

    #[test]
    fn spin_style_aliases() {
        assert_eq!(parse_ltl("[] <> a").unwrap(), parse_ltl("G F a").unwrap());
        assert_eq!(parse_ltl("a && b").unwrap(), parse_ltl("a & b").unwrap());
        assert_eq!(parse_ltl("a || b").unwrap(), parse_ltl("a | b").unwrap());
    }

    #[test]
    fn comments_are_skipped() {
        let f = parse_ltl("# task\nG F a # recurrence\n").unwrap();
        assert_eq!(f, parse_ltl("G F a").unwrap());
    }

    #[test]
    fn case_study_conjunction_shape() {
        // Five conjuncts, one Until, one Next, over r<i>@<region> atoms.
        let text = "[] <> (r1@l6 & <> r2@l14) & [] !r1@l9 \
                    & [] (r2@l14 -> X (!r2@l14 U r1@l4)) & <> r2@l12 & [] <> r2@l10";
        let f = parse_ltl(text).unwrap();
        assert_eq!(f.conjuncts().len(), 5);
        assert_eq!(f.count(&|n| matches!(n, Ltl::Until(..))), 1);
        assert_eq!(f.count(&|n| matches!(n, Ltl::Next(_))), 1);
    }
}
