//! LTL frontend: surface-syntax parser, negation normal form, semantic
//! evaluation on ultimately-periodic words, and translation to a
//! nondeterministic Büchi automaton.

mod lasso;
mod nnf;
mod parser;
mod translate;

pub use lasso::{eval_lasso, LassoWord};
pub use parser::{parse_ltl, LtlParseError};
pub use translate::{ltl_to_nba, ltl_to_nba_capped, TranslateError};

use std::collections::BTreeSet;
use std::fmt;

/// LTL formula tree over named atomic propositions.
///
/// Atom names are drawn from `[A-Za-z0-9_@]`; the convention for robot
/// propositions is `r<i>@<region>`, e.g. `r1@l5`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Ltl {
    True,
    False,
    Atom(String),
    Not(Box<Ltl>),
    And(Box<Ltl>, Box<Ltl>),
    Or(Box<Ltl>, Box<Ltl>),
    Implies(Box<Ltl>, Box<Ltl>),
    Next(Box<Ltl>),
    Until(Box<Ltl>, Box<Ltl>),
    Release(Box<Ltl>, Box<Ltl>),
    Eventually(Box<Ltl>),
    Always(Box<Ltl>),
}

impl Ltl {
    pub fn atom(name: impl Into<String>) -> Self {
        Ltl::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)] // constructor named after the connective
    pub fn not(f: Ltl) -> Self {
        Ltl::Not(Box::new(f))
    }

    pub fn and(a: Ltl, b: Ltl) -> Self {
        Ltl::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Ltl, b: Ltl) -> Self {
        Ltl::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Ltl, b: Ltl) -> Self {
        Ltl::Implies(Box::new(a), Box::new(b))
    }

    pub fn next(f: Ltl) -> Self {
        Ltl::Next(Box::new(f))
    }

    pub fn until(a: Ltl, b: Ltl) -> Self {
        Ltl::Until(Box::new(a), Box::new(b))
    }

    pub fn release(a: Ltl, b: Ltl) -> Self {
        Ltl::Release(Box::new(a), Box::new(b))
    }

    pub fn eventually(f: Ltl) -> Self {
        Ltl::Eventually(Box::new(f))
    }

    pub fn always(f: Ltl) -> Self {
        Ltl::Always(Box::new(f))
    }

    /// Conjoin a non-empty list of formulas left-associatively.
    pub fn conjoin(mut parts: Vec<Ltl>) -> Ltl {
        assert!(!parts.is_empty());
        let mut acc = parts.remove(0);
        for p in parts {
            acc = Ltl::and(acc, p);
        }
        acc
    }

    /// The set of atom names mentioned anywhere in the formula.
    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Ltl::True | Ltl::False => {}
            Ltl::Atom(a) => {
                out.insert(a.clone());
            }
            Ltl::Not(f) | Ltl::Next(f) | Ltl::Eventually(f) | Ltl::Always(f) => {
                f.collect_atoms(out)
            }
            Ltl::And(a, b)
            | Ltl::Or(a, b)
            | Ltl::Implies(a, b)
            | Ltl::Until(a, b)
            | Ltl::Release(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Flatten nested `And` nodes into the list of top-level conjuncts.
    pub fn conjuncts(&self) -> Vec<&Ltl> {
        let mut out = Vec::new();
        fn walk<'a>(f: &'a Ltl, out: &mut Vec<&'a Ltl>) {
            match f {
                Ltl::And(a, b) => {
                    walk(a, out);
                    walk(b, out);
                }
                other => out.push(other),
            }
        }
        walk(self, &mut out);
        out
    }

    /// Count operator occurrences of a given shape (used by tests and
    /// diagnostics).
    pub fn count(&self, pred: &dyn Fn(&Ltl) -> bool) -> usize {
        let mut n = if pred(self) { 1 } else { 0 };
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => {}
            Ltl::Not(f) | Ltl::Next(f) | Ltl::Eventually(f) | Ltl::Always(f) => {
                n += f.count(pred)
            }
            Ltl::And(a, b)
            | Ltl::Or(a, b)
            | Ltl::Implies(a, b)
            | Ltl::Until(a, b)
            | Ltl::Release(a, b) => {
                n += a.count(pred) + b.count(pred);
            }
        }
        n
    }

    pub fn to_nnf(&self) -> Ltl {
        nnf::to_nnf(self)
    }

    /// True when the formula is in negation normal form: `Not` only
    /// directly above atoms, and no `Eventually`/`Always`/`Implies`.
    pub fn is_nnf(&self) -> bool {
        match self {
            Ltl::True | Ltl::False | Ltl::Atom(_) => true,
            Ltl::Not(f) => matches!(**f, Ltl::Atom(_)),
            Ltl::Next(f) => f.is_nnf(),
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Until(a, b) | Ltl::Release(a, b) => {
                a.is_nnf() && b.is_nnf()
            }
            Ltl::Implies(..) | Ltl::Eventually(_) | Ltl::Always(_) => false,
        }
    }
}

// Binding strength used by the printer; mirrors the parser's precedence
// (unary > Until/Release > And > Or > Implies).
fn level(f: &Ltl) -> u8 {
    match f {
        Ltl::True | Ltl::False | Ltl::Atom(_) => 5,
        Ltl::Not(_) | Ltl::Next(_) | Ltl::Eventually(_) | Ltl::Always(_) => 4,
        Ltl::Until(..) | Ltl::Release(..) => 3,
        Ltl::And(..) => 2,
        Ltl::Or(..) => 1,
        Ltl::Implies(..) => 0,
    }
}

fn fmt_at(f: &Ltl, parent: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let me = level(f);
    let paren = me < parent;
    if paren {
        write!(out, "(")?;
    }
    match f {
        Ltl::True => write!(out, "true")?,
        Ltl::False => write!(out, "false")?,
        Ltl::Atom(a) => write!(out, "{a}")?,
        Ltl::Not(x) => {
            write!(out, "!")?;
            fmt_at(x, 5, out)?;
        }
        Ltl::Next(x) => {
            write!(out, "X ")?;
            fmt_at(x, 4, out)?;
        }
        Ltl::Eventually(x) => {
            write!(out, "F ")?;
            fmt_at(x, 4, out)?;
        }
        Ltl::Always(x) => {
            write!(out, "G ")?;
            fmt_at(x, 4, out)?;
        }
        // Until/Release are right-associative: the left operand needs
        // parens when it is itself an Until/Release.
        Ltl::Until(a, b) => {
            fmt_at(a, 4, out)?;
            write!(out, " U ")?;
            fmt_at(b, 3, out)?;
        }
        Ltl::Release(a, b) => {
            fmt_at(a, 4, out)?;
            write!(out, " R ")?;
            fmt_at(b, 3, out)?;
        }
        Ltl::And(a, b) => {
            fmt_at(a, 2, out)?;
            write!(out, " & ")?;
            fmt_at(b, 3, out)?;
        }
        Ltl::Or(a, b) => {
            fmt_at(a, 1, out)?;
            write!(out, " | ")?;
            fmt_at(b, 2, out)?;
        }
        Ltl::Implies(a, b) => {
            fmt_at(a, 1, out)?;
            write!(out, " -> ")?;
            fmt_at(b, 0, out)?;
        }
    }
    if paren {
        write!(out, ")")?;
    }
    Ok(())
}

impl fmt::Display for Ltl {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_at(self, 0, f)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn conjunct_flattening() {
        let f = parse_ltl("a & b & c & d").unwrap();
        assert_eq!(f.conjuncts().len(), 4);
    }

    fn arb_ltl() -> impl Strategy<Value = Ltl> {
        let leaf = prop_oneof![
            Just(Ltl::True),
            Just(Ltl::False),
            "[abc]".prop_map(Ltl::Atom),
        ];
        leaf.prop_recursive(4, 64, 2, |inner| {
            prop_oneof![
                inner.clone().prop_map(Ltl::not),
                inner.clone().prop_map(Ltl::next),
                inner.clone().prop_map(Ltl::eventually),
                inner.clone().prop_map(Ltl::always),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::and(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::or(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::implies(a, b)),
                (inner.clone(), inner.clone()).prop_map(|(a, b)| Ltl::until(a, b)),
                (inner.clone(), inner).prop_map(|(a, b)| Ltl::release(a, b)),
            ]
        })
    }

    proptest! {
        // Pretty-printing then reparsing yields an identical tree.
        #[test]
        fn print_parse_round_trip(f in arb_ltl()) {
            let text = f.to_string();
            let back = parse_ltl(&text).unwrap();
            prop_assert_eq!(f, back);
        }
    }
}
