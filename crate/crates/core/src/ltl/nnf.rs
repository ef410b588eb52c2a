//! Negation normal form. `Eventually`, `Always` and `Implies` are
//! rewritten away (`F a = true U a`, `G a = false R a`,
//! `a -> b = !a | b`) and negation is pushed down to atoms through the
//! usual dualities.

use super::Ltl;

pub fn to_nnf(f: &Ltl) -> Ltl {
    pos(f)
}

fn pos(f: &Ltl) -> Ltl {
    match f {
        Ltl::True => Ltl::True,
        Ltl::False => Ltl::False,
        Ltl::Atom(a) => Ltl::Atom(a.clone()),
        Ltl::Not(x) => neg(x),
        Ltl::And(a, b) => Ltl::and(pos(a), pos(b)),
        Ltl::Or(a, b) => Ltl::or(pos(a), pos(b)),
        Ltl::Implies(a, b) => Ltl::or(neg(a), pos(b)),
        Ltl::Next(x) => Ltl::next(pos(x)),
        Ltl::Until(a, b) => Ltl::until(pos(a), pos(b)),
        Ltl::Release(a, b) => Ltl::release(pos(a), pos(b)),
        Ltl::Eventually(x) => Ltl::until(Ltl::True, pos(x)),
        Ltl::Always(x) => Ltl::release(Ltl::False, pos(x)),
    }
}

fn neg(f: &Ltl) -> Ltl {
    match f {
        Ltl::True => Ltl::False,
        Ltl::False => Ltl::True,
        Ltl::Atom(a) => Ltl::not(Ltl::Atom(a.clone())),
        Ltl::Not(x) => pos(x),
        Ltl::And(a, b) => Ltl::or(neg(a), neg(b)),
        Ltl::Or(a, b) => Ltl::and(neg(a), neg(b)),
        Ltl::Implies(a, b) => Ltl::and(pos(a), neg(b)),
        Ltl::Next(x) => Ltl::next(neg(x)),
        Ltl::Until(a, b) => Ltl::release(neg(a), neg(b)),
        Ltl::Release(a, b) => Ltl::until(neg(a), neg(b)),
        // !F a = G !a = false R !a; !G a = F !a = true U !a
        Ltl::Eventually(x) => Ltl::release(Ltl::False, neg(x)),
        Ltl::Always(x) => Ltl::until(Ltl::True, neg(x)),
    }
}
