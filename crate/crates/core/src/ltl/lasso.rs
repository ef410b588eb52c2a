//! Semantic LTL evaluation on ultimately-periodic words.
//!
//! A lasso `prefix · cycle^ω` has only `|prefix| + |cycle|` distinct
//! positions; satisfaction of every subformula is computed bottom-up as
//! a bit vector over those positions, with least/greatest fixpoints for
//! `Until`/`Release`. This is the independent correctness oracle for
//! the automaton translation.

use super::Ltl;
use std::collections::BTreeSet;

/// An ultimately-periodic infinite word `prefix · cycle^ω` over label
/// sets. The cycle must be non-empty.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LassoWord {
    pub prefix: Vec<BTreeSet<String>>,
    pub cycle: Vec<BTreeSet<String>>,
}

impl LassoWord {
    pub fn new(prefix: Vec<BTreeSet<String>>, cycle: Vec<BTreeSet<String>>) -> Self {
        assert!(!cycle.is_empty(), "lasso cycle must be non-empty");
        LassoWord { prefix, cycle }
    }

    /// Number of distinct positions.
    pub fn len(&self) -> usize {
        self.prefix.len() + self.cycle.len()
    }

    pub fn is_empty(&self) -> bool {
        false // an ω-word is never empty
    }

    /// Label set at distinct position `k` (0-based, `k < len`).
    pub fn at(&self, k: usize) -> &BTreeSet<String> {
        if k < self.prefix.len() {
            &self.prefix[k]
        } else {
            &self.cycle[k - self.prefix.len()]
        }
    }

    /// Successor of distinct position `k`: `k + 1`, wrapping from the
    /// last cycle position back to the cycle start.
    pub fn next(&self, k: usize) -> usize {
        if k + 1 < self.len() {
            k + 1
        } else {
            self.prefix.len()
        }
    }

    /// The same infinite word with the cycle rotated by `k`: the first
    /// `k` cycle entries move into the prefix.
    pub fn rotated(&self, k: usize) -> LassoWord {
        let k = k % self.cycle.len();
        let mut prefix = self.prefix.clone();
        prefix.extend(self.cycle[..k].iter().cloned());
        let mut cycle = self.cycle[k..].to_vec();
        cycle.extend(self.cycle[..k].iter().cloned());
        LassoWord { prefix, cycle }
    }
}

/// Does `prefix · cycle^ω` satisfy the formula?
pub fn eval_lasso(f: &Ltl, word: &LassoWord) -> bool {
    sat_vector(f, word)[0]
}

fn sat_vector(f: &Ltl, w: &LassoWord) -> Vec<bool> {
    let n = w.len();
    match f {
        Ltl::True => vec![true; n],
        Ltl::False => vec![false; n],
        Ltl::Atom(a) => (0..n).map(|k| w.at(k).contains(a)).collect(),
        Ltl::Not(x) => sat_vector(x, w).into_iter().map(|b| !b).collect(),
        Ltl::And(a, b) => zip_with(sat_vector(a, w), sat_vector(b, w), |x, y| x && y),
        Ltl::Or(a, b) => zip_with(sat_vector(a, w), sat_vector(b, w), |x, y| x || y),
        Ltl::Implies(a, b) => zip_with(sat_vector(a, w), sat_vector(b, w), |x, y| !x || y),
        Ltl::Next(x) => {
            let s = sat_vector(x, w);
            (0..n).map(|k| s[w.next(k)]).collect()
        }
        Ltl::Eventually(x) => lfp_until(&vec![true; n], &sat_vector(x, w), w),
        Ltl::Always(x) => gfp_release(&vec![false; n], &sat_vector(x, w), w),
        Ltl::Until(a, b) => lfp_until(&sat_vector(a, w), &sat_vector(b, w), w),
        Ltl::Release(a, b) => gfp_release(&sat_vector(a, w), &sat_vector(b, w), w),
    }
}

fn zip_with(a: Vec<bool>, b: Vec<bool>, f: impl Fn(bool, bool) -> bool) -> Vec<bool> {
    a.into_iter().zip(b).map(|(x, y)| f(x, y)).collect()
}

// a U b: least fixpoint of  sat[k] = b[k] | (a[k] & sat[next k]).
fn lfp_until(a: &[bool], b: &[bool], w: &LassoWord) -> Vec<bool> {
    let n = w.len();
    let mut sat = b.to_vec();
    loop {
        let mut changed = false;
        for k in (0..n).rev() {
            if !sat[k] && a[k] && sat[w.next(k)] {
                sat[k] = true;
                changed = true;
            }
        }
        if !changed {
            return sat;
        }
    }
}

// a R b: greatest fixpoint of  sat[k] = b[k] & (a[k] | sat[next k]).
fn gfp_release(a: &[bool], b: &[bool], w: &LassoWord) -> Vec<bool> {
    let n = w.len();
    let mut sat = b.to_vec();
    loop {
        let mut changed = false;
        for k in 0..n {
            if sat[k] && !(b[k] && (a[k] || sat[w.next(k)])) {
                sat[k] = false;
                changed = true;
            }
        }
        if !changed {
            return sat;
        }
    }
}
