//! Nondeterministic Büchi automata with boolean edge guards, a
//! line-oriented text exchange format, and lasso-word acceptance.

mod acceptance;
mod format;

pub use format::{emit_nba, parse_nba};

use crate::ltl::LassoWord;
use std::collections::{BTreeSet, HashMap};
use std::fmt;
use thiserror::Error;

pub type StateId = u32;

/// Boolean guard over atom names, evaluated against a label set
/// (an atom is true iff it is present in the set).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Guard {
    True,
    False,
    Atom(String),
    Not(Box<Guard>),
    And(Box<Guard>, Box<Guard>),
    Or(Box<Guard>, Box<Guard>),
}

impl Guard {
    pub fn atom(name: impl Into<String>) -> Self {
        Guard::Atom(name.into())
    }

    #[allow(clippy::should_implement_trait)] // constructor named after the connective
    pub fn not(g: Guard) -> Self {
        Guard::Not(Box::new(g))
    }

    pub fn and(a: Guard, b: Guard) -> Self {
        Guard::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Guard, b: Guard) -> Self {
        Guard::Or(Box::new(a), Box::new(b))
    }

    /// Conjoin a list of guards; the empty list yields `true`.
    pub fn conjoin(parts: Vec<Guard>) -> Guard {
        let mut it = parts.into_iter();
        match it.next() {
            None => Guard::True,
            Some(first) => it.fold(first, Guard::and),
        }
    }

    pub fn atoms(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_atoms(&mut out);
        out
    }

    fn collect_atoms(&self, out: &mut BTreeSet<String>) {
        match self {
            Guard::True | Guard::False => {}
            Guard::Atom(a) => {
                out.insert(a.clone());
            }
            Guard::Not(g) => g.collect_atoms(out),
            Guard::And(a, b) | Guard::Or(a, b) => {
                a.collect_atoms(out);
                b.collect_atoms(out);
            }
        }
    }

    /// Evaluate without alphabet checking.
    pub fn eval(&self, labels: &BTreeSet<String>) -> bool {
        match self {
            Guard::True => true,
            Guard::False => false,
            Guard::Atom(a) => labels.contains(a),
            Guard::Not(g) => !g.eval(labels),
            Guard::And(a, b) => a.eval(labels) && b.eval(labels),
            Guard::Or(a, b) => a.eval(labels) || b.eval(labels),
        }
    }
}

fn guard_level(g: &Guard) -> u8 {
    match g {
        Guard::True | Guard::False | Guard::Atom(_) | Guard::Not(_) => 3,
        Guard::And(..) => 2,
        Guard::Or(..) => 1,
    }
}

fn fmt_guard(g: &Guard, parent: u8, out: &mut fmt::Formatter<'_>) -> fmt::Result {
    let me = guard_level(g);
    let paren = me < parent;
    if paren {
        write!(out, "(")?;
    }
    match g {
        Guard::True => write!(out, "true")?,
        Guard::False => write!(out, "false")?,
        Guard::Atom(a) => write!(out, "{a}")?,
        Guard::Not(x) => {
            write!(out, "!")?;
            fmt_guard(x, 3, out)?;
        }
        Guard::And(a, b) => {
            fmt_guard(a, 2, out)?;
            write!(out, " & ")?;
            fmt_guard(b, 3, out)?;
        }
        Guard::Or(a, b) => {
            fmt_guard(a, 1, out)?;
            write!(out, " | ")?;
            fmt_guard(b, 2, out)?;
        }
    }
    if paren {
        write!(out, ")")?;
    }
    Ok(())
}

impl fmt::Display for Guard {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_guard(self, 0, f)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NbaEdge {
    pub src: StateId,
    pub guard: Guard,
    pub dst: StateId,
}

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("unknown atom {atom:?}: not in the automaton alphabet")]
    UnknownAtom { atom: String },
    #[error("state index {0} out of range")]
    BadState(StateId),
    #[error("automaton has no initial state")]
    NoInitialState,
}

/// Nondeterministic Büchi automaton. State identity is the index; names
/// are metadata carried for readable output.
#[derive(Debug, Clone)]
pub struct Nba {
    state_names: Vec<String>,
    initial: Vec<StateId>,
    accepting: Vec<StateId>,
    alphabet: Vec<String>,
    alphabet_index: HashMap<String, u32>,
    edges: Vec<NbaEdge>,
    out_edges: Vec<Vec<usize>>,
    in_edges: Vec<Vec<usize>>,
}

impl Nba {
    pub fn new(alphabet: impl IntoIterator<Item = String>) -> Self {
        let mut nba = Nba {
            state_names: Vec::new(),
            initial: Vec::new(),
            accepting: Vec::new(),
            alphabet: Vec::new(),
            alphabet_index: HashMap::new(),
            edges: Vec::new(),
            out_edges: Vec::new(),
            in_edges: Vec::new(),
        };
        for a in alphabet {
            nba.add_alphabet_atom(a);
        }
        nba
    }

    pub fn add_alphabet_atom(&mut self, atom: String) {
        if !self.alphabet_index.contains_key(&atom) {
            self.alphabet_index
                .insert(atom.clone(), self.alphabet.len() as u32);
            self.alphabet.push(atom);
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        let id = self.state_names.len() as StateId;
        self.state_names.push(name.into());
        self.out_edges.push(Vec::new());
        self.in_edges.push(Vec::new());
        id
    }

    pub fn mark_initial(&mut self, q: StateId) {
        if !self.initial.contains(&q) {
            self.initial.push(q);
        }
    }

    pub fn mark_accepting(&mut self, q: StateId) {
        if !self.accepting.contains(&q) {
            self.accepting.push(q);
        }
    }

    /// Add an edge, merging with an existing edge between the same pair
    /// of states by disjunction. Guard atoms must be in the alphabet.
    pub fn add_edge(&mut self, src: StateId, guard: Guard, dst: StateId) -> Result<(), AutomatonError> {
        self.check_state(src)?;
        self.check_state(dst)?;
        for atom in guard.atoms() {
            if !self.alphabet_index.contains_key(&atom) {
                return Err(AutomatonError::UnknownAtom { atom });
            }
        }
        if let Some(&ei) = self.out_edges[src as usize]
            .iter()
            .find(|&&ei| self.edges[ei].dst == dst)
        {
            let old = self.edges[ei].guard.clone();
            if old != guard {
                self.edges[ei].guard = Guard::or(old, guard);
            }
            return Ok(());
        }
        let ei = self.edges.len();
        self.edges.push(NbaEdge { src, guard, dst });
        self.out_edges[src as usize].push(ei);
        self.in_edges[dst as usize].push(ei);
        Ok(())
    }

    fn check_state(&self, q: StateId) -> Result<(), AutomatonError> {
        if (q as usize) < self.state_names.len() {
            Ok(())
        } else {
            Err(AutomatonError::BadState(q))
        }
    }

    pub fn num_states(&self) -> usize {
        self.state_names.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn state_name(&self, q: StateId) -> &str {
        &self.state_names[q as usize]
    }

    pub fn initial_states(&self) -> &[StateId] {
        &self.initial
    }

    pub fn accepting_states(&self) -> &[StateId] {
        &self.accepting
    }

    pub fn is_accepting(&self, q: StateId) -> bool {
        self.accepting.contains(&q)
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn edges(&self) -> &[NbaEdge] {
        &self.edges
    }

    pub fn out_edges(&self, q: StateId) -> impl Iterator<Item = &NbaEdge> {
        self.out_edges[q as usize].iter().map(|&ei| &self.edges[ei])
    }

    pub fn in_edges(&self, q: StateId) -> impl Iterator<Item = &NbaEdge> {
        self.in_edges[q as usize].iter().map(|&ei| &self.edges[ei])
    }

    /// labelSet ⊨ guard, with alphabet checking.
    pub fn guard_sat(
        &self,
        guard: &Guard,
        labels: &BTreeSet<String>,
    ) -> Result<bool, AutomatonError> {
        for atom in guard.atoms() {
            if !self.alphabet_index.contains_key(&atom) {
                return Err(AutomatonError::UnknownAtom { atom });
            }
        }
        Ok(guard.eval(labels))
    }

    /// States reachable from `q` in one step under the given label set.
    pub fn successors(
        &self,
        q: StateId,
        labels: &BTreeSet<String>,
    ) -> Result<BTreeSet<StateId>, AutomatonError> {
        self.check_state(q)?;
        let mut out = BTreeSet::new();
        for edge in self.out_edges(q) {
            if self.guard_sat(&edge.guard, labels)? {
                out.insert(edge.dst);
            }
        }
        Ok(out)
    }

    /// Does some run over `prefix · cycle^ω` visit an accepting state
    /// infinitely often?
    pub fn accepts_lasso(&self, word: &LassoWord) -> bool {
        acceptance::accepts_lasso(self, word)
    }

    /// Sanity-check the structural invariants (used after ingest).
    pub fn validate(&self) -> Result<(), AutomatonError> {
        if self.initial.is_empty() {
            return Err(AutomatonError::NoInitialState);
        }
        for &q in self.initial.iter().chain(self.accepting.iter()) {
            self.check_state(q)?;
        }
        for e in &self.edges {
            self.check_state(e.src)?;
            self.check_state(e.dst)?;
            for atom in e.guard.atoms() {
                if !self.alphabet_index.contains_key(&atom) {
                    return Err(AutomatonError::UnknownAtom { atom });
                }
            }
        }
        Ok(())
    }
}
