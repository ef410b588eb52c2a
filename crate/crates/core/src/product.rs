//! Implicit product of the team transition system with a Büchi
//! automaton: joint product states, the product transition rule,
//! goal-set predicates and lazy successor enumeration. The product is
//! never materialized here; the explicit construction lives in the
//! oracle module behind size limits.

use crate::automaton::{Guard, Nba, StateId};
use crate::model::{MultiRobotModel, ModelError, PtsState};
use crate::util::{slice_get_bit, BitMatrix};
use std::collections::HashMap;
use thiserror::Error;

/// A state of the product automaton: a joint robot state paired with an
/// automaton state. Equality and hashing are componentwise.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ProductState {
    pub pts: PtsState,
    pub buchi: StateId,
}

impl ProductState {
    pub fn new(pts: PtsState, buchi: StateId) -> Self {
        ProductState { pts, buchi }
    }
}

#[derive(Debug, Clone, Error, PartialEq)]
pub enum ProductError {
    #[error("automaton has no initial state")]
    NoInitialState,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Guard compiled over interned atom indices: evaluation against a label
/// bit mask needs no string lookups.
#[derive(Debug, Clone)]
enum CGuard {
    True,
    False,
    Atom(u32),
    Not(Box<CGuard>),
    And(Box<CGuard>, Box<CGuard>),
    Or(Box<CGuard>, Box<CGuard>),
}

impl CGuard {
    fn compile(g: &Guard, atom_index: &HashMap<String, u32>) -> CGuard {
        match g {
            Guard::True => CGuard::True,
            Guard::False => CGuard::False,
            // Atoms outside the joint atom table can never hold.
            Guard::Atom(a) => match atom_index.get(a) {
                Some(&i) => CGuard::Atom(i),
                None => CGuard::False,
            },
            Guard::Not(x) => CGuard::Not(Box::new(CGuard::compile(x, atom_index))),
            Guard::And(a, b) => CGuard::And(
                Box::new(CGuard::compile(a, atom_index)),
                Box::new(CGuard::compile(b, atom_index)),
            ),
            Guard::Or(a, b) => CGuard::Or(
                Box::new(CGuard::compile(a, atom_index)),
                Box::new(CGuard::compile(b, atom_index)),
            ),
        }
    }

    fn eval(&self, labels: &[u64]) -> bool {
        match self {
            CGuard::True => true,
            CGuard::False => false,
            CGuard::Atom(i) => slice_get_bit(labels, *i as usize),
            CGuard::Not(x) => !x.eval(labels),
            CGuard::And(a, b) => a.eval(labels) && b.eval(labels),
            CGuard::Or(a, b) => a.eval(labels) || b.eval(labels),
        }
    }
}

/// Stateless product queries over an immutable model and automaton,
/// with precompiled adjacency bit matrices, label masks and guards.
pub struct ProductSpace<'a> {
    model: &'a MultiRobotModel,
    nba: &'a Nba,
    atom_count: usize,
    atom_words: usize,
    /// per robot: state -> atom mask
    robot_labels: Vec<BitMatrix>,
    /// per robot: src state -> dst-state adjacency mask
    robot_adj: Vec<BitMatrix>,
    /// per automaton state: outgoing (dst, guard) in edge order
    nba_out: Vec<Vec<(StateId, CGuard)>>,
    /// per automaton state: incoming (src, guard) in edge order
    nba_in: Vec<Vec<(StateId, CGuard)>>,
    accepting: Vec<bool>,
    qb_words: usize,
    /// mixed-radix multipliers for packing a joint robot state into u64
    radix: Option<Vec<u64>>,
}

impl<'a> ProductSpace<'a> {
    pub fn new(model: &'a MultiRobotModel, nba: &'a Nba) -> Result<Self, ProductError> {
        if nba.initial_states().is_empty() {
            return Err(ProductError::NoInitialState);
        }
        let mut atom_index: HashMap<String, u32> = HashMap::new();
        let mut atom_count = 0u32;
        let mut intern = |name: &str, atom_index: &mut HashMap<String, u32>| {
            if !atom_index.contains_key(name) {
                atom_index.insert(name.to_string(), atom_count);
                atom_count += 1;
            }
        };
        for r in model.robots() {
            for q in 0..r.num_states() as u32 {
                for atom in r.labels(q) {
                    intern(atom, &mut atom_index);
                }
            }
        }
        for atom in nba.alphabet() {
            intern(atom, &mut atom_index);
        }
        let atom_count = atom_count as usize;

        let robot_labels = model
            .robots()
            .iter()
            .map(|r| {
                let mut m = BitMatrix::new(r.num_states(), atom_count.max(1));
                for q in 0..r.num_states() {
                    for atom in r.labels(q as u32) {
                        m.set(q, atom_index[atom] as usize);
                    }
                }
                m
            })
            .collect();

        let robot_adj = model
            .robots()
            .iter()
            .map(|r| {
                let mut m = BitMatrix::new(r.num_states(), r.num_states());
                for q in 0..r.num_states() {
                    for &(d, _) in r.successors(q as u32) {
                        m.set(q, d as usize);
                    }
                }
                m
            })
            .collect();

        let nq = nba.num_states();
        let mut nba_out: Vec<Vec<(StateId, CGuard)>> = vec![Vec::new(); nq];
        let mut nba_in: Vec<Vec<(StateId, CGuard)>> = vec![Vec::new(); nq];
        for e in nba.edges() {
            let g = CGuard::compile(&e.guard, &atom_index);
            nba_out[e.src as usize].push((e.dst, g.clone()));
            nba_in[e.dst as usize].push((e.src, g));
        }
        let mut accepting = vec![false; nq];
        for &q in nba.accepting_states() {
            accepting[q as usize] = true;
        }

        let radix = model.pts_state_count().map(|_| {
            let mut radix = vec![1u64; model.num_robots()];
            for i in (0..model.num_robots().saturating_sub(1)).rev() {
                radix[i] = radix[i + 1] * model.robot(i + 1).num_states() as u64;
            }
            radix
        });

        Ok(ProductSpace {
            model,
            nba,
            atom_count,
            atom_words: atom_count.div_ceil(64).max(1),
            robot_labels,
            robot_adj,
            nba_out,
            nba_in,
            accepting,
            qb_words: nq.div_ceil(64).max(1),
            radix,
        })
    }

    pub fn model(&self) -> &'a MultiRobotModel {
        self.model
    }

    pub fn nba(&self) -> &'a Nba {
        self.nba
    }

    pub fn atom_words(&self) -> usize {
        self.atom_words
    }

    pub fn qb_words(&self) -> usize {
        self.qb_words
    }

    pub fn num_buchi_states(&self) -> usize {
        self.nba.num_states()
    }

    /// Initial product states, one per initial automaton state, in the
    /// automaton's declaration order.
    pub fn initial_states(&self) -> Vec<ProductState> {
        let pts = self.model.initial_pts();
        self.nba
            .initial_states()
            .iter()
            .map(|&b| ProductState::new(pts.clone(), b))
            .collect()
    }

    /// OR the label masks of all robot components into `out`.
    pub fn label_mask_into(&self, pts: &[u32], out: &mut [u64]) {
        out.fill(0);
        for (i, &q) in pts.iter().enumerate() {
            for (w, &src) in out
                .iter_mut()
                .zip(self.robot_labels[i].row(q as usize).iter())
            {
                *w |= src;
            }
        }
    }

    pub fn label_mask(&self, pts: &[u32]) -> Vec<u64> {
        let mut out = vec![0u64; self.atom_words];
        self.label_mask_into(pts, &mut out);
        out
    }

    /// Joint mobility rule on raw component slices.
    #[inline]
    pub fn pts_adjacent(&self, from: &[u32], to: &[u32]) -> bool {
        from.iter()
            .zip(to.iter())
            .enumerate()
            .all(|(i, (&a, &b))| self.robot_adj[i].get(a as usize, b as usize))
    }

    /// Sum of per-robot edge weights; caller guarantees adjacency.
    #[inline]
    pub fn pts_weight_unchecked(&self, from: &[u32], to: &[u32]) -> f64 {
        let mut total = 0.0;
        for (i, (&a, &b)) in from.iter().zip(to.iter()).enumerate() {
            total += self
                .model
                .robot(i)
                .edge_weight(a, b)
                .expect("adjacency was checked");
        }
        total
    }

    /// Automaton successor mask of `buchi` under a source label mask.
    pub fn nba_successor_mask_into(&self, buchi: StateId, labels: &[u64], out: &mut [u64]) {
        out.fill(0);
        for (dst, g) in &self.nba_out[buchi as usize] {
            if g.eval(labels) {
                crate::util::slice_set_bit(out, *dst as usize);
            }
        }
    }

    /// Does the automaton allow `src -> dst` under the given label mask?
    pub fn nba_step_allowed(&self, src: StateId, dst: StateId, labels: &[u64]) -> bool {
        self.nba_out[src as usize]
            .iter()
            .any(|(d, g)| *d == dst && g.eval(labels))
    }

    pub fn nba_in_edges(&self, dst: StateId) -> impl Iterator<Item = StateId> + '_ {
        self.nba_in[dst as usize].iter().map(|(s, _)| *s)
    }

    /// Incoming automaton states that can step to `dst` under `labels`.
    pub fn nba_predecessors_under<'b>(
        &'b self,
        dst: StateId,
        labels: &'b [u64],
    ) -> impl Iterator<Item = StateId> + 'b {
        self.nba_in[dst as usize]
            .iter()
            .filter(move |(_, g)| g.eval(labels))
            .map(|(s, _)| *s)
    }

    /// Product transition rule: the joint move must be feasible and the
    /// automaton must admit a step under the label of the source.
    pub fn transition(&self, from: &ProductState, to: &ProductState) -> bool {
        if !self.pts_adjacent(&from.pts.0, &to.pts.0) {
            return false;
        }
        let labels = self.label_mask(&from.pts.0);
        self.nba_step_allowed(from.buchi, to.buchi, &labels)
    }

    /// Weight of a product transition; the automaton component
    /// contributes zero.
    pub fn weight(&self, from: &ProductState, to: &ProductState) -> Result<f64, ModelError> {
        if !self.transition(from, to) {
            return Err(ModelError::InvalidTransition);
        }
        Ok(self.pts_weight_unchecked(&from.pts.0, &to.pts.0))
    }

    /// Prefix goal: the automaton component is accepting.
    #[inline]
    pub fn is_prefix_goal(&self, q: &ProductState) -> bool {
        self.accepting[q.buchi as usize]
    }

    #[inline]
    pub fn is_accepting_buchi(&self, b: StateId) -> bool {
        self.accepting[b as usize]
    }

    /// Suffix goal for a cycle root: one product hop closes the cycle.
    pub fn is_suffix_goal(&self, q: &ProductState, root: &ProductState) -> bool {
        self.transition(q, root)
    }

    /// Lazy one-hop successor enumeration in lexicographic order over
    /// (robot-1 edge index, ..., robot-N edge index, automaton edge
    /// index).
    pub fn successors(&'a self, q: &ProductState) -> SuccessorIter<'a> {
        let labels = self.label_mask(&q.pts.0);
        let allowed: Vec<StateId> = self.nba_out[q.buchi as usize]
            .iter()
            .filter(|(_, g)| g.eval(&labels))
            .map(|(d, _)| *d)
            .collect();
        let slices: Vec<&[(u32, f64)]> = q
            .pts
            .0
            .iter()
            .enumerate()
            .map(|(i, &s)| self.model.robot(i).successors(s))
            .collect();
        let exhausted = allowed.is_empty() || slices.iter().any(|s| s.is_empty());
        let n = slices.len();
        SuccessorIter {
            slices,
            allowed,
            idx: vec![0; n],
            nba_idx: 0,
            exhausted,
        }
    }

    /// Mixed-radix packing of a joint robot state; `None` when the joint
    /// state count overflows u64.
    #[inline]
    pub fn pts_key(&self, pts: &[u32]) -> Option<u64> {
        let radix = self.radix.as_ref()?;
        let mut key = 0u64;
        for (i, &q) in pts.iter().enumerate() {
            key += radix[i] * q as u64;
        }
        Some(key)
    }

    pub fn atom_count(&self) -> usize {
        self.atom_count
    }
}

/// One enumerated product successor, with its transition weight.
#[derive(Debug, Clone, PartialEq)]
pub struct Successor {
    pub pts: PtsState,
    pub buchi: StateId,
    pub weight: f64,
}

pub struct SuccessorIter<'a> {
    slices: Vec<&'a [(u32, f64)]>,
    allowed: Vec<StateId>,
    idx: Vec<usize>,
    nba_idx: usize,
    exhausted: bool,
}

impl Iterator for SuccessorIter<'_> {
    type Item = Successor;

    fn next(&mut self) -> Option<Successor> {
        if self.exhausted {
            return None;
        }
        let mut pts = Vec::with_capacity(self.slices.len());
        let mut weight = 0.0;
        for (slice, &i) in self.slices.iter().zip(self.idx.iter()) {
            let (dst, w) = slice[i];
            pts.push(dst);
            weight += w;
        }
        let item = Successor {
            pts: PtsState(pts),
            buchi: self.allowed[self.nba_idx],
            weight,
        };
        // advance: automaton index fastest, then robots right to left
        self.nba_idx += 1;
        if self.nba_idx == self.allowed.len() {
            self.nba_idx = 0;
            let mut pos = self.slices.len();
            loop {
                if pos == 0 {
                    self.exhausted = true;
                    break;
                }
                pos -= 1;
                self.idx[pos] += 1;
                if self.idx[pos] < self.slices[pos].len() {
                    break;
                }
                self.idx[pos] = 0;
            }
        }
        Some(item)
    }
}
