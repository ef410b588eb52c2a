//! LTL to NBA translation: tableau expansion into a generalized Büchi
//! automaton followed by a counting-construction degeneralization to a
//! single accepting set. Unreachable states are pruned and parallel
//! edges merged; no further simplification is attempted.

use super::{nnf, Ltl};
use crate::automaton::{Guard, Nba};
use std::collections::{BTreeSet, HashMap};
use thiserror::Error;

pub const DEFAULT_MAX_STATES: usize = 1_000_000;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TranslateError {
    #[error("automaton capacity exceeded: {states} states over the limit of {limit}")]
    CapacityExceeded { states: usize, limit: usize },
}

/// Translate a formula into an NBA whose accepted language equals the
/// formula's set of satisfying words (default state cap).
pub fn ltl_to_nba(f: &Ltl) -> Result<Nba, TranslateError> {
    ltl_to_nba_capped(f, DEFAULT_MAX_STATES)
}

pub fn ltl_to_nba_capped(f: &Ltl, max_states: usize) -> Result<Nba, TranslateError> {
    let nnf = nnf::to_nnf(f);
    let mut closure = Closure::default();
    let root = closure.intern(&nnf);
    let tableau = expand_tableau(&closure, root, max_states)?;
    let gba = Gba::from_tableau(&closure, &tableau);
    gba.degeneralize(f, max_states)
}

/// Interned subformula table; ids are assigned in first-visit order of a
/// deterministic traversal, so the whole construction is reproducible.
#[derive(Default)]
struct Closure {
    formulas: Vec<Ltl>,
    ids: HashMap<Ltl, u32>,
}

impl Closure {
    fn intern(&mut self, f: &Ltl) -> u32 {
        if let Some(&id) = self.ids.get(f) {
            return id;
        }
        // Children first keeps ids stable under shared subterms.
        match f {
            Ltl::True | Ltl::False | Ltl::Atom(_) => {}
            Ltl::Not(x) | Ltl::Next(x) => {
                self.intern(x);
            }
            Ltl::And(a, b) | Ltl::Or(a, b) | Ltl::Until(a, b) | Ltl::Release(a, b) => {
                self.intern(a);
                self.intern(b);
            }
            Ltl::Implies(..) | Ltl::Eventually(_) | Ltl::Always(_) => {
                unreachable!("translation input is NNF")
            }
        }
        let id = self.formulas.len() as u32;
        self.formulas.push(f.clone());
        self.ids.insert(f.clone(), id);
        id
    }

    fn get(&self, id: u32) -> &Ltl {
        &self.formulas[id as usize]
    }

    fn id_of(&self, f: &Ltl) -> Option<u32> {
        self.ids.get(f).copied()
    }

    fn untils(&self) -> Vec<u32> {
        (0..self.formulas.len() as u32)
            .filter(|&id| matches!(self.get(id), Ltl::Until(..)))
            .collect()
    }
}

type FormulaSet = BTreeSet<u32>;

const INIT: u32 = u32::MAX;

#[derive(Clone)]
struct WorkNode {
    incoming: BTreeSet<u32>, // node ids, INIT marks the virtual start
    new: FormulaSet,
    old: FormulaSet,
    next: FormulaSet,
}

struct FinalNode {
    old: FormulaSet,
    incoming: BTreeSet<u32>,
}

fn expand_tableau(
    closure: &Closure,
    root: u32,
    max_states: usize,
) -> Result<Vec<FinalNode>, TranslateError> {
    let mut finals: Vec<FinalNode> = Vec::new();
    let mut by_key: HashMap<(FormulaSet, FormulaSet), usize> = HashMap::new();
    let mut work: Vec<WorkNode> = vec![WorkNode {
        incoming: [INIT].into(),
        new: [root].into(),
        old: FormulaSet::new(),
        next: FormulaSet::new(),
    }];
    // Generous failsafe against pathological branching.
    let mut steps_left: usize = max_states.saturating_mul(64).max(1 << 20);

    while let Some(mut node) = work.pop() {
        steps_left = steps_left.checked_sub(1).ok_or(TranslateError::CapacityExceeded {
            states: finals.len(),
            limit: max_states,
        })?;

        let Some(&eta) = node.new.iter().next() else {
            // Fully processed: merge with an existing node or finalize.
            let key = (node.old.clone(), node.next.clone());
            if let Some(&id) = by_key.get(&key) {
                finals[id].incoming.extend(node.incoming.iter().copied());
                continue;
            }
            let id = finals.len();
            if id + 1 > max_states {
                return Err(TranslateError::CapacityExceeded {
                    states: id + 1,
                    limit: max_states,
                });
            }
            by_key.insert(key, id);
            let successor = WorkNode {
                incoming: [id as u32].into(),
                new: node.next.clone(),
                old: FormulaSet::new(),
                next: FormulaSet::new(),
            };
            finals.push(FinalNode {
                old: node.old,
                incoming: node.incoming,
            });
            work.push(successor);
            continue;
        };

        node.new.remove(&eta);
        if node.old.contains(&eta) {
            work.push(node);
            continue;
        }
        match closure.get(eta).clone() {
            Ltl::True => work.push(node),
            Ltl::False => {} // contradiction: drop this branch
            Ltl::Atom(ref a) => {
                let dual = closure.id_of(&Ltl::not(Ltl::Atom(a.clone())));
                if dual.is_some_and(|d| node.old.contains(&d)) {
                    continue;
                }
                node.old.insert(eta);
                work.push(node);
            }
            Ltl::Not(ref inner) => {
                let dual = closure.id_of(inner);
                if dual.is_some_and(|d| node.old.contains(&d)) {
                    continue;
                }
                node.old.insert(eta);
                work.push(node);
            }
            Ltl::And(ref a, ref b) => {
                let (ia, ib) = (closure.id_of(a).unwrap(), closure.id_of(b).unwrap());
                node.old.insert(eta);
                if !node.old.contains(&ia) {
                    node.new.insert(ia);
                }
                if !node.old.contains(&ib) {
                    node.new.insert(ib);
                }
                work.push(node);
            }
            Ltl::Or(ref a, ref b) => {
                let (ia, ib) = (closure.id_of(a).unwrap(), closure.id_of(b).unwrap());
                let mut left = node.clone();
                left.old.insert(eta);
                if !left.old.contains(&ia) {
                    left.new.insert(ia);
                }
                let mut right = node;
                right.old.insert(eta);
                if !right.old.contains(&ib) {
                    right.new.insert(ib);
                }
                work.push(right);
                work.push(left);
            }
            Ltl::Next(ref a) => {
                let ia = closure.id_of(a).unwrap();
                node.old.insert(eta);
                node.next.insert(ia);
                work.push(node);
            }
            Ltl::Until(ref a, ref b) => {
                let (ia, ib) = (closure.id_of(a).unwrap(), closure.id_of(b).unwrap());
                // either fulfil now, or hold `a` and carry the promise
                let mut carry = node.clone();
                carry.old.insert(eta);
                if !carry.old.contains(&ia) {
                    carry.new.insert(ia);
                }
                carry.next.insert(eta);
                let mut fulfil = node;
                fulfil.old.insert(eta);
                if !fulfil.old.contains(&ib) {
                    fulfil.new.insert(ib);
                }
                work.push(fulfil);
                work.push(carry);
            }
            Ltl::Release(ref a, ref b) => {
                let (ia, ib) = (closure.id_of(a).unwrap(), closure.id_of(b).unwrap());
                let mut carry = node.clone();
                carry.old.insert(eta);
                if !carry.old.contains(&ib) {
                    carry.new.insert(ib);
                }
                carry.next.insert(eta);
                let mut close = node;
                close.old.insert(eta);
                if !close.old.contains(&ia) {
                    close.new.insert(ia);
                }
                if !close.old.contains(&ib) {
                    close.new.insert(ib);
                }
                work.push(close);
                work.push(carry);
            }
            Ltl::Implies(..) | Ltl::Eventually(_) | Ltl::Always(_) => {
                unreachable!("translation input is NNF")
            }
        }
    }
    Ok(finals)
}

struct Gba {
    /// literal guard of each node (conjunction of its literal obligations)
    guards: Vec<Guard>,
    /// edges as (src, dst) pairs; guard is the source's literal guard
    edges: Vec<(u32, u32)>,
    initial: Vec<u32>,
    /// one accepting family per Until subformula
    families: Vec<Vec<bool>>,
}

impl Gba {
    fn from_tableau(closure: &Closure, nodes: &[FinalNode]) -> Gba {
        let guards = nodes
            .iter()
            .map(|n| {
                Guard::conjoin(
                    n.old
                        .iter()
                        .filter_map(|&id| match closure.get(id) {
                            Ltl::Atom(a) => Some(Guard::atom(a.clone())),
                            Ltl::Not(inner) => match &**inner {
                                Ltl::Atom(a) => Some(Guard::not(Guard::atom(a.clone()))),
                                _ => None,
                            },
                            _ => None,
                        })
                        .collect(),
                )
            })
            .collect();

        let mut edges = Vec::new();
        let mut initial = Vec::new();
        for (r, node) in nodes.iter().enumerate() {
            for &q in &node.incoming {
                if q == INIT {
                    initial.push(r as u32);
                } else {
                    edges.push((q, r as u32));
                }
            }
        }

        // A node satisfies the family for `a U b` when it does not carry
        // the promise or has already fulfilled it.
        let families = closure
            .untils()
            .iter()
            .map(|&u| {
                let fulfilled = match closure.get(u) {
                    Ltl::Until(_, b) => closure.id_of(b),
                    _ => unreachable!(),
                };
                let b_is_true = matches!(closure.get(u), Ltl::Until(_, b) if **b == Ltl::True);
                nodes
                    .iter()
                    .map(|n| {
                        !n.old.contains(&u)
                            || b_is_true
                            || fulfilled.is_some_and(|b| n.old.contains(&b))
                    })
                    .collect()
            })
            .collect();

        Gba {
            guards,
            edges,
            initial,
            families,
        }
    }

    /// Counting construction: one copy of the state space per accepting
    /// family, advancing the counter when leaving a state of the current
    /// family; accepting set is family 0 at level 0.
    fn degeneralize(&self, original: &Ltl, max_states: usize) -> Result<Nba, TranslateError> {
        let n_nodes = self.guards.len();
        let alphabet: Vec<String> = original.atoms().into_iter().collect();
        if n_nodes == 0 {
            // Unsatisfiable at the tableau level: a single dead initial
            // state keeps the automaton well-formed with empty language.
            let mut nba = Nba::new(alphabet);
            let q = nba.add_state("s0");
            nba.mark_initial(q);
            return Ok(nba);
        }

        let n_fam = self.families.len().max(1);
        let all_true = vec![true; n_nodes];
        let family = |i: usize| -> &[bool] {
            if self.families.is_empty() {
                &all_true
            } else {
                &self.families[i]
            }
        };

        let total = n_nodes
            .checked_mul(n_fam)
            .filter(|&t| t <= max_states)
            .ok_or(TranslateError::CapacityExceeded {
                states: usize::MAX,
                limit: max_states,
            })?;

        // Reachability over (node, level) pairs, seeded at level 0.
        let idx = |q: usize, lvl: usize| q * n_fam + lvl;
        let mut out: Vec<Vec<u32>> = vec![Vec::new(); n_nodes];
        for &(q, r) in &self.edges {
            out[q as usize].push(r);
        }
        let mut reach = vec![false; total];
        let mut stack: Vec<(usize, usize)> =
            self.initial.iter().map(|&q| (q as usize, 0)).collect();
        for &(q, l) in &stack {
            reach[idx(q, l)] = true;
        }
        while let Some((q, lvl)) = stack.pop() {
            let nxt = if family(lvl)[q] { (lvl + 1) % n_fam } else { lvl };
            for &r in &out[q] {
                if !reach[idx(r as usize, nxt)] {
                    reach[idx(r as usize, nxt)] = true;
                    stack.push((r as usize, nxt));
                }
            }
        }

        // Renumber reachable pairs in (node, level) order.
        let mut id_map = vec![u32::MAX; total];
        let mut count = 0u32;
        for q in 0..n_nodes {
            for lvl in 0..n_fam {
                if reach[idx(q, lvl)] {
                    id_map[idx(q, lvl)] = count;
                    count += 1;
                }
            }
        }

        let mut nba = Nba::new(alphabet);
        for i in 0..count {
            nba.add_state(format!("s{i}"));
        }
        for &q in &self.initial {
            nba.mark_initial(id_map[idx(q as usize, 0)]);
        }
        for (q, fam0) in family(0).iter().enumerate() {
            if *fam0 && reach[idx(q, 0)] {
                nba.mark_accepting(id_map[idx(q, 0)]);
            }
        }
        for q in 0..n_nodes {
            for lvl in 0..n_fam {
                if !reach[idx(q, lvl)] {
                    continue;
                }
                let nxt = if family(lvl)[q] { (lvl + 1) % n_fam } else { lvl };
                for &r in &out[q] {
                    if reach[idx(r as usize, nxt)] {
                        nba.add_edge(
                            id_map[idx(q, lvl)],
                            self.guards[q].clone(),
                            id_map[idx(r as usize, nxt)],
                        )
                        .expect("translated guards stay within the alphabet");
                    }
                }
            }
        }
        Ok(nba)
    }
}
