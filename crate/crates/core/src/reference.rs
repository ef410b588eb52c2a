//! Reference implementations used to cross-check the fast paths:
//! exhaustive lasso-word enumeration and a brute-force optimal planner
//! that enumerates simple paths and cycles directly. These are written
//! for obviousness, not speed, and are independent of the graph-search
//! and sampling code they validate.

use crate::automaton::Nba;
use crate::model::MultiRobotModel;
use crate::product::{ProductSpace, ProductState};
use std::collections::BTreeSet;

use crate::ltl::LassoWord;

/// All lasso words over the given atoms with prefix length up to
/// `max_prefix` and cycle length 1..=`max_cycle`, in a fixed order.
pub fn enumerate_lassos(atoms: &[&str], max_prefix: usize, max_cycle: usize) -> Vec<LassoWord> {
    let symbols = all_subsets(atoms);
    let mut prefixes: Vec<Vec<BTreeSet<String>>> = vec![Vec::new()];
    let mut out = Vec::new();
    for len in 0..=max_prefix {
        if len > 0 {
            prefixes = extend_all(&prefixes, &symbols);
        }
        let mut cycles: Vec<Vec<BTreeSet<String>>> = vec![Vec::new()];
        for _ in 1..=max_cycle {
            cycles = extend_all(&cycles, &symbols);
            for p in &prefixes {
                for c in &cycles {
                    out.push(LassoWord::new(p.clone(), c.clone()));
                }
            }
        }
    }
    out
}

fn all_subsets(atoms: &[&str]) -> Vec<BTreeSet<String>> {
    let n = atoms.len();
    (0..1u32 << n)
        .map(|mask| {
            atoms
                .iter()
                .enumerate()
                .filter(|(i, _)| mask & (1 << i) != 0)
                .map(|(_, a)| a.to_string())
                .collect()
        })
        .collect()
}

fn extend_all(
    seqs: &[Vec<BTreeSet<String>>],
    symbols: &[BTreeSet<String>],
) -> Vec<Vec<BTreeSet<String>>> {
    let mut out = Vec::with_capacity(seqs.len() * symbols.len());
    for s in seqs {
        for sym in symbols {
            let mut t = s.clone();
            t.push(sym.clone());
            out.push(t);
        }
    }
    out
}

/// Result of the brute-force search: the optimal total cost and the
/// chosen accepting state, or `None` when no prefix-suffix plan exists.
#[derive(Debug, Clone, PartialEq)]
pub struct BruteForceResult {
    pub total_cost: f64,
    pub prefix_cost: f64,
    pub suffix_cost: f64,
    pub accepting: ProductState,
}

/// Exhaustive optimal prefix-suffix cost by direct enumeration of simple
/// paths and cycles on the (small) reachable product. The only pruning
/// is against the best cost already found for the current single
/// target, which cannot hide a cheaper path when weights are
/// nonnegative, so the computed minima are exact.
pub fn brute_force_optimal_plan(
    model: &MultiRobotModel,
    nba: &Nba,
    max_product_states: usize,
) -> Option<BruteForceResult> {
    let space = ProductSpace::new(model, nba).ok()?;
    let (states, adjacency) = reachable_graph(&space, max_product_states)?;
    let index = |q: &ProductState| states.iter().position(|s| s == q).expect("reachable");

    let accepting: Vec<usize> = states
        .iter()
        .enumerate()
        .filter(|(_, q)| space.is_prefix_goal(q))
        .map(|(i, _)| i)
        .collect();
    if accepting.is_empty() {
        return None;
    }

    let mut best: Option<BruteForceResult> = None;
    for init in space.initial_states() {
        let init_idx = index(&init);
        for &f in &accepting {
            let Some(pre) = min_simple_path_cost(&adjacency, init_idx, f) else {
                continue;
            };
            let Some(suf) = shortest_cycle_cost(&adjacency, f) else {
                continue;
            };
            let total = pre + suf;
            if best.as_ref().is_none_or(|b| total < b.total_cost) {
                best = Some(BruteForceResult {
                    total_cost: total,
                    prefix_cost: pre,
                    suffix_cost: suf,
                    accepting: states[f].clone(),
                });
            }
        }
    }
    best
}

type Adjacency = Vec<Vec<(usize, f64)>>;

fn reachable_graph(
    space: &ProductSpace<'_>,
    max_product_states: usize,
) -> Option<(Vec<ProductState>, Adjacency)> {
    let mut states: Vec<ProductState> = Vec::new();
    let mut stack: Vec<ProductState> = Vec::new();
    for q in space.initial_states() {
        if !states.contains(&q) {
            states.push(q.clone());
            stack.push(q);
        }
    }
    while let Some(q) = stack.pop() {
        for s in space.successors(&q) {
            let next = ProductState::new(s.pts, s.buchi);
            if !states.contains(&next) {
                if states.len() >= max_product_states {
                    return None;
                }
                states.push(next.clone());
                stack.push(next);
            }
        }
    }
    let adjacency = states
        .iter()
        .map(|q| {
            space
                .successors(q)
                .map(|s| {
                    let to = states
                        .iter()
                        .position(|x| x.pts == s.pts && x.buchi == s.buchi)
                        .expect("reachable closure");
                    (to, s.weight)
                })
                .collect()
        })
        .collect();
    Some((states, adjacency))
}

/// Minimum cost over simple paths from `from` to `to`; zero when they
/// coincide. With nonnegative weights this equals the minimum over all
/// walks, so it is the true shortest-path cost.
fn min_simple_path_cost(adjacency: &Adjacency, from: usize, to: usize) -> Option<f64> {
    if from == to {
        return Some(0.0);
    }
    let mut visited = vec![false; adjacency.len()];
    visited[from] = true;
    let mut best = None;
    enumerate_paths(adjacency, from, to, 0.0, &mut visited, &mut best);
    best
}

fn enumerate_paths(
    adjacency: &Adjacency,
    at: usize,
    target: usize,
    cost: f64,
    visited: &mut Vec<bool>,
    best: &mut Option<f64>,
) {
    for &(next, w) in &adjacency[at] {
        let c = cost + w;
        // any extension costs at least `c`, so matching or exceeding the
        // best known target cost is a dead end
        if best.is_some_and(|b| c >= b) {
            continue;
        }
        if next == target {
            *best = Some(c);
            continue;
        }
        if !visited[next] {
            visited[next] = true;
            enumerate_paths(adjacency, next, target, c, visited, best);
            visited[next] = false;
        }
    }
}

/// Cheapest cycle through `f` (length >= 1): a self-loop edge, or an
/// outgoing edge followed by the cheapest simple path back.
fn shortest_cycle_cost(adjacency: &Adjacency, f: usize) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &(next, w) in &adjacency[f] {
        let via = if next == f {
            Some(w)
        } else {
            min_simple_path_cost(adjacency, next, f).map(|back| w + back)
        };
        if let Some(total) = via {
            if best.is_none_or(|b| total < b) {
                best = Some(total);
            }
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lasso_enumeration_counts() {
        // one atom: prefixes of length 0..=3 over 2 symbols, cycles 1..=2
        let words = enumerate_lassos(&["a"], 3, 2);
        let prefixes = 1 + 2 + 4 + 8;
        let cycles = 2 + 4;
        assert_eq!(words.len(), prefixes * cycles);
        // two atoms
        let words = enumerate_lassos(&["a", "b"], 2, 1);
        assert_eq!(words.len(), (1 + 4 + 16) * 4);
    }

    #[test]
    fn lassos_are_distinct() {
        let words = enumerate_lassos(&["a"], 2, 2);
        let set: std::collections::BTreeSet<String> =
            words.iter().map(|w| format!("{w:?}")).collect();
        assert_eq!(set.len(), words.len());
    }
}
