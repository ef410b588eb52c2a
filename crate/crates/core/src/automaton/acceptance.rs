//! Lasso-word acceptance: unroll the finitely many lasso positions
//! against the automaton and look for a reachable cycle through an
//! accepting-flagged node of that product.

use super::Nba;
use crate::ltl::LassoWord;

pub(super) fn accepts_lasso(nba: &Nba, word: &LassoWord) -> bool {
    let n_pos = word.len();
    let n_q = nba.num_states();
    if n_q == 0 {
        return false;
    }
    let node = |k: usize, q: usize| k * n_q + q;

    // Adjacency of the unrolled product: (k, q) -> (next k, q') for every
    // edge q --g--> q' with word[k] ⊨ g.
    let mut adj: Vec<Vec<u32>> = vec![Vec::new(); n_pos * n_q];
    for k in 0..n_pos {
        let kn = word.next(k);
        let labels = word.at(k);
        for e in nba.edges() {
            if e.guard.eval(labels) {
                adj[node(k, e.src as usize)].push(node(kn, e.dst as usize) as u32);
            }
        }
    }

    // Reachable set from the initial nodes at position 0.
    let mut reachable = vec![false; n_pos * n_q];
    let mut stack: Vec<u32> = nba
        .initial_states()
        .iter()
        .map(|&q| node(0, q as usize) as u32)
        .collect();
    for &s in &stack {
        reachable[s as usize] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v as usize] {
            if !reachable[w as usize] {
                reachable[w as usize] = true;
                stack.push(w);
            }
        }
    }

    // A reachable accepting node lying on a cycle certifies acceptance.
    for q in nba.accepting_states() {
        for k in 0..n_pos {
            let f = node(k, *q as usize);
            if reachable[f] && on_cycle(&adj, f) {
                return true;
            }
        }
    }
    false
}

fn on_cycle(adj: &[Vec<u32>], f: usize) -> bool {
    let mut seen = vec![false; adj.len()];
    let mut stack: Vec<u32> = adj[f].clone();
    for &s in &stack {
        if s as usize == f {
            return true;
        }
        seen[s as usize] = true;
    }
    while let Some(v) = stack.pop() {
        for &w in &adj[v as usize] {
            if w as usize == f {
                return true;
            }
            if !seen[w as usize] {
                seen[w as usize] = true;
                stack.push(w);
            }
        }
    }
    false
}
