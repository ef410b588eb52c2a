//! Ground-truth planner for small instances: the product automaton is
//! built explicitly as a weighted directed graph and searched with
//! Dijkstra (shortest prefix paths, shortest cycles around accepting
//! vertices). An implicit uniform-cost search over the lazy successor
//! relation covers the prefix problem without materializing the graph.

use crate::automaton::Nba;
use crate::model::{MultiRobotModel, PtsState};
use crate::planner::{validate_plan, Plan, ProductStateJson, Provenance};
use crate::product::{ProductSpace, ProductState};
use rayon::prelude::*;
use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashMap};
use thiserror::Error;

#[derive(Debug, Clone, Error, PartialEq)]
pub enum OracleError {
    #[error("explicit product would have {states} states, over the limit of {limit}")]
    CapacityExceeded { states: u128, limit: u64 },
    #[error("search budget exceeded after {work_units} work units (cap {cap})")]
    BudgetExceeded { work_units: u64, cap: u64 },
}

/// The product automaton as an explicit weighted graph. Vertices cover
/// the full joint space (reachable or not); the vertex index packs the
/// joint robot state with the automaton state.
#[derive(Debug)]
pub struct ExplicitPba {
    num_buchi: u32,
    robot_counts: Vec<u32>,
    adjacency: Vec<Vec<(u32, f64)>>,
    reverse: Vec<Vec<(u32, f64)>>,
    initial: Vec<u32>,
    accepting: Vec<u32>,
    num_edges: usize,
}

impl ExplicitPba {
    pub fn num_vertices(&self) -> usize {
        self.adjacency.len()
    }

    pub fn num_edges(&self) -> usize {
        self.num_edges
    }

    pub fn initial_vertices(&self) -> &[u32] {
        &self.initial
    }

    pub fn accepting_vertices(&self) -> &[u32] {
        &self.accepting
    }

    pub fn successors(&self, v: u32) -> &[(u32, f64)] {
        &self.adjacency[v as usize]
    }

    pub fn predecessors(&self, v: u32) -> &[(u32, f64)] {
        &self.reverse[v as usize]
    }

    /// Unpack a vertex index into the product state it encodes.
    pub fn state_of(&self, v: u32) -> ProductState {
        let buchi = v % self.num_buchi;
        let mut rest = v / self.num_buchi;
        let mut pts = vec![0u32; self.robot_counts.len()];
        for i in (0..self.robot_counts.len()).rev() {
            pts[i] = rest % self.robot_counts[i];
            rest /= self.robot_counts[i];
        }
        ProductState::new(PtsState(pts), buchi)
    }

    pub fn vertex_of(&self, q: &ProductState) -> u32 {
        let mut key = 0u64;
        for (i, &s) in q.pts.0.iter().enumerate() {
            key = key * self.robot_counts[i] as u64 + s as u64;
        }
        (key * self.num_buchi as u64 + q.buchi as u64) as u32
    }
}

/// Exact number of product states, before any limit is applied.
pub fn product_state_count(model: &MultiRobotModel, nba: &Nba) -> u128 {
    let mut count = nba.num_states() as u128;
    for r in model.robots() {
        count = count.saturating_mul(r.num_states() as u128);
    }
    count
}

/// Enumerate every product vertex and edge. Fails fast when the vertex
/// count exceeds `max_states`.
pub fn build_explicit_pba(
    model: &MultiRobotModel,
    nba: &Nba,
    max_states: u64,
) -> Result<ExplicitPba, OracleError> {
    let states = product_state_count(model, nba);
    if states > max_states as u128 {
        return Err(OracleError::CapacityExceeded {
            states,
            limit: max_states,
        });
    }
    let space = ProductSpace::new(model, nba).expect("valid inputs");
    let n = states as usize;
    let num_buchi = nba.num_states() as u32;
    let robot_counts: Vec<u32> = model.robots().iter().map(|r| r.num_states() as u32).collect();

    let mut pba = ExplicitPba {
        num_buchi,
        robot_counts: robot_counts.clone(),
        adjacency: vec![Vec::new(); n],
        reverse: vec![Vec::new(); n],
        initial: Vec::new(),
        accepting: Vec::new(),
        num_edges: 0,
    };

    // joint-state odometer; automaton component is the innermost digit
    let num_robots = robot_counts.len();
    let mut pts = vec![0u32; num_robots];
    loop {
        for b in 0..num_buchi {
            let src = ProductState::new(PtsState(pts.clone()), b);
            let v = pba.vertex_of(&src);
            for s in space.successors(&src) {
                let w = pba.vertex_of(&ProductState::new(s.pts, s.buchi));
                pba.adjacency[v as usize].push((w, s.weight));
                pba.num_edges += 1;
            }
            if space.is_prefix_goal(&src) {
                pba.accepting.push(v);
            }
        }
        let mut pos = num_robots;
        loop {
            if pos == 0 {
                for q in space.initial_states() {
                    let v = pba.vertex_of(&q);
                    pba.initial.push(v);
                }
                for v in 0..n as u32 {
                    for &(w, weight) in &pba.adjacency[v as usize] {
                        pba.reverse[w as usize].push((v, weight));
                    }
                }
                return Ok(pba);
            }
            pos -= 1;
            pts[pos] += 1;
            if pts[pos] < robot_counts[pos] {
                break;
            }
            pts[pos] = 0;
        }
    }
}

#[derive(PartialEq)]
struct HeapEntry {
    cost: f64,
    seq: u64,
    vertex: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // reversed for a min-heap; ties break by insertion order
        other
            .cost
            .partial_cmp(&self.cost)
            .expect("finite costs")
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

struct ShortestPaths {
    dist: Vec<f64>,
    parent: Vec<u32>,
}

const NO_VERTEX: u32 = u32::MAX;

fn dijkstra(pba: &ExplicitPba, source: u32) -> ShortestPaths {
    let n = pba.num_vertices();
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![NO_VERTEX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    dist[source as usize] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        seq,
        vertex: source,
    });
    while let Some(HeapEntry { cost, vertex, .. }) = heap.pop() {
        if settled[vertex as usize] {
            continue;
        }
        settled[vertex as usize] = true;
        for &(next, w) in pba.successors(vertex) {
            let cand = cost + w;
            if cand < dist[next as usize] {
                dist[next as usize] = cand;
                parent[next as usize] = vertex;
                seq += 1;
                heap.push(HeapEntry {
                    cost: cand,
                    seq,
                    vertex: next,
                });
            }
        }
    }
    ShortestPaths { dist, parent }
}

/// Cheapest closed walk through `f`: Dijkstra from `f` that stops once
/// no unsettled vertex can beat the best settled predecessor bound.
/// Weights are nonnegative, so a popped cost strictly above the bound
/// certifies the bound is final.
fn shortest_cycle_through(pba: &ExplicitPba, f: u32) -> Option<(f64, u32, ShortestPaths)> {
    let n = pba.num_vertices();
    let mut pred_weight: HashMap<u32, f64> = HashMap::new();
    for &(p, w) in pba.predecessors(f) {
        pred_weight.insert(p, w);
    }
    if pred_weight.is_empty() {
        return None;
    }
    let mut dist = vec![f64::INFINITY; n];
    let mut parent = vec![NO_VERTEX; n];
    let mut settled = vec![false; n];
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut bound: Option<(f64, u32)> = None;
    dist[f as usize] = 0.0;
    heap.push(HeapEntry {
        cost: 0.0,
        seq,
        vertex: f,
    });
    while let Some(HeapEntry { cost, vertex, .. }) = heap.pop() {
        if let Some((b, _)) = bound {
            if cost > b {
                break;
            }
        }
        if settled[vertex as usize] {
            continue;
        }
        settled[vertex as usize] = true;
        if let Some(&w) = pred_weight.get(&vertex) {
            let cand = cost + w;
            if bound.is_none_or(|(b, _)| cand < b) {
                bound = Some((cand, vertex));
            }
        }
        for &(next, w) in pba.successors(vertex) {
            let cand = cost + w;
            if cand < dist[next as usize] {
                dist[next as usize] = cand;
                parent[next as usize] = vertex;
                seq += 1;
                heap.push(HeapEntry {
                    cost: cand,
                    seq,
                    vertex: next,
                });
            }
        }
    }
    bound.map(|(cost, best_pred)| (cost, best_pred, ShortestPaths { dist, parent }))
}

fn path_to(paths: &ShortestPaths, source: u32, target: u32) -> Vec<u32> {
    let mut out = vec![target];
    let mut at = target;
    while at != source {
        at = paths.parent[at as usize];
        out.push(at);
    }
    out.reverse();
    out
}

/// Optimal prefix-suffix plan by explicit graph search: shortest paths
/// from every initial vertex to every reachable accepting vertex, plus
/// the shortest cycle around each (a closed walk via shortest paths
/// from the accepting vertex back to itself through a predecessor).
pub fn oracle_optimal_plan(
    model: &MultiRobotModel,
    nba: &Nba,
    max_states: u64,
) -> Result<Option<Plan>, OracleError> {
    let pba = build_explicit_pba(model, nba, max_states)?;

    let from_initials: Vec<ShortestPaths> = pba
        .initial
        .par_iter()
        .map(|&i0| dijkstra(&pba, i0))
        .collect();

    // Accepting vertices reachable from some initial vertex, visited in
    // ascending prefix distance. Once some total cost is known, any
    // vertex whose prefix alone strictly exceeds it cannot win (cycle
    // costs are nonnegative), so its cycle search is skipped; ties are
    // still resolved over exact totals in (initial, accepting) order.
    let mut reachable_accepting: Vec<(f64, u32)> = pba
        .accepting
        .iter()
        .copied()
        .filter_map(|f| {
            let d = from_initials
                .iter()
                .map(|sp| sp.dist[f as usize])
                .fold(f64::INFINITY, f64::min);
            d.is_finite().then_some((d, f))
        })
        .collect();
    reachable_accepting.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));

    struct CycleInfo {
        f: u32,
        cost: f64,
        best_pred: u32,
        paths: ShortestPaths,
    }
    let mut cycles: Vec<CycleInfo> = Vec::new();
    let mut best_total = f64::INFINITY;
    for &(min_pre, f) in &reachable_accepting {
        if min_pre > best_total {
            break;
        }
        if let Some((cost, best_pred, paths)) = shortest_cycle_through(&pba, f) {
            if min_pre + cost < best_total {
                best_total = min_pre + cost;
            }
            cycles.push(CycleInfo {
                f,
                cost,
                best_pred,
                paths,
            });
        }
    }
    // restore accepting-vertex order for deterministic tie resolution
    cycles.sort_by_key(|c| c.f);

    // minimize prefix + cycle over (initial order, accepting order)
    let mut best: Option<(f64, usize, usize)> = None;
    for (i_idx, sp) in from_initials.iter().enumerate() {
        for (f_idx, cycle) in cycles.iter().enumerate() {
            let pre = sp.dist[cycle.f as usize];
            if !pre.is_finite() {
                continue;
            }
            let total = pre + cycle.cost;
            if best.is_none_or(|(c, _, _)| total < c) {
                best = Some((total, i_idx, f_idx));
            }
        }
    }
    let Some((_, i_idx, f_idx)) = best else {
        return Ok(None);
    };
    let cycle = &cycles[f_idx];
    let f = &cycle.f;
    let sp = &from_initials[i_idx];

    let prefix_vertices = path_to(sp, pba.initial[i_idx], *f);
    let mut suffix_vertices = if cycle.best_pred == *f {
        Vec::new()
    } else {
        path_to(&cycle.paths, *f, cycle.best_pred)
            .split_off(1) // drop the root from the front
    };
    suffix_vertices.push(*f);

    let to_names = |v: u32| -> Vec<String> {
        let q = pba.state_of(v);
        q.pts
            .0
            .iter()
            .enumerate()
            .map(|(i, &s)| model.robot(i).state_name(s).to_string())
            .collect()
    };
    let to_json = |v: u32| -> ProductStateJson {
        let q = pba.state_of(v);
        ProductStateJson {
            pts: to_names(v),
            buchi: q.buchi,
        }
    };

    let prefix_cost = sp.dist[*f as usize];
    let plan = Plan {
        prefix: prefix_vertices.iter().map(|&v| to_names(v)).collect(),
        suffix: suffix_vertices.iter().map(|&v| to_names(v)).collect(),
        prefix_cost,
        suffix_cost: cycle.cost,
        total_cost: prefix_cost + cycle.cost,
        provenance: Provenance {
            initial_nba_state: pba.state_of(pba.initial[i_idx]).buchi,
            accepting_state: to_json(*f),
            suffix_endpoint: to_json(cycle.best_pred),
        },
        product_prefix: prefix_vertices.iter().map(|&v| to_json(v)).collect(),
        product_suffix: suffix_vertices.iter().map(|&v| to_json(v)).collect(),
    };
    validate_plan(model, nba, &plan)
        .unwrap_or_else(|v| panic!("oracle plan failed validation: {v}"));
    Ok(Some(plan))
}

pub const DEFAULT_UCS_BUDGET: u64 = 50_000_000;

/// Uniform-cost search over the implicit product: expands lazy
/// successors from the initial states until the first accepting state is
/// settled. The budget counts work units (expansions plus generated
/// successors) so that intractably dense instances fail fast instead of
/// exhausting memory.
pub fn ucs_optimal_prefix(
    model: &MultiRobotModel,
    nba: &Nba,
    budget: u64,
) -> Result<Option<(ProductState, f64)>, OracleError> {
    let space = ProductSpace::new(model, nba).expect("valid inputs");
    let mut heap: BinaryHeap<UcsEntry> = BinaryHeap::new();
    let mut best: HashMap<ProductState, f64> = HashMap::new();
    let mut settled: HashMap<ProductState, f64> = HashMap::new();
    let mut seq = 0u64;
    let mut work: u64 = 0;

    for q in space.initial_states() {
        best.insert(q.clone(), 0.0);
        heap.push(UcsEntry {
            cost: 0.0,
            seq,
            state: q,
        });
        seq += 1;
    }

    while let Some(UcsEntry { cost, state, .. }) = heap.pop() {
        if settled.contains_key(&state) {
            continue;
        }
        settled.insert(state.clone(), cost);
        if space.is_prefix_goal(&state) {
            return Ok(Some((state, cost)));
        }
        work += 1;
        for s in space.successors(&state) {
            work += 1;
            if work > budget {
                return Err(OracleError::BudgetExceeded {
                    work_units: work,
                    cap: budget,
                });
            }
            let next = ProductState::new(s.pts, s.buchi);
            if settled.contains_key(&next) {
                continue;
            }
            let cand = cost + s.weight;
            let improves = best.get(&next).is_none_or(|&b| cand < b);
            if improves {
                best.insert(next.clone(), cand);
                heap.push(UcsEntry {
                    cost: cand,
                    seq,
                    state: next,
                });
                seq += 1;
            }
        }
    }
    Ok(None)
}

#[derive(PartialEq)]
struct UcsEntry {
    cost: f64,
    seq: u64,
    state: ProductState,
}

impl Eq for UcsEntry {}

impl Ord for UcsEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .cost
            .partial_cmp(&self.cost)
            .expect("finite costs")
            .then(other.seq.cmp(&self.seq))
    }
}

impl PartialOrd for UcsEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// The oracle's prefix optimum: cheapest accepting vertex over all
/// initial vertices, if any.
pub fn dijkstra_prefix_optimum(pba: &ExplicitPba) -> Option<f64> {
    let mut best: Option<f64> = None;
    for &i0 in pba.initial_vertices() {
        let sp = dijkstra(pba, i0);
        for &f in pba.accepting_vertices() {
            let d = sp.dist[f as usize];
            if d.is_finite() && best.is_none_or(|b| d < b) {
                best = Some(d);
            }
        }
    }
    best
}
