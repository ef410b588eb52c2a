//! Incrementally grown trees that approximate the product automaton:
//! biased sampling over per-robot reachable sets, minimum-cost parent
//! selection on insertion, rewiring with exact cost propagation to
//! descendants, and path extraction by tracing parents.
//!
//! The tree stores one node per product state (insertion-ordered) with
//! cached label and automaton-successor masks. The construction loop
//! makes one joint-adjacency pass over the tree per sampled state and
//! shares it across the whole automaton sweep, so per-iteration work is
//! linear in the tree size rather than linear per automaton state.

use crate::product::{ProductSpace, ProductState};
use crate::util::{mix64, slice_get_bit, BitMatrix, U64MixState};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use std::collections::HashMap;
use thiserror::Error;

pub type NodeId = u32;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum TreeError {
    #[error("node already present in the tree")]
    DuplicateNode,
    #[error("node id {0} out of range")]
    BadNode(NodeId),
}

/// Outcome of attempting to insert a sampled state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ExtendOutcome {
    Added(NodeId),
    /// No tree node can reach the candidate in one product hop.
    NoParent,
}

/// Node-selection distribution over the current tree.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NodeDistribution {
    /// Every tree node equally likely.
    #[default]
    Uniform,
}

/// Per-robot distribution over one-hop reachable sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ReachableDistribution {
    /// Every reachable state equally likely, independently per robot.
    #[default]
    Uniform,
}

/// Sampling configuration. Distributions must have full support on
/// their domains; the defaults do.
#[derive(Debug, Clone)]
pub struct SamplerConfig {
    pub rng_seed: u64,
    pub f_rand: NodeDistribution,
    pub f_new: ReachableDistribution,
    /// Run the full invariant sweep after every mutation (quadratic;
    /// meant for the property-test suite, not production runs).
    pub check_invariants: bool,
}

impl SamplerConfig {
    pub fn new(rng_seed: u64) -> Self {
        SamplerConfig {
            rng_seed,
            f_rand: NodeDistribution::Uniform,
            f_new: ReachableDistribution::Uniform,
            check_invariants: false,
        }
    }

    /// Independent deterministic stream for one tree build.
    pub fn rng_for_stream(&self, stream: u64) -> ChaCha8Rng {
        use rand::SeedableRng;
        let mut rng = ChaCha8Rng::seed_from_u64(self.rng_seed);
        rng.set_stream(mix64(stream));
        rng
    }
}

/// Goal-set membership for tree construction.
#[derive(Debug, Clone)]
pub enum GoalSpec {
    /// Accepting automaton component.
    PrefixAccepting,
    /// One product hop closes a cycle back to the root.
    SuffixCycle { root: ProductState },
}

/// Per-iteration instrumentation.
#[derive(Debug, Clone, PartialEq)]
pub struct IterationStats {
    pub iteration: u64,
    pub tree_size: u64,
    /// candidates with an empty parent set this iteration
    pub rejected: u32,
    /// candidates inserted this iteration
    pub extended: u32,
    /// nodes whose parent actually changed in rewiring
    pub rewired: u32,
    /// candidates already in the tree (the rewiring step ran on them)
    pub rewire_invoked: u32,
    /// of those, candidates with a non-empty one-hop successor set in
    /// the tree
    pub rewire_candidates: u32,
    /// the drawn node had at least one product successor
    pub rand_had_successors: bool,
    pub best_goal_cost: f64,
    pub elapsed: std::time::Duration,
}

/// Search tree over product states rooted at a fixed start state.
pub struct PlannerTree<'a> {
    space: &'a ProductSpace<'a>,
    num_robots: usize,
    /// flattened joint states, `num_robots` entries per node
    pts_flat: Vec<u32>,
    buchi: Vec<u32>,
    parent: Vec<NodeId>,
    children: Vec<Vec<NodeId>>,
    cost: Vec<f64>,
    /// cached automaton-successor mask of each node under its own label
    nba_succ: BitMatrix,
    goal_flag: Vec<bool>,
    goal_nodes: Vec<NodeId>,
    index: NodeIndex,
    goal: GoalSpec,
}

/// Node lookup: dense table when the product is small enough, hash map
/// otherwise. Both are deterministic.
enum NodeIndex {
    Dense { qb: u64, table: Vec<NodeId> },
    Hash(HashMap<(u64, u32), NodeId, U64MixState>),
    /// joint state count overflows u64: fall back to hashing the state
    Wide(HashMap<(Vec<u32>, u32), NodeId>),
}

const DENSE_INDEX_LIMIT: u64 = 1 << 22;
const NO_NODE: NodeId = NodeId::MAX;

impl NodeIndex {
    fn new(space: &ProductSpace<'_>) -> NodeIndex {
        let qb = space.num_buchi_states() as u64;
        match space.model().pts_state_count() {
            Some(n_pts) if n_pts.checked_mul(qb).is_some_and(|t| t <= DENSE_INDEX_LIMIT) => {
                NodeIndex::Dense {
                    qb,
                    table: vec![NO_NODE; (n_pts * qb) as usize],
                }
            }
            Some(_) => NodeIndex::Hash(HashMap::default()),
            None => NodeIndex::Wide(HashMap::new()),
        }
    }

    fn get(&self, space: &ProductSpace<'_>, pts: &[u32], buchi: u32) -> Option<NodeId> {
        match self {
            NodeIndex::Dense { qb, table } => {
                let key = space.pts_key(pts).expect("dense index fits") * qb + buchi as u64;
                let id = table[key as usize];
                (id != NO_NODE).then_some(id)
            }
            NodeIndex::Hash(map) => {
                let key = space.pts_key(pts).expect("hash index fits");
                map.get(&(key, buchi)).copied()
            }
            NodeIndex::Wide(map) => map.get(&(pts.to_vec(), buchi)).copied(),
        }
    }

    fn insert(&mut self, space: &ProductSpace<'_>, pts: &[u32], buchi: u32, id: NodeId) {
        match self {
            NodeIndex::Dense { qb, table } => {
                let key = space.pts_key(pts).expect("dense index fits") * *qb + buchi as u64;
                table[key as usize] = id;
            }
            NodeIndex::Hash(map) => {
                let key = space.pts_key(pts).expect("hash index fits");
                map.insert((key, buchi), id);
            }
            NodeIndex::Wide(map) => {
                map.insert((pts.to_vec(), buchi), id);
            }
        }
    }
}

impl<'a> PlannerTree<'a> {
    pub fn new(space: &'a ProductSpace<'a>, root: ProductState, goal: GoalSpec) -> Self {
        let num_robots = space.model().num_robots();
        let mut tree = PlannerTree {
            space,
            num_robots,
            pts_flat: Vec::new(),
            buchi: Vec::new(),
            parent: Vec::new(),
            children: Vec::new(),
            cost: Vec::new(),
            nba_succ: BitMatrix::new(0, space.num_buchi_states().max(1)),
            goal_flag: Vec::new(),
            goal_nodes: Vec::new(),
            index: NodeIndex::new(space),
            goal,
        };
        let root_id = tree.push_node(&root.pts.0.clone(), root.buchi, 0, 0.0);
        debug_assert_eq!(root_id, 0);
        tree
    }

    fn push_node(&mut self, pts: &[u32], buchi: u32, parent: NodeId, cost: f64) -> NodeId {
        let id = self.buchi.len() as NodeId;
        self.pts_flat.extend_from_slice(pts);
        self.buchi.push(buchi);
        self.parent.push(parent);
        self.children.push(Vec::new());
        self.cost.push(cost);

        let mut label = vec![0u64; self.space.atom_words()];
        self.space.label_mask_into(pts, &mut label);
        let srow = self.nba_succ.push_row();
        let mut succ = vec![0u64; self.space.qb_words()];
        self.space.nba_successor_mask_into(buchi, &label, &mut succ);
        self.nba_succ.or_into_row(srow, &succ);

        let state = ProductState::new(crate::model::PtsState(pts.to_vec()), buchi);
        let is_goal = match &self.goal {
            GoalSpec::PrefixAccepting => self.space.is_prefix_goal(&state),
            GoalSpec::SuffixCycle { root } => self.space.is_suffix_goal(&state, root),
        };
        self.goal_flag.push(is_goal);
        if is_goal {
            self.goal_nodes.push(id);
        }
        self.index.insert(self.space, pts, buchi, id);
        id
    }

    pub fn len(&self) -> usize {
        self.buchi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.buchi.is_empty()
    }

    pub fn root(&self) -> NodeId {
        0
    }

    pub fn cost(&self, v: NodeId) -> f64 {
        self.cost[v as usize]
    }

    pub fn parent(&self, v: NodeId) -> NodeId {
        self.parent[v as usize]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v as usize]
    }

    pub fn goal_nodes(&self) -> &[NodeId] {
        &self.goal_nodes
    }

    pub fn node_state(&self, v: NodeId) -> ProductState {
        let v = v as usize;
        let pts = self.pts_flat[v * self.num_robots..(v + 1) * self.num_robots].to_vec();
        ProductState::new(crate::model::PtsState(pts), self.buchi[v])
    }

    #[inline]
    fn pts_of(&self, v: NodeId) -> &[u32] {
        let v = v as usize;
        &self.pts_flat[v * self.num_robots..(v + 1) * self.num_robots]
    }

    pub fn lookup(&self, pts: &[u32], buchi: u32) -> Option<NodeId> {
        self.index.get(self.space, pts, buchi)
    }

    pub fn best_goal_cost(&self) -> f64 {
        self.goal_nodes
            .iter()
            .map(|&g| self.cost[g as usize])
            .fold(f64::INFINITY, f64::min)
    }

    /// Insert a new product state by connecting it to the tree node that
    /// minimizes its cost-from-root, if any node can reach it in one
    /// product hop. Exact ties keep the earliest-inserted parent.
    pub fn extend(&mut self, state: &ProductState) -> Result<ExtendOutcome, TreeError> {
        if self.lookup(&state.pts.0, state.buchi).is_some() {
            return Err(TreeError::DuplicateNode);
        }
        // linear scan tracking the running minimum
        let b = state.buchi as usize;
        let mut best: Option<(NodeId, f64)> = None;
        for v in 0..self.len() as NodeId {
            if !slice_get_bit(self.nba_succ.row(v as usize), b) {
                continue;
            }
            if !self.space.pts_adjacent(self.pts_of(v), &state.pts.0) {
                continue;
            }
            let total = self.cost[v as usize]
                + self.space.pts_weight_unchecked(self.pts_of(v), &state.pts.0);
            if best.is_none_or(|(_, c)| total < c) {
                best = Some((v, total));
            }
        }
        Ok(self.insert_under(state, best))
    }

    fn insert_under(
        &mut self,
        state: &ProductState,
        best: Option<(NodeId, f64)>,
    ) -> ExtendOutcome {
        match best {
            None => ExtendOutcome::NoParent,
            Some((parent, cost)) => {
                let id = self.push_node(&state.pts.0.clone(), state.buchi, parent, cost);
                self.children[parent as usize].push(id);
                debug_assert!(self.local_check(id));
                ExtendOutcome::Added(id)
            }
        }
    }

    /// Rewire tree nodes through `source`: any node reachable from it in
    /// one product hop whose cost would strictly decrease is reparented,
    /// and the new exact costs are propagated to its whole subtree.
    /// Returns (nodes reparented, one-hop candidates found).
    pub fn rewire(&mut self, source: NodeId) -> (u32, u32) {
        let src_pts = self.pts_of(source);
        let succ_row = self.nba_succ.row(source as usize);
        let mut candidates = Vec::new();
        for v in 0..self.len() as NodeId {
            if !slice_get_bit(succ_row, self.buchi[v as usize] as usize) {
                continue;
            }
            if self.space.pts_adjacent(src_pts, self.pts_of(v)) {
                candidates.push(v);
            }
        }
        let found = candidates.len() as u32;
        let rewired = self.rewire_apply(source, &candidates);
        (rewired, found)
    }

    /// Reparent every candidate that gets strictly cheaper through
    /// `source`, in candidate order.
    fn rewire_apply(&mut self, source: NodeId, candidates: &[NodeId]) -> u32 {
        let mut rewired = 0;
        for &v in candidates {
            // the root keeps cost zero and is never reparented
            if v == source || v == self.root() {
                continue;
            }
            let w = self
                .space
                .pts_weight_unchecked(self.pts_of(source), self.pts_of(v));
            let through = self.cost[source as usize] + w;
            if through < self.cost[v as usize] {
                let old_parent = self.parent[v as usize];
                let pos = self.children[old_parent as usize]
                    .iter()
                    .position(|&c| c == v)
                    .expect("child list consistent");
                self.children[old_parent as usize].remove(pos);
                self.parent[v as usize] = source;
                self.children[source as usize].push(v);
                self.cost[v as usize] = through;
                self.refresh_subtree_costs(v);
                rewired += 1;
                debug_assert!(self.local_check(v));
            }
        }
        rewired
    }

    /// Recompute exact costs below `v` (depth-first over the children
    /// map). Equivalent to subtracting the cost delta, but keeps the
    /// parent-cost recurrence bit-exact in floating point.
    fn refresh_subtree_costs(&mut self, v: NodeId) {
        let mut stack: Vec<NodeId> = self.children[v as usize].to_vec();
        while let Some(c) = stack.pop() {
            let p = self.parent[c as usize];
            let w = self
                .space
                .pts_weight_unchecked(self.pts_of(p), self.pts_of(c));
            self.cost[c as usize] = self.cost[p as usize] + w;
            stack.extend_from_slice(&self.children[c as usize]);
        }
    }

    /// Parent chain from the root to `goal`, as full product states.
    pub fn find_path(&self, goal: NodeId) -> Vec<ProductState> {
        let mut path = vec![goal];
        let mut at = goal;
        while at != self.root() {
            at = self.parent[at as usize];
            path.push(at);
            debug_assert!(path.len() <= self.len());
        }
        path.reverse();
        path.into_iter().map(|v| self.node_state(v)).collect()
    }

    fn local_check(&self, v: NodeId) -> bool {
        let p = self.parent[v as usize];
        if v == self.root() {
            return p == v && self.cost[v as usize] == 0.0;
        }
        let w = self
            .space
            .pts_weight_unchecked(self.pts_of(p), self.pts_of(v));
        self.cost[v as usize] == self.cost[p as usize] + w
    }

    /// Full structural sweep: edge count, root cost, exact parent-cost
    /// recurrence, acyclicity, and product-feasibility of every edge.
    pub fn verify_invariants(&self) -> Result<(), String> {
        let n = self.len();
        if self.parent[0] != 0 {
            return Err("root parent must be the root".into());
        }
        if self.cost[0] != 0.0 {
            return Err("root cost must be zero".into());
        }
        let mut edge_count = 0usize;
        for v in 1..n as NodeId {
            let p = self.parent[v as usize];
            if p as usize >= n {
                return Err(format!("node {v}: parent out of range"));
            }
            edge_count += 1;
            if !self.children[p as usize].contains(&v) {
                return Err(format!("node {v}: missing from parent's child list"));
            }
            let ps = self.node_state(p);
            let vs = self.node_state(v);
            if !self.space.transition(&ps, &vs) {
                return Err(format!("edge {p} -> {v} is not a product transition"));
            }
            let w = self
                .space
                .pts_weight_unchecked(self.pts_of(p), self.pts_of(v));
            if self.cost[v as usize] != self.cost[p as usize] + w {
                return Err(format!("node {v}: cost recurrence violated"));
            }
            // acyclicity: walk to the root in at most n steps
            let mut hops = 0;
            let mut at = v;
            while at != self.root() {
                at = self.parent[at as usize];
                hops += 1;
                if hops > n {
                    return Err(format!("node {v}: parent chain does not reach the root"));
                }
            }
        }
        let child_total: usize = self.children.iter().map(|c| c.len()).sum();
        if child_total != edge_count || edge_count != n - 1 {
            return Err(format!(
                "edge bookkeeping: {edge_count} parent edges, {child_total} child entries, {n} nodes"
            ));
        }
        Ok(())
    }

    #[inline]
    fn pts_has_moves(&self, v: NodeId) -> bool {
        let model = self.space.model();
        self.pts_of(v)
            .iter()
            .enumerate()
            .all(|(i, &q)| !model.robot(i).successors(q).is_empty())
    }
}

/// Draw a joint candidate state: pick a tree node, project it, then draw
/// one reachable state per robot independently. Returns `None` when some
/// robot has an empty reachable set.
pub fn sample(
    tree: &PlannerTree<'_>,
    rng: &mut ChaCha8Rng,
    _cfg: &SamplerConfig,
) -> Option<(NodeId, Vec<u32>)> {
    let pick = rng.gen_range(0..tree.len()) as NodeId;
    let model = tree.space.model();
    let anchor: Vec<u32> = tree.pts_of(pick).to_vec();
    for (i, &q) in anchor.iter().enumerate() {
        if model.robot(i).successors(q).is_empty() {
            return None;
        }
    }
    let mut pts = Vec::with_capacity(anchor.len());
    for (i, &q) in anchor.iter().enumerate() {
        let succs = model.robot(i).successors(q);
        let k = rng.gen_range(0..succs.len());
        pts.push(succs[k].0);
    }
    Some((pick, pts))
}

/// Has the tree provably stopped changing? True when every product
/// successor of every node is already in the tree and no edge between
/// tree nodes can relax a cost. From such a state no extension or
/// rewiring can ever fire again, so remaining iterations only sample
/// and count.
fn is_converged(tree: &PlannerTree<'_>) -> bool {
    let space = tree.space;
    for v in 0..tree.len() as NodeId {
        let state = tree.node_state(v);
        for s in space.successors(&state) {
            match tree.lookup(&s.pts.0, s.buchi) {
                None => return false,
                Some(u) => {
                    if u != tree.root() && tree.cost(v) + s.weight < tree.cost(u) {
                        return false;
                    }
                }
            }
        }
    }
    true
}

/// Is convergence checking affordable for this tree?
fn convergence_check_budget(tree: &PlannerTree<'_>) -> bool {
    let mut per_node = tree.space.num_buchi_states() as u64;
    for r in tree.space.model().robots() {
        let max_deg = (0..r.num_states() as u32)
            .map(|q| r.successors(q).len() as u64)
            .max()
            .unwrap_or(0);
        per_node = per_node.saturating_mul(max_deg.max(1));
    }
    per_node.saturating_mul(tree.len() as u64) <= 50_000_000
}

/// Scratch buffers reused across iterations of the construction loop.
struct SweepScratch {
    label: Vec<u64>,
    /// automaton-successor mask per source automaton state under the
    /// sampled label
    allowed: BitMatrix,
    /// tree nodes whose joint state reaches the sample, with edge weight
    fwd: Vec<(NodeId, f64)>,
    /// tree nodes the sample's joint state reaches, with edge weight
    rev: Vec<(NodeId, f64)>,
    candidates: Vec<NodeId>,
}

/// Grow a tree for exactly `n_max` iterations from `root`, trying every
/// automaton state for each joint sample, extending absent candidates
/// and rewiring through present ones. Returns the tree, the goal nodes
/// found, and per-iteration statistics.
pub fn construct_tree<'a>(
    space: &'a ProductSpace<'a>,
    goal: GoalSpec,
    root: ProductState,
    n_max: u64,
    cfg: &SamplerConfig,
    stream: u64,
) -> (PlannerTree<'a>, Vec<NodeId>, Vec<IterationStats>) {
    let mut rng = cfg.rng_for_stream(stream);
    let mut tree = PlannerTree::new(space, root, goal);
    let mut stats = Vec::with_capacity(n_max as usize);
    let n_buchi = space.num_buchi_states() as u32;
    let started = std::time::Instant::now();
    let mut scratch = SweepScratch {
        label: vec![0u64; space.atom_words()],
        allowed: BitMatrix::new(n_buchi as usize, n_buchi as usize),
        fwd: Vec::new(),
        rev: Vec::new(),
        candidates: Vec::new(),
    };

    // Once the tree provably cannot change again, iterations reduce to
    // sampling and bookkeeping. `converged` is only set by an explicit
    // proof, so results are identical with the fast path disabled.
    let mut converged = false;
    let mut dirty_at: u64 = 0;
    let mut last_attempt: u64 = 0;

    for n in 1..=n_max {
        let mut it = IterationStats {
            iteration: n,
            tree_size: tree.len() as u64,
            rejected: 0,
            extended: 0,
            rewired: 0,
            rewire_invoked: 0,
            rewire_candidates: 0,
            rand_had_successors: false,
            best_goal_cost: f64::INFINITY,
            elapsed: std::time::Duration::ZERO,
        };

        if let Some((anchor, pts_new)) = sample(&tree, &mut rng, cfg) {
            // product successors exist iff every robot can move and the
            // automaton allows some step under the anchor's label
            it.rand_had_successors = !tree.nba_succ.row_is_empty(anchor as usize);
            if converged {
                fast_forward_sweep(&tree, &pts_new, n_buchi, &mut it);
            } else {
                let changed = sweep(space, &mut tree, &pts_new, n_buchi, cfg, &mut scratch, &mut it);
                if changed {
                    dirty_at = n;
                }
            }
        }

        if !converged
            && dirty_at > last_attempt
            && n.saturating_sub(dirty_at) >= (tree.len() as u64 / 4).max(64)
            && convergence_check_budget(&tree)
        {
            last_attempt = n;
            converged = is_converged(&tree);
        }

        it.tree_size = tree.len() as u64;
        it.best_goal_cost = tree.best_goal_cost();
        it.elapsed = started.elapsed();
        stats.push(it);
    }

    let goals = tree.goal_nodes().to_vec();
    (tree, goals, stats)
}

/// One full automaton sweep for a sampled joint state: a single pass
/// collects the tree nodes adjacent to the sample in either direction,
/// then every automaton state reuses those lists for parent selection
/// and rewiring. Candidate sets and processing orders are identical to
/// per-state scans over the tree. Returns whether the tree changed.
fn sweep(
    space: &ProductSpace<'_>,
    tree: &mut PlannerTree<'_>,
    pts_new: &[u32],
    n_buchi: u32,
    cfg: &SamplerConfig,
    scratch: &mut SweepScratch,
    it: &mut IterationStats,
) -> bool {
    let len0 = tree.len() as NodeId;
    space.label_mask_into(pts_new, &mut scratch.label);
    scratch.allowed.clear();
    for b in 0..n_buchi {
        space.nba_successor_mask_into(b, &scratch.label, scratch.allowed.row_mut(b as usize));
    }
    let self_adjacent = space.pts_adjacent(pts_new, pts_new);
    let self_weight = if self_adjacent {
        space.pts_weight_unchecked(pts_new, pts_new)
    } else {
        0.0
    };

    scratch.fwd.clear();
    scratch.rev.clear();
    for v in 0..len0 {
        let vpts = tree.pts_of(v);
        if space.pts_adjacent(vpts, pts_new) {
            scratch
                .fwd
                .push((v, space.pts_weight_unchecked(vpts, pts_new)));
        }
        let vpts = tree.pts_of(v);
        if space.pts_adjacent(pts_new, vpts) {
            scratch
                .rev
                .push((v, space.pts_weight_unchecked(pts_new, vpts)));
        }
    }

    let mut inserted: Vec<NodeId> = Vec::new();
    let mut changed = false;
    for b in 0..n_buchi {
        match tree.lookup(pts_new, b) {
            None => {
                // minimum-cost parent among nodes with an automaton step
                // into `b`, insertion order breaking exact ties
                let mut best: Option<(NodeId, f64)> = None;
                for &(v, w) in scratch.fwd.iter() {
                    if !slice_get_bit(tree.nba_succ.row(v as usize), b as usize) {
                        continue;
                    }
                    let total = tree.cost(v) + w;
                    if best.is_none_or(|(_, c)| total < c) {
                        best = Some((v, total));
                    }
                }
                if self_adjacent {
                    for &u in &inserted {
                        if slice_get_bit(tree.nba_succ.row(u as usize), b as usize) {
                            let total = tree.cost(u) + self_weight;
                            if best.is_none_or(|(_, c)| total < c) {
                                best = Some((u, total));
                            }
                        }
                    }
                }
                let state = ProductState::new(crate::model::PtsState(pts_new.to_vec()), b);
                match tree.insert_under(&state, best) {
                    ExtendOutcome::NoParent => it.rejected += 1,
                    ExtendOutcome::Added(id) => {
                        it.extended += 1;
                        changed = true;
                        inserted.push(id);
                        let (rew, found) =
                            rewire_via_lists(tree, id, b, scratch, &inserted, self_adjacent);
                        it.rewire_invoked += 1;
                        if found > 0 {
                            it.rewire_candidates += 1;
                        }
                        if rew > 0 {
                            it.rewired += rew;
                            changed = true;
                        }
                        if cfg.check_invariants {
                            tree.verify_invariants().expect("tree invariants");
                        }
                    }
                }
            }
            Some(id) => {
                it.rewire_invoked += 1;
                let (rew, found) =
                    rewire_via_lists(tree, id, b, scratch, &inserted, self_adjacent);
                if found > 0 {
                    it.rewire_candidates += 1;
                }
                if rew > 0 {
                    it.rewired += rew;
                    changed = true;
                }
                if cfg.check_invariants {
                    tree.verify_invariants().expect("tree invariants");
                }
            }
        }
    }
    changed
}

/// Rewiring for a node sitting at the sampled joint state: candidates
/// come from the shared reverse list plus any node inserted earlier in
/// this sweep, in insertion order.
fn rewire_via_lists(
    tree: &mut PlannerTree<'_>,
    source: NodeId,
    source_buchi: u32,
    scratch: &mut SweepScratch,
    inserted: &[NodeId],
    self_adjacent: bool,
) -> (u32, u32) {
    scratch.candidates.clear();
    for &(v, _) in scratch.rev.iter() {
        let vb = tree.buchi[v as usize] as usize;
        if scratch.allowed.get(source_buchi as usize, vb) {
            scratch.candidates.push(v);
        }
    }
    if self_adjacent {
        for &u in inserted {
            let ub = tree.buchi[u as usize] as usize;
            if scratch.allowed.get(source_buchi as usize, ub) {
                scratch.candidates.push(u);
            }
        }
    }
    let found = scratch.candidates.len() as u32;
    let rewired = tree.rewire_apply(source, &scratch.candidates);
    (rewired, found)
}

/// Bookkeeping-only sweep once the tree is provably stable: absent
/// candidates are rejected (no parent can exist when every product
/// successor of every node is present), present ones only count.
fn fast_forward_sweep(
    tree: &PlannerTree<'_>,
    pts_new: &[u32],
    n_buchi: u32,
    it: &mut IterationStats,
) {
    for b in 0..n_buchi {
        match tree.lookup(pts_new, b) {
            None => it.rejected += 1,
            Some(id) => {
                it.rewire_invoked += 1;
                // in a converged tree every product successor is a tree
                // node, so candidates exist iff the node can step at all
                if !tree.nba_succ.row_is_empty(id as usize) && tree.pts_has_moves(id) {
                    it.rewire_candidates += 1;
                }
            }
        }
    }
}
