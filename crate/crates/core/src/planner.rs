//! Top-level synthesis: prefix trees per initial automaton state,
//! suffix trees (or the zero-cost self-loop shortcut) per detected
//! accepting state, and selection of the minimum-cost prefix-suffix
//! plan. Plans are validated against the model and automaton before
//! being returned.

use crate::automaton::Nba;
use crate::ltl::LassoWord;
use crate::model::{MultiRobotModel, PtsState};
use crate::product::{ProductSpace, ProductState};
use crate::tree::{construct_tree, GoalSpec, IterationStats, SamplerConfig};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// A prefix-suffix plan over joint robot states.
///
/// The prefix starts at the team's initial state and ends at the
/// projection of an accepting product state. The suffix lists the cycle
/// around that state, starting at the state entered after it and ending
/// back at it, so the last suffix entry transitions to the first and
/// the prefix end transitions to the suffix start. A length-1 suffix is
/// the self-loop cycle at the accepting state.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Plan {
    pub prefix: Vec<Vec<String>>,
    pub suffix: Vec<Vec<String>>,
    pub prefix_cost: f64,
    pub suffix_cost: f64,
    pub total_cost: f64,
    pub provenance: Provenance,
    pub product_prefix: Vec<ProductStateJson>,
    pub product_suffix: Vec<ProductStateJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Provenance {
    pub initial_nba_state: u32,
    pub accepting_state: ProductStateJson,
    pub suffix_endpoint: ProductStateJson,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ProductStateJson {
    pub pts: Vec<String>,
    pub buchi: u32,
}

fn state_names(model: &MultiRobotModel, pts: &PtsState) -> Vec<String> {
    pts.0
        .iter()
        .enumerate()
        .map(|(i, &q)| model.robot(i).state_name(q).to_string())
        .collect()
}

fn product_json(model: &MultiRobotModel, q: &ProductState) -> ProductStateJson {
    ProductStateJson {
        pts: state_names(model, &q.pts),
        buchi: q.buchi,
    }
}

/// Violations reported by plan validation, in the order checked.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum PlanViolation {
    #[error("plan prefix is empty")]
    EmptyPrefix,
    #[error("plan suffix is empty")]
    EmptySuffix,
    #[error("unknown state name {name:?} for robot index {robot}")]
    UnknownState { robot: usize, name: String },
    #[error("prefix does not start at the team's initial state")]
    WrongStart,
    #[error("infeasible joint move at plan step {at}")]
    InfeasibleMove { at: usize },
    #[error("stated prefix cost {stated} differs from recomputed {actual}")]
    PrefixCostMismatch { stated: f64, actual: f64 },
    #[error("stated suffix cost {stated} differs from recomputed {actual}")]
    SuffixCostMismatch { stated: f64, actual: f64 },
    #[error("stated total cost is not the sum of prefix and suffix costs")]
    TotalCostMismatch,
    #[error("the plan's label trace is not accepted by the automaton")]
    TraceRejected,
}

const COST_TOLERANCE: f64 = 1e-9;

/// Check every plan invariant: joint-move feasibility along the prefix,
/// the junction, the suffix and its wrap-around; cost re-summation; and
/// acceptance of the induced label trace by the automaton.
pub fn validate_plan(
    model: &MultiRobotModel,
    nba: &Nba,
    plan: &Plan,
) -> Result<(), PlanViolation> {
    if plan.prefix.is_empty() {
        return Err(PlanViolation::EmptyPrefix);
    }
    if plan.suffix.is_empty() {
        return Err(PlanViolation::EmptySuffix);
    }
    let resolve = |names: &Vec<String>| -> Result<PtsState, PlanViolation> {
        let mut ids = Vec::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            match model.robot(i).state_id(name) {
                Some(q) => ids.push(q),
                None => {
                    return Err(PlanViolation::UnknownState {
                        robot: i,
                        name: name.clone(),
                    })
                }
            }
        }
        Ok(PtsState(ids))
    };
    let prefix: Vec<PtsState> = plan.prefix.iter().map(resolve).collect::<Result<_, _>>()?;
    let suffix: Vec<PtsState> = plan.suffix.iter().map(resolve).collect::<Result<_, _>>()?;

    if prefix[0] != model.initial_pts() {
        return Err(PlanViolation::WrongStart);
    }

    // feasibility along the executed sequence: prefix, junction into the
    // suffix, suffix body, and the wrap from its end to its start
    let mut step = 0usize;
    let mut check = |a: &PtsState, b: &PtsState| -> Result<(), PlanViolation> {
        step += 1;
        if model.pts_transition(a, b) {
            Ok(())
        } else {
            Err(PlanViolation::InfeasibleMove { at: step })
        }
    };
    for pair in prefix.windows(2) {
        check(&pair[0], &pair[1])?;
    }
    check(prefix.last().unwrap(), &suffix[0])?;
    for pair in suffix.windows(2) {
        check(&pair[0], &pair[1])?;
    }
    check(suffix.last().unwrap(), &suffix[0])?;

    // exact re-summation of edge weights
    let mut prefix_cost = 0.0;
    for pair in prefix.windows(2) {
        prefix_cost += model.pts_weight(&pair[0], &pair[1]).expect("checked");
    }
    if (prefix_cost - plan.prefix_cost).abs() > COST_TOLERANCE {
        return Err(PlanViolation::PrefixCostMismatch {
            stated: plan.prefix_cost,
            actual: prefix_cost,
        });
    }
    let mut suffix_cost = model
        .pts_weight(prefix.last().unwrap(), &suffix[0])
        .expect("checked");
    for pair in suffix.windows(2) {
        suffix_cost += model.pts_weight(&pair[0], &pair[1]).expect("checked");
    }
    if (suffix_cost - plan.suffix_cost).abs() > COST_TOLERANCE {
        return Err(PlanViolation::SuffixCostMismatch {
            stated: plan.suffix_cost,
            actual: suffix_cost,
        });
    }
    if plan.total_cost != plan.prefix_cost + plan.suffix_cost {
        return Err(PlanViolation::TotalCostMismatch);
    }

    // the induced word must be in the automaton's language
    let word = LassoWord::new(
        prefix.iter().map(|q| model.pts_label(q)).collect(),
        suffix.iter().map(|q| model.pts_label(q)).collect(),
    );
    if !nba.accepts_lasso(&word) {
        return Err(PlanViolation::TraceRejected);
    }
    Ok(())
}

/// How much per-iteration detail a synthesis report keeps. Full detail
/// is what the stats CSV needs; the summary carries enough for
/// instrumentation checks at a fraction of the memory.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum StatsRetention {
    #[default]
    Full,
    Summary,
}

/// Aggregates over one tree build, kept in both retention modes.
#[derive(Debug, Clone, PartialEq)]
pub struct TreeSummary {
    pub iterations: u64,
    /// iterations where the drawn node had product successors but the
    /// sweep neither extended nor invoked rewiring
    pub growth_violations: u64,
    /// iterations where rejected+extended exceeded the automaton size
    pub sweep_overflows: u64,
    pub max_rejected: u32,
    pub total_rejected: u64,
    pub total_extended: u64,
    pub total_rewired: u64,
}

fn summarize(stats: &[IterationStats], n_buchi: u32) -> TreeSummary {
    let mut s = TreeSummary {
        iterations: stats.len() as u64,
        growth_violations: 0,
        sweep_overflows: 0,
        max_rejected: 0,
        total_rejected: 0,
        total_extended: 0,
        total_rewired: 0,
    };
    for it in stats {
        if it.rand_had_successors && it.extended == 0 && it.rewire_invoked == 0 {
            s.growth_violations += 1;
        }
        if it.rejected + it.extended > n_buchi {
            s.sweep_overflows += 1;
        }
        s.max_rejected = s.max_rejected.max(it.rejected);
        s.total_rejected += it.rejected as u64;
        s.total_extended += it.extended as u64;
        s.total_rewired += it.rewired as u64;
    }
    s
}

/// Statistics from one tree build inside a synthesis run.
#[derive(Debug, Clone)]
pub struct TreeReport {
    /// which build this is: prefix trees are keyed by the initial
    /// automaton state, suffix trees by (initial, accepting index)
    pub kind: TreeKind,
    /// per-iteration rows; empty under summary retention
    pub iterations: Vec<IterationStats>,
    pub summary: TreeSummary,
    pub tree_size: usize,
    pub goal_count: usize,
    /// first iteration whose goal set was non-empty, if any
    pub first_goal_iteration: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TreeKind {
    Prefix { initial_nba_state: u32 },
    Suffix { initial_nba_state: u32, accepting_index: usize },
}

/// Everything observable about one synthesis run.
#[derive(Debug, Clone)]
pub struct SynthesisReport {
    pub trees: Vec<TreeReport>,
    pub accepting_found: usize,
}

fn first_goal_iteration(stats: &[IterationStats], root_is_goal: bool) -> Option<u64> {
    if root_is_goal {
        return Some(0);
    }
    stats
        .iter()
        .find(|it| it.best_goal_cost.is_finite())
        .map(|it| it.iteration)
}

struct SuffixChoice {
    /// product path from the accepting root through the cycle, ending at
    /// the root again (root itself excluded from the front)
    product_cycle: Vec<ProductState>,
    cost: f64,
    endpoint: ProductState,
    report: Option<TreeReport>,
}

/// Build the best suffix cycle around one accepting root.
fn best_suffix(
    space: &ProductSpace<'_>,
    root: &ProductState,
    n_suf: u64,
    cfg: &SamplerConfig,
    stream: u64,
    kind: TreeKind,
    retention: StatsRetention,
) -> Option<SuffixChoice> {
    // zero-cost self-loop shortcut: the cheapest possible suffix
    if space.is_suffix_goal(root, root) {
        let w = space
            .pts_weight_unchecked(&root.pts.0, &root.pts.0);
        if w == 0.0 {
            return Some(SuffixChoice {
                product_cycle: vec![root.clone()],
                cost: 0.0,
                endpoint: root.clone(),
                report: None,
            });
        }
    }
    let (tree, goals, stats) = construct_tree(
        space,
        GoalSpec::SuffixCycle { root: root.clone() },
        root.clone(),
        n_suf,
        cfg,
        stream,
    );
    let report = TreeReport {
        kind,
        first_goal_iteration: first_goal_iteration(&stats, space.is_suffix_goal(root, root)),
        summary: summarize(&stats, space.num_buchi_states() as u32),
        iterations: match retention {
            StatsRetention::Full => stats,
            StatsRetention::Summary => Vec::new(),
        },
        tree_size: tree.len(),
        goal_count: goals.len(),
    };
    // among all cycle-closing endpoints pick the cheapest total cycle
    let mut best: Option<(crate::tree::NodeId, f64)> = None;
    for &e in &goals {
        let endpoint = tree.node_state(e);
        let closing = space.pts_weight_unchecked(&endpoint.pts.0, &root.pts.0);
        let total = tree.cost(e) + closing;
        if best.is_none_or(|(_, c)| total < c) {
            best = Some((e, total));
        }
    }
    let (e, cost) = best?;
    let endpoint = tree.node_state(e);
    let mut product_cycle: Vec<ProductState> = tree.find_path(e);
    product_cycle.remove(0); // drop the root from the front
    product_cycle.push(root.clone()); // close the cycle at the root
    Some(SuffixChoice {
        product_cycle,
        cost,
        endpoint,
        report: Some(report),
    })
}

/// Synthesize a minimum-cost prefix-suffix plan. Returns `None` when no
/// accepting state is reached or none of them admits a cycle.
pub fn synthesize(
    model: &MultiRobotModel,
    nba: &Nba,
    n_pre: u64,
    n_suf: u64,
    cfg: &SamplerConfig,
) -> (Option<Plan>, SynthesisReport) {
    synthesize_with(model, nba, n_pre, n_suf, cfg, StatsRetention::Full)
}

/// [`synthesize`] with a choice of how much per-iteration detail the
/// report retains.
pub fn synthesize_with(
    model: &MultiRobotModel,
    nba: &Nba,
    n_pre: u64,
    n_suf: u64,
    cfg: &SamplerConfig,
    retention: StatsRetention,
) -> (Option<Plan>, SynthesisReport) {
    let space = ProductSpace::new(model, nba).expect("automaton has initial states");
    let mut report = SynthesisReport {
        trees: Vec::new(),
        accepting_found: 0,
    };

    // ties keep the earliest candidate in (initial order, accepting
    // order), which is the iteration order below
    let mut best: Option<Plan> = None;

    let initial_pts = model.initial_pts();
    for (init_order, &qb0) in nba.initial_states().iter().enumerate() {
        let root = ProductState::new(initial_pts.clone(), qb0);
        let prefix_stream = (init_order as u64) << 21;
        let (tree, accepting, stats) = construct_tree(
            &space,
            GoalSpec::PrefixAccepting,
            root.clone(),
            n_pre,
            cfg,
            prefix_stream,
        );
        report.trees.push(TreeReport {
            kind: TreeKind::Prefix {
                initial_nba_state: qb0,
            },
            first_goal_iteration: first_goal_iteration(&stats, space.is_prefix_goal(&root)),
            summary: summarize(&stats, space.num_buchi_states() as u32),
            iterations: match retention {
                StatsRetention::Full => stats,
                StatsRetention::Summary => Vec::new(),
            },
            tree_size: tree.len(),
            goal_count: accepting.len(),
        });
        report.accepting_found += accepting.len();

        // suffix trees per accepting state are independent builds; the
        // per-build rng streams make the outcome order-insensitive
        let suffix_inputs: Vec<(usize, crate::tree::NodeId)> = accepting
            .iter()
            .enumerate()
            .map(|(a_idx, &node)| (a_idx, node))
            .collect();
        let suffixes: Vec<(usize, ProductState, f64, Option<SuffixChoice>)> = suffix_inputs
            .par_iter()
            .map(|&(a_idx, node)| {
                let accepting_state = tree.node_state(node);
                debug_assert!(a_idx < 1 << 20, "suffix stream ids would collide");
                let stream = ((init_order as u64) << 21) | (1 << 20) | a_idx as u64;
                let choice = best_suffix(
                    &space,
                    &accepting_state,
                    n_suf,
                    cfg,
                    stream,
                    TreeKind::Suffix {
                        initial_nba_state: qb0,
                        accepting_index: a_idx,
                    },
                    retention,
                );
                (a_idx, accepting_state, tree.cost(node), choice)
            })
            .collect();

        for (a_idx, accepting_state, prefix_cost, choice) in suffixes {
            let Some(choice) = choice else { continue };
            if let Some(tr) = choice.report {
                report.trees.push(tr);
            }
            let total = prefix_cost + choice.cost;
            let better = match &best {
                None => true,
                Some(b) => total < b.total_cost,
            };
            if better {
                let node = suffix_inputs[a_idx].1;
                let product_prefix = tree.find_path(node);
                let plan = Plan {
                    prefix: product_prefix
                        .iter()
                        .map(|q| state_names(model, &q.pts))
                        .collect(),
                    suffix: choice
                        .product_cycle
                        .iter()
                        .map(|q| state_names(model, &q.pts))
                        .collect(),
                    prefix_cost,
                    suffix_cost: choice.cost,
                    total_cost: total,
                    provenance: Provenance {
                        initial_nba_state: qb0,
                        accepting_state: product_json(model, &accepting_state),
                        suffix_endpoint: product_json(model, &choice.endpoint),
                    },
                    product_prefix: product_prefix
                        .iter()
                        .map(|q| product_json(model, q))
                        .collect(),
                    product_suffix: choice
                        .product_cycle
                        .iter()
                        .map(|q| product_json(model, q))
                        .collect(),
                };
                best = Some(plan);
            }
        }
    }

    let plan = best.inspect(|p| {
        validate_plan(model, nba, p)
            .unwrap_or_else(|v| panic!("synthesized plan failed validation: {v}"));
    });
    (plan, report)
}
