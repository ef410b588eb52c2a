//! Command implementations shared by the binary and the test suite.
//! Planning artifacts (plan JSON, stats CSV) are byte-reproducible for
//! a fixed config and seed; wall-clock timings are reported only in the
//! comparison report and on the console.

use crate::config::{
    ExperimentConfig, DEFAULT_MATCH_THRESHOLD, DEFAULT_ORACLE_MAX_STATES, DEFAULT_STATS_FLUSH,
};
use planner_core::automaton::{emit_nba, parse_nba, Nba};
use planner_core::oracle::{self, OracleError};
use planner_core::planner::{synthesize, Plan, SynthesisReport, TreeKind};
use planner_core::tree::SamplerConfig;
use planner_core::{ltl_to_nba, parse_ltl, MultiRobotModel};
use serde::Serialize;
use std::io::Write;
use std::path::Path;

pub const EXIT_OK: i32 = 0;
pub const EXIT_ERROR: i32 = 1;
pub const EXIT_NO_PLAN: i32 = 2;
pub const EXIT_CAPACITY: i32 = 3;

fn fail(msg: impl std::fmt::Display) -> i32 {
    eprintln!("error: {msg}");
    EXIT_ERROR
}

fn read_file(path: &Path) -> Result<String, String> {
    std::fs::read_to_string(path).map_err(|e| format!("reading {}: {e}", path.display()))
}

/// Load the model and the task automaton (from a formula or an
/// automaton file) named by the config.
pub fn load_inputs(cfg: &ExperimentConfig) -> Result<(MultiRobotModel, Nba), String> {
    let model_path = cfg.model.as_ref().ok_or("--model is required")?;
    let model_text = read_file(model_path)?;
    let (model, warnings) =
        MultiRobotModel::load(&model_text).map_err(|e| format!("model: {e}"))?;
    for w in &warnings {
        log::warn!("{w}");
        eprintln!("warning: {w}");
    }
    let nba = match (&cfg.ltl, &cfg.nba) {
        (Some(ltl_path), None) => {
            let text = read_file(ltl_path)?;
            let formula = parse_ltl(&text).map_err(|e| format!("formula: {e}"))?;
            ltl_to_nba(&formula).map_err(|e| format!("translation: {e}"))?
        }
        (None, Some(nba_path)) => {
            let text = read_file(nba_path)?;
            let nba = parse_nba(&text).map_err(|e| format!("automaton: {e}"))?;
            nba.validate().map_err(|e| format!("automaton: {e}"))?;
            nba
        }
        _ => return Err("exactly one of --ltl or --nba is required".into()),
    };
    Ok((model, nba))
}

fn thread_pool(workers: Option<usize>) -> Result<rayon::ThreadPool, String> {
    let mut builder = rayon::ThreadPoolBuilder::new();
    if let Some(k) = workers {
        builder = builder.num_threads(k.max(1));
    }
    builder.build().map_err(|e| e.to_string())
}

/// Translate a formula file into an automaton file and report its size.
pub fn cmd_translate(ltl_path: &Path, out_path: &Path) -> i32 {
    let text = match read_file(ltl_path) {
        Ok(t) => t,
        Err(e) => return fail(e),
    };
    let formula = match parse_ltl(&text) {
        Ok(f) => f,
        Err(e) => return fail(format!("formula: {e}")),
    };
    let nba = match ltl_to_nba(&formula) {
        Ok(n) => n,
        Err(e) => return fail(format!("translation: {e}")),
    };
    if let Err(e) = std::fs::write(out_path, emit_nba(&nba)) {
        return fail(format!("writing {}: {e}", out_path.display()));
    }
    println!(
        "translated: {} states, {} transitions, {} initial, {} accepting -> {}",
        nba.num_states(),
        nba.num_edges(),
        nba.initial_states().len(),
        nba.accepting_states().len(),
        out_path.display()
    );
    EXIT_OK
}

/// Write the per-iteration statistics of every tree built in a run.
/// Trees appear in build order: prefix trees per initial automaton
/// state, then suffix trees per accepting state. `include_timing`
/// controls the elapsed column; planning artifacts zero it so that
/// reruns are byte-identical.
pub fn write_stats_csv(
    path: &Path,
    report: &SynthesisReport,
    flush_interval: usize,
    include_timing: bool,
) -> Result<(), String> {
    let file = std::fs::File::create(path).map_err(|e| format!("{}: {e}", path.display()))?;
    let mut out = std::io::BufWriter::new(file);
    let mut since_flush = 0usize;
    let mut emit = |line: String| -> Result<(), String> {
        out.write_all(line.as_bytes()).map_err(|e| e.to_string())?;
        since_flush += 1;
        if since_flush >= flush_interval {
            out.flush().map_err(|e| e.to_string())?;
            since_flush = 0;
        }
        Ok(())
    };
    emit("iteration,tree_size,rejected,extended,rewired,best_goal_cost,elapsed_ms\n".into())?;
    for tree in &report.trees {
        for it in &tree.iterations {
            let elapsed_ms = if include_timing {
                it.elapsed.as_millis() as u64
            } else {
                0
            };
            emit(format!(
                "{},{},{},{},{},{},{}\n",
                it.iteration,
                it.tree_size,
                it.rejected,
                it.extended,
                it.rewired,
                it.best_goal_cost,
                elapsed_ms
            ))?;
        }
    }
    out.flush().map_err(|e| e.to_string())
}

pub fn plan_json(plan: &Plan) -> String {
    serde_json::to_string_pretty(plan).expect("serializable") + "\n"
}

struct SeedOutcome {
    seed: u64,
    plan: Option<Plan>,
    report: SynthesisReport,
    wall: std::time::Duration,
}

fn run_seeds(
    model: &MultiRobotModel,
    nba: &Nba,
    n_pre: u64,
    n_suf: u64,
    seeds: &[u64],
) -> Vec<SeedOutcome> {
    use rayon::prelude::*;
    seeds
        .par_iter()
        .map(|&seed| {
            let started = std::time::Instant::now();
            let cfg = SamplerConfig::new(seed);
            let (plan, report) = synthesize(model, nba, n_pre, n_suf, &cfg);
            SeedOutcome {
                seed,
                plan,
                report,
                wall: started.elapsed(),
            }
        })
        .collect()
}

/// Run the sampling planner for every seed, writing one plan JSON (when
/// found) and one stats CSV per seed.
pub fn cmd_plan(cfg: &ExperimentConfig) -> i32 {
    if let Err(e) = cfg.validate_for_planning() {
        return fail(e);
    }
    let (model, nba) = match load_inputs(cfg) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let out_dir = cfg.out.clone().unwrap_or_else(|| ".".into());
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail(format!("creating {}: {e}", out_dir.display()));
    }
    let n_pre = cfg.n_pre.unwrap_or(1000);
    let n_suf = cfg.n_suf.unwrap_or(n_pre);
    let flush = cfg.stats_flush_interval.unwrap_or(DEFAULT_STATS_FLUSH);
    let pool = match thread_pool(cfg.workers) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };

    let outcomes = pool.install(|| run_seeds(&model, &nba, n_pre, n_suf, &cfg.seeds));

    let mut any_found = false;
    for o in &outcomes {
        let stats_path = out_dir.join(format!("stats_{}.csv", o.seed));
        if let Err(e) = write_stats_csv(&stats_path, &o.report, flush, false) {
            return fail(e);
        }
        match &o.plan {
            Some(plan) => {
                any_found = true;
                let plan_path = out_dir.join(format!("plan_{}.json", o.seed));
                if let Err(e) = std::fs::write(&plan_path, plan_json(plan)) {
                    return fail(format!("writing {}: {e}", plan_path.display()));
                }
                println!(
                    "seed {}: plan found, total cost {} (prefix {}, suffix {}), {:.1}s",
                    o.seed,
                    plan.total_cost,
                    plan.prefix_cost,
                    plan.suffix_cost,
                    o.wall.as_secs_f64()
                );
            }
            None => {
                println!(
                    "seed {}: no plan found within the budget ({:.1}s)",
                    o.seed,
                    o.wall.as_secs_f64()
                );
            }
        }
    }
    if any_found {
        EXIT_OK
    } else {
        EXIT_NO_PLAN
    }
}

/// Run the explicit graph-search planner and write the optimal plan.
pub fn cmd_oracle(cfg: &ExperimentConfig) -> i32 {
    let (model, nba) = match load_inputs(cfg) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let max_states = cfg.oracle_max_states.unwrap_or(DEFAULT_ORACLE_MAX_STATES);
    let out_dir = cfg.out.clone().unwrap_or_else(|| ".".into());
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail(format!("creating {}: {e}", out_dir.display()));
    }
    match oracle::oracle_optimal_plan(&model, &nba, max_states) {
        Ok(Some(plan)) => {
            let path = out_dir.join("oracle_plan.json");
            if let Err(e) = std::fs::write(&path, plan_json(&plan)) {
                return fail(format!("writing {}: {e}", path.display()));
            }
            println!(
                "oracle optimum: total cost {} (prefix {}, suffix {}) -> {}",
                plan.total_cost,
                plan.prefix_cost,
                plan.suffix_cost,
                path.display()
            );
            EXIT_OK
        }
        Ok(None) => {
            println!("oracle: no plan exists for this task");
            EXIT_NO_PLAN
        }
        Err(OracleError::CapacityExceeded { states, limit }) => {
            eprintln!(
                "oracle: explicit product would have {states} states (limit {limit})"
            );
            EXIT_CAPACITY
        }
        Err(e) => fail(e),
    }
}

#[derive(Serialize)]
struct CompareReport {
    oracle_total_cost: f64,
    oracle_prefix_cost: f64,
    oracle_suffix_cost: f64,
    product_vertices: usize,
    product_edges: usize,
    match_threshold: f64,
    match_rate: f64,
    seeds: Vec<SeedRow>,
}

#[derive(Serialize)]
struct SeedRow {
    seed: u64,
    found: bool,
    total_cost: Option<f64>,
    matches_oracle: bool,
    max_tree_size: usize,
    accepting_found: usize,
    /// per-iteration candidate sweep never exceeds the automaton size
    max_rejected_per_iteration: u32,
    time_to_first_accepting_ms: Option<u64>,
    wall_ms: u64,
}

pub const MATCH_TOLERANCE: f64 = 1e-9;

/// Run the sampling planner over all seeds and the oracle once; report
/// per-seed optimality and exit successfully when the match rate meets
/// the threshold.
pub fn cmd_compare(cfg: &ExperimentConfig) -> i32 {
    if let Err(e) = cfg.validate_for_planning() {
        return fail(e);
    }
    let (model, nba) = match load_inputs(cfg) {
        Ok(x) => x,
        Err(e) => return fail(e),
    };
    let max_states = cfg.oracle_max_states.unwrap_or(DEFAULT_ORACLE_MAX_STATES);
    let out_dir = cfg.out.clone().unwrap_or_else(|| ".".into());
    if let Err(e) = std::fs::create_dir_all(&out_dir) {
        return fail(format!("creating {}: {e}", out_dir.display()));
    }

    let pba = match oracle::build_explicit_pba(&model, &nba, max_states) {
        Ok(p) => p,
        Err(OracleError::CapacityExceeded { states, limit }) => {
            eprintln!("compare: explicit product would have {states} states (limit {limit})");
            return EXIT_CAPACITY;
        }
        Err(e) => return fail(e),
    };
    let oracle_plan = match oracle::oracle_optimal_plan(&model, &nba, max_states) {
        Ok(Some(p)) => p,
        Ok(None) => {
            println!("compare: the task is infeasible; nothing to match against");
            return EXIT_NO_PLAN;
        }
        Err(e) => return fail(e),
    };

    let n_pre = cfg.n_pre.unwrap_or(1000);
    let n_suf = cfg.n_suf.unwrap_or(n_pre);
    let pool = match thread_pool(cfg.workers) {
        Ok(p) => p,
        Err(e) => return fail(e),
    };
    let outcomes = pool.install(|| run_seeds(&model, &nba, n_pre, n_suf, &cfg.seeds));

    let threshold = cfg.match_threshold.unwrap_or(DEFAULT_MATCH_THRESHOLD);
    let mut rows = Vec::new();
    let mut matches = 0usize;
    for o in &outcomes {
        let total = o.plan.as_ref().map(|p| p.total_cost);
        let matched =
            total.is_some_and(|t| (t - oracle_plan.total_cost).abs() <= MATCH_TOLERANCE);
        if matched {
            matches += 1;
        }
        let max_tree_size = o.report.trees.iter().map(|t| t.tree_size).max().unwrap_or(1);
        let max_rejected = o
            .report
            .trees
            .iter()
            .flat_map(|t| t.iterations.iter())
            .map(|it| it.rejected)
            .max()
            .unwrap_or(0);
        let first_accepting = o
            .report
            .trees
            .iter()
            .filter(|t| matches!(t.kind, TreeKind::Prefix { .. }))
            .filter_map(|t| {
                t.first_goal_iteration.map(|n| {
                    t.iterations
                        .get((n.max(1) - 1) as usize)
                        .map(|it| it.elapsed.as_millis() as u64)
                        .unwrap_or(0)
                })
            })
            .min();
        rows.push(SeedRow {
            seed: o.seed,
            found: o.plan.is_some(),
            total_cost: total,
            matches_oracle: matched,
            max_tree_size,
            accepting_found: o.report.accepting_found,
            max_rejected_per_iteration: max_rejected,
            time_to_first_accepting_ms: first_accepting,
            wall_ms: o.wall.as_millis() as u64,
        });
    }
    let match_rate = matches as f64 / cfg.seeds.len() as f64;
    let report = CompareReport {
        oracle_total_cost: oracle_plan.total_cost,
        oracle_prefix_cost: oracle_plan.prefix_cost,
        oracle_suffix_cost: oracle_plan.suffix_cost,
        product_vertices: pba.num_vertices(),
        product_edges: pba.num_edges(),
        match_threshold: threshold,
        match_rate,
        seeds: rows,
    };
    let path = out_dir.join("report.json");
    let text = serde_json::to_string_pretty(&report).expect("serializable") + "\n";
    if let Err(e) = std::fs::write(&path, text) {
        return fail(format!("writing {}: {e}", path.display()));
    }
    println!(
        "compare: match rate {:.3} against oracle cost {} over {} seeds (product: {} vertices, {} edges) -> {}",
        match_rate,
        oracle_plan.total_cost,
        cfg.seeds.len(),
        pba.num_vertices(),
        pba.num_edges(),
        path.display()
    );
    if match_rate >= threshold {
        EXIT_OK
    } else {
        EXIT_NO_PLAN
    }
}
