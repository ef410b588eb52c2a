//! Shared helpers for the integration suites: deterministic random
//! instance generation with oracle-verified feasibility.

use planner_core::automaton::Nba;
use planner_core::ltl::{ltl_to_nba_capped, parse_ltl, Ltl};
use planner_core::oracle::{oracle_optimal_plan, product_state_count};
use planner_core::MultiRobotModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub struct Instance {
    pub seed: u64,
    pub model: MultiRobotModel,
    pub model_json: String,
    pub formula_text: String,
    pub nba: Nba,
    pub optimal_cost: f64,
}

/// Bounds for the randomized corpus.
pub struct CorpusShape {
    pub max_robots: usize,
    pub min_states: usize,
    pub max_states: usize,
    pub max_nba_states: usize,
    pub max_product_states: u64,
}

pub const DESK_SHAPE: CorpusShape = CorpusShape {
    max_robots: 3,
    min_states: 2,
    max_states: 6,
    max_nba_states: 12,
    max_product_states: 10_000,
};

pub const TINY_SHAPE: CorpusShape = CorpusShape {
    max_robots: 2,
    min_states: 2,
    max_states: 3,
    max_nba_states: 8,
    max_product_states: 200,
};

/// Weights are quarter-integers so that all path sums are exact in f64;
/// optimality comparisons can then demand equality.
fn dyadic_weight(rng: &mut ChaCha8Rng) -> f64 {
    rng.gen_range(1..=16) as f64 * 0.25
}

fn random_model_json(rng: &mut ChaCha8Rng, shape: &CorpusShape) -> String {
    let robots = rng.gen_range(1..=shape.max_robots);
    let mut out = String::from("{\"robots\": [");
    for id in 1..=robots {
        if id > 1 {
            out.push(',');
        }
        let n = rng.gen_range(shape.min_states..=shape.max_states);
        let states: Vec<String> = (1..=n).map(|i| format!("l{i}")).collect();
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        for i in 0..n {
            edges.push((i, i, 0.0)); // zero-cost waiting everywhere
        }
        // a bidirectional ring keeps every state reachable
        for i in 0..n.saturating_sub(1) {
            let w = dyadic_weight(rng);
            edges.push((i, i + 1, w));
            edges.push((i + 1, i, w));
        }
        // sprinkle extra directed edges
        let extras = rng.gen_range(0..=n);
        for _ in 0..extras {
            let a = rng.gen_range(0..n);
            let b = rng.gen_range(0..n);
            if a != b && !edges.iter().any(|&(x, y, _)| x == a && y == b) {
                edges.push((a, b, dyadic_weight(rng)));
            }
        }
        let initial = rng.gen_range(0..n);
        out.push_str(&format!(
            "{{\"id\": {id}, \"states\": [{}], \"initial\": \"{}\", \"edges\": [{}]}}",
            states
                .iter()
                .map(|s| format!("\"{s}\""))
                .collect::<Vec<_>>()
                .join(", "),
            states[initial],
            edges
                .iter()
                .map(|&(a, b, w)| format!("[\"{}\", \"{}\", {w}]", states[a], states[b]))
                .collect::<Vec<_>>()
                .join(", ")
        ));
    }
    out.push_str("]}");
    out
}

fn random_atom(rng: &mut ChaCha8Rng, model: &MultiRobotModel) -> String {
    let robot = rng.gen_range(0..model.num_robots());
    let wts = model.robot(robot);
    let state = rng.gen_range(0..wts.num_states()) as u32;
    format!("r{}@{}", wts.robot_id, wts.state_name(state))
}

fn random_formula(rng: &mut ChaCha8Rng, model: &MultiRobotModel) -> String {
    let a = random_atom(rng, model);
    let b = random_atom(rng, model);
    let c = random_atom(rng, model);
    match rng.gen_range(0..10) {
        0 => format!("F {a}"),
        1 => format!("G F {a}"),
        2 => format!("F ({a} & F {b})"),
        3 => format!("G F {a} & G F {b}"),
        4 => format!("F {a} & F {b}"),
        5 => format!("X {a}"),
        6 => format!("{a} U {b}"),
        7 => format!("F {a} & G F {b}"),
        8 => format!("G !{a} & F {b}"),
        _ => format!("F ({a} & F ({b} & F {c}))"),
    }
}

/// Deterministically generate the first `count` feasible instances from
/// a candidate stream: a candidate is kept when its automaton and
/// product are within the shape's bounds and the oracle certifies an
/// optimal plan.
pub fn generate_instances(master_seed: u64, count: usize, shape: &CorpusShape) -> Vec<Instance> {
    let mut out = Vec::new();
    let mut candidate = 0u64;
    while out.len() < count {
        candidate += 1;
        let seed = master_seed.wrapping_mul(1_000_003).wrapping_add(candidate);
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let model_json = random_model_json(&mut rng, shape);
        let Ok((model, _)) = MultiRobotModel::load(&model_json) else {
            continue;
        };
        let formula_text = random_formula(&mut rng, &model);
        let Ok(formula) = parse_ltl(&formula_text) else {
            continue;
        };
        let Ok(nba) = ltl_to_nba_capped(&formula, 4096) else {
            continue;
        };
        if nba.num_states() > shape.max_nba_states {
            continue;
        }
        if product_state_count(&model, &nba) > shape.max_product_states as u128 {
            continue;
        }
        let Ok(Some(plan)) = oracle_optimal_plan(&model, &nba, shape.max_product_states) else {
            continue;
        };
        out.push(Instance {
            seed,
            model,
            model_json,
            formula_text,
            nba,
            optimal_cost: plan.total_cost,
        });
    }
    out
}

#[allow(dead_code)]
pub fn write_instance_files(dir: &std::path::Path, inst: &Instance) -> (std::path::PathBuf, std::path::PathBuf) {
    let model_path = dir.join("model.json");
    let ltl_path = dir.join("task.ltl");
    std::fs::write(&model_path, &inst.model_json).unwrap();
    std::fs::write(&ltl_path, format!("{}\n", inst.formula_text)).unwrap();
    (model_path, ltl_path)
}

#[allow(dead_code)]
pub fn ltl_of(inst: &Instance) -> Ltl {
    parse_ltl(&inst.formula_text).unwrap()
}
