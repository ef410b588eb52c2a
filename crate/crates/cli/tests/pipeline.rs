//! End-to-end checks of the command pipeline and the generated
//! benchmark scenarios: the patrol instance whose explicit product has
//! 16*16*24 = 6144 states, budget-ladder behavior toward the exact
//! optimum, automaton ingestion, and command exit codes.

use planner_cli::commands::{self, EXIT_CAPACITY, EXIT_NO_PLAN, EXIT_OK};
use planner_cli::config::ExperimentConfig;
use planner_cli::gen::{self, Meeting};
use planner_core::automaton::parse_nba;
use planner_core::oracle::{build_explicit_pba, oracle_optimal_plan};
use planner_core::planner::{synthesize_with, validate_plan, StatsRetention};
use planner_core::tree::SamplerConfig;
use planner_core::MultiRobotModel;

/// Two robots on a 4x4 grid patrolling 23 stations in a fixed order:
/// the sweep automaton has 24 states, so the explicit product has
/// 16 * 16 * 24 = 6144 states.
fn patrol_instance() -> (MultiRobotModel, planner_core::Nba) {
    let model_json = gen::grid_model(4, 4, 2, 0).unwrap();
    let (model, _) = MultiRobotModel::load(&model_json).unwrap();
    let mut meetings: Vec<Meeting> = (1..=12)
        .map(|j| Meeting {
            robots: vec![1],
            region: format!("l{j}"),
        })
        .collect();
    meetings.extend((1..=11).map(|j| Meeting {
        robots: vec![2],
        region: format!("l{j}"),
    }));
    assert_eq!(meetings.len(), 23);
    let nba = gen::intermittent_nba(&meetings, None);
    assert_eq!(nba.num_states(), 24);
    (model, nba)
}

#[test]
fn patrol_product_has_6144_states_and_ladder_converges_to_optimum() {
    let (model, nba) = patrol_instance();
    let pba = build_explicit_pba(&model, &nba, 1_000_000).unwrap();
    assert_eq!(pba.num_vertices(), 16 * 16 * 24);

    let oracle = oracle_optimal_plan(&model, &nba, 1_000_000)
        .unwrap()
        .expect("patrol is feasible");

    // increasing iteration budgets: found costs never increase and end
    // at the exact optimum once the tree has converged
    let mut last = f64::INFINITY;
    let mut found_at_top = false;
    let budgets = [200u64, 800, 3200, 12800];
    for &budget in &budgets {
        let cfg = SamplerConfig::new(77);
        let (plan, report) = synthesize_with(
            &model,
            &nba,
            budget,
            budget,
            &cfg,
            StatsRetention::Summary,
        );
        if let Some(p) = plan {
            validate_plan(&model, &nba, &p).unwrap();
            assert!(
                p.total_cost <= last + 1e-12,
                "cost increased along the ladder: {last} -> {}",
                p.total_cost
            );
            assert!(p.total_cost >= oracle.total_cost - 1e-9);
            last = p.total_cost;
            found_at_top = budget == *budgets.last().unwrap();
            // the sampled tree never outgrows the explicit product
            let max_tree = report.trees.iter().map(|t| t.tree_size).max().unwrap();
            assert!(max_tree <= pba.num_vertices());
        }
    }
    assert!(found_at_top, "no plan found at the largest budget");
    assert!(
        (last - oracle.total_cost).abs() <= 1e-9,
        "ladder did not reach the optimum: {last} vs {}",
        oracle.total_cost
    );
    println!(
        "patrol ladder reached the oracle optimum {} ({} product states)",
        oracle.total_cost,
        pba.num_vertices()
    );
}

#[test]
fn ingested_automaton_blocks_successors_without_required_atoms() {
    // response fragment of a surveillance task: after a visit to l14 the
    // robot must stay away until l4 is reached
    let text = "\
# !(r2@l14) holds until r1@l4
states: waiting fulfilled
initial: waiting
accepting: fulfilled
alphabet: r2@l14 r1@l4
waiting -- r1@l4 --> fulfilled
waiting -- !r2@l14 & !r1@l4 --> waiting
fulfilled -- true --> fulfilled
";
    let nba = parse_nba(text).unwrap();
    nba.validate().unwrap();
    // enumerate label sets violating every guard leaving the initial state
    let alphabet: Vec<&String> = nba.alphabet().iter().collect();
    let initial = nba.initial_states()[0];
    let mut blocked = Vec::new();
    for mask in 0..(1u32 << alphabet.len()) {
        let labels: std::collections::BTreeSet<String> = alphabet
            .iter()
            .enumerate()
            .filter(|(i, _)| mask & (1 << i) != 0)
            .map(|(_, a)| a.to_string())
            .collect();
        let all_blocked = nba
            .out_edges(initial)
            .all(|e| !nba.guard_sat(&e.guard, &labels).unwrap());
        if all_blocked {
            blocked.push(labels);
        }
    }
    assert!(!blocked.is_empty(), "some label set should block the initial state");
    for labels in blocked {
        assert!(nba.successors(initial, &labels).unwrap().is_empty());
    }
}

#[test]
fn translate_command_reports_sizes_and_rejects_bad_input() {
    let dir = tempfile::tempdir().unwrap();
    let ltl = dir.path().join("task.ltl");
    let out = dir.path().join("task.nba");
    std::fs::write(&ltl, "F a\n").unwrap();
    assert_eq!(commands::cmd_translate(&ltl, &out), EXIT_OK);
    let nba = parse_nba(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(!nba.accepting_states().is_empty());

    // surveillance-task shape: translation succeeds; the size is
    // reported, not asserted
    std::fs::write(
        &ltl,
        "[] <> (r1@l6 & <> r2@l14) & [] !r1@l9 \
         & [] (r2@l14 -> X (!r2@l14 U r1@l4)) & <> r2@l12 & [] <> r2@l10\n",
    )
    .unwrap();
    assert_eq!(commands::cmd_translate(&ltl, &out), EXIT_OK);

    std::fs::write(&ltl, "G F (a &\n").unwrap();
    assert_eq!(commands::cmd_translate(&ltl, &out), commands::EXIT_ERROR);
}

#[test]
fn full_meeting_task_translates_within_capacity() {
    // nine-robot meeting task: the in-repo translation is large but
    // bounded; the generated sweep automaton is the compact alternative
    let meetings =
        gen::parse_meetings("1,2@l5;2,3,4@l1;4,5,6@l7;6,7@l8;7,8@l4;8,9@l3").unwrap();
    let until = gen::parse_until("1,2@l5:1@l7").unwrap();
    let text = gen::intermittent_formula(&meetings, Some(&until));
    let f = planner_core::parse_ltl(&text).unwrap();
    let nba = planner_core::ltl_to_nba(&f).unwrap();
    nba.validate().unwrap();
    println!(
        "meeting task translation: {} states, {} transitions (sweep automaton: 8 states)",
        nba.num_states(),
        nba.num_edges()
    );
}

#[test]
fn sweep_automaton_matches_evaluator_and_translation_on_random_words() {
    // ties the compact benchmark automaton to the actual task at full
    // scale: over random lassos on all 15 atoms, the sweep automaton,
    // the in-repo translation and the semantic evaluator must agree
    use rand::{Rng, SeedableRng};
    let meetings =
        gen::parse_meetings("1,2@l5;2,3,4@l1;4,5,6@l7;6,7@l8;7,8@l4;8,9@l3").unwrap();
    let until = gen::parse_until("1,2@l5:1@l7").unwrap();
    let sweep = gen::intermittent_nba(&meetings, Some(&until));
    let formula = planner_core::parse_ltl(&gen::intermittent_formula(&meetings, Some(&until)))
        .unwrap();
    let translated = planner_core::ltl_to_nba(&formula).unwrap();
    let atoms: Vec<String> = formula.atoms().into_iter().collect();

    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(2718);
    let mut accepted = 0usize;
    for trial in 0..1500 {
        let draw_labels = |rng: &mut rand_chacha::ChaCha8Rng| -> std::collections::BTreeSet<String> {
            // biased towards few atoms per step, like real traces
            atoms
                .iter()
                .filter(|_| rng.gen_bool(0.18))
                .cloned()
                .collect()
        };
        let prefix_len = rng.gen_range(0..=4);
        let cycle_len = rng.gen_range(1..=3);
        let word = planner_core::LassoWord::new(
            (0..prefix_len).map(|_| draw_labels(&mut rng)).collect(),
            (0..cycle_len).map(|_| draw_labels(&mut rng)).collect(),
        );
        let semantic = planner_core::eval_lasso(&formula, &word);
        assert_eq!(
            sweep.accepts_lasso(&word),
            semantic,
            "sweep automaton disagrees on trial {trial}: {word:?}"
        );
        assert_eq!(
            translated.accepts_lasso(&word),
            semantic,
            "translation disagrees on trial {trial}: {word:?}"
        );
        if semantic {
            accepted += 1;
        }
    }
    // with few atoms per step almost every random word violates the
    // recurrence; force some accepting words by construction
    let meeting_steps: Vec<std::collections::BTreeSet<String>> = meetings
        .iter()
        .map(|m| m.atoms().into_iter().collect())
        .collect();
    let trigger: std::collections::BTreeSet<String> = [until.1.clone()].into();
    let accepting_word = planner_core::LassoWord::new(
        vec![std::collections::BTreeSet::new(), trigger],
        meeting_steps,
    );
    assert!(planner_core::eval_lasso(&formula, &accepting_word));
    assert!(sweep.accepts_lasso(&accepting_word));
    assert!(translated.accepts_lasso(&accepting_word));
    // and a word that violates the prelude by meeting before the trigger
    let early_meeting = planner_core::LassoWord::new(
        vec![meetings[0].atoms().into_iter().collect()],
        vec![[until.1.clone()].into()],
    );
    assert!(!planner_core::eval_lasso(&formula, &early_meeting));
    assert!(!sweep.accepts_lasso(&early_meeting));
    assert!(!translated.accepts_lasso(&early_meeting));
    println!("random-word agreement held on 1500 trials ({accepted} accepting)");
}

#[test]
fn plan_exit_codes_and_stats_row_counts() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.json");
    std::fs::write(&model_path, gen::grid_model(2, 2, 1, 0).unwrap()).unwrap();

    // feasible task: one plan, exit 0, stats rows = n_pre * initials
    //                + n_suf * suffix trees
    let ltl_path = dir.path().join("go.ltl");
    std::fs::write(&ltl_path, "F r1@l4\n").unwrap();
    let cfg = ExperimentConfig {
        model: Some(model_path.clone()),
        ltl: Some(ltl_path.clone()),
        n_pre: Some(120),
        n_suf: Some(80),
        seeds: vec![3],
        out: Some(dir.path().join("out_ok")),
        ..Default::default()
    };
    assert_eq!(commands::cmd_plan(&cfg), EXIT_OK);
    let stats = std::fs::read_to_string(dir.path().join("out_ok/stats_3.csv")).unwrap();
    let rows = stats.lines().count() - 1; // header
    let f = planner_core::parse_ltl("F r1@l4").unwrap();
    let nba = planner_core::ltl_to_nba(&f).unwrap();
    let initials = nba.initial_states().len() as u64;
    assert_eq!(rows as u64 % 120, (rows as u64 - 120 * initials) % 120);
    assert!(rows as u64 >= 120 * initials);
    assert_eq!((rows as u64 - 120 * initials) % 80, 0);

    // unsatisfiable task: every seed reports no plan, exit 2
    let bad_path = dir.path().join("bad.ltl");
    std::fs::write(&bad_path, "F r1@l4 & G !r1@l4\n").unwrap();
    let cfg = ExperimentConfig {
        model: Some(model_path.clone()),
        ltl: Some(bad_path),
        n_pre: Some(100),
        n_suf: Some(100),
        seeds: vec![1, 2],
        out: Some(dir.path().join("out_bad")),
        ..Default::default()
    };
    assert_eq!(commands::cmd_plan(&cfg), EXIT_NO_PLAN);
}

#[test]
fn oracle_command_reports_capacity_with_exit_3() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.json");
    std::fs::write(&model_path, gen::grid_model(3, 3, 9, 3).unwrap()).unwrap();
    let nba_path = dir.path().join("task.nba");
    let meetings = gen::parse_meetings("1,2@l5;2,3,4@l1").unwrap();
    std::fs::write(&nba_path, gen::intermittent_nba_text(&meetings, None)).unwrap();
    let cfg = ExperimentConfig {
        model: Some(model_path),
        nba: Some(nba_path),
        out: Some(dir.path().join("out")),
        seeds: vec![1],
        ..Default::default()
    };
    assert_eq!(commands::cmd_oracle(&cfg), EXIT_CAPACITY);
}

#[test]
fn compare_command_matches_on_small_instance() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.json");
    std::fs::write(&model_path, gen::grid_model(2, 2, 1, 0).unwrap()).unwrap();
    let ltl_path = dir.path().join("task.ltl");
    std::fs::write(&ltl_path, "G F r1@l4 & G F r1@l1\n").unwrap();
    let out = dir.path().join("out");
    let cfg = ExperimentConfig {
        model: Some(model_path),
        ltl: Some(ltl_path),
        n_pre: Some(5000),
        n_suf: Some(5000),
        seeds: (1..=10).collect(),
        out: Some(out.clone()),
        ..Default::default()
    };
    assert_eq!(commands::cmd_compare(&cfg), EXIT_OK);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["match_rate"], 1.0);
    // sampled trees stay within the explicit product size
    let vp = report["product_vertices"].as_u64().unwrap();
    for seed in report["seeds"].as_array().unwrap() {
        assert!(seed["max_tree_size"].as_u64().unwrap() <= vp);
        assert!(seed["matches_oracle"].as_bool().unwrap());
    }
}

#[test]
fn worker_count_does_not_change_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let model_path = dir.path().join("model.json");
    std::fs::write(&model_path, gen::grid_model(3, 3, 2, 0).unwrap()).unwrap();
    let ltl_path = dir.path().join("task.ltl");
    std::fs::write(&ltl_path, "G F (r1@l5 & r2@l5) & F r1@l9\n").unwrap();
    let run = |workers: usize, out: std::path::PathBuf| {
        let cfg = ExperimentConfig {
            model: Some(model_path.clone()),
            ltl: Some(ltl_path.clone()),
            n_pre: Some(800),
            n_suf: Some(800),
            seeds: vec![5, 6],
            workers: Some(workers),
            out: Some(out),
            ..Default::default()
        };
        assert_eq!(commands::cmd_plan(&cfg), EXIT_OK);
    };
    run(1, dir.path().join("serial"));
    run(2, dir.path().join("parallel"));
    for name in ["plan_5.json", "plan_6.json", "stats_5.csv", "stats_6.csv"] {
        let a = std::fs::read(dir.path().join("serial").join(name)).ok();
        let b = std::fs::read(dir.path().join("parallel").join(name)).ok();
        assert_eq!(a, b, "artifact {name} differs across worker counts");
        assert!(a.is_some(), "artifact {name} missing");
    }
}

#[test]
fn generated_artifacts_are_byte_stable() {
    let a = gen::grid_model(3, 3, 4, 2).unwrap();
    let b = gen::grid_model(3, 3, 4, 2).unwrap();
    assert_eq!(a, b);
    let meetings = gen::parse_meetings("1,2@l5;3@l1").unwrap();
    assert_eq!(
        gen::intermittent_formula(&meetings, None),
        gen::intermittent_formula(&meetings, None)
    );
    assert_eq!(
        gen::intermittent_nba_text(&meetings, None),
        gen::intermittent_nba_text(&meetings, None)
    );
}
