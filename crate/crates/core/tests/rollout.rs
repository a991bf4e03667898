mod common;

use hs_games::rollout::{simulate_many, simulate_stream, summarize, DEFAULT_MAX_STEPS};
use hs_games::{
    compile_grid, cooperative_policy, hs_values, parse_grid_spec, side_payments_at, simulate,
    IterationOptions,
};
use proptest::prelude::*;

const GATE: &str = r#"{
  "width": 3,
  "height": 3,
  "semi_walls": [[[0, 0], [0, 1]], [[1, 0], [1, 1]], [[2, 0], [2, 1]]],
  "players": [{"id": "A", "start": [0, 0]}, {"id": "B", "start": [2, 0]}],
  "goals": [
    {"cell": [0, 2], "reward": 100, "owners": ["A"]},
    {"cell": [2, 2], "reward": 100, "owners": ["B"]}
  ]
}"#;

fn solved(text: &str) -> (hs_games::StochasticGame, hs_games::HsStochasticResult) {
    let game = compile_grid(&parse_grid_spec(text).unwrap()).unwrap().game;
    let result = hs_values(&game, IterationOptions::default()).unwrap();
    assert!(result.converged());
    (game, result)
}

#[test]
fn semi_walls_make_seeds_matter() {
    let (game, result) = solved(GATE);
    let policy = cooperative_policy(&game, &result).unwrap();
    let paths: Vec<Vec<usize>> = (0..20)
        .map(|seed| {
            simulate(&game, &policy, &result.values, seed, DEFAULT_MAX_STEPS)
                .unwrap()
                .states()
        })
        .collect();
    assert!(paths.iter().any(|p| p != &paths[0]));
}

#[test]
fn same_seed_and_stream_replay_exactly() {
    let (game, result) = solved(GATE);
    let policy = cooperative_policy(&game, &result).unwrap();
    let a = simulate_stream(&game, &policy, &result.values, 5, 3, DEFAULT_MAX_STEPS).unwrap();
    let b = simulate_stream(&game, &policy, &result.values, 5, 3, DEFAULT_MAX_STEPS).unwrap();
    assert_eq!(a, b);
    let many = simulate_many(&game, &policy, &result.values, 5, 8, DEFAULT_MAX_STEPS).unwrap();
    assert_eq!(many[3], a);
}

#[test]
fn stochastic_telescoping_holds_in_expectation() {
    let (game, result) = solved(GATE);
    let policy = cooperative_policy(&game, &result).unwrap();
    let runs = simulate_many(&game, &policy, &result.values, 1, 1000, DEFAULT_MAX_STEPS).unwrap();
    let summary = summarize(&runs).unwrap();
    let start = result.values.get(game.start());
    for i in 0..2 {
        let allowed = (3.0 * summary.std_error[i]).max(1e-6);
        assert!(
            (summary.mean_value[i] - start[i]).abs() <= allowed,
            "{summary:?} vs {start:?}"
        );
    }
}

#[test]
fn truncation_is_flagged() {
    let (game, result) = solved(GATE);
    let policy = cooperative_policy(&game, &result).unwrap();
    let t = simulate(&game, &policy, &result.values, 0, 1).unwrap();
    assert!(t.truncated);
    assert!(t.to_table("HS").contains("truncated"));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(10))]

    #[test]
    fn random_grids_balance_and_telescope(seed in any::<u64>()) {
        let spec = common::random_grid_spec(&mut common::rng(seed));
        let game = compile_grid(&spec).unwrap().game;
        let result = hs_values(&game, IterationOptions::default()).unwrap();
        prop_assume!(result.converged());
        let policy = cooperative_policy(&game, &result).unwrap();
        for s in (0..game.num_states()).filter(|&s| !game.is_terminal(s)) {
            let sp = side_payments_at(&game, &result.values, s, policy.action(s));
            prop_assert!(sp.iter().sum::<f64>().abs() < 1e-6);
        }
        let t = simulate(&game, &policy, &result.values, seed, DEFAULT_MAX_STEPS).unwrap();
        let deterministic = t.steps.iter().all(|st| game.outcomes(st.state, st.joint).count() == 1);
        if deterministic && !t.truncated {
            for (v, s) in t.value.iter().zip(result.values.get(game.start())) {
                prop_assert!((v - s).abs() < 1e-6);
            }
        }
    }
}
