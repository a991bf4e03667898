//! A user-defined grid with a semi-wall: many seeded rollouts, their mean
//! value against the solved start value, and a CSV dump of the first few.

use hs_games::rollout::{simulate_many, summarize, write_csv, DEFAULT_MAX_STEPS};
use hs_games::{compile_grid, cooperative_policy, hs_values, parse_grid_spec, IterationOptions};

const SPEC: &str = r#"{
  "name": "gate",
  "width": 3,
  "height": 3,
  "semi_walls": [[[1, 0], [1, 1]]],
  "walls": [[[0, 1], [0, 2]]],
  "players": [{"id": "A", "start": [0, 0]}, {"id": "B", "start": [1, 0]}],
  "goals": [
    {"cell": [2, 2], "reward": 100, "owners": ["A"]},
    {"cell": [1, 2], "reward": 100, "owners": ["B"]}
  ]
}"#;

fn main() -> hs_games::Result<()> {
    let spec = parse_grid_spec(SPEC)?;
    let game = compile_grid(&spec)?.game;
    let result = hs_values(&game, IterationOptions::default())?;
    let policy = cooperative_policy(&game, &result)?;
    let runs = simulate_many(&game, &policy, &result.values, 42, 1000, DEFAULT_MAX_STEPS)?;
    let summary = summarize(&runs).expect("at least one rollout");
    println!("solved start value {:?}", result.values.get(game.start()));
    println!("mean rollout value {:?}", summary.mean_value);
    println!("standard error     {:?}", summary.std_error);
    write_csv(&runs[..3], std::io::stdout())
}
